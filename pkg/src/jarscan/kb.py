"""Knowledge base: CVE ids mapped to construct-level fix signatures.

Built once from pre/post-fix compiled classes, persisted as a single
versioned text file (sorted JSON body, trailing checksum), and queried by
fully qualified or unqualified construct names during scans.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .classfile.constructs import ConstructId, strip_packages
from .classfile.descriptors import method_signature, render_type
from .classfile.model import ClassFile, MethodInfo
from .classfile.parser import parse_class
from .cpg import FixSignature, deserialize_triplets, serialize_triplets
from .errors import ClassParseError, CorruptFile, EmptyDiff, KbFormatError, LiftError, VersionMismatch

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
_HEADER = "jarscan-kb"


@dataclass(frozen=True)
class ManifestEntry:
    cve_id: str
    pre_dir: Path
    post_dir: Path
    provenance: str = ""


@dataclass(frozen=True)
class ConstructRecord:
    """One construct touched by a fix: its identity, how it changed,
    the triplet signature (changed methods only) and the declaring
    class's post-fix member context."""

    construct: ConstructId
    change: str                       # added | removed | changed
    signature: FixSignature | None
    class_context: frozenset = frozenset()

    @property
    def declaring_class(self) -> str:
        fqn = self.construct.fqn
        return fqn.split(":", 1)[0] if self.construct.kind == "method" else fqn


@dataclass
class KnowledgeBase:
    format_version: int = FORMAT_VERSION
    records: dict = field(default_factory=dict)   # cve_id -> [ConstructRecord]

    def __post_init__(self):
        self._reindex()

    def _reindex(self):
        self.fqn_index: dict[str, set] = {}
        self.unqualified_index: dict[str, set] = {}
        self._class_candidates: dict[str, set] = {}
        self._unq_class_candidates: dict[str, set] = {}
        for cve, records in self.records.items():
            for rec in records:
                self.fqn_index.setdefault(rec.construct.fqn, set()).add(cve)
                if rec.construct.kind == "method":
                    self.unqualified_index.setdefault(
                        rec.construct.unqualified, set()).add((cve, rec.construct.fqn))
                cls = rec.declaring_class
                self._class_candidates.setdefault(cls, set()).add(cve)
                self._unq_class_candidates.setdefault(
                    strip_packages(cls), set()).add(cve)

    def cve_ids(self) -> list[str]:
        return sorted(self.records)

    def candidate_cves_for_class(self, class_fqn: str) -> set:
        """CVEs whose records live in the given class (by FQN)."""
        return set(self._class_candidates.get(class_fqn, ()))

    def candidate_cves_for_unqualified_class(self, unq_name: str) -> set:
        return set(self._unq_class_candidates.get(unq_name, ()))

    def __eq__(self, other):
        return (isinstance(other, KnowledgeBase)
                and self.format_version == other.format_version
                and self.records == other.records)


def query_fqn(kb: KnowledgeBase, fqn: str) -> set:
    """CVE ids whose fix touched the construct with this exact FQN."""
    return set(kb.fqn_index.get(fqn, ()))


def query_unqualified(kb: KnowledgeBase, unqualified_sig: str) -> set:
    """(cve_id, fqn) pairs of method records matching the unqualified
    signature; ambiguity is expected and resolved later by class context."""
    return set(kb.unqualified_index.get(unqualified_sig, ()))


# ------------------------------------------------------------------ building

def class_member_context(cf: ClassFile, exclude_method: tuple | None = None) -> frozenset:
    """Unqualified sibling signatures and field names of a class.

    exclude_method is a (name, descriptor) pair left out of the set (the
    matched construct itself is not its own sibling).
    """
    items = set()
    for m in cf.methods:
        if exclude_method and (m.name, m.descriptor) == exclude_method:
            continue
        items.add(strip_packages(method_signature(cf.this_class, m.name, m.descriptor)))
    unq_cls = strip_packages(cf.this_class)
    for f in cf.fields:
        items.add(f"{unq_cls}#{f.name}:{strip_packages(render_type(f.descriptor))}")
    return frozenset(items)


def _method_triplets_or_none(cf: ClassFile, method: MethodInfo):
    from .cpg import method_triplets
    if method.code is None:
        return None
    try:
        return method_triplets(cf, method)
    except LiftError as exc:
        log.warning("cannot lift %s.%s%s: %s", cf.this_class, method.name,
                    method.descriptor, exc)
        return None


def build_entry(cve_id: str, pre_classes: list[ClassFile],
                post_classes: list[ClassFile]) -> list[ConstructRecord]:
    """Diff pre/post-fix classes into construct records.

    Raises EmptyDiff when nothing differs after normalization.
    """
    pre = {cf.this_class: cf for cf in pre_classes}
    post = {cf.this_class: cf for cf in post_classes}
    records: list[ConstructRecord] = []

    for name in sorted(pre.keys() | post.keys()):
        pre_cf, post_cf = pre.get(name), post.get(name)
        if pre_cf is None or post_cf is None:
            present = post_cf or pre_cf
            kind = "interface" if present.is_interface else "class"
            change = "added" if pre_cf is None else "removed"
            cid = ConstructId(kind, name, strip_packages(name))
            records.append(ConstructRecord(
                construct=cid, change=change, signature=None,
                class_context=class_member_context(present)))
            continue

        pre_methods = {(m.name, m.descriptor): m for m in pre_cf.methods}
        post_methods = {(m.name, m.descriptor): m for m in post_cf.methods}
        for key in sorted(pre_methods.keys() | post_methods.keys()):
            mname, mdesc = key
            fqn = method_signature(name, mname, mdesc)
            cid = ConstructId("method", fqn, strip_packages(fqn))
            pre_m, post_m = pre_methods.get(key), post_methods.get(key)
            if post_m is None:
                records.append(ConstructRecord(
                    construct=cid, change="removed", signature=None,
                    class_context=class_member_context(post_cf, exclude_method=key)))
                continue
            if pre_m is None:
                records.append(ConstructRecord(
                    construct=cid, change="added", signature=None,
                    class_context=class_member_context(post_cf, exclude_method=key)))
                continue
            t_pre = _method_triplets_or_none(pre_cf, pre_m)
            t_post = _method_triplets_or_none(post_cf, post_m)
            if t_pre is not None and t_post is not None:
                if t_pre == t_post:
                    continue
                records.append(ConstructRecord(
                    construct=cid, change="changed",
                    signature=_diff_signature(t_pre, t_post),
                    class_context=class_member_context(post_cf, exclude_method=key)))
            else:
                # Unliftable on at least one side: fall back to comparing
                # decoded code; presence/absence rules still apply at scan.
                if pre_m.code == post_m.code:
                    continue
                records.append(ConstructRecord(
                    construct=cid, change="changed", signature=None,
                    class_context=class_member_context(post_cf, exclude_method=key)))

    if not records:
        raise EmptyDiff(f"{cve_id}: pre and post classes are identical after normalization")
    records.sort(key=lambda r: (r.construct.fqn, r.change))
    return records


def _diff_signature(t_pre, t_post) -> FixSignature:
    from .cpg import diff
    return diff(t_pre, t_post)


# ---------------------------------------------------------------- persistence

def _record_to_json(rec: ConstructRecord) -> dict:
    out = {
        "kind": rec.construct.kind,
        "fqn": rec.construct.fqn,
        "change": rec.change,
        "context": sorted(rec.class_context),
        "signature": None,
    }
    if rec.signature is not None:
        out["signature"] = {
            "ct": serialize_triplets(rec.signature.ct),
            "pt": serialize_triplets(rec.signature.pt),
            "nt": serialize_triplets(rec.signature.nt),
        }
    return out


def _record_from_json(obj: dict) -> ConstructRecord:
    sig = None
    if obj.get("signature") is not None:
        s = obj["signature"]
        sig = FixSignature(ct=deserialize_triplets(s["ct"]),
                           pt=deserialize_triplets(s["pt"]),
                           nt=deserialize_triplets(s["nt"]))
    fqn = obj["fqn"]
    cid = ConstructId(obj["kind"], fqn, strip_packages(fqn))
    return ConstructRecord(construct=cid, change=obj["change"], signature=sig,
                           class_context=frozenset(obj.get("context", ())))


def save(kb: KnowledgeBase, path) -> None:
    """Write the versioned, checksummed, byte-deterministic KB file."""
    body = json.dumps(
        {cve: [_record_to_json(r) for r in sorted(
            records, key=lambda r: (r.construct.fqn, r.change))]
         for cve, records in kb.records.items()},
        sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    payload = f"{_HEADER} {kb.format_version}\n{body}\n"
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    Path(path).write_text(payload + f"sha256={digest}\n", encoding="utf-8")


def load(path) -> KnowledgeBase:
    """Read a KB file; raises VersionMismatch or CorruptFile."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines(keepends=True)
    if len(lines) < 3 or not lines[0].startswith(_HEADER + " "):
        raise KbFormatError(f"{path}: not a knowledge-base file")
    try:
        version = int(lines[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise KbFormatError(f"{path}: unreadable version header") from exc
    if version != FORMAT_VERSION:
        raise VersionMismatch(
            f"{path}: format version {version}, expected {FORMAT_VERSION}")
    checksum_line = lines[-1].strip()
    payload = "".join(lines[:-1])
    if not checksum_line.startswith("sha256="):
        raise CorruptFile(f"{path}: missing checksum")
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    if checksum_line != f"sha256={digest}":
        raise CorruptFile(f"{path}: checksum mismatch")
    try:
        data = json.loads("".join(lines[1:-1]))
    except json.JSONDecodeError as exc:
        raise KbFormatError(f"{path}: body is not valid JSON") from exc
    records = {cve: [_record_from_json(o) for o in objs]
               for cve, objs in data.items()}
    return KnowledgeBase(format_version=version, records=records)


# ------------------------------------------------------------------ manifest

def parse_manifest(path) -> list[ManifestEntry]:
    """Line format: cve_id pre_dir post_dir provenance-free-text."""
    entries = []
    base = Path(path).parent
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(maxsplit=3)
        if len(parts) < 3:
            raise KbFormatError(f"{path}:{lineno}: expected 'cve pre_dir post_dir [provenance]'")
        cve, pre_dir, post_dir = parts[:3]
        provenance = parts[3] if len(parts) > 3 else ""
        entries.append(ManifestEntry(
            cve, (base / pre_dir).resolve(), (base / post_dir).resolve(), provenance))
    seen = set()
    for e in entries:
        if e.cve_id in seen:
            raise KbFormatError(f"duplicate manifest entry {e.cve_id}")
        seen.add(e.cve_id)
    return entries


def _classes_in_dir(directory: Path) -> list[ClassFile]:
    out = []
    for p in sorted(directory.rglob("*.class")):
        try:
            out.append(parse_class(p.read_bytes()))
        except ClassParseError as exc:
            log.warning("skipping %s: %s", p, exc)
    return out


@dataclass
class BuildStats:
    built: list = field(default_factory=list)
    empty_diff: list = field(default_factory=list)
    errors: list = field(default_factory=list)   # (cve, message)


def build_from_manifest(manifest_path) -> tuple[KnowledgeBase, BuildStats]:
    """Build a KnowledgeBase from compiled pre/post class directories."""
    stats = BuildStats()
    records: dict[str, list] = {}
    for entry in parse_manifest(manifest_path):
        pre = _classes_in_dir(entry.pre_dir)
        post = _classes_in_dir(entry.post_dir)
        if not pre or not post:
            stats.errors.append((entry.cve_id, "pre or post directory has no classes"))
            continue
        try:
            records[entry.cve_id] = build_entry(entry.cve_id, pre, post)
            stats.built.append(entry.cve_id)
        except EmptyDiff as exc:
            log.warning("%s", exc)
            stats.empty_diff.append(entry.cve_id)
    return KnowledgeBase(records=records), stats
