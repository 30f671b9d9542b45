"""Generate modified variants of fixture JARs.

Type 1 re-emits every class through a compiler-variant transformer (local
slot permutation, branch polarity flips, nop padding), simulating a
different compilation environment without shipping a second compiler.
Type 2 re-bundles several JARs into one, keeping each input's metadata
under the merged META-INF. Type 3 additionally strips metadata and
flattens timestamps. Type 4 re-bundles and relocates every class under a
package prefix, rewriting all internal references.

Only classes within the emitter's subset can be transformed, which covers
everything the synthetic corpus produces.
"""

from __future__ import annotations

import io
import logging
import random
import re
import zipfile

from .classfile.constant_pool import ConstantPool
from .classfile.descriptors import parse_method_descriptor, param_slots
from .classfile.emitter import ClassModel, FieldModel, MethodModel, emit_class
from .classfile.model import ClassFile, MethodInfo
from .classfile.opcodes import NEWARRAY_TYPES
from .classfile.parser import branch_targets, parse_class
from .errors import RelocationCollision, UnsupportedFeature

log = logging.getLogger(__name__)

_FIELD_OPS = {"getstatic", "putstatic", "getfield", "putfield"}
_INVOKE_OPS = {"invokevirtual", "invokespecial", "invokestatic"}
_CLASS_OPS = {"new", "anewarray", "checkcast", "instanceof"}
_LDC_KIND_TO_PSEUDO = {
    "int": "ldc_int", "float": "ldc_float", "string": "ldc_string",
    "class": "ldc_class", "long": "ldc_long", "double": "ldc_double",
}
_NEGATE = {
    "ifeq": "ifne", "ifne": "ifeq", "iflt": "ifge", "ifge": "iflt",
    "ifgt": "ifle", "ifle": "ifgt",
    "if_icmpeq": "if_icmpne", "if_icmpne": "if_icmpeq",
    "if_icmplt": "if_icmpge", "if_icmpge": "if_icmplt",
    "if_icmpgt": "if_icmple", "if_icmple": "if_icmpgt",
    "if_acmpeq": "if_acmpne", "if_acmpne": "if_acmpeq",
    "ifnull": "ifnonnull", "ifnonnull": "ifnull",
}
_LOAD_STORE_CAT1 = {"iload", "fload", "aload", "istore", "fstore", "astore"}
_LOAD_STORE_CAT2 = {"lload", "dload", "lstore", "dstore"}


# ------------------------------------------------- class file -> builder model

def _code_to_asm(method: MethodInfo, pool: ConstantPool,
                 rename: dict[str, str] | None = None) -> tuple[list, list]:
    """Decode a Code attribute back into assembler items with labels."""
    rename = rename or {}

    def rn(dotted: str) -> str:
        return rename.get(dotted, dotted)

    def rn_desc(desc: str) -> str:
        return re.sub(
            r"L([^;]+);",
            lambda m: "L%s;" % rn(m.group(1).replace("/", ".")).replace(".", "/"),
            desc)

    code = method.code
    label_offsets = set()
    for ins in code.instructions:
        label_offsets.update(branch_targets(ins))
    for h in code.exception_table:
        label_offsets.update((h.start, h.end, h.handler))

    items: list = []
    end = code.instructions[-1].offset + 1 if code.instructions else 0
    for ins in code.instructions:
        if ins.offset in label_offsets:
            items.append(f"L{ins.offset}:")
        m = ins.mnemonic
        if m in ("ldc", "ldc_w", "ldc2_w"):
            kind, value = pool.loadable(ins.operands[0])
            if kind == "other":
                raise UnsupportedFeature(f"cannot re-emit ldc of tag {value}")
            if kind == "class":
                value = rn(value.replace("/", "."))
            items.append((_LDC_KIND_TO_PSEUDO[kind], value))
        elif m in _FIELD_OPS or m in _INVOKE_OPS:
            owner, name, desc = pool.member_ref(ins.operands[0])
            items.append((m, rn(owner.replace("/", ".")), name, rn_desc(desc)))
        elif m in _CLASS_OPS:
            name = pool.class_name(ins.operands[0])
            if name.startswith("["):
                raise UnsupportedFeature("array class operands not supported")
            items.append((m, rn(name.replace("/", "."))))
        elif m == "newarray":
            items.append((m, NEWARRAY_TYPES[ins.operands[0]]))
        elif m in ("invokeinterface", "invokedynamic", "multianewarray"):
            raise UnsupportedFeature(f"cannot re-emit {m}")
        elif m == "tableswitch":
            default, low, high, targets = ins.operands
            items.append((m, f"L{default}", low, high, [f"L{t}" for t in targets]))
        elif m == "lookupswitch":
            default, pairs = ins.operands
            items.append((m, f"L{default}", [(v, f"L{t}") for v, t in pairs]))
        elif m in ("goto", "goto_w", "jsr", "jsr_w") or m.startswith("if"):
            items.append((m, f"L{ins.operands[0]}"))
        elif ins.operands:
            items.append((m, *ins.operands))
        else:
            items.append(m)

    handlers = []
    trailing_labels = {h.end for h in code.exception_table if h.end >= end}
    for off in sorted(trailing_labels):
        items.append(f"L{off}:")
    for h in code.exception_table:
        handlers.append((f"L{h.start}", f"L{h.end}", f"L{h.handler}",
                         rn(h.catch_type) if h.catch_type else None))
    return items, handlers


def model_from_classfile(cf: ClassFile, rename: dict[str, str] | None = None) -> ClassModel:
    """Rebuild a ClassModel from a parsed class, optionally renaming classes.

    rename maps dotted FQNs; descriptors are rewritten accordingly.
    """
    rename = rename or {}

    def rn(dotted: str | None):
        return rename.get(dotted, dotted) if dotted else dotted

    def rn_desc(desc: str) -> str:
        return re.sub(
            r"L([^;]+);",
            lambda m: "L%s;" % (rename.get(m.group(1).replace("/", "."),
                                           m.group(1).replace("/", "."))
                                ).replace(".", "/"),
            desc)

    methods = []
    for m in cf.methods:
        if m.code is None:
            methods.append(MethodModel(m.name, rn_desc(m.descriptor), m.access_flags))
            continue
        items, handlers = _code_to_asm(m, cf.constant_pool, rename)
        methods.append(MethodModel(m.name, rn_desc(m.descriptor), m.access_flags,
                                   code=items, handlers=handlers))
    return ClassModel(
        name=rn(cf.this_class),
        super_name=rn(cf.super_class),
        interfaces=[rn(i) for i in cf.interfaces],
        access=cf.access_flags,
        major=cf.major_version,
        fields=[FieldModel(f.name, rn_desc(f.descriptor), f.access_flags)
                for f in cf.fields],
        methods=methods,
    )


# ------------------------------------------------------------ type 1 variant

def _permutable_slots(items: list, method: MethodModel, is_static: bool) -> list[int]:
    params, _ = parse_method_descriptor(method.descriptor)
    fixed = param_slots(params) + (0 if is_static else 1)
    cat1: set[int] = set()
    cat2: set[int] = set()
    for it in items:
        if isinstance(it, tuple):
            base = it[0].split("_")[0]
            if it[0] in _LOAD_STORE_CAT1 or it[0] == "iinc":
                cat1.add(it[1])
            elif it[0] in _LOAD_STORE_CAT2:
                cat2.update((it[1], it[1] + 1))
            elif base in _LOAD_STORE_CAT1 and it[0] != base:
                cat1.add(int(it[0].rsplit("_", 1)[1]))
            elif base in _LOAD_STORE_CAT2 and it[0] != base:
                s = int(it[0].rsplit("_", 1)[1])
                cat2.update((s, s + 1))
        elif isinstance(it, str) and not it.endswith(":"):
            base = it.split("_")[0]
            if base in _LOAD_STORE_CAT1 and "_" in it:
                cat1.add(int(it.rsplit("_", 1)[1]))
            elif base in _LOAD_STORE_CAT2 and "_" in it:
                s = int(it.rsplit("_", 1)[1])
                cat2.update((s, s + 1))
    return sorted(s for s in cat1 if s >= fixed and s not in cat2)


def _apply_slot_permutation(items: list, perm: dict[int, int]) -> list:
    out = []
    for it in items:
        if isinstance(it, str) and not it.endswith(":"):
            base = it.split("_")[0]
            if base in _LOAD_STORE_CAT1 and "_" in it:
                slot = int(it.rsplit("_", 1)[1])
                out.append((base, perm.get(slot, slot)))
                continue
        if isinstance(it, tuple):
            if it[0] in _LOAD_STORE_CAT1:
                out.append((it[0], perm.get(it[1], it[1])))
                continue
            if it[0] == "iinc":
                out.append((it[0], perm.get(it[1], it[1]), it[2]))
                continue
        out.append(it)
    return out


def _apply_polarity_flips(items: list, rng: random.Random) -> list:
    out = []
    counter = 0
    for it in items:
        if (isinstance(it, tuple) and it[0] in _NEGATE and rng.random() < 0.5):
            skip = f"_flip{counter}"
            counter += 1
            out.append((_NEGATE[it[0]], skip))
            out.append(("goto", it[1]))
            out.append(skip + ":")
        else:
            out.append(it)
    return out


def _apply_nop_padding(items: list, rng: random.Random) -> list:
    out = []
    for it in items:
        if not (isinstance(it, str) and it.endswith(":")) and rng.random() < 0.25:
            out.append("nop")
        out.append(it)
    return out


def compiler_variant(data: bytes, rng: random.Random) -> bytes:
    """Re-emit one class with permuted slots, flipped branch polarity and
    nop padding; semantics-preserving, bytes-changing."""
    cf = parse_class(data)
    model = model_from_classfile(cf)
    for method, parsed in zip(model.methods, cf.methods):
        if method.code is None:
            continue
        slots = _permutable_slots(method.code, method, parsed.is_static)
        if len(slots) > 1:
            shuffled = slots[:]
            rng.shuffle(shuffled)
            perm = dict(zip(slots, shuffled))
            method.code = _apply_slot_permutation(method.code, perm)
        method.code = _apply_polarity_flips(method.code, rng)
        method.code = _apply_nop_padding(method.code, rng)
        method.handlers = list(method.handlers)
    return emit_class(model)


# ------------------------------------------------------------------- modify

def _read_entries(jar_bytes: bytes) -> list[tuple[str, bytes]]:
    with zipfile.ZipFile(io.BytesIO(jar_bytes)) as zf:
        return [(i.filename, zf.read(i.filename))
                for i in zf.infolist() if not i.filename.endswith("/")]


def _write_jar(entries: list[tuple[str, bytes]], date_time) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        for path, data in entries:
            info = zipfile.ZipInfo(path, date_time=date_time)
            info.external_attr = 0o644 << 16
            zf.writestr(info, data)
    return buf.getvalue()


def _is_metadata(path: str) -> bool:
    return (path.startswith("META-INF/") or path == "pom.xml"
            or path.endswith("/pom.xml") or path.endswith("pom.properties"))


def _merge(jars: list[bytes], keep_metadata: bool) -> list[tuple[str, bytes]]:
    merged: list[tuple[str, bytes]] = []
    seen: set[str] = set()
    for idx, jar in enumerate(jars):
        for path, data in _read_entries(jar):
            if _is_metadata(path):
                if keep_metadata:
                    new_path = f"META-INF/bundled/{idx}/{path.removeprefix('META-INF/')}"
                    merged.append((new_path, data))
                continue
            if path in seen:
                log.warning("duplicate entry %s while merging; keeping first", path)
                continue
            seen.add(path)
            merged.append((path, data))
    if keep_metadata:
        merged.insert(0, ("META-INF/MANIFEST.MF",
                          b"Manifest-Version: 1.0\r\nCreated-By: jarscan-modify\r\n\r\n"))
    return merged


def modify(jars: list[bytes], kind: int, *, prefix: str = "r.",
           seed: int = 0) -> bytes:
    """Produce a modified variant: 1 re-compile simulation (single JAR),
    2 uber-JAR merge, 3 bare merge (metadata stripped), 4 re-packaged
    merge under the given dotted prefix."""
    if kind == 1:
        if len(jars) != 1:
            raise ValueError("type 1 operates on exactly one JAR")
        rng = random.Random(seed)
        out = []
        for path, data in _read_entries(jars[0]):
            if path.endswith(".class"):
                out.append((path, compiler_variant(data, rng)))
            else:
                out.append((path, data))
        return _write_jar(out, (2020, 1, 1, 0, 0, 0))

    if kind == 2:
        return _write_jar(_merge(jars, keep_metadata=True), (2020, 1, 1, 0, 0, 0))

    if kind == 3:
        return _write_jar(_merge(jars, keep_metadata=False), (1980, 1, 1, 0, 0, 0))

    if kind == 4:
        if not prefix.endswith("."):
            prefix = prefix + "."
        merged = _merge(jars, keep_metadata=True)
        member_fqns = {
            path[:-len(".class")].replace("/", "."): None
            for path, _ in merged if path.endswith(".class")
        }
        rename = {fqn: prefix + fqn for fqn in member_fqns}
        if len(set(rename.values())) != len(rename):
            raise RelocationCollision("relocated names collide")
        existing = {path for path, _ in merged}
        out = []
        for path, data in merged:
            if not path.endswith(".class"):
                out.append((path, data))
                continue
            cf = parse_class(data)
            new_model = model_from_classfile(cf, rename)
            new_path = new_model.name.replace(".", "/") + ".class"
            if new_path in existing:
                raise RelocationCollision(f"{new_path} already exists in the bundle")
            out.append((new_path, emit_class(new_model)))
        return _write_jar(out, (2020, 1, 1, 0, 0, 0))

    raise ValueError(f"unknown modification kind {kind}")
