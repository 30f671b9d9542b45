"""Synthetic vulnerability corpus: ten fake CVEs over ten small libraries.

Each library lives in its own package and each CVE's constructs stay within
one library, so scanning any single JAR can only surface its own CVE.
Change kinds covered: changed methods (both with and without removed
triplets), added methods, removed methods, an added-only fix, a
removed-only fix, a constructor-inlined field fix, and a static-initializer
-only fix. Every class carries enough sibling methods and fields for
re-packaging class contexts to work with.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from jarscan.classfile import (
    ClassModel,
    FieldModel,
    MethodModel,
    class_entry_path,
    default_constructor,
    emit_class,
    write_jar,
)

STATIC = 0x09  # public static


def _klass(name, methods, fields=()):
    return ClassModel(
        name,
        fields=[FieldModel(n, d, 0x0009) for n, d in fields],
        methods=[default_constructor()] + methods,
    )


def _m(name, desc, code):
    return MethodModel(name, desc, access=STATIC, code=code)


def _clinit(code):
    return MethodModel("<clinit>", "()V", access=0x0008, code=code)


# Small helper bodies reused as sibling methods.
def _sibling(name, k):
    return _m(name, "(I)I", ["iload_0", ("push_int", k), "iadd", "ireturn"])


# --------------------------------------------------------------- libraries

def lib_alpha():
    """CVE-9000-0001: changed method, fix only adds a guard (NT empty)."""
    siblings = [_sibling("scale", 3), _sibling("offset", 7), _sibling("wrap", 11)]
    fields = [("limit", "I"), ("mode", "I")]
    pre = _klass("alpha.core.Parser", [
        _m("parse", "(I)I", ["iload_0", "iconst_2", "imul", "ireturn"]),
        *siblings,
    ], fields)
    post = _klass("alpha.core.Parser", [
        _m("parse", "(I)I", [
            "iload_0", ("ifge", "OK"), "iconst_0", "ireturn",
            "OK:", "iload_0", "iconst_2", "imul", "ireturn"]),
        *siblings,
    ], fields)
    return [pre], [post]


def lib_beta():
    """CVE-9000-0002: changed method, fix removes a leak and changes a
    multiplier (NT nonempty)."""
    siblings = [_sibling("retries", 2), _sibling("backoff", 9), _sibling("window", 5)]
    fields = [("seed", "I"), ("flags", "I")]
    pre = _klass("beta.net.Http", [
        _m("token", "(I)I", [
            "iload_0", ("push_int", 31), "imul", "istore_1",
            "iload_1", ("putstatic", "beta.net.Http", "seed", "I"),
            "iload_1", "ireturn"]),
        *siblings,
    ], fields)
    post = _klass("beta.net.Http", [
        _m("token", "(I)I", [
            "iload_0", ("push_int", 17), "imul", "istore_1",
            "iload_1", "ireturn"]),
        *siblings,
    ], fields)
    return [pre], [post]


def lib_gamma():
    """CVE-9000-0003: added validator method plus changed caller."""
    siblings = [_sibling("depth", 4), _sibling("width", 6), _sibling("pad", 8)]
    fields = [("budget", "I"), ("strict", "I")]
    pre = _klass("gamma.json.Decoder", [
        _m("decode", "(I)I", ["iload_0", "iconst_1", "iadd", "ireturn"]),
        *siblings,
    ], fields)
    post = _klass("gamma.json.Decoder", [
        _m("decode", "(I)I", [
            "iload_0", ("invokestatic", "gamma.json.Decoder", "check", "(I)I"),
            "iconst_1", "iadd", "ireturn"]),
        _m("check", "(I)I", [
            "iload_0", ("ifge", "OK"), "iconst_0", "ireturn",
            "OK:", "iload_0", "ireturn"]),
        *siblings,
    ], fields)
    return [pre], [post]


def lib_delta():
    """CVE-9000-0004: removed dangerous method plus changed caller."""
    siblings = [_sibling("attr", 5), _sibling("ns", 13), _sibling("depth2", 1)]
    fields = [("entities", "I"), ("level", "I")]
    pre = _klass("delta.xml.Reader", [
        _m("read", "(I)I", [
            "iload_0", ("invokestatic", "delta.xml.Reader", "resolveEntity", "(I)I"),
            "ireturn"]),
        _m("resolveEntity", "(I)I", ["iload_0", ("push_int", 100), "iadd", "ireturn"]),
        *siblings,
    ], fields)
    post = _klass("delta.xml.Reader", [
        _m("read", "(I)I", ["iload_0", "ireturn"]),
        *siblings,
    ], fields)
    return [pre], [post]


def lib_eps():
    """CVE-9000-0005: added-only fix (new hardening method)."""
    siblings = [_sibling("expiry", 60), _sibling("issuer", 2), _sibling("aud", 3)]
    fields = [("clock", "I"), ("leeway", "I")]
    pre = _klass("eps.auth.Token", [
        _m("verify", "(I)I", ["iload_0", "ireturn"]),
        *siblings,
    ], fields)
    post = _klass("eps.auth.Token", [
        _m("verify", "(I)I", ["iload_0", "ireturn"]),
        _m("verifyStrict", "(I)I", [
            "iload_0", ("ifne", "OK"), "iconst_m1", "ireturn",
            "OK:", "iload_0", "ireturn"]),
        *siblings,
    ], fields)
    return [pre], [post]


def lib_zeta():
    """CVE-9000-0006: removed-only fix (legacy path deleted)."""
    siblings = [_sibling("bufsize", 512), _sibling("chunk", 64), _sibling("mark", 1)]
    fields = [("pos", "I"), ("cap", "I")]
    pre = _klass("zeta.io.Stream", [
        _m("read", "(I)I", ["iload_0", "ireturn"]),
        _m("legacyRead", "(I)I", ["iload_0", "iconst_4", "ishl", "ireturn"]),
        *siblings,
    ], fields)
    post = _klass("zeta.io.Stream", [
        _m("read", "(I)I", ["iload_0", "ireturn"]),
        *siblings,
    ], fields)
    return [pre], [post]


def lib_eta():
    """CVE-9000-0007: two changed methods, majority vote over 2 records."""
    siblings = [_sibling("indent", 2), _sibling("tabs", 4), _sibling("cols", 80)]
    fields = [("style", "I"), ("locale", "I")]
    pre = _klass("eta.text.Fmt", [
        _m("escape", "(I)I", ["iload_0", ("push_int", 64), "iadd", "ireturn"]),
        _m("quote", "(I)I", ["iload_0", ("push_int", 34), "ixor", "ireturn"]),
        *siblings,
    ], fields)
    post = _klass("eta.text.Fmt", [
        _m("escape", "(I)I", [
            "iload_0", ("push_int", 127), ("if_icmple", "OK"),
            ("push_int", 63), "ireturn",
            "OK:", "iload_0", ("push_int", 64), "iadd", "ireturn"]),
        _m("quote", "(I)I", [
            "iload_0", ("ifge", "OK"), "iconst_0", "ireturn",
            "OK:", "iload_0", ("push_int", 34), "ixor", "ireturn"]),
        *siblings,
    ], fields)
    return [pre], [post]


def lib_theta():
    """CVE-9000-0008: field initialization fix, inlined into <init>."""
    siblings = [_sibling("rows", 10), _sibling("cols2", 20), _sibling("joins", 2)]
    fields = [("quoting", "I"), ("timeout", "I")]

    def ctor(value):
        return MethodModel("<init>", "()V", 0x0001, code=[
            ("aload", 0),
            ("invokespecial", "java.lang.Object", "<init>", "()V"),
            ("aload", 0), ("push_int", value),
            ("putfield", "theta.db.Query", "quoting", "I"),
            "return"])

    pre = ClassModel("theta.db.Query",
                     fields=[FieldModel(n, d, 0x0001) for n, d in fields],
                     methods=[ctor(0), _m("run", "(I)I", ["iload_0", "ireturn"]),
                              *siblings])
    post = ClassModel("theta.db.Query",
                      fields=[FieldModel(n, d, 0x0001) for n, d in fields],
                      methods=[ctor(1), _m("run", "(I)I", ["iload_0", "ireturn"]),
                               *siblings])
    return [pre], [post]


def lib_iota():
    """CVE-9000-0009: static-initializer-only fix (blocklist grows)."""
    siblings = [_sibling("get", 1), _sibling("put", 2), _sibling("del", 3)]
    fields = [("BLOCK_A", "I"), ("BLOCK_B", "I"), ("BLOCK_C", "I")]

    def clinit(extra):
        code = [
            ("push_int", 100), ("putstatic", "iota.cfg.Options", "BLOCK_A", "I"),
            ("push_int", 200), ("putstatic", "iota.cfg.Options", "BLOCK_B", "I"),
        ]
        if extra:
            code += [("push_int", 300),
                     ("putstatic", "iota.cfg.Options", "BLOCK_C", "I")]
        return _clinit(code + ["return"])

    pre = _klass("iota.cfg.Options", [clinit(False),
                                      _m("lookup", "(I)I", ["iload_0", "ireturn"]),
                                      *siblings], fields)
    post = _klass("iota.cfg.Options", [clinit(True),
                                       _m("lookup", "(I)I", ["iload_0", "ireturn"]),
                                       *siblings], fields)
    return [pre], [post]


def lib_kappa():
    """CVE-9000-0010: all three change kinds in one fix."""
    siblings = [_sibling("crc", 7), _sibling("ratio", 9), _sibling("dict", 11)]
    fields = [("level", "I"), ("method", "I")]
    pre = _klass("kappa.zip.Packer", [
        _m("pack", "(I)I", ["iload_0", "iconst_3", "imul", "ireturn"]),
        _m("unsafeInflate", "(I)I", ["iload_0", "iconst_5", "ishl", "ireturn"]),
        *siblings,
    ], fields)
    post = _klass("kappa.zip.Packer", [
        _m("pack", "(I)I", [
            "iload_0", ("push_int", 1000), ("if_icmple", "OK"),
            ("push_int", 1000), "istore_0",
            "OK:", "iload_0", "iconst_3", "imul", "ireturn"]),
        _m("safeInflate", "(I)I", [
            "iload_0", ("ifge", "OK"), "iconst_0", "ireturn",
            "OK:", "iload_0", "iconst_5", "ishl", "ireturn"]),
        *siblings,
    ], fields)
    return [pre], [post]


LIBS = {
    "CVE-9000-0001": lib_alpha,
    "CVE-9000-0002": lib_beta,
    "CVE-9000-0003": lib_gamma,
    "CVE-9000-0004": lib_delta,
    "CVE-9000-0005": lib_eps,
    "CVE-9000-0006": lib_zeta,
    "CVE-9000-0007": lib_eta,
    "CVE-9000-0008": lib_theta,
    "CVE-9000-0009": lib_iota,
    "CVE-9000-0010": lib_kappa,
}


@dataclass
class Corpus:
    cve_ids: list
    pre_classes: dict = field(default_factory=dict)   # cve -> [(name, bytes)]
    post_classes: dict = field(default_factory=dict)
    pre_jars: dict = field(default_factory=dict)      # cve -> jar bytes
    post_jars: dict = field(default_factory=dict)


def build_corpus() -> Corpus:
    corpus = Corpus(cve_ids=sorted(LIBS))
    for cve, factory in LIBS.items():
        pre_models, post_models = factory()
        pre = [(m.name, emit_class(m)) for m in pre_models]
        post = [(m.name, emit_class(m)) for m in post_models]
        corpus.pre_classes[cve] = pre
        corpus.post_classes[cve] = post
        corpus.pre_jars[cve] = write_jar(
            [(class_entry_path(n), b) for n, b in pre])
        corpus.post_jars[cve] = write_jar(
            [(class_entry_path(n), b) for n, b in post])
    return corpus


def materialize_manifest(corpus: Corpus, root) -> str:
    """Write pre/post class dirs plus a manifest file; returns its path."""
    lines = []
    for cve in corpus.cve_ids:
        pre_dir = root / cve / "pre"
        post_dir = root / cve / "post"
        for name, data in corpus.pre_classes[cve]:
            p = pre_dir / (name.replace(".", "/") + ".class")
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_bytes(data)
        for name, data in corpus.post_classes[cve]:
            p = post_dir / (name.replace(".", "/") + ".class")
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_bytes(data)
        lines.append(f"{cve} {cve}/pre {cve}/post synthetic fixture")
    manifest = root / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(manifest)
