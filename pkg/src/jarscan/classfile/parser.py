"""Binary decoding of JVM class files and JAR containers."""

from __future__ import annotations

import io
import logging
import struct
import zipfile

from ..errors import (
    BadConstantPoolRef,
    BadMagic,
    ClassParseError,
    MalformedArchive,
    TruncatedInput,
    UnsupportedVersion,
)
from .constant_pool import (
    TAG_CLASS,
    TAG_DOUBLE,
    TAG_DYNAMIC,
    TAG_FIELDREF,
    TAG_FLOAT,
    TAG_INTEGER,
    TAG_INTERFACE_METHODREF,
    TAG_INVOKE_DYNAMIC,
    TAG_LONG,
    TAG_METHOD_HANDLE,
    TAG_METHOD_TYPE,
    TAG_METHODREF,
    TAG_MODULE,
    TAG_NAME_AND_TYPE,
    TAG_PACKAGE,
    TAG_STRING,
    TAG_UTF8,
    WIDE_TAGS,
    ConstantPool,
    CpEntry,
)
from .descriptors import parse_method_descriptor, validate_field_descriptor
from .model import (
    ClassFile,
    CodeAttribute,
    ExceptionHandler,
    FieldInfo,
    Instruction,
    JarArchive,
    MethodInfo,
    ParseFailure,
)
from .opcodes import OPCODES, WIDE

log = logging.getLogger(__name__)

MAGIC = 0xCAFEBABE
MIN_MAJOR = 45
MAX_MAJOR = 65


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedInput(
                f"needed {n} bytes at offset {self.pos}, have {len(self.data) - self.pos}"
            )
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u1(self) -> int:
        return self._take(1)[0]

    def u2(self) -> int:
        return struct.unpack(">H", self._take(2))[0]

    def u4(self) -> int:
        return struct.unpack(">I", self._take(4))[0]

    def s4(self) -> int:
        return struct.unpack(">i", self._take(4))[0]

    def raw(self, n: int) -> bytes:
        return self._take(n)


def _parse_constant_pool(r: _Reader) -> ConstantPool:
    count = r.u2()
    entries: dict[int, CpEntry] = {}
    index = 1
    while index < count:
        tag = r.u1()
        if tag == TAG_UTF8:
            length = r.u2()
            raw = r.raw(length)
            # Modified UTF-8; surrogate escapes keep odd bytes round-trippable.
            value = raw.replace(b"\xc0\x80", b"\x00").decode("utf-8", "surrogateescape")
            entries[index] = CpEntry(tag, value)
        elif tag == TAG_INTEGER:
            entries[index] = CpEntry(tag, struct.unpack(">i", r.raw(4))[0])
        elif tag == TAG_FLOAT:
            entries[index] = CpEntry(tag, struct.unpack(">f", r.raw(4))[0])
        elif tag == TAG_LONG:
            entries[index] = CpEntry(tag, struct.unpack(">q", r.raw(8))[0])
        elif tag == TAG_DOUBLE:
            entries[index] = CpEntry(tag, struct.unpack(">d", r.raw(8))[0])
        elif tag in (TAG_CLASS, TAG_STRING, TAG_METHOD_TYPE, TAG_MODULE, TAG_PACKAGE):
            entries[index] = CpEntry(tag, r.u2())
        elif tag in (TAG_FIELDREF, TAG_METHODREF, TAG_INTERFACE_METHODREF,
                     TAG_NAME_AND_TYPE, TAG_DYNAMIC, TAG_INVOKE_DYNAMIC):
            entries[index] = CpEntry(tag, (r.u2(), r.u2()))
        elif tag == TAG_METHOD_HANDLE:
            entries[index] = CpEntry(tag, (r.u1(), r.u2()))
        else:
            raise ClassParseError(f"unknown constant pool tag {tag} at index {index}")
        index += 2 if tag in WIDE_TAGS else 1
    return ConstantPool(entries)


def decode_instructions(code: bytes, base_reader: _Reader | None = None) -> tuple[Instruction, ...]:
    """Decode a Code array into instructions with absolute branch targets."""
    out: list[Instruction] = []
    pos = 0
    n = len(code)

    def need(k: int):
        if pos + k > n:
            raise TruncatedInput(f"code array ends inside instruction at {start}")

    while pos < n:
        start = pos
        op = code[pos]
        pos += 1
        wide = False
        if op == WIDE:
            need(1)
            wide = True
            op = code[pos]
            pos += 1
        info = OPCODES.get(op)
        if info is None:
            raise ClassParseError(f"unknown opcode 0x{op:02x} at offset {start}")
        mnemonic, fmt = info
        if wide and fmt not in ("local", "iinc"):
            raise ClassParseError(f"wide prefix before {mnemonic} at offset {start}")

        if fmt == "":
            operands: tuple = ()
        elif fmt == "i8":
            need(1)
            operands = (struct.unpack_from(">b", code, pos)[0],)
            pos += 1
        elif fmt == "i16":
            need(2)
            operands = (struct.unpack_from(">h", code, pos)[0],)
            pos += 2
        elif fmt == "u8":
            need(1)
            operands = (code[pos],)
            pos += 1
        elif fmt == "cp8":
            need(1)
            operands = (code[pos],)
            pos += 1
        elif fmt == "cp16":
            need(2)
            operands = (struct.unpack_from(">H", code, pos)[0],)
            pos += 2
        elif fmt == "local":
            if wide:
                need(2)
                operands = (struct.unpack_from(">H", code, pos)[0],)
                pos += 2
            else:
                need(1)
                operands = (code[pos],)
                pos += 1
        elif fmt == "iinc":
            if wide:
                need(4)
                slot, delta = struct.unpack_from(">Hh", code, pos)
                pos += 4
            else:
                need(2)
                slot, delta = struct.unpack_from(">Bb", code, pos)
                pos += 2
            operands = (slot, delta)
        elif fmt == "br16":
            need(2)
            rel = struct.unpack_from(">h", code, pos)[0]
            pos += 2
            operands = (start + rel,)
        elif fmt == "br32":
            need(4)
            rel = struct.unpack_from(">i", code, pos)[0]
            pos += 4
            operands = (start + rel,)
        elif fmt == "iface":
            need(4)
            idx, count = struct.unpack_from(">HB", code, pos)
            pos += 4
            operands = (idx, count)
        elif fmt == "indy":
            need(4)
            idx = struct.unpack_from(">H", code, pos)[0]
            pos += 4
            operands = (idx,)
        elif fmt == "multi":
            need(3)
            idx, dims = struct.unpack_from(">HB", code, pos)
            pos += 3
            operands = (idx, dims)
        elif fmt == "table":
            pad = (4 - (pos % 4)) % 4
            need(pad + 12)
            pos += pad
            default, low, high = struct.unpack_from(">iii", code, pos)
            pos += 12
            if low > high:
                raise ClassParseError(f"tableswitch low > high at offset {start}")
            count = high - low + 1
            need(count * 4)
            targets = struct.unpack_from(f">{count}i", code, pos)
            pos += count * 4
            operands = (start + default, low, high,
                        tuple(start + t for t in targets))
        elif fmt == "lookup":
            pad = (4 - (pos % 4)) % 4
            need(pad + 8)
            pos += pad
            default, npairs = struct.unpack_from(">ii", code, pos)
            pos += 8
            if npairs < 0:
                raise ClassParseError(f"lookupswitch npairs < 0 at offset {start}")
            need(npairs * 8)
            pairs = []
            for _ in range(npairs):
                match, offset = struct.unpack_from(">ii", code, pos)
                pos += 8
                pairs.append((match, start + offset))
            operands = (start + default, tuple(pairs))
        else:  # pragma: no cover - table is exhaustive
            raise ClassParseError(f"unhandled operand format {fmt}")

        out.append(Instruction(start, mnemonic, operands))
    return tuple(out)


def branch_targets(ins: Instruction) -> tuple[int, ...]:
    """All absolute branch targets of one instruction (empty if none)."""
    m = ins.mnemonic
    if m == "tableswitch":
        default, _low, _high, targets = ins.operands
        return (default, *targets)
    if m == "lookupswitch":
        default, pairs = ins.operands
        return (default, *(t for _, t in pairs))
    if m in ("goto", "goto_w", "jsr", "jsr_w") or m.startswith("if"):
        return (ins.operands[0],)
    return ()


def _validate_targets(instructions: tuple[Instruction, ...],
                      table: tuple[ExceptionHandler, ...]) -> None:
    offsets = {ins.offset for ins in instructions}
    for ins in instructions:
        for t in branch_targets(ins):
            if t not in offsets:
                raise ClassParseError(
                    f"branch target {t} of {ins.mnemonic}@{ins.offset} "
                    f"is not an instruction boundary"
                )
    for h in table:
        if h.handler not in offsets:
            raise ClassParseError(f"exception handler pc {h.handler} is not a boundary")
        if h.start > h.end or h.start not in offsets:
            raise ClassParseError(f"bad exception range [{h.start}, {h.end})")


def _parse_code_attribute(data: bytes, pool: ConstantPool) -> CodeAttribute:
    r = _Reader(data)
    max_stack = r.u2()
    max_locals = r.u2()
    code_len = r.u4()
    code = r.raw(code_len)
    instructions = decode_instructions(code)
    table = []
    for _ in range(r.u2()):
        start, end, handler, catch_idx = r.u2(), r.u2(), r.u2(), r.u2()
        catch = pool.class_name(catch_idx).replace("/", ".") if catch_idx else None
        table.append(ExceptionHandler(start, end, handler, catch))
    # Code sub-attributes (LineNumberTable, StackMapTable, ...) are skipped.
    for _ in range(r.u2()):
        r.u2()
        r.raw(r.u4())
    attr = CodeAttribute(max_stack, max_locals, instructions, tuple(table))
    _validate_targets(instructions, attr.exception_table)
    return attr


def _parse_member(r: _Reader, pool: ConstantPool, want_code: bool):
    access = r.u2()
    name = pool.utf8(r.u2())
    desc = pool.utf8(r.u2())
    code = None
    for _ in range(r.u2()):
        attr_name = pool.utf8(r.u2())
        length = r.u4()
        payload = r.raw(length)
        if want_code and attr_name == "Code":
            code = _parse_code_attribute(payload, pool)
    return access, name, desc, code


def parse_class(data: bytes) -> ClassFile:
    """Decode one class file; raises ClassParseError subclasses on bad input."""
    r = _Reader(data)
    if len(data) < 4 or r.u4() != MAGIC:
        raise BadMagic("class file does not start with 0xCAFEBABE")
    r.u2()  # minor
    major = r.u2()
    if not MIN_MAJOR <= major <= MAX_MAJOR:
        raise UnsupportedVersion(
            f"class file major version {major} outside supported {MIN_MAJOR}..{MAX_MAJOR}"
        )
    pool = _parse_constant_pool(r)
    access = r.u2()
    this_class = pool.class_name(r.u2()).replace("/", ".")
    super_idx = r.u2()
    super_class = pool.class_name(super_idx).replace("/", ".") if super_idx else None
    interfaces = tuple(pool.class_name(r.u2()).replace("/", ".")
                       for _ in range(r.u2()))
    fields = []
    for _ in range(r.u2()):
        acc, name, desc, _ = _parse_member(r, pool, want_code=False)
        validate_field_descriptor(desc)
        fields.append(FieldInfo(name, desc, acc))
    methods = []
    for _ in range(r.u2()):
        acc, name, desc, code = _parse_member(r, pool, want_code=True)
        parse_method_descriptor(desc)
        methods.append(MethodInfo(name, desc, acc, code))
    # Class-level attributes skipped by length.
    for _ in range(r.u2()):
        r.u2()
        r.raw(r.u4())
    return ClassFile(
        major_version=major,
        access_flags=access,
        this_class=this_class,
        super_class=super_class,
        interfaces=interfaces,
        fields=tuple(fields),
        methods=tuple(methods),
        constant_pool=pool,
    )


def parse_jar(data: bytes) -> JarArchive:
    """Decode a JAR; per-entry class failures are collected, never fatal."""
    try:
        zf = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise MalformedArchive(str(exc)) from exc

    classes: list[tuple[str, ClassFile]] = []
    others: list[str] = []
    failures: list[ParseFailure] = []
    metadata = False
    seen: set[str] = set()
    for info in zf.infolist():
        path = info.filename
        if path in seen:
            log.warning("duplicate JAR entry %s ignored", path)
            continue
        seen.add(path)
        if path.startswith("META-INF/") or path == "pom.xml" or path.endswith("/pom.xml"):
            metadata = True
        if path.endswith("/"):
            continue
        if path.endswith(".jar"):
            log.warning("nested archive %s not recursed into", path)
            others.append(path)
            continue
        if not path.endswith(".class"):
            others.append(path)
            continue
        try:
            classes.append((path, parse_class(zf.read(path))))
        except ClassParseError as exc:
            log.warning("failed to parse %s: %s", path, exc)
            failures.append(ParseFailure(path, str(exc)))
    return JarArchive(classes=classes, other_entries=others,
                      failures=failures, metadata_present=metadata)
