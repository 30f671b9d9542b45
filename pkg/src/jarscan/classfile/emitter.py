"""Class-file emission: a constant-pool builder, a label-based code
assembler, and a small builder model sufficient for synthetic test classes.

The emitter covers the constant kinds Utf8, Class, NameAndType, Fieldref,
Methodref, String, Integer, Long, Float and Double; anything else raises
UnsupportedFeature. parse_class(emit_class(m)) decodes back to exactly the
instruction list the assembler resolved (see resolve_method_code).
"""

from __future__ import annotations

import io
import struct
import zipfile
from dataclasses import dataclass, field

from ..errors import UnsupportedFeature
from .constant_pool import (
    TAG_CLASS,
    TAG_DOUBLE,
    TAG_FIELDREF,
    TAG_FLOAT,
    TAG_INTEGER,
    TAG_LONG,
    TAG_METHODREF,
    TAG_NAME_AND_TYPE,
    TAG_STRING,
    TAG_UTF8,
    WIDE_TAGS,
)
from .descriptors import category, param_slots, parse_method_descriptor
from .model import ACC_STATIC, CodeAttribute, ExceptionHandler, Instruction
from .opcodes import MNEMONIC_TO_OPCODE, NEWARRAY_CODES, WIDE

ACC_PUBLIC = 0x0001
ACC_SUPER = 0x0020
DEFAULT_CLASS_ACCESS = ACC_PUBLIC | ACC_SUPER
INTERFACE_ACCESS = 0x0601  # public abstract interface

# Emitted classes target major version 49 (Java 5): no StackMapTable needed.
DEFAULT_MAJOR = 49


@dataclass
class FieldModel:
    name: str
    descriptor: str
    access: int = ACC_PUBLIC


@dataclass
class MethodModel:
    name: str
    descriptor: str
    access: int = ACC_PUBLIC
    code: list | None = None       # asm items; None for abstract/native
    handlers: list[tuple[str, str, str, str | None]] = field(default_factory=list)
    max_stack: int | None = None   # computed when None
    max_locals: int | None = None


@dataclass
class ClassModel:
    name: str                      # dotted FQN
    super_name: str | None = "java.lang.Object"
    interfaces: list[str] = field(default_factory=list)
    access: int = DEFAULT_CLASS_ACCESS
    major: int = DEFAULT_MAJOR
    fields: list[FieldModel] = field(default_factory=list)
    methods: list[MethodModel] = field(default_factory=list)


class PoolBuilder:
    """Interning constant-pool writer restricted to the supported kinds."""

    def __init__(self):
        self._index: dict[tuple, int] = {}
        self._entries: list[tuple] = []  # (tag, raw-bytes-ready payload)
        self._next = 1

    def _intern(self, key: tuple, tag: int, payload: tuple) -> int:
        got = self._index.get(key)
        if got is not None:
            return got
        idx = self._next
        self._index[key] = idx
        self._entries.append((tag, payload))
        self._next += 2 if tag in WIDE_TAGS else 1
        return idx

    def utf8(self, text: str) -> int:
        return self._intern(("u", text), TAG_UTF8, (text,))

    def class_ref(self, dotted: str) -> int:
        internal = dotted.replace(".", "/")
        return self._intern(("c", internal), TAG_CLASS, (self.utf8(internal),))

    def name_and_type(self, name: str, desc: str) -> int:
        return self._intern(("nt", name, desc), TAG_NAME_AND_TYPE,
                            (self.utf8(name), self.utf8(desc)))

    def field_ref(self, owner: str, name: str, desc: str) -> int:
        return self._intern(("f", owner, name, desc), TAG_FIELDREF,
                            (self.class_ref(owner), self.name_and_type(name, desc)))

    def method_ref(self, owner: str, name: str, desc: str) -> int:
        return self._intern(("m", owner, name, desc), TAG_METHODREF,
                            (self.class_ref(owner), self.name_and_type(name, desc)))

    def string(self, value: str) -> int:
        return self._intern(("s", value), TAG_STRING, (self.utf8(value),))

    def integer(self, value: int) -> int:
        return self._intern(("i", value), TAG_INTEGER, (value,))

    def long(self, value: int) -> int:
        return self._intern(("j", value), TAG_LONG, (value,))

    def float(self, value: float) -> int:
        bits = struct.unpack(">I", struct.pack(">f", value))[0]
        return self._intern(("fl", bits), TAG_FLOAT, (value,))

    def double(self, value: float) -> int:
        bits = struct.unpack(">Q", struct.pack(">d", value))[0]
        return self._intern(("d", bits), TAG_DOUBLE, (value,))

    def count(self) -> int:
        return self._next

    def encode(self) -> bytes:
        out = io.BytesIO()
        for tag, payload in self._entries:
            out.write(struct.pack(">B", tag))
            if tag == TAG_UTF8:
                raw = payload[0].encode("utf-8", "surrogateescape").replace(b"\x00", b"\xc0\x80")
                out.write(struct.pack(">H", len(raw)))
                out.write(raw)
            elif tag == TAG_INTEGER:
                out.write(struct.pack(">i", payload[0]))
            elif tag == TAG_LONG:
                out.write(struct.pack(">q", payload[0]))
            elif tag == TAG_FLOAT:
                out.write(struct.pack(">f", payload[0]))
            elif tag == TAG_DOUBLE:
                out.write(struct.pack(">d", payload[0]))
            elif tag in (TAG_CLASS, TAG_STRING):
                out.write(struct.pack(">H", payload[0]))
            else:  # NameAndType, Fieldref, Methodref
                out.write(struct.pack(">HH", payload[0], payload[1]))
        return out.getvalue()


_FIELD_OPS = frozenset({"getstatic", "putstatic", "getfield", "putfield"})
_INVOKE_OPS = frozenset({"invokevirtual", "invokespecial", "invokestatic"})
_CLASS_OPS = frozenset({"new", "anewarray", "checkcast", "instanceof"})
_PSEUDO_LDC = frozenset({"ldc_int", "ldc_float", "ldc_string", "ldc_class",
                         "ldc_long", "ldc_double"})
_UNSUPPORTED = frozenset({"invokeinterface", "invokedynamic", "multianewarray"})


def _is_label(item) -> bool:
    return isinstance(item, str) and item.endswith(":")


@dataclass
class _Pending:
    mnemonic: str
    operands: tuple          # symbolic (labels unresolved)
    offset: int = 0
    size: int = 0
    cp_index: int | None = None
    wide: bool = False


def _plan(code: list, pool: PoolBuilder) -> tuple[list[_Pending], dict[str, int]]:
    """Pass 1: intern constants, size every instruction, place labels."""
    pending: list[_Pending] = []
    label_to_slot: dict[str, int] = {}
    for item in code:
        if _is_label(item):
            label_to_slot[item[:-1]] = len(pending)
            continue
        if isinstance(item, str):
            item = (item,)
        mnem, *ops = item
        if mnem in _UNSUPPORTED:
            raise UnsupportedFeature(f"emitter does not support {mnem}")
        p = _Pending(mnem, tuple(ops))
        if mnem in _PSEUDO_LDC:
            value = ops[0]
            if mnem == "ldc_int":
                p.cp_index = pool.integer(value)
            elif mnem == "ldc_float":
                p.cp_index = pool.float(value)
            elif mnem == "ldc_string":
                p.cp_index = pool.string(value)
            elif mnem == "ldc_class":
                p.cp_index = pool.class_ref(value)
            elif mnem == "ldc_long":
                p.cp_index = pool.long(value)
            else:
                p.cp_index = pool.double(value)
        elif mnem in _FIELD_OPS:
            p.cp_index = pool.field_ref(*ops)
        elif mnem in _INVOKE_OPS:
            p.cp_index = pool.method_ref(*ops)
        elif mnem in _CLASS_OPS:
            p.cp_index = pool.class_ref(ops[0])
        elif mnem not in MNEMONIC_TO_OPCODE and mnem != "push_int":
            raise UnsupportedFeature(f"unknown mnemonic {mnem!r}")
        pending.append(p)

    offset = 0
    for p in pending:
        p.offset = offset
        p.size = _sized(p, offset)
        offset += p.size
    labels = {name: pending[slot].offset if slot < len(pending) else offset
              for name, slot in label_to_slot.items()}
    return pending, labels


def _sized(p: _Pending, offset: int) -> int:
    m = p.mnemonic
    if m == "push_int":
        v = p.operands[0]
        if -1 <= v <= 5:
            return 1
        if -128 <= v <= 127:
            return 2
        if -32768 <= v <= 32767:
            return 3
        raise UnsupportedFeature("push_int beyond 16 bits; use ldc_int")
    if m in ("ldc_long", "ldc_double"):
        return 3
    if m in _PSEUDO_LDC:
        return 2 if p.cp_index <= 255 else 3
    if m in _FIELD_OPS or m in _INVOKE_OPS or m in _CLASS_OPS:
        return 3
    if m == "tableswitch":
        _default, low, high, _targets = p.operands
        pad = (4 - ((offset + 1) % 4)) % 4
        return 1 + pad + 12 + 4 * (high - low + 1)
    if m == "lookupswitch":
        _default, pairs = p.operands
        pad = (4 - ((offset + 1) % 4)) % 4
        return 1 + pad + 8 + 8 * len(pairs)
    if m in ("iload", "lload", "fload", "dload", "aload",
             "istore", "lstore", "fstore", "dstore", "astore", "ret"):
        slot = p.operands[0]
        if slot > 255:
            p.wide = True
            return 4
        return 2
    if m == "iinc":
        slot, delta = p.operands
        if slot > 255 or not -128 <= delta <= 127:
            p.wide = True
            return 6
        return 3
    if m in ("bipush", "newarray"):
        return 2
    if m == "sipush":
        return 3
    if m in ("goto_w", "jsr_w"):
        return 5
    if m == "goto" or m == "jsr" or m.startswith("if"):
        return 3
    return 1


def _encode(pending: list[_Pending], labels: dict[str, int]) -> tuple[bytes, list[Instruction]]:
    """Pass 2: emit bytes and the decoded-form instruction list."""
    out = io.BytesIO()
    resolved: list[Instruction] = []

    def target(name) -> int:
        if name not in labels:
            raise UnsupportedFeature(f"undefined label {name!r}")
        return labels[name]

    for p in pending:
        m, ops, offset = p.mnemonic, p.operands, p.offset
        if m == "push_int":
            v = ops[0]
            if -1 <= v <= 5:
                real = "iconst_m1" if v == -1 else f"iconst_{v}"
                out.write(bytes([MNEMONIC_TO_OPCODE[real]]))
                resolved.append(Instruction(offset, real))
            elif -128 <= v <= 127:
                out.write(struct.pack(">Bb", MNEMONIC_TO_OPCODE["bipush"], v))
                resolved.append(Instruction(offset, "bipush", (v,)))
            else:
                out.write(struct.pack(">Bh", MNEMONIC_TO_OPCODE["sipush"], v))
                resolved.append(Instruction(offset, "sipush", (v,)))
        elif m in ("ldc_long", "ldc_double"):
            out.write(struct.pack(">BH", MNEMONIC_TO_OPCODE["ldc2_w"], p.cp_index))
            resolved.append(Instruction(offset, "ldc2_w", (p.cp_index,)))
        elif m in _PSEUDO_LDC:
            if p.cp_index <= 255:
                out.write(struct.pack(">BB", MNEMONIC_TO_OPCODE["ldc"], p.cp_index))
                resolved.append(Instruction(offset, "ldc", (p.cp_index,)))
            else:
                out.write(struct.pack(">BH", MNEMONIC_TO_OPCODE["ldc_w"], p.cp_index))
                resolved.append(Instruction(offset, "ldc_w", (p.cp_index,)))
        elif m in _FIELD_OPS or m in _INVOKE_OPS or m in _CLASS_OPS:
            out.write(struct.pack(">BH", MNEMONIC_TO_OPCODE[m], p.cp_index))
            resolved.append(Instruction(offset, m, (p.cp_index,)))
        elif m == "newarray":
            code = NEWARRAY_CODES[ops[0]] if isinstance(ops[0], str) else ops[0]
            out.write(struct.pack(">BB", MNEMONIC_TO_OPCODE[m], code))
            resolved.append(Instruction(offset, m, (code,)))
        elif m == "tableswitch":
            default, low, high, targets = ops
            pad = (4 - ((offset + 1) % 4)) % 4
            out.write(bytes([MNEMONIC_TO_OPCODE[m]]) + b"\x00" * pad)
            abs_default = target(default)
            abs_targets = tuple(target(t) for t in targets)
            out.write(struct.pack(">iii", abs_default - offset, low, high))
            for t in abs_targets:
                out.write(struct.pack(">i", t - offset))
            resolved.append(Instruction(offset, m, (abs_default, low, high, abs_targets)))
        elif m == "lookupswitch":
            default, pairs = ops
            pad = (4 - ((offset + 1) % 4)) % 4
            out.write(bytes([MNEMONIC_TO_OPCODE[m]]) + b"\x00" * pad)
            abs_default = target(default)
            abs_pairs = tuple((match, target(lbl)) for match, lbl in pairs)
            out.write(struct.pack(">ii", abs_default - offset, len(abs_pairs)))
            for match, t in abs_pairs:
                out.write(struct.pack(">ii", match, t - offset))
            resolved.append(Instruction(offset, m, (abs_default, abs_pairs)))
        elif m in ("goto_w", "jsr_w"):
            t = target(ops[0])
            out.write(struct.pack(">Bi", MNEMONIC_TO_OPCODE[m], t - offset))
            resolved.append(Instruction(offset, m, (t,)))
        elif m == "goto" or m == "jsr" or m.startswith("if"):
            t = target(ops[0])
            rel = t - offset
            if not -32768 <= rel <= 32767:
                raise UnsupportedFeature("branch distance beyond 16 bits")
            out.write(struct.pack(">Bh", MNEMONIC_TO_OPCODE[m], rel))
            resolved.append(Instruction(offset, m, (t,)))
        elif m in ("iload", "lload", "fload", "dload", "aload",
                   "istore", "lstore", "fstore", "dstore", "astore", "ret"):
            slot = ops[0]
            if p.wide:
                out.write(struct.pack(">BBH", WIDE, MNEMONIC_TO_OPCODE[m], slot))
            else:
                out.write(struct.pack(">BB", MNEMONIC_TO_OPCODE[m], slot))
            resolved.append(Instruction(offset, m, (slot,)))
        elif m == "iinc":
            slot, delta = ops
            if p.wide:
                out.write(struct.pack(">BBHh", WIDE, MNEMONIC_TO_OPCODE[m], slot, delta))
            else:
                out.write(struct.pack(">BBb", MNEMONIC_TO_OPCODE[m], slot, delta))
            resolved.append(Instruction(offset, m, (slot, delta)))
        elif m == "bipush":
            out.write(struct.pack(">Bb", MNEMONIC_TO_OPCODE[m], ops[0]))
            resolved.append(Instruction(offset, m, (ops[0],)))
        elif m == "sipush":
            out.write(struct.pack(">Bh", MNEMONIC_TO_OPCODE[m], ops[0]))
            resolved.append(Instruction(offset, m, (ops[0],)))
        else:
            out.write(bytes([MNEMONIC_TO_OPCODE[m]]))
            resolved.append(Instruction(offset, m))
    return out.getvalue(), resolved


# Stack-slot effect of the fixed-delta mnemonics (computed ones handled in code).
_FIXED_DELTA = {
    "nop": 0, "aconst_null": 1,
    "iaload": -1, "faload": -1, "aaload": -1, "baload": -1, "caload": -1,
    "saload": -1, "laload": 0, "daload": 0,
    "iastore": -3, "fastore": -3, "aastore": -3, "bastore": -3, "castore": -3,
    "sastore": -3, "lastore": -4, "dastore": -4,
    "pop": -1, "pop2": -2, "dup": 1, "dup_x1": 1, "dup_x2": 1,
    "dup2": 2, "dup2_x1": 2, "dup2_x2": 2, "swap": 0,
    "iadd": -1, "isub": -1, "imul": -1, "idiv": -1, "irem": -1,
    "fadd": -1, "fsub": -1, "fmul": -1, "fdiv": -1, "frem": -1,
    "ladd": -2, "lsub": -2, "lmul": -2, "ldiv": -2, "lrem": -2,
    "dadd": -2, "dsub": -2, "dmul": -2, "ddiv": -2, "drem": -2,
    "ineg": 0, "lneg": 0, "fneg": 0, "dneg": 0,
    "ishl": -1, "ishr": -1, "iushr": -1, "lshl": -1, "lshr": -1, "lushr": -1,
    "iand": -1, "ior": -1, "ixor": -1, "land": -2, "lor": -2, "lxor": -2,
    "iinc": 0,
    "i2l": 1, "i2f": 0, "i2d": 1, "l2i": -1, "l2f": -1, "l2d": 0,
    "f2i": 0, "f2l": 1, "f2d": 1, "d2i": -1, "d2l": 0, "d2f": -1,
    "i2b": 0, "i2c": 0, "i2s": 0,
    "lcmp": -3, "fcmpl": -1, "fcmpg": -1, "dcmpl": -3, "dcmpg": -3,
    "goto": 0, "goto_w": 0, "jsr": 1, "jsr_w": 1, "ret": 0,
    "tableswitch": -1, "lookupswitch": -1,
    "new": 1, "newarray": 0, "anewarray": 0, "arraylength": 0,
    "checkcast": 0, "instanceof": 0,
    "monitorenter": -1, "monitorexit": -1,
    "bipush": 1, "sipush": 1, "push_int": 1,
    "ldc_int": 1, "ldc_float": 1, "ldc_string": 1, "ldc_class": 1,
    "ldc_long": 2, "ldc_double": 2,
}
_TERMINAL = frozenset({"ireturn", "lreturn", "freturn", "dreturn", "areturn",
                       "return", "athrow", "goto", "goto_w", "ret",
                       "tableswitch", "lookupswitch"})


def _invoke_delta(mnemonic: str, desc: str) -> int:
    params, ret = parse_method_descriptor(desc)
    delta = -param_slots(params)
    if mnemonic != "invokestatic":
        delta -= 1
    if ret != "V":
        delta += category(ret)
    return delta


def _stack_delta(item) -> int:
    if isinstance(item, str):
        item = (item,)
    m = item[0]
    if m in _FIXED_DELTA:
        return _FIXED_DELTA[m]
    if m.startswith("iconst") or m.startswith("fconst"):
        return 1
    if m.startswith("lconst") or m.startswith("dconst"):
        return 2
    base = m.split("_")[0]
    if base in ("iload", "fload", "aload"):
        return 1
    if base in ("lload", "dload"):
        return 2
    if base in ("istore", "fstore", "astore"):
        return -1
    if base in ("lstore", "dstore"):
        return -2
    if m in ("ireturn", "freturn", "areturn"):
        return -1
    if m in ("lreturn", "dreturn"):
        return -2
    if m in ("return", "athrow"):
        return 0
    if m.startswith("if_icmp") or m.startswith("if_acmp"):
        return -2
    if m.startswith("if"):
        return -1
    if m == "getstatic":
        return category(item[1][2])
    if m == "putstatic":
        return -category(item[1][2])
    if m == "getfield":
        return -1 + category(item[1][2])
    if m == "putfield":
        return -1 - category(item[1][2])
    if m in _INVOKE_OPS:
        return _invoke_delta(m, item[1][2])
    raise UnsupportedFeature(f"no stack delta for {m!r}")


def _branch_labels(item) -> list[str]:
    if isinstance(item, str):
        return []
    m = item[0]
    if m == "tableswitch":
        return [item[1]] + list(item[4])
    if m == "lookupswitch":
        return [item[1]] + [lbl for _, lbl in item[2]]
    if m in ("goto", "goto_w", "jsr", "jsr_w") or m.startswith("if"):
        return [item[1]]
    return []


def _field_op_tuple(item):
    """Normalize field/invoke asm items to include their symbolic operand."""
    if isinstance(item, str):
        return (item,)
    m = item[0]
    if m in _FIELD_OPS or m in _INVOKE_OPS:
        return (m, tuple(item[1:]))
    return item


def compute_stack_and_locals(method: MethodModel) -> tuple[int, int]:
    """Simulate slot depths over the symbolic assembly to size the frame."""
    code = [it for it in method.code]
    index_of_label: dict[str, int] = {}
    instrs: list = []
    for item in code:
        if _is_label(item):
            index_of_label[item[:-1]] = len(instrs)
        else:
            instrs.append(_field_op_tuple(item))

    depth_at: dict[int, int] = {0: 0}
    work = [0]
    handler_starts = {index_of_label[h[2]] for h in method.handlers}
    for h_idx in handler_starts:
        depth_at[h_idx] = 1
        work.append(h_idx)
    max_depth = 1 if handler_starts else 0

    while work:
        i = work.pop()
        depth = depth_at[i]
        while i < len(instrs):
            item = instrs[i]
            m = item[0]
            depth += _stack_delta(item)
            if depth < 0:
                raise UnsupportedFeature(f"stack underflow while sizing at item {i}")
            max_depth = max(max_depth, depth)
            for lbl in _branch_labels(item):
                j = index_of_label[lbl]
                if j not in depth_at:
                    depth_at[j] = depth
                    work.append(j)
            if m in _TERMINAL or m.endswith("return") or m == "athrow":
                break
            i += 1
            if i in depth_at:
                break
            depth_at[i] = depth

    params, _ = parse_method_descriptor(method.descriptor)
    locals_needed = param_slots(params) + (0 if method.access & ACC_STATIC else 1)
    for item in instrs:
        m = item[0]
        base = m.split("_")[0]
        if base in ("iload", "fload", "aload", "istore", "fstore", "astore"):
            slot = item[1] if len(item) > 1 else int(m.rsplit("_", 1)[1])
            locals_needed = max(locals_needed, slot + 1)
        elif base in ("lload", "dload", "lstore", "dstore"):
            slot = item[1] if len(item) > 1 else int(m.rsplit("_", 1)[1])
            locals_needed = max(locals_needed, slot + 2)
        elif m == "iinc":
            locals_needed = max(locals_needed, item[1] + 1)
    return max_depth, locals_needed


def _assemble(method: MethodModel, pool: PoolBuilder) -> tuple[bytes, CodeAttribute]:
    pending, labels = _plan(method.code, pool)
    code_bytes, resolved = _encode(pending, labels)
    if method.max_stack is not None and method.max_locals is not None:
        max_stack, max_locals = method.max_stack, method.max_locals
    else:
        max_stack, max_locals = compute_stack_and_locals(method)
        if method.max_stack is not None:
            max_stack = method.max_stack
        if method.max_locals is not None:
            max_locals = method.max_locals
    handlers = []
    for start, end, handler, catch in method.handlers:
        handlers.append(ExceptionHandler(labels[start], labels[end],
                                         labels[handler], catch))
    attr = CodeAttribute(max_stack, max_locals, tuple(resolved), tuple(handlers))

    body = io.BytesIO()
    body.write(struct.pack(">HHI", max_stack, max_locals, len(code_bytes)))
    body.write(code_bytes)
    body.write(struct.pack(">H", len(handlers)))
    for h in handlers:
        catch_idx = pool.class_ref(h.catch_type) if h.catch_type else 0
        body.write(struct.pack(">HHHH", h.start, h.end, h.handler, catch_idx))
    body.write(struct.pack(">H", 0))  # no code sub-attributes
    return body.getvalue(), attr


def emit_class_resolved(model: ClassModel) -> tuple[bytes, list[CodeAttribute | None]]:
    """Serialize a ClassModel; also return, per method, the CodeAttribute
    that parse_class will decode from the emitted bytes."""
    pool = PoolBuilder()
    this_idx = pool.class_ref(model.name)
    super_idx = pool.class_ref(model.super_name) if model.super_name else 0
    iface_idxs = [pool.class_ref(i) for i in model.interfaces]

    field_blobs = []
    for f in model.fields:
        field_blobs.append(struct.pack(">HHHH", f.access, pool.utf8(f.name),
                                       pool.utf8(f.descriptor), 0))

    method_blobs = []
    resolutions: list[CodeAttribute | None] = []
    for mth in model.methods:
        head = struct.pack(">HHH", mth.access, pool.utf8(mth.name),
                           pool.utf8(mth.descriptor))
        if mth.code is None:
            method_blobs.append(head + struct.pack(">H", 0))
            resolutions.append(None)
            continue
        code_attr_name = pool.utf8("Code")
        body, attr = _assemble(mth, pool)
        resolutions.append(attr)
        method_blobs.append(
            head + struct.pack(">H", 1)
            + struct.pack(">HI", code_attr_name, len(body)) + body
        )

    out = io.BytesIO()
    out.write(struct.pack(">IHH", 0xCAFEBABE, 0, model.major))
    out.write(struct.pack(">H", pool.count()))
    out.write(pool.encode())
    out.write(struct.pack(">HHH", model.access, this_idx, super_idx))
    out.write(struct.pack(">H", len(iface_idxs)))
    for idx in iface_idxs:
        out.write(struct.pack(">H", idx))
    out.write(struct.pack(">H", len(field_blobs)))
    for blob in field_blobs:
        out.write(blob)
    out.write(struct.pack(">H", len(method_blobs)))
    for blob in method_blobs:
        out.write(blob)
    out.write(struct.pack(">H", 0))  # no class attributes
    return out.getvalue(), resolutions


def emit_class(model: ClassModel) -> bytes:
    """Serialize a ClassModel to class-file bytes."""
    return emit_class_resolved(model)[0]


def default_constructor() -> MethodModel:
    """A no-arg constructor delegating to java.lang.Object.<init>."""
    return MethodModel("<init>", "()V", ACC_PUBLIC, code=[
        ("aload", 0),
        ("invokespecial", "java.lang.Object", "<init>", "()V"),
        "return",
    ])


def write_jar(entries: list[tuple[str, bytes]], *, manifest: bool = True,
              extra: list[tuple[str, bytes]] | None = None,
              date_time=(2020, 1, 1, 0, 0, 0)) -> bytes:
    """Build a deterministic JAR from (path, bytes) entries."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        all_entries = list(entries) + list(extra or [])
        if manifest:
            mf = b"Manifest-Version: 1.0\r\nCreated-By: jarscan-fixture\r\n\r\n"
            all_entries.insert(0, ("META-INF/MANIFEST.MF", mf))
        for path, data in all_entries:
            info = zipfile.ZipInfo(path, date_time=date_time)
            info.external_attr = 0o644 << 16
            zf.writestr(info, data)
    return buf.getvalue()


def class_entry_path(dotted_name: str) -> str:
    return dotted_name.replace(".", "/") + ".class"
