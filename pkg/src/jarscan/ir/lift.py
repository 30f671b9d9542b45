"""Lift stack-machine bytecode to register-based three-address statements.

Operand-stack effects are executed symbolically per basic block; stack
values that survive a block boundary are copied into join registers named
by (target block id, stack position). Unreachable code is dropped before
ids are assigned, so block numbering is dense and deterministic.
"""

from __future__ import annotations

import logging

from ..classfile.constant_pool import ConstantPool
from ..classfile.descriptors import (
    category,
    jtype_of,
    parse_method_descriptor,
    render_type,
)
from ..classfile.model import CodeAttribute, Instruction
from ..classfile.opcodes import NEWARRAY_TYPES
from ..classfile.parser import branch_targets
from ..errors import InconsistentStackDepthAtJoin, LiftError, StackUnderflow, UnsupportedInstruction
from .model import (
    ArrayGet,
    ArrayPut,
    Assign,
    Bin,
    Block,
    Branch,
    Cast,
    Caught,
    CmpExpr,
    Const,
    Copy,
    DynInvoke,
    FieldGet,
    FieldPut,
    Goto,
    HandlerInfo,
    InstOf,
    Invoke,
    Lit,
    MethodIr,
    Monitor,
    NewArr,
    NewObj,
    Nop,
    Return,
    Switch,
    Throw,
    Un,
)

log = logging.getLogger(__name__)

_TERMINATOR_MNEMONICS = frozenset({
    "goto", "goto_w", "tableswitch", "lookupswitch", "athrow",
    "ireturn", "lreturn", "freturn", "dreturn", "areturn", "return",
    "jsr", "jsr_w", "ret",
})

_CONSTS = {
    "aconst_null": (None, "ref"), "iconst_m1": (-1, "int"),
    "iconst_0": (0, "int"), "iconst_1": (1, "int"), "iconst_2": (2, "int"),
    "iconst_3": (3, "int"), "iconst_4": (4, "int"), "iconst_5": (5, "int"),
    "lconst_0": (0, "long"), "lconst_1": (1, "long"),
    "fconst_0": (0.0, "float"), "fconst_1": (1.0, "float"), "fconst_2": (2.0, "float"),
    "dconst_0": (0.0, "double"), "dconst_1": (1.0, "double"),
}

_BIN_OPS = {"add", "sub", "mul", "div", "rem", "shl", "shr", "ushr",
            "and", "or", "xor"}
_TYPE_PREFIX = {"i": "int", "l": "long", "f": "float", "d": "double"}
_ALOAD_TYPES = {"ia": "int", "la": "long", "fa": "float", "da": "double",
                "aa": "ref", "ba": "int", "ca": "int", "sa": "int"}
_IF_ZERO = {"ifeq": "eq", "ifne": "ne", "iflt": "lt", "ifge": "ge",
            "ifgt": "gt", "ifle": "le"}
_IF_ICMP = {"if_icmpeq": "eq", "if_icmpne": "ne", "if_icmplt": "lt",
            "if_icmpge": "ge", "if_icmpgt": "gt", "if_icmple": "le"}
_CONVERSIONS = {
    "i2l": ("long", 2), "i2f": ("float", 1), "i2d": ("double", 2),
    "l2i": ("int", 1), "l2f": ("float", 1), "l2d": ("double", 2),
    "f2i": ("int", 1), "f2l": ("long", 2), "f2d": ("double", 2),
    "d2i": ("int", 1), "d2l": ("long", 2), "d2f": ("float", 1),
    "i2b": ("int", 1), "i2c": ("int", 1), "i2s": ("int", 1),
}


def _leaders(code: CodeAttribute) -> list[int]:
    offsets = [ins.offset for ins in code.instructions]
    offset_set = set(offsets)
    leaders = {offsets[0]} if offsets else set()
    prev_terminates = False
    prev_conditional = False
    for ins in code.instructions:
        if prev_terminates or prev_conditional:
            leaders.add(ins.offset)
        for t in branch_targets(ins):
            leaders.add(t)
        m = ins.mnemonic
        prev_terminates = m in _TERMINATOR_MNEMONICS
        prev_conditional = m.startswith("if")
    for h in code.exception_table:
        leaders.add(h.handler)
        if h.start in offset_set:
            leaders.add(h.start)
    return sorted(leaders)


class _RawBlock:
    def __init__(self, index: int, instructions: list[Instruction]):
        self.index = index                # index in offset order, pre-renumber
        self.instructions = instructions
        self.start_offset = instructions[0].offset
        self.end_offset = instructions[-1].offset + 1  # nominal; ranges use next start


def _partition(code: CodeAttribute) -> list[_RawBlock]:
    leaders = _leaders(code)
    blocks: list[_RawBlock] = []
    current: list[Instruction] = []
    leader_set = set(leaders)
    for ins in code.instructions:
        if ins.offset in leader_set and current:
            blocks.append(_RawBlock(len(blocks), current))
            current = []
        current.append(ins)
    if current:
        blocks.append(_RawBlock(len(blocks), current))
    return blocks


def _static_successors(raw: _RawBlock, offset_to_block: dict[int, int],
                       nblocks: int) -> list[int]:
    last = raw.instructions[-1]
    m = last.mnemonic
    succs: list[int] = []
    if m.startswith("if"):
        succs.append(offset_to_block[last.operands[0]])
        if raw.index + 1 < nblocks:
            succs.append(raw.index + 1)
    elif m in ("goto", "goto_w"):
        succs.append(offset_to_block[last.operands[0]])
    elif m in ("tableswitch", "lookupswitch"):
        succs.extend(offset_to_block[t] for t in branch_targets(last))
    elif m in ("athrow", "ireturn", "lreturn", "freturn", "dreturn",
               "areturn", "return"):
        pass
    else:
        if raw.index + 1 < nblocks:
            succs.append(raw.index + 1)
    return succs


def lift(code: CodeAttribute, descriptor: str, is_static: bool,
         pool: ConstantPool) -> MethodIr:
    """Lift one Code attribute into a MethodIr.

    Raises StackUnderflow / InconsistentStackDepthAtJoin on malformed or
    obfuscated stack discipline, UnsupportedInstruction on jsr/ret.
    """
    for ins in code.instructions:
        if ins.mnemonic in ("jsr", "jsr_w", "ret"):
            raise UnsupportedInstruction(f"{ins.mnemonic} at offset {ins.offset}")
    if not code.instructions:
        raise LiftError("empty code array")

    raw_blocks = _partition(code)
    offset_to_block = {rb.start_offset: rb.index for rb in raw_blocks}

    # Block coverage of each handler, in raw indices.
    def covered_raw(h) -> list[int]:
        out = []
        for rb in raw_blocks:
            if rb.start_offset < h.end and rb.instructions[-1].offset >= h.start:
                out.append(rb.index)
        return out

    # Reachability fixpoint over static successors + handler activation.
    reachable: set[int] = set()
    work = [0]
    handler_cov = [(covered_raw(h), offset_to_block[h.handler], h.catch_type)
                   for h in code.exception_table]
    while work:
        b = work.pop()
        if b in reachable:
            continue
        reachable.add(b)
        work.extend(s for s in _static_successors(raw_blocks[b], offset_to_block, len(raw_blocks))
                    if s not in reachable)
        for cov, handler, _catch in handler_cov:
            if handler not in reachable and any(c in reachable for c in cov):
                work.append(handler)

    dropped = [rb for rb in raw_blocks if rb.index not in reachable]
    for rb in dropped:
        log.debug("dropping unreachable block at offset %d", rb.start_offset)

    kept = [rb for rb in raw_blocks if rb.index in reachable]
    renumber = {rb.index: i for i, rb in enumerate(kept)}

    # Parameter registers by local slot.
    params, _ret = parse_method_descriptor(descriptor)
    param_regs: list[tuple[str, str]] = []
    slot_map: dict[int, str] = {}
    slot = 0
    if not is_static:
        slot_map[0] = "p0"
        param_regs.append(("p0", "ref"))
        slot = 1
    for pdesc in params:
        reg = f"p{slot}"
        slot_map[slot] = reg
        param_regs.append((reg, jtype_of(pdesc)))
        slot += category(pdesc)

    state = _Lifter(pool, slot_map, renumber, raw_blocks, offset_to_block)

    # Entry shapes: entry block empty; handler heads one caught reference.
    handler_infos = []
    for cov, handler_raw, catch in handler_cov:
        cov_new = sorted(renumber[c] for c in cov if c in renumber)
        if handler_raw not in renumber or not cov_new:
            continue
        hb = renumber[handler_raw]
        state.mark_handler(hb, catch)
        handler_infos.append((tuple(cov_new), hb, catch))

    state.set_entry_shape(0, ())
    state.run(kept, renumber)

    statements: list = []
    blocks: list[Block] = []
    for new_id in range(len(kept)):
        body = state.block_statements[new_id]
        start = len(statements)
        statements.extend(body)
        blocks.append(Block(new_id, start, len(statements)))

    merged_handlers = tuple(HandlerInfo(cov, hb, catch)
                            for cov, hb, catch in handler_infos)
    return MethodIr(params=tuple(param_regs), is_static=is_static,
                    statements=statements, blocks=blocks,
                    handlers=merged_handlers)


class _Lifter:
    def __init__(self, pool, slot_map, renumber, raw_blocks, offset_to_block):
        self.pool = pool
        self.slot_map = dict(slot_map)     # local slot -> register
        self.renumber = renumber
        self.raw_blocks = raw_blocks
        self.offset_to_block = offset_to_block
        self.block_statements: dict[int, list] = {}
        self.entry_shape: dict[int, tuple] = {}   # new id -> category vector
        self.handler_catch: dict[int, str | None] = {}
        self.temp_count = 0

    def fresh(self) -> str:
        name = f"t{self.temp_count}"
        self.temp_count += 1
        return name

    def mark_handler(self, new_id: int, catch_type):
        self.handler_catch[new_id] = catch_type
        self.entry_shape.setdefault(new_id, (1,))

    def set_entry_shape(self, new_id: int, cats: tuple):
        prev = self.entry_shape.get(new_id)
        if prev is None:
            self.entry_shape[new_id] = cats
        elif prev != cats:
            raise InconsistentStackDepthAtJoin(
                f"block {new_id} entered with stack shapes {prev} and {cats}"
            )

    def entry_stack(self, new_id: int) -> list[tuple[str, int]]:
        return [(f"j{new_id}_{i}", cat)
                for i, cat in enumerate(self.entry_shape[new_id])]

    def local(self, slot: int) -> str:
        reg = self.slot_map.get(slot)
        if reg is None:
            reg = f"l{slot}"
            self.slot_map[slot] = reg
        return reg

    def run(self, kept, renumber):
        pending = set(range(len(kept)))
        while pending:
            progressed = False
            for new_id in sorted(pending):
                if new_id in self.entry_shape:
                    self._process(kept[new_id], new_id)
                    pending.discard(new_id)
                    progressed = True
                    break
            if not progressed:
                raise InconsistentStackDepthAtJoin(
                    "blocks reachable only through unprocessed joins"
                )

    # -- join plumbing ------------------------------------------------------

    def _emit_join_copies(self, out: list, stack, succ_new_id: int):
        cats = tuple(cat for _, cat in stack)
        self.set_entry_shape(succ_new_id, cats)
        targets = [f"j{succ_new_id}_{i}" for i in range(len(stack))]
        sources = [reg for reg, _ in stack]
        pairs = [(d, s) for d, s in zip(targets, sources) if d != s]
        clobbered = {d for d, _ in pairs}
        if any(s in clobbered for _, s in pairs):
            # Parallel copy: route conflicting sources through fresh temps.
            staged = []
            for d, s in pairs:
                tmp = self.fresh()
                out.append(Assign(tmp, Copy(s)))
                staged.append((d, tmp))
            pairs = staged
        for d, s in pairs:
            out.append(Assign(d, Copy(s)))

    def _succ_new(self, raw_index: int) -> int:
        new = self.renumber.get(raw_index)
        if new is None:
            raise LiftError("control transfer to a missing block")
        return new

    # -- per-block simulation ------------------------------------------------

    def _process(self, raw: _RawBlock, new_id: int):
        out: list = []
        stack = self.entry_stack(new_id)
        if new_id in self.handler_catch:
            out.append(Assign(stack[0][0], Caught(self.handler_catch[new_id])))

        def push(reg: str, cat: int = 1):
            stack.append((reg, cat))

        def pop(expect_cat: int | None = None) -> str:
            if not stack:
                raise StackUnderflow(f"pop on empty stack in block {new_id}")
            reg, cat = stack.pop()
            if expect_cat is not None and cat != expect_cat:
                raise LiftError(f"expected category {expect_cat} value, got {cat}")
            return reg

        def spill(target_reg: str):
            for i, (reg, cat) in enumerate(stack):
                if reg == target_reg:
                    tmp = self.fresh()
                    out.append(Assign(tmp, Copy(reg)))
                    stack[i] = (tmp, cat)

        def assign_fresh(expr, cat: int = 1) -> str:
            t = self.fresh()
            out.append(Assign(t, expr))
            push(t, cat)
            return t

        def group(slots: int) -> list:
            taken = []
            need = slots
            while need > 0:
                if not stack:
                    raise StackUnderflow(f"stack group underflow in block {new_id}")
                entry = stack.pop()
                taken.append(entry)
                need -= entry[1]
            if need != 0:
                raise LiftError("category-2 value split by stack shuffle")
            taken.reverse()
            return taken

        fallthrough_done = False
        last_index = len(raw.instructions) - 1
        for idx, ins in enumerate(raw.instructions):
            m = ins.mnemonic
            is_last = idx == last_index

            if m in _CONSTS:
                v, jt = _CONSTS[m]
                assign_fresh(Const(v, jt), 2 if jt in ("long", "double") else 1)
            elif m in ("bipush", "sipush"):
                assign_fresh(Const(ins.operands[0], "int"))
            elif m in ("ldc", "ldc_w", "ldc2_w"):
                kind, value = self.pool.loadable(ins.operands[0])
                if kind == "other":
                    raise UnsupportedInstruction(
                        f"ldc of constant tag {value} at offset {ins.offset}")
                if kind == "class":
                    value = value.replace("/", ".")
                cat = 2 if kind in ("long", "double") else 1
                assign_fresh(Const(value, kind), cat)
            elif m.split("_")[0] in ("iload", "fload", "aload"):
                suffix = m.partition("_")[2]
                slot = int(suffix) if suffix else ins.operands[0]
                push(self.local(slot), 1)
            elif m.split("_")[0] in ("lload", "dload"):
                suffix = m.partition("_")[2]
                slot = int(suffix) if suffix else ins.operands[0]
                push(self.local(slot), 2)
            elif m.split("_")[0] in ("istore", "fstore", "astore"):
                suffix = m.partition("_")[2]
                slot = int(suffix) if suffix else ins.operands[0]
                v = pop(1)
                reg = self.local(slot)
                spill(reg)
                out.append(Assign(reg, Copy(v)))
            elif m.split("_")[0] in ("lstore", "dstore"):
                suffix = m.partition("_")[2]
                slot = int(suffix) if suffix else ins.operands[0]
                v = pop(2)
                reg = self.local(slot)
                spill(reg)
                out.append(Assign(reg, Copy(v)))
            elif m.endswith("aload") and m[:2] in _ALOAD_TYPES:
                jt = _ALOAD_TYPES[m[:2]]
                idx_r = pop(1)
                arr = pop(1)
                assign_fresh(ArrayGet(jt, arr, idx_r), 2 if jt in ("long", "double") else 1)
            elif m.endswith("astore") and m[:2] in _ALOAD_TYPES:
                jt = _ALOAD_TYPES[m[:2]]
                v = pop(2 if jt in ("long", "double") else 1)
                idx_r = pop(1)
                arr = pop(1)
                out.append(ArrayPut(jt, arr, idx_r, v))
            elif m == "pop":
                pop(1)
            elif m == "pop2":
                group(2)
            elif m == "dup":
                a = group(1)
                stack.extend(a + a)
            elif m == "dup_x1":
                a = group(1)
                b = group(1)
                stack.extend(a + b + a)
            elif m == "dup_x2":
                a = group(1)
                b = group(2)
                stack.extend(a + b + a)
            elif m == "dup2":
                a = group(2)
                stack.extend(a + a)
            elif m == "dup2_x1":
                a = group(2)
                b = group(1)
                stack.extend(a + b + a)
            elif m == "dup2_x2":
                a = group(2)
                b = group(2)
                stack.extend(a + b + a)
            elif m == "swap":
                a = group(1)
                b = group(1)
                stack.extend(a + b)
            elif len(m) > 1 and m[0] in _TYPE_PREFIX and m[1:] in _BIN_OPS:
                jt = _TYPE_PREFIX[m[0]]
                cat = 2 if jt in ("long", "double") else 1
                b_cat = 1 if m[1:] in ("shl", "shr", "ushr") else cat
                b = pop(b_cat)
                a = pop(cat)
                assign_fresh(Bin(m[1:], jt, a, b), cat)
            elif m in ("ineg", "lneg", "fneg", "dneg"):
                jt = _TYPE_PREFIX[m[0]]
                cat = 2 if jt in ("long", "double") else 1
                a = pop(cat)
                assign_fresh(Un(f"neg_{jt}", a), cat)
            elif m == "iinc":
                slot, delta = ins.operands
                reg = self.local(slot)
                spill(reg)
                out.append(Assign(reg, Bin("add", "int", reg, Lit(delta, "int"))))
            elif m in _CONVERSIONS:
                to_jt, to_cat = _CONVERSIONS[m]
                from_cat = 2 if m[0] in ("l", "d") else 1
                a = pop(from_cat)
                assign_fresh(Un(m, a), to_cat)
            elif m in ("lcmp", "fcmpl", "fcmpg", "dcmpl", "dcmpg"):
                cat = 2 if m[0] in ("l", "d") else 1
                b = pop(cat)
                a = pop(cat)
                assign_fresh(CmpExpr(m, a, b))
            elif m in _IF_ZERO:
                v = pop(1)
                self._finish_branch(out, stack, raw, _IF_ZERO[m], "int",
                                    (v, Lit(0, "int")), ins)
                fallthrough_done = True
            elif m in _IF_ICMP:
                b = pop(1)
                a = pop(1)
                self._finish_branch(out, stack, raw, _IF_ICMP[m], "int",
                                    (a, b), ins)
                fallthrough_done = True
            elif m in ("if_acmpeq", "if_acmpne"):
                b = pop(1)
                a = pop(1)
                self._finish_branch(out, stack, raw,
                                    "eq" if m.endswith("eq") else "ne",
                                    "ref", (a, b), ins)
                fallthrough_done = True
            elif m in ("ifnull", "ifnonnull"):
                v = pop(1)
                self._finish_branch(out, stack, raw,
                                    "eq" if m == "ifnull" else "ne",
                                    "ref", (v, Lit(None, "ref")), ins)
                fallthrough_done = True
            elif m in ("goto", "goto_w"):
                target = self._succ_new(self.offset_to_block[ins.operands[0]])
                self._emit_join_copies(out, stack, target)
                out.append(Goto(target))
                fallthrough_done = True
            elif m == "tableswitch":
                default, low, _high, targets = ins.operands
                key = pop(1)
                cases = tuple((low + i, self._succ_new(self.offset_to_block[t]))
                              for i, t in enumerate(targets))
                dflt = self._succ_new(self.offset_to_block[default])
                for succ in sorted({dflt, *(b for _, b in cases)}):
                    self._emit_join_copies(out, stack, succ)
                out.append(Switch(key, cases, dflt))
                fallthrough_done = True
            elif m == "lookupswitch":
                default, pairs = ins.operands
                key = pop(1)
                cases = tuple(sorted((v, self._succ_new(self.offset_to_block[t]))
                                     for v, t in pairs))
                dflt = self._succ_new(self.offset_to_block[default])
                for succ in sorted({dflt, *(b for _, b in cases)}):
                    self._emit_join_copies(out, stack, succ)
                out.append(Switch(key, cases, dflt))
                fallthrough_done = True
            elif m in ("ireturn", "freturn", "areturn"):
                jt = {"i": "int", "f": "float", "a": "ref"}[m[0]]
                out.append(Return(pop(1), jt))
                fallthrough_done = True
            elif m in ("lreturn", "dreturn"):
                jt = "long" if m[0] == "l" else "double"
                out.append(Return(pop(2), jt))
                fallthrough_done = True
            elif m == "return":
                out.append(Return())
                fallthrough_done = True
            elif m == "athrow":
                out.append(Throw(pop(1)))
                fallthrough_done = True
            elif m in ("getstatic", "getfield"):
                owner, name, fdesc = self.pool.member_ref(ins.operands[0])
                obj = pop(1) if m == "getfield" else None
                ftype = render_type(fdesc)
                cat = category(fdesc)
                assign_fresh(FieldGet(owner.replace("/", "."), name, ftype, obj), cat)
            elif m in ("putstatic", "putfield"):
                owner, name, fdesc = self.pool.member_ref(ins.operands[0])
                v = pop(category(fdesc))
                obj = pop(1) if m == "putfield" else None
                out.append(FieldPut(owner.replace("/", "."), name,
                                    render_type(fdesc), obj, v))
            elif m in ("invokevirtual", "invokespecial", "invokestatic",
                       "invokeinterface"):
                owner, name, mdesc = self.pool.member_ref(ins.operands[0])
                kind = m.removeprefix("invoke")
                pdescs, ret = parse_method_descriptor(mdesc)
                args = [pop(category(p)) for p in reversed(pdescs)]
                if kind != "static":
                    args.append(pop(1))  # receiver
                args.reverse()
                result = None
                if ret != "V":
                    result = self.fresh()
                out.append(Invoke(result, kind, owner.replace("/", "."),
                                  name, mdesc, tuple(args)))
                if result is not None:
                    push(result, category(ret))
            elif m == "invokedynamic":
                _bsm, name, mdesc = self.pool.invoke_dynamic(ins.operands[0])
                pdescs, ret = parse_method_descriptor(mdesc)
                args = [pop(category(p)) for p in reversed(pdescs)]
                args.reverse()
                result = None
                if ret != "V":
                    result = self.fresh()
                out.append(DynInvoke(result, name, mdesc, tuple(args)))
                if result is not None:
                    push(result, category(ret))
            elif m == "new":
                cls = self.pool.class_name(ins.operands[0]).replace("/", ".")
                assign_fresh(NewObj(cls))
            elif m == "newarray":
                elem = NEWARRAY_TYPES[ins.operands[0]]
                count = pop(1)
                assign_fresh(NewArr(elem, (count,)))
            elif m == "anewarray":
                cls = self.pool.class_name(ins.operands[0]).replace("/", ".")
                if cls.startswith("["):
                    cls = render_type(cls.replace(".", "/"))
                count = pop(1)
                assign_fresh(NewArr(cls, (count,)))
            elif m == "multianewarray":
                idx_cp, dims = ins.operands
                desc = self.pool.class_name(idx_cp)
                counts = [pop(1) for _ in range(dims)]
                counts.reverse()
                assign_fresh(NewArr(render_type(desc), tuple(counts)))
            elif m == "arraylength":
                arr = pop(1)
                assign_fresh(Un("arraylength", arr))
            elif m == "checkcast":
                cls = self.pool.class_name(ins.operands[0]).replace("/", ".")
                a = pop(1)
                assign_fresh(Cast(cls, a))
            elif m == "instanceof":
                cls = self.pool.class_name(ins.operands[0]).replace("/", ".")
                a = pop(1)
                assign_fresh(InstOf(cls, a))
            elif m in ("monitorenter", "monitorexit"):
                out.append(Monitor("enter" if m.endswith("enter") else "exit", pop(1)))
            elif m == "nop":
                out.append(Nop())
            else:
                raise UnsupportedInstruction(f"{m} at offset {ins.offset}")

        if not fallthrough_done:
            # Implicit fall-through into the next block.
            nxt = raw.index + 1
            if nxt >= len(self.raw_blocks):
                raise LiftError("code falls off the end of the method")
            self._emit_join_copies(out, stack, self._succ_new(nxt))
        self.block_statements[new_id] = out

    def _finish_branch(self, out, stack, raw, op, jtype, args, ins):
        taken = self._succ_new(self.offset_to_block[ins.operands[0]])
        fallthrough = self._succ_new(raw.index + 1)
        self._emit_join_copies(out, stack, taken)
        if fallthrough != taken:
            self._emit_join_copies(out, stack, fallthrough)
        out.append(Branch(op, jtype, args, taken, fallthrough))
