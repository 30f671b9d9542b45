"""Lifting, CFG construction and the semantic oracle."""

import random

import pytest

from jarscan.classfile import ClassModel, MethodModel, emit_class, parse_class
from jarscan.errors import InconsistentStackDepthAtJoin, StackUnderflow, UnsupportedInstruction
from jarscan.ir import ENTRY, EXIT, build_cfg, dump, lift, run_ir
from jarscan.ir.model import Assign, Bin, Branch, Const, Return
from oracle_interp import run_bytecode, w32
from randgen import assemble_method, random_int_method


def lift_method(code, desc="(I)I", handlers=None, static=True,
                max_stack=None, max_locals=None):
    model = ClassModel("t.T", methods=[
        MethodModel("f", desc, 0x09 if static else 0x01, code=code,
                    handlers=handlers or [], max_stack=max_stack,
                    max_locals=max_locals)])
    cf = parse_class(emit_class(model))
    return lift(cf.methods[0].code, desc, static, cf.constant_pool), cf


# ----------------------------------------------------------------- examples

def test_lift_constant_return():
    ir, _ = lift_method(["iconst_1", "ireturn"], desc="()I")
    assert len(ir.statements) == 2
    assign, ret = ir.statements
    assert isinstance(assign, Assign) and assign.expr == Const(1, "int")
    assert isinstance(ret, Return) and ret.value == assign.target


def test_lift_param_addition():
    ir, _ = lift_method(["iload_0", "iload_1", "iadd", "ireturn"], desc="(II)I")
    assert [r for r, _t in ir.params] == ["p0", "p1"]
    assign, ret = ir.statements
    assert assign.expr == Bin("add", "int", "p0", "p1")
    assert ret.value == assign.target


def test_lift_if_else_value_joins_in_one_register():
    ir, _ = lift_method([
        "iload_0", ("ifeq", "Z"),
        ("push_int", 5), ("goto", "M"),
        "Z:", ("push_int", 9),
        "M:", "ireturn"])
    join_defs = [s.target for s in ir.statements
                 if isinstance(s, Assign) and s.target.startswith("j")]
    assert len(join_defs) == 2
    assert len(set(join_defs)) == 1
    ret = ir.statements[-1]
    assert isinstance(ret, Return) and ret.value == join_defs[0]


def test_lift_receiver_and_this():
    ir, _ = lift_method([("aload", 0), "areturn"], desc="()Ljava/lang/Object;",
                        static=False)
    assert ir.params[0] == ("p0", "ref")
    assert ir.statements[-1].value == "p0"


def test_lift_rejects_jsr():
    with pytest.raises(UnsupportedInstruction):
        lift_method([("jsr", "S"), "return", "S:", ("astore", 1), ("ret", 1)],
                    desc="()V")


def test_lift_stack_underflow():
    with pytest.raises(StackUnderflow):
        lift_method(["pop", "return"], desc="()V", max_stack=2, max_locals=2)


def test_lift_inconsistent_join_depth():
    # One path brings a value to M, the other does not.
    with pytest.raises(InconsistentStackDepthAtJoin):
        lift_method([
            "iload_0", ("ifeq", "A"),
            ("push_int", 1), ("goto", "M"),
            "A:", ("goto", "M"),
            "M:", "ireturn"], max_stack=2, max_locals=2)


def test_lift_dead_code_dropped():
    ir, _ = lift_method([
        ("goto", "END"),
        ("push_int", 42), "ireturn",   # unreachable
        "END:", "iload_0", "ireturn"])
    consts = [s for s in ir.statements
              if isinstance(s, Assign) and s.expr == Const(42, "int")]
    assert consts == []


def test_lift_deterministic():
    rng = random.Random(5)
    for _ in range(10):
        code = random_int_method(rng, params=2, segments=6)
        cf, method = assemble_method(code)
        a = lift(method.code, "(II)I", True, cf.constant_pool)
        b = lift(method.code, "(II)I", True, cf.constant_pool)
        assert dump(a) == dump(b)


def test_local_spilled_before_store():
    # The first iload_0 leaves p0 on the stack; istore_0 must not clobber
    # the pending value.
    ir, _ = lift_method([
        "iload_0", "iload_0", "iconst_1", "iadd", "istore_0",
        "iload_0", "iadd", "ireturn"])
    assert run_ir(ir, [10]) == 21  # 10 + (10 + 1)


def test_iinc_spills_stack_copies():
    ir, _ = lift_method(["iload_0", ("iinc", 0, 5), "iload_0", "iadd", "ireturn"])
    assert run_ir(ir, [7]) == 19  # 7 + 12


# --------------------------------------------------------------------- CFG

def test_cfg_straight_line():
    ir, _ = lift_method(["iconst_1", "ireturn"], desc="()I")
    cfg = build_cfg(ir)
    kinds = {(e.src, e.dst) for e in cfg.edges}
    assert kinds == {(ENTRY, 0), (0, EXIT)}


def test_cfg_diamond():
    ir, _ = lift_method([
        "iload_0", ("ifeq", "Z"),
        ("push_int", 5), ("goto", "M"),
        "Z:", ("push_int", 9),
        "M:", "ireturn"])
    cfg = build_cfg(ir)
    assert len(cfg.block_nodes()) == 4
    assert set(cfg.successors(0)) == {1, 2}
    assert cfg.successors(1) == [3]
    assert cfg.successors(2) == [3]
    assert cfg.successors(3) == [EXIT]


def test_cfg_loop_with_two_exits():
    ir, _ = lift_method([
        "iconst_0", "istore_1",
        "H:", "iload_1", "iload_0", ("if_icmpge", "OUT"),
        "iload_1", ("push_int", 100), ("if_icmpgt", "OUT2"),
        ("iinc", 1, 3), ("goto", "H"),
        "OUT:", "iload_1", "ireturn",
        "OUT2:", "iload_1", "ineg", "ireturn"])
    cfg = build_cfg(ir)
    succ = {n: cfg.successors(n) for n in cfg.block_nodes()}
    # Back edge exists.
    back_edges = [(a, b) for a, bs in succ.items() for b in bs if b <= a and b != EXIT]
    assert back_edges
    # Both returns reach EXIT: enumerate all simple paths from entry.
    exits = set()
    stack = [(0, {0})]
    while stack:
        node, seen = stack.pop()
        for s in cfg.successors(node):
            if s == EXIT:
                exits.add(node)
            elif s not in seen:
                stack.append((s, seen | {s}))
    assert len(exits) == 2


def test_cfg_exception_edges_cover_all_protected_blocks():
    ir, _ = lift_method(
        ["TRY:", "iload_0", ("ifeq", "MID"), "iconst_1", "istore_1",
         "MID:", "iload_0", "istore_1", "CATCH_END:", "iload_1", "ireturn",
         "H:", ("astore", 2), "iconst_m1", "ireturn"],
        handlers=[("TRY", "CATCH_END", "H", "java.lang.Exception")])
    cfg = build_cfg(ir)
    exception_edges = [(e.src, e.dst) for e in cfg.edges if e.kind == "exception"]
    handler_block = ir.handlers[0].handler
    assert set(ir.handlers[0].covered) == {src for src, _ in exception_edges}
    assert all(dst == handler_block for _, dst in exception_edges)
    assert len(exception_edges) >= 2


# ------------------------------------------------------------ semantic oracle

def test_interpreters_agree_on_random_methods():
    rng = random.Random(2024)
    cases = 0
    for _ in range(40):
        params = rng.randint(1, 3)
        code = random_int_method(rng, params=params, segments=rng.randint(2, 8))
        cf, method = assemble_method(code, params=params)
        ir = lift(method.code, method.descriptor, True, cf.constant_pool)
        for _ in range(5):
            args = [rng.randint(-1000, 1000) for _ in range(params)]
            expected = run_bytecode(method.code, args)
            assert run_ir(ir, args) == expected
            cases += 1
    assert cases == 200


def test_wrap32_matches_reference():
    for x in (0, 1, -1, 2**31 - 1, -2**31, 2**31, 2**33 + 17):
        from jarscan.ir import wrap32
        assert wrap32(x) == w32(x)
