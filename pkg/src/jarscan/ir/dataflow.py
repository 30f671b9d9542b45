"""Reaching-definition data dependencies and post-dominance control
dependencies over a MethodIr and its Cfg."""

from __future__ import annotations

from dataclasses import dataclass

from .cfg import ENTRY, EXIT, Cfg
from .model import MethodIr, stmt_def, stmt_uses


@dataclass(frozen=True)
class DepGraph:
    data_edges: frozenset  # (def stmt index, use stmt index, register)
    ctrl_edges: frozenset  # (controller stmt index, controlled stmt index)


def reaching_data_edges(ir: MethodIr, cfg: Cfg) -> frozenset:
    """Def-use edges where the definition reaches the use on some path."""
    defs_of_reg: dict[str, set[int]] = {}
    for i, stmt in enumerate(ir.statements):
        d = stmt_def(stmt)
        if d is not None:
            defs_of_reg.setdefault(d, set()).add(i)

    gen: dict[int, dict[str, int]] = {}
    kill_regs: dict[int, set[str]] = {}
    for block in ir.blocks:
        g: dict[str, int] = {}
        for i in range(block.start, block.end):
            d = stmt_def(ir.statements[i])
            if d is not None:
                g[d] = i
        gen[block.bid] = g
        kill_regs[block.bid] = set(g)

    blocks = [b.bid for b in ir.blocks]
    in_sets: dict[int, set] = {b: set() for b in blocks}
    out_sets: dict[int, set] = {b: set() for b in blocks}
    changed = True
    while changed:
        changed = False
        for b in blocks:
            new_in = set()
            for p in cfg.predecessors(b):
                if p not in (ENTRY, EXIT):
                    new_in |= out_sets[p]
            new_out = {(i, r) for i, r in new_in if r not in kill_regs[b]}
            new_out |= {(i, r) for r, i in gen[b].items()}
            if new_in != in_sets[b] or new_out != out_sets[b]:
                in_sets[b] = new_in
                out_sets[b] = new_out
                changed = True

    edges = set()
    for block in ir.blocks:
        current: dict[str, set[int]] = {}
        for i, r in in_sets[block.bid]:
            current.setdefault(r, set()).add(i)
        for i in range(block.start, block.end):
            stmt = ir.statements[i]
            for r in stmt_uses(stmt):
                for d in current.get(r, ()):
                    edges.add((d, i, r))
            d = stmt_def(stmt)
            if d is not None:
                current[d] = {i}
    return frozenset(edges)


def postdominators(cfg: Cfg) -> dict[int, frozenset]:
    """Iterative post-dominator sets on the EXIT-augmented graph.

    Nodes that cannot reach EXIT keep the full node set, which matches the
    vacuous reading of "d lies on every path to EXIT".
    """
    all_nodes = frozenset(cfg.nodes)
    pdom: dict[int, frozenset] = {n: all_nodes for n in cfg.nodes}
    pdom[EXIT] = frozenset({EXIT})
    changed = True
    while changed:
        changed = False
        for n in cfg.nodes:
            if n == EXIT:
                continue
            succs = cfg.successors(n)
            if succs:
                acc = None
                for s in succs:
                    acc = pdom[s] if acc is None else acc & pdom[s]
                new = acc | {n}
            else:
                new = frozenset({n}) if n == EXIT else all_nodes
            if new != pdom[n]:
                pdom[n] = new
                changed = True
    return pdom


def control_dependent_blocks(cfg: Cfg, pdom: dict[int, frozenset] | None = None) -> frozenset:
    """(controller block, dependent block) pairs.

    B is control-dependent on A when A has a successor S with B
    post-dominating S but B not post-dominating A itself.
    """
    if pdom is None:
        pdom = postdominators(cfg)
    pairs = set()
    for a in cfg.block_nodes():
        for s in cfg.successors(a):
            for b in pdom[s]:
                if b in (ENTRY, EXIT):
                    continue
                if b not in pdom[a]:
                    pairs.add((a, b))
    return frozenset(pairs)


def dependencies(ir: MethodIr, cfg: Cfg) -> DepGraph:
    """Statement-level dependence graph feeding CPG construction."""
    data = reaching_data_edges(ir, cfg)
    pdom = postdominators(cfg)
    block_by_id = {b.bid: b for b in ir.blocks}
    ctrl = set()
    for a, b in control_dependent_blocks(cfg, pdom):
        a_block = block_by_id[a]
        controller = a_block.end - 1  # terminator, or last stmt for exception splits
        dep_block = block_by_id[b]
        for s in range(dep_block.start, dep_block.end):
            ctrl.add((controller, s))
    return DepGraph(data_edges=data, ctrl_edges=frozenset(ctrl))
