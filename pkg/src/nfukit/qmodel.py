"""Derived membership models over a base digraph with an endomorphism.

A base structure is a finite membership digraph with a three-level nested
filtration and a map j that preserves membership.  The derived model keeps
the same carrier and reads: x is a set when its extension sits inside
level 1; x is a member of y when y is a set and x sits in j(y)'s extension;
and the pair predicate holds when a node codes the two-step pair
{{x},{x,y}} inside the base.  Audits report which axioms of the derived
model hold, with explicit witnesses for failures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import formulas
from .formulas import (
    And,
    Eq,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    In,
    Not,
    Or,
    PPred,
    SPred,
    StratFailure,
)

MODES = ("automorphism", "endomorphism")


class BaseStructureError(ValueError):
    pass


@dataclass(frozen=True, eq=True)
class BaseStructure:
    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    levels: tuple[frozenset[str], frozenset[str], frozenset[str]]
    j: dict[str, str]
    mode: str = "automorphism"

    def extension(self, x: str) -> frozenset[str]:
        return frozenset(a for a, b in self.edges if b == x)


def base_structure(nodes, edges, levels, j, mode="automorphism") -> BaseStructure:
    """Validating constructor; violations are named precisely."""
    node_tuple = tuple(nodes)
    node_set = set(node_tuple)
    if len(node_tuple) != len(node_set):
        raise BaseStructureError("duplicate node labels")
    edge_set = frozenset((x, y) for x, y in edges)
    for x, y in edge_set:
        if x not in node_set or y not in node_set:
            raise BaseStructureError(f"edge ({x!r}, {y!r}) leaves the node set")
    if len(levels) != 3:
        raise BaseStructureError("exactly three levels are required")
    level_sets = tuple(frozenset(lv) for lv in levels)
    if level_sets[0] != node_set:
        raise BaseStructureError("level 0 must be the whole node set")
    for k in range(2):
        if not level_sets[k + 1] <= level_sets[k]:
            raise BaseStructureError(f"level {k + 1} is not contained in level {k}")
    if mode not in MODES:
        raise BaseStructureError(f"unknown mode {mode!r}")
    j_map = dict(j)
    if set(j_map) != node_set:
        raise BaseStructureError("j must be defined on exactly the nodes")
    if len(set(j_map.values())) != len(node_tuple):
        raise BaseStructureError("j is not injective")
    if not set(j_map.values()) <= node_set:
        raise BaseStructureError("j maps outside the node set")
    if mode == "automorphism" and set(j_map.values()) != node_set:
        raise BaseStructureError("automorphism mode requires j to be onto")
    for x in node_tuple:
        for y in node_tuple:
            if ((x, y) in edge_set) != ((j_map[x], j_map[y]) in edge_set):
                raise BaseStructureError(
                    f"j does not preserve the edge relation on ({x!r}, {y!r})"
                )
    for k, level in enumerate(level_sets):
        for x in level:
            if j_map[x] not in level:
                raise BaseStructureError(f"j moves {x!r} out of level {k}")
    return BaseStructure(node_tuple, edge_set, level_sets, j_map, mode)


@dataclass(frozen=True, eq=True)
class QModel:
    base: BaseStructure
    setness: dict[str, bool]
    q_edges: frozenset[tuple[str, str]]
    pairs: dict[tuple[str, str], tuple[str, ...]]

    @property
    def domain(self) -> tuple[str, ...]:
        return self.base.nodes

    def q_extension(self, y: str) -> frozenset[str]:
        return frozenset(a for a, b in self.q_edges if b == y)


def build_q(base: BaseStructure) -> QModel:
    """Compute the three derived relations; deterministic in the base."""
    ext = {x: base.extension(x) for x in base.nodes}
    setness = {x: ext[x] <= base.levels[1] for x in base.nodes}
    q_edges = frozenset(
        (x, y)
        for y in base.nodes
        if setness[y]
        for x in ext[base.j[y]]
    )

    # z codes (a, b) when its members are a singleton-of-a node and an
    # {a, b} node; the degenerate a = b case is a single singleton member.
    pairs: dict[tuple[str, str], set[str]] = {}
    for z in base.nodes:
        members = sorted(ext[z])
        if len(members) == 1:
            e = ext[members[0]]
            if len(e) == 1:
                (a,) = e
                pairs.setdefault((a, a), set()).add(z)
        elif len(members) == 2:
            for s1, s2 in ((members[0], members[1]), (members[1], members[0])):
                e1, e2 = ext[s1], ext[s2]
                if len(e1) == 1 and len(e2) == 2 and e1 <= e2:
                    (a,) = e1
                    (b,) = e2 - e1
                    pairs.setdefault((a, b), set()).add(z)
    pair_map = {key: tuple(sorted(zs)) for key, zs in pairs.items()}
    return QModel(base=base, setness=setness, q_edges=q_edges, pairs=pair_map)


# ---------------------------------------------------------------------------
# Audits


def audit_extensionality(q: QModel) -> dict:
    """Distinct sets must differ somewhere; members occur only in sets."""
    ext = {x: q.q_extension(x) for x in q.domain}
    violations = []
    sets = sorted(x for x in q.domain if q.setness[x])
    for i, a in enumerate(sets):
        for b in sets[i + 1 :]:
            if ext[a] == ext[b]:
                violations.append(
                    {
                        "kind": "identical_extensions",
                        "nodes": [a, b],
                        "extension": sorted(ext[a]),
                    }
                )
    for x, y in sorted(q.q_edges):
        if not q.setness[y]:
            violations.append({"kind": "member_of_non_set", "edge": [x, y]})
    return {"axiom": "extensionality", "pass": not violations, "violations": violations}


def audit_pairing(q: QModel) -> dict:
    """Each (a, b) should have exactly one pair node, and pairs determine
    their arguments."""
    cells = []
    ok = True
    for a in sorted(q.domain):
        for b in sorted(q.domain):
            witnesses = q.pairs.get((a, b), ())
            if len(witnesses) == 1:
                status = "ok"
            elif not witnesses:
                status = "missing"
                ok = False
            else:
                status = "duplicated"
                ok = False
            cells.append(
                {"pair": [a, b], "witnesses": sorted(witnesses), "status": status}
            )
    injectivity = []
    by_witness: dict[str, list[tuple[str, str]]] = {}
    for key, zs in q.pairs.items():
        for z in zs:
            by_witness.setdefault(z, []).append(key)
    for z, keys in sorted(by_witness.items()):
        if len(keys) > 1:
            ok = False
            injectivity.append({"witness": z, "pairs": sorted([list(k) for k in keys])})
    violations = [
        {"kind": cell["status"], "pair": cell["pair"], "witnesses": cell["witnesses"]}
        for cell in cells
        if cell["status"] != "ok"
    ] + [{"kind": "not_injective", **entry} for entry in injectivity]
    return {
        "axiom": "pairing",
        "pass": ok,
        "violations": violations,
        "cells": cells,
        "injectivity_violations": injectivity,
    }


class UnboundVariableError(KeyError):
    pass


def eval_formula(q: QModel, phi: Formula, env: dict[str, str]) -> bool:
    """Satisfaction in the derived model, quantifiers over the whole domain."""

    def lookup(v: str) -> str:
        if v not in env:
            raise UnboundVariableError(v)
        return env[v]

    if isinstance(phi, Eq):
        return lookup(phi.left) == lookup(phi.right)
    if isinstance(phi, In):
        return (lookup(phi.left), lookup(phi.right)) in q.q_edges
    if isinstance(phi, SPred):
        return q.setness[lookup(phi.var)]
    if isinstance(phi, PPred):
        a, b, c = lookup(phi.first), lookup(phi.second), lookup(phi.third)
        return c in q.pairs.get((a, b), ())
    if isinstance(phi, Not):
        return not eval_formula(q, phi.body, env)
    if isinstance(phi, And):
        return eval_formula(q, phi.left, env) and eval_formula(q, phi.right, env)
    if isinstance(phi, Or):
        return eval_formula(q, phi.left, env) or eval_formula(q, phi.right, env)
    if isinstance(phi, Implies):
        return (not eval_formula(q, phi.left, env)) or eval_formula(q, phi.right, env)
    if isinstance(phi, Iff):
        return eval_formula(q, phi.left, env) == eval_formula(q, phi.right, env)
    if isinstance(phi, (Forall, Exists)):
        results = (
            eval_formula(q, phi.body, {**env, phi.var: d}) for d in sorted(q.domain)
        )
        return all(results) if isinstance(phi, Forall) else any(results)
    raise TypeError(f"not a formula: {phi!r}")


def audit_comprehension(
    q: QModel, phi: Formula, env: dict[str, str] | None = None
) -> str | None:
    """First set node whose extension matches {x : phi(x)}, or None.

    ``phi`` uses the member variable v0; parameters come from ``env``.
    Unstratified formulas are rejected.  The search runs in lexicographic
    node order, so results are deterministic.
    """
    if isinstance(formulas.stratify(phi), StratFailure):
        raise formulas.NotStratifiedError(f"not stratified: {formulas.to_text(phi)}")
    env = dict(env or {})
    wanted = frozenset(
        x
        for x in q.domain
        if eval_formula(q, phi, {**env, formulas.MEMBER_VARIABLE: x})
    )
    for y in sorted(q.domain):
        if q.setness[y] and q.q_extension(y) == wanted:
            return y
    return None


def criterion1_check(base: BaseStructure, ord_chain: list[str]) -> bool:
    """Along a designated increasing chain, j-fixedness must be downward
    closed: once a position is fixed, all earlier positions are fixed."""
    for x in ord_chain:
        if x not in set(base.nodes):
            raise BaseStructureError(f"chain element {x!r} is not a node")
    fixed = [base.j[x] == x for x in ord_chain]
    for idx, is_fixed in enumerate(fixed):
        if is_fixed and not all(fixed[:idx]):
            return False
    return True


def coded_subsets_report(base: BaseStructure, target) -> str | None:
    """Node whose extension meets the fixed points exactly in ``target``.

    Returns the lexicographically first such node, or None.  Every target
    element must itself be a fixed point of j.
    """
    fixed = frozenset(x for x in base.nodes if base.j[x] == x)
    target_set = frozenset(target)
    for x in sorted(target_set):
        if x not in fixed:
            raise BaseStructureError(f"target element {x!r} is not fixed by j")
    for w in sorted(base.nodes):
        if base.extension(w) & fixed == target_set:
            return w
    return None


# ---------------------------------------------------------------------------
# JSON interchange


def base_to_json(base: BaseStructure) -> dict:
    return {
        "nodes": list(base.nodes),
        "edges": sorted([list(e) for e in base.edges]),
        "levels": [sorted(lv) for lv in base.levels],
        "j": {x: base.j[x] for x in sorted(base.j)},
        "mode": base.mode,
    }


def base_from_json(data: dict | str) -> BaseStructure:
    if isinstance(data, str):
        data = json.loads(data)
    return base_structure(
        data["nodes"],
        [tuple(e) for e in data["edges"]],
        data["levels"],
        data["j"],
        data.get("mode", "automorphism"),
    )
