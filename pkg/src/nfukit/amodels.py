"""Chains of embedded structures with a distinguished standard part.

A stage bundles a base structure, a shared standard part with a fixed
enumeration order, an embedding ``i`` of the standard part onto a
rank-initial segment, and the base's own map j whose fixed points must be
exactly the image of ``i``.  Maps between stages are embeddings commuting
with both ``i`` and j.  The direct limit of a finite chain is built from
*original* elements, those with no preimage at an earlier stage, and an
independent quotient construction serves as its oracle.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .qmodel import BaseStructure, base_structure, base_to_json, base_from_json


class DiagramError(ValueError):
    pass


@dataclass(frozen=True)
class StandardPart:
    """Nodes listed in their enumeration order, with their own edges."""

    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]


@dataclass(frozen=True)
class AModelF:
    structure: BaseStructure
    standard_part: StandardPart
    i: dict[str, str]
    rank: dict[str, int]


@dataclass
class Diagram:
    stages: list[AModelF]
    maps: dict[tuple[int, int], dict[str, str]]


# ---------------------------------------------------------------------------
# Bounded elementarity via the back-and-forth game

def _atomic_match(edges_a, ta, edges_b, tb) -> bool:
    for p in range(len(ta)):
        for r in range(len(ta)):
            if (ta[p] == ta[r]) != (tb[p] == tb[r]):
                return False
            if ((ta[p], ta[r]) in edges_a) != ((tb[p], tb[r]) in edges_b):
                return False
    return True


def ef_equivalent(nodes_a, edges_a, ta, nodes_b, edges_b, tb, depth: int) -> bool:
    """Whether the marked tuples satisfy the same membership-language
    formulas of quantifier depth up to ``depth``, decided by the standard
    back-and-forth recursion."""
    memo: dict[tuple, bool] = {}

    def game(xa: tuple, xb: tuple, d: int) -> bool:
        key = (xa, xb, d)
        if key in memo:
            return memo[key]
        if not _atomic_match(edges_a, xa, edges_b, xb):
            memo[key] = False
            return False
        if d == 0:
            memo[key] = True
            return True
        ok = all(
            any(game(xa + (c,), xb + (e,), d - 1) for e in nodes_b) for c in nodes_a
        ) and all(
            any(game(xa + (c,), xb + (e,), d - 1) for c in nodes_a) for e in nodes_b
        )
        memo[key] = ok
        return ok

    return game(tuple(ta), tuple(tb), depth)


def _parameter_tuples(items, max_len: int):
    import itertools

    for length in range(max_len + 1):
        yield from itertools.product(items, repeat=length)


# ---------------------------------------------------------------------------
# Stage and map checks


def check_amodel(cand: AModelF, depth: int = 2, max_params: int = 2) -> dict:
    """Verify the stage requirements; violations carry witnesses.

    Checks that i embeds the standard part (edges and order preserved and
    reflected), that its range is a rank-initial segment, that the fixed
    points of j are exactly that range, and that i is elementary for the
    membership language up to quantifier depth ``depth`` with parameter
    tuples of length up to ``max_params``.
    """
    st = cand.structure
    sp = cand.standard_part
    violations: list[dict] = []

    missing = [a for a in sp.nodes if a not in cand.i]
    if missing:
        violations.append({"kind": "i_not_total", "nodes": missing})
        return {"pass": False, "violations": violations}
    image = [cand.i[a] for a in sp.nodes]
    if len(set(image)) != len(image):
        violations.append({"kind": "i_not_injective", "image": image})
    node_set = set(st.nodes)
    for a in sp.nodes:
        if cand.i[a] not in node_set:
            violations.append({"kind": "i_outside_structure", "element": a})
            return {"pass": False, "violations": violations}

    for a in sp.nodes:
        for b in sp.nodes:
            if ((a, b) in sp.edges) != ((cand.i[a], cand.i[b]) in st.edges):
                violations.append({"kind": "i_edge_mismatch", "pair": [a, b]})
    order = {a: pos for pos, a in enumerate(sp.nodes)}
    for a in sp.nodes:
        for b in sp.nodes:
            if (order[a] < order[b]) != (cand.rank[cand.i[a]] < cand.rank[cand.i[b]]):
                violations.append({"kind": "i_order_mismatch", "pair": [a, b]})

    image_set = set(image)
    bound = max((cand.rank[x] for x in image), default=-1)
    for x in st.nodes:
        if x not in image_set and cand.rank[x] <= bound:
            violations.append({"kind": "initial_segment", "node": x})

    for x in st.nodes:
        fixed = st.j[x] == x
        if fixed and x not in image_set:
            violations.append({"kind": "fixed_point_outside_range", "node": x})
        if not fixed and x in image_set:
            violations.append({"kind": "range_point_moved", "node": x})

    for params in _parameter_tuples(sp.nodes, max_params):
        mapped = tuple(cand.i[a] for a in params)
        if not ef_equivalent(
            sp.nodes, sp.edges, params, st.nodes, st.edges, mapped, depth
        ):
            violations.append({"kind": "not_elementary", "parameters": list(params), "depth": depth})
            break

    return {"pass": not violations, "violations": violations}


def check_amodel_map(
    pi: dict[str, str], src: AModelF, dst: AModelF, depth: int = 2, max_params: int = 2
) -> dict:
    """Verify a stage map: embedding, elementary up to ``depth``, and the
    two commuting squares (with i, and with j)."""
    violations: list[dict] = []
    src_nodes = src.structure.nodes
    missing = [x for x in src_nodes if x not in pi]
    if missing:
        violations.append({"kind": "not_total", "nodes": missing})
        return {"pass": False, "violations": violations}
    image = [pi[x] for x in src_nodes]
    if len(set(image)) != len(image):
        violations.append({"kind": "not_injective", "image": sorted(image)})
    dst_nodes = set(dst.structure.nodes)
    outside = [x for x in src_nodes if pi[x] not in dst_nodes]
    if outside:
        violations.append({"kind": "outside_target", "nodes": outside})
        return {"pass": False, "violations": violations}

    for x in src_nodes:
        for y in src_nodes:
            if ((x, y) in src.structure.edges) != ((pi[x], pi[y]) in dst.structure.edges):
                violations.append({"kind": "edge_mismatch", "pair": [x, y]})
    for x in src_nodes:
        for y in src_nodes:
            if (src.rank[x] <= src.rank[y]) != (dst.rank[pi[x]] <= dst.rank[pi[y]]):
                violations.append({"kind": "order_mismatch", "pair": [x, y]})

    if src.standard_part != dst.standard_part:
        violations.append({"kind": "standard_part_mismatch"})
    else:
        for a in src.standard_part.nodes:
            if pi[src.i[a]] != dst.i[a]:
                violations.append({"kind": "figure1", "element": a})
    for x in src_nodes:
        if pi[src.structure.j[x]] != dst.structure.j[pi[x]]:
            violations.append({"kind": "figure2", "node": x})

    for params in _parameter_tuples(src_nodes, max_params):
        mapped = tuple(pi[x] for x in params)
        if not ef_equivalent(
            src_nodes,
            src.structure.edges,
            params,
            dst.structure.nodes,
            dst.structure.edges,
            mapped,
            depth,
        ):
            violations.append({"kind": "not_elementary", "parameters": list(params), "depth": depth})
            break

    return {"pass": not violations, "violations": violations}


def validate_diagram(d: Diagram, depth: int = 0) -> dict:
    """Identity maps, composition law, shared standard part, and per-map
    checks at the given elementarity depth."""
    violations: list[dict] = []
    count = len(d.stages)
    for a in range(count):
        ident = d.maps.get((a, a))
        if ident is None or any(ident[x] != x for x in d.stages[a].structure.nodes):
            violations.append({"kind": "identity", "stage": a})
    for a in range(count):
        for b in range(a, count):
            if (a, b) not in d.maps:
                violations.append({"kind": "missing_map", "pair": [a, b]})
    for a in range(count):
        for b in range(a, count):
            for c in range(b, count):
                if any((x, y) not in d.maps for x, y in ((a, b), (b, c), (a, c))):
                    continue
                left = d.maps[(a, c)]
                for x in d.stages[a].structure.nodes:
                    if left[x] != d.maps[(b, c)][d.maps[(a, b)][x]]:
                        violations.append(
                            {"kind": "composition", "stages": [a, b, c], "node": x}
                        )
                        break
    for a in range(count):
        for b in range(a + 1, count):
            if (a, b) not in d.maps:
                continue
            rep = check_amodel_map(d.maps[(a, b)], d.stages[a], d.stages[b], depth)
            if not rep["pass"]:
                violations.append({"kind": "map", "pair": [a, b], "report": rep["violations"]})
    return {"pass": not violations, "violations": violations}


# ---------------------------------------------------------------------------
# Direct limit via original elements


def _tag(stage: int, label: str) -> str:
    return f"{stage}:{label}"


def originals(d: Diagram) -> list[set[str]]:
    """Per stage, the elements with no preimage at any earlier stage."""
    result: list[set[str]] = []
    for a, stage in enumerate(d.stages):
        hit: set[str] = set()
        for b in range(a):
            hit.update(d.maps[(b, a)][x] for x in d.stages[b].structure.nodes)
        result.append({x for x in stage.structure.nodes if x not in hit})
    return result


def direct_limit(d: Diagram) -> tuple[AModelF, dict[int, dict[str, str]]]:
    """Limit stage and the cocone maps into it.

    Carrier: pairs (stage, element) with the element original there,
    written "stage:element".  Each element of each stage is traced to its
    unique original preimage; relations between limit elements are read at
    every common later stage and must agree, otherwise the input chain did
    not commute and a DiagramError is raised.
    """
    count = len(d.stages)
    if count == 0:
        raise DiagramError("empty diagram")
    orig = originals(d)

    def trace(a: int, x: str) -> tuple[int, str]:
        for b in range(a + 1):
            found = [y for y in d.stages[b].structure.nodes if d.maps[(b, a)][y] == x]
            if found:
                if len(found) > 1:
                    raise DiagramError(f"map into stage {a} is not injective at {x!r}")
                y = found[0]
                if y not in orig[b]:
                    raise DiagramError(
                        f"least preimage {y!r} at stage {b} is not original"
                    )
                return b, y
        raise DiagramError(f"element {x!r} has no preimage at stage {a}")

    carrier = [(a, y) for a in range(count) for y in sorted(orig[a])]
    labels = {pair: _tag(*pair) for pair in carrier}

    def push(pair: tuple[int, str], stage: int) -> str:
        a, y = pair
        return d.maps[(a, stage)][y]

    def edge_verdict(u: tuple[int, str], v: tuple[int, str]) -> bool:
        lowest = max(u[0], v[0])
        verdicts = {
            (push(u, g), push(v, g)) in d.stages[g].structure.edges
            for g in range(lowest, count)
        }
        if len(verdicts) != 1:
            raise DiagramError(
                f"edge verdict for {labels[u]}, {labels[v]} differs across stages"
            )
        return verdicts.pop()

    edges = frozenset(
        (labels[u], labels[v]) for u in carrier for v in carrier if edge_verdict(u, v)
    )

    j_map: dict[str, str] = {}
    for a, y in carrier:
        jy = d.stages[a].structure.j[y]
        if jy not in orig[a]:
            raise DiagramError(f"j image of original {y!r} at stage {a} is not original")
        j_map[labels[(a, y)]] = labels[(a, jy)]

    def rank_leq(u: tuple[int, str], v: tuple[int, str]) -> bool:
        lowest = max(u[0], v[0])
        verdicts = {
            d.stages[g].rank[push(u, g)] <= d.stages[g].rank[push(v, g)]
            for g in range(lowest, count)
        }
        if len(verdicts) != 1:
            raise DiagramError(
                f"rank verdict for {labels[u]}, {labels[v]} differs across stages"
            )
        return verdicts.pop()

    remaining = list(carrier)
    ordered: list[list[tuple[int, str]]] = []
    while remaining:
        least = [u for u in remaining if all(rank_leq(u, v) for v in remaining)]
        if not least:
            raise DiagramError("rank comparisons do not form a total preorder")
        ordered.append(least)
        remaining = [u for u in remaining if u not in least]
    rank = {labels[u]: pos for pos, tier in enumerate(ordered) for u in tier}

    levels = tuple(
        frozenset(
            labels[(a, y)] for a, y in carrier if y in d.stages[a].structure.levels[k]
        )
        for k in range(3)
    )

    mode = d.stages[0].structure.mode
    structure = BaseStructure(
        nodes=tuple(labels[u] for u in carrier),
        edges=edges,
        levels=levels,
        j=j_map,
        mode=mode,
    )

    cocone: dict[int, dict[str, str]] = {}
    for a in range(count):
        cocone[a] = {
            x: labels[trace(a, x)] for x in d.stages[a].structure.nodes
        }

    i_map = {
        s: cocone[0][d.stages[0].i[s]] for s in d.stages[0].standard_part.nodes
    }
    limit = AModelF(
        structure=structure,
        standard_part=d.stages[0].standard_part,
        i=i_map,
        rank=rank,
    )
    return limit, cocone


def oracle_limit(d: Diagram) -> AModelF:
    """Colimit computed independently: disjoint union of all stage elements
    quotiented by eventual equality, with relations read at the last stage.

    Used to validate direct_limit; shares no code with it beyond the data
    types.
    """
    count = len(d.stages)
    if count == 0:
        raise DiagramError("empty diagram")
    tags = [(a, x) for a in range(count) for x in d.stages[a].structure.nodes]
    parent: dict[tuple[int, str], tuple[int, str]] = {t: t for t in tags}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    def union(t1, t2):
        r1, r2 = find(t1), find(t2)
        if r1 != r2:
            parent[max(r1, r2)] = min(r1, r2)

    for a in range(count - 1):
        step = d.maps[(a, a + 1)]
        for x in d.stages[a].structure.nodes:
            union((a, x), (a + 1, step[x]))

    classes: dict[tuple[int, str], list[tuple[int, str]]] = {}
    for t in tags:
        classes.setdefault(find(t), []).append(t)
    reps = sorted(classes)
    label = {rep: _tag(*rep) for rep in reps}

    last = count - 1

    def at_last(rep: tuple[int, str]) -> str:
        a, x = rep
        return d.maps[(a, last)][x]

    final = d.stages[last]
    edges = frozenset(
        (label[u], label[v])
        for u in reps
        for v in reps
        if (at_last(u), at_last(v)) in final.structure.edges
    )
    back = {at_last(rep): rep for rep in reps}
    j_map = {
        label[rep]: label[back[final.structure.j[at_last(rep)]]] for rep in reps
    }
    rank_raw = sorted(reps, key=lambda rep: final.rank[at_last(rep)])
    rank: dict[str, int] = {}
    pos = -1
    previous = None
    for rep in rank_raw:
        value = final.rank[at_last(rep)]
        if value != previous:
            pos += 1
            previous = value
        rank[label[rep]] = pos
    levels = tuple(
        frozenset(
            label[rep] for rep in reps if rep[1] in d.stages[rep[0]].structure.levels[k]
        )
        for k in range(3)
    )
    structure = BaseStructure(
        nodes=tuple(label[rep] for rep in reps),
        edges=edges,
        levels=levels,
        j=j_map,
        mode=d.stages[0].structure.mode,
    )
    i_map = {
        s: label[find((0, d.stages[0].i[s]))] for s in d.stages[0].standard_part.nodes
    }
    return AModelF(
        structure=structure,
        standard_part=d.stages[0].standard_part,
        i=i_map,
        rank=rank,
    )


# ---------------------------------------------------------------------------
# Isomorphism of stages


def amodel_isomorphic(m1: AModelF, m2: AModelF) -> bool:
    """Isomorphism respecting edges, j, i, levels, and the rank preorder."""
    if m1.standard_part != m2.standard_part:
        return False
    n1 = list(m1.structure.nodes)
    n2 = list(m2.structure.nodes)
    if len(n1) != len(n2):
        return False

    def normalized_rank(m: AModelF) -> dict[str, int]:
        values = sorted(set(m.rank[x] for x in m.structure.nodes))
        index = {v: i for i, v in enumerate(values)}
        return {x: index[m.rank[x]] for x in m.structure.nodes}

    r1, r2 = normalized_rank(m1), normalized_rank(m2)

    def signature(m: AModelF, ranks, x: str):
        st = m.structure
        return (
            ranks[x],
            tuple(x in st.levels[k] for k in range(3)),
            sum(1 for e in st.edges if e[0] == x),
            sum(1 for e in st.edges if e[1] == x),
            st.j[x] == x,
        )

    sig1 = {x: signature(m1, r1, x) for x in n1}
    sig2 = {x: signature(m2, r2, x) for x in n2}
    if sorted(sig1.values()) != sorted(sig2.values()):
        return False

    mapping: dict[str, str] = {}
    for s in m1.standard_part.nodes:
        mapping[m1.i[s]] = m2.i[s]
    if len(set(mapping.values())) != len(mapping):
        return False
    for x, y in mapping.items():
        if sig1[x] != sig2[y]:
            return False

    rest = [x for x in sorted(n1) if x not in mapping]
    used = set(mapping.values())

    def consistent(x: str, y: str) -> bool:
        if sig1[x] != sig2[y]:
            return False
        for a, b in mapping.items():
            if ((x, a) in m1.structure.edges) != ((y, b) in m2.structure.edges):
                return False
            if ((a, x) in m1.structure.edges) != ((b, y) in m2.structure.edges):
                return False
        return True

    def full_check() -> bool:
        for x in n1:
            if mapping[m1.structure.j[x]] != m2.structure.j[mapping[x]]:
                return False
        return True

    def search(k: int) -> bool:
        if k == len(rest):
            return full_check()
        x = rest[k]
        for y in sorted(set(n2) - used):
            if not consistent(x, y):
                continue
            mapping[x] = y
            used.add(y)
            if search(k + 1):
                return True
            del mapping[x]
            used.remove(y)
        return False

    return search(0)


# ---------------------------------------------------------------------------
# Random diagrams (used by sweeps and tests)


def trivial_amodel(sp: StandardPart) -> AModelF:
    structure = base_structure(
        sp.nodes,
        sp.edges,
        [sp.nodes, sp.nodes, sp.nodes],
        {x: x for x in sp.nodes},
    )
    return AModelF(
        structure=structure,
        standard_part=sp,
        i={x: x for x in sp.nodes},
        rank={x: pos for pos, x in enumerate(sp.nodes)},
    )


def random_standard_part(rng: random.Random, max_size: int = 3) -> StandardPart:
    size = rng.randint(1, max_size)
    nodes = tuple(f"s{k}" for k in range(size))
    edges = set()
    for p in range(size):
        for r in range(p + 1, size):
            if rng.random() < 0.5:
                edges.add((nodes[p], nodes[r]))
    return StandardPart(nodes=nodes, edges=frozenset(edges))


def extend_stage(
    prev: AModelF, rng: random.Random, stage_index: int, max_nodes: int = 8
) -> tuple[AModelF, dict[str, str]]:
    """Next stage of a chain plus the connecting map.

    The previous stage is carried over, optionally relabeled, and new
    j-orbits are attached whose edges touch only j-fixed elements, which
    keeps j an automorphism and keeps the fixed points exactly the image
    of the standard part.
    """
    relabel = rng.random() < 0.5
    rename = {
        x: (f"{x}@{stage_index}" if relabel else x) for x in prev.structure.nodes
    }
    nodes = [rename[x] for x in prev.structure.nodes]
    edges = {(rename[x], rename[y]) for x, y in prev.structure.edges}
    j_map = {rename[x]: rename[prev.structure.j[x]] for x in prev.structure.nodes}
    rank = {rename[x]: prev.rank[x] for x in prev.structure.nodes}
    i_map = {s: rename[prev.i[s]] for s in prev.standard_part.nodes}

    fixed = sorted(i_map.values())
    sp_bound = max(rank[x] for x in fixed)
    top_rank = max(rank.values())

    budget = max_nodes - len(nodes)
    orbit_count = rng.randint(1, 2) if budget >= 2 else 0
    for o in range(orbit_count):
        size = rng.choice([2, 3])
        if size > budget:
            break
        budget -= size
        orbit = [f"u{stage_index}_{o}_{t}" for t in range(size)]
        in_from = [x for x in fixed if rng.random() < 0.4]
        out_to = [x for x in fixed if rng.random() < 0.4]
        shifts = [dlt for dlt in range(1, size) if rng.random() < 0.4]
        orbit_rank = rng.randint(sp_bound + 1, top_rank + 1)
        for t, u in enumerate(orbit):
            nodes.append(u)
            rank[u] = orbit_rank
            j_map[u] = orbit[(t + 1) % size]
            for x in in_from:
                edges.add((x, u))
            for x in out_to:
                edges.add((u, x))
        for dlt in shifts:
            for t in range(size):
                edges.add((orbit[t], orbit[(t + dlt) % size]))

    structure = base_structure(
        nodes,
        edges,
        [nodes, nodes, nodes],
        j_map,
    )
    stage = AModelF(
        structure=structure,
        standard_part=prev.standard_part,
        i=i_map,
        rank=rank,
    )
    return stage, rename


def random_diagram(
    rng: random.Random, max_stages: int = 4, max_nodes: int = 8
) -> Diagram:
    sp = random_standard_part(rng)
    stages = [trivial_amodel(sp)]
    maps: dict[tuple[int, int], dict[str, str]] = {
        (0, 0): {x: x for x in sp.nodes}
    }
    count = rng.randint(1, max_stages)
    for a in range(1, count):
        stage, step = extend_stage(stages[-1], rng, a, max_nodes)
        stages.append(stage)
        maps[(a, a)] = {x: x for x in stage.structure.nodes}
        maps[(a - 1, a)] = step
        for b in range(a - 1):
            maps[(b, a)] = {
                x: step[maps[(b, a - 1)][x]] for x in stages[b].structure.nodes
            }
    return Diagram(stages=stages, maps=maps)


# ---------------------------------------------------------------------------
# JSON interchange


def amodel_to_json(m: AModelF) -> dict:
    return {
        "structure": base_to_json(m.structure),
        "standard_part": {
            "nodes": list(m.standard_part.nodes),
            "edges": sorted([list(e) for e in m.standard_part.edges]),
        },
        "i": {k: m.i[k] for k in sorted(m.i)},
        "rank": {k: m.rank[k] for k in sorted(m.rank)},
    }


def amodel_from_json(data: dict | str) -> AModelF:
    if isinstance(data, str):
        data = json.loads(data)
    sp = data["standard_part"]
    return AModelF(
        structure=base_from_json(data["structure"]),
        standard_part=StandardPart(
            nodes=tuple(sp["nodes"]),
            edges=frozenset(tuple(e) for e in sp["edges"]),
        ),
        i=dict(data["i"]),
        rank={k: int(v) for k, v in data["rank"].items()},
    )


def diagram_to_json(d: Diagram) -> dict:
    return {
        "stages": [amodel_to_json(s) for s in d.stages],
        "maps": {
            f"{a},{b}": {k: m[k] for k in sorted(m)}
            for (a, b), m in sorted(d.maps.items())
        },
    }


def diagram_from_json(data: dict | str) -> Diagram:
    if isinstance(data, str):
        data = json.loads(data)
    maps = {}
    for key, table in data["maps"].items():
        a, b = key.split(",")
        maps[(int(a), int(b))] = dict(table)
    return Diagram(
        stages=[amodel_from_json(s) for s in data["stages"]],
        maps=maps,
    )
