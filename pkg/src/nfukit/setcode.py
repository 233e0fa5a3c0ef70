"""Sets coded as finite pointed digraphs.

A code is a digraph with a designated top node, where an edge (x, y) reads
"x is a member of y".  When the digraph is extensional (distinct nodes have
distinct predecessor sets), well-founded (acyclic, the finite equivalent)
and topped (every node reaches the top), collapsing it recursively yields a
hereditarily finite set in a canonical brace string, and that string is a
complete isomorphism invariant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

DEFAULT_EMBED_CAP = 64
DEFAULT_ORDINAL_CAP = 64


class GraphError(ValueError):
    pass


class InvalidCodeError(ValueError):
    """The graph fails one of the code conditions; names the failed flags."""


@dataclass(frozen=True)
class PointedGraph:
    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]
    top: str


@dataclass(frozen=True)
class ValidationFlags:
    extensional: bool
    well_founded: bool
    topped: bool

    def all_ok(self) -> bool:
        return self.extensional and self.well_founded and self.topped

    def failed(self) -> list[str]:
        return [
            name
            for name, ok in (
                ("extensional", self.extensional),
                ("well_founded", self.well_founded),
                ("topped", self.topped),
            )
            if not ok
        ]


def pointed_graph(nodes, edges, top) -> PointedGraph:
    node_list = list(nodes)
    node_set = frozenset(node_list)
    if len(node_list) != len(node_set):
        raise GraphError("duplicate node labels")
    if top not in node_set:
        raise GraphError(f"top {top!r} is not a node")
    edge_set = frozenset((x, y) for x, y in edges)
    for x, y in edge_set:
        if x not in node_set or y not in node_set:
            raise GraphError(f"edge ({x!r}, {y!r}) leaves the node set")
    return PointedGraph(nodes=node_set, edges=edge_set, top=top)


def predecessors(g: PointedGraph) -> dict[str, frozenset[str]]:
    pred: dict[str, set[str]] = {v: set() for v in g.nodes}
    for x, y in g.edges:
        pred[y].add(x)
    return {v: frozenset(s) for v, s in pred.items()}


def validate(g: PointedGraph) -> ValidationFlags:
    """Check the three code conditions.

    Extensional: predecessor sets are pairwise distinct.  Well-founded: no
    directed cycle, which for finite relations is equivalent to every
    nonempty subset having a least element.  Topped: every node reaches the
    top along edges.
    """
    pred = predecessors(g)
    extensional = len(set(pred.values())) == len(g.nodes)

    # Cycle check by iterated sink removal.
    out_count = {v: 0 for v in g.nodes}
    incoming: dict[str, list[str]] = {v: [] for v in g.nodes}
    for x, y in g.edges:
        out_count[x] += 1
        incoming[y].append(x)
    stack = [v for v in g.nodes if out_count[v] == 0]
    removed = 0
    while stack:
        v = stack.pop()
        removed += 1
        for x in incoming[v]:
            out_count[x] -= 1
            if out_count[x] == 0:
                stack.append(x)
    well_founded = removed == len(g.nodes)

    reaches_top = {g.top}
    frontier = [g.top]
    while frontier:
        y = frontier.pop()
        for x in pred[y]:
            if x not in reaches_top:
                reaches_top.add(x)
                frontier.append(x)
    topped = len(reaches_top) == len(g.nodes)

    return ValidationFlags(extensional, well_founded, topped)


def require_valid(g: PointedGraph) -> None:
    flags = validate(g)
    if not flags.all_ok():
        raise InvalidCodeError(f"graph is not a set code; failed: {', '.join(flags.failed())}")


# ---------------------------------------------------------------------------
# Canonical hereditarily finite strings


def hf_canonical(children) -> str:
    """Brace string with distinct children sorted by (length, lexicographic)."""
    unique = sorted(set(children), key=lambda s: (len(s), s))
    return "{" + ",".join(unique) + "}"


def hf_members(s: str) -> list[str]:
    if not (s.startswith("{") and s.endswith("}")):
        raise ValueError(f"not a set string: {s!r}")
    body = s[1:-1]
    if not body:
        return []
    members = []
    depth = 0
    start = 0
    for idx, ch in enumerate(body):
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        elif ch == "," and depth == 0:
            members.append(body[start:idx])
            start = idx + 1
    members.append(body[start:])
    return members


def von_neumann(n: int) -> str:
    """Canonical string of the finite ordinal n as the set {0, ..., n-1}."""
    stages: list[str] = []
    for _ in range(n + 1):
        stages.append(hf_canonical(stages))
    return stages[n]


# ---------------------------------------------------------------------------
# Collapse and derived relations


def collapse(g: PointedGraph) -> str:
    """Canonical set string of the top node.

    Recursively, a node's value is the set of its predecessors' values.
    Requires all three code conditions and names any failed flag.
    """
    require_valid(g)
    pred = predecessors(g)
    value: dict[str, str] = {}

    # Iterative topological pass keeps recursion depth bounded.
    order: list[str] = []
    marked: set[str] = set()
    stack = [(g.top, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if node in marked:
            continue
        marked.add(node)
        stack.append((node, True))
        for z in pred[node]:
            if z not in marked:
                stack.append((z, False))
    for node in order:
        value[node] = hf_canonical(value[z] for z in pred[node])
    return value[g.top]


def iso_eq(g1: PointedGraph, g2: PointedGraph) -> bool:
    """Isomorphism of pointed codes, decided by collapse equality.

    Valid codes are rigid, so the collapse string is a complete invariant.
    """
    return collapse(g1) == collapse(g2)


def e_rel(g1: PointedGraph, g2: PointedGraph, cap: int = DEFAULT_EMBED_CAP) -> bool:
    """Membership between codes.

    Searches for an injection of g1 into g2 that preserves and reflects
    edges, has a predecessor-closed range, and sends top1 strictly below
    top2.  Above ``cap`` total nodes the search is skipped in favor of the
    equivalent collapse-membership criterion.
    """
    return e_rel_report(g1, g2, cap)["holds"]


def e_rel_report(g1: PointedGraph, g2: PointedGraph, cap: int = DEFAULT_EMBED_CAP) -> dict:
    require_valid(g1)
    require_valid(g2)
    if len(g1.nodes) + len(g2.nodes) > cap:
        holds = collapse(g1) in hf_members(collapse(g2))
        return {"holds": holds, "method": "collapse"}
    return {"holds": _embedding_exists(g1, g2), "method": "embedding"}


def _embedding_exists(g1: PointedGraph, g2: PointedGraph) -> bool:
    pred1 = predecessors(g1)
    pred2 = predecessors(g2)
    # Members first, so each node's predecessors are mapped before it.
    order = _topological(g1, pred1)
    n1 = len(order)
    if n1 > len(g2.nodes):
        return False

    assignment: dict[str, str] = {}
    used: set[str] = set()

    def consistent(x: str, w: str) -> bool:
        if len(pred2[w]) < len(pred1[x]):
            return False
        for y, py in assignment.items():
            fwd = (x, y) in g1.edges
            if fwd != ((w, py) in g2.edges):
                return False
            back = (y, x) in g1.edges
            if back != ((py, w) in g2.edges):
                return False
        return True

    def extend(k: int) -> bool:
        if k == n1:
            image = set(assignment.values())
            if (assignment[g1.top], g2.top) not in g2.edges:
                return False
            for w in image:  # predecessor-closed range
                if not pred2[w] <= image:
                    return False
            return True
        x = order[k]
        for w in sorted(g2.nodes):
            if w in used or not consistent(x, w):
                continue
            assignment[x] = w
            used.add(w)
            if extend(k + 1):
                return True
            del assignment[x]
            used.remove(w)
        return False

    return extend(0)


def _topological(g: PointedGraph, pred: dict[str, frozenset[str]]) -> list[str]:
    order: list[str] = []
    seen: set[str] = set()

    def visit(x: str) -> None:
        stack = [(x, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if node in seen:
                continue
            seen.add(node)
            stack.append((node, True))
            for z in sorted(pred[node]):
                if z not in seen:
                    stack.append((z, False))

    for x in sorted(g.nodes):
        visit(x)
    return order


def automorphisms(g: PointedGraph) -> list[dict[str, str]]:
    """All automorphisms of a pointed graph (top fixed, edges preserved)."""
    import itertools

    nodes = sorted(g.nodes)
    result = []
    for perm in itertools.permutations(nodes):
        mapping = dict(zip(nodes, perm))
        if mapping[g.top] != g.top:
            continue
        if all(((mapping[x], mapping[y]) in g.edges) == ((x, y) in g.edges)
               for x in nodes for y in nodes):
            result.append(mapping)
    return result


# ---------------------------------------------------------------------------
# The singleton-image operation and ordinal codes


def usc_T(g: PointedGraph) -> PointedGraph:
    """Rebuild the code on singleton-wrapped labels.

    Every label x becomes {x} and edges follow; at this concrete scale the
    operation is a relabeling, so the collapse is unchanged.
    """
    wrap = {x: "{" + x + "}" for x in g.nodes}
    return PointedGraph(
        nodes=frozenset(wrap.values()),
        edges=frozenset((wrap[x], wrap[y]) for x, y in g.edges),
        top=wrap[g.top],
    )


def ordinal_code(n: int, cap: int = DEFAULT_ORDINAL_CAP) -> PointedGraph:
    """Code of the finite ordinal n.

    A strict linear order of length n plus a fresh top above everything;
    because the order relation is transitive, each element's predecessor
    set matches its set of smaller elements and the collapse is the usual
    finite ordinal.
    """
    if n < 0:
        raise ValueError("ordinal must be non-negative")
    if n > cap:
        raise ValueError(f"ordinal {n} exceeds cap {cap}")
    labels = [f"o{i}" for i in range(n)]
    edges = set()
    for i in range(n):
        for k in range(i + 1, n):
            edges.add((labels[i], labels[k]))
        edges.add((labels[i], "t"))
    return PointedGraph(nodes=frozenset(labels + ["t"]), edges=frozenset(edges), top="t")


def decode_ordinal(g: PointedGraph) -> int | None:
    """The n with collapse(g) equal to the finite ordinal n, else None."""
    s = collapse(g)
    n = len(hf_members(s))
    return n if s == von_neumann(n) else None


# ---------------------------------------------------------------------------
# Exhaustive enumeration of small codes

def enumerate_codes(max_nodes: int) -> list[PointedGraph]:
    """Every valid code with at most ``max_nodes`` nodes, one per isomorphism
    class.

    A valid code on k nodes is exactly (a relabeling of) the membership
    digraph of the closure of a hereditarily finite set with k elements in
    its closure, so the enumeration walks those sets.  Node labels are the
    member strings themselves.
    """
    closure_size: dict[str, int] = {}
    closure: dict[str, frozenset[str]] = {}
    universe: list[str] = []

    def admit(members: tuple[str, ...]) -> None:
        s = hf_canonical(members)
        if s in closure:
            return
        cl = frozenset({s}.union(*(closure[m] for m in members)) if members else {s})
        if len(cl) > max_nodes:
            return
        closure[s] = cl
        closure_size[s] = len(cl)
        universe.append(s)

    admit(())
    import itertools

    changed = True
    while changed:
        changed = False
        pool = sorted(universe, key=lambda s: (len(s), s))
        before = len(universe)
        for r in range(1, max_nodes):
            for combo in itertools.combinations(pool, r):
                union = frozenset().union(*(closure[m] for m in combo))
                if len(union) + 1 > max_nodes:
                    continue
                admit(combo)
        changed = len(universe) > before

    graphs = []
    for s in sorted(universe, key=lambda t: (closure_size[t], len(t), t)):
        nodes = closure[s]
        edges = frozenset(
            (a, b) for b in nodes for a in hf_members(b) if a in nodes
        )
        graphs.append(PointedGraph(nodes=nodes, edges=edges, top=s))
    return graphs


# ---------------------------------------------------------------------------
# JSON interchange


def graph_to_json(g: PointedGraph) -> dict:
    return {
        "nodes": sorted(g.nodes),
        "edges": sorted([list(e) for e in g.edges]),
        "top": g.top,
    }


def graph_from_json(data: dict | str) -> PointedGraph:
    if isinstance(data, str):
        data = json.loads(data)
    return pointed_graph(data["nodes"], [tuple(e) for e in data["edges"]], data["top"])
