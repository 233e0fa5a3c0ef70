"""Tree-assignment combinatorics at a finite scale K.

The basic module files the elements of a set B into a tree whose nodes are
value sequences of the per-index colorings; the longest occupied chain is
the branch and the elements filed along it form the thinned set B'.
Iterating the module yields a nested level sequence, against which
colorings of increasing tuples receive constancy certificates (a level, a
gap function, and the constant value) by the tail-reading recursion.  A
two-valued measure on subsets falls out of the levels, and the section
ends with the tree and branch validators.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass


class RamseyError(ValueError):
    pass


@dataclass(frozen=True)
class ScaleContext:
    K: int

    def __post_init__(self):
        if self.K < 2:
            raise RamseyError("scale K must be at least 2")


@dataclass(frozen=True)
class ColoringFamily:
    """Per-index colorings: tables[i] maps 0..K-1 into 0..gammas[i]-1."""

    gammas: tuple[int, ...]
    tables: tuple[tuple[int, ...], ...]


def coloring_family(gammas, tables) -> ColoringFamily:
    gammas = tuple(int(g) for g in gammas)
    tables = tuple(tuple(int(v) for v in t) for t in tables)
    K = len(gammas)
    if len(tables) != K:
        raise RamseyError("need exactly one table per index")
    for i, (g, t) in enumerate(zip(gammas, tables)):
        if not 0 < g <= K:
            raise RamseyError(f"gamma[{i}] = {g} is out of range")
        if len(t) != K:
            raise RamseyError(f"table {i} must have length {K}")
        if any(not 0 <= v < g for v in t):
            raise RamseyError(f"table {i} takes a value outside 0..{g - 1}")
    return ColoringFamily(gammas=gammas, tables=tables)


@dataclass(frozen=True)
class AssignmentTree:
    occupied: dict[tuple[int, ...], int]
    assignment: dict[int, tuple[int, ...]]
    branch: tuple[tuple[int, ...], ...]
    order: tuple[tuple[int, tuple[int, ...]], ...]


@dataclass(frozen=True)
class LevelSequence:
    K: int
    B: tuple[tuple[int, ...], ...]
    families: tuple[ColoringFamily, ...]


@dataclass(frozen=True)
class PartitionCertificate:
    m: int
    G: tuple[int, ...]
    eta: int


# ---------------------------------------------------------------------------
# Spread-apart tuples


def spread_apart(alphas, G) -> bool:
    """G(0) < a1, and each later entry exceeds G of its predecessor."""
    alphas = tuple(alphas)
    if any(a2 <= a1 for a1, a2 in zip(alphas, alphas[1:])):
        raise RamseyError(f"tuple {alphas} is not strictly increasing")
    if not alphas:
        return True
    if G[0] >= alphas[0]:
        return False
    return all(G[alphas[i - 1]] < alphas[i] for i in range(1, len(alphas)))


# ---------------------------------------------------------------------------
# The basic module and the level sequence


def basic_module(B, fam: ColoringFamily) -> tuple[AssignmentTree, tuple[int, ...]]:
    """File each element of B at the shortest free restriction of its value
    sequence; return the tree and the elements along the longest chain.

    Elements are processed in increasing order.  Element b's value sequence
    is (tables[0][b], tables[1][b], ...); restrictions are its prefixes,
    including the empty one.  Chain lengths run up to K, so with at most K
    elements a free restriction always exists.  The branch is the longest
    occupied chain, lexicographically least on ties; the returned set lists
    the elements filed along it, in increasing order.
    """
    K = len(fam.gammas)
    elements = sorted(set(int(b) for b in B))
    if not elements:
        raise RamseyError("input set is empty")
    if elements[0] < 0 or elements[-1] >= K:
        raise RamseyError(f"input set leaves 0..{K - 1}")
    if len(elements) > K:
        raise RamseyError("input set is larger than the scale")

    occupied: dict[tuple[int, ...], int] = {}
    order: list[tuple[int, tuple[int, ...]]] = []
    for b in elements:
        values = tuple(fam.tables[alpha][b] for alpha in range(K))
        for length in range(K + 1):
            node = values[:length]
            if node not in occupied:
                occupied[node] = b
                order.append((b, node))
                break
        else:
            raise AssertionError("no free restriction, input too large")

    deepest = max(len(node) for node in occupied)
    leaf = min(node for node in occupied if len(node) == deepest)
    branch = tuple(leaf[:length] for length in range(deepest + 1))
    thinned = tuple(sorted(occupied[node] for node in branch))
    tree = AssignmentTree(
        occupied=occupied,
        assignment={b: node for node, b in occupied.items()},
        branch=branch,
        order=tuple(order),
    )
    return tree, thinned


def greedy_spread(seq, G) -> tuple[int, ...]:
    """Largest-first greedy subsequence that is G spread apart."""
    kept: list[int] = []
    for a in seq:
        threshold = G[kept[-1]] if kept else G[0]
        if a > threshold:
            kept.append(a)
    return tuple(kept)


def length_construction(
    ctx: ScaleContext,
    stage_families,
    d: int,
    spread_thin=None,
) -> LevelSequence:
    """Iterate the basic module d times from the full scale.

    Deterministic: ties in branch selection break lexicographically, so
    identical inputs give identical level sequences.  When ``spread_thin``
    is a gap function, each new level is additionally thinned to a greedy
    spread-apart subsequence (off by default).
    """
    families = tuple(stage_families)
    if len(families) != d:
        raise RamseyError(f"depth {d} does not match {len(families)} families")
    levels: list[tuple[int, ...]] = [tuple(range(ctx.K))]
    for index, fam in enumerate(families):
        if len(fam.gammas) != ctx.K:
            raise RamseyError(f"family {index} is not at scale {ctx.K}")
        if not levels[-1]:
            raise RamseyError(f"level {index} is empty; construction stuck")
        _, nxt = basic_module(levels[-1], fam)
        if spread_thin is not None:
            nxt = greedy_spread(nxt, spread_thin)
        levels.append(nxt)
    return LevelSequence(K=ctx.K, B=tuple(levels), families=families)


# ---------------------------------------------------------------------------
# Colorings of increasing tuples and their certificates

# A coloring of arity n is a dict from increasing n-tuples over 0..K-1
# to values below gamma.


def increasing_tuples(K: int, n: int):
    return itertools.combinations(range(K), n)


def check_coloring(F: dict, n: int, gamma: int, K: int) -> None:
    for t in increasing_tuples(K, n):
        if t not in F:
            raise RamseyError(f"coloring is missing tuple {t}")
        if not 0 <= F[t] < gamma:
            raise RamseyError(f"value {F[t]} at {t} is outside 0..{gamma - 1}")


def unary_table(F: dict, K: int) -> tuple[int, ...]:
    return tuple(F[(x,)] for x in range(K))


def slice_tables(F: dict, n: int, K: int) -> list[tuple[int, ...]]:
    """Unary snapshots of F with the first n-1 coordinates fixed.

    Positions at or below the fixed prefix are padded with 0; only the
    strictly larger positions carry information.
    """
    out = []
    for prefix in increasing_tuples(K, n - 1):
        table = tuple(
            F[prefix + (x,)] if x > prefix[-1] else 0 for x in range(K)
        )
        out.append(table)
    return out


def find_cover_stage(tables, gamma: int, families) -> int | None:
    """Least stage index r such that every table occurs (with this gamma)
    somewhere in families[0..r]."""
    pending = set(tables)
    for r, fam in enumerate(families):
        for g, t in zip(fam.gammas, fam.tables):
            if g == gamma and t in pending:
                pending.discard(t)
        if not pending:
            return r
    return None


def _constant_tail(values: list[int]) -> int:
    """Index where the maximal constant suffix of ``values`` begins."""
    idx = len(values) - 1
    while idx > 0 and values[idx - 1] == values[-1]:
        idx -= 1
    return idx


def derive_step(F: dict, n: int, level: tuple[int, ...], K: int):
    """Gap function and reduced coloring for the recursion step.

    For each fixed prefix, read the maximal constant tail of F over the
    level's admissible extensions; the reduced coloring H records the tail
    value and the gap function records a bound below which extensions may
    disagree.
    """
    H: dict[tuple[int, ...], int] = {}
    bound: dict[tuple[int, ...], int] = {}
    for prefix in increasing_tuples(K, n - 1):
        cand = [b for b in level if b > prefix[-1]]
        if not cand:
            H[prefix] = 0
            bound[prefix] = K - 1
            continue
        values = [F[prefix + (b,)] for b in cand]
        start = _constant_tail(values)
        H[prefix] = values[-1]
        bound[prefix] = cand[start - 1] if start > 0 else prefix[-1]
    g_star = tuple(
        max(
            (bound[prefix] for prefix in increasing_tuples(K, n - 1) if prefix[-1] == t),
            default=0,
        )
        for t in range(K)
    )
    return g_star, H


def partition_find(
    F: dict, n: int, gamma: int, levels: LevelSequence
) -> PartitionCertificate | None:
    """Constancy certificate (m, G, eta) for F on spread-apart tuples.

    Unary colorings are looked up among the stage families and the tail of
    the level right after their stage is read off.  Higher arities derive
    the gap function and the reduced coloring from the stage whose families
    cover all unary snapshots of F, then recurse.  Returns None when the
    levels cannot certify anything (finite truncation); wrong certificates
    are never returned, and callers may re-check with
    verify_partition_certificate.
    """
    K = levels.K
    if n < 1:
        raise RamseyError("arity must be at least 1")
    if not 0 < gamma <= K:
        raise RamseyError(f"gamma {gamma} out of range")
    check_coloring(F, n, gamma, K)

    zero = (0,) * K
    if gamma == 1:
        return PartitionCertificate(m=0, G=zero, eta=0)
    values = set(F.values())
    if len(values) == 1:
        return PartitionCertificate(m=0, G=zero, eta=values.pop())

    if n == 1:
        table = unary_table(F, K)
        for r, fam in enumerate(levels.families):
            if r + 1 >= len(levels.B):
                break
            if not any(
                g == gamma and t == table for g, t in zip(fam.gammas, fam.tables)
            ):
                continue
            level = levels.B[r + 1]
            if not level:
                continue
            series = [F[(b,)] for b in level]
            start = _constant_tail(series)
            eta = series[-1]
            threshold = level[start - 1] if start > 0 else 0
            return PartitionCertificate(m=r + 1, G=(threshold,) * K, eta=eta)
        return None

    tables = slice_tables(F, n, K)
    r = find_cover_stage(tables, gamma, levels.families)
    if r is None or r + 1 >= len(levels.B):
        return None
    g_star, H = derive_step(F, n, levels.B[r + 1], K)
    sub = partition_find(H, n - 1, gamma, levels)
    if sub is None:
        return None
    return PartitionCertificate(
        m=max(r + 1, sub.m),
        G=tuple(max(a, b) for a, b in zip(g_star, sub.G)),
        eta=sub.eta,
    )


def verify_partition_certificate(
    F: dict, n: int, levels: LevelSequence, cert: PartitionCertificate
) -> bool:
    """Exhaustively re-check a certificate over its level."""
    level = levels.B[cert.m]
    for t in itertools.combinations(level, n):
        if spread_apart(t, cert.G) and F[t] != cert.eta:
            return False
    return True


@dataclass(frozen=True)
class EtaUniqueness:
    verdict: str  # "true" | "false" | "undecided"
    witness: tuple[int, ...] | None


def eta_uniqueness_check(
    F: dict, n: int, gamma: int, levels: LevelSequence, outputs
) -> EtaUniqueness:
    """Whether a batch of certificates agrees on the constant value.

    Disagreeing values are refuted by a tuple spread apart for the
    pointwise maximum of the gap functions inside the deepest level; when
    no such tuple exists in range the finite data cannot decide.
    """
    outputs = list(outputs)
    if not outputs:
        raise RamseyError("no certificates to compare")
    etas = {cert.eta for cert in outputs}
    if len(etas) == 1:
        return EtaUniqueness(verdict="true", witness=None)
    m_star = max(cert.m for cert in outputs)
    g_star = tuple(max(cert.G[t] for cert in outputs) for t in range(levels.K))
    for t in itertools.combinations(levels.B[m_star], n):
        if spread_apart(t, g_star):
            return EtaUniqueness(verdict="false", witness=t)
    return EtaUniqueness(verdict="undecided", witness=None)


def prepare_levels(colorings, K: int) -> LevelSequence:
    """Level sequence whose families cover the given colorings.

    ``colorings`` is a list of (F, n, gamma).  Unary colorings are placed
    directly; higher arities contribute their unary snapshots, and the
    reduced colorings produced by the recursion are queued for the
    following stages, so partition_find finds everything it needs.
    """
    families: list[ColoringFamily] = []
    levels: list[tuple[int, ...]] = [tuple(range(K))]
    placed: set[tuple[int, tuple[int, ...]]] = set()
    queue = [(dict(F), int(n), int(g)) for F, n, g in colorings]
    for F, n, gamma in queue:
        check_coloring(F, n, gamma, K)

    while queue:
        batch: list[tuple[tuple[int, ...], int]] = []
        for F, n, gamma in queue:
            snapshots = [unary_table(F, K)] if n == 1 else slice_tables(F, n, K)
            for t in snapshots:
                if (gamma, t) not in placed:
                    placed.add((gamma, t))
                    batch.append((t, gamma))
        for pos in range(0, max(len(batch), 1), K):
            chunk = batch[pos : pos + K]
            while len(chunk) < K:
                chunk.append(((0,) * K, 1))
            fam = coloring_family([g for _, g in chunk], [t for t, _ in chunk])
            if not levels[-1]:
                raise RamseyError("level collapsed to empty while preparing")
            _, nxt = basic_module(levels[-1], fam)
            families.append(fam)
            levels.append(nxt)
        nxt_queue = []
        for F, n, gamma in queue:
            if n == 1:
                continue
            r = find_cover_stage(slice_tables(F, n, K), gamma, families)
            if r is None or r + 1 >= len(levels):
                raise AssertionError("snapshots were just placed but not found")
            _, H = derive_step(F, n, levels[r + 1], K)
            nxt_queue.append((H, n - 1, gamma))
        queue = nxt_queue
    return LevelSequence(K=K, B=tuple(levels), families=tuple(families))


# ---------------------------------------------------------------------------
# The measure


def nu_measure(B, levels: LevelSequence, min_tail: int = 2):
    """1 when some level has a tail inside B, 0 when inside the complement.

    A tail is a suffix with at least ``min_tail`` elements; levels shorter
    than that cannot decide.  The least deciding stage wins; with nested
    suffixes the two verdicts can never fire at the same stage.  Returns
    None when no stage decides.
    """
    member = frozenset(int(b) for b in B)
    for level in levels.B:
        if len(level) < min_tail:
            continue
        for start in range(len(level) - min_tail + 1):
            tail = level[start:]
            if all(b in member for b in tail):
                return 1
            if all(b not in member for b in tail):
                return 0
    return None


# ---------------------------------------------------------------------------
# Trees, scale trees, and branches


def tree_report(nodes, order, K: int, branch=None) -> dict:
    """Validate a strict tree order, the scale-K conditions, and a branch.

    ``order`` lists pairs (x, y) meaning x lies strictly below y.  Finite
    segments are well-ordered exactly when they are linearly ordered.
    """
    node_list = list(nodes)
    node_set = set(node_list)
    if len(node_list) != len(node_set):
        raise RamseyError("duplicate tree nodes")
    below = set()
    for x, y in order:
        if x not in node_set or y not in node_set:
            raise RamseyError(f"order pair ({x!r}, {y!r}) leaves the node set")
        below.add((x, y))

    tree_violations = []
    for x, y in below:
        if x == y:
            tree_violations.append({"kind": "reflexive", "node": x})
    for x, y in below:
        for z in node_set:
            if (y, z) in below and (x, z) not in below:
                tree_violations.append({"kind": "not_transitive", "triple": [x, y, z]})
    seg = {a: sorted(x for x, b in below if b == a) for a in node_set}
    for a in sorted(node_set):
        for u in seg[a]:
            for v in seg[a]:
                if u != v and (u, v) not in below and (v, u) not in below:
                    tree_violations.append(
                        {"kind": "segment_not_linear", "node": a, "pair": [u, v]}
                    )
    is_tree = not tree_violations

    rank = {a: len(seg[a]) for a in node_set}
    k_violations = []
    for a in sorted(node_set):
        if rank[a] >= K:
            k_violations.append({"kind": "rank_too_large", "node": a, "rank": rank[a]})
    levels = {alpha: sorted(a for a in node_set if rank[a] == alpha) for alpha in range(K)}
    for alpha in range(K):
        if not levels[alpha]:
            k_violations.append({"kind": "empty_level", "level": alpha})
        elif len(levels[alpha]) >= K:
            k_violations.append(
                {"kind": "level_too_large", "level": alpha, "size": len(levels[alpha])}
            )
    is_k_tree = is_tree and not k_violations

    branch_report = None
    if branch is not None:
        b = set(branch)
        branch_violations = []
        for x in sorted(b):
            if x not in node_set:
                raise RamseyError(f"branch element {x!r} is not a node")
        for alpha in range(K):
            hits = [x for x in levels[alpha] if x in b]
            if len(hits) != 1:
                branch_violations.append(
                    {"kind": "level_count", "level": alpha, "hits": hits}
                )
        for x in sorted(b):
            for y in seg[x]:
                if y not in b:
                    branch_violations.append(
                        {"kind": "not_downward_closed", "node": x, "missing": y}
                    )
        branch_report = {"is_branch": not branch_violations, "violations": branch_violations}

    return {
        "is_tree": is_tree,
        "tree_violations": tree_violations,
        "is_scale_tree": is_k_tree,
        "scale_violations": k_violations,
        "branch": branch_report,
    }


def binary_tree_report(sequences, K: int, branch=None) -> dict:
    """Validate a 0/1-sequence tree at scale K and an optional branch."""
    seqs = set()
    for s in sequences:
        t = tuple(int(v) for v in s)
        if any(v not in (0, 1) for v in t):
            raise RamseyError(f"sequence {t} is not over 0/1")
        seqs.add(t)

    violations = []
    for s in sorted(seqs):
        if len(s) >= K:
            violations.append({"kind": "too_long", "sequence": list(s)})
    for s in sorted(seqs):
        for length in range(len(s)):
            if s[:length] not in seqs:
                violations.append(
                    {"kind": "not_restriction_closed", "sequence": list(s), "length": length}
                )
    for alpha in range(K):
        if not any(len(s) == alpha for s in seqs):
            violations.append({"kind": "missing_length", "length": alpha})
    is_binary = not violations

    branch_report = None
    if branch is not None:
        b = {tuple(int(v) for v in s) for s in branch}
        branch_violations = []
        for alpha in range(K):
            hits = [s for s in b if len(s) == alpha]
            if len(hits) != 1:
                branch_violations.append({"kind": "level_count", "level": alpha})
        for s in b:
            if s not in seqs:
                branch_violations.append({"kind": "outside_tree", "sequence": list(s)})
            for length in range(len(s)):
                if s[:length] not in b:
                    branch_violations.append(
                        {"kind": "not_downward_closed", "sequence": list(s)}
                    )
        branch_report = {"is_branch": not branch_violations, "violations": branch_violations}

    return {
        "is_binary_scale_tree": is_binary,
        "violations": violations,
        "branch": branch_report,
    }


def tree_validators(presentation: dict, K: int) -> dict:
    """Dispatch a JSON presentation to the matching validator."""
    if "sequences" in presentation:
        return binary_tree_report(
            presentation["sequences"], K, presentation.get("branch")
        )
    if "nodes" in presentation and "order" in presentation:
        return tree_report(
            presentation["nodes"],
            [tuple(p) for p in presentation["order"]],
            K,
            presentation.get("branch"),
        )
    raise RamseyError("presentation needs either sequences or nodes+order")


# ---------------------------------------------------------------------------
# Rendering and JSON interchange


def render_assignment_tree(tree: AssignmentTree) -> str:
    """Indented text form; branch nodes are starred."""
    on_branch = set(tree.branch)
    children: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for node in tree.occupied:
        if node:
            children.setdefault(node[:-1], []).append(node)
    lines: list[str] = []

    def emit(node: tuple[int, ...], depth: int) -> None:
        name = "(" + ",".join(str(v) for v in node) + ")" if node else "()"
        star = "  *" if node in on_branch else ""
        lines.append(f"{'  ' * depth}{name} <- {tree.occupied[node]}{star}")
        for child in sorted(children.get(node, [])):
            emit(child, depth + 1)

    if () in tree.occupied:
        emit((), 0)
    else:  # possible when the root was never free, which cannot happen here
        for node in sorted(tree.occupied):
            emit(node, 0)
    return "\n".join(lines)


def family_to_json(fam: ColoringFamily) -> dict:
    return {"gammas": list(fam.gammas), "tables": [list(t) for t in fam.tables]}


def family_from_json(data: dict) -> ColoringFamily:
    return coloring_family(data["gammas"], data["tables"])


def levels_to_json(levels: LevelSequence) -> dict:
    return {
        "K": levels.K,
        "B": [list(level) for level in levels.B],
        "families": [family_to_json(f) for f in levels.families],
    }


def levels_from_json(data: dict | str) -> LevelSequence:
    if isinstance(data, str):
        data = json.loads(data)
    return LevelSequence(
        K=int(data["K"]),
        B=tuple(tuple(int(v) for v in level) for level in data["B"]),
        families=tuple(family_from_json(f) for f in data["families"]),
    )


def coloring_to_json(F: dict) -> dict:
    return {",".join(str(v) for v in key): value for key, value in sorted(F.items())}


def coloring_from_json(data: dict) -> dict:
    out = {}
    for key, value in data.items():
        parts = tuple(int(v) for v in key.split(",")) if key else ()
        out[parts] = int(value)
    return out
