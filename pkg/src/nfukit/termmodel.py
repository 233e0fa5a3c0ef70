"""Supported functions over integer-indexed coordinates.

A supported function reads finitely many integer coordinates of a point,
each coordinate ranging over 0..K-1, and returns an element of a target
structure.  Two functions count as equal when their agreement indicator is
certified constant "agree" by the partition machinery over a level
sequence; atomic relations lift the same way, and boolean combinations may
be evaluated either recursively or through one direct indicator.  Shifting
all coordinates by one is an automorphism whose fixed elements are exactly
the coordinate-free diagonals; every function also has a minimum interval
of coordinates that already determines it.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Any

from .amodels import AModelF
from .qmodel import BaseStructure, base_from_json, base_to_json
from .ramsey import LevelSequence, partition_find, spread_apart


class TermModelError(ValueError):
    pass


class UndecidedError(TermModelError):
    """The level sequence is too shallow to decide the question."""


@dataclass(frozen=True)
class SupportedFunction:
    support: tuple[int, ...]
    table: dict[tuple[int, ...], Any]
    target: Any  # a BaseStructure or a frozenset of plain values


@dataclass(frozen=True)
class FilterTriple:
    s: tuple[int, ...]
    m: int
    G: tuple[int, ...]


@dataclass(frozen=True)
class WindowPoint:
    lo: int
    hi: int
    values: tuple[int, ...]

    def at(self, n: int) -> int:
        if not self.lo <= n <= self.hi:
            raise TermModelError(f"window [{self.lo}, {self.hi}] does not cover {n}")
        return self.values[n - self.lo]


def supported_function(support, table, target, K: int | None = None) -> SupportedFunction:
    sup = tuple(int(s) for s in support)
    if list(sup) != sorted(set(sup)):
        raise TermModelError("support must be strictly increasing")
    tab = {tuple(int(v) for v in key): value for key, value in table.items()}
    for key in tab:
        if len(key) != len(sup):
            raise TermModelError(f"table key {key} does not match support arity")
    if K is not None:
        for key in itertools.product(range(K), repeat=len(sup)):
            if key not in tab:
                raise TermModelError(f"table is missing the tuple {key}")
    return SupportedFunction(support=sup, table=tab, target=target)


def window_point(lo: int, hi: int, values) -> WindowPoint:
    vals = tuple(int(v) for v in values)
    if hi - lo + 1 != len(vals):
        raise TermModelError("window size does not match the value list")
    return WindowPoint(lo=lo, hi=hi, values=vals)


def eval_supported(f: SupportedFunction, x: WindowPoint):
    """Apply f's table to the coordinates of x along f's support."""
    key = tuple(x.at(s) for s in f.support)
    if key not in f.table:
        raise TermModelError(f"table has no entry for {key}")
    return f.table[key]


def filter_contains(x: WindowPoint, t: FilterTriple, levels: LevelSequence) -> bool:
    """Membership in the filter set named by (s, m, G).

    The coordinates of x along s must be strictly increasing, lie in the
    m-th level, and be spread apart for G.
    """
    if t.m >= len(levels.B):
        raise TermModelError(f"level index {t.m} is out of range")
    values = tuple(x.at(p) for p in t.s)
    if any(b <= a for a, b in zip(values, values[1:])):
        return False
    member = set(levels.B[t.m])
    if any(v not in member for v in values):
        return False
    return spread_apart(values, t.G)


def diagonal(a, target) -> SupportedFunction:
    """The coordinate-free function with constant value a."""
    return SupportedFunction(support=(), table={(): a}, target=target)


def shift_K(f: SupportedFunction) -> SupportedFunction:
    """Move the support up by one; the table is untouched."""
    return SupportedFunction(
        support=tuple(s + 1 for s in f.support), table=dict(f.table), target=f.target
    )


automorphism_k = shift_K


# ---------------------------------------------------------------------------
# Certified equality and relations


def _value_at(f: SupportedFunction, merged: tuple[int, ...], point: tuple[int, ...]):
    positions = {s: i for i, s in enumerate(merged)}
    key = tuple(point[positions[s]] for s in f.support)
    return f.table[key]


def agreement_coloring(f1: SupportedFunction, f2: SupportedFunction, K: int):
    """Indicator of f1 = f2 on increasing tuples over the merged support.

    Returns (coloring, arity); value 1 means agree.  Arity 0 means both
    functions are coordinate-free.
    """
    merged = tuple(sorted(set(f1.support) | set(f2.support)))
    n = len(merged)
    coloring = {
        t: int(_value_at(f1, merged, t) == _value_at(f2, merged, t))
        for t in itertools.combinations(range(K), n)
    }
    return coloring, n


def equiv(f1: SupportedFunction, f2: SupportedFunction, levels: LevelSequence):
    """Certified equality: True, False, or None when undecided.

    The agreement indicator runs through partition_find over the level
    sequence; the verdict is the certified constant.  Coordinate-free
    pairs compare directly.
    """
    if f1.target != f2.target:
        raise TermModelError("functions have different targets")
    coloring, n = agreement_coloring(f1, f2, levels.K)
    if n == 0:
        return f1.table[()] == f2.table[()]
    cert = partition_find(coloring, n, 2, levels)
    if cert is None:
        return None
    return bool(cert.eta)


RELATION_ARITIES = {"=": 2, "in": 2}


def _relation_test(name: str, target) -> Any:
    if name == "=":
        return lambda a, b: a == b
    if name == "in":
        if not isinstance(target, BaseStructure):
            raise TermModelError("the membership relation needs a base structure target")
        edges = target.edges
        return lambda a, b: (a, b) in edges
    raise TermModelError(f"unknown relation {name!r}")


def relation_coloring(name: str, fs, K: int):
    if name not in RELATION_ARITIES:
        raise TermModelError(f"unknown relation {name!r}")
    if len(fs) != RELATION_ARITIES[name]:
        raise TermModelError(
            f"relation {name!r} takes {RELATION_ARITIES[name]} arguments, got {len(fs)}"
        )
    test = _relation_test(name, fs[0].target)
    merged = tuple(sorted(set().union(*(f.support for f in fs))))
    n = len(merged)
    coloring = {
        t: int(test(*(_value_at(f, merged, t) for f in fs)))
        for t in itertools.combinations(range(K), n)
    }
    return coloring, n


def relation_holds(name: str, fs, levels: LevelSequence):
    """Certified atomic relation between supported functions."""
    fs = list(fs)
    if any(f.target != fs[0].target for f in fs):
        raise TermModelError("functions have different targets")
    coloring, n = relation_coloring(name, fs, levels.K)
    if n == 0:
        return bool(coloring[()])
    cert = partition_find(coloring, n, 2, levels)
    if cert is None:
        return None
    return bool(cert.eta)


def required_colorings(exprs, fs, K: int):
    """Colorings a level sequence must cover so the given sentences and
    the pairwise equalities decide; feed the result to prepare_levels."""
    out = []
    for expr in exprs:
        for atom in _atoms(expr):
            coloring, n = relation_coloring(atom[1], [fs[i] for i in atom[2:]], K)
            if n >= 1:
                out.append((coloring, n, 2))
        coloring, n = sentence_coloring(expr, fs, K)
        if n >= 1:
            out.append((coloring, n, 2))
    return out


def _atoms(expr):
    if expr[0] == "rel":
        yield expr
    elif expr[0] == "not":
        yield from _atoms(expr[1])
    elif expr[0] in ("and", "or"):
        yield from _atoms(expr[1])
        yield from _atoms(expr[2])
    else:
        raise TermModelError(f"unknown connective {expr[0]!r}")


def _eval_expr(expr, values) -> bool:
    if expr[0] == "rel":
        return values[expr]
    if expr[0] == "not":
        return not _eval_expr(expr[1], values)
    if expr[0] == "and":
        return _eval_expr(expr[1], values) and _eval_expr(expr[2], values)
    if expr[0] == "or":
        return _eval_expr(expr[1], values) or _eval_expr(expr[2], values)
    raise TermModelError(f"unknown connective {expr[0]!r}")


def sentence_coloring(expr, fs, K: int):
    """Direct indicator of a boolean combination of atomic relations."""
    merged = tuple(sorted(set().union(*(f.support for f in fs))))
    n = len(merged)
    tests = {}
    for atom in set(_atoms(expr)):
        name = atom[1]
        args = [fs[i] for i in atom[2:]]
        test = _relation_test(name, args[0].target)
        tests[atom] = (test, args)
    coloring = {}
    for t in itertools.combinations(range(K), n):
        values = {
            atom: test(*(_value_at(f, merged, t) for f in args))
            for atom, (test, args) in tests.items()
        }
        coloring[t] = int(_eval_expr(expr, values))
    return coloring, n


def sentence_holds(expr, fs, levels: LevelSequence, via: str = "recursive"):
    """Three-valued truth of a boolean combination.

    ``expr`` is nested tuples: ("rel", name, arg_index, ...), ("not", e),
    ("and", e1, e2), ("or", e1, e2), with arg indices into ``fs``.  The
    recursive route combines certified atomic verdicts with three-valued
    connectives; the direct route runs one indicator for the whole
    sentence.  Both return True, False, or None.
    """
    fs = list(fs)
    if via == "direct":
        coloring, n = sentence_coloring(expr, fs, levels.K)
        if n == 0:
            return bool(coloring[()])
        cert = partition_find(coloring, n, 2, levels)
        return None if cert is None else bool(cert.eta)
    if via != "recursive":
        raise TermModelError(f"unknown evaluation mode {via!r}")
    if expr[0] == "rel":
        return relation_holds(expr[1], [fs[i] for i in expr[2:]], levels)
    if expr[0] == "not":
        inner = sentence_holds(expr[1], fs, levels)
        return None if inner is None else not inner
    if expr[0] in ("and", "or"):
        left = sentence_holds(expr[1], fs, levels)
        right = sentence_holds(expr[2], fs, levels)
        if expr[0] == "and":
            if left is False or right is False:
                return False
            if left is True and right is True:
                return True
            return None
        if left is True or right is True:
            return True
        if left is False and right is False:
            return False
        return None
    raise TermModelError(f"unknown connective {expr[0]!r}")


# ---------------------------------------------------------------------------
# Block supports


def freeze_outside_block(
    f: SupportedFunction, block: tuple[int, int] | None, anchor: int
) -> SupportedFunction:
    """Restrict f to the coordinates inside ``block`` by pinning the others
    to the anchor value; block None freezes everything."""
    if block is None:
        inside: tuple[int, ...] = ()
    else:
        a, b = block
        inside = tuple(s for s in f.support if a <= s <= b)
    frozen_positions = [i for i, s in enumerate(f.support) if s not in inside]
    reduced_index = [i for i, s in enumerate(f.support) if s in inside]
    new_table: dict[tuple[int, ...], Any] = {}
    for key, value in f.table.items():
        if all(key[i] == anchor for i in frozen_positions):
            new_table[tuple(key[i] for i in reduced_index)] = value
    return SupportedFunction(support=inside, table=new_table, target=f.target)


def _anchor(levels: LevelSequence) -> int:
    # Least element of the base level above 0: the m = 0, G = 0 reading of
    # the canonical anchor, fixed so prepared colorings match the
    # candidates tested later.
    for b in levels.B[0]:
        if b > 0:
            return b
    raise UndecidedError("no anchor above 0 in the base level")


def min_block_support(
    f: SupportedFunction, levels: LevelSequence, window: tuple[int, int]
):
    """Smallest interval of coordinates that already determines f.

    Every block [a, b] inside the window is tried by freezing the other
    support coordinates to the canonical anchor (the least element of the
    deepest level above 0) and asking equiv.  Returns None when f is
    certified equal to a diagonal, otherwise the least passing block by
    (width, left end).  Raises UndecidedError when nothing is certified
    either way.
    """
    lo, hi = window
    if any(not lo <= s <= hi for s in f.support):
        raise TermModelError("window does not cover the declared support")
    anchor = _anchor(levels)
    undecided = False

    verdict = equiv(f, freeze_outside_block(f, None, anchor), levels)
    if verdict is True:
        return None
    if verdict is None:
        undecided = True

    for width in range(1, hi - lo + 2):
        for a in range(lo, hi - width + 2):
            block = (a, a + width - 1)
            candidate = freeze_outside_block(f, block, anchor)
            verdict = equiv(f, candidate, levels)
            if verdict is True:
                return block
            if verdict is None:
                undecided = True
    if undecided:
        raise UndecidedError("all blocks undecided at this level depth")
    raise TermModelError("no block support found, yet the full support is one")


def block_support_colorings(f: SupportedFunction, levels: LevelSequence, window):
    """Agreement colorings needed by min_block_support, for prepare_levels."""
    lo, hi = window
    anchor = _anchor(levels)
    out = []
    blocks: list[tuple[int, int] | None] = [None]
    for width in range(1, hi - lo + 2):
        for a in range(lo, hi - width + 2):
            blocks.append((a, a + width - 1))
    for block in blocks:
        coloring, n = agreement_coloring(
            f, freeze_outside_block(f, block, anchor), levels.K
        )
        if n >= 1:
            out.append((coloring, n, 2))
    return out


def _freeze_outside_set(f: SupportedFunction, keep, anchor: int) -> SupportedFunction:
    keep = frozenset(keep)
    kept_index = [i for i, s in enumerate(f.support) if s in keep]
    frozen_positions = [i for i, s in enumerate(f.support) if s not in keep]
    table: dict[tuple[int, ...], Any] = {}
    for key, value in f.table.items():
        if all(key[i] == anchor for i in frozen_positions):
            table[tuple(key[i] for i in kept_index)] = value
    return SupportedFunction(
        support=tuple(s for s in f.support if s in keep), table=table, target=f.target
    )


def min_support_report(f: SupportedFunction, levels: LevelSequence, window) -> dict:
    """Experimental: does a single minimum support exist without the
    interval restriction?

    Freezes every subset of the declared support in turn and collects the
    subsets certified equal to f; the report says whether the passing
    family has a least element under inclusion.  Exhaustive over 2^|support|
    candidates; an exploration aid, not an API guarantee.
    """
    lo, hi = window
    if any(not lo <= s <= hi for s in f.support):
        raise TermModelError("window does not cover the declared support")
    anchor = _anchor(levels)
    passing = []
    undecided = []
    coords = list(f.support)
    for r in range(len(coords) + 1):
        for keep in itertools.combinations(coords, r):
            verdict = equiv(f, _freeze_outside_set(f, keep, anchor), levels)
            if verdict is True:
                passing.append(frozenset(keep))
            elif verdict is None:
                undecided.append(frozenset(keep))
    minimal = [
        s for s in passing if not any(other < s for other in passing)
    ]
    minimum = minimal[0] if len(minimal) == 1 else None
    return {
        "passing": sorted(sorted(s) for s in passing),
        "minimal": sorted(sorted(s) for s in minimal),
        "minimum": sorted(minimum) if minimum is not None else None,
        "minimum_exists": minimum is not None
        and all(minimum <= s for s in passing),
        "undecided": sorted(sorted(s) for s in undecided),
    }


def min_support_colorings(f: SupportedFunction, levels: LevelSequence, window):
    """Agreement colorings needed by min_support_report, for prepare_levels."""
    anchor = _anchor(levels)
    out = []
    coords = list(f.support)
    for r in range(len(coords) + 1):
        for keep in itertools.combinations(coords, r):
            coloring, n = agreement_coloring(
                f, _freeze_outside_set(f, keep, anchor), levels.K
            )
            if n >= 1:
                out.append((coloring, n, 2))
    return out


# ---------------------------------------------------------------------------
# The twisted map and the coding witnesses


def compose_jprime(f: SupportedFunction, j: dict) -> SupportedFunction:
    """Shift the support by one and push table values through j."""
    table = {}
    for key, value in f.table.items():
        if value not in j:
            raise TermModelError(f"j is undefined on the value {value!r}")
        table[key] = j[value]
    return SupportedFunction(
        support=tuple(s + 1 for s in f.support), table=table, target=f.target
    )


def witness_H(amodel: AModelF, K: int) -> SupportedFunction:
    """Coordinate-0 function sending theta to the image of the theta-th
    standard element."""
    sp = amodel.standard_part.nodes
    if len(sp) < K:
        raise TermModelError(
            f"standard part has {len(sp)} elements, scale {K} needs at least K"
        )
    table = {(theta,): amodel.i[sp[theta]] for theta in range(K)}
    return SupportedFunction(support=(0,), table=table, target=amodel.structure)


def code_subset(S, amodel: AModelF, K: int) -> SupportedFunction:
    """Coordinate-0 function sending theta to the node coding S cut at the
    theta-th standard element (inclusive, so the cuts exhaust S).

    A node codes a subset of the standard part when its extension meets the
    j-fixed elements exactly in the image of that subset.  Raises when some
    cut has no coding node.
    """
    sp = amodel.standard_part.nodes
    if len(sp) < K:
        raise TermModelError(
            f"standard part has {len(sp)} elements, scale {K} needs at least K"
        )
    subset = set(S)
    unknown = subset - set(sp)
    if unknown:
        raise TermModelError(f"subset elements outside the standard part: {sorted(unknown)}")
    st = amodel.structure
    fixed = frozenset(x for x in st.nodes if st.j[x] == x)
    table = {}
    for theta in range(K):
        cut = frozenset(amodel.i[s] for s in sp[: theta + 1] if s in subset)
        found = None
        for w in sorted(st.nodes):
            if st.extension(w) & fixed == cut:
                found = w
                break
        if found is None:
            raise TermModelError(f"no node codes the cut below position {theta}")
        table[(theta,)] = found
    return SupportedFunction(support=(0,), table=table, target=st)


# ---------------------------------------------------------------------------
# JSON interchange


def function_to_json(f: SupportedFunction) -> dict:
    if isinstance(f.target, BaseStructure):
        target = {"kind": "base", "base": base_to_json(f.target)}
    else:
        target = {"kind": "values", "values": sorted(f.target)}
    return {
        "support": list(f.support),
        "table": {
            ",".join(str(v) for v in key): value for key, value in sorted(f.table.items())
        },
        "target": target,
    }


def function_from_json(data: dict | str) -> SupportedFunction:
    if isinstance(data, str):
        data = json.loads(data)
    raw = data["target"]
    if raw["kind"] == "base":
        target: Any = base_from_json(raw["base"])
    elif raw["kind"] == "values":
        target = frozenset(raw["values"])
    else:
        raise TermModelError(f"unknown target kind {raw['kind']!r}")
    table = {}
    for key, value in data["table"].items():
        parts = tuple(int(v) for v in key.split(",")) if key else ()
        table[parts] = value
    return supported_function(data["support"], table, target)


def verdict_string(value) -> str:
    if value is True:
        return "true"
    if value is False:
        return "false"
    return "undecided"
