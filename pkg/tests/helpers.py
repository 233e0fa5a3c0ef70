"""Shared independent oracles and builders for the test suite.

Everything here recomputes expected values by a route different from the
library's: brute-force assignment search for the level checker, frozenset
arithmetic for collapses, exhaustive bijection search for isomorphism.
"""

from __future__ import annotations

import itertools

from nfukit import formulas, qmodel
from nfukit.formulas import (
    And,
    Eq,
    Exists,
    Forall,
    Iff,
    Implies,
    In,
    Not,
    Or,
    PPred,
    SPred,
)

# ---------------------------------------------------------------------------
# Stratification oracle


def brute_force_stratify(phi, max_value: int | None = None) -> dict | None:
    """Search all level assignments with values 0..max_value.

    Independent of the union-find solver: collects the same constraint
    triples but decides them by exhaustive search.  Unit offsets mean a
    solution exists iff one exists with values inside 0..#variables.
    """
    renamed = formulas.alpha_rename(phi)
    variables = sorted(formulas.all_variables(renamed))
    constraints = formulas.level_constraints(renamed)
    if max_value is None:
        max_value = len(variables)
    for values in itertools.product(range(max_value + 1), repeat=len(variables)):
        assignment = dict(zip(variables, values))
        if all(assignment[w] == assignment[v] + k for v, w, k in constraints):
            return assignment
    return None


def satisfies(assignment: dict, phi) -> bool:
    renamed = formulas.alpha_rename(phi)
    return all(
        assignment[w] == assignment[v] + k
        for v, w, k in formulas.level_constraints(renamed)
    )


# ---------------------------------------------------------------------------
# Formula corpus for the acceptance sweep


def atom_pool(variables):
    atoms = []
    for v in variables:
        for w in variables:
            atoms.append(Eq(v, w))
            atoms.append(In(v, w))
    return atoms


def conjoin(atoms):
    phi = atoms[0]
    for atom in atoms[1:]:
        phi = And(phi, atom)
    return phi


def formula_corpus(variables=("x", "y", "z", "w")):
    """Deterministic corpus: every 1- and 2-atom combination over =, in, S
    and P atoms, every 3-subset of the =/in pool, and structured variants
    with connectives and quantifiers."""
    basic = atom_pool(variables)
    extra = [SPred(v) for v in variables]
    extra += [
        PPred(u, v, w)
        for u in variables
        for v in variables
        for w in variables
        if len({u, v, w}) >= 2
    ]
    pool = basic + extra

    corpus = list(pool)
    for a, b in itertools.combinations(pool, 2):
        corpus.append(And(a, b))
    for combo in itertools.combinations(basic, 3):
        corpus.append(conjoin(list(combo)))
    # Connective and binder shells around small seeds; the level constraints
    # see through the boolean structure, and binders exercise the renamer.
    seeds = [
        And(In("x", "y"), In("y", "z")),
        And(In("x", "y"), Eq("x", "z")),
        In("x", "x"),
        And(In("x", "y"), In("y", "x")),
        PPred("x", "y", "z"),
    ]
    for s in seeds:
        corpus.append(Not(s))
        corpus.append(Or(s, SPred("x")))
        corpus.append(Implies(s, Eq("x", "x")))
        corpus.append(Iff(s, In("x", "y")))
        corpus.append(Forall("x", s))
        corpus.append(Exists("y", Forall("x", s)))
        corpus.append(Forall("x", Exists("x", s)))  # shadowing
    return corpus


# ---------------------------------------------------------------------------
# Hereditarily finite sets as frozensets (collapse oracle)


def hf_string(fs) -> str:
    """Canonical brace string of a frozenset-of-frozensets value."""
    children = sorted((hf_string(child) for child in fs), key=lambda s: (len(s), s))
    return "{" + ",".join(children) + "}"


def vn_set(n: int):
    """The finite ordinal n as a frozenset, built by successor steps."""
    current = frozenset()
    stages = [current]
    for _ in range(n):
        current = frozenset(stages)
        stages = stages + [current]
    return stages[n]


def collapse_oracle(g) -> str:
    """Collapse by direct frozenset recursion, no string canonicalization
    shared with the library's path."""
    pred: dict[str, set[str]] = {v: set() for v in g.nodes}
    for x, y in g.edges:
        pred[y].add(x)
    memo: dict[str, object] = {}

    def value(x: str):
        if x not in memo:
            memo[x] = frozenset(value(z) for z in pred[x])
        return memo[x]

    return hf_string(value(g.top))


def iso_oracle(g1, g2) -> bool:
    """Pointed isomorphism by exhaustive bijection search."""
    n1, n2 = sorted(g1.nodes), sorted(g2.nodes)
    if len(n1) != len(n2):
        return False
    for perm in itertools.permutations(n2):
        mapping = dict(zip(n1, perm))
        if mapping[g1.top] != g2.top:
            continue
        if all(
            ((mapping[x], mapping[y]) in g2.edges) == ((x, y) in g1.edges)
            for x in n1
            for y in n1
        ):
            return True
    return False


def membership_oracle(s1: str, s2: str) -> bool:
    """Is the set named by s1 a member of the set named by s2?"""
    from nfukit.setcode import hf_members

    return s1 in hf_members(s2)


# ---------------------------------------------------------------------------
# Base structures


def v3_base() -> qmodel.BaseStructure:
    """Membership digraph of the fourth cumulative stage: empty set, its
    singleton, the singleton of that, and the two-element stage."""
    nodes = ["e", "se", "sse", "v2"]
    edges = [("e", "se"), ("e", "v2"), ("se", "sse"), ("se", "v2")]
    levels = [nodes, ["e", "se"], ["e"]]
    return qmodel.base_structure(nodes, edges, levels, {x: x for x in nodes})
