"""Five-predicate first-order language: parsing, stratification, comprehension.

The language has atoms ``v = w``, ``v in w``, ``S(v)`` and ``P(u,v,w)``,
the connectives ``not``, ``and``, ``or``, ``->``, ``<->`` (tightest first)
and quantifiers ``forall v.`` / ``exists v.`` whose body extends as far
right as possible.  A formula is *stratified* when the variables admit an
integer level assignment with equal levels across ``=`` and ``P`` atoms and
a +1 step across ``in`` atoms.  The solver is a union-find over integer
offsets and produces a cycle certificate when no assignment exists.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union


class ParseError(ValueError):
    """Syntax error, carrying the character offset where parsing failed."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class NotStratifiedError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Abstract syntax


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class In:
    left: str
    right: str


@dataclass(frozen=True)
class SPred:
    var: str


@dataclass(frozen=True)
class PPred:
    first: str
    second: str
    third: str


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Eq, In, SPred, PPred, Not, And, Or, Implies, Iff, Forall, Exists]

ATOMS = (Eq, In, SPred, PPred)
BINARY = {And: "and", Or: "or", Implies: "->", Iff: "<->"}
QUANTIFIERS = {Forall: "forall", Exists: "exists"}


# ---------------------------------------------------------------------------
# Tokenizer and parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow2><->)
  | (?P<arrow>->)
  | (?P<eq>=)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<comma>,)
  | (?P<dot>\.)
  | (?P<spred>S)
  | (?P<ppred>P)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"not", "and", "or", "forall", "exists", "in"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            if kind == "ident" and value in _KEYWORDS:
                kind = value
            tokens.append((kind, value, pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]]):
        self.tokens = tokens
        self.index = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def variable(self) -> str:
        tok = self.next()
        if tok[0] != "ident":
            raise ParseError(f"expected a variable, found {tok[1]!r}", tok[2])
        return tok[1]

    # Precedence, loosest to tightest: <->, ->, or, and, not.
    # Quantifier bodies extend maximally to the right.

    def formula(self) -> Formula:
        left = self.implication()
        if self.peek()[0] == "arrow2":
            self.next()
            return Iff(left, self.formula())
        return left

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek()[0] == "arrow":
            self.next()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek()[0] == "or":
            self.next()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek()[0] == "and":
            self.next()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, _, _ = self.peek()
        if kind == "not":
            self.next()
            return Not(self.unary())
        if kind in ("forall", "exists"):
            self.next()
            var = self.variable()
            self.expect("dot")
            body = self.formula()
            return Forall(var, body) if kind == "forall" else Exists(var, body)
        return self.atom()

    def atom(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "lpar":
            self.next()
            inner = self.formula()
            self.expect("rpar")
            return inner
        if kind == "spred":
            self.next()
            self.expect("lpar")
            var = self.variable()
            self.expect("rpar")
            return SPred(var)
        if kind == "ppred":
            self.next()
            self.expect("lpar")
            first = self.variable()
            self.expect("comma")
            second = self.variable()
            self.expect("comma")
            third = self.variable()
            self.expect("rpar")
            return PPred(first, second, third)
        if kind == "ident":
            self.next()
            op = self.next()
            if op[0] == "eq":
                return Eq(value, self.variable())
            if op[0] == "in":
                return In(value, self.variable())
            raise ParseError(f"expected '=' or 'in' after {value!r}", op[2])
        raise ParseError(f"expected a formula, found {value!r}", pos)


def parse_formula(text: str) -> Formula:
    """Parse ``text`` into a formula tree.

    Raises ParseError (with position) on malformed input.  Free variables
    are legal; no binding check is performed here.
    """
    parser = _Parser(_tokenize(text))
    phi = parser.formula()
    end = parser.next()
    if end[0] != "end":
        raise ParseError(f"trailing input {end[1]!r}", end[2])
    return phi


_PRECEDENCE = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5}


def to_text(phi: Formula) -> str:
    """Render a formula so that ``parse_formula(to_text(phi)) == phi``."""
    return _render(phi, 0)


def _render(phi: Formula, context: int) -> str:
    if isinstance(phi, Eq):
        return f"{phi.left} = {phi.right}"
    if isinstance(phi, In):
        return f"{phi.left} in {phi.right}"
    if isinstance(phi, SPred):
        return f"S({phi.var})"
    if isinstance(phi, PPred):
        return f"P({phi.first},{phi.second},{phi.third})"
    if isinstance(phi, Not):
        return _wrap(f"not {_render(phi.body, _PRECEDENCE[Not])}", _PRECEDENCE[Not], context)
    if isinstance(phi, (Forall, Exists)):
        word = QUANTIFIERS[type(phi)]
        # Quantifier scope runs to the end, so any enclosing connective
        # needs parentheses around it.
        return _wrap(f"{word} {phi.var}. {_render(phi.body, 0)}", 0, context)
    prec = _PRECEDENCE[type(phi)]
    word = BINARY[type(phi)]
    if isinstance(phi, (And, Or)):  # left associative
        left = _render(phi.left, prec)
        right = _render(phi.right, prec + 1)
    else:  # -> and <-> associate to the right
        left = _render(phi.left, prec + 1)
        right = _render(phi.right, prec)
    return _wrap(f"{left} {word} {right}", prec, context)


def _wrap(text: str, prec: int, context: int) -> str:
    return f"({text})" if prec < context else text


# ---------------------------------------------------------------------------
# Structural helpers


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    if isinstance(phi, Not):
        yield from subformulas(phi.body)
    elif isinstance(phi, (And, Or, Implies, Iff)):
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)
    elif isinstance(phi, (Forall, Exists)):
        yield from subformulas(phi.body)


def atom_variables(atom: Formula) -> tuple[str, ...]:
    if isinstance(atom, (Eq, In)):
        return (atom.left, atom.right)
    if isinstance(atom, SPred):
        return (atom.var,)
    if isinstance(atom, PPred):
        return (atom.first, atom.second, atom.third)
    raise TypeError(f"not an atom: {atom!r}")


def free_variables(phi: Formula) -> set[str]:
    if isinstance(phi, ATOMS):
        return set(atom_variables(phi))
    if isinstance(phi, Not):
        return free_variables(phi.body)
    if isinstance(phi, (And, Or, Implies, Iff)):
        return free_variables(phi.left) | free_variables(phi.right)
    if isinstance(phi, (Forall, Exists)):
        return free_variables(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def all_variables(phi: Formula) -> set[str]:
    names: set[str] = set()
    for sub in subformulas(phi):
        if isinstance(sub, ATOMS):
            names.update(atom_variables(sub))
        elif isinstance(sub, (Forall, Exists)):
            names.add(sub.var)
    return names


def alpha_rename(phi: Formula) -> Formula:
    """Rename binders apart from each other and from the free variables.

    Binder names are kept where no clash occurs; clashing binders get
    ``name#1``, ``name#2``, ... suffixes.  Free occurrences keep their
    original names, so one free name denotes one variable throughout.
    """
    taken = set(free_variables(phi))

    def fresh(base: str) -> str:
        if base not in taken:
            return base
        k = 1
        while f"{base}#{k}" in taken:
            k += 1
        return f"{base}#{k}"

    def walk(node: Formula, env: dict[str, str]) -> Formula:
        if isinstance(node, Eq):
            return Eq(env.get(node.left, node.left), env.get(node.right, node.right))
        if isinstance(node, In):
            return In(env.get(node.left, node.left), env.get(node.right, node.right))
        if isinstance(node, SPred):
            return SPred(env.get(node.var, node.var))
        if isinstance(node, PPred):
            return PPred(
                env.get(node.first, node.first),
                env.get(node.second, node.second),
                env.get(node.third, node.third),
            )
        if isinstance(node, Not):
            return Not(walk(node.body, env))
        if isinstance(node, (And, Or, Implies, Iff)):
            return type(node)(walk(node.left, env), walk(node.right, env))
        if isinstance(node, (Forall, Exists)):
            new = fresh(node.var)
            taken.add(new)
            inner = dict(env)
            inner[node.var] = new
            return type(node)(new, walk(node.body, inner))
        raise TypeError(f"not a formula: {node!r}")

    return walk(phi, {})


# ---------------------------------------------------------------------------
# Stratification


@dataclass(frozen=True)
class Stratification:
    """Variable level assignment; minimum value in each component is 0."""

    assignment: dict[str, int]


@dataclass(frozen=True)
class StratFailure:
    """Certificate of unstratifiability.

    ``cycle`` is a closed walk of level constraints: each entry (v, w, k)
    asserts level(w) = level(v) + k, consecutive entries chain w to the
    next v, the last w equals the first v, and the offsets sum to a
    nonzero value, which no assignment can satisfy.
    """

    cycle: list[tuple[str, str, int]]


def level_constraints(phi: Formula) -> list[tuple[str, str, int]]:
    """Difference constraints (v, w, k) meaning level(w) = level(v) + k.

    Equality atoms force equal levels, P atoms force all three arguments
    equal, membership atoms force a +1 step, and S atoms impose nothing.
    """
    out: list[tuple[str, str, int]] = []
    for sub in subformulas(phi):
        if isinstance(sub, Eq):
            out.append((sub.left, sub.right, 0))
        elif isinstance(sub, In):
            out.append((sub.left, sub.right, 1))
        elif isinstance(sub, PPred):
            out.append((sub.first, sub.second, 0))
            out.append((sub.second, sub.third, 0))
    return out


class _OffsetUnionFind:
    """Union-find storing, for each variable, its level offset to the root."""

    def __init__(self) -> None:
        self.parent: dict[str, str] = {}
        self.offset: dict[str, int] = {}

    def add(self, v: str) -> None:
        if v not in self.parent:
            self.parent[v] = v
            self.offset[v] = 0

    def find(self, v: str) -> tuple[str, int]:
        if self.parent[v] == v:
            return v, 0
        root, above = self.find(self.parent[v])
        self.parent[v] = root
        self.offset[v] += above
        return root, self.offset[v]

    def union(self, v: str, w: str, k: int) -> bool:
        """Merge classes so that level(w) = level(v) + k.

        Returns False when v and w are already related with a different
        offset; the caller extracts the certificate.
        """
        rv, ov = self.find(v)
        rw, ow = self.find(w)
        if rv == rw:
            return ow - ov == k
        # level(rw) = level(v) + k - ow = level(rv) + ov + k - ow
        self.parent[rw] = rv
        self.offset[rw] = ov + k - ow
        return True


def stratify(phi: Formula) -> Stratification | StratFailure:
    """Decide stratifiability of ``phi``.

    The formula is alpha-renamed first, so shadowed binders do not share a
    level variable.  On success the assignment covers every variable of the
    renamed formula, normalized to minimum 0 in each constraint component.
    On failure the result carries a nonzero-sum constraint cycle.
    """
    renamed = alpha_rename(phi)
    uf = _OffsetUnionFind()
    variables = sorted(all_variables(renamed))
    for v in variables:
        uf.add(v)

    accepted: dict[str, list[tuple[str, int, tuple[str, str, int]]]] = {v: [] for v in variables}
    for v, w, k in level_constraints(renamed):
        if uf.union(v, w, k):
            accepted[v].append((w, k, (v, w, k)))
            accepted[w].append((v, -k, (w, v, -k)))
        else:
            return StratFailure(cycle=[(v, w, k)] + _constraint_path(accepted, w, v))

    # One concrete level per class, shifted so each component bottoms at 0.
    roots: dict[str, list[tuple[str, int]]] = {}
    for v in variables:
        root, off = uf.find(v)
        roots.setdefault(root, []).append((v, off))
    assignment: dict[str, int] = {}
    for members in roots.values():
        low = min(off for _, off in members)
        for v, off in members:
            assignment[v] = off - low
    return Stratification(assignment=assignment)


def _constraint_path(
    accepted: dict[str, list[tuple[str, int, tuple[str, str, int]]]],
    start: str,
    goal: str,
) -> list[tuple[str, str, int]]:
    """Walk accepted constraints from start to goal, reorienting as needed."""
    if start == goal:
        return []
    seen = {start}
    queue: list[tuple[str, list[tuple[str, str, int]]]] = [(start, [])]
    while queue:
        node, path = queue.pop(0)
        for nxt, _, edge in accepted[node]:
            if nxt in seen:
                continue
            step = path + [edge]
            if nxt == goal:
                return step
            seen.add(nxt)
            queue.append((nxt, step))
    raise AssertionError("conflicting constraint without connecting path")


def check_failure_cycle(phi: Formula, failure: StratFailure) -> bool:
    """Re-check a certificate: closed walk, generated constraints, sum != 0."""
    cycle = failure.cycle
    if not cycle:
        return False
    generated = set()
    for v, w, k in level_constraints(alpha_rename(phi)):
        generated.add((v, w, k))
        generated.add((w, v, -k))
    for edge in cycle:
        if edge not in generated:
            return False
    for (_, w, _), (v2, _, _) in zip(cycle, cycle[1:]):
        if w != v2:
            return False
    if cycle[-1][1] != cycle[0][0]:
        return False
    return sum(k for _, _, k in cycle) != 0


# ---------------------------------------------------------------------------
# Comprehension instances

MEMBER_VARIABLE = "v0"


def comprehension_axiom(phi: Formula, params: list[str]) -> Formula:
    """Build the set-existence instance for ``phi``.

    ``params`` lists the parameter variables v1..vn in order; the member
    variable is fixed as ``v0`` and the witness variable is ``v{n+1}``.
    The result is forall v1..vn exists v{n+1} forall v0
    (v0 in v{n+1} <-> phi).
    """
    witness = f"v{len(params) + 1}"
    if MEMBER_VARIABLE in params:
        raise ValueError(f"{MEMBER_VARIABLE} is the member variable, not a parameter")
    if witness in params:
        raise ValueError(f"parameter list clashes with witness variable {witness}")
    if len(set(params)) != len(params):
        raise ValueError("duplicate parameter")
    if witness in all_variables(phi):
        raise ValueError(f"formula already uses the witness variable {witness}")
    extra = free_variables(phi) - {MEMBER_VARIABLE} - set(params)
    if extra:
        raise ValueError(f"free variables outside v0 and parameters: {sorted(extra)}")
    if isinstance(stratify(phi), StratFailure):
        raise NotStratifiedError(f"not stratified: {to_text(phi)}")

    body: Formula = Forall(MEMBER_VARIABLE, Iff(In(MEMBER_VARIABLE, witness), phi))
    body = Exists(witness, body)
    for p in reversed(params):
        body = Forall(p, body)
    return body
