import itertools

import pytest

from nfukit.amodels import AModelF, StandardPart, trivial_amodel
from nfukit.qmodel import base_structure
from nfukit.ramsey import (
    LevelSequence,
    increasing_tuples,
    partition_find,
    prepare_levels,
)
from nfukit.termmodel import (
    FilterTriple,
    SupportedFunction,
    TermModelError,
    UndecidedError,
    agreement_coloring,
    automorphism_k,
    block_support_colorings,
    code_subset,
    compose_jprime,
    diagonal,
    equiv,
    eval_supported,
    filter_contains,
    freeze_outside_block,
    function_from_json,
    function_to_json,
    min_block_support,
    min_support_colorings,
    min_support_report,
    relation_coloring,
    relation_holds,
    required_colorings,
    sentence_coloring,
    sentence_holds,
    shift_K,
    supported_function,
    verdict_string,
    window_point,
    witness_H,
)

K = 8
VALUES = frozenset(range(K))


def base_level(k=K):
    return LevelSequence(K=k, B=(tuple(range(k)),), families=())


def identity_function():
    return supported_function([0], {(t,): t for t in range(K)}, VALUES, K=K)


def prepared_for_blocks(func, window):
    return prepare_levels(block_support_colorings(func, base_level(), window), K)


def coded_amodel(k=4):
    """Stage whose structure codes every subset of the standard part.

    Each subset T gets a two-node orbit swapped by j, both with extension
    {image of T}, so the fixed points stay exactly the standard part.
    """
    sp_nodes = tuple(f"s{i}" for i in range(k))
    sp = StandardPart(nodes=sp_nodes, edges=frozenset())
    nodes = list(sp_nodes)
    edges = []
    j = {s: s for s in sp_nodes}
    rank = {s: i for i, s in enumerate(sp_nodes)}
    for bits in itertools.product((0, 1), repeat=k):
        name = "w" + "".join(map(str, bits))
        twin = name + "x"
        nodes += [name, twin]
        j[name], j[twin] = twin, name
        rank[name] = rank[twin] = k + sum(bits)
        for i, bit in enumerate(bits):
            if bit:
                edges.append((sp_nodes[i], name))
                edges.append((sp_nodes[i], twin))
    structure = base_structure(nodes, edges, [nodes, nodes, nodes], j)
    return AModelF(
        structure=structure,
        standard_part=sp,
        i={s: s for s in sp_nodes},
        rank=rank,
    )


# ---------------------------------------------------------------------------
# Evaluation


def test_eval_diagonal_anywhere():
    d = diagonal("a", frozenset(["a"]))
    assert eval_supported(d, window_point(-2, 1, [0, 1, 2, 3])) == "a"


def test_eval_single_coordinate():
    f = identity_function()
    assert eval_supported(f, window_point(0, 0, [3])) == 3


def test_eval_two_coordinates_is_table_lookup():
    table = {(u, v): f"{u}|{v}" for u in range(K) for v in range(K)}
    f = supported_function([-1, 2], table, VALUES)
    assert eval_supported(f, window_point(-1, 2, [1, 9, 9, 4])) == "1|4"


def test_eval_window_too_small():
    f = identity_function()
    with pytest.raises(TermModelError):
        eval_supported(f, window_point(1, 2, [0, 0]))


def test_supported_function_validation():
    with pytest.raises(TermModelError):
        supported_function([1, 0], {}, VALUES)
    with pytest.raises(TermModelError):
        supported_function([0], {(1, 2): "a"}, VALUES)
    with pytest.raises(TermModelError):
        supported_function([0], {(0,): "a"}, VALUES, K=2)  # missing (1,)


# ---------------------------------------------------------------------------
# Filter sets


def test_filter_membership_examples():
    levels = base_level()
    t = FilterTriple(s=(0, 1), m=0, G=(0,) * K)
    assert filter_contains(window_point(0, 1, [1, 2]), t, levels)
    assert not filter_contains(window_point(0, 1, [2, 2]), t, levels)


def test_filter_checks_level_membership():
    levels = LevelSequence(K=K, B=(tuple(range(K)), (0, 2, 4)), families=())
    t = FilterTriple(s=(0, 1), m=1, G=(0,) * K)
    assert filter_contains(window_point(0, 1, [2, 4]), t, levels)
    assert not filter_contains(window_point(0, 1, [2, 3]), t, levels)
    with pytest.raises(TermModelError):
        filter_contains(window_point(0, 1, [2, 3]), FilterTriple((0,), 5, (0,) * K), levels)


def test_filter_empty_support_is_everything():
    t = FilterTriple(s=(), m=0, G=(0,) * K)
    assert filter_contains(window_point(0, 0, [0]), t, base_level())


def test_filter_base_closure_sample():
    levels = LevelSequence(K=K, B=(tuple(range(K)), (1, 3, 5, 7)), families=())
    t1 = FilterTriple(s=(0, 1), m=0, G=(0,) * K)
    t2 = FilterTriple(s=(1, 2), m=1, G=(1,) * K)
    merged = FilterTriple(
        s=(0, 1, 2),
        m=1,
        G=tuple(max(a, b) for a, b in zip(t1.G, t2.G)),
    )
    for values in itertools.product(range(K), repeat=3):
        x = window_point(0, 2, values)
        if filter_contains(x, merged, levels):
            assert filter_contains(x, t1, levels)
            assert filter_contains(x, t2, levels)


# ---------------------------------------------------------------------------
# Certified equality


def test_equiv_reflexive():
    f = identity_function()
    assert equiv(f, f, base_level()) is True


def test_equiv_distinct_diagonals():
    assert equiv(diagonal(1, VALUES), diagonal(2, VALUES), base_level()) is False
    assert equiv(diagonal(1, VALUES), diagonal(1, VALUES), base_level()) is True


def test_equiv_constant_table_vs_diagonal():
    f = supported_function([0], {(t,): 5 for t in range(K)}, VALUES, K=K)
    assert equiv(f, diagonal(5, VALUES), base_level()) is True


def test_equiv_undecided_without_families():
    f = identity_function()
    assert equiv(f, diagonal(1, VALUES), base_level()) is None


def test_equiv_decided_with_prepared_levels():
    f = identity_function()
    coloring, n = agreement_coloring(f, diagonal(1, VALUES), K)
    levels = prepare_levels([(coloring, n, 2)], K)
    assert equiv(f, diagonal(1, VALUES), levels) is False


def test_equiv_rejects_target_mismatch():
    with pytest.raises(TermModelError):
        equiv(diagonal(1, VALUES), diagonal(1, frozenset({1})), base_level())


def test_equiv_respects_certified_tail_agreement():
    # Functions that disagree only at 0 are certified equal: the machinery
    # works on tails, and the indicator is eventually constant "agree".
    f = supported_function([0], {(t,): min(t, 1) for t in range(K)}, VALUES, K=K)
    g = supported_function([0], {(t,): 1 for t in range(K)}, VALUES, K=K)
    coloring, n = agreement_coloring(f, g, K)
    levels = prepare_levels([(coloring, n, 2)], K)
    assert equiv(f, g, levels) is True


# ---------------------------------------------------------------------------
# Relations


def test_equality_relation_duplicated_argument():
    f = identity_function()
    assert relation_holds("=", [f, f], base_level()) is True


def test_edge_relation_on_diagonals():
    nodes = ["a", "b"]
    base = base_structure(
        nodes, [("a", "b")], [nodes, nodes, nodes], {x: x for x in nodes}
    )
    da, db = diagonal("a", base), diagonal("b", base)
    assert relation_holds("in", [da, db], base_level()) is True
    assert relation_holds("in", [db, da], base_level()) is False


def test_relation_validation():
    f = identity_function()
    with pytest.raises(TermModelError):
        relation_holds("in", [f, f], base_level())  # no base target
    with pytest.raises(TermModelError):
        relation_holds("=", [f], base_level())
    with pytest.raises(TermModelError):
        relation_holds("parent", [f, f], base_level())


def test_relation_verdict_matches_filter_sampling():
    """Certified verdicts agree with direct evaluation on every point of a
    filter set inside the certificate's level."""
    am = coded_amodel(4)
    h = code_subset(["s0", "s2"], am, 4)
    d = diagonal("s2", am.structure)
    coloring, n = relation_coloring("in", [d, h], 4)
    levels = prepare_levels([(coloring, n, 2)], 4)
    verdict = relation_holds("in", [d, h], levels)
    assert verdict is True
    edges = am.structure.edges
    deepest = len(levels.B) - 1
    member = levels.B[deepest]
    for theta in member:
        x = window_point(0, 0, [theta])
        if filter_contains(x, FilterTriple((0,), deepest, (2,) * 4), levels):
            assert (eval_supported(d, x), eval_supported(h, x)) in edges


def test_witness_membership_in_bounded_diagonal_matches_sampling():
    """H's membership in a coding node's diagonal: the certified verdict
    matches pointwise evaluation over every point of a filter set."""
    am = coded_amodel(4)
    k = 4
    h = witness_H(am, k)
    # w1100 codes {s0, s1}: membership of H should be certified false on
    # the tail; wFull codes everything: certified true.
    low = next(w for w in am.structure.nodes if w.startswith("w") and
               am.structure.extension(w) == frozenset({"s0", "s1"}))
    full = next(w for w in am.structure.nodes if w.startswith("w") and
                am.structure.extension(w) == frozenset(am.standard_part.nodes))
    for target_node, expected in ((low, False), (full, True)):
        d = diagonal(target_node, am.structure)
        coloring, n = relation_coloring("in", [h, d], k)
        levels = prepare_levels([(coloring, n, 2)], k)
        verdict = relation_holds("in", [h, d], levels)
        assert verdict is expected
        cert = partition_find(coloring, n, 2, levels)
        triple = FilterTriple((0,), cert.m, cert.G)
        sampled = 0
        for theta in range(k):
            x = window_point(0, 0, [theta])
            if filter_contains(x, triple, levels):
                sampled += 1
                holds = (eval_supported(h, x), eval_supported(d, x)) in am.structure.edges
                assert holds == expected
        assert sampled >= 1


# ---------------------------------------------------------------------------
# Diagonals and the shift


def test_diagonal_fixed_by_shift():
    d = diagonal("a", frozenset(["a"]))
    assert shift_K(d) == d
    assert automorphism_k(d) == d


def test_shift_moves_support_by_one():
    f = identity_function()
    assert shift_K(f).support == (1,)
    g = supported_function(
        [-2, 0, 5],
        {key: 0 for key in itertools.product(range(K), repeat=3)},
        VALUES,
    )
    assert shift_K(g).support == (-1, 1, 6)
    assert shift_K(g).table == g.table


def test_double_shift():
    f = identity_function()
    assert shift_K(shift_K(f)).support == (2,)
    assert shift_K(shift_K(f)) == SupportedFunction((2,), f.table, f.target)


def test_shift_invariance_of_relations():
    f = identity_function()
    g = supported_function([0], {(t,): t % 2 for t in range(K)}, VALUES, K=K)
    coloring, n = relation_coloring("=", [f, g], K)
    levels = prepare_levels([(coloring, n, 2)], K)
    plain = relation_holds("=", [f, g], levels)
    shifted = relation_holds("=", [shift_K(f), shift_K(g)], levels)
    assert plain is not None
    assert plain == shifted


# ---------------------------------------------------------------------------
# Block supports


def test_min_block_of_identity_is_its_coordinate():
    f = identity_function()
    window = (-1, 3)
    levels = prepared_for_blocks(f, window)
    assert min_block_support(f, levels, window) == (0, 0)


def test_min_block_shifts_with_the_function():
    f = shift_K(identity_function())
    window = (-1, 3)
    levels = prepared_for_blocks(f, window)
    assert min_block_support(f, levels, window) == (1, 1)


def test_min_block_of_diagonal_is_empty():
    d = diagonal(3, VALUES)
    assert min_block_support(d, base_level(), (-1, 2)) is None


def test_min_block_window_must_cover_support():
    f = identity_function()
    with pytest.raises(TermModelError):
        min_block_support(f, base_level(), (1, 3))


def test_min_block_contained_in_every_passing_block():
    table = {
        key: key[1] for key in itertools.product(range(K), repeat=3)
    }  # depends on the middle coordinate only
    f = supported_function([0, 1, 2], table, VALUES)
    window = (0, 3)
    levels = prepared_for_blocks(f, window)
    anchor = levels.B[0][1]
    best = min_block_support(f, levels, window)
    assert best == (1, 1)
    lo, hi = window
    for width in range(1, hi - lo + 2):
        for a in range(lo, hi - width + 2):
            block = (a, a + width - 1)
            if equiv(f, freeze_outside_block(f, block, anchor), levels) is True:
                assert block[0] <= best[0] and best[1] <= block[1]


def test_min_block_anchor_failure():
    f = identity_function()
    starved = LevelSequence(K=K, B=((0,),), families=())
    with pytest.raises(UndecidedError):
        min_block_support(f, starved, (0, 1))


def test_min_support_report_experimental():
    # Depends on coordinates 0 and 2 of a three-coordinate support.
    table = {key: (key[0], key[2]) for key in itertools.product(range(K), repeat=3)}
    f = supported_function([0, 1, 2], table, VALUES)
    window = (0, 2)
    levels = prepare_levels(min_support_colorings(f, base_level(), window), K)
    report = min_support_report(f, levels, window)
    assert report["minimum"] == [0, 2]
    assert report["minimum_exists"]
    assert [0, 1, 2] in report["passing"]
    assert [1] not in report["passing"]


def test_min_support_report_diagonal_style():
    f = supported_function([0], {(t,): "c" for t in range(K)}, VALUES, K=K)
    report = min_support_report(f, base_level(), (0, 0))
    assert report["minimum"] == []
    assert report["minimum_exists"]


# ---------------------------------------------------------------------------
# The twisted map


def test_jprime_on_diagonal():
    nodes = ["a", "b"]
    base = base_structure(nodes, [], [nodes, nodes, nodes], {"a": "b", "b": "a"})
    d = diagonal("a", base)
    assert compose_jprime(d, base.j) == diagonal("b", base)


def test_jprime_twice_is_double_shift_with_j_squared():
    am = coded_amodel(4)
    h = witness_H(am, 4)
    j = am.structure.j
    twice = compose_jprime(compose_jprime(h, j), j)
    assert twice.support == (2,)
    assert twice.table == {key: j[j[v]] for key, v in h.table.items()}


def test_jprime_undefined_value():
    d = diagonal("zz", frozenset(["zz"]))
    with pytest.raises(TermModelError):
        compose_jprime(d, {"a": "a"})


def test_jprime_moves_every_block_supported_element():
    """A function with a nonempty minimum block cannot be fixed by the
    twisted map: its image's minimum block sits one step to the right."""
    am = coded_amodel(4)
    k = 4
    f = witness_H(am, k)
    window = (0, 2)
    levels = prepare_levels(
        block_support_colorings(f, base_level(k), window)
        + block_support_colorings(compose_jprime(f, am.structure.j), base_level(k), window),
        k,
    )
    before = min_block_support(f, levels, window)
    after = min_block_support(compose_jprime(f, am.structure.j), levels, window)
    assert before == (0, 0)
    assert after == (before[0] + 1, before[1] + 1)
    assert before != after  # the fixed-point equation is impossible


# ---------------------------------------------------------------------------
# Witnesses


def test_witness_H_shape():
    am = coded_amodel(4)
    h = witness_H(am, 4)
    assert h.support == (0,)
    assert h.table == {(0,): "s0", (1,): "s1", (2,): "s2", (3,): "s3"}
    with pytest.raises(TermModelError):
        witness_H(am, 16)


def test_witness_H_differs_from_diagonals_where_certified():
    am = coded_amodel(4)
    k = 4
    h = witness_H(am, k)
    candidates = [diagonal(am.i[s], am.structure) for s in am.standard_part.nodes]
    colorings = [(agreement_coloring(h, d, k)[0], 1, 2) for d in candidates]
    levels = prepare_levels(colorings, k)
    verdicts = [equiv(h, d, levels) for d in candidates]
    assert all(v is not None for v in verdicts)
    assert verdicts.count(True) <= 1  # at most the truncation artifact
    assert verdicts.count(False) >= k - 2


def test_code_subset_empty_set():
    am = coded_amodel(4)
    h = code_subset([], am, 4)
    for theta in range(4):
        assert am.structure.extension(h.table[(theta,)]) & frozenset(
            am.standard_part.nodes
        ) == frozenset()
    for s in am.standard_part.nodes:
        verdict = relation_holds("in", [diagonal(am.i[s], am.structure), h], base_level(4))
        assert verdict is False


def test_code_subset_whole_standard_part():
    am = coded_amodel(4)
    k = 4
    sp = list(am.standard_part.nodes)
    h = code_subset(sp, am, k)
    needed = []
    for s in sp:
        coloring, n = relation_coloring("in", [diagonal(am.i[s], am.structure), h], k)
        needed.append((coloring, n, 2))
    levels = prepare_levels(needed, k)
    for s in sp:
        verdict = relation_holds("in", [diagonal(am.i[s], am.structure), h], levels)
        assert verdict is True


def test_code_subset_membership_matches_subset():
    am = coded_amodel(4)
    k = 4
    subset = ["s1", "s3"]
    h = code_subset(subset, am, k)
    needed = []
    for s in am.standard_part.nodes:
        coloring, n = relation_coloring("in", [diagonal(am.i[s], am.structure), h], k)
        needed.append((coloring, n, 2))
    levels = prepare_levels(needed, k)
    for s in am.standard_part.nodes:
        verdict = relation_holds("in", [diagonal(am.i[s], am.structure), h], levels)
        if verdict is not None:
            assert verdict == (s in subset)


def test_code_subset_missing_code_detected():
    # A self-looped standard part leaves no node with an empty fixed-point
    # extension, so even the empty cut lacks a code.
    sp = StandardPart(nodes=("s0",), edges=frozenset({("s0", "s0")}))
    bare = trivial_amodel(sp)
    with pytest.raises(TermModelError, match="no node codes"):
        code_subset([], bare, 1)
    with pytest.raises(TermModelError, match="outside the standard part"):
        code_subset(["zz"], coded_amodel(4), 4)


# ---------------------------------------------------------------------------
# Model-level coherence


def test_well_definedness_across_representatives():
    f1 = supported_function([0], {(t,): min(t, 1) for t in range(K)}, VALUES, K=K)
    f1_alt = supported_function([0], {(t,): 1 for t in range(K)}, VALUES, K=K)
    f2 = diagonal(1, VALUES)
    colorings = [
        (agreement_coloring(f1, f1_alt, K)[0], 1, 2),
        (relation_coloring("=", [f1, f2], K)[0], 1, 2),
        (relation_coloring("=", [f1_alt, f2], K)[0], 1, 2),
    ]
    levels = prepare_levels(colorings, K)
    assert equiv(f1, f1_alt, levels) is True
    first = relation_holds("=", [f1, f2], levels)
    second = relation_holds("=", [f1_alt, f2], levels)
    assert first is not None and second is not None
    assert first == second


def test_sentence_recursive_and_direct_agree():
    f = identity_function()
    g = supported_function([0], {(t,): t % 2 for t in range(K)}, VALUES, K=K)
    exprs = [
        ("rel", "=", 0, 1),
        ("not", ("rel", "=", 0, 1)),
        ("and", ("rel", "=", 0, 0), ("not", ("rel", "=", 0, 1))),
        ("or", ("rel", "=", 0, 1), ("not", ("rel", "=", 0, 1))),
    ]
    levels = prepare_levels(required_colorings(exprs, [f, g], K), K)
    for expr in exprs:
        rec = sentence_holds(expr, [f, g], levels, via="recursive")
        direct = sentence_holds(expr, [f, g], levels, via="direct")
        if rec is not None and direct is not None:
            assert rec == direct, expr


def test_sentence_total_on_tautology():
    f = identity_function()
    expr = ("or", ("rel", "=", 0, 0), ("rel", "=", 0, 0))
    assert sentence_holds(expr, [f], base_level(), via="direct") is True
    assert sentence_holds(expr, [f], base_level(), via="recursive") is True


def test_sentence_validation():
    with pytest.raises(TermModelError):
        sentence_holds(("xor", ("rel", "=", 0, 0)), [identity_function()], base_level())
    with pytest.raises(TermModelError):
        sentence_holds(("rel", "=", 0, 0), [identity_function()], base_level(), via="sideways")


# ---------------------------------------------------------------------------
# Serialization


def test_function_json_round_trip_values_target():
    f = supported_function([0, 2], {(u, v): str(u + v) for u in range(3) for v in range(3)}, frozenset(["0", "1", "2", "3", "4"]))
    again = function_from_json(function_to_json(f))
    assert again.support == f.support
    assert again.table == f.table
    assert again.target == f.target


def test_function_json_round_trip_base_target():
    am = coded_amodel(3)
    h = witness_H(am, 3)
    again = function_from_json(function_to_json(h))
    assert again.support == h.support
    assert again.table == h.table
    assert again.target == h.target


def test_verdict_strings():
    assert verdict_string(True) == "true"
    assert verdict_string(False) == "false"
    assert verdict_string(None) == "undecided"


def test_coded_amodel_is_a_valid_stage():
    """The structure feeding the coding witnesses is itself a checked
    stage: atomically elementary, fixed points exactly the standard part,
    rank-initial image; one quantifier already separates it from the bare
    standard part, which the bounded check reports honestly."""
    from nfukit.amodels import check_amodel

    am = coded_amodel(4)
    assert check_amodel(am, depth=0)["pass"]
    deeper = check_amodel(am, depth=1)
    assert any(v["kind"] == "not_elementary" for v in deeper["violations"])


def test_sentence_coloring_matches_pointwise_truth():
    f = identity_function()
    g = supported_function([1], {(t,): (t + 1) % K for t in range(K)}, VALUES, K=K)
    expr = ("or", ("rel", "=", 0, 1), ("not", ("rel", "=", 0, 1)))
    coloring, n = sentence_coloring(expr, [f, g], K)
    assert n == 2
    assert set(coloring.values()) == {1}
