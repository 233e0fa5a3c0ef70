import random

import pytest

from nfukit.amodels import (
    AModelF,
    Diagram,
    DiagramError,
    StandardPart,
    amodel_from_json,
    amodel_isomorphic,
    amodel_to_json,
    check_amodel,
    check_amodel_map,
    diagram_from_json,
    diagram_to_json,
    direct_limit,
    ef_equivalent,
    extend_stage,
    oracle_limit,
    originals,
    random_diagram,
    random_standard_part,
    trivial_amodel,
    validate_diagram,
)
from nfukit.qmodel import base_structure


SP = StandardPart(nodes=("s0", "s1"), edges=frozenset({("s0", "s1")}))


def identity_map(stage):
    return {x: x for x in stage.structure.nodes}


def chain_diagram(stages, steps):
    """Assemble a Diagram from consecutive stages and one-step maps."""
    maps = {}
    for a, stage in enumerate(stages):
        maps[(a, a)] = identity_map(stage)
    for a, step in enumerate(steps):
        maps[(a, a + 1)] = step
    for a in range(len(stages)):
        for b in range(a + 2, len(stages)):
            maps[(a, b)] = {
                x: maps[(a + 1, b)][maps[(a, a + 1)][x]]
                for x in stages[a].structure.nodes
            }
    return Diagram(stages=stages, maps=maps)


def two_stage_inclusion():
    """Trivial stage extended once, connected by inclusion."""
    rng = random.Random(11)
    first = trivial_amodel(SP)
    second, step = extend_stage(first, rng, 1)
    return chain_diagram([first, second], [step])


# ---------------------------------------------------------------------------
# Back-and-forth equivalence sanity


def test_ef_separates_edge_from_non_edge():
    nodes = ("a", "b")
    with_edge = frozenset({("a", "b")})
    without = frozenset()
    # One quantifier only sees self-edges; two are needed to find the edge.
    assert ef_equivalent(nodes, with_edge, (), nodes, without, (), 1)
    assert not ef_equivalent(nodes, with_edge, (), nodes, without, (), 2)
    assert ef_equivalent(nodes, with_edge, (), nodes, with_edge, (), 3)


def test_ef_detects_size_difference_at_depth():
    one = ("a",)
    two = ("a", "b")
    assert ef_equivalent(one, frozenset(), (), two, frozenset(), (), 0)
    # Depth 2 counts up to two distinct elements.
    assert not ef_equivalent(one, frozenset(), (), two, frozenset(), (), 2)


# ---------------------------------------------------------------------------
# Stage checks


def test_trivial_amodel_passes():
    assert check_amodel(trivial_amodel(SP), depth=2)["pass"]


def test_fixed_point_outside_range_fails():
    nodes = ["s0", "s1", "u"]
    structure = base_structure(
        nodes, [("s0", "s1")], [nodes, nodes, nodes], {x: x for x in nodes}
    )
    cand = AModelF(
        structure=structure,
        standard_part=SP,
        i={"s0": "s0", "s1": "s1"},
        rank={"s0": 0, "s1": 1, "u": 2},
    )
    report = check_amodel(cand, depth=0)
    assert not report["pass"]
    assert {"kind": "fixed_point_outside_range", "node": "u"} in report["violations"]


def test_initial_segment_violation_fails():
    nodes = ["s0", "s1", "u0", "u1"]
    structure = base_structure(
        nodes,
        [("s0", "s1")],
        [nodes, nodes, nodes],
        {"s0": "s0", "s1": "s1", "u0": "u1", "u1": "u0"},
    )
    cand = AModelF(
        structure=structure,
        standard_part=SP,
        i={"s0": "s0", "s1": "s1"},
        rank={"s0": 0, "u0": 1, "s1": 2, "u1": 3},  # u0 sits below an i-image
    )
    report = check_amodel(cand, depth=0)
    assert not report["pass"]
    assert any(v["kind"] == "initial_segment" for v in report["violations"])


def test_elementarity_failure_is_reported():
    # The standard part has an edge; mapping into an edgeless structure
    # breaks even the atomic comparison.
    nodes = ["a", "b"]
    structure = base_structure(nodes, [], [nodes, nodes, nodes], {"a": "a", "b": "b"})
    cand = AModelF(
        structure=structure,
        standard_part=SP,
        i={"s0": "a", "s1": "b"},
        rank={"a": 0, "b": 1},
    )
    report = check_amodel(cand, depth=1)
    assert not report["pass"]
    assert any(v["kind"] == "i_edge_mismatch" for v in report["violations"])


# ---------------------------------------------------------------------------
# Map checks


def test_identity_map_passes():
    stage = trivial_amodel(SP)
    assert check_amodel_map(identity_map(stage), stage, stage, depth=2)["pass"]


def test_map_breaking_j_square_fails_with_witness():
    d = two_stage_inclusion()
    first, second = d.stages
    bad = dict(d.maps[(0, 1)])
    moved = sorted(x for x in second.structure.nodes if second.structure.j[x] != x)
    bad[first.i["s0"]], bad[first.i["s1"]] = moved[0], moved[1]
    report = check_amodel_map(bad, first, second, depth=0)
    assert not report["pass"]
    assert any(v["kind"] in ("figure1", "figure2") for v in report["violations"])


def test_inclusion_into_extension_passes():
    d = two_stage_inclusion()
    report = check_amodel_map(d.maps[(0, 1)], d.stages[0], d.stages[1], depth=0)
    assert report["pass"], report["violations"]


def test_validate_diagram_catches_missing_composition():
    d = two_stage_inclusion()
    broken = dict(d.maps)
    second_nodes = sorted(d.stages[1].structure.nodes)
    table = dict(broken[(1, 1)])
    table[second_nodes[0]], table[second_nodes[1]] = (
        table[second_nodes[1]],
        table[second_nodes[0]],
    )
    broken[(1, 1)] = table
    report = validate_diagram(Diagram(stages=d.stages, maps=broken))
    assert not report["pass"]
    assert any(v["kind"] == "identity" for v in report["violations"])


# ---------------------------------------------------------------------------
# Direct limits


def test_single_stage_limit_is_tagging():
    stage = trivial_amodel(SP)
    d = Diagram(stages=[stage], maps={(0, 0): identity_map(stage)})
    limit, cocone = direct_limit(d)
    assert sorted(limit.structure.nodes) == ["0:s0", "0:s1"]
    assert amodel_isomorphic(limit, stage)
    assert cocone[0] == {"s0": "0:s0", "s1": "0:s1"}


def test_two_stage_limit_isomorphic_to_second():
    d = two_stage_inclusion()
    limit, _ = direct_limit(d)
    assert amodel_isomorphic(limit, d.stages[1])
    assert amodel_isomorphic(limit, oracle_limit(d))


def test_three_stage_chain_identifies_preimages():
    rng = random.Random(23)
    first = trivial_amodel(SP)
    second, step1 = extend_stage(first, rng, 1)
    third, step2 = extend_stage(second, rng, 2)
    d = chain_diagram([first, second, third], [step1, step2])
    limit, cocone = direct_limit(d)
    # A standard-part element appears at all three stages; all its
    # appearances collapse to the single stage-0 tag.
    x0 = first.i["s0"]
    assert cocone[0][x0] == cocone[1][d.maps[(0, 1)][x0]] == cocone[2][d.maps[(0, 2)][x0]]
    assert cocone[0][x0].startswith("0:")
    # Stage-1 originals keep their stage-1 tags.
    stage1_original = sorted(originals(d)[1])[0]
    assert cocone[1][stage1_original].startswith("1:")
    assert amodel_isomorphic(limit, oracle_limit(d))


def test_cocone_equations_pointwise():
    rng = random.Random(5)
    for _ in range(10):
        d = random_diagram(rng)
        _, cocone = direct_limit(d)
        for a in range(len(d.stages)):
            for b in range(a, len(d.stages)):
                for x in d.stages[a].structure.nodes:
                    assert cocone[b][d.maps[(a, b)][x]] == cocone[a][x]


def test_j_limit_keeps_originals():
    rng = random.Random(13)
    for _ in range(10):
        d = random_diagram(rng)
        limit, _ = direct_limit(d)
        node_set = set(limit.structure.nodes)
        for x in limit.structure.nodes:
            assert limit.structure.j[x] in node_set


def test_limit_is_an_amodel_when_stages_are():
    rng = random.Random(31)
    for _ in range(10):
        d = random_diagram(rng)
        for stage in d.stages:
            assert check_amodel(stage, depth=0)["pass"]
        assert validate_diagram(d, depth=0)["pass"]
        limit, _ = direct_limit(d)
        assert check_amodel(limit, depth=0)["pass"]


def test_limit_matches_oracle_on_random_diagrams():
    rng = random.Random(97)
    for _ in range(25):
        d = random_diagram(rng)
        limit, _ = direct_limit(d)
        assert amodel_isomorphic(limit, oracle_limit(d))


def test_non_commuting_input_is_detected():
    d = two_stage_inclusion()
    first, second = d.stages
    # Swap two moved nodes in the step map; the j square now fails and the
    # limit's relation verdicts disagree across stages.
    bad_step = dict(d.maps[(0, 1)])
    image = second.structure.nodes
    moved = sorted(x for x in image if second.structure.j[x] != x)
    bad_step[first.i["s0"]] = moved[0]
    bad = Diagram(
        stages=[first, second],
        maps={(0, 0): d.maps[(0, 0)], (1, 1): d.maps[(1, 1)], (0, 1): bad_step},
    )
    with pytest.raises(DiagramError):
        direct_limit(bad)


def test_empty_diagram_rejected():
    with pytest.raises(DiagramError):
        direct_limit(Diagram(stages=[], maps={}))


def test_empty_structures_give_empty_limit():
    empty_sp = StandardPart(nodes=(), edges=frozenset())
    stage = trivial_amodel(empty_sp)
    d = chain_diagram([stage, stage], [{}])
    limit, cocone = direct_limit(d)
    assert limit.structure.nodes == ()
    assert cocone == {0: {}, 1: {}}
    oracle = oracle_limit(d)
    assert oracle.structure.nodes == ()
    assert amodel_isomorphic(limit, oracle)


# ---------------------------------------------------------------------------
# Isomorphism checker


def test_isomorphism_respects_structure():
    stage = trivial_amodel(SP)
    other_sp = StandardPart(nodes=("s0", "s1"), edges=frozenset())
    assert not amodel_isomorphic(stage, trivial_amodel(other_sp))
    assert amodel_isomorphic(stage, stage)


# ---------------------------------------------------------------------------
# Serialization


def test_amodel_json_round_trip():
    stage = trivial_amodel(SP)
    again = amodel_from_json(amodel_to_json(stage))
    assert again == stage


def test_diagram_json_round_trip():
    d = random_diagram(random.Random(3))
    again = diagram_from_json(diagram_to_json(d))
    assert again.stages == d.stages
    assert again.maps == d.maps


def test_random_standard_part_is_deterministic_per_seed():
    assert random_standard_part(random.Random(9)) == random_standard_part(random.Random(9))
