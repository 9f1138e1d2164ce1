import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import qrev
from qrev import (
    Constraint,
    EmptyRelationPresent,
    QAFormula,
    UniverseMismatch,
    UnknownVariable,
    all_top,
    consistent_scenarios,
    is_arc_consistent,
    is_consistent,
    is_path_consistent,
    normalize,
    path_closure,
    realize_allen_scenario,
    scenario_distance,
    scenarios,
)

from support import interval_baserel, random_formula, scenario_space

XYZ = ("x", "y", "z")


def norm(allen, text_pairs):
    cs = [Constraint(x, allen.relation(*toks), y) for x, toks, y in text_pairs]
    universe = []
    for x, _, y in text_pairs:
        for v in (x, y):
            if v not in universe:
                universe.append(v)
    return normalize(cs, tuple(universe), allen)


def test_normalize_intersects_repeated_statements(allen):
    phi = normalize(
        [
            Constraint("x", allen.relation("b", "m", "o"), "y"),
            Constraint("x", allen.relation("m", "o", "s"), "y"),
        ],
        ("x", "y"),
        allen,
    )
    assert phi.rel("x", "y") == allen.relation("m", "o")


def test_normalize_empty_constraints_all_top(allen):
    phi = normalize([], XYZ, allen)
    for i, j in phi.unordered_pairs():
        assert phi.rel_idx(i, j) == allen.full


def test_normalize_closes_converse(allen):
    phi = norm(allen, [("x", ("b",), "y")])
    assert phi.rel("y", "x") == allen.relation("bi")


def test_normalize_unknown_variable(allen):
    with pytest.raises(UnknownVariable):
        normalize([Constraint("x", allen.full, "w")], XYZ, allen)


def test_path_closure_eq_chain(allen):
    phi = normalize(
        [
            Constraint("x", allen.relation("eq"), "y"),
            Constraint("y", allen.relation("eq"), "z"),
        ],
        XYZ,
        allen,
    )
    closed = path_closure(phi, allen)
    assert closed.rel("x", "z") == allen.relation("eq")


def test_path_closure_is_idempotent(allen, rng):
    for _ in range(25):
        cs = [
            Constraint("x", rng.getrandbits(13) or allen.full, "y"),
            Constraint("y", rng.getrandbits(13) or allen.full, "z"),
            Constraint("x", rng.getrandbits(13) or allen.full, "z"),
        ]
        once = path_closure(normalize(cs, XYZ, allen), allen)
        assert path_closure(once, allen) == once


def test_path_closure_detects_before_cycle(allen):
    phi = norm(allen, [("x", ("b",), "y"), ("y", ("b",), "z"), ("z", ("b",), "x")])
    assert path_closure(phi, allen).has_empty()


def test_path_closure_preserves_models(allen, rng):
    # exhaustive scenario-model comparison before/after closure
    for universe in (XYZ, ("p", "q", "r", "s")):
        for _ in range(12):
            cs = [
                Constraint(x, rng.getrandbits(13) or allen.full, y)
                for x, y in itertools.combinations(universe, 2)
                if rng.random() < 0.8
            ]
            phi = normalize(cs, universe, allen)
            closed = path_closure(phi, allen)
            before = {
                s
                for s in consistent_scenarios(universe, allen)
                if all(
                    s.rel_idx(i, j) & phi.rel_idx(i, j)
                    for i, j in s.unordered_pairs()
                )
            }
            after = {
                s
                for s in consistent_scenarios(universe, allen)
                if all(
                    s.rel_idx(i, j) & closed.rel_idx(i, j)
                    for i, j in s.unordered_pairs()
                )
            }
            assert before == after


def test_arc_consistency_checks(allen):
    good = norm(allen, [("x", ("b", "m", "o"), "y"), ("x", ("m", "o", "s"), "y")])
    assert is_arc_consistent(good, allen)
    n = 2
    bad = QAFormula(
        ("x", "y"),
        (
            allen.identity_mask,
            allen.relation("b"),
            allen.relation("b"),
            allen.identity_mask,
        ),
    )
    assert not is_arc_consistent(bad, allen)
    empty = good.with_pair(0, 1, 0, allen)
    assert not is_arc_consistent(empty, allen)


def test_path_consistency_checks(allen):
    closed = path_closure(norm(allen, [("x", ("eq",), "y"), ("y", ("eq",), "z")]), allen)
    assert is_path_consistent(closed, allen)
    contradiction = norm(
        allen, [("x", ("b",), "y"), ("y", ("b",), "z"), ("x", ("bi",), "z")]
    )
    assert not is_path_consistent(contradiction, allen)
    assert is_path_consistent(all_top(XYZ, allen), allen)


def test_scenarios_counts(allen):
    two = norm(allen, [("x", ("m", "o"), "y")])
    assert sum(1 for _ in scenarios(two, allen)) == 2
    top3 = all_top(XYZ, allen)
    assert sum(1 for _ in scenarios(top3, allen)) == 13**3
    scen = next(scenarios(two, allen))
    assert list(scenarios(scen, allen)) == [scen]


def test_scenarios_refine_their_input(allen, rng):
    phi = norm(allen, [("x", ("b", "m", "o", "s"), "y"), ("y", ("d", "f"), "z")])
    for s in scenarios(phi, allen):
        for i, j in s.unordered_pairs():
            assert s.rel_idx(i, j) & phi.rel_idx(i, j)


def test_scenarios_empty_relation_raises(allen):
    phi = all_top(("x", "y"), allen).with_pair(0, 1, 0, allen)
    with pytest.raises(EmptyRelationPresent):
        list(scenarios(phi, allen))


def test_is_consistent_examples(allen):
    assert is_consistent(
        norm(allen, [("x", ("eq",), "y"), ("y", ("eq",), "z")]), allen
    )
    assert not is_consistent(
        norm(allen, [("x", ("b",), "y"), ("y", ("b",), "z"), ("x", ("bi",), "z")]),
        allen,
    )
    assert is_consistent(norm(allen, [("x", ("d",), "z"), ("z", ("di",), "x")]), allen)


def test_is_consistent_matches_naive_enumeration(allen, rng):
    for universe in (XYZ, ("p", "q", "r", "s")):
        for _ in range(10):
            cs = [
                Constraint(x, rng.getrandbits(13) or allen.full, y)
                for x, y in itertools.combinations(universe, 2)
            ]
            phi = normalize(cs, universe, allen)
            naive = any(
                all(s.rel_idx(i, j) & phi.rel_idx(i, j) for i, j in s.unordered_pairs())
                for s in consistent_scenarios(universe, allen)
            )
            assert is_consistent(phi, allen) == naive


def test_consistent_scenario_count_three_intervals(allen):
    # 409 = number of distinct order configurations of three intervals,
    # recomputed by endpoint enumeration in the support oracle space
    scens, _, _ = scenario_space(XYZ, allen)
    assert len(scens) == 409
    assert len(consistent_scenarios(XYZ, allen)) == 409


def all_eq_scenario(allen, universe=XYZ):
    phi = all_top(universe, allen)
    for i, j in phi.unordered_pairs():
        phi = phi.with_pair(i, j, allen.identity_mask, allen)
    return phi


def test_scenario_distance_separation_and_frozen_example(allen):
    sigma = all_eq_scenario(allen)
    assert scenario_distance(sigma, sigma, allen) == 0
    closest = path_closure(
        norm(allen, [("x", ("d",), "y"), ("y", ("eq",), "z"), ("x", ("d",), "z")]),
        allen,
    )
    assert closest.is_scenario
    assert scenario_distance(sigma, closest, allen) == 8


def test_scenario_distance_universe_mismatch(allen):
    with pytest.raises(UniverseMismatch):
        scenario_distance(all_eq_scenario(allen), all_eq_scenario(allen, ("a", "b", "c")), allen)


def test_scenario_distance_metric_on_random_scenarios(allen, rng):
    scens = consistent_scenarios(XYZ, allen)
    for _ in range(150):
        s, t, u = (rng.choice(scens) for _ in range(3))
        assert scenario_distance(s, t, allen) == scenario_distance(t, s, allen)
        assert (scenario_distance(s, t, allen) == 0) == (s == t)
        assert scenario_distance(s, u, allen) <= scenario_distance(s, t, allen) + scenario_distance(t, u, allen)


def test_realize_all_eq(allen):
    sigma = all_eq_scenario(allen, ("x", "y"))
    intervals = realize_allen_scenario(sigma, allen)
    assert intervals["x"] == intervals["y"]
    a, b = intervals["x"]
    assert a < b


def test_realize_before(allen):
    phi = path_closure(norm(allen, [("x", ("b",), "y")]), allen)
    for sigma in scenarios(phi, allen):
        if path_closure(sigma, allen).has_empty():
            continue
        intervals = realize_allen_scenario(sigma, allen)
        assert intervals["x"][1] < intervals["y"][0]
        break


def test_realize_nested_example(allen):
    sigma = path_closure(
        norm(allen, [("x", ("d",), "y"), ("y", ("eq",), "z"), ("x", ("d",), "z")]),
        allen,
    )
    intervals = realize_allen_scenario(sigma, allen)
    ax, bx = intervals["x"]
    ay, by = intervals["y"]
    assert intervals["y"] == intervals["z"]
    assert ay < ax and bx < by


def test_every_consistent_scenario_realizes(allen):
    for sigma in consistent_scenarios(XYZ, allen):
        intervals = realize_allen_scenario(sigma, allen)
        for x, y in itertools.combinations(XYZ, 2):
            token = allen.tokens(sigma.rel(x, y))[0]
            assert interval_baserel(intervals[x], intervals[y]) == token
