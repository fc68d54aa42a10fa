"""Stratum membership, extension search, and the thinning-witness pipeline."""

import pytest

from expbouquet import (
    AlphaIndex,
    IncomparableTailsError,
    ModelPoint,
    address_distance,
    const_seq,
    endpoint_height_enclosure,
    extension_index,
    fexp_seq,
    in_stratum,
    least_witness_depth,
    linexp_seq,
    point_distance,
    potential,
    witness_cut_index,
    witness_family,
    witness_sequence,
)
from expbouquet.sequences import ExpTowerTail, FloorPow, IntEntry, LinExpTail


def endpoint_of(seq) -> ModelPoint:
    return ModelPoint(endpoint_height_enclosure(seq).mid, seq)


# -- AlphaIndex ----------------------------------------------------------------


def test_alpha_index_validation():
    AlphaIndex((0, 3, 7))
    with pytest.raises(ValueError):
        AlphaIndex((3, 3))
    with pytest.raises(ValueError):
        AlphaIndex((-1,))
    with pytest.raises(ValueError):
        AlphaIndex((2,)).child(2)


def test_alpha_threshold_ladder():
    alpha = AlphaIndex((0, 4, 9))
    assert [alpha.threshold(i) for i in range(3)] == [2.0, 5.0, 8.0]


# -- membership -------------------------------------------------------------------


def test_membership_tower_endpoint():
    point = endpoint_of(fexp_seq(3))
    assert in_stratum(AlphaIndex((0,)), point).is_true


def test_membership_rejects_bounded_address():
    point = endpoint_of(const_seq(1))
    assert in_stratum(AlphaIndex((0,)), point).is_false


def test_membership_rejects_non_escaping_point():
    assert in_stratum(AlphaIndex(()), ModelPoint(0.0, const_seq(0))).is_false


def test_membership_rejects_point_off_the_endpoint():
    seq = fexp_seq(3)
    h = endpoint_height_enclosure(seq)
    assert in_stratum(AlphaIndex(()), ModelPoint(h.mid + 1.0, seq)).is_false


def test_membership_nested():
    point = endpoint_of(fexp_seq(6))
    child = AlphaIndex((0,)).child(2)
    assert in_stratum(child, point).is_true
    assert in_stratum(AlphaIndex((0,)), point).is_true


def test_membership_threshold_binds():
    # the rate-1 ramp has potential about n + 1 at shift n, so constraints
    # bind exactly where the thresholds 2 and 5 sit
    seq = linexp_seq(1)
    point = endpoint_of(seq)
    assert in_stratum(AlphaIndex(()), point).is_true
    assert in_stratum(AlphaIndex((0,)), point).is_false      # potential(0) < 2
    assert in_stratum(AlphaIndex((1, 2)), point).is_false    # potential(2) < 5
    assert in_stratum(AlphaIndex((1, 8)), point).is_true


# -- extension search ----------------------------------------------------------------


def test_extension_tower_is_immediate():
    point = endpoint_of(fexp_seq(3))
    assert extension_index(AlphaIndex(()), point, 0) == 0


def test_extension_respects_floor_and_strictness():
    point = endpoint_of(fexp_seq(3))
    assert extension_index(AlphaIndex(()), point, 5) == 5
    n = extension_index(AlphaIndex((0,)), point, 0)
    assert n >= 1
    assert in_stratum(AlphaIndex((0,)).child(n), point).is_true


def test_extension_ramp_waits_for_the_threshold():
    point = endpoint_of(linexp_seq(1))
    n = extension_index(AlphaIndex(()), point, 0)
    assert in_stratum(AlphaIndex(()).child(n), point).is_true
    # the ramp potential at shift n-1 must not already certify > 2
    if n > 0:
        assert not potential(point.seq, n - 1).certainly_gt(2.0)


def test_extension_requires_membership():
    with pytest.raises(ValueError):
        extension_index(AlphaIndex(()), ModelPoint(0.0, const_seq(0)), 0)


# -- witness construction ---------------------------------------------------------------


def test_witness_depth_is_one_for_big_towers():
    assert least_witness_depth(fexp_seq(10), 0, 5.0) == 1
    assert least_witness_depth(fexp_seq(10), 3, 5.0) == 1


def test_cut_index_matches_the_max_formula():
    base = fexp_seq(10)
    # all depths are 1, so m = max(n + 1 : n in [0, 3]) = 4
    assert witness_cut_index(base, AlphaIndex((0,)), 0, 3) == 4
    # degenerate single-depth case: the empty below-window maximum reads as 0
    assert witness_cut_index(base, AlphaIndex((0,)), 0, 0) == 1
    assert witness_cut_index(base, AlphaIndex((0,)), 2, 3) == 4


def test_cut_index_enforces_span_floor():
    base = fexp_seq(10)
    with pytest.raises(ValueError):
        witness_cut_index(base, AlphaIndex((0,)), 3, 2)


def test_cut_index_fails_on_non_member():
    from expbouquet import BudgetExceededError

    # a bounded address can never witness terms above the child threshold
    with pytest.raises(BudgetExceededError):
        witness_cut_index(const_seq(1), AlphaIndex((0,)), 0, 1, budget=64)


def test_witness_structure_over_tower_base():
    base = fexp_seq(10)
    w = witness_sequence(base, AlphaIndex((0,)), 2)
    # first three entries copied from the base, tower cap beyond
    assert w.entry(0) == IntEntry(22025)
    assert w.entry(1) == FloorPow(10, 2)
    assert w.entry(2) == FloorPow(10, 3)
    assert isinstance(w.tail, ExpTowerTail)
    assert w.tail.c == 3 and w.tail.anchor == 2
    assert w.value_at(3) == 19  # floor(F(3))


def test_witness_keeps_small_entries():
    # a zero in the base past the cut survives the min
    base = fexp_seq(10, (5, 0))
    w = witness_sequence(base, AlphaIndex((0,)), 0)
    assert w.value_at(1) == 0


def test_witness_requires_diverging_tail_and_depth():
    with pytest.raises(IncomparableTailsError):
        witness_sequence(const_seq(1), AlphaIndex((0,)), 2)
    with pytest.raises(ValueError):
        witness_sequence(fexp_seq(10), AlphaIndex(()), 2)


def test_witness_caps_the_cut_potential():
    base = fexp_seq(10)
    for alpha in (AlphaIndex((0,)), AlphaIndex((0, 1))):
        m = 4
        w = witness_sequence(base, alpha, m)
        bound = 3.0 * alpha.dom
        assert potential(w, m).certainly_le(bound)
        assert potential(w, m).certainly_gt(bound - 1.0)


def test_witness_over_ramp_base():
    base = linexp_seq(3)
    w = witness_sequence(base, AlphaIndex((0,)), 2)
    # near the cut the tower cap is smaller than e^(3n); far out the base
    # ramp falls below the tower and survives
    assert w.value_at(3) == 19
    assert isinstance(w.tail, LinExpTail)
    caps = [n for n in range(3, 12) if isinstance(w.entry(n), FloorPow)]
    assert caps, "expected a capped window after the cut"


def test_witness_distance_metric():
    base = fexp_seq(10)
    w3 = witness_sequence(base, AlphaIndex((0,)), 3)
    w5 = witness_sequence(base, AlphaIndex((0,)), 5)
    d3 = address_distance(w3, base)
    d5 = address_distance(w5, base)
    assert 0.0 < d5 < d3
    assert address_distance(base, base) == 0.0


def test_witness_family_full_pipeline():
    base_point = endpoint_of(fexp_seq(10))
    alpha = AlphaIndex((0,))
    reports = witness_family(base_point, alpha, 1, 3)
    assert len(reports) == 3
    ms = [r.m for r in reports]
    assert ms == sorted(ms) and len(set(ms)) == 3
    dists = [r.distance_to_base for r in reports]
    assert all(b < a for a, b in zip(dists, dists[1:]))
    for r in reports:
        assert r.claim1_margin.lo > 2.0
        assert r.claim2_bound.hi <= 3.0
        assert r.height.mid <= endpoint_height_enclosure(base_point.seq).hi + 1e-9


def test_witness_family_empty_count():
    base_point = endpoint_of(fexp_seq(10))
    assert witness_family(base_point, AlphaIndex((0,)), 1, 0) == []


def test_witness_family_requires_membership():
    with pytest.raises(ValueError):
        witness_family(ModelPoint(0.0, const_seq(0)), AlphaIndex((0,)), 1, 2)


def test_point_distance_combines_height_and_address():
    a = endpoint_of(fexp_seq(10))
    b = ModelPoint(a.t + 0.5, a.seq)
    assert point_distance(a, b) == pytest.approx(0.5)
