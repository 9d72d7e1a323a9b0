from fractions import Fraction

import pytest

from highway_ptas.cli import generate_maxfs
from highway_ptas.dissection import Params
from highway_ptas.instance import InvalidInput
from highway_ptas.maxfs import (
    IntegerRules,
    MaxFSInstance,
    Row,
    lift_maxfs,
    maxfs_from_dict,
    maxfs_root_value,
    maxfs_to_dict,
    reduce_weights,
    run_maxfs,
    satisfied_rows,
    validate_maxfs,
    well_round_maxfs,
    w_star_guesses,
)
from highway_ptas.oracle import exact_maxfs

HALF = Params.from_epsilon(Fraction(1, 2))
TWO_ROWS = MaxFSInstance.from_tuples(2, [(1, 1, 1, 2, 1), (1, 2, 1, 3, 3)])


def test_reduce_weights_replicates_rows():
    unit, pmap = reduce_weights(TWO_ROWS, Fraction(1, 2))
    # scale m / (eps * v_max) = 4/3
    assert pmap.scale == Fraction(4, 3)
    assert pmap.units == (1, 4)
    assert unit.m == 5 and pmap.origin == (0, 1, 1, 1, 1)
    assert all(r.profit == 1 for r in unit.rows)


def test_duplication():
    wrm = well_round_maxfs(TWO_ROWS, Fraction(1, 2), 1)
    assert wrm.duplication == 8
    assert wrm.edge_count == 2 * 8 + 2
    assert list(wrm.column_run(1)) == list(range(8, 16))
    w = [0] * 8 + [1, 1, 0, 0, 0, 0, 0, 0] + [0] * 7 + [1] + [5] * 8
    assert lift_maxfs(w, wrm) == (2, 1)
    with pytest.raises(InvalidInput):
        well_round_maxfs(TWO_ROWS, Fraction(1, 2), 0)


def test_all_lower_bounds_zero_takes_every_row():
    inst = MaxFSInstance.from_tuples(2, [(1, 1, 0, 3, 1), (1, 2, 0, 0, 2)])
    report = run_maxfs(inst, HALF)
    assert report.rows == {0, 1}
    assert report.value == 3
    assert report.weights == (0, 0)


def test_single_tight_row():
    inst = MaxFSInstance.from_tuples(1, [(1, 1, 5, 5, 1)])
    report = run_maxfs(inst, HALF)
    assert report.rows == {0} and report.value == 1
    assert report.violation == 9
    assert 5 <= report.achieved[0] <= 45


def test_report_meets_relaxed_intervals():
    for seed in range(8):
        inst = generate_maxfs(3, 3, 3, seed)
        report = run_maxfs(inst, HALF)
        assert report.rows <= satisfied_rows(inst, report.weights, 1, report.violation)
        assert report.value <= exact_maxfs(inst, rho=HALF.rho)[0]


def test_randomized_mode_is_seeded():
    a = run_maxfs(TWO_ROWS, HALF, mode="randomized", seed=3)
    b = run_maxfs(TWO_ROWS, HALF, mode="randomized", seed=3)
    assert a.weights == b.weights and a.rows == b.rows
    assert run_maxfs(TWO_ROWS, HALF).value >= a.value


def test_clamped_table_matches_unclamped(monkeypatch):
    # the two rows conflict even after relaxation, so the root is not simply m
    instances = [MaxFSInstance.from_tuples(1, [(1, 1, 1, 1, 1), (1, 1, 4, 4, 1)])]
    expected = {}
    for k, inst in enumerate(instances):
        unit, _ = reduce_weights(inst, HALF.epsilon)
        for w_star in w_star_guesses(inst.n * max(inst.l_max, 1), HALF.gamma):
            for y in HALF.y_values():
                expected[k, w_star, y] = maxfs_root_value(unit, w_star, y, HALF)
    assert 0 < max(expected.values()) < unit.m
    monkeypatch.setattr(IntegerRules, "clamp", lambda self, weight, c: 10 ** 9)
    for (k, w_star, y), value in expected.items():
        unit, _ = reduce_weights(instances[k], HALF.epsilon)
        assert maxfs_root_value(unit, w_star, y, HALF) == value


def test_validate_and_json():
    assert validate_maxfs(TWO_ROWS) == []
    bad = MaxFSInstance(2, (Row(1, 3, 0, 1), Row(1, 1, 4, 2), Row(2, 2, 0, 1, Fraction(-1))))
    assert len(validate_maxfs(bad)) == 3
    assert maxfs_from_dict(maxfs_to_dict(TWO_ROWS)) == TWO_ROWS
    with pytest.raises(InvalidInput):
        maxfs_from_dict(maxfs_to_dict(bad))
    with pytest.raises(InvalidInput):
        run_maxfs(TWO_ROWS, HALF, mode="greedy")
