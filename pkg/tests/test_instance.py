from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from highway_ptas.instance import (
    Driver,
    HighwayInstance,
    InvalidInput,
    as_rational,
    dump_json,
    format_rational,
    generate_random,
    highway_from_dict,
    highway_to_dict,
    load_json,
    profit,
    satisfied_set,
    segment_structure,
    validate,
)

EXAMPLE = HighwayInstance.from_tuples(2, [(1, 1, 4), (2, 2, 3), (1, 2, 5)])


def test_zero_weights_pay_nothing():
    assert profit(EXAMPLE, [0, 0]) == 0
    assert satisfied_set(EXAMPLE, [0, 0]) == {0, 1, 2}


def test_profit_of_example():
    assert profit(EXAMPLE, [4, 1]) == 10


def test_budget_exceeded_drops_driver():
    inst = HighwayInstance.from_tuples(1, [(1, 1, 3)])
    assert profit(inst, [4]) == 0
    assert satisfied_set(inst, [4]) == frozenset()


def test_profit_rejects_wrong_length():
    with pytest.raises(InvalidInput):
        profit(EXAMPLE, [1])


def test_profit_is_exact_with_rationals():
    inst = HighwayInstance.from_tuples(2, [(1, 2, "7/3")])
    assert profit(inst, [Fraction(1, 3), Fraction(2)]) == Fraction(7, 3)


@pytest.mark.parametrize("n,drivers,expected", [
    (4, [(2, 3, 1)], [(1, 1), (2, 2), (4, 1)]),
    (3, [], [(1, 3)]),
    (5, [(1, 3, 1), (3, 5, 1)], [(1, 2), (3, 1), (4, 2)]),
])
def test_segment_structure(n, drivers, expected):
    seg = segment_structure(HighwayInstance.from_tuples(n, drivers))
    assert [(s.first, s.length) for s in seg.segments] == expected


def test_segments_share_driver_sets():
    inst = HighwayInstance.from_tuples(5, [(1, 3, 1), (3, 5, 1)])
    seg = segment_structure(inst)
    assert [sorted(s.drivers) for s in seg.segments] == [[0], [0, 1], [1]]
    assert seg.segment_of(4) == 2


def test_validate_reports_offending_driver():
    assert validate(EXAMPLE) == []
    bad = HighwayInstance(3, (Driver(1, 1, Fraction(1)), Driver(3, 2, Fraction(1))))
    problems = validate(bad)
    assert len(problems) == 1 and problems[0].startswith("driver 1")
    assert validate(HighwayInstance(3, (Driver(2, 4, Fraction(0)),)))


def test_generate_is_deterministic():
    assert generate_random(3, 0, 4, 1).drivers == ()
    assert generate_random(4, 5, 3, 99) == generate_random(4, 5, 3, 99)


def test_generate_snapshot():
    assert highway_to_dict(generate_random(3, 5, 4, 7)) == {
        "kind": "highway",
        "n": 3,
        "drivers": [
            {"left": 2, "right": 2, "budget": 3},
            {"left": 3, "right": 3, "budget": 0},
            {"left": 3, "right": 3, "budget": 2},
            {"left": 3, "right": 3, "budget": 4},
            {"left": 1, "right": 1, "budget": 0},
        ],
    }


def test_rational_literals():
    assert as_rational("3/4") == Fraction(3, 4)
    assert as_rational(5) == 5
    assert format_rational(Fraction(6, 3)) == 2
    assert format_rational(Fraction(1, 3)) == "1/3"
    for bad in ("0.5", 0.5, True, "1e3", "x"):
        with pytest.raises(InvalidInput):
            as_rational(bad)


def test_json_round_trip(tmp_path):
    path = tmp_path / "inst.json"
    inst = HighwayInstance.from_tuples(3, [(1, 2, "5/2"), (3, 3, 0)])
    dump_json(highway_to_dict(inst), path)
    assert highway_from_dict(load_json(path)) == inst


def test_json_rejects_floats(tmp_path):
    path = tmp_path / "inst.json"
    path.write_text('{"kind": "highway", "n": 1, "drivers": [{"left": 1, "right": 1, "budget": 0.5}]}')
    with pytest.raises(InvalidInput):
        load_json(path)


@st.composite
def instances_and_weights(draw):
    n = draw(st.integers(1, 5))
    drivers = []
    for _ in range(draw(st.integers(0, 4))):
        left = draw(st.integers(1, n))
        right = draw(st.integers(left, n))
        drivers.append((left, right, draw(st.integers(0, 6))))
    w = draw(st.lists(st.integers(0, 4), min_size=n, max_size=n))
    return HighwayInstance.from_tuples(n, drivers), w


@settings(max_examples=150, deadline=None)
@given(instances_and_weights(), st.randoms(use_true_random=False))
def test_profit_invariants(data, rng):
    inst, w = data
    value = profit(inst, w)
    assert value <= sum(d.budget for d in inst.drivers)

    # weight on edges outside every driver is irrelevant
    free = [e for e in range(1, inst.n_edges + 1) if not any(d.left <= e <= d.right for d in inst.drivers)]
    bumped = list(w)
    for e in free:
        bumped[e - 1] += 3
    assert profit(inst, bumped) == value

    # weight may move freely inside an elementary segment
    moved = list(w)
    for seg in segment_structure(inst).segments:
        span = range(seg.first - 1, seg.first - 1 + seg.length)
        total = sum(moved[i] for i in span)
        for i in span:
            moved[i] = 0
        for _ in range(total):
            moved[rng.choice(span)] += 1
    assert profit(inst, moved) == value
