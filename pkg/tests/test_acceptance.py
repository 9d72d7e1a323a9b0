"""Acceptance criteria 1-11, each an exact check against an independent computation.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary prints
one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import json
import time
from fractions import Fraction
from itertools import combinations, product

import pytest

from highway_ptas.cli import generate_maxfs, main
from highway_ptas.dissection import (
    INFEASIBLE,
    CompressedTable,
    EdgeTable,
    Params,
    base_profit,
    bound,
    optimal_dissection_value,
    padded_optimum,
    reconstruct,
    run_hptas,
    w_star_guesses,
)
from highway_ptas.instance import HighwayInstance, generate_random, profit
from highway_ptas.maxfs import (
    induced_count,
    maxfs_root_value,
    reduce_weights,
    row_values,
    run_maxfs,
    weighted_count,
)
from highway_ptas.oracle import exact_highway_bruteforce, exact_highway_sweep, exact_maxfs, exact_tollbooth
from highway_ptas.tollbooth import (
    Part,
    TreeDriver,
    TreeInstance,
    TreeTable,
    bound_tree,
    path_tree,
    reconstruct_tree,
    run_tollbooth,
    tollbooth_scale,
    tree_profit,
    well_round_tree,
)
from highway_ptas.wellround import TrivialInstance, lift, rounded_instance, well_round

EXAMPLE = HighwayInstance.from_tuples(2, [(1, 1, 4), (2, 2, 3), (1, 2, 5)])
SMALL_HIGHWAYS = [
    HighwayInstance.from_tuples(1, [(1, 1, 3)]),
    HighwayInstance.from_tuples(2, [(1, 1, 3), (1, 2, 5)]),
    HighwayInstance.from_tuples(2, [(1, 2, 2), (2, 2, 5)]),
    HighwayInstance.from_tuples(1, [(1, 1, 1), (1, 1, 4)]),
    HighwayInstance.from_tuples(2, [(2, 2, 0), (1, 1, 4)]),
]
GAMMA2 = Params.from_epsilon(Fraction(1, 2), gamma=2)


def single_draws(instance: HighwayInstance, params: Params):
    """Every (W*, x, y) draw solved from scratch: table root, w' and lifted profit."""
    wr = well_round(instance, params.epsilon)
    out = []
    for w_star in w_star_guesses(wr.base.n_edges, params.gamma):
        for y in params.y_values():
            for x in range(1, w_star + 1):
                line = bound(wr, w_star, x, y, params)
                table = CompressedTable(wr, params).bind(line)
                root = table._value(0, line.length, line.w_prime)
                if root < 0:
                    out.append({"w_star": w_star, "x": x, "y": y, "root": None})
                    continue
                rec = reconstruct(table, line)
                region = rec.weights[line.x:line.x + line.region]
                w = lift([Fraction(v) * params.scale_factor for v in region], wr.trace, pad=0)
                out.append({
                    "w_star": w_star, "x": x, "y": y, "root": root, "line": line, "rec": rec,
                    "profit": profit(instance, w),
                })
    return out


@pytest.fixture(scope="module")
def example_report(half):
    return run_hptas(EXAMPLE, half)


@pytest.fixture(scope="module")
def small_reports(half):
    return [run_hptas(inst, half) for inst in SMALL_HIGHWAYS]


@pytest.fixture(scope="module")
def small_draws(half):
    return [single_draws(inst, half) for inst in SMALL_HIGHWAYS]


# ---- 1 ---------------------------------------------------------------------------

@pytest.mark.criterion(1)
def test_oracles_agree_on_seeded_instances():
    started = time.perf_counter()
    checked = 0
    for seed in range(120):
        inst = generate_random(seed % 3 + 1, seed % 4, 5, seed)
        assert exact_highway_bruteforce(inst).value == exact_highway_sweep(inst), seed
        checked += 1
    assert checked >= 100
    assert time.perf_counter() - started < 60


# ---- 2 ---------------------------------------------------------------------------

@pytest.mark.criterion(2)
def test_highway_reports_are_sound(example_report, small_reports, half):
    runs = [(EXAMPLE, example_report)] + list(zip(SMALL_HIGHWAYS, small_reports))
    for seed in range(3):
        runs.append((SMALL_HIGHWAYS[1], run_hptas(SMALL_HIGHWAYS[1], half, "randomized", seed)))
    runs.append((SMALL_HIGHWAYS[0], run_hptas(SMALL_HIGHWAYS[0], GAMMA2, backend="edge")))
    for inst, report in runs:
        assert profit(inst, report.weights) == report.profit
        assert report.profit <= exact_highway_bruteforce(inst).value


@pytest.mark.criterion(2)
def test_tollbooth_reports_are_sound():
    trees = [
        path_tree(SMALL_HIGHWAYS[0]),
        TreeInstance(3, ((1, 2), (2, 3)), 1, (TreeDriver(2, 3, Fraction(3)),)),
    ]
    for tree in trees:
        report = run_tollbooth(tree, GAMMA2)
        assert tree_profit(tree, report.weights) == report.profit
        assert report.profit <= exact_tollbooth(tree).value


@pytest.mark.criterion(2)
def test_maxfs_reports_are_sound(half):
    for seed in range(8):
        inst = generate_maxfs(3, 3, 4, seed)
        report = run_maxfs(inst, half)
        assert weighted_count(inst, report.rows) == report.value
        relaxed, _, _ = exact_maxfs(inst, rho=half.rho)
        assert report.value <= relaxed


# ---- 3 ---------------------------------------------------------------------------

def _check_scaled_draw(draw, scale: Fraction) -> None:
    line, rec = draw["line"], draw["rec"]
    prefix = [0]
    for v in rec.weights:
        prefix.append(prefix[-1] + v)

    def scaled(l, r):
        return (prefix[r + 1] - prefix[l]) * scale

    for record in rec.records:
        l, r, b = line.drivers[record.driver]
        assert scaled(l, r) <= b
    paid = sum((scaled(l, r) for l, r, b in line.drivers if scaled(l, r) <= b), Fraction(0))
    assert paid >= draw["root"] * scale


@pytest.mark.criterion(3)
def test_good_drivers_fit_after_scaling(small_draws, half):
    seen = 0
    for draws in small_draws:
        for draw in draws:
            if draw["root"] is not None:
                _check_scaled_draw(draw, half.scale_factor)
                seen += 1
    assert seen > 0


@pytest.mark.criterion(3)
def test_good_drivers_fit_after_scaling_on_example(half):
    scale = half.scale_factor
    assert scale == Fraction(1) / (1 + 4 * half.epsilon)
    wr = well_round(EXAMPLE, half.epsilon)
    table = CompressedTable(wr, half)
    w_star = w_star_guesses(wr.base.n_edges, half.gamma)[-1]
    for y in half.y_values():
        for x in range(1, w_star + 1):
            line = bound(wr, w_star, x, y, half)
            root = table.bind(line)._value(0, line.length, line.w_prime)
            if root >= 0:
                _check_scaled_draw({"line": line, "rec": reconstruct(table, line), "root": root}, scale)


# ---- 4 ---------------------------------------------------------------------------

@pytest.mark.criterion(4)
def test_root_dominates_oracle_dissection(half):
    started = time.perf_counter()
    instances = 0
    seed = 0
    while instances < 20:
        inst = generate_random(1 + seed % 2, 1 + (seed // 2) % 2, 5, 1000 + seed)
        seed += 1
        try:
            wr = well_round(inst, half.epsilon)
        except TrivialInstance:
            continue
        w_opt = [int(v) for v in exact_highway_bruteforce(rounded_instance(wr)).weights]
        w_star = padded_optimum(wr, w_opt, 1, 1, half)[0].w_star
        table = CompressedTable(wr, half)
        for y in half.y_values():
            for x in range(1, w_star + 1):
                line = bound(wr, w_star, x, y, half)
                phi = table.bind(line)._value(0, line.length, line.w_prime)
                apx_o = optimal_dissection_value(wr, w_opt, x, y, half)
                assert phi >= apx_o, (inst, x, y, phi, apx_o)
        instances += 1
    assert time.perf_counter() - started < 600


# ---- 5 ---------------------------------------------------------------------------

@pytest.mark.criterion(5)
@pytest.mark.parametrize("instance", [
    HighwayInstance.from_tuples(1, [(1, 1, 3)]),
    HighwayInstance.from_tuples(2, [(1, 2, 7)]),
    HighwayInstance.from_tuples(1, [(1, 1, 5), (1, 1, 2)]),
])
def test_lift_keeps_rounded_profit(instance, half):
    wr = well_round(instance, half.epsilon)
    base = wr.base
    top = 2 if base.n_edges > 4 else 3
    lam = wr.trace.scale
    for w in product(range(top + 1), repeat=base.n_edges):
        lifted = lift(w, wr.trace, pad=0)
        assert profit(instance, lifted) >= profit(base, w) / lam


# ---- 6 ---------------------------------------------------------------------------

@pytest.mark.criterion(6)
def test_derandomized_is_best_single_draw(small_reports, small_draws, half):
    for inst, report, draws in zip(SMALL_HIGHWAYS, small_reports, small_draws):
        best = max(d["profit"] for d in draws if d["root"] is not None)
        assert report.profit == best
        for seed in range(5):
            assert run_hptas(inst, half, "randomized", seed).profit <= report.profit


@pytest.mark.criterion(6)
def test_derandomized_example_matches_its_grid(example_report, half):
    draws = example_report.diagnostics["draws"]
    wr = well_round(EXAMPLE, half.epsilon)
    grid = [(w, x, y) for w in w_star_guesses(wr.base.n_edges, half.gamma) for y in half.y_values()
            for x in range(1, w + 1)]
    assert [(d["w_star"], d["x"], d["y"]) for d in draws] == grid
    best = max(Fraction(d["profit"]) for d in draws if d["profit"] is not None)
    assert example_report.profit == best
    for seed in range(3):
        assert run_hptas(EXAMPLE, half, "randomized", seed).profit <= example_report.profit


# ---- 7 ---------------------------------------------------------------------------

def _edge_brute_force(length: int, c: int, drivers):
    if c > length:
        return INFEASIBLE
    best = -1
    for ones in combinations(range(length), c):
        w = [0] * length
        for i in ones:
            w[i] = 1
        value = 0
        for l, r, b in drivers:
            wd = sum(w[l:r + 1])
            if wd <= b:
                value += wd
        best = max(best, value)
    return best


@pytest.mark.criterion(7)
def test_segment_compositions_match_edge_brute_force():
    import random

    layouts = 0
    for seed in range(60):
        rng = random.Random(seed)
        length = rng.randint(1, 8)
        drivers = []
        for _ in range(rng.randint(0, 4)):
            l = rng.randint(0, length - 1)
            r = rng.randint(l, length - 1)
            drivers.append((l, r, rng.randint(0, 4)))
        for c in range(1, length + 2):
            value, placement = base_profit(length, c, drivers)
            assert value == _edge_brute_force(length, c, drivers), (seed, c)
            if value is not INFEASIBLE:
                assert sum(placement) == c
                paid = sum(sum(placement[l:r + 1]) for l, r, b in drivers if sum(placement[l:r + 1]) <= b)
                assert paid == value
        layouts += 1
    assert layouts >= 50


# ---- 8 ---------------------------------------------------------------------------

@pytest.mark.criterion(8)
@pytest.mark.parametrize("instance", [
    HighwayInstance.from_tuples(1, [(1, 1, 3)]),
    HighwayInstance.from_tuples(2, [(1, 2, 3)]),
    HighwayInstance.from_tuples(1, [(1, 1, 3), (1, 1, 5)]),
])
def test_path_tree_tables_match_highway(instance):
    params = GAMMA2
    wr = well_round(instance, params.epsilon)
    tree = path_tree(instance)
    wrt = well_round_tree(tree, params.epsilon)
    ratio = tollbooth_scale(params) / params.scale_factor
    draws = 0
    for w_star in w_star_guesses(wr.base.n_edges, params.gamma):
        for y in params.y_values():
            for x in range(1, w_star + 1):
                line = bound(wr, w_star, x, y, params)
                edge = EdgeTable(line, params)
                g0 = bound_tree(wrt, w_star, x, y, params)
                tt = TreeTable(g0, params)
                root = edge._value(0, line.length, line.w_prime)
                assert tt.value(tt.root, g0.w_prime) == root
                for (s, e, weight), v in list(edge.memo.items()):
                    part = Part(s, s + 1, () if e == line.length else (e,))
                    assert tt.value(part, weight) == v
                if root < 0:
                    continue
                rec = reconstruct(edge, line)
                trec = reconstruct_tree(tt)
                assert tuple(trec.weights[v] for v in range(1, g0.size)) == rec.weights
                region = rec.weights[line.x:line.x + line.region]
                w_highway = lift([Fraction(v) * params.scale_factor for v in region], wr.trace, pad=0)
                w_tree = tuple(
                    sum(trec.weights[e] for e in run) * tollbooth_scale(params) / wrt.scale for run in g0.edge_runs
                )
                assert w_tree == tuple(v * ratio for v in w_highway)
                draws += 1
    assert draws > 0


# ---- 9 ---------------------------------------------------------------------------

@pytest.mark.criterion(9)
def test_maxfs_interval_guarantee(half):
    rho = half.rho
    checked = 0
    for seed in range(24):
        inst = generate_maxfs(1 + seed % 3, 1 + (seed // 3) % 3, 4, 500 + seed)
        assert inst.n <= 3 and inst.m <= 3 and inst.l_max <= 4
        report = run_maxfs(inst, half)
        if "pre_finalization" in report.diagnostics:
            pre = [Fraction(v) for v in report.diagnostics["pre_finalization"]]
            pre_values = row_values(inst, pre)
            for j in report.rows:
                row = inst.rows[j]
                assert Fraction(row.lower) / rho <= pre_values[j] <= rho * row.upper
        final_values = row_values(inst, report.weights)
        for j in report.rows:
            row = inst.rows[j]
            assert row.lower <= final_values[j] <= rho * rho * row.upper
        relaxed, _, _ = exact_maxfs(inst, rho=rho)
        assert report.value == weighted_count(inst, report.rows)
        assert report.value <= relaxed
        checked += 1
    assert checked >= 20


# ---- 10 --------------------------------------------------------------------------

@pytest.mark.criterion(10)
def test_maxfs_table_dominates_induced_dissection(half):
    checked = 0
    for seed in range(24):
        inst = generate_maxfs(1 + seed % 3, 1 + (seed // 3) % 3, 4, 700 + seed)
        if inst.l_max == 0:
            continue
        unit, _ = reduce_weights(inst, half.epsilon)
        _, witness, _ = exact_maxfs(inst)
        assert all(v.denominator == 1 for v in witness)
        w_opt = [int(v) for v in witness]
        total = sum(w_opt)
        w_star = 1
        while w_star < total:
            w_star *= half.gamma
        for y in half.y_values():
            phi = maxfs_root_value(unit, w_star, y, half)
            for x in range(0, w_star * half.base_weight(y) - total + 1):
                count, realizable = induced_count(unit, w_opt, x, y, half, w_star=w_star)
                assert realizable
                assert phi >= count, (seed, x, y, phi, count)
        checked += 1
    assert checked >= 20


# ---- 11 --------------------------------------------------------------------------

def _stable_report(path) -> str:
    """The report text up to the volatile field, which is serialized last."""
    text = path.read_text()
    assert list(json.loads(text))[-1] == "volatile"
    return text[:text.index('"volatile"')]


@pytest.mark.criterion(11)
@pytest.mark.parametrize("algo,payload,extra", [
    ("highway", {"kind": "highway", "n": 1, "drivers": [{"left": 1, "right": 1, "budget": "7/2"}]},
     ["--mode", "randomized", "--seed", "11"]),
    ("highway", {"kind": "highway", "n": 1, "drivers": [{"left": 1, "right": 1, "budget": 3}]}, []),
    ("tollbooth", {"kind": "tollbooth", "nodes": 2, "edges": [[1, 2]], "source": 1,
                   "drivers": [{"u": 1, "v": 2, "budget": 3}]}, ["--gamma", "2"]),
    ("maxfs", {"kind": "maxfs", "n": 2, "rows": [{"left": 1, "right": 2, "lower": 2, "upper": 3, "profit": 1}]},
     ["--mode", "randomized", "--seed", "5"]),
])
def test_reports_are_reproducible(tmp_path, algo, payload, extra):
    src = tmp_path / "in.json"
    src.write_text(json.dumps(payload))
    texts = []
    for k in range(2):
        out = tmp_path / f"out{k}.json"
        assert main(["solve", str(src), "--algo", algo, "--out", str(out)] + extra) == 0
        texts.append(_stable_report(out))
    assert texts[0] == texts[1]
    config = json.loads((tmp_path / "out0.json").read_text())["config"]
    assert config["seed"] == (int(extra[extra.index("--seed") + 1]) if "--seed" in extra else 0)
