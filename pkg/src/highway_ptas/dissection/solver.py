"""The highway approximation scheme: guess, bound, tabulate, reconstruct, scale, lift."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from ..instance import (
    HighwayInstance,
    InternalConsistencyError,
    InvalidInput,
    SolveReport,
    format_rational,
    profit,
    require_valid,
    satisfied_set,
)
from ..wellround import TrivialInstance, WellRoundedInstance, expand_weights, lift, well_round
from .base import INFEASIBLE, base_profit
from .params import Params
from .reconstruct import check_scaled_good_drivers, reconstruct
from .table import NEG, BoundedLine, CompressedTable, EdgeTable, bound, good_driver_term

MODES = ("randomized", "derandomized")
BACKENDS = ("compressed", "edge")


def w_star_guesses(n_bar: int, gamma: int) -> list[int]:
    """Powers of gamma up to and including the first one that is >= n_bar."""
    out = [1]
    while out[-1] < n_bar:
        out.append(out[-1] * gamma)
    return out


def zero_report(instance: HighwayInstance, reason: str) -> SolveReport:
    w = tuple(Fraction(0) for _ in range(instance.n_edges))
    return SolveReport(w, Fraction(0), satisfied_set(instance, w), {"trivial": reason})


def make_table(wr: WellRoundedInstance, params: Params, backend: str):
    if backend == "compressed":
        shared = CompressedTable(wr, params)
        return lambda line: shared.bind(line)
    if backend == "edge":
        return lambda line: EdgeTable(line, params)
    raise InvalidInput(f"unknown backend {backend!r}; choose from {BACKENDS}")


def evaluate_draw(instance: HighwayInstance, wr: WellRoundedInstance, table, line: BoundedLine, params: Params):
    """Run reconstruction, scaling and lifting for one bounded line.

    Returns ``None`` if the root is infeasible, otherwise a dict with the
    table value, the lifted weights and their true profit.
    """
    root = table._value(0, line.length, line.w_prime)
    if root == NEG:
        return None
    rec = reconstruct(table, line)
    scale = params.scale_factor
    check_scaled_good_drivers(rec, line, scale)
    region = rec.weights[line.x:line.x + line.region]
    lifted = lift([Fraction(v) * scale for v in region], wr.trace, pad=0)
    return {
        "apx_d": root,
        "weights": lifted,
        "profit": profit(instance, lifted),
        "w_prime": rec.weights,
        "records": rec.records,
    }


def run_hptas(
    instance: HighwayInstance,
    params: Params,
    mode: str = "derandomized",
    seed: int = 0,
    backend: str = "compressed",
) -> SolveReport:
    """Best lifted solution over all W* guesses and the (x, y) draws of ``mode``.

    Every draw is evaluated by its true profit on the original instance; the
    first draw reaching the maximum wins.  ``diagnostics['draws']`` lists
    every evaluated draw in enumeration order.
    """
    if mode not in MODES:
        raise InvalidInput(f"unknown mode {mode!r}; choose from {MODES}")
    require_valid(instance)
    try:
        wr = well_round(instance, params.epsilon)
    except TrivialInstance as exc:
        return zero_report(instance, str(exc))

    table_for = make_table(wr, params, backend)
    rng = random.Random(seed)
    ys = list(params.y_values())
    guesses, draws = [], []
    best = None
    for ell, w_star in enumerate(w_star_guesses(wr.base.n_edges, params.gamma)):
        if mode == "derandomized":
            grid = [(x, y) for y in ys for x in range(1, w_star + 1)]
        else:
            x = rng.randint(1, w_star)
            y = rng.choice(ys)
            grid = [(x, y)]
        table = None
        for x, y in grid:
            line = bound(wr, w_star, x, y, params)
            table = table_for(line)
            result = evaluate_draw(instance, wr, table, line, params)
            entry = {"ell": ell, "w_star": w_star, "x": x, "y": y}
            if result is None:
                entry.update(apx_d=None, profit=None)
            else:
                entry.update(apx_d=result["apx_d"], profit=format_rational(result["profit"]))
                if best is None or result["profit"] > best[1]["profit"]:
                    best = (entry, result)
            draws.append(entry)
        guesses.append({
            "ell": ell,
            "w_star": w_star,
            "table_entries": table.entry_count() if table else 0,
            "feasible_entries": table.feasible_count() if table else 0,
        })

    diagnostics = {
        "params": params.to_dict(),
        "mode": mode,
        "seed": seed,
        "backend": backend,
        "rounding": wr.trace.to_dict(),
        "guesses": guesses,
        "draws": draws,
    }
    if best is None:
        raise InternalConsistencyError("no guess produced a feasible table root")
    entry, result = best
    diagnostics["best"] = dict(entry)
    weights = result["weights"]
    return SolveReport(weights, result["profit"], satisfied_set(instance, weights), diagnostics)


# ---- oracle-guided dissection -------------------------------------------------

def padded_optimum(wr: WellRoundedInstance, w_opt: Sequence[int], x: int, y: int, params: Params):
    """Bounded line for the smallest admissible W* and the padded 0/1 optimum on it."""
    region = expand_weights(w_opt, wr)
    total = sum(region)
    w_star = 1
    while w_star < total:
        w_star *= params.gamma
    line = bound(wr, w_star, x, y, params)
    dummy = [1] * (w_star - total) + [0] * (line.dummy - (w_star - total))
    full = [1] * line.x + list(region) + dummy + [1] * line.right
    if sum(full) != line.w_prime:
        raise InvalidInput(f"padded optimum carries {sum(full)}, expected {line.w_prime}")
    return line, tuple(full)


def optimal_dissection_value(
    wr: WellRoundedInstance,
    w_opt: Sequence[int],
    x: int,
    y: int,
    params: Params,
) -> int:
    """Value of the dissection induced by an optimum ``w_opt`` (integer weights per original edge).

    Paths are split at the first edge where the running weight reaches each
    multiple of ``W/gamma``; only drivers satisfied by ``w_opt`` earn credit,
    and bottom-level paths are solved exactly for those drivers.
    """
    rounded = [int(v) for v in w_opt]
    e = wr.trace.expansion
    pre = [0]
    for v in rounded:
        pre.append(pre[-1] + v)
    satisfied = []
    for d in wr.base.drivers:
        lo, hi = (d.left - 1) // e, d.right // e
        satisfied.append(pre[hi] - pre[lo] <= d.budget)
    line, full = padded_optimum(wr, rounded, x, y, params)
    drivers = [drv for drv, ok in zip(line.drivers, satisfied) if ok]
    return _induced_value(full, 0, line.length, line.w_prime, line, drivers, params)


def _induced_value(full, start, end, weight, line: BoundedLine, drivers, params: Params) -> int:
    if weight == line.base_weight:
        local = [(l - start, r - start, b) for l, r, b in drivers if l >= start and r < end]
        value, _ = base_profit(end - start, weight, local)
        if value is INFEASIBLE:
            raise InternalConsistencyError(f"induced bottom path [{start},{end}) is too short")
        return value
    cw = weight // params.gamma
    cuts, run = [start], 0
    for pos in range(start, end):
        run += full[pos]
        if run == cw * len(cuts) and len(cuts) < params.gamma:
            cuts.append(pos + 1)
    cuts.append(end)
    parts = list(zip(cuts, cuts[1:]))
    if len(parts) != params.gamma:
        raise InternalConsistencyError(f"path [{start},{end}) does not carry {weight}")
    term, _ = good_driver_term(parts, start, end, cw, drivers, params.delta)
    return term + sum(_induced_value(full, p, q, cw, line, drivers, params) for p, q in parts)
