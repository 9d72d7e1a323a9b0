"""Maximum feasible subsystem for interval matrices, with relaxed bounds.

Rows are intervals of columns with integer bounds ``lower <= a_j^T w <=
upper`` and a profit.  Profits are rounded to small integers and every row
is replicated once per profit unit, so the table maximizes a plain count.
Weights stay integral (no unit expansion); instead every column, plus one
dummy column at each end, becomes ``D`` parallel unit edges so that
breakpoints have room between any two row endpoints.  Paths that contain
no row are cut from the recursion with value 0.

The returned ``w`` satisfies ``lower <= a_j^T w <= rho**2 * upper`` for
every returned row, where ``rho = (delta + 2) / delta``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Sequence

from .dissection.base import INFEASIBLE, weak_compositions
from .dissection.params import Params
from .dissection.reconstruct import reconstruct
from .dissection.solver import MODES, w_star_guesses
from .dissection.table import NEG, CompressedTable
from .instance import (
    InternalConsistencyError,
    InvalidInput,
    _int_field,
    as_rational,
    format_rational,
)
from .wellround import TrivialInstance, check_epsilon


@dataclass(frozen=True)
class Row:
    left: int
    right: int
    lower: int
    upper: int
    profit: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "profit", as_rational(self.profit))


@dataclass(frozen=True)
class MaxFSInstance:
    n: int
    rows: tuple[Row, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def l_max(self) -> int:
        return max((r.lower for r in self.rows), default=0)

    @classmethod
    def from_tuples(cls, n: int, rows) -> "MaxFSInstance":
        return cls(n, tuple(Row(*r) for r in rows))


def validate_maxfs(instance: MaxFSInstance) -> list[str]:
    problems = []
    if not isinstance(instance.n, int) or instance.n < 1:
        return [f"n must be a positive integer, got {instance.n!r}"]
    for j, r in enumerate(instance.rows):
        if not 1 <= r.left <= r.right <= instance.n:
            problems.append(f"row {j}: interval [{r.left}, {r.right}] outside 1..{instance.n}")
        if not (isinstance(r.lower, int) and isinstance(r.upper, int)):
            problems.append(f"row {j}: bounds must be integers")
        elif not 0 <= r.lower <= r.upper:
            problems.append(f"row {j}: need 0 <= lower <= upper, got {r.lower}, {r.upper}")
        if r.profit < 0:
            problems.append(f"row {j}: negative profit")
    return problems


def require_maxfs(instance: MaxFSInstance) -> None:
    problems = validate_maxfs(instance)
    if problems:
        raise InvalidInput("; ".join(problems))


def row_values(instance: MaxFSInstance, w: Sequence) -> list[Fraction]:
    if len(w) != instance.n:
        raise InvalidInput(f"weight vector has length {len(w)}, expected {instance.n}")
    prefix = [Fraction(0)]
    for x in w:
        prefix.append(prefix[-1] + as_rational(x))
    return [prefix[r.right] - prefix[r.left - 1] for r in instance.rows]


def satisfied_rows(instance: MaxFSInstance, w: Sequence, low=1, high=1) -> frozenset[int]:
    """Rows with ``lower * low <= a_j^T w <= upper * high``."""
    low, high = as_rational(low), as_rational(high)
    return frozenset(
        j for j, (r, a) in enumerate(zip(instance.rows, row_values(instance, w)))
        if r.lower * low <= a <= r.upper * high
    )


def weighted_count(instance: MaxFSInstance, rows) -> Fraction:
    return sum((instance.rows[j].profit for j in rows), Fraction(0))


def maxfs_to_dict(instance: MaxFSInstance) -> dict:
    return {
        "kind": "maxfs",
        "n": instance.n,
        "rows": [
            {"left": r.left, "right": r.right, "lower": r.lower, "upper": r.upper,
             "profit": format_rational(r.profit)}
            for r in instance.rows
        ],
    }


def maxfs_from_dict(data: dict) -> MaxFSInstance:
    if data.get("kind") != "maxfs":
        raise InvalidInput(f"expected kind 'maxfs', got {data.get('kind')!r}")
    rows = tuple(
        Row(_int_field(r, "left"), _int_field(r, "right"), _int_field(r, "lower"), _int_field(r, "upper"),
            as_rational(r.get("profit", 1)))
        for r in data.get("rows", [])
    )
    instance = MaxFSInstance(_int_field(data, "n"), rows)
    require_maxfs(instance)
    return instance


# ---- reductions --------------------------------------------------------------

@dataclass(frozen=True)
class ProfitMap:
    scale: Fraction
    units: tuple[int, ...]       # integer profit of each original row
    origin: tuple[int, ...]      # replicated row -> original row


def reduce_weights(instance: MaxFSInstance, eps) -> tuple[MaxFSInstance, ProfitMap]:
    """Round profits to integers in ``0..m/eps`` and replicate rows per unit."""
    eps = check_epsilon(eps)
    require_maxfs(instance)
    v_max = max((r.profit for r in instance.rows), default=Fraction(0))
    if v_max == 0:
        raise TrivialInstance("all profits are zero")
    scale = Fraction(instance.m) / eps / v_max
    units = tuple(floor(r.profit * scale) for r in instance.rows)
    rows, origin = [], []
    for j, (r, k) in enumerate(zip(instance.rows, units)):
        for _ in range(k):
            rows.append(Row(r.left, r.right, r.lower, r.upper, Fraction(1)))
            origin.append(j)
    return MaxFSInstance(instance.n, tuple(rows)), ProfitMap(scale, units, tuple(origin))


@dataclass(frozen=True)
class WellRoundedMaxFS:
    """Columns duplicated ``duplication`` times, framed by one dummy column on each side.

    In the bounding line every column, the dummies included, is a run of
    ``duplication`` unit edges; ``edge_count`` counts the dummies once,
    as columns.
    """

    instance: MaxFSInstance
    duplication: int

    @property
    def region_edges(self) -> int:
        return self.instance.n * self.duplication

    @property
    def edge_count(self) -> int:
        return self.region_edges + 2

    def column_run(self, col: int) -> range:
        """G0 edges of column ``col`` (0 and n+1 are the dummies)."""
        return range(col * self.duplication, (col + 1) * self.duplication)


def well_round_maxfs(instance: MaxFSInstance, eps, ell: int, m: int | None = None, gamma: int | None = None) -> WellRoundedMaxFS:
    eps = check_epsilon(eps)
    if gamma is None:
        inv = int(1 / eps)
        gamma = inv ** inv
    m = instance.m if m is None else m
    if ell < 1 or m < 1:
        raise InvalidInput(f"duplication needs ell >= 1 and m >= 1, got ell={ell}, m={m}")
    return WellRoundedMaxFS(instance, gamma * ell * m)


def lift_maxfs(w: Sequence[int], wrm: WellRoundedMaxFS) -> tuple[Fraction, ...]:
    """Original column weight = sum over its duplicates; dummy columns are dropped."""
    d = wrm.duplication
    expected = (wrm.instance.n + 2) * d
    if len(w) != expected:
        raise InvalidInput(f"weight vector has length {len(w)}, expected {expected}")
    return tuple(Fraction(sum(w[c * d:(c + 1) * d])) for c in range(1, wrm.instance.n + 1))


# ---- the table ---------------------------------------------------------------

class IntegerRules:
    """Integer edge weights, count objective and relaxed interval tests."""

    def __init__(self, params: Params):
        self.gamma = params.gamma
        self.delta = params.delta
        self.rho = params.rho

    def min_len(self, weight: int, c: int) -> int:
        return 1

    def clamp(self, weight: int, c: int) -> int:
        """Edges beyond this many in one block never change a value at ``weight``.

        One block hosts at most gamma-1 cuts per level: the two end pieces
        continue as blocks one level down and the middle pieces are
        row-free parts needing one edge each.
        """
        k = 1
        while weight > c:
            weight //= self.gamma
            k = 2 * k + self.gamma - 2
        return k

    def credit(self, child_weight: int, n: int, bounds) -> int:
        lower, upper = bounds
        return 1 if Fraction(lower) / self.rho <= child_weight * n <= upper else 0

    def truncate(self) -> bool:
        return True

    def base(self, caps, rows, c: int):
        best, best_counts = -1, None
        for counts in weak_compositions(c, [None] * len(caps)):
            value = 0
            for lo, hi, (lower, upper) in rows:
                a = sum(counts[lo:hi + 1])
                if Fraction(lower) / self.rho <= a <= upper:
                    value += 1
            if value > best:
                best, best_counts = value, counts
        if best_counts is None:
            return INFEASIBLE, None
        return best, best_counts

    def place(self, length: int, count: int) -> list[int]:
        return [count] + [0] * (length - 1)


@dataclass(frozen=True)
class MaxFSLine:
    """Bounding line ``[dummy][columns][dummy]``, each column ``duplication`` edges."""

    y: int
    w_star: int
    ell: int
    base_weight: int
    w_prime: int
    duplication: int
    n_columns: int
    drivers: tuple[tuple[int, int, tuple[int, int]], ...]   # 0-based G0 edges, (lower, upper)
    gamma: int

    @property
    def x(self) -> int:
        return self.duplication

    @property
    def right_free(self) -> int:
        return self.duplication

    @property
    def length(self) -> int:
        return (self.n_columns + 2) * self.duplication

    def level_weight(self, q: int) -> int:
        return self.base_weight * self.gamma ** (self.ell - q)


def levels_for(w_prime: int, gamma: int) -> int:
    ell, v = 0, 1
    while v < w_prime:
        v *= gamma
        ell += 1
    return max(ell, 1)


def bound_maxfs(unit: MaxFSInstance, w_star: int, y: int, params: Params) -> tuple[WellRoundedMaxFS, MaxFSLine]:
    from .dissection.table import gamma_log

    ell = gamma_log(w_star, params.gamma)
    c = params.base_weight(y)
    wrm = well_round_maxfs(unit, params.epsilon, levels_for(w_star * c, params.gamma), gamma=params.gamma)
    d = wrm.duplication
    drivers = tuple((r.left * d, (r.right + 1) * d - 1, (r.lower, r.upper)) for r in unit.rows)
    line = MaxFSLine(y, w_star, ell, c, w_star * c, d, unit.n, drivers, params.gamma)
    return wrm, line


def maxfs_table(unit: MaxFSInstance, line: MaxFSLine, params: Params) -> CompressedTable:
    """Compressed table over the column segments of ``unit`` stretched by the duplication."""
    cuts = {1, unit.n + 1}
    for r in unit.rows:
        cuts.update((r.left, r.right + 1))
    starts = sorted(cuts)
    seg_len = [(b - a) * line.duplication for a, b in zip(starts, starts[1:])]
    first = {a: i for i, a in enumerate(starts[:-1])}
    last = {b - 1: i for i, b in enumerate(starts[1:])}
    seg_drivers = [(first[r.left], last[r.right], (r.lower, r.upper)) for r in unit.rows]
    return CompressedTable(None, params, line, seg_len=seg_len, seg_drivers=seg_drivers, rules=IntegerRules(params))


# ---- the algorithm -------------------------------------------------------------

@dataclass
class MaxFSReport:
    weights: tuple[Fraction, ...]
    rows: frozenset[int]
    value: Fraction
    violation: Fraction
    achieved: tuple[Fraction, ...]
    diagnostics: dict


def _draw(instance: MaxFSInstance, unit: MaxFSInstance, pmap: ProfitMap, w_star: int, y: int, params: Params):
    wrm, line = bound_maxfs(unit, w_star, y, params)
    table = maxfs_table(unit, line, params)
    root = table._value(0, line.length, line.w_prime)
    if root == NEG:
        return None
    rec = reconstruct(table, line, budgets=False)
    rho = params.rho
    prefix = [0]
    for v in rec.weights:
        prefix.append(prefix[-1] + v)
    credited = {r.driver for r in rec.records}
    for node in rec.nodes:
        if node.weight == line.base_weight and not node.breakpoints and not table.truncated(node.start, node.end):
            count = 0
            for j, (l, r, (lower, upper)) in enumerate(line.drivers):
                if l >= node.start and r < node.end:
                    a = prefix[r + 1] - prefix[l]
                    if Fraction(lower) / rho <= a <= upper:
                        credited.add(j)
                        count += 1
            if count != node.value:
                raise InternalConsistencyError(f"bottom path [{node.start},{node.end}) counts {count}, table {node.value}")
    for j in credited:
        l, r, (lower, upper) = line.drivers[j]
        a = prefix[r + 1] - prefix[l]
        if not Fraction(lower) / rho <= a <= rho * upper:
            raise InternalConsistencyError(f"credited row {j} misses its relaxed interval ({a})")
    pre = lift_maxfs(rec.weights, wrm)
    rows = satisfied_rows(instance, pre, 1 / rho, rho)
    return {
        "apx_d": root,
        "pre": pre,
        "rows": rows,
        "value": weighted_count(instance, rows),
        "credited": sorted({pmap.origin[j] for j in credited}),
    }


def run_maxfs(instance: MaxFSInstance, params: Params, mode: str = "derandomized", seed: int = 0) -> MaxFSReport:
    """Weights and a row set meeting ``lower <= a_j^T w <= rho**2 * upper`` for every returned row."""
    if mode not in MODES:
        raise InvalidInput(f"unknown mode {mode!r}; choose from {MODES}")
    require_maxfs(instance)
    rho = params.rho
    violation = rho * rho
    diagnostics: dict = {"params": params.to_dict(), "mode": mode, "seed": seed, "rho": format_rational(rho)}
    zero = tuple(Fraction(0) for _ in range(instance.n))
    try:
        if instance.l_max == 0:
            raise TrivialInstance("every lower bound is zero")
        unit, pmap = reduce_weights(instance, params.epsilon)
    except TrivialInstance as exc:
        rows = satisfied_rows(instance, zero)
        diagnostics["trivial"] = str(exc)
        return MaxFSReport(zero, rows, weighted_count(instance, rows), violation, tuple(row_values(instance, zero)), diagnostics)

    rng = random.Random(seed)
    ys = list(params.y_values())
    draws, best = [], None
    for ell, w_star in enumerate(w_star_guesses(instance.n * instance.l_max, params.gamma)):
        grid = ys if mode == "derandomized" else [rng.choice(ys)]
        for y in grid:
            result = _draw(instance, unit, pmap, w_star, y, params)
            entry = {"ell": ell, "w_star": w_star, "y": y, "apx_d": None, "value": None}
            if result is not None:
                entry.update(apx_d=result["apx_d"], value=format_rational(result["value"]))
                if best is None or result["value"] > best[1]["value"]:
                    best = (entry, result)
            draws.append(entry)
    diagnostics.update(
        profit_scale=format_rational(pmap.scale), unit_rows=unit.m, draws=draws,
    )
    if best is None:
        rows = satisfied_rows(instance, zero)
        diagnostics["trivial"] = "no feasible table root"
        return MaxFSReport(zero, rows, weighted_count(instance, rows), violation, tuple(row_values(instance, zero)), diagnostics)
    entry, result = best
    diagnostics["best"] = dict(entry)
    diagnostics["credited"] = result["credited"]
    final = tuple(v * rho for v in result["pre"])
    rows = result["rows"]
    achieved = row_values(instance, final)
    for j in rows:
        r = instance.rows[j]
        if not r.lower <= achieved[j] <= violation * r.upper:
            raise InternalConsistencyError(f"row {j} misses its final interval ({achieved[j]})")
    diagnostics["pre_finalization"] = [format_rational(v) for v in result["pre"]]
    return MaxFSReport(final, rows, weighted_count(instance, rows), violation, tuple(achieved), diagnostics)


# ---- the dissection induced by an exact solution --------------------------------

def induced_count(unit: MaxFSInstance, w_opt: Sequence[int], x: int, y: int, params: Params, w_star: int | None = None):
    """Good-and-satisfied count of the truncated dissection induced by ``w_opt``.

    ``w_opt`` is an integer solution on the columns of ``unit``.  Each column
    becomes ``w`` unit edges (one zero edge when ``w = 0``), the left dummy
    carries ``x`` units and the right dummy the rest of ``W'``.  Returns
    ``(count, realizable)``, where ``realizable`` says that no column is cut
    into more pieces than the duplication provides.
    """
    w_opt = [int(v) for v in w_opt]
    total = sum(w_opt)
    if w_star is None:
        w_star = 1
        while w_star < total:
            w_star *= params.gamma
    c = params.base_weight(y)
    w_prime = w_star * c
    right = w_prime - total - x
    if x < 0 or right < 0:
        raise InvalidInput(f"pad split x={x} does not fit W'={w_prime} with total {total}")
    wrm, line = bound_maxfs(unit, w_star, y, params)

    # unit line: (column, weight) per unit edge; dummy columns are 0 and n+1
    cols, weights = [], []
    for col, amount in [(0, x)] + [(i + 1, v) for i, v in enumerate(w_opt)] + [(unit.n + 1, right)]:
        if amount == 0:
            cols.append(col)
            weights.append(0)
        else:
            cols.extend([col] * amount)
            weights.extend([1] * amount)
    first_of = {}
    last_of = {}
    for pos, col in enumerate(cols):
        first_of.setdefault(col, pos)
        last_of[col] = pos
    drivers = []
    satisfied = []
    pre = [0]
    for v in w_opt:
        pre.append(pre[-1] + v)
    for r in unit.rows:
        drivers.append((first_of[r.left], last_of[r.right], (r.lower, r.upper)))
        satisfied.append(r.lower <= pre[r.right] - pre[r.left - 1] <= r.upper)
    good = [d for d, ok in zip(drivers, satisfied) if ok]

    def walk(start: int, end: int, weight: int) -> int:
        inside = [(l, r, b) for l, r, b in good if l >= start and r < end]
        if not any(l >= start and r < end for l, r, _ in drivers):
            return 0
        if weight == c:
            return len(inside)
        cw = weight // params.gamma
        parts = _induced_parts(weights, start, end, cw, params.gamma)
        n_good = 0
        for l, r, _ in inside:
            n = sum(1 for p, q in parts if p >= l and q <= r + 1)
            single = any(p <= l and q >= r + 1 for p, q in parts)
            if not single and n >= params.delta:
                n_good += 1
        return n_good + sum(walk(p, q, cw) for p, q in parts)

    count = walk(0, len(cols), w_prime)
    realizable = all(v <= wrm.duplication for v in _column_pieces(cols, weights, w_prime, c, params, drivers).values())
    return count, realizable


def _induced_parts(weights, start: int, end: int, cw: int, gamma: int):
    """Cut after the first unit edge reaching each multiple of ``cw``."""
    cuts, run = [start], 0
    for pos in range(start, end):
        run += weights[pos]
        if run == cw * len(cuts) and len(cuts) < gamma:
            cuts.append(pos + 1)
    cuts.append(end)
    parts = list(zip(cuts, cuts[1:]))
    if len(parts) != gamma or any(q <= p for p, q in parts):
        raise InternalConsistencyError(f"unit path [{start},{end}) does not split into {gamma} parts")
    return parts


def _column_pieces(cols, weights, w_prime, c, params, drivers):
    """How many dissection pieces touch each column, over the whole truncated dissection."""
    pieces: dict[int, int] = {}

    def walk(start, end, weight):
        if not any(l >= start and r < end for l, r, _ in drivers) or weight == c:
            for col in set(cols[start:end]):
                pieces[col] = pieces.get(col, 0) + 1
            return
        for p, q in _induced_parts(weights, start, end, weight // params.gamma, params.gamma):
            walk(p, q, weight // params.gamma)

    walk(0, len(cols), w_prime)
    return pieces


def maxfs_root_value(unit: MaxFSInstance, w_star: int, y: int, params: Params) -> int:
    """phi(G0, W') for one guess and base weight; ``-1`` when infeasible."""
    _, line = bound_maxfs(unit, w_star, y, params)
    table = maxfs_table(unit, line, params)
    return table._value(0, line.length, line.w_prime)


def maxfs_report_dict(report: MaxFSReport) -> dict:
    return {
        "weights": [format_rational(v) for v in report.weights],
        "rows": sorted(report.rows),
        "value": format_rational(report.value),
        "violation": format_rational(report.violation),
        "achieved": [format_rational(v) for v in report.achieved],
    }
