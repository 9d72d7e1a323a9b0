"""Exact solvers for tiny instances, used as ground truth.

Every oracle checks its :class:`OracleBounds` first and raises
:class:`OracleRefusal` rather than returning a partial answer.

Highway and tree oracles search integer weights ``0..floor(b_max)`` per edge
after multiplying all budgets by their common denominator; with integral
budgets some optimum is integral and no edge of an optimum needs more than
the largest budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import floor, lcm

from .instance import HighwayInstance, require_valid
from .maxfs import MaxFSInstance, require_maxfs
from .tollbooth import TreeInstance, require_tree


class OracleRefusal(Exception):
    """The instance is larger than the oracle is allowed to handle."""


@dataclass(frozen=True)
class OracleBounds:
    """Size caps; the defaults keep every oracle call within a few seconds.

    ``max_evaluations`` caps the number of weight vectors (or subsets) tried
    and ``max_states`` the sweep's state count per edge.
    """

    max_edges: int = 6
    max_drivers: int = 10
    max_budget: int = 64
    max_evaluations: int = 500_000
    max_states: int = 200_000
    max_rows: int = 14

    def __post_init__(self) -> None:
        for name in ("max_edges", "max_drivers", "max_budget", "max_evaluations", "max_states", "max_rows"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class OracleResult:
    value: Fraction
    weights: tuple[Fraction, ...]
    satisfied: frozenset[int]


def _common_scale(budgets) -> int:
    return lcm(*(Fraction(b).denominator for b in budgets)) if budgets else 1


def _check_size(n_edges: int, m: int, top: int, bounds: OracleBounds) -> None:
    if n_edges > bounds.max_edges:
        raise OracleRefusal(f"{n_edges} edges exceeds the oracle limit {bounds.max_edges}")
    if m > bounds.max_drivers:
        raise OracleRefusal(f"{m} drivers exceeds the oracle limit {bounds.max_drivers}")
    if top > bounds.max_budget:
        raise OracleRefusal(f"scaled budget {top} exceeds the oracle limit {bounds.max_budget}")
    if (top + 1) ** n_edges > bounds.max_evaluations:
        raise OracleRefusal(f"{(top + 1) ** n_edges} weight vectors exceeds {bounds.max_evaluations}")


def _search(n_edges: int, paths, budgets, bounds: OracleBounds) -> OracleResult:
    """Lexicographically least maximizer over integer weights on the scaled budgets."""
    scale = _common_scale(budgets)
    scaled = [int(b * scale) for b in budgets]
    top = max(scaled, default=0)
    _check_size(n_edges, len(paths), top, bounds)
    best, best_w = -1, None
    for w in product(range(top + 1), repeat=n_edges):
        value = 0
        for path, b in zip(paths, scaled):
            wd = sum(w[i] for i in path)
            if wd <= b:
                value += wd
        if value > best:
            best, best_w = value, w
    weights = tuple(Fraction(x, scale) for x in best_w)
    satisfied = frozenset(
        j for j, (path, b) in enumerate(zip(paths, budgets)) if sum(weights[i] for i in path) <= b
    )
    return OracleResult(Fraction(best, scale), weights, satisfied)


def exact_highway_bruteforce(instance: HighwayInstance, bounds: OracleBounds = OracleBounds()) -> OracleResult:
    require_valid(instance)
    paths = [range(d.left - 1, d.right) for d in instance.drivers]
    return _search(instance.n_edges, paths, [d.budget for d in instance.drivers], bounds)


def exact_highway_sweep(instance: HighwayInstance, bounds: OracleBounds = OracleBounds()) -> Fraction:
    """Left-to-right DP; the state holds each open driver's weight so far, capped at budget + 1."""
    require_valid(instance)
    budgets = [d.budget for d in instance.drivers]
    scale = _common_scale(budgets)
    scaled = [int(b * scale) for b in budgets]
    top = max(scaled, default=0)
    if instance.n_edges > bounds.max_edges:
        raise OracleRefusal(f"{instance.n_edges} edges exceeds the oracle limit {bounds.max_edges}")
    if instance.m > bounds.max_drivers or top > bounds.max_budget:
        raise OracleRefusal("instance exceeds the sweep limits")
    drivers = instance.drivers
    states: dict[tuple[int, ...], int] = {(): 0}
    open_now: list[int] = []
    for e in range(1, instance.n_edges + 1):
        starting = [j for j, d in enumerate(drivers) if d.left == e]
        nxt_open = open_now + starting
        closing = {j for j in nxt_open if drivers[j].right == e}
        keep = [j for j in nxt_open if j not in closing]
        new: dict[tuple[int, ...], int] = {}
        for state, value in states.items():
            acc = dict(zip(open_now, state))
            for j in starting:
                acc[j] = 0
            for w in range(top + 1):
                gained = value
                for j in closing:
                    wd = acc[j] + w
                    if wd <= scaled[j]:
                        gained += wd
                key = tuple(min(acc[j] + w, scaled[j] + 1) for j in keep)
                if new.get(key, -1) < gained:
                    new[key] = gained
        if len(new) > bounds.max_states:
            raise OracleRefusal(f"sweep state space {len(new)} exceeds {bounds.max_states}")
        states, open_now = new, keep
    return Fraction(max(states.values()), scale)


def exact_tollbooth(tree: TreeInstance, bounds: OracleBounds = OracleBounds()) -> OracleResult:
    require_tree(tree, max(tree.theta, 2))
    paths = [tree.path_edges(d.u, d.v) for d in tree.drivers]
    return _search(len(tree.edges), paths, [d.budget for d in tree.drivers], bounds)


# ---- MaxFS -------------------------------------------------------------------

def _difference_feasible(n: int, rows, lows, highs):
    """Prefix sums p_0..p_n, non-decreasing, with lows[j] <= p_r - p_{l-1} <= highs[j].

    Bellman-Ford on the constraint graph; returns the potentials or ``None``
    when a negative cycle proves infeasibility.
    """
    edges = []            # (u, v, c) encodes p_v - p_u <= c
    for i in range(1, n + 1):
        edges.append((i, i - 1, Fraction(0)))         # p_{i-1} - p_i <= 0
    for r, lo, hi in zip(rows, lows, highs):
        a, b = r.left - 1, r.right
        edges.append((a, b, hi))                      # p_b - p_a <= hi
        edges.append((b, a, -lo))                     # p_a - p_b <= -lo
    dist = [Fraction(0)] * (n + 1)
    for _ in range(n + 1):
        changed = False
        for u, v, c in edges:
            if dist[u] + c < dist[v]:
                dist[v] = dist[u] + c
                changed = True
        if not changed:
            return [d - dist[0] for d in dist]
    return None


def exact_maxfs(instance: MaxFSInstance, bounds: OracleBounds = OracleBounds(), rho=1):
    """Best row subset whose relaxed system ``lower/rho <= a_j^T w <= rho*upper`` is feasible.

    Subsets are tried by decreasing total profit, ties by lexicographic row
    tuple.  Returns ``(value, witness weights, rows)``.
    """
    require_maxfs(instance)
    rho = Fraction(rho)
    if rho < 1:
        raise ValueError("relaxation factor must be >= 1")
    m = instance.m
    if m > bounds.max_rows or 2 ** m > bounds.max_evaluations:
        raise OracleRefusal(f"{m} rows exceeds the subset oracle limit {bounds.max_rows}")
    if instance.n > bounds.max_edges:
        raise OracleRefusal(f"{instance.n} columns exceeds the oracle limit {bounds.max_edges}")
    subsets = []
    for k in range(m + 1):
        for combo in combinations(range(m), k):
            subsets.append((-sum((instance.rows[j].profit for j in combo), Fraction(0)), combo))
    subsets.sort()
    for neg_value, combo in subsets:
        rows = [instance.rows[j] for j in combo]
        pot = _difference_feasible(
            instance.n, rows, [r.lower / rho for r in rows], [r.upper * rho for r in rows]
        )
        if pot is not None:
            w = tuple(pot[i] - pot[i - 1] for i in range(1, instance.n + 1))
            return -neg_value, w, frozenset(combo)
    raise AssertionError("the empty row set is always feasible")
