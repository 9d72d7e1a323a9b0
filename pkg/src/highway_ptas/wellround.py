"""Reduction of a highway instance to well-rounded form, and lifting back.

Budgets are scaled so the largest one equals ``m/eps**2``, drivers whose
scaled budget falls below ``1/eps`` are dropped, the rest are floored, and
each original edge becomes a run of ``m/eps**2`` unit edges.  Padding edges
(driver free) are appended later by the solver, once per guessed total.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Sequence

from .instance import (
    Driver,
    HighwayInstance,
    InvalidInput,
    as_rational,
    require_valid,
)


class TrivialInstance(Exception):
    """Signals an instance whose optimum is zero weights (no drivers or all budgets zero)."""


def check_epsilon(eps) -> Fraction:
    """Return eps as a Fraction, insisting that 1/(2 eps) is a positive integer."""
    eps = as_rational(eps)
    if eps <= 0 or eps > Fraction(1, 2):
        raise InvalidInput(f"epsilon must satisfy 0 < eps <= 1/2 and 1/(2 eps) integer, got {eps}")
    half_inv = 1 / (2 * eps)
    if half_inv.denominator != 1:
        raise InvalidInput(f"epsilon={eps}: 1/(2*epsilon) must be a positive integer")
    return eps


@dataclass(frozen=True)
class RoundingTrace:
    scale: Fraction
    discarded: frozenset[int]
    kept: tuple[int, ...]               # original driver index of each well-rounded driver
    rounded_budgets: tuple[int, ...]
    expansion: int
    epsilon: Fraction
    n_original: int
    pad: int = 0

    @property
    def expanded_edges(self) -> int:
        return self.n_original * self.expansion

    def to_dict(self) -> dict:
        from .instance import format_rational

        return {
            "scale": format_rational(self.scale),
            "discarded": sorted(self.discarded),
            "kept": list(self.kept),
            "rounded_budgets": list(self.rounded_budgets),
            "expansion": self.expansion,
            "epsilon": format_rational(self.epsilon),
            "n_original": self.n_original,
            "pad": self.pad,
        }


@dataclass(frozen=True)
class WellRoundedInstance:
    base: HighwayInstance
    trace: RoundingTrace
    origin_map: tuple[range, ...]       # original edge i (1-based) -> origin_map[i-1]


def well_round(instance: HighwayInstance, eps) -> WellRoundedInstance:
    eps = check_epsilon(eps)
    require_valid(instance)
    m = instance.m
    if m == 0:
        raise TrivialInstance("instance has no drivers")
    b_max = max(d.budget for d in instance.drivers)
    if b_max == 0:
        raise TrivialInstance("all budgets are zero")

    target = Fraction(m) / (eps * eps)
    expansion = int(target)           # integer because 1/(2 eps) is
    scale = target / b_max
    threshold = 1 / eps

    kept, discarded, budgets, drivers = [], set(), [], []
    for j, d in enumerate(instance.drivers):
        scaled = d.budget * scale
        if scaled < threshold:
            discarded.add(j)
            continue
        kept.append(j)
        budgets.append(floor(scaled))
        drivers.append(Driver((d.left - 1) * expansion + 1, d.right * expansion, Fraction(budgets[-1])))

    origin_map = tuple(range((i - 1) * expansion + 1, i * expansion + 1) for i in range(1, instance.n_edges + 1))
    base = HighwayInstance(instance.n_edges * expansion, tuple(drivers))
    trace = RoundingTrace(
        scale=scale,
        discarded=frozenset(discarded),
        kept=tuple(kept),
        rounded_budgets=tuple(budgets),
        expansion=expansion,
        epsilon=eps,
        n_original=instance.n_edges,
    )
    return WellRoundedInstance(base, trace, origin_map)


def lift(w: Sequence, trace: RoundingTrace, pad: int | None = None) -> tuple[Fraction, ...]:
    """Map weights on the expanded (+pad) edges back to the original edges.

    Each original edge receives the sum over its expanded run divided by the
    scale; anything on pad edges is dropped.
    """
    pad = trace.pad if pad is None else pad
    expected = trace.expanded_edges + pad
    if len(w) != expected:
        raise InvalidInput(f"weight vector has length {len(w)}, expected {expected}")
    w = [as_rational(x) for x in w]
    out = []
    for i in range(trace.n_original):
        run = w[i * trace.expansion:(i + 1) * trace.expansion]
        out.append(sum(run, Fraction(0)) / trace.scale)
    return tuple(out)


def rounded_instance(wr: WellRoundedInstance) -> HighwayInstance:
    """The kept drivers with rounded budgets on the original (unexpanded) edges.

    Useful for exact oracles: weights on it expand to the well-rounded
    instance without changing any driver weight.
    """
    e = wr.trace.expansion
    drivers = tuple(
        Driver((d.left - 1) // e + 1, d.right // e, d.budget) for d in wr.base.drivers
    )
    return HighwayInstance(wr.trace.n_original, drivers)


def expand_weights(w: Sequence[int], wr: WellRoundedInstance) -> tuple[int, ...]:
    """Spread integer per-original-edge weights as 0/1 units, packed leftmost in each run."""
    e = wr.trace.expansion
    out: list[int] = []
    for x in w:
        x = int(x)
        if x < 0 or x > e:
            raise InvalidInput(f"edge weight {x} does not fit a run of {e} unit edges")
        out.extend([1] * x + [0] * (e - x))
    return tuple(out)
