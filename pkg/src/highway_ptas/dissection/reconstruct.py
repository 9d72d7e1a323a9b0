"""Walk the table's argmax choices down to a 0/1 assignment on the bounding line."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..instance import InternalConsistencyError
from .table import NEG, BoundedLine


@dataclass(frozen=True)
class GoodDriverRecord:
    driver: int                  # index into the well-rounded driver list
    n_parts: int
    span: tuple[int, int]        # union of the parts inside the driver, as [start, end)
    credit: int
    level: int


@dataclass(frozen=True)
class DissectionNode:
    start: int
    end: int
    level: int
    weight: int
    breakpoints: tuple[int, ...]   # empty at the bottom level
    value: int                     # base profit at the bottom, credited term above


@dataclass
class Reconstruction:
    weights: tuple[int, ...]
    nodes: list[DissectionNode]
    records: list[GoodDriverRecord]
    base_paid: list[tuple[int, int]]   # (driver, weight) paid inside a bottom-level path
    value: int


def reconstruct(table, line: BoundedLine, budgets: bool = True) -> Reconstruction:
    """Materialize w' and the realized dissection for the table's root entry.

    Recomputes the root value from base placements and credits, and checks
    that it matches the table; any mismatch is an internal error.  Paths the
    table truncates keep their whole weight on their first edge.  With
    ``budgets`` off, driver payloads are not budgets and ``base_paid`` stays
    empty.
    """
    root = table._value(0, line.length, line.w_prime)
    if root == NEG:
        raise InternalConsistencyError("root entry is infeasible")
    w = [0] * line.length
    nodes: list[DissectionNode] = []
    records: list[GoodDriverRecord] = []
    base_paid: list[tuple[int, int]] = []
    rules = getattr(table, "rules", None)
    stack = [(0, line.length, 0)]
    while stack:
        start, end, q = stack.pop()
        weight = line.level_weight(q)
        if table.truncated(start, end):
            w[start] = weight
            nodes.append(DissectionNode(start, end, q, weight, (), 0))
            continue
        if weight == line.base_weight:
            value, placement = table.base(start, end)
            w[start:end] = placement
            nodes.append(DissectionNode(start, end, q, weight, (), value))
            for j, (l, r, b) in enumerate(line.drivers if budgets else ()):
                if l >= start and r < end:
                    wd = sum(placement[l - start:r - start + 1])
                    if wd <= b and wd:
                        base_paid.append((j, wd))
            continue
        choice = table.split(start, end, weight)
        cw = weight // line.gamma
        cuts = (start,) + choice.breakpoints + (end,)
        parts = list(zip(cuts, cuts[1:]))
        credited = 0
        for j, n in choice.credits:
            l, r, payload = line.drivers[j]
            inside = [(p, e) for p, e in parts if p >= l and e <= r + 1]
            gain = rules.credit(cw, n, payload) if rules else cw * n
            records.append(GoodDriverRecord(j, n, (inside[0][0], inside[-1][1]), gain, q))
            credited += gain
        nodes.append(DissectionNode(start, end, q, weight, choice.breakpoints, credited))
        for p, e in reversed(parts):
            stack.append((p, e, q + 1))

    recomputed = sum(n.value for n in nodes)
    if recomputed != root:
        raise InternalConsistencyError(f"recomputed dissection value {recomputed} != table value {root}")
    if sum(w) != line.w_prime:
        raise InternalConsistencyError(f"w' carries {sum(w)}, expected {line.w_prime}")
    nodes.sort(key=lambda n: (n.level, n.start))
    return Reconstruction(tuple(w), nodes, records, sorted(base_paid), root)


def check_scaled_good_drivers(rec: Reconstruction, line: BoundedLine, scale: Fraction) -> Fraction:
    """Check the scaled budgets of every paid driver and return the scaled paid profit.

    Raises when a recorded driver overshoots its budget after scaling or
    when the scaled paid profit drops below ``scale`` times the table value.
    """
    prefix = [0]
    for x in rec.weights:
        prefix.append(prefix[-1] + x)
    paid = Fraction(0)
    for r in rec.records:
        l, rr, b = line.drivers[r.driver]
        wd = (prefix[rr + 1] - prefix[l]) * scale
        if wd > b:
            raise InternalConsistencyError(f"good driver {r.driver} exceeds its budget after scaling")
        paid += wd
    for j, wd in rec.base_paid:
        paid += wd * scale
    if paid < rec.value * scale:
        raise InternalConsistencyError(f"scaled paid profit {paid} below {rec.value * scale}")
    return paid
