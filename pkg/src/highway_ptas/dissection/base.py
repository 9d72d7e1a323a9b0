"""Bottom-level placements: 0/1 weights of a fixed total on a short path.

A path is handled as a list of blocks (runs of edges that lie in the same
set of contained drivers), so enumerating how many units each block gets is
as good as enumerating edge subsets.  Units inside a block are packed to the
left when a concrete placement is needed.
"""

from __future__ import annotations

from typing import Iterator, Sequence


class _Infeasible:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFEASIBLE"

    def __bool__(self) -> bool:
        raise TypeError("INFEASIBLE has no truth value; compare with `is INFEASIBLE`")


INFEASIBLE = _Infeasible()


def weak_compositions(total: int, caps: Sequence[int | None]) -> Iterator[tuple[int, ...]]:
    """All ways to write ``total`` as bounded non-negative parts, in lexicographic order.

    ``None`` as a cap means unbounded.
    """
    k = len(caps)
    if k == 0:
        if total == 0:
            yield ()
        return
    room_after = [0] * (k + 1)
    for i in range(k - 1, -1, -1):
        cap = caps[i]
        if room_after[i + 1] is None or cap is None:
            room_after[i] = None
        else:
            room_after[i] = room_after[i + 1] + cap
    parts = [0] * k

    def rec(i: int, left: int):
        if i == k - 1:
            if caps[i] is None or left <= caps[i]:
                parts[i] = left
                yield tuple(parts)
            return
        hi = left if caps[i] is None else min(left, caps[i])
        rest = room_after[i + 1]
        lo = 0 if rest is None else max(0, left - rest)
        for v in range(lo, hi + 1):
            parts[i] = v
            yield from rec(i + 1, left - v)

    if room_after[0] is not None and room_after[0] < total:
        return
    yield from rec(0, total)


def block_base_profit(caps: Sequence[int], drivers: Sequence[tuple[int, int, object]], c: int):
    """Best profit of ``c`` units spread over blocks.

    ``drivers`` holds ``(first_block, last_block, budget)`` for every driver
    contained in the path.  Returns ``(value, counts)``, or ``(INFEASIBLE,
    None)`` when the blocks cannot hold ``c`` units.  Ties go to the
    lexicographically least count vector.
    """
    if sum(caps) < c:
        return INFEASIBLE, None
    prefix_needed = [(lo, hi, b) for lo, hi, b in drivers]
    best, best_counts = -1, None
    for counts in weak_compositions(c, caps):
        value = 0
        for lo, hi, b in prefix_needed:
            wd = sum(counts[lo:hi + 1])
            if wd <= b:
                value += wd
        if value > best:
            best, best_counts = value, counts
    return best, best_counts


def path_blocks(length: int, drivers: Sequence[tuple[int, int, object]]):
    """Split a path of ``length`` edges into blocks w.r.t. the drivers it contains.

    ``drivers`` use 0-based inclusive local coordinates; drivers that stick
    out of the path are ignored.  Returns ``(starts, caps, block_drivers)``.
    """
    inside = [(l, r, b) for l, r, b in drivers if 0 <= l and r < length]
    cuts = {0, length}
    for l, r, _ in inside:
        cuts.add(l)
        cuts.add(r + 1)
    starts = sorted(cuts)
    caps = [b - a for a, b in zip(starts, starts[1:])]
    index = {s: i for i, s in enumerate(starts)}
    block_drivers = [(index[l], index[r + 1] - 1, b) for l, r, b in inside]
    return starts[:-1], caps, block_drivers


def base_profit(length: int, c: int, drivers: Sequence[tuple[int, int, object]]):
    """Best 0/1 placement of exactly ``c`` units on a path of ``length`` edges.

    Returns ``(value, placement)`` with ``placement`` a 0/1 tuple, or
    ``(INFEASIBLE, None)`` when ``length < c``.
    """
    if c < 1:
        raise ValueError("base weight must be >= 1")
    if length < c:
        return INFEASIBLE, None
    starts, caps, block_drivers = path_blocks(length, drivers)
    value, counts = block_base_profit(caps, block_drivers, c)
    placement = [0] * length
    for start, k in zip(starts, counts):
        for t in range(k):
            placement[start + t] = 1
    return value, tuple(placement)
