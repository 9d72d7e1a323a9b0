"""Dynamic program over the bounding line.

Two interchangeable backends compute the same table ``phi(P, W)``:

* :class:`EdgeTable` enumerates breakpoint tuples edge by edge.  It is the
  reference and only usable on short lines.
* :class:`CompressedTable` keys a path by the run of elementary segments it
  fully covers plus the driver-free capacity hanging off either end, clamped
  at the path weight (extra free edges can never change the value).  Breakpoints
  are enumerated per zone (segment interior or segment boundary) and the
  exact offsets inside a zone are optimised by a chain recursion.

Both return the same values; argmax choices may differ where values tie.
Infeasibility is the ``INFEASIBLE`` sentinel at the public surface and ``-1``
internally.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from ..instance import InternalConsistencyError, InvalidInput, segment_structure
from ..wellround import WellRoundedInstance
from .base import INFEASIBLE, block_base_profit, path_blocks
from .params import Params

NEG = -1


@dataclass(frozen=True)
class BoundedLine:
    """The highway enclosed in pads: ``[x][region][dummy][right]``, 0-based edges."""

    x: int
    y: int
    w_star: int
    ell: int
    base_weight: int
    w_prime: int
    region: int
    dummy: int
    right: int
    drivers: tuple[tuple[int, int, Fraction], ...]   # 0-based inclusive edges on G0
    gamma: int

    @property
    def length(self) -> int:
        return self.x + self.region + self.dummy + self.right

    @property
    def right_free(self) -> int:
        return self.dummy + self.right

    def level_weight(self, q: int) -> int:
        """Weight every path at depth ``q`` must carry (``w_prime`` at the root)."""
        return self.base_weight * self.gamma ** (self.ell - q)

    def to_dict(self) -> dict:
        return {
            "x": self.x, "y": self.y, "w_star": self.w_star, "ell": self.ell,
            "base_weight": self.base_weight, "w_prime": self.w_prime,
            "left_pad": self.x, "right_pad": self.right, "dummy": self.dummy,
            "length": self.length,
        }


def gamma_log(value: int, gamma: int) -> int:
    ell, v = 0, 1
    while v < value:
        v *= gamma
        ell += 1
    if v != value:
        raise InvalidInput(f"{value} is not a power of gamma={gamma}")
    return ell


def bound(wr: WellRoundedInstance, w_star: int, x: int, y: int, params: Params) -> BoundedLine:
    """Enclose the well-rounded highway: ``x`` pad edges left, the rest right.

    The right side carries the ``w_star * gamma`` dummy edges of the
    well-rounded instance followed by ``w_star * (c - 1) - x`` attached edges,
    where ``c`` is the base weight picked by ``y``.
    """
    ell = gamma_log(w_star, params.gamma)
    c = params.base_weight(y)
    if not 1 <= x <= w_star:
        raise InvalidInput(f"x={x} outside 1..{w_star}")
    right = w_star * (c - 1) - x
    if right < 0:
        raise InvalidInput(f"right pad would be negative (W*={w_star}, c={c}, x={x})")
    drivers = tuple((x + d.left - 1, x + d.right - 1, d.budget) for d in wr.base.drivers)
    line = BoundedLine(
        x=x, y=y, w_star=w_star, ell=ell, base_weight=c, w_prime=w_star * c,
        region=wr.base.n_edges, dummy=w_star * params.gamma, right=right, drivers=drivers,
        gamma=params.gamma,
    )
    return line


@dataclass
class SplitChoice:
    value: int
    breakpoints: tuple[int, ...]          # absolute G0 positions strictly inside the path
    credits: tuple[tuple[int, int], ...]  # (driver index, n_j) credited at this node


def good_driver_term(parts, start: int, end: int, child_weight: int, drivers, delta: int):
    """Good-driver term of a partition of ``[start, end)`` into absolute ``(p, q)`` parts.

    A driver inside the path is credited ``child_weight * n`` when ``n >= delta``
    parts lie inside it, the credit fits its budget, and it is not contained in
    a single part (such a driver is settled further down the recursion).
    """
    total, credits = 0, []
    for j, (l, r, b) in enumerate(drivers):
        if l < start or r >= end:
            continue
        hi = r + 1
        n = 0
        single = False
        for p, q in parts:
            if p >= l and q <= hi:
                n += 1
            if p <= l and q >= hi:
                single = True
                break
        if single or n < delta:
            continue
        if child_weight * n <= b:
            total += child_weight * n
            credits.append((j, n))
    return total, tuple(credits)


def dp_step(start: int, end: int, weight: int, child_lookup, drivers, params: Params) -> SplitChoice:
    """One D2 step by exhaustive breakpoint enumeration.

    ``child_lookup(p, q, weight)`` returns a child value or ``-1`` for
    infeasible; a ``KeyError`` from it means the table is incomplete.  The
    result value is ``-1`` when every partition has an infeasible part.
    """
    gamma = params.gamma
    if weight % gamma:
        raise InvalidInput(f"weight {weight} is not divisible by gamma={gamma}")
    cw = weight // gamma
    best = SplitChoice(NEG, (), ())
    for bps in combinations(range(start + 1, end), gamma - 1):
        cuts = (start,) + bps + (end,)
        parts = list(zip(cuts, cuts[1:]))
        if any(q - p < cw for p, q in parts):
            continue
        total = 0
        for p, q in parts:
            try:
                v = child_lookup(p, q, cw)
            except KeyError as exc:
                raise InternalConsistencyError(f"missing child entry [{p},{q}) at weight {cw}") from exc
            if v == NEG:
                break
            total += v
        else:
            term, credits = good_driver_term(parts, start, end, cw, drivers, params.delta)
            if total + term > best.value:
                best = SplitChoice(total + term, bps, credits)
    return best


class _TableBase:
    def __init__(self, line: BoundedLine, params: Params):
        self.line = line
        self.params = params
        self.gamma = params.gamma
        self.delta = params.delta

    # -- public table surface -------------------------------------------------
    def value(self, start: int, end: int, q: int):
        """phi of the G0 edge range ``[start, end)`` at level ``q``."""
        v = self._value(start, end, self.line.level_weight(q))
        return INFEASIBLE if v == NEG else v

    def root_value(self):
        return self.value(0, self.line.length, 0)

    # -- used by reconstruction ------------------------------------------------
    def split(self, start: int, end: int, weight: int) -> SplitChoice:
        raise NotImplementedError

    def base(self, start: int, end: int) -> tuple[int, tuple[int, ...]]:
        local = [(l - start, r - start, b) for l, r, b in self.line.drivers if l >= start and r < end]
        from .base import base_profit

        value, placement = base_profit(end - start, self.line.base_weight, local)
        if value is INFEASIBLE:
            raise InternalConsistencyError(f"base path [{start},{end}) is infeasible")
        return value, placement

    def _value(self, start: int, end: int, weight: int) -> int:
        raise NotImplementedError

    def truncated(self, start: int, end: int) -> bool:
        """Whether the path is cut off from the recursion (value 0, no children)."""
        return False


class EdgeTable(_TableBase):
    """Reference table: every breakpoint tuple, every edge."""

    def __init__(self, line: BoundedLine, params: Params):
        super().__init__(line, params)
        self.memo: dict[tuple[int, int, int], int] = {}
        self.argmax: dict[tuple[int, int, int], tuple[int, ...]] = {}

    def _value(self, start: int, end: int, weight: int) -> int:
        key = (start, end, weight)
        if key in self.memo:
            return self.memo[key]
        if end - start < weight:
            self.memo[key] = NEG
            return NEG
        if weight == self.line.base_weight:
            local = [(l - start, r - start, b) for l, r, b in self.line.drivers if l >= start and r < end]
            _, caps, blocks = path_blocks(end - start, local)
            v, _ = block_base_profit(caps, blocks, weight)
            v = NEG if v is INFEASIBLE else v
            self.memo[key] = v
            return v
        choice = self._best_split(start, end, weight)
        self.memo[key] = choice.value
        self.argmax[key] = choice.breakpoints
        return choice.value

    def _best_split(self, start: int, end: int, weight: int) -> SplitChoice:
        return dp_step(start, end, weight, self._value, self.line.drivers, self.params)

    def split(self, start: int, end: int, weight: int) -> SplitChoice:
        choice = self._best_split(start, end, weight)
        if choice.value == NEG:
            raise InternalConsistencyError(f"no feasible split for [{start},{end}) at weight {weight}")
        return choice

    def entry_count(self) -> int:
        return len(self.memo)

    def feasible_count(self) -> int:
        return sum(1 for v in self.memo.values() if v != NEG)


class ZeroOneRules:
    """Highway semantics: 0/1 edge weights, profit objective, budgets."""

    def __init__(self, params: Params):
        self.gamma = params.gamma
        self.delta = params.delta

    def min_len(self, weight: int, c: int) -> int:
        return weight

    def clamp(self, weight: int, c: int) -> int:
        return weight

    def credit(self, child_weight: int, n: int, budget) -> int:
        return child_weight * n if child_weight * n <= budget else 0

    def truncate(self) -> bool:
        return False

    def base(self, caps, drivers, c: int):
        return block_base_profit(caps, drivers, c)

    def place(self, length: int, count: int) -> list[int]:
        return [1] * count + [0] * (length - count)


class CompressedTable(_TableBase):
    """Segment-compressed table shared by every line built on one segment layout.

    Keys are ``(base weight, weight, left free, first segment, last segment,
    right free)``; they do not mention pad lengths, so one instance serves
    all guesses and draws with the same parameters.  ``rules`` supplies the
    weight model (see :class:`ZeroOneRules`).
    """

    def __init__(self, wr: WellRoundedInstance | None, params: Params, line=None, *,
                 seg_len=None, seg_drivers=None, rules=None):
        super().__init__(line, params)  # type: ignore[arg-type]
        if wr is not None:
            structure = segment_structure(wr.base)
            seg_len = [s.length for s in structure.segments]
            first_seg = {s.first: i for i, s in enumerate(structure.segments)}
            last_seg = {s.last: i for i, s in enumerate(structure.segments)}
            seg_drivers = [(first_seg[d.left], last_seg[d.right], d.budget) for d in wr.base.drivers]
        self.seg_len = list(seg_len)
        self.seg_drivers = list(seg_drivers)
        self.rules = rules or ZeroOneRules(params)
        self.memo: dict[tuple, int] = {}

    def bind(self, line) -> "CompressedTable":
        """Attach a bounding line; the memo is kept."""
        self.line = line
        return self

    # -- geometry -------------------------------------------------------------
    def _line_blocks(self):
        line = self.line
        blocks = []
        if line.x:
            blocks.append((line.x, None))
        for i, n in enumerate(self.seg_len):
            blocks.append((n, i))
        if line.right_free:
            blocks.append((line.right_free, None))
        return blocks

    def _key_blocks(self, cl: int, a: int, b: int, cr: int):
        blocks = []
        if cl:
            blocks.append((cl, None))
        for i in range(a, b + 1):
            blocks.append((self.seg_len[i], i))
        if cr:
            blocks.append((cr, None))
        return blocks

    @staticmethod
    def _prefix(blocks):
        prefix = [0]
        for n, _ in blocks:
            prefix.append(prefix[-1] + n)
        return prefix

    def _classify(self, blocks, prefix, p: int, q: int):
        """Describe sub-range ``[p, q)`` of a block list as ``(lc, a, b, rc)`` or ``(free_len,)``."""
        i = bisect_right(prefix, p) - 1
        j = bisect_right(prefix, q - 1) - 1
        lo = hi = None
        for k in range(i, j + 1):
            if blocks[k][1] is not None and prefix[k] >= p and prefix[k + 1] <= q:
                if lo is None:
                    lo = k
                hi = k
        if lo is None:
            return (q - p,)
        return (prefix[lo] - p, blocks[lo][1], blocks[hi][1], q - prefix[hi + 1])

    def _eval_range(self, blocks, prefix, p: int, q: int, weight: int) -> int:
        cls = self._classify(blocks, prefix, p, q)
        c = self.line.base_weight
        if len(cls) == 1:
            return 0 if cls[0] >= self.rules.min_len(weight, c) else NEG
        lc, a, b, rc = cls
        k = self.rules.clamp(weight, c)
        return self.solve(weight, min(lc, k), a, b, min(rc, k))

    def _value(self, start: int, end: int, weight: int) -> int:
        blocks = self._line_blocks()
        return self._eval_range(blocks, self._prefix(blocks), start, end, weight)

    # -- the recursion -------------------------------------------------------
    def solve(self, weight: int, cl: int, a: int, b: int, cr: int) -> int:
        c = self.line.base_weight
        key = (c, weight, cl, a, b, cr)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        blocks = self._key_blocks(cl, a, b, cr)
        total_len = sum(n for n, _ in blocks)
        if total_len < self.rules.min_len(weight, c):
            value = NEG
        elif self.rules.truncate() and not self._inside_drivers(blocks):
            value = 0
        elif weight == c:
            value = self._base(blocks)[0]
        else:
            value = self._optimize(blocks, weight, want_argmax=False)[0]
        self.memo[key] = value
        return value

    def _inside_drivers(self, blocks):
        """Drivers contained in the block list, as (local lo, local hi, payload, index)."""
        local = {seg: k for k, (_, seg) in enumerate(blocks) if seg is not None}
        out = []
        for j, (slo, shi, payload) in enumerate(self.seg_drivers):
            if slo in local and shi in local:
                out.append((local[slo], local[shi], payload, j))
        return out

    def _base(self, blocks):
        inside = self._inside_drivers(blocks)
        caps = [n for n, _ in blocks]
        v, counts = self.rules.base(caps, [(lo, hi, pay) for lo, hi, pay, _ in inside], self.line.base_weight)
        return (NEG, None) if v is INFEASIBLE else (v, counts)

    @staticmethod
    def _zones(blocks):
        """Places for breakpoints in line order: block interiors ("I") and block boundaries ("B")."""
        zones = []
        for i, (n, _) in enumerate(blocks):
            if n >= 2:
                zones.append(("I", i, n - 1))
            if i < len(blocks) - 1:
                zones.append(("B", i, 1))
        return zones

    def _optimize(self, blocks, weight: int, want_argmax: bool):
        """Best split of a block list into gamma parts.

        Breakpoint counts per zone are enumerated depth first, zone by zone,
        and the chain recursion over exact positions is extended one zone at
        a time so that distributions sharing a prefix share its work.
        """
        gamma = self.gamma
        cw = weight // gamma
        c = self.line.base_weight
        step = self.rules.min_len(cw, c)
        span = self.rules.clamp(cw, c)
        prefix = self._prefix(blocks)
        total_len = prefix[-1]
        nb = len(blocks)
        inside = self._inside_drivers(blocks)
        zones = self._zones(blocks)
        room = [0] * (len(zones) + 1)
        for z in range(len(zones) - 1, -1, -1):
            room[z] = room[z + 1] + zones[z][2]
        child_cache: dict[tuple[int, int], int] = {}

        def child(p: int, q: int) -> int:
            key = (p, q)
            v = child_cache.get(key)
            if v is None:
                v = self._eval_range(blocks, prefix, p, q, cw)
                child_cache[key] = v
            return v

        def extend(states, zone, cnt):
            kind, i, _ = zone
            if kind == "B":
                pairs = [(prefix[i + 1], prefix[i + 1])]
            else:
                pairs = self._interior_pairs(prefix[i], blocks[i][0], cnt, step, span)
            reach = {}
            for f in sorted({f for f, _ in pairs}):
                best = None
                for s, (val, _) in states.items():
                    if s >= f:
                        continue
                    cv = child(s, f)
                    if cv == NEG:
                        continue
                    if best is None or val + cv > best[0]:
                        best = (val + cv, s)
                if best is not None:
                    reach[f] = best
            new_states = {}
            for f, l in pairs:
                if f not in reach:
                    continue
                val, s = reach[f]
                cur = new_states.get(l)
                if cur is None or val > cur[0]:
                    new_states[l] = (val, (s, f))
            return new_states

        def term_of(coords):
            edges = [0] + coords + [2 * nb]
            parts = list(zip(edges, edges[1:]))
            term, credits = 0, []
            for lo, hi, payload, j in inside:
                ds, de = 2 * lo, 2 * (hi + 1)
                n, single = 0, False
                for zs, ze in parts:
                    if zs >= ds and ze <= de:
                        n += 1
                    if zs <= ds and ze >= de:
                        single = True
                        break
                if not single and n >= self.delta:
                    gain = self.rules.credit(cw, n, payload)
                    if gain:
                        term += gain
                        credits.append((j, n))
            return term, credits

        best = [NEG, None, ()]

        def rec(z, left, states, groups, trail, coords):
            if left == 0:
                final = None
                for s, (val, _) in states.items():
                    cv = child(s, total_len)
                    if cv == NEG:
                        continue
                    if final is None or val + cv > final[0]:
                        final = (val + cv, s)
                if final is None:
                    return
                term, credits = term_of(coords)
                value = final[0] + term
                if value > best[0]:
                    best[0], best[2] = value, tuple(credits)
                    if want_argmax:
                        best[1] = self._unwind(groups, trail, final[1], step)
                return
            if z == len(zones) or room[z] < left:
                return
            kind, i, cap = zones[z]
            coord = 2 * i + 1 if kind == "I" else 2 * (i + 1)
            for v in range(min(left, cap), -1, -1):
                if v == 0:
                    rec(z + 1, left, states, groups, trail, coords)
                    continue
                new_states = extend(states, zones[z], v)
                if new_states:
                    rec(z + 1, left - v, new_states, groups + [(zones[z], v)], trail + [new_states],
                        coords + [coord] * v)

        rec(0, gamma - 1, {0: (0, None)}, [], [], [])
        return best[0], best[1], best[2]

    @staticmethod
    def _interior_pairs(offset: int, length: int, cnt: int, step: int, span: int):
        """(first, last) positions of ``cnt`` cuts inside a block, one pair per clamp class.

        ``step`` is the least gap between cuts, ``span`` the length beyond
        which extra room on either side no longer matters.
        """
        if cnt == 1:
            if length - 1 <= 2 * span:
                offs = range(1, length)
            else:
                offs = list(range(1, span + 1)) + list(range(length - span, length))
            return [(offset + o, offset + o) for o in offs]
        firsts = range(1, min(span, length - 1) + 1)
        lasts = range(max(1, length - span), length)
        need = (cnt - 1) * step
        return [(offset + f, offset + l) for f in firsts for l in lasts if l - f >= need]

    @staticmethod
    def _unwind(groups, trail, last_pos, step):
        bps = []
        pos = last_pos
        for g in range(len(groups) - 1, -1, -1):
            cnt = groups[g][1]
            _, (prev, first) = trail[g][pos]
            if cnt == 1:
                bps.append([first])
            else:
                bps.append([first + t * step for t in range(cnt - 1)] + [pos])
            pos = prev
        out = []
        for chunk in reversed(bps):
            out.extend(chunk)
        return tuple(out)

    def _local(self, start: int, end: int):
        blocks = self._line_blocks()
        return self._classify(blocks, self._prefix(blocks), start, end)

    def truncated(self, start: int, end: int) -> bool:
        if not self.rules.truncate():
            return False
        cls = self._local(start, end)
        return len(cls) == 1 or not self._inside_drivers(self._key_blocks(*cls))

    def split(self, start: int, end: int, weight: int) -> SplitChoice:
        cls = self._local(start, end)
        c = self.line.base_weight
        step = self.rules.min_len(weight // self.gamma, c)
        if len(cls) == 1:
            if end - start < self.rules.min_len(weight, c):
                raise InternalConsistencyError(f"free path [{start},{end}) too short for {weight}")
            return SplitChoice(0, tuple(start + t * step for t in range(1, self.gamma)), ())
        lc, a, b, rc = cls
        # actual (unclamped) free lengths so representative offsets are real positions
        value, bps, credits = self._optimize(self._key_blocks(lc, a, b, rc), weight, want_argmax=True)
        k = self.rules.clamp(weight, c)
        expected = self.solve(weight, min(lc, k), a, b, min(rc, k))
        if value != expected or value == NEG:
            raise InternalConsistencyError(
                f"split of [{start},{end}) gives {value}, table holds {expected}"
            )
        return SplitChoice(value, tuple(start + p for p in bps), credits)

    def base(self, start: int, end: int) -> tuple[int, tuple[int, ...]]:
        cls = self._local(start, end)
        blocks = [(end - start, None)] if len(cls) == 1 else self._key_blocks(*cls)
        value, counts = self._base(blocks)
        if value == NEG:
            raise InternalConsistencyError(f"base path [{start},{end}) is infeasible")
        placement: list[int] = []
        for (n, _), k in zip(blocks, counts):
            placement.extend(self.rules.place(n, k))
        return value, tuple(placement)

    def entry_count(self) -> int:
        return len(self.memo)

    def feasible_count(self) -> int:
        return sum(1 for v in self.memo.values() if v != NEG)
