"""Highway instances, exact profit evaluation and instance file I/O.

Edges are numbered 1..n and a driver covers the closed edge range
``[left, right]``.  Everything is exact: budgets and weights are
:class:`fractions.Fraction` (plain ``int`` is accepted on input).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

Rational = Fraction
WeightAssignment = tuple  # tuple[Fraction, ...], one entry per edge


class InvalidInput(ValueError):
    """Raised when an instance, weight vector or parameter violates a precondition."""


class InternalConsistencyError(RuntimeError):
    """Raised when a solver detects a broken internal invariant."""


def as_rational(value: Any) -> Fraction:
    """Convert ``int``, ``Fraction`` or a ``"p/q"`` / integer string to a Fraction.

    Floats are rejected on purpose.
    """
    if isinstance(value, bool):
        raise InvalidInput(f"boolean is not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise InvalidInput(f"only integer or p/q literals are accepted, got {value!r}")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"malformed rational literal {value!r}") from exc
    raise InvalidInput(f"unsupported rational value {value!r} ({type(value).__name__})")


def format_rational(value: Fraction | int) -> int | str:
    """Integers serialize as JSON ints, everything else as a ``"p/q"`` string."""
    value = Fraction(value)
    if value.denominator == 1:
        return value.numerator
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Driver:
    left: int
    right: int
    budget: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "budget", as_rational(self.budget))

    def edges(self) -> range:
        return range(self.left, self.right + 1)


@dataclass(frozen=True)
class HighwayInstance:
    n_edges: int
    drivers: tuple[Driver, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "drivers", tuple(self.drivers))

    @property
    def m(self) -> int:
        return len(self.drivers)

    @classmethod
    def from_tuples(cls, n: int, drivers: Iterable[tuple[int, int, Any]]) -> "HighwayInstance":
        return cls(n, tuple(Driver(l, r, b) for l, r, b in drivers))


@dataclass(frozen=True)
class Segment:
    first: int
    length: int
    drivers: frozenset[int]

    @property
    def last(self) -> int:
        return self.first + self.length - 1


@dataclass(frozen=True)
class SegmentStructure:
    boundaries: tuple[int, ...]
    segments: tuple[Segment, ...]

    def segment_of(self, edge: int) -> int:
        for idx, seg in enumerate(self.segments):
            if seg.first <= edge <= seg.last:
                return idx
        raise InvalidInput(f"edge {edge} outside the segment structure")


@dataclass
class SolveReport:
    """Outcome of a solver run, always expressed on the original instance."""

    weights: WeightAssignment
    profit: Fraction
    satisfied: frozenset[int]
    diagnostics: dict[str, Any] = field(default_factory=dict)
    volatile: dict[str, Any] = field(default_factory=dict)


def validate(instance: HighwayInstance) -> list[str]:
    """Return a list of invariant violations; an empty list means the instance is ok."""
    problems: list[str] = []
    if not isinstance(instance.n_edges, int) or instance.n_edges < 1:
        problems.append(f"n_edges must be a positive integer, got {instance.n_edges!r}")
        return problems
    for j, d in enumerate(instance.drivers):
        if d.left < 1:
            problems.append(f"driver {j}: left={d.left} < 1")
        if d.right < d.left:
            problems.append(f"driver {j}: right={d.right} < left={d.left}")
        if d.right > instance.n_edges:
            problems.append(f"driver {j}: right={d.right} > n_edges={instance.n_edges}")
        if d.budget < 0:
            problems.append(f"driver {j}: negative budget {d.budget}")
    return problems


def require_valid(instance: HighwayInstance) -> None:
    problems = validate(instance)
    if problems:
        raise InvalidInput("; ".join(problems))


def check_weights(instance: HighwayInstance, w: Sequence) -> tuple[Fraction, ...]:
    if len(w) != instance.n_edges:
        raise InvalidInput(f"weight vector has length {len(w)}, expected {instance.n_edges}")
    out = tuple(as_rational(x) for x in w)
    if any(x < 0 for x in out):
        raise InvalidInput("weights must be non-negative")
    return out


def driver_weights(instance: HighwayInstance, w: Sequence[Fraction]) -> list[Fraction]:
    prefix = [Fraction(0)]
    for x in w:
        prefix.append(prefix[-1] + x)
    return [prefix[d.right] - prefix[d.left - 1] for d in instance.drivers]


def satisfied_set(instance: HighwayInstance, w: Sequence) -> frozenset[int]:
    w = check_weights(instance, w)
    return frozenset(
        j for j, (d, wd) in enumerate(zip(instance.drivers, driver_weights(instance, w))) if wd <= d.budget
    )


def profit(instance: HighwayInstance, w: Sequence) -> Fraction:
    """Sum of path weights over the drivers whose path weight fits their budget."""
    require_valid(instance)
    w = check_weights(instance, w)
    total = Fraction(0)
    for d, wd in zip(instance.drivers, driver_weights(instance, w)):
        if wd <= d.budget:
            total += wd
    return total


def segment_structure(instance: HighwayInstance) -> SegmentStructure:
    """Coarsest partition of the edges into runs covered by identical driver sets."""
    require_valid(instance)
    n = instance.n_edges
    cuts = {1, n + 1}
    for d in instance.drivers:
        cuts.add(d.left)
        cuts.add(d.right + 1)
    starts = sorted(cuts)
    segments = []
    for a, b in zip(starts, starts[1:]):
        covering = frozenset(j for j, d in enumerate(instance.drivers) if d.left <= a and b - 1 <= d.right)
        segments.append(Segment(a, b - a, covering))
    boundaries = tuple(s.first for s in segments[1:])
    return SegmentStructure(boundaries, tuple(segments))


def generate_random(n: int, m: int, max_budget: int, seed: int) -> HighwayInstance:
    """Seeded instance: left uniform on [1, n], right uniform on [left, n], integer budgets."""
    if n < 1 or m < 0 or max_budget < 0:
        raise InvalidInput(f"bad generator parameters n={n} m={m} max_budget={max_budget}")
    rng = random.Random(seed)
    drivers = []
    for _ in range(m):
        left = rng.randint(1, n)
        right = rng.randint(left, n)
        drivers.append(Driver(left, right, Fraction(rng.randint(0, max_budget))))
    return HighwayInstance(n, tuple(drivers))


# ---- JSON I/O --------------------------------------------------------------

def highway_to_dict(instance: HighwayInstance) -> dict:
    return {
        "kind": "highway",
        "n": instance.n_edges,
        "drivers": [
            {"left": d.left, "right": d.right, "budget": format_rational(d.budget)} for d in instance.drivers
        ],
    }


def _int_field(obj: dict, key: str) -> int:
    if key not in obj:
        raise InvalidInput(f"missing field {key!r}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidInput(f"field {key!r} must be an integer, got {value!r}")
    return value


def highway_from_dict(data: dict) -> HighwayInstance:
    if data.get("kind") != "highway":
        raise InvalidInput(f"expected kind 'highway', got {data.get('kind')!r}")
    drivers = tuple(
        Driver(_int_field(d, "left"), _int_field(d, "right"), as_rational(d.get("budget", 0)))
        for d in data.get("drivers", [])
    )
    instance = HighwayInstance(_int_field(data, "n"), drivers)
    require_valid(instance)
    return instance


def _reject_float(text: str):
    raise InvalidInput(f"float literal {text} not allowed; use an integer or a 'p/q' string")


def load_json(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise InvalidInput(f"instance file not found: {path}")
    try:
        with path.open(encoding="utf-8") as fh:
            return json.load(fh, parse_float=_reject_float)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: not valid JSON ({exc})") from exc


def dump_json(data: Any, path: str | Path | None = None) -> str:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
