from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..instance import InvalidInput
from ..wellround import check_epsilon


@dataclass(frozen=True)
class Params:
    """Dissection constants.

    ``base_weights[y-1]`` is the weight carried by a bottom-level path when
    the draw picks ``y``; in theory it is ``(1/eps)**y``.  Any override of
    gamma, delta or the base weights voids the approximation guarantee and
    sets ``guarantee_void``.
    """

    epsilon: Fraction
    gamma: int
    delta: int
    base_weights: tuple[int, ...]
    guarantee_void: bool = False

    @classmethod
    def from_epsilon(
        cls,
        eps,
        gamma: int | None = None,
        delta: int | None = None,
        base_weights: Sequence[int] | None = None,
    ) -> "Params":
        eps = check_epsilon(eps)
        inv = int(1 / eps)
        theory_gamma = inv ** inv
        theory_delta = inv // 2
        theory_base = tuple(inv ** y for y in range(1, inv + 1))
        g = theory_gamma if gamma is None else int(gamma)
        d = theory_delta if delta is None else int(delta)
        bw = theory_base if base_weights is None else tuple(int(b) for b in base_weights)
        if g < 2:
            raise InvalidInput(f"gamma must be >= 2, got {g}")
        if d < 1:
            raise InvalidInput(f"delta must be >= 1, got {d}")
        if not bw or any(b < 1 for b in bw):
            raise InvalidInput(f"base weights must be positive integers, got {bw}")
        void = (g, d, bw) != (theory_gamma, theory_delta, theory_base)
        return cls(eps, g, d, bw, void)

    @property
    def scale_factor(self) -> Fraction:
        """Final highway scaling delta/(delta+2); equals 1/(1+4 eps) without overrides."""
        return Fraction(self.delta, self.delta + 2)

    @property
    def rho(self) -> Fraction:
        """Relaxation (delta+2)/delta used by the interval-bound variant; 1+4 eps in theory."""
        return Fraction(self.delta + 2, self.delta)

    def y_values(self) -> range:
        return range(1, len(self.base_weights) + 1)

    def base_weight(self, y: int) -> int:
        if not 1 <= y <= len(self.base_weights):
            raise InvalidInput(f"y={y} outside 1..{len(self.base_weights)}")
        return self.base_weights[y - 1]

    def to_dict(self) -> dict:
        from ..instance import format_rational

        return {
            "epsilon": format_rational(self.epsilon),
            "gamma": self.gamma,
            "delta": self.delta,
            "base_weights": list(self.base_weights),
            "guarantee_void": self.guarantee_void,
        }
