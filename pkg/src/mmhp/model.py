"""Full parameter set for the modulated process."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ctmc import Generator
from .errors import ValidationError
from .hawkes import HawkesParams

PARAM_NAMES = ("lambda0", "lambda1", "alpha", "beta", "delta0", "q0", "q1")


@dataclass(frozen=True)
class MmhpParams:
    """Inactive-state rate, active-state Hawkes kernel, initial law, and
    switching rates.

    lambda0 must stay below the Hawkes baseline lambda1; the two states are
    not identifiable otherwise.
    """

    lambda0: float
    hawkes: HawkesParams
    delta0: float  # probability of starting in state 0
    gen: Generator

    def __post_init__(self):
        object.__setattr__(self, "lambda0", float(self.lambda0))
        object.__setattr__(self, "delta0", float(self.delta0))
        if not (math.isfinite(self.lambda0) and self.lambda0 > 0):
            raise ValidationError(f"lambda0 must be positive and finite, got {self.lambda0}")
        if self.lambda0 >= self.hawkes.lambda1:
            raise ValidationError(
                f"lambda0={self.lambda0} must be below lambda1={self.hawkes.lambda1}"
            )
        if not (0.0 < self.delta0 < 1.0):
            raise ValidationError(f"delta0 must lie in (0,1), got {self.delta0}")

    @property
    def lambda1(self) -> float:
        return self.hawkes.lambda1

    @property
    def alpha(self) -> float:
        return self.hawkes.alpha

    @property
    def beta(self) -> float:
        return self.hawkes.beta

    @property
    def q0(self) -> float:
        return self.gen.q0

    @property
    def q1(self) -> float:
        return self.gen.q1

    @classmethod
    def from_dict(cls, d: dict) -> "MmhpParams":
        missing = [k for k in PARAM_NAMES if k not in d]
        if missing:
            raise ValidationError(f"missing parameters: {missing}")
        return cls(
            lambda0=d["lambda0"],
            hawkes=HawkesParams(d["lambda1"], d["alpha"], d["beta"]),
            delta0=d["delta0"],
            gen=Generator(q0=d["q0"], q1=d["q1"]),
        )

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}
