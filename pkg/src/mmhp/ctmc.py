"""Two-state continuous-time Markov chain algebra.

State 0 is the inactive regime, state 1 the active one. Internally every
matrix and vector is indexed with row/column 0 = state 0 and 1 = state 1.
(Displays elsewhere sometimes list state 1 first; keeping the indexing
explicit here avoids silent transpositions.) q0 is the rate of leaving
state 0, q1 the rate of leaving state 1, so the generator in this layout is

    Q = [[-q0,  q0],
         [ q1, -q1]]

and the transition matrix has the closed form, with s = q0 + q1,

    P00(t) = (q1 + q0 e^{-st}) / s     P01(t) = q0 (1 - e^{-st}) / s
    P10(t) = q1 (1 - e^{-st}) / s      P11(t) = (q0 + q1 e^{-st}) / s

For s*t large the exponential underflows to zero and the rows land on the
stationary distribution (q1/s, q0/s); no NaNs are produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Generator:
    """Leaving rates of the two-state chain (per unit time)."""

    q0: float
    q1: float

    def __post_init__(self):
        for name in ("q0", "q1"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive and finite, got {v}")

    @property
    def stationary(self) -> np.ndarray:
        """Stationary distribution (pi_0, pi_1)."""
        s = self.q0 + self.q1
        return np.array([self.q1 / s, self.q0 / s])


@dataclass(frozen=True)
class LatentTrajectory:
    """Piecewise-constant chain path on [0, T].

    states[k] holds on [jumps[k-1], jumps[k]) with jumps[-1] := 0; the final
    state holds up to T. Consecutive states must differ.
    """

    initial_state: int
    jumps: np.ndarray
    states: np.ndarray
    T: float

    def __post_init__(self):
        jumps = np.asarray(self.jumps, dtype=float)
        states = np.asarray(self.states, dtype=int)
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "initial_state", int(self.initial_state))
        if self.initial_state not in (0, 1):
            raise ValidationError("initial_state must be 0 or 1")
        if self.T <= 0:
            raise ValidationError("trajectory horizon must be positive")
        if states.size != jumps.size + 1:
            raise ValidationError("need len(states) == len(jumps) + 1")
        if states[0] != self.initial_state:
            raise ValidationError("states[0] must equal initial_state")
        if jumps.size:
            if jumps[0] <= 0 or jumps[-1] >= self.T:
                raise ValidationError("jump times must lie strictly inside (0, T)")
            if np.any(np.diff(jumps) <= 0):
                raise ValidationError("jump times must be strictly increasing")
        if np.any(states[1:] == states[:-1]):
            raise ValidationError("consecutive segment states must differ")
        if not np.all((states == 0) | (states == 1)):
            raise ValidationError("states must be 0 or 1")

    @property
    def n_jumps(self) -> int:
        return int(self.jumps.size)

    def state_at(self, t: float) -> int:
        """State just after time t (paths are right-continuous)."""
        if t < 0 or t > self.T:
            raise ValidationError(f"time {t} outside [0, {self.T}]")
        return int(self.states[np.searchsorted(self.jumps, t, side="right")])

    def as_step(self) -> tuple[np.ndarray, np.ndarray, float]:
        """(breakpoints, states, T) with breakpoints[0] = 0."""
        return np.concatenate(([0.0], self.jumps)), self.states.copy(), self.T

    def occupancy(self, state: int) -> float:
        """Total time spent in `state` over [0, T]."""
        bounds = np.concatenate(([0.0], self.jumps, [self.T]))
        lengths = np.diff(bounds)
        return float(lengths[self.states == state].sum())


def transition_matrix(gen: Generator, t: float) -> np.ndarray:
    """P(t) as a 2x2 array, rows indexed by the current state (0 then 1)."""
    if t < 0 or not math.isfinite(t):
        raise ValidationError(f"elapsed time must be finite and >= 0, got {t}")
    s = gen.q0 + gen.q1
    e = math.exp(-s * t) if s * t < 745.0 else 0.0
    return np.array(
        [
            [(gen.q1 + gen.q0 * e) / s, gen.q0 * (1.0 - e) / s],
            [gen.q1 * (1.0 - e) / s, (gen.q0 + gen.q1 * e) / s],
        ]
    )


def transition_terms(gen: Generator, t) -> np.ndarray:
    """Vectorized transition probabilities, shape (..., 2, 2).

    Same entries as transition_matrix but for an array of elapsed times;
    used by the likelihood code, which evaluates P at many gaps at once.
    """
    t = np.asarray(t, dtype=float)
    s = gen.q0 + gen.q1
    e = np.exp(-np.minimum(s * t, 745.0))
    e = np.where(s * t >= 745.0, 0.0, e)
    out = np.empty(t.shape + (2, 2))
    out[..., 0, 0] = (gen.q1 + gen.q0 * e) / s
    out[..., 0, 1] = gen.q0 * (1.0 - e) / s
    out[..., 1, 0] = gen.q1 * (1.0 - e) / s
    out[..., 1, 1] = (gen.q0 + gen.q1 * e) / s
    return out


def ctmc_loglik(traj: LatentTrajectory, delta0: float, gen: Generator) -> float:
    """Log-density of a full chain path.

    delta0 is the probability of starting in state 0. The density is the
    initial-state mass, an Exp(q) factor per completed sojourn, and the
    survival of the final segment to T.
    """
    if not (0.0 < delta0 < 1.0):
        raise ValidationError(f"delta0 must lie in (0,1), got {delta0}")
    rates = np.array([gen.q0, gen.q1])
    logp = math.log(delta0) if traj.initial_state == 0 else math.log(1.0 - delta0)
    bounds = np.concatenate(([0.0], traj.jumps, [traj.T]))
    durations = np.diff(bounds)
    seg_rates = rates[traj.states]
    # completed sojourns contribute rate * exp(-rate * d); the last only survival
    logp += float(np.sum(np.log(seg_rates[:-1]))) - float(np.sum(seg_rates * durations))
    return logp


def sample_ctmc(delta0: float, gen: Generator, T: float, rng: np.random.Generator) -> LatentTrajectory:
    """Draw a chain path on [0, T]; deterministic given the rng state."""
    if not (0.0 <= delta0 <= 1.0):
        raise ValidationError(f"delta0 must lie in [0,1], got {delta0}")
    if not (T > 0 and math.isfinite(T)):
        raise ValidationError(f"horizon must be positive and finite, got {T}")
    rates = (gen.q0, gen.q1)
    state = 0 if rng.uniform() < delta0 else 1
    initial = state
    jumps, states = [], [state]
    t = rng.exponential(1.0 / rates[state])
    while t < T:
        state = 1 - state
        jumps.append(t)
        states.append(state)
        t += rng.exponential(1.0 / rates[state])
    return LatentTrajectory(initial, np.asarray(jumps), np.asarray(states), T)
