"""Synthetic realizations of the modulated process via thinning.

Events are generated segment by segment along a chain path. Inside an
inactive segment the intensity is exactly lambda0. Inside an active segment
the Hawkes intensity only decays between events, so a bound taken at the
segment start (or just after an accepted event) dominates until the next
refresh; candidate arrivals drawn at the bound rate are accepted with
probability intensity/bound.

By default every event feeds the Hawkes history regardless of the state it
was generated in: the active-state intensity conditions on the whole event
history. history_mode="active" restricts the excitation to events generated
while active, for sensitivity analysis only.
"""

from __future__ import annotations

import math

import numpy as np

from .ctmc import LatentTrajectory, sample_ctmc
from .errors import NumericalError, ValidationError
from .events import EventSequence
from .model import MmhpParams

MAX_EVENTS = 10_000_000


class _Thinner:
    """Event generator over a sequence of constant-state segments."""

    def __init__(self, theta: MmhpParams, rng: np.random.Generator,
                 history_mode: str, max_events: int):
        if history_mode not in ("full", "active"):
            raise ValidationError(f"unknown history_mode {history_mode!r}")
        self.theta = theta
        self.rng = rng
        self.history_mode = history_mode
        self.max_events = max_events
        self.times: list[float] = []
        self.cur = 0.0
        self.exc = 0.0  # sum of exp(-beta (cur - t_j)) over contributing events

    def _decay_to(self, t: float) -> None:
        self.exc *= math.exp(-self.theta.beta * (t - self.cur))
        self.cur = t

    def run_segment(self, state: int, end: float, stop_count: int | None = None) -> bool:
        """Generate events on [cur, end) with the chain in `state`.

        Returns True if stop_count events have been accumulated in total.
        The bound is refreshed at the segment start and at every accepted
        event; between refreshes the intensity can only decay, so accepted
        candidates always satisfy intensity <= bound.
        """
        th = self.theta
        if state == 1:
            bound = th.lambda1 + th.alpha * self.exc + th.alpha
        else:
            bound = th.lambda0
        while True:
            cand = self.cur + self.rng.exponential(1.0 / bound)
            if cand >= end:
                self._decay_to(end)
                return False
            self._decay_to(cand)
            lam = th.lambda1 + th.alpha * self.exc if state == 1 else th.lambda0
            assert lam <= bound * (1.0 + 1e-12), "thinning bound violated"
            if self.rng.uniform() * bound <= lam:
                self.times.append(cand)
                if len(self.times) > self.max_events:
                    raise NumericalError(
                        f"runaway simulation: more than {self.max_events} events"
                        f" (alpha={th.alpha} vs beta={th.beta})"
                    )
                if self.history_mode == "full" or state == 1:
                    self.exc += 1.0
                if state == 1:
                    bound = th.lambda1 + th.alpha * self.exc
                if stop_count is not None and len(self.times) >= stop_count:
                    return True


def simulate_fixed_trajectory(
    theta: MmhpParams,
    traj: LatentTrajectory,
    rng: np.random.Generator,
    history_mode: str = "full",
    max_events: int = MAX_EVENTS,
) -> EventSequence:
    """Draw events conditional on a given chain path."""
    thinner = _Thinner(theta, rng, history_mode, max_events)
    bounds = np.concatenate((traj.jumps, [traj.T]))
    for state, end in zip(traj.states, bounds):
        thinner.run_segment(int(state), float(end))
    return EventSequence(np.asarray(thinner.times), traj.T)


def simulate_mmhp(
    theta: MmhpParams,
    rng: np.random.Generator,
    T: float | None = None,
    count: int | None = None,
    history_mode: str = "full",
    max_events: int = MAX_EVENTS,
) -> tuple[EventSequence, LatentTrajectory]:
    """Simulate the chain and events together.

    Stop either at a horizon T or after `count` events (exactly one must be
    given). With a count the chain is extended lazily and the horizon is set
    to the final event time.
    """
    if (T is None) == (count is None):
        raise ValidationError("give exactly one of T or count")
    if T is not None:
        traj = sample_ctmc(theta.delta0, theta.gen, T, rng)
        seq = simulate_fixed_trajectory(theta, traj, rng, history_mode, max_events)
        return seq, traj

    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    thinner = _Thinner(theta, rng, history_mode, max_events)
    rates = (theta.gen.q0, theta.gen.q1)
    state = 0 if rng.uniform() < theta.delta0 else 1
    initial = state
    jumps: list[float] = []
    states = [state]
    seg_start = 0.0
    while True:
        seg_end = seg_start + rng.exponential(1.0 / rates[state])
        done = thinner.run_segment(state, seg_end, stop_count=count)
        if done:
            break
        jumps.append(seg_end)
        state = 1 - state
        states.append(state)
        seg_start = seg_end
    horizon = thinner.times[-1]
    keep = np.searchsorted(np.asarray(jumps), horizon, side="left")
    traj = LatentTrajectory(initial, np.asarray(jumps[:keep]),
                            np.asarray(states[: keep + 1]), horizon)
    return EventSequence(np.asarray(thinner.times), horizon), traj
