"""Latent-state decoding: event-time states, interior interpolation, and
aggregation across posterior draws.

Event-time states come from a Viterbi pass over the same interval log terms
the marginal likelihood uses. Between two events the state at an interior
time t is chosen by a grid argmax of

    mu_z(t) * exp(-(W_left(z, t) + W_right(z, t)))

where mu_z(t) is the endpoint-pinned bridge probability of state z at t and
the W terms are the bridge-weighted integrated intensities of the two
sub-intervals obtained by splitting at t, each pinned to the candidate
state z at the split. The exponential factor is the no-event weight of the
interval under that pinning, so a state that would force a high intensity
over a long gap with no events is penalized; this is what pushes decoded
switches away from events into the silent stretch. A pointwise grid argmax
is robust to the non-monotone Hawkes intensity within an interval and is
validated against a finer grid in the tests.

Ties always break toward state 0, the conservative label. The tail after
the last event has no right endpoint; the same construction applies with a
free right end (the bridge becomes a one-sided forward law).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ctmc import transition_terms
from .errors import ValidationError
from .events import EventSequence
from .hawkes import excitation_at_events
from .likelihood import QuadratureRule, _log_initial, default_quadrature, interval_log_terms
from .model import MmhpParams

DEFAULT_POINTS_PER_INTERVAL = 50
MAX_POINTS_PER_INTERVAL = 200


@dataclass(frozen=True)
class DecodedTrajectory:
    """Event-time states plus an interpolated piecewise-constant path.

    grid_times cover [0, T]; freq_state1 carries the across-draw frequency of
    state 1 at each grid point (all 0/1 for a single decode) and feeds the
    uncertainty band around the voted path.
    """

    event_states: np.ndarray
    grid_times: np.ndarray
    grid_states: np.ndarray
    freq_state1: np.ndarray
    T: float

    def __post_init__(self):
        for name in ("event_states", "grid_states"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=int))
        for name in ("grid_times", "freq_state1"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        object.__setattr__(self, "T", float(self.T))
        if self.grid_times.size != self.grid_states.size or self.grid_times.size != self.freq_state1.size:
            raise ValidationError("grid arrays must share a length")
        if self.grid_times.size and (self.grid_times[0] != 0.0 or self.grid_times[-1] != self.T):
            raise ValidationError("grid must cover [0, T]")
        if np.any((self.freq_state1 < 0) | (self.freq_state1 > 1)):
            raise ValidationError("state-1 frequencies must lie in [0,1]")

    def as_step(self) -> tuple[np.ndarray, np.ndarray, float]:
        """Collapse the grid to (breakpoints, states, T) with runs merged."""
        keep = np.concatenate(([True], self.grid_states[1:] != self.grid_states[:-1]))
        return self.grid_times[keep], self.grid_states[keep], self.T

    def state_at(self, t: float) -> int:
        idx = np.searchsorted(self.grid_times, t, side="right") - 1
        return int(self.grid_states[max(idx, 0)])


def viterbi(
    theta: MmhpParams,
    seq: EventSequence,
    quad: QuadratureRule | None = None,
) -> np.ndarray:
    """Most probable embedded-state sequence (length M+1, including time 0).

    Scores are the interval log terms plus the initial-state masses; when the
    window extends past the last event the tail term (marginalized over the
    terminal state) is added before the final argmax, matching the forward
    likelihood's treatment.
    """
    L, L_tail = interval_log_terms(theta, seq, quad)
    M = seq.M
    v = np.array(_log_initial(theta.delta0))
    back = np.empty((M, 2), dtype=int)
    for m in range(M):
        cand = v[:, None] + L[m]  # [from, to]
        back[m] = np.argmax(cand, axis=0)
        v = cand[back[m], (0, 1)]
    if L_tail is not None:
        v = v + np.logaddexp(L_tail[:, 0], L_tail[:, 1])
    path = np.empty(M + 1, dtype=int)
    path[M] = int(np.argmax(v))
    for m in range(M - 1, -1, -1):
        path[m] = back[m, path[m + 1]]
    return path


def _bridge_weight(theta, dt, lam1, pa, pb, weights):
    """Quadrature of sum_z lambda(z,u) mu_z(u) over pinned sub-intervals.

    dt: (G,) sub-interval lengths; lam1: (G, N) active intensity at the
    nodes; pa/pb: (G, N, 2) probabilities into and out of the interior state,
    whose product normalized over the interior state gives the bridge
    occupancy. Zero-probability pinnings contribute weight 0 here and are
    ruled out by a -inf log mu upstream.
    """
    denom = np.sum(pa * pb, axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = pa[..., 0] * pb[..., 0] / denom
        mu1 = pa[..., 1] * pb[..., 1] / denom
    integrand = theta.lambda0 * mu0 + lam1 * mu1
    integrand = np.where(denom > 0, integrand, 0.0)
    return dt * np.sum(weights * integrand, axis=1)


def _interval_grid(a: float, b: float, grid_step: float | None) -> np.ndarray:
    """Grid over [a, b): left endpoint included, right endpoint excluded."""
    gap = b - a
    if grid_step is None:
        n = DEFAULT_POINTS_PER_INTERVAL
    else:
        n = int(math.ceil(gap / grid_step))
    n = min(max(n, 1), MAX_POINTS_PER_INTERVAL)
    return a + gap * np.arange(n) / n


def _decode_interval(theta, quad, a, b, za, zb, base_exc, grid):
    """Pointwise argmax of log mu_z(t) - W(z, t) on the interior grid.

    zb None means a free right end (the tail after the last event): the
    endpoint pinning and the right sub-integral then use the one-sided
    forward law instead of a bridge.
    """
    gen = theta.gen
    tau = grid - a          # offsets of grid points
    rem = b - grid
    dt_total = b - a
    P_at = transition_terms(gen, tau)          # (G, 2, 2)
    P_after = transition_terms(gen, rem)
    with np.errstate(divide="ignore", invalid="ignore"):
        if zb is None:
            log_mu = np.log(np.maximum(P_at[:, za, :], 0.0))
        else:
            denom = transition_terms(gen, np.asarray(dt_total))[za, zb]
            log_mu = np.log(np.maximum(P_at[:, za, :] * P_after[:, :, zb] / denom, 0.0))

    x, wts = quad.nodes, quad.weights
    exc_at_grid = base_exc * np.exp(-theta.beta * tau)
    offs_l = tau[:, None] * x                  # nodes of the left piece [a, t]
    offs_r = rem[:, None] * x                  # nodes of the right piece [t, b]
    TT_l = transition_terms(gen, offs_l)       # (G, N, 2, 2)
    TT_lr = transition_terms(gen, tau[:, None] - offs_l)
    TT_r = transition_terms(gen, offs_r)
    TT_rr = transition_terms(gen, rem[:, None] - offs_r)
    lam1_l = theta.lambda1 + theta.alpha * base_exc * np.exp(-theta.beta * offs_l)
    lam1_r = theta.lambda1 + theta.alpha * exc_at_grid[:, None] * np.exp(-theta.beta * offs_r)
    ones = np.ones_like(TT_rr[..., 0])

    scores = np.empty((grid.size, 2))
    for z in (0, 1):
        # left piece pinned (za -> z), right piece pinned (z -> zb)
        w_left = _bridge_weight(theta, tau, lam1_l, TT_l[:, :, za, :], TT_lr[:, :, :, z], wts)
        pb_r = ones if zb is None else TT_rr[:, :, :, zb]
        w_right = _bridge_weight(theta, rem, lam1_r, TT_r[:, :, z, :], pb_r, wts)
        scores[:, z] = log_mu[:, z] - (w_left + w_right)
    # argmax with ties toward state 0
    states = (scores[:, 1] > scores[:, 0]).astype(int)
    if grid.size and tau[0] == 0.0:
        states[0] = za
    return states


def interpolate_trajectory(
    theta: MmhpParams,
    seq: EventSequence,
    path: np.ndarray,
    grid_step: float | None = None,
    quad: QuadratureRule | None = None,
) -> DecodedTrajectory:
    """Fill in the decoded state between events on a time grid.

    grid_step=None uses 50 points per inter-event interval; explicit steps
    are capped at 200 points per interval. Grid construction depends only on
    the event times, so trajectories decoded from different posterior draws
    share grids and can be voted pointwise.
    """
    if grid_step is not None and grid_step <= 0:
        raise ValidationError(f"grid_step must be positive, got {grid_step}")
    path = np.asarray(path, dtype=int)
    if path.size != seq.M + 1:
        raise ValidationError("path must hold one state per event plus the initial state")
    quad = quad or default_quadrature()
    R = excitation_at_events(seq.times, theta.beta)
    knots = np.concatenate(([0.0], seq.times))
    all_times = []
    all_states = []
    for m in range(seq.M):
        a, b = knots[m], knots[m + 1]
        base_exc = 0.0 if m == 0 else R[m - 1] + 1.0
        grid = _interval_grid(a, b, grid_step)
        states = _decode_interval(theta, quad, a, b, path[m], path[m + 1], base_exc, grid)
        all_times.append(grid)
        all_states.append(states)
    if seq.T > knots[-1]:
        base_exc = (R[-1] + 1.0) if seq.M else 0.0
        grid = _interval_grid(knots[-1], seq.T, grid_step)
        states = _decode_interval(theta, quad, knots[-1], seq.T, path[-1], None, base_exc, grid)
        all_times.append(grid)
        all_states.append(states)
    all_times.append(np.array([seq.T]))
    final_state = path[-1] if seq.T == knots[-1] else all_states[-1][-1]
    all_states.append(np.array([final_state]))
    grid_times = np.concatenate(all_times)
    grid_states = np.concatenate(all_states)
    return DecodedTrajectory(path, grid_times, grid_states,
                             grid_states.astype(float), seq.T)


def majority_vote(trajectories: list[DecodedTrajectory]) -> DecodedTrajectory:
    """Pointwise modal state over decodes that share a grid.

    Exact 50/50 ties go to state 0. The stored state-1 frequencies give the
    uncertainty band around the voted path.
    """
    if not trajectories:
        raise ValidationError("majority_vote needs at least one trajectory")
    ref = trajectories[0]
    for t in trajectories[1:]:
        if t.grid_times.shape != ref.grid_times.shape or np.any(t.grid_times != ref.grid_times):
            raise ValidationError("trajectories must share an identical grid")
        if t.event_states.size != ref.event_states.size:
            raise ValidationError("trajectories must decode the same events")
    grid_freq = np.mean([t.grid_states for t in trajectories], axis=0)
    grid_states = (grid_freq > 0.5).astype(int)
    event_freq = np.mean([t.event_states for t in trajectories], axis=0)
    event_states = (event_freq > 0.5).astype(int)
    return DecodedTrajectory(event_states, ref.grid_times, grid_states, grid_freq, ref.T)
