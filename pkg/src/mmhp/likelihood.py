"""Marginal likelihood of the modulated process.

Exact marginalization over the continuous-time chain is intractable, so the
computation works with the chain embedded at event times. Each inter-event
interval (z_prev at the left event, z_next at the right one) contributes

    P_{z_prev,z_next}(dt) * lambda_{z_next}(t_m)^{has_event}
        * exp(-integral_a^b sum_z lambda(z,u) mu_z(u) du)

where mu_z(u) is the probability that a chain bridge pinned to the endpoint
states occupies state z at interior time u, and lambda(1,u) is the Hawkes
intensity given the full event history while lambda(0,u) = lambda0. The
integral is evaluated by fixed Gauss-Legendre quadrature. The survival
factor is written exp(-integral); the first-order form (1 - integral) of the
same weight can go negative, so it is only available behind taylor_form and
is clamped at 1e-12.

Summing the interval terms over all 2^(M+1) embedded-state sequences gives
the marginal likelihood; forward_loglik does this in linear time with a
forward recursion, and brute_force_loglik enumerates (for small M) as an
indexing cross-check.

An observation window may extend past the last event. That event-free tail
contributes one more interval term with has_event=False, marginalized over
the terminal state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ctmc import transition_matrix, transition_terms
from .errors import NumericalError, ValidationError
from .events import EventSequence
from .hawkes import excitation_at_events
from .model import MmhpParams

TAYLOR_FLOOR = 1e-12
BRUTE_FORCE_MAX_EVENTS = 12


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on [0, 1]; weights are positive and sum to 1."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValidationError("nodes and weights must be 1-D and the same length")
        if np.any(weights <= 0):
            raise ValidationError("quadrature weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValidationError("quadrature weights must sum to 1 on [0,1]")
        if np.any(nodes < 0) or np.any(nodes > 1):
            raise ValidationError("quadrature nodes must lie in [0,1]")

    @property
    def n(self) -> int:
        return int(self.nodes.size)

    @classmethod
    def gauss_legendre(cls, n: int) -> "QuadratureRule":
        x, w = np.polynomial.legendre.leggauss(n)
        return cls((x + 1.0) / 2.0, w / 2.0)


@lru_cache(maxsize=8)
def default_quadrature(n: int = 16) -> QuadratureRule:
    return QuadratureRule.gauss_legendre(n)


def _bridge_probs(gen, z_prev: int, z_next: int, dt: float, u) -> tuple[np.ndarray, np.ndarray]:
    """(mu_0(u), mu_1(u)) for a bridge pinned to z_prev at 0 and z_next at dt."""
    u = np.asarray(u, dtype=float)
    Pa = transition_terms(gen, u)            # (..., 2, 2)
    Pb = transition_terms(gen, dt - u)
    denom = transition_matrix(gen, dt)[z_prev, z_next]
    if denom <= 0.0:
        raise NumericalError(
            f"transition probability P[{z_prev},{z_next}]({dt}) underflowed to zero"
        )
    mu0 = Pa[..., z_prev, 0] * Pb[..., 0, z_next] / denom
    mu1 = Pa[..., z_prev, 1] * Pb[..., 1, z_next] / denom
    return mu0, mu1


def bridge_state_prob(gen, z_prev: int, z_next: int, dt: float, u: float, z: int = 1) -> float:
    """P(Z(u) = z | Z(0) = z_prev, Z(dt) = z_next) for an interior offset u.

    The bridge endpoints pin the value: at u=0 it is the indicator of
    z == z_prev, at u=dt the indicator of z == z_next. The two states'
    probabilities sum to one for every u.
    """
    if not (0.0 <= u <= dt) or dt <= 0:
        raise ValidationError(f"need 0 <= u <= dt with dt > 0, got u={u}, dt={dt}")
    mu0, mu1 = _bridge_probs(gen, z_prev, z_next, dt, u)
    return float(mu1 if z == 1 else mu0)


def _interval_integrals(theta: MmhpParams, dt, start_excitation, quad: QuadratureRule):
    """Quadrature of sum_z lambda(z,u) mu_z(u) over each interval.

    dt and start_excitation are arrays over intervals; returns an array of
    shape dt.shape + (2, 2) indexed by (z_prev, z_next). Entries whose
    endpoint transition has zero probability are left at 0; the caller masks
    them with a -inf log term anyway.
    """
    dt = np.asarray(dt, dtype=float)
    g = np.asarray(start_excitation, dtype=float)
    x, w = quad.nodes, quad.weights
    offs = dt[..., None] * x                                  # (..., N)
    lam1 = theta.lambda1 + theta.alpha * g[..., None] * np.exp(-theta.beta * offs)
    Pa = transition_terms(theta.gen, offs)                    # (..., N, 2, 2)
    Pb = transition_terms(theta.gen, dt[..., None] - offs)
    Pd = transition_terms(theta.gen, dt)                      # (..., 2, 2)
    out = np.zeros(dt.shape + (2, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        for zp in (0, 1):
            for zn in (0, 1):
                denom = Pd[..., zp, zn][..., None]
                mu0 = Pa[..., :, zp, 0] * Pb[..., :, 0, zn] / denom
                mu1 = Pa[..., :, zp, 1] * Pb[..., :, 1, zn] / denom
                integrand = theta.lambda0 * mu0 + lam1 * mu1
                val = dt * np.sum(w * integrand, axis=-1)
                out[..., zp, zn] = np.where(Pd[..., zp, zn] > 0, val, 0.0)
    return out


def _survival_log_weight(integrals: np.ndarray, taylor_form: bool) -> np.ndarray:
    if taylor_form:
        return np.log(np.maximum(1.0 - integrals, TAYLOR_FLOOR))
    return -integrals


def interval_log_term(
    theta: MmhpParams,
    history: EventSequence,
    z_prev: int,
    z_next: int,
    dt: float,
    quad: QuadratureRule | None = None,
    has_event: bool = True,
    taylor_form: bool = False,
) -> float:
    """Log contribution of one inter-event interval.

    `history` holds the events up to and including the interval's left
    endpoint (the interval starts at its last event, or at 0 if empty); dt is
    the interval length and z_prev/z_next the embedded states at its ends.
    With has_event the right endpoint carries an event and contributes its
    log-intensity.
    """
    if dt <= 0:
        raise ValidationError(f"interval length must be positive, got {dt}")
    quad = quad or default_quadrature()
    if history.M:
        g = excitation_at_events(history.times, theta.beta)[-1] + 1.0
    else:
        g = 0.0
    logp = math.log(transition_matrix(theta.gen, dt)[z_prev, z_next])
    integral = _interval_integrals(theta, np.asarray(dt), np.asarray(g), quad)[z_prev, z_next]
    term = logp + float(_survival_log_weight(np.asarray(integral), taylor_form))
    if has_event:
        lam = theta.lambda0 if z_next == 0 else (
            theta.lambda1 + theta.alpha * g * math.exp(-theta.beta * dt)
        )
        term += math.log(lam)
    if math.isnan(term):
        raise NumericalError("interval term is NaN")
    return term


def interval_log_terms(
    theta: MmhpParams,
    seq: EventSequence,
    quad: QuadratureRule | None = None,
    taylor_form: bool = False,
) -> tuple[np.ndarray, np.ndarray | None]:
    """All interval log terms for a sequence.

    Returns (L, L_tail): L has shape (M, 2, 2) with L[m, z_prev, z_next] the
    term for the interval ending at event m+1; L_tail is the (2, 2) term for
    the event-free tail (t_M, T], or None when T equals the last event time.
    """
    quad = quad or default_quadrature()
    times = seq.times
    M = times.size
    R = excitation_at_events(times, theta.beta)
    lam_event = np.stack(
        [np.full(M, theta.lambda0), theta.lambda1 + theta.alpha * R], axis=-1
    )  # (M, 2)

    if M:
        dts = np.diff(times, prepend=0.0)
        G = np.concatenate(([0.0], R[:-1] + 1.0))
        with np.errstate(divide="ignore"):
            L = np.log(transition_terms(theta.gen, dts))
        L += _survival_log_weight(_interval_integrals(theta, dts, G, quad), taylor_form)
        L += np.log(lam_event)[:, None, :]
        tail_dt = seq.T - times[-1]
        tail_g = R[-1] + 1.0
    else:
        L = np.zeros((0, 2, 2))
        tail_dt = seq.T
        tail_g = 0.0

    L_tail = None
    if tail_dt > 0:
        with np.errstate(divide="ignore"):
            L_tail = np.log(transition_terms(theta.gen, np.asarray(tail_dt)))
        L_tail += _survival_log_weight(
            _interval_integrals(theta, np.asarray(tail_dt), np.asarray(tail_g), quad),
            taylor_form,
        )
    if np.isnan(L).any():
        bad = int(np.argwhere(np.isnan(L))[0, 0])
        raise NumericalError(f"non-finite interval term at interval {bad + 1}")
    if L_tail is not None and np.isnan(L_tail).any():
        raise NumericalError("non-finite interval term in the event-free tail")
    return L, L_tail


def _logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def _log_initial(delta0: float) -> tuple[float, float]:
    return math.log(delta0), math.log1p(-delta0)


def forward_loglik(
    theta: MmhpParams,
    seq: EventSequence,
    quad: QuadratureRule | None = None,
    taylor_form: bool = False,
) -> float:
    """Marginal log-likelihood by the forward recursion over embedded states."""
    L, L_tail = interval_log_terms(theta, seq, quad, taylor_form)
    a0, a1 = _log_initial(theta.delta0)
    terms = L.tolist()
    for row in terms:
        b0 = _logaddexp(a0 + row[0][0], a1 + row[1][0])
        b1 = _logaddexp(a0 + row[0][1], a1 + row[1][1])
        a0, a1 = b0, b1
    if L_tail is not None:
        t = L_tail.tolist()
        total = _logaddexp(
            a0 + _logaddexp(t[0][0], t[0][1]),
            a1 + _logaddexp(t[1][0], t[1][1]),
        )
    else:
        total = _logaddexp(a0, a1)
    if math.isnan(total):
        raise NumericalError("forward log-likelihood is NaN")
    return total


def brute_force_loglik(
    theta: MmhpParams,
    seq: EventSequence,
    quad: QuadratureRule | None = None,
    taylor_form: bool = False,
) -> float:
    """Exact enumeration over all 2^(M+1) embedded-state sequences.

    Uses the same interval terms as forward_loglik, so agreement between the
    two validates the recursion's indexing, not the terms themselves.
    Refuses sequences with more than 12 events.
    """
    scores = _enumerated_scores(theta, seq, quad, taylor_form)[1]
    hi = scores.max()
    if hi == -math.inf:
        return -math.inf
    return float(hi + math.log(np.sum(np.exp(scores - hi))))


def _enumerated_scores(theta, seq, quad=None, taylor_form=False):
    """(paths, scores) over every embedded-state assignment; paths is
    (2^(M+1), M+1) and scores the matching log joint terms."""
    M = seq.M
    if M > BRUTE_FORCE_MAX_EVENTS:
        raise ValidationError(
            f"enumeration over 2^{M + 1} embedded sequences refused (M={M} > "
            f"{BRUTE_FORCE_MAX_EVENTS})"
        )
    L, L_tail = interval_log_terms(theta, seq, quad, taylor_form)
    n_paths = 2 ** (M + 1)
    paths = (np.arange(n_paths)[:, None] >> np.arange(M + 1)) & 1
    log_init = np.array(_log_initial(theta.delta0))
    scores = log_init[paths[:, 0]].astype(float)
    for m in range(M):
        scores += L[m, paths[:, m], paths[:, m + 1]]
    if L_tail is not None:
        tail = np.logaddexp(L_tail[:, 0], L_tail[:, 1])
        scores += tail[paths[:, -1]]
    return paths, scores
