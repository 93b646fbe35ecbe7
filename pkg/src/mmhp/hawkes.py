"""Univariate Hawkes process with exponential kernel, plus MLE baselines.

The conditional intensity is

    lambda(t) = lambda1 + alpha * sum_{t_m < t} exp(-beta * (t - t_m))

with strict history (the jump at an event belongs to the future of that
event). Compensators and the log-likelihood follow in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import EstimationError, ValidationError
from .events import EventSequence

@dataclass(frozen=True)
class HawkesParams:
    lambda1: float  # baseline intensity, events per unit time
    alpha: float    # jump added to the intensity at each event; 0 degenerates to Poisson
    beta: float     # decay rate of a past event's influence

    def __post_init__(self):
        for name in ("lambda1", "alpha", "beta"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite, got {v}")
        if self.lambda1 <= 0 or self.beta <= 0:
            raise ValidationError("lambda1 and beta must be positive")
        if self.alpha < 0:
            raise ValidationError(f"alpha must be nonnegative, got {self.alpha}")


def excitation_at_events(times: np.ndarray, beta: float) -> np.ndarray:
    """R[m] = sum_{j<m} exp(-beta (t_m - t_j)), computed by the stable recursion
    R[m] = exp(-beta dt_m) (R[m-1] + 1)."""
    times = np.asarray(times, dtype=float)
    R = np.zeros(times.size)
    for m in range(1, times.size):
        R[m] = math.exp(-beta * (times[m] - times[m - 1])) * (R[m - 1] + 1.0)
    return R


def hawkes_intensity(p: HawkesParams, history: EventSequence, t) -> float | np.ndarray:
    """Intensity at time(s) t given events strictly before t."""
    t = np.asarray(t, dtype=float)
    past = history.times[None, :] < t.reshape(-1, 1)
    lags = t.reshape(-1, 1) - history.times[None, :]
    out = p.lambda1 + p.alpha * np.sum(np.exp(-p.beta * np.where(past, lags, np.inf)), axis=1)
    return float(out[0]) if t.ndim == 0 else out.reshape(t.shape)


def hawkes_compensator(p: HawkesParams, history: EventSequence, a: float, b: float) -> float:
    """Integrated intensity over [a, b]."""
    if a < 0 or b < a:
        raise ValidationError(f"need 0 <= a <= b, got a={a}, b={b}")
    times = history.times
    before = times[times < a]
    inside = times[(times >= a) & (times < b)]
    total = p.lambda1 * (b - a)
    if before.size:
        total += (p.alpha / p.beta) * float(
            np.sum(np.exp(-p.beta * (a - before)) - np.exp(-p.beta * (b - before)))
        )
    if inside.size:
        total += (p.alpha / p.beta) * float(np.sum(1.0 - np.exp(-p.beta * (b - inside))))
    return total


def hawkes_loglik(p: HawkesParams, seq: EventSequence) -> float:
    """Sum of log-intensities at events minus the compensator over [0, T]."""
    R = excitation_at_events(seq.times, p.beta)
    log_terms = float(np.sum(np.log(p.lambda1 + p.alpha * R)))
    total = p.lambda1 * seq.T
    if seq.M:
        total += (p.alpha / p.beta) * float(np.sum(1.0 - np.exp(-p.beta * (seq.T - seq.times))))
    return log_terms - total


@dataclass(frozen=True)
class BaselineFit:
    model: str
    params: dict
    loglik: float


def fit_baseline(model: str, seq: EventSequence, rng: np.random.Generator | None = None,
                 restarts: int = 5) -> BaselineFit:
    """MLE for the homogeneous Poisson or Hawkes baselines.

    Poisson has the closed form lambda = M / T. The Hawkes likelihood is
    smooth but can be multimodal for small M, so the fit runs L-BFGS-B in
    log-parameter space from `restarts` random starts and keeps the best.
    Deterministic given `rng` (default: seeded with 0).
    """
    if model == "poisson":
        if seq.M < 1:
            raise EstimationError("poisson fit needs at least 1 event")
        lam = seq.M / seq.T
        return BaselineFit("poisson", {"lambda": lam}, seq.M * math.log(lam) - lam * seq.T)

    if model != "hawkes":
        raise ValidationError(f"unknown baseline model {model!r}")
    if seq.M < 2:
        raise EstimationError("hawkes fit needs at least 2 events")
    rng = rng if rng is not None else np.random.default_rng(0)

    def neg_loglik(log_params):
        lam1, alpha, beta = np.exp(log_params)
        try:
            return -hawkes_loglik(HawkesParams(lam1, alpha, beta), seq)
        except (OverflowError, FloatingPointError):
            return np.inf

    rate = seq.M / seq.T
    starts = [np.log([rate, rate, 2.0 * rate])]
    for _ in range(restarts - 1):
        starts.append(np.log([rate, rate, 2.0 * rate]) + rng.normal(0.0, 1.0, size=3))
    best = None
    for x0 in starts:
        res = minimize(neg_loglik, x0, method="L-BFGS-B",
                       bounds=[(-30, 30)] * 3, options={"ftol": 1e-12, "gtol": 1e-10})
        if best is None or res.fun < best.fun:
            best = res
    lam1, alpha, beta = np.exp(best.x)
    if alpha >= beta:
        warnings.warn(
            f"fitted Hawkes is non-stationary (alpha={alpha:.4g} >= beta={beta:.4g})",
            stacklevel=2,
        )
    return BaselineFit("hawkes", {"lambda1": lam1, "alpha": alpha, "beta": beta}, -best.fun)
