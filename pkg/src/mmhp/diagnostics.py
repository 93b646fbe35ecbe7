"""Goodness-of-fit via time rescaling, plus latent-recovery error.

If the model and latent path are right, the integrated intensity between
consecutive events is an iid Exp(1) sample (time-rescaling theorem); the
compensator sequence therefore feeds a one-sample KS test and a QQ plot
against Exp(1). Latent recovery is scored by the total time the decoded
path disagrees with the truth.
"""

from __future__ import annotations

import math

import numpy as np

from .ctmc import LatentTrajectory
from .decoding import DecodedTrajectory
from .errors import ValidationError
from .events import EventSequence
from .hawkes import hawkes_compensator
from .model import MmhpParams

KOLMOGOROV_SERIES_TERMS = 100


def _as_step(traj) -> tuple[np.ndarray, np.ndarray, float]:
    if isinstance(traj, (LatentTrajectory, DecodedTrajectory)):
        return traj.as_step()
    raise ValidationError(f"expected a trajectory, got {type(traj).__name__}")


def _state_pieces(times: np.ndarray, states: np.ndarray, T: float, a: float, b: float):
    """Constant-state pieces covering [a, b]: yields (piece_a, piece_b, state)."""
    start_idx = np.searchsorted(times, a, side="right") - 1
    t = a
    idx = max(start_idx, 0)
    while t < b:
        nxt = times[idx + 1] if idx + 1 < times.size else T
        end = min(nxt, b)
        yield t, end, int(states[idx])
        t = end
        idx += 1


def compensators(theta: MmhpParams, seq: EventSequence, traj) -> np.ndarray:
    """Integrated intensity between consecutive events under a given path.

    traj may be a ground-truth LatentTrajectory or a DecodedTrajectory; the
    integration splits each inter-event interval at the path's switch points.
    Active pieces integrate the Hawkes intensity in closed form, inactive
    pieces contribute lambda0 times their length. Returns M values, the
    first covering (0, t_1].
    """
    times, states, T = _as_step(traj)
    if abs(T - seq.T) > 1e-9 * max(T, seq.T):
        raise ValidationError(f"trajectory horizon {T} does not match sequence horizon {seq.T}")
    knots = np.concatenate(([0.0], seq.times))
    out = np.empty(seq.M)
    for m in range(seq.M):
        total = 0.0
        for a, b, state in _state_pieces(times, states, T, knots[m], knots[m + 1]):
            if state == 1:
                total += hawkes_compensator(theta.hawkes, seq, a, b)
            else:
                total += theta.lambda0 * (b - a)
        out[m] = total
    return out


def kolmogorov_pvalue(stat: float, n: int) -> float:
    """Asymptotic KS p-value, series truncated at 100 terms."""
    y = math.sqrt(n) * stat
    if y <= 0:
        return 1.0
    total = 0.0
    for k in range(1, KOLMOGOROV_SERIES_TERMS + 1):
        total += (-1) ** (k - 1) * math.exp(-2.0 * k * k * y * y)
    return min(1.0, max(0.0, 2.0 * total))


def ks_exp1(values: np.ndarray) -> tuple[float, float]:
    """One-sample KS statistic and p-value against Exp(1)."""
    values = np.sort(np.asarray(values, dtype=float))
    n = values.size
    if n < 5:
        raise ValidationError(f"KS test needs >= 5 values, got {n}")
    cdf = 1.0 - np.exp(-values)
    i = np.arange(1, n + 1)
    d = max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n))
    return float(d), kolmogorov_pvalue(float(d), n)


def qq_points(values: np.ndarray) -> np.ndarray:
    """(theoretical, empirical) Exp(1) quantile pairs, shape (n, 2)."""
    values = np.sort(np.asarray(values, dtype=float))
    n = values.size
    if n < 2:
        raise ValidationError(f"QQ plot needs >= 2 values, got {n}")
    probs = (np.arange(1, n + 1) - 0.5) / n
    return np.column_stack((-np.log1p(-probs), values))


def integrated_abs_error(truth, estimate) -> float:
    """Total time the two piecewise-constant state paths disagree.

    Symmetric in its arguments and bounded by the horizon. Accepts any mix
    of LatentTrajectory and DecodedTrajectory.
    """
    ta, sa, Ta = _as_step(truth)
    tb, sb, Tb = _as_step(estimate)
    if abs(Ta - Tb) > 1e-9 * max(Ta, Tb):
        raise ValidationError(f"horizons differ: {Ta} vs {Tb}")
    T = max(Ta, Tb)
    cuts = np.unique(np.concatenate((ta, tb, [T])))
    ia = np.searchsorted(ta, cuts[:-1], side="right") - 1
    ib = np.searchsorted(tb, cuts[:-1], side="right") - 1
    lengths = np.diff(cuts)
    return float(np.sum(lengths * (sa[ia] != sb[ib])))
