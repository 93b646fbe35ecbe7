"""Event-time containers and CSV ingestion.

Times are plain floats in arbitrary (but consistent) units, measured from
the start of the observation window; the window origin is time 0 and every
event must fall in (0, T]. The horizon T may extend past the last event,
so likelihood code always has to handle an event-free tail.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# Relative jitter applied to duplicate timestamps (see load_events).
JITTER_REL = 1e-9


@dataclass(frozen=True)
class EventSequence:
    """Ordered event times on (0, T] with observation horizon T."""

    times: np.ndarray
    T: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "T", float(self.T))
        if times.ndim != 1:
            raise ValidationError("event times must be a 1-D array")
        if not np.all(np.isfinite(times)):
            raise ValidationError("event times must be finite")
        if not (np.isfinite(self.T) and self.T > 0):
            raise ValidationError(f"horizon T must be positive and finite, got {self.T}")
        if times.size:
            if times[0] <= 0:
                raise ValidationError("event times must be strictly positive")
            if np.any(np.diff(times) <= 0):
                raise ValidationError("event times must be strictly increasing")
            if times[-1] > self.T:
                raise ValidationError(
                    f"last event time {times[-1]} exceeds horizon T={self.T}"
                )

    @property
    def M(self) -> int:
        return int(self.times.size)

    def prefix(self, m: int) -> "EventSequence":
        """First m events, with the horizon clipped to the m-th event time."""
        if m == 0:
            return EventSequence(np.empty(0), self.T)
        return EventSequence(self.times[:m], float(self.times[m - 1]))


@dataclass(frozen=True)
class PairEventData:
    """Event sequences for one directed pair, one per observation window.

    Windows are treated as separate, independent observation periods; times
    inside each window are relative to that window's start.
    """

    actor: str
    recipient: str
    windows: tuple = field(default_factory=tuple)  # of (window_id, EventSequence)

    def __post_init__(self):
        if self.actor == self.recipient:
            raise ValidationError(f"self-pair {self.actor!r} not allowed")
        ids = [w for w, _ in self.windows]
        if len(ids) != len(set(ids)):
            raise ValidationError(
                f"duplicate window ids for pair {self.actor}->{self.recipient}"
            )

    @property
    def total_events(self) -> int:
        return sum(seq.M for _, seq in self.windows)


def interevent_times(seq: EventSequence) -> np.ndarray:
    """Gaps between consecutive events, with the origin t_0 = 0 prepended."""
    return np.diff(seq.times, prepend=0.0)


def _dedupe(times: np.ndarray, horizon: float | None, context: str) -> tuple[np.ndarray, float]:
    """Sort, jitter exact duplicates, and settle the horizon.

    Point-process likelihoods are undefined at tied timestamps, and real event
    logs contain ties; later duplicates are pushed forward by eps = 1e-9 * T
    instead of being rejected.
    """
    times = np.sort(times)
    T = float(horizon) if horizon is not None else (float(times[-1]) if times.size else 1.0)
    if not (np.isfinite(T) and T > 0):
        raise ValidationError(f"horizon must be positive and finite, got {T}")
    eps = JITTER_REL * T
    n_jittered = 0
    for i in range(1, times.size):
        if times[i] <= times[i - 1]:
            times[i] = times[i - 1] + eps
            n_jittered += 1
    if n_jittered:
        warnings.warn(
            f"{context}: jittered {n_jittered} duplicate timestamp(s) by {eps:g}",
            stacklevel=3,
        )
        T = max(T, float(times[-1]))
    return times, T


def _parse_time(token: str, path, line_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ValidationError(f"{path}:{line_no}: cannot parse time {token!r}") from None
    if not np.isfinite(value):
        raise ValidationError(f"{path}:{line_no}: non-finite time {token!r}")
    if value < 0:
        raise ValidationError(f"{path}:{line_no}: negative time {value}")
    return value


def load_events(path, format: str = "single", horizon: float | None = None):
    """Read events from CSV.

    format="single": one column ``time`` (header required); returns an
    EventSequence with horizon ``horizon`` or, if omitted, the last event time.

    format="pairs": columns ``actor,recipient,window,time``; returns a list of
    PairEventData sorted by (actor, recipient). Each window's horizon defaults
    to its last event time.
    """
    if format == "single":
        times = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["time"]:
                raise ValidationError(f"{path}:1: expected header 'time', got {header}")
            for line_no, row in enumerate(reader, start=2):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != 1:
                    raise ValidationError(f"{path}:{line_no}: expected 1 column, got {len(row)}")
                times.append(_parse_time(row[0].strip(), path, line_no))
        arr, T = _dedupe(np.asarray(times, dtype=float), horizon, str(path))
        if not arr.size and horizon is None:
            raise ValidationError(f"{path}: empty file requires an explicit horizon")
        return EventSequence(arr, T)

    if format == "pairs":
        groups: dict[tuple[str, str], dict[str, list[float]]] = {}
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            expected = ["actor", "recipient", "window", "time"]
            if header is None or [h.strip() for h in header] != expected:
                raise ValidationError(f"{path}:1: expected header {','.join(expected)}")
            for line_no, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != 4:
                    raise ValidationError(f"{path}:{line_no}: expected 4 columns, got {len(row)}")
                actor, recipient, window = (c.strip() for c in row[:3])
                t = _parse_time(row[3].strip(), path, line_no)
                groups.setdefault((actor, recipient), {}).setdefault(window, []).append(t)
        pairs = []
        for (actor, recipient), by_window in sorted(groups.items()):
            windows = []
            for window in sorted(by_window):
                arr, T = _dedupe(
                    np.asarray(by_window[window], dtype=float),
                    None,
                    f"{path} pair {actor}->{recipient} window {window}",
                )
                windows.append((window, EventSequence(arr, T)))
            pairs.append(PairEventData(actor, recipient, tuple(windows)))
        return pairs

    raise ValidationError(f"unknown format {format!r}")


def save_events(data, path) -> None:
    """Write events to CSV in a form load_events reads back bit-identically.

    Accepts an EventSequence (single format) or a list of PairEventData
    (pairs format). Floats are written with repr, which round-trips exactly.
    """
    with open(path, "w", newline="") as fh:
        if isinstance(data, EventSequence):
            fh.write("time\n")
            for t in data.times:
                fh.write(f"{float(t)!r}\n")
        else:
            fh.write("actor,recipient,window,time\n")
            for pair in data:
                for window, seq in pair.windows:
                    for t in seq.times:
                        fh.write(f"{pair.actor},{pair.recipient},{window},{float(t)!r}\n")
