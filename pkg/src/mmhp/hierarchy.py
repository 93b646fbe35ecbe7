"""Linearity measures for dominance hierarchies built from dyadic contests.

A win/loss matrix W counts, at entry (i, j), how many times individual i
beat individual j. Splitting the counts by decoded latent state (bursty
active fights versus sparse inactive ones) lets the same measures be
compared across interaction regimes.

Dyads with no decided direction (zero or tied counts) carry no directional
information and are excluded from the measures; that choice is ours and is
applied consistently.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .errors import ValidationError


def _check_winloss(W: np.ndarray) -> np.ndarray:
    W = np.asarray(W)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValidationError("win/loss matrix must be square")
    if np.any(W < 0):
        raise ValidationError("win/loss counts must be nonnegative")
    if np.any(np.diag(W) != 0):
        raise ValidationError("win/loss diagonal must be zero")
    return W


def winloss_matrix(
    pairs,
    state_filter: str = "all",
    decoded: dict | None = None,
) -> tuple[np.ndarray, list]:
    """Count wins per directed pair, optionally filtered by decoded state.

    pairs is a collection of PairEventData. For state_filter "active" or
    "inactive", `decoded` must map (actor, recipient, window) to the decoded
    state of each event in that window, aligned with its event order; events
    are counted when their state matches the filter.

    Returns (W, individuals) with individuals sorted and indexing W.
    """
    if state_filter not in ("all", "active", "inactive"):
        raise ValidationError(f"unknown state filter {state_filter!r}")
    individuals = sorted({p.actor for p in pairs} | {p.recipient for p in pairs})
    index = {ind: i for i, ind in enumerate(individuals)}
    W = np.zeros((len(individuals), len(individuals)), dtype=int)
    want = None if state_filter == "all" else (1 if state_filter == "active" else 0)
    for pair in pairs:
        for window, seq in pair.windows:
            if seq.M == 0:
                continue
            if want is None:
                W[index[pair.actor], index[pair.recipient]] += seq.M
                continue
            key = (pair.actor, pair.recipient, window)
            if decoded is None or key not in decoded:
                raise ValidationError(
                    f"no decoded states for pair {pair.actor}->{pair.recipient} window {window}"
                )
            states = np.asarray(decoded[key], dtype=int)
            if states.size != seq.M:
                raise ValidationError(
                    f"decoded states for {key} have length {states.size}, expected {seq.M}"
                )
            W[index[pair.actor], index[pair.recipient]] += int(np.sum(states == want))
    return W, individuals


def directional_consistency(W: np.ndarray) -> float:
    """Share of contested fights won in each dyad's dominant direction,
    aggregated: sum over dyads of (wins_major - wins_minor) over total."""
    W = _check_winloss(W)
    upper = np.triu_indices(W.shape[0], k=1)
    wins = W[upper]
    losses = W.T[upper]
    totals = wins + losses
    if totals.sum() == 0:
        raise ValidationError("directional consistency undefined for an all-zero matrix")
    return float(np.sum(np.abs(wins - losses)) / np.sum(totals))


def _orientations(W: np.ndarray) -> dict:
    """Majority-win direction per dyad; undecided dyads are omitted."""
    out = {}
    n = W.shape[0]
    for i, j in combinations(range(n), 2):
        if W[i, j] > W[j, i]:
            out[(i, j)] = (i, j)
        elif W[j, i] > W[i, j]:
            out[(i, j)] = (j, i)
    return out


def triangle_transitivity(W: np.ndarray) -> float:
    """Fraction of fully oriented triads that are transitive (no 3-cycle).

    Reported as the raw proportion, unscaled.
    """
    W = _check_winloss(W)
    n = W.shape[0]
    if n < 3:
        raise ValidationError("triangle transitivity needs at least 3 individuals")
    oriented = _orientations(W)
    total = transitive = 0
    for tri in combinations(range(n), 3):
        dyads = list(combinations(tri, 2))
        if any(d not in oriented for d in dyads):
            continue
        total += 1
        out_degree = {v: 0 for v in tri}
        for d in dyads:
            out_degree[oriented[d][0]] += 1
        # a 3-cycle gives every vertex out-degree 1
        if sorted(out_degree.values()) != [1, 1, 1]:
            transitive += 1
    if total == 0:
        raise ValidationError("no fully oriented triads; transitivity undefined")
    return transitive / total


def ranking_inconsistency(W: np.ndarray, ranking) -> int:
    """Dyads where the lower-ranked individual holds the win majority.

    `ranking` is a permutation of 0..N-1 listing individuals from most to
    least dominant. The matrix is reordered accordingly and lower-triangle
    dominances are counted; a perfect linear hierarchy gives zero.
    """
    W = _check_winloss(W)
    ranking = np.asarray(ranking, dtype=int)
    n = W.shape[0]
    if sorted(ranking.tolist()) != list(range(n)):
        raise ValidationError("ranking must be a permutation of all individuals")
    Wr = W[np.ix_(ranking, ranking)]
    lower = np.tril_indices(n, k=-1)
    return int(np.sum(Wr[lower] > Wr.T[lower]))
