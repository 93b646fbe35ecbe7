"""Markov-modulated Hawkes processes.

Event sequences whose conditional intensity alternates between a latent
homogeneous-Poisson regime and a self-exciting Hawkes regime, driven by an
unobserved two-state continuous-time Markov chain. The package covers
simulation, approximate marginal likelihood, Bayesian MCMC fitting,
latent-state decoding, time-rescaling diagnostics, and dominance-hierarchy
measures over decoded interaction data.
"""

from .ctmc import Generator, LatentTrajectory, ctmc_loglik, sample_ctmc, transition_matrix
from .decoding import DecodedTrajectory, interpolate_trajectory, majority_vote, viterbi
from .diagnostics import compensators, integrated_abs_error, ks_exp1, qq_points
from .errors import EstimationError, NumericalError, ValidationError
from .events import EventSequence, PairEventData, interevent_times, load_events, save_events
from .hawkes import (
    BaselineFit,
    HawkesParams,
    fit_baseline,
    hawkes_compensator,
    hawkes_intensity,
    hawkes_loglik,
)
from .hierarchy import (
    directional_consistency,
    ranking_inconsistency,
    triangle_transitivity,
    winloss_matrix,
)
from .inference import (
    PosteriorDraws,
    PriorConfig,
    RhatSummary,
    log_posterior,
    log_prior,
    rhat,
    run_mcmc,
    shortest_interval,
)
from .likelihood import (
    QuadratureRule,
    bridge_state_prob,
    brute_force_loglik,
    forward_loglik,
    interval_log_term,
)
from .model import MmhpParams
from .simulate import simulate_fixed_trajectory, simulate_mmhp

__all__ = [
    "BaselineFit",
    "DecodedTrajectory",
    "EstimationError",
    "EventSequence",
    "Generator",
    "HawkesParams",
    "LatentTrajectory",
    "MmhpParams",
    "NumericalError",
    "PairEventData",
    "PosteriorDraws",
    "PriorConfig",
    "QuadratureRule",
    "RhatSummary",
    "ValidationError",
    "bridge_state_prob",
    "brute_force_loglik",
    "compensators",
    "ctmc_loglik",
    "directional_consistency",
    "fit_baseline",
    "forward_loglik",
    "hawkes_compensator",
    "hawkes_intensity",
    "hawkes_loglik",
    "integrated_abs_error",
    "interevent_times",
    "interpolate_trajectory",
    "interval_log_term",
    "ks_exp1",
    "load_events",
    "log_posterior",
    "log_prior",
    "majority_vote",
    "qq_points",
    "ranking_inconsistency",
    "rhat",
    "run_mcmc",
    "sample_ctmc",
    "save_events",
    "shortest_interval",
    "simulate_fixed_trajectory",
    "simulate_mmhp",
    "transition_matrix",
    "triangle_transitivity",
    "viterbi",
    "winloss_matrix",
]
