"""Bayesian posterior sampling for the modulated process.

Sampling runs in an unconstrained space: log scales for the positive rates,
a logit for the initial-state probability, and lambda0 expressed as
lambda1 * sigmoid(eta) so the ordering constraint lambda0 < lambda1 holds by
construction. The sampler is an adaptive random-walk Metropolis with
componentwise proposal scales tuned during warmup toward an acceptance rate
of 0.234 and frozen afterwards; the first half of every chain is discarded.

model="mmpp" drops the excitation parameters (alpha pinned to 0) and reuses
everything else, which gives the constant-rate modulated Poisson baseline.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ctmc import Generator
from .errors import EstimationError, ValidationError
from .events import EventSequence
from .hawkes import HawkesParams
from .likelihood import QuadratureRule, default_quadrature, forward_loglik
from .model import PARAM_NAMES, MmhpParams

TARGET_ACCEPT = 0.234
MAX_CONSECUTIVE_REJECTS = 500

PRESETS = ("synthetic", "email", "mice_pair")
MMPP_PARAM_NAMES = ("lambda0", "lambda1", "delta0", "q0", "q1")

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PriorConfig:
    """Prior preset plus the hyperparameters some presets require.

    synthetic: delta0 ~ U(0,1), alpha ~ N(0,5) truncated positive,
    beta ~ logN(0,0.5), lambda1 ~ logN(0,1), lambda0 | lambda1 ~ U(0,lambda1),
    q0, q1 ~ logN(-1,1).

    email: Gamma(1,1) on alpha and beta, everything else as synthetic.

    mice_pair: lambda0 ~ N(1/dt_max, 0.1) truncated positive, switching rates
    expressed as fractions of the event rates (q0 = w0*lambda0,
    q1 = w1*lambda1 with w0, w1 ~ Beta(0.5,0.5)), and
    alpha ~ logN(mu_alpha, sigma_alpha), beta ~ logN(mu_beta, sigma_beta);
    those four log-normal hyperparameters and dt_max carry no defaults and
    must be supplied. Components the preset leaves unspecified (lambda1,
    delta0) follow the synthetic choices, with lambda0 < lambda1 enforced by
    truncation.
    """

    preset: str = "synthetic"
    mu_alpha: float | None = None
    sigma_alpha: float | None = None
    mu_beta: float | None = None
    sigma_beta: float | None = None
    dt_max: float | None = None

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ValidationError(f"unknown prior preset {self.preset!r}")
        if self.preset == "mice_pair":
            required = ("mu_alpha", "sigma_alpha", "mu_beta", "sigma_beta", "dt_max")
            missing = [k for k in required if getattr(self, k) is None]
            if missing:
                raise ValidationError(f"mice_pair preset requires {missing}")
            if self.sigma_alpha <= 0 or self.sigma_beta <= 0 or self.dt_max <= 0:
                raise ValidationError("mice_pair hyperparameters must be positive")


def _lognorm_logpdf(x: float, mu: float, sigma: float) -> float:
    if x <= 0:
        return -math.inf
    z = (math.log(x) - mu) / sigma
    return -math.log(x * sigma) - _LOG_SQRT_2PI - 0.5 * z * z


def _halfnorm_logpdf(x: float, sigma: float) -> float:
    if x <= 0:
        return -math.inf
    return math.log(2.0) - math.log(sigma) - _LOG_SQRT_2PI - 0.5 * (x / sigma) ** 2


def _truncnorm_pos_logpdf(x: float, mu: float, sigma: float) -> float:
    if x <= 0:
        return -math.inf
    z = (x - mu) / sigma
    # normalizing mass above zero
    log_mass = math.log(0.5 * (1.0 + math.erf(mu / (sigma * math.sqrt(2.0)))))
    return -math.log(sigma) - _LOG_SQRT_2PI - 0.5 * z * z - log_mass


def _beta_half_logpdf(w: float) -> float:
    if not (0.0 < w < 1.0):
        return -math.inf
    return -math.log(math.pi) - 0.5 * math.log(w * (1.0 - w))


def log_prior(theta, cfg: PriorConfig, model: str = "mmhp") -> float:
    """Joint log prior density at a parameter point.

    Accepts an MmhpParams or a plain dict with the same keys; constraint
    violations (ordering, positivity, probabilities) yield -inf rather than
    an exception.
    """
    d = theta.to_dict() if isinstance(theta, MmhpParams) else dict(theta)
    lam0, lam1 = d["lambda0"], d["lambda1"]
    delta0, q0, q1 = d["delta0"], d["q0"], d["q1"]
    if min(lam0, lam1, q0, q1) <= 0 or lam0 >= lam1 or not (0.0 < delta0 < 1.0):
        return -math.inf

    total = 0.0  # delta0 ~ U(0,1) contributes nothing
    total += _lognorm_logpdf(lam1, 0.0, 1.0)

    if model == "mmhp":
        alpha, beta = d["alpha"], d["beta"]
        if alpha <= 0 or beta <= 0:
            return -math.inf
        if cfg.preset == "email":
            total += -alpha - beta  # Gamma(1,1) on each
        elif cfg.preset == "mice_pair":
            total += _lognorm_logpdf(alpha, cfg.mu_alpha, cfg.sigma_alpha)
            total += _lognorm_logpdf(beta, cfg.mu_beta, cfg.sigma_beta)
        else:
            total += _halfnorm_logpdf(alpha, 5.0)
            total += _lognorm_logpdf(beta, 0.0, 0.5)

    if cfg.preset == "mice_pair":
        total += _truncnorm_pos_logpdf(lam0, 1.0 / cfg.dt_max, 0.1)
        # q expressed as a fraction of the matching event rate
        total += _beta_half_logpdf(q0 / lam0) - math.log(lam0)
        total += _beta_half_logpdf(q1 / lam1) - math.log(lam1)
    else:
        total += -math.log(lam1)  # lambda0 | lambda1 ~ U(0, lambda1)
        total += _lognorm_logpdf(q0, -1.0, 1.0)
        total += _lognorm_logpdf(q1, -1.0, 1.0)
    return total


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def param_names(model: str) -> tuple[str, ...]:
    if model == "mmhp":
        return PARAM_NAMES
    if model == "mmpp":
        return MMPP_PARAM_NAMES
    raise ValidationError(f"unknown model {model!r}")


def unconstrain(theta: MmhpParams, model: str = "mmhp") -> np.ndarray:
    """Map parameters to the real-valued sampling space."""
    w = theta.lambda0 / theta.lambda1
    head = [math.log(w / (1.0 - w)), math.log(theta.lambda1)]
    if model == "mmhp":
        head += [math.log(theta.alpha), math.log(theta.beta)]
    tail = [
        math.log(theta.delta0 / (1.0 - theta.delta0)),
        math.log(theta.q0),
        math.log(theta.q1),
    ]
    return np.array(head + tail)


def constrain(u: np.ndarray, model: str = "mmhp") -> MmhpParams:
    """Inverse of unconstrain."""
    u = np.asarray(u, dtype=float)
    lam1 = math.exp(u[1])
    lam0 = lam1 * _sigmoid(u[0])
    if model == "mmhp":
        alpha, beta = math.exp(u[2]), math.exp(u[3])
        delta0, q0, q1 = _sigmoid(u[4]), math.exp(u[5]), math.exp(u[6])
    else:
        alpha, beta = 0.0, 1.0
        delta0, q0, q1 = _sigmoid(u[2]), math.exp(u[3]), math.exp(u[4])
    return MmhpParams(lam0, HawkesParams(lam1, alpha, beta), delta0, Generator(q0=q0, q1=q1))


def log_jacobian(u: np.ndarray, model: str = "mmhp") -> float:
    """log |d theta / d u| of the constraining map (triangular, so the
    determinant is the product of the diagonal sensitivities)."""
    u = np.asarray(u, dtype=float)
    w = _sigmoid(u[0])
    lam1 = math.exp(u[1])
    total = u[1] + math.log(lam1 * w) + math.log1p(-w)
    if model == "mmhp":
        total += u[2] + u[3]
        d_idx, q_idx = 4, (5, 6)
    else:
        d_idx, q_idx = 2, (3, 4)
    delta0 = _sigmoid(u[d_idx])
    total += math.log(delta0) + math.log1p(-delta0)
    total += u[q_idx[0]] + u[q_idx[1]]
    return total


def log_posterior(
    u: np.ndarray,
    seq: EventSequence,
    cfg: PriorConfig,
    model: str = "mmhp",
    quad: QuadratureRule | None = None,
) -> float:
    """Unnormalized log posterior density in the unconstrained space."""
    try:
        theta = constrain(u, model)
    except (ValidationError, OverflowError):
        return -math.inf
    lp = log_prior(theta, cfg, model)
    if lp == -math.inf:
        return -math.inf
    ll = forward_loglik(theta, seq, quad)
    if not math.isfinite(ll):
        return -math.inf
    return lp + ll + log_jacobian(u, model)


def sample_from_prior(cfg: PriorConfig, rng: np.random.Generator, model: str = "mmhp") -> MmhpParams:
    """One draw from the prior, respecting all support constraints."""
    for _ in range(1000):
        lam1 = float(rng.lognormal(0.0, 1.0))
        if cfg.preset == "mice_pair":
            lam0 = float(rng.normal(1.0 / cfg.dt_max, 0.1))
            if not (0.0 < lam0 < lam1):
                continue
            q0 = float(rng.beta(0.5, 0.5)) * lam0
            q1 = float(rng.beta(0.5, 0.5)) * lam1
            alpha = float(rng.lognormal(cfg.mu_alpha, cfg.sigma_alpha))
            beta = float(rng.lognormal(cfg.mu_beta, cfg.sigma_beta))
        else:
            lam0 = lam1 * float(rng.uniform())
            q0 = float(rng.lognormal(-1.0, 1.0))
            q1 = float(rng.lognormal(-1.0, 1.0))
            if cfg.preset == "email":
                alpha = float(rng.exponential())
                beta = float(rng.exponential())
            else:
                alpha = abs(float(rng.normal(0.0, 5.0)))
                beta = float(rng.lognormal(0.0, 0.5))
        delta0 = float(rng.uniform())
        if model == "mmpp":
            alpha, beta = 0.0, 1.0
        if min(lam0, q0, q1, delta0, 1.0 - delta0) <= 0.0 or (model == "mmhp" and min(alpha, beta) <= 0.0):
            continue
        return MmhpParams(lam0, HawkesParams(lam1, alpha, beta), delta0,
                          Generator(q0=q0, q1=q1))
    raise EstimationError("could not draw a valid initial point from the prior")


def adaptive_metropolis(
    log_density,
    x0: np.ndarray,
    iters: int,
    warmup: int,
    rng: np.random.Generator,
    target_accept: float = TARGET_ACCEPT,
):
    """Random-walk Metropolis with warmup-only proposal adaptation.

    Proposals are x + exp(g) * C z with z standard normal. During warmup C
    tracks the Cholesky factor of the running sample covariance (scaled by
    the usual 2.38/sqrt(d)), which handles the strong lambda1/alpha/beta
    correlations this posterior has, and g is nudged by Robbins-Monro steps
    toward `target_accept`. Everything freezes at the end of warmup.
    Returns (post-warmup samples, acceptance rate over the kept iterations,
    count of non-finite density evaluations).
    """
    x = np.asarray(x0, dtype=float).copy()
    d = x.size
    lp = log_density(x)
    if not math.isfinite(lp):
        raise EstimationError("initial point has non-finite log density")
    g = 0.0
    base_scale = 2.38 / math.sqrt(d)
    chol = np.eye(d)
    mean = x.copy()
    cov_acc = np.zeros((d, d))
    kept = np.empty((iters - warmup, d))
    accepted_kept = 0
    n_nonfinite = 0
    consecutive_rejects = 0
    for t in range(iters):
        prop = x + base_scale * math.exp(g) * (chol @ rng.standard_normal(d))
        lp_prop = log_density(prop)
        if not math.isfinite(lp_prop):
            n_nonfinite += 1
            accept_prob = 0.0
        else:
            accept_prob = min(1.0, math.exp(min(0.0, lp_prop - lp)))
        if rng.uniform() < accept_prob:
            x, lp = prop, lp_prop
            consecutive_rejects = 0
            if t >= warmup:
                accepted_kept += 1
        else:
            consecutive_rejects += 1
            if consecutive_rejects >= MAX_CONSECUTIVE_REJECTS:
                raise EstimationError(
                    f"adaptation failure: {MAX_CONSECUTIVE_REJECTS} consecutive rejections"
                )
        if t < warmup:
            g += (accept_prob - target_accept) / (t + 1) ** 0.6
            delta = x - mean
            mean += delta / (t + 2)
            cov_acc += np.outer(delta, x - mean)
            if t >= 4 * d and (t % 25 == 0 or t == warmup - 1):
                cov = cov_acc / (t + 1) + 1e-9 * np.eye(d)
                try:
                    chol = np.linalg.cholesky(cov)
                except np.linalg.LinAlgError:
                    pass
        else:
            kept[t - warmup] = x
    rate = accepted_kept / max(iters - warmup, 1)
    return kept, rate, n_nonfinite


@dataclass
class PosteriorDraws:
    """Post-warmup draws from all chains, in the constrained space."""

    draws: np.ndarray  # (chains, iterations, parameters)
    names: tuple
    acceptance: np.ndarray  # per chain, post-warmup
    seed: int | None = None
    model: str = "mmhp"
    n_nonfinite: int = 0

    def __post_init__(self):
        self.draws = np.asarray(self.draws, dtype=float)
        if self.draws.ndim != 3 or self.draws.shape[2] != len(self.names):
            raise ValidationError("draws must have shape (chains, iterations, parameters)")
        cols = {name: i for i, name in enumerate(self.names)}
        pos = self.draws[:, :, [cols[n] for n in self.names if n != "delta0"]]
        if np.any(pos <= 0):
            raise ValidationError("stored draws violate positivity")
        if np.any(self.draws[:, :, cols["lambda0"]] >= self.draws[:, :, cols["lambda1"]]):
            raise ValidationError("stored draws violate lambda0 < lambda1")

    @property
    def n_chains(self) -> int:
        return self.draws.shape[0]

    def flat(self) -> np.ndarray:
        return self.draws.reshape(-1, self.draws.shape[2])

    def column(self, name: str) -> np.ndarray:
        return self.flat()[:, self.names.index(name)]

    def posterior_mean(self) -> MmhpParams:
        d = dict(zip(self.names, self.flat().mean(axis=0)))
        if self.model == "mmpp":
            d["alpha"], d["beta"] = 0.0, 1.0
        return MmhpParams.from_dict(d)

    def thin(self, n: int) -> np.ndarray:
        """n draws spread evenly over all chains and kept iterations."""
        pool = self.flat()
        if n >= pool.shape[0]:
            return pool
        idx = np.linspace(0, pool.shape[0] - 1, n).round().astype(int)
        return pool[idx]


def run_mcmc(
    seq: EventSequence,
    cfg: PriorConfig,
    chains: int,
    iters: int,
    rng: np.random.Generator | int,
    model: str = "mmhp",
    quad: QuadratureRule | None = None,
    threads: int = 1,
) -> PosteriorDraws:
    """Sample the posterior with `chains` independent adaptive RWM chains.

    Each chain starts from a fresh prior draw, runs `iters` iterations, and
    discards the first half as warmup. Chains own spawned random generators,
    so results are reproducible for a given seed regardless of `threads`.
    """
    if chains < 2:
        raise ValidationError("need at least 2 chains")
    if iters < 100:
        raise ValidationError("need at least 100 iterations")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng) if seed is not None else rng
    quad = quad or default_quadrature()
    warmup = iters // 2
    names = param_names(model)
    chain_rngs = rng.spawn(chains)

    def logpost(u):
        return log_posterior(u, seq, cfg, model, quad)

    def run_chain(chain_rng):
        for attempt in range(20):
            theta0 = sample_from_prior(cfg, chain_rng, model)
            u0 = unconstrain(theta0, model)
            if math.isfinite(logpost(u0)):
                break
        else:
            raise EstimationError("no prior draw gave a finite posterior density")
        samples_u, rate, nonfinite = adaptive_metropolis(
            logpost, u0, iters, warmup, chain_rng
        )
        out = np.empty((samples_u.shape[0], len(names)))
        for i, u in enumerate(samples_u):
            theta = constrain(u, model)
            out[i] = [getattr(theta, n) for n in names]
        return out, rate, nonfinite

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_chain, chain_rngs))
    else:
        results = [run_chain(r) for r in chain_rngs]
    draws = np.stack([r[0] for r in results])
    rates = np.array([r[1] for r in results])
    nonfinite = sum(r[2] for r in results)
    return PosteriorDraws(draws, names, rates, seed=seed, model=model,
                          n_nonfinite=nonfinite)


@dataclass(frozen=True)
class RhatSummary:
    values: dict
    zero_variance: tuple

    @property
    def max(self) -> float:
        return max(self.values.values())


def rhat(draws: PosteriorDraws) -> RhatSummary:
    """Split potential-scale-reduction factor, one value per parameter.

    Each chain is split in half, and the classic between/within variance
    ratio is computed over the resulting sequences. A parameter whose draws
    are all identical is reported as 1.0 and flagged.
    """
    if draws.n_chains < 2:
        raise ValidationError("rhat needs at least 2 chains")
    n = draws.draws.shape[1]
    if n < 10:
        raise ValidationError("rhat needs at least 10 post-warmup draws per chain")
    half = n // 2
    pieces = np.concatenate(
        [draws.draws[:, :half, :], draws.draws[:, half: 2 * half, :]], axis=0
    )  # (2*chains, half, P)
    values = {}
    flagged = []
    for j, name in enumerate(draws.names):
        x = pieces[:, :, j]
        if np.ptp(x) == 0.0:
            values[name] = 1.0
            flagged.append(name)
            continue
        means = x.mean(axis=1)
        within = x.var(axis=1, ddof=1).mean()
        between = half * means.var(ddof=1)
        if within == 0.0:
            values[name] = math.inf
            continue
        var_plus = (half - 1) / half * within + between / half
        values[name] = math.sqrt(var_plus / within)
    return RhatSummary(values, tuple(flagged))


def shortest_interval(samples: np.ndarray, mass: float = 0.95) -> tuple[float, float]:
    """Empirical shortest interval containing ceil(mass * n) sorted samples.

    Suited to the skewed posteriors this model produces, where equal-tail
    intervals waste width. Ties resolve to the leftmost window.
    """
    samples = np.sort(np.asarray(samples, dtype=float))
    n = samples.size
    if n < 20:
        raise ValidationError(f"shortest_interval needs >= 20 samples, got {n}")
    if not (0.0 < mass < 1.0):
        raise ValidationError(f"mass must lie in (0,1), got {mass}")
    m = math.ceil(mass * n)
    widths = samples[m - 1:] - samples[: n - m + 1]
    i = int(np.argmin(widths))
    return float(samples[i]), float(samples[i + m - 1])
