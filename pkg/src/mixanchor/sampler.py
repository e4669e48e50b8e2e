"""Adaptive Metropolis-within-Gibbs samplers for anchored mixtures.

Three kernels are provided: the general Gaussian sampler (any k, both
uniform priors), a two-component Gaussian sampler with the specialised
Beta/Dirichlet (variant 1) or random-walk (variant 2) proposals, and the
rate-family sampler shared by Poisson and exponential mixtures.

Proposal scales are tuned batch-by-batch toward the usual optimal
acceptance rates, 0.44 for one-dimensional blocks and 0.234 for vector
blocks: after each batch the log-scale moves by ``min(0.01, b^-1/2)`` in
the direction that pushes the observed rate toward its target.  Adaptation
stops after a configurable horizon (half the run by default) so that the
retained draws come from a fixed kernel; a flag restores never-ending
adaptation.

Asymmetric proposals (Beta, Dirichlet, Inverse-Gamma, independence moves)
enter the acceptance ratio with the full ``q(current|proposed) /
q(proposed|current)`` correction, and blocks proposed on a transformed
scale (log sigma, logit p, log-ratio simplex walks) carry the matching
Jacobian terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import betaln, gammaln

from .likelihood import (
    Dataset,
    _gaussian_logpost,
    _rate_logpost,
    loglik_gaussian_arrays,
)
from .params import (
    AngularCoords,
    GaussianState,
    RateState,
    StandardParams,
)
from .priors import PriorSpec, _log_beta, _log_dirichlet, sample_prior, sample_varpi
from .transforms import standard_arrays_from_angular

__all__ = [
    "ScaleBank",
    "RunConfig",
    "Chain",
    "ChainRecord",
    "RunResult",
    "adapt_scales",
    "beta_concentration_step",
    "dirichlet_concentration_step",
    "invgamma_independence_step",
    "metropolis_accept",
    "mwg_gaussian",
    "mwg_gaussian_k2",
    "mwg_poisson",
    "mwg_exponential",
    "gelman_rubin",
]

HALF_PI = math.pi / 2
TWO_PI = 2 * math.pi


# --------------------------------------------------------------------------
# proposal-scale bookkeeping


@dataclass(frozen=True)
class ScaleBank:
    """Per-block proposal scales with their adaptation metadata.

    ``kinds`` distinguishes random-walk widths (larger scale lowers the
    acceptance rate) from Beta/Dirichlet concentrations (larger scale
    tightens the proposal and raises the rate); ``fixed`` blocks carry no
    tunable scale.
    """

    scales: dict
    kinds: dict
    targets: dict
    batch_index: int = 0

    def __post_init__(self):
        for name, value in self.scales.items():
            if self.kinds.get(name) != "fixed" and value <= 0:
                raise ValueError(f"scale for block {name!r} must be positive")


def adaptation_step(batch_index: int) -> float:
    """Log-scale increment for the given (1-based) batch index."""
    return min(0.01, batch_index ** -0.5)


def adapt_scales(bank: ScaleBank, batch_rates: dict) -> ScaleBank:
    """One batch of acceptance-rate tuning; returns the updated bank.

    Blocks whose observed rate exceeds the target get a wider walk (or a
    looser concentration); rates below the target shrink it.  A rate equal
    to its target leaves the scale untouched.
    """
    b = bank.batch_index + 1
    delta = adaptation_step(b)
    scales = dict(bank.scales)
    for name, rate in batch_rates.items():
        kind = bank.kinds.get(name, "fixed")
        if kind == "fixed" or name not in scales:
            continue
        target = bank.targets[name]
        if rate > target:
            move = delta if kind == "width" else -delta
        elif rate < target:
            move = -delta if kind == "width" else delta
        else:
            move = 0.0
        scales[name] = scales[name] * math.exp(move)
    return replace(bank, scales=scales, batch_index=b)


@dataclass(frozen=True)
class RunConfig:
    """Length, seeding, and tuning knobs shared by all samplers."""

    iterations: int
    burn_in: int = 1000
    n_chains: int = 1
    seed: int = 0
    batch_size: int = 50
    adapt_horizon: int | None = None
    adapt_throughout: bool = False
    proposal: int = 1
    lambda_proposal: str = "independence"
    target_scalar: float = 0.44
    target_vector: float = 0.234
    init_scales: dict | None = None

    def __post_init__(self):
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("need iterations > burn_in >= 0")
        if self.n_chains < 1:
            raise ValueError("need at least one chain")
        if self.proposal not in (1, 2):
            raise ValueError("proposal variant must be 1 or 2")
        if self.lambda_proposal not in ("independence", "random_walk"):
            raise ValueError("lambda_proposal must be 'independence' or 'random_walk'")

    @property
    def horizon(self) -> int:
        if self.adapt_throughout:
            return self.iterations
        if self.adapt_horizon is not None:
            return self.adapt_horizon
        return self.iterations // 2


# --------------------------------------------------------------------------
# chain storage


@dataclass(frozen=True)
class ChainRecord:
    """A single posterior draw in both parameterisations."""

    iteration: int
    state: GaussianState | RateState
    params: StandardParams
    log_posterior: float


@dataclass
class Chain:
    """Column-oriented storage of one chain, burn-in included."""

    family: str
    k: int
    burn_in: int
    log_posterior: np.ndarray
    weights: np.ndarray
    locs: np.ndarray
    scales: np.ndarray | None
    accepts: dict
    mu: np.ndarray | None = None
    sigma: np.ndarray | None = None
    phi_sq: np.ndarray | None = None
    phi_sign: np.ndarray | None = None
    xi: np.ndarray | None = None
    varpi: np.ndarray | None = None
    lam: np.ndarray | None = None
    gamma: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.log_posterior)

    @property
    def iterations(self) -> np.ndarray:
        return np.arange(len(self))

    def column(self, name: str) -> np.ndarray:
        """Column by CSV-style name: scalars, ``p1..pk``, ``loc1..``, etc."""
        scalars = {
            "log_posterior": self.log_posterior,
            "mu": self.mu,
            "sigma": self.sigma,
            "phi_sq": self.phi_sq,
            "phi_sign": self.phi_sign,
            "lam": self.lam,
        }
        if name in scalars:
            if scalars[name] is None:
                raise KeyError(name)
            return scalars[name]
        vectors = {
            "p": self.weights,
            "loc": self.locs,
            "scale": self.scales,
            "xi": self.xi,
            "varpi": self.varpi,
            "gamma": self.gamma,
        }
        for prefix, arr in vectors.items():
            if name.startswith(prefix) and name[len(prefix):].isdigit():
                if arr is None:
                    raise KeyError(name)
                return arr[:, int(name[len(prefix):]) - 1]
        raise KeyError(name)

    def post_burn(self, name: str) -> np.ndarray:
        return self.column(name)[self.burn_in:]

    def acceptance_rate(self, block: str, start: int = 0) -> float:
        flags = self.accepts[block][start:]
        return float(flags.mean()) if len(flags) else math.nan

    def record(self, t: int) -> ChainRecord:
        if self.family == "gaussian":
            coords = AngularCoords(
                phi_sq=float(self.phi_sq[t]),
                varpi=self.varpi[t],
                xi=self.xi[t],
                phi_sign=int(self.phi_sign[t]),
            )
            state = GaussianState(
                mu=float(self.mu[t]),
                sigma=float(self.sigma[t]),
                weights=self.weights[t],
                coords=coords,
            )
            params = StandardParams(
                "gaussian", self.weights[t], self.locs[t], self.scales[t]
            )
        else:
            state = RateState(
                family=self.family,
                lam=float(self.lam[t]),
                gamma=self.gamma[t],
                weights=self.weights[t],
            )
            params = StandardParams(self.family, self.weights[t], self.locs[t])
        return ChainRecord(
            iteration=t,
            state=state,
            params=params,
            log_posterior=float(self.log_posterior[t]),
        )


@dataclass
class RunResult:
    """Chains plus the final proposal scales and block acceptance rates."""

    chains: list
    banks: list
    config: RunConfig

    def acceptance_rates(self, start: int | None = None) -> list:
        start = self.config.horizon if start is None else start
        return [
            {name: chain.acceptance_rate(name, start) for name in chain.accepts}
            for chain in self.chains
        ]


# --------------------------------------------------------------------------
# density and proposal helpers


def _log_beta_pdf(x: float, a: float, b: float) -> float:
    if not 0.0 < x < 1.0:
        return -math.inf
    return (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - betaln(a, b)


def _log_dirichlet_pdf(x: np.ndarray, alpha: np.ndarray) -> float:
    if np.any(x <= 0.0):
        return -math.inf
    return float(
        gammaln(alpha.sum()) - gammaln(alpha).sum() + (alpha - 1.0) @ np.log(x)
    )


def _log_invgamma_pdf(x: float, shape: float, scale: float) -> float:
    if x <= 0.0:
        return -math.inf
    return shape * math.log(scale) - gammaln(shape) - (shape + 1.0) * math.log(x) - scale / x


def metropolis_accept(rng, log_ratio: float) -> bool:
    """Draw the acceptance coin; always consumes one uniform."""
    u = rng.random()
    if log_ratio >= 0.0:
        return True
    return math.log(u) < log_ratio


def beta_concentration_step(rng, x, eps, logpost, offset=1.0, lp_cur=None):
    """Beta proposal ``Beta(x*eps + offset, (1-x)*eps + offset)`` with correction.

    Returns ``(new_x, new_logpost, accepted)``; ``logpost`` maps a point of
    (0, 1) to its target log-density.  Pass ``lp_cur`` to avoid re-evaluating
    the current point.
    """
    a_fwd = x * eps + offset
    b_fwd = (1.0 - x) * eps + offset
    prop = rng.beta(a_fwd, b_fwd)
    if lp_cur is None:
        lp_cur = logpost(x)
    lp_prop = logpost(prop)
    if lp_prop == -math.inf:
        metropolis_accept(rng, -math.inf)
        return x, lp_cur, False
    lq_fwd = _log_beta_pdf(prop, a_fwd, b_fwd)
    lq_rev = _log_beta_pdf(x, prop * eps + offset, (1.0 - prop) * eps + offset)
    if metropolis_accept(rng, lp_prop - lp_cur + lq_rev - lq_fwd):
        return prop, lp_prop, True
    return x, lp_cur, False


def dirichlet_concentration_step(rng, v, eps, logpost, offset=1.0, lp_cur=None):
    """Dirichlet proposal ``Dir(v*eps + offset)`` with full q-correction."""
    alpha_fwd = v * eps + offset
    prop = rng.dirichlet(alpha_fwd)
    if lp_cur is None:
        lp_cur = logpost(v)
    lp_prop = logpost(prop)
    if lp_prop == -math.inf or np.any(prop <= 0.0):
        metropolis_accept(rng, -math.inf)
        return v, lp_cur, False
    lq_fwd = _log_dirichlet_pdf(prop, alpha_fwd)
    lq_rev = _log_dirichlet_pdf(v, prop * eps + offset)
    if metropolis_accept(rng, lp_prop - lp_cur + lq_rev - lq_fwd):
        return prop, lp_prop, True
    return v, lp_cur, False


def invgamma_independence_step(rng, x, shape, scale, logpost, lp_cur=None):
    """Independence Inverse-Gamma proposal with its density correction."""
    prop = scale / rng.gamma(shape)
    if lp_cur is None:
        lp_cur = logpost(x)
    lp_prop = logpost(prop)
    if lp_prop == -math.inf:
        metropolis_accept(rng, -math.inf)
        return x, lp_cur, False
    lq_fwd = _log_invgamma_pdf(prop, shape, scale)
    lq_rev = _log_invgamma_pdf(x, shape, scale)
    if metropolis_accept(rng, lp_prop - lp_cur + lq_rev - lq_fwd):
        return prop, lp_prop, True
    return x, lp_cur, False


def _wrap(value: float, period: float) -> float:
    wrapped = value % period
    return wrapped


def _random_sign(rng) -> int:
    return 1 if rng.random() < 0.5 else -1


class _BatchCounter:
    """Acceptance counting for one adaptation batch."""

    def __init__(self, names):
        self.names = list(names)
        self.reset()

    def reset(self):
        self.proposed = {name: 0 for name in self.names}
        self.accepted = {name: 0 for name in self.names}

    def update(self, name, accepted):
        self.proposed[name] += 1
        self.accepted[name] += int(accepted)

    def rates(self):
        return {
            name: self.accepted[name] / self.proposed[name]
            for name in self.names
            if self.proposed[name]
        }


# --------------------------------------------------------------------------
# Gaussian sampler, general k


def default_gaussian_bank(k: int, n: int, data_sd: float, config: RunConfig) -> ScaleBank:
    scales = {
        "mu": 2.4 * data_sd / math.sqrt(n),
        "sigma": max(1.5 / math.sqrt(n), 0.02),
        "phi": float(n),
        "p": 2.0 * float(n),
        "xi_rw": 0.3,
    }
    kinds = {
        "mu": "width",
        "sigma": "width",
        "xi_ind": "fixed",
        "phi": "concentration",
        "p": "concentration",
        "xi_rw": "width",
    }
    targets = {
        "mu": config.target_scalar,
        "sigma": config.target_scalar,
        "phi": config.target_scalar,
        "p": config.target_vector if k > 2 else config.target_scalar,
        "xi_rw": config.target_vector if k > 2 else config.target_scalar,
    }
    if k >= 3:
        scales["varpi_rw"] = 0.3
        kinds["varpi_ind"] = "fixed"
        kinds["varpi_rw"] = "width"
        targets["varpi_rw"] = config.target_vector if k > 3 else config.target_scalar
    if config.init_scales:
        scales.update(config.init_scales)
    return ScaleBank(scales=scales, kinds=kinds, targets=targets)


def _init_gaussian_state(data, k, prior_spec, rng):
    mu0 = float(np.mean(data.values))
    sigma0 = float(np.std(data.values, ddof=1)) if data.n > 1 else 1.0
    for _ in range(100):
        draws = sample_prior(prior_spec, k, "gaussian", 1, rng)
        yield mu0, sigma0, draws.weights[0].copy(), float(draws.phi_sq[0]), int(
            draws.phi_sign[0]
        ), draws.xi[0].copy(), draws.varpi[0].copy()


def _run_gaussian_chain(data, k, prior_spec, config, rng, bank):
    x = data.values
    T = config.iterations
    horizon = config.horizon

    def logpost(mu, sigma, p, phi_sq, sign, xi, varpi):
        return _gaussian_logpost(
            data, prior_spec, mu, sigma, p, phi_sq, sign, varpi=varpi, xi=xi
        )

    lp = -math.inf
    for mu, sigma, p, phi_sq, sign, xi, varpi in _init_gaussian_state(
        data, k, prior_spec, rng
    ):
        lp = logpost(mu, sigma, p, phi_sq, sign, xi, varpi)
        if np.isfinite(lp):
            break
    if not np.isfinite(lp):
        raise RuntimeError("could not find a finite initial log-posterior")

    block_names = ["mu", "sigma", "xi_ind", "phi", "p", "xi_rw"]
    if k >= 3:
        block_names[3:3] = ["varpi_ind"]
        block_names.append("varpi_rw")
    counter = _BatchCounter(block_names)
    accepts = {name: np.zeros(T, dtype=np.uint8) for name in block_names}

    cols_lp = np.empty(T)
    cols_mu = np.empty(T)
    cols_sigma = np.empty(T)
    cols_w = np.empty((T, k))
    cols_locs = np.empty((T, k))
    cols_scales = np.empty((T, k))
    cols_phi = np.empty(T)
    cols_sign = np.empty(T)
    cols_xi = np.empty((T, k - 1))
    cols_varpi = np.empty((T, k - 2))

    for t in range(T):
        # location walk
        eps = bank.scales["mu"]
        mu_p = mu + eps * rng.standard_normal()
        lp_p = logpost(mu_p, sigma, p, phi_sq, sign, xi, varpi)
        acc = metropolis_accept(rng, lp_p - lp)
        if acc:
            mu, lp = mu_p, lp_p
        counter.update("mu", acc)
        accepts["mu"][t] = acc

        # log-scale walk; the walk lives on log(sigma), hence the Jacobian term
        eps = bank.scales["sigma"]
        log_sigma_p = math.log(sigma) + eps * rng.standard_normal()
        sigma_p = math.exp(log_sigma_p)
        lp_p = logpost(mu, sigma_p, p, phi_sq, sign, xi, varpi)
        acc = metropolis_accept(rng, lp_p - lp + log_sigma_p - math.log(sigma))
        if acc:
            sigma, lp = sigma_p, lp_p
        counter.update("sigma", acc)
        accepts["sigma"][t] = acc

        # independence refresh of the scale angles
        xi_p = rng.uniform(0.0, HALF_PI, size=k - 1)
        lp_p = logpost(mu, sigma, p, phi_sq, sign, xi_p, varpi)
        acc = metropolis_accept(rng, lp_p - lp)
        if acc:
            xi, lp = xi_p, lp_p
        counter.update("xi_ind", acc)
        accepts["xi_ind"][t] = acc

        if k >= 3:
            # independence refresh of the location angles
            varpi_p = sample_varpi(rng, k, 1)[0]
            lp_p = logpost(mu, sigma, p, phi_sq, sign, xi, varpi_p)
            acc = metropolis_accept(rng, lp_p - lp)
            if acc:
                varpi, lp = varpi_p, lp_p
            counter.update("varpi_ind", acc)
            accepts["varpi_ind"][t] = acc

        # squared-radius Beta proposal (plus a fair sign flip when k = 2)
        eps = bank.scales["phi"]
        sign_p = _random_sign(rng) if k == 2 else sign
        a_fwd = phi_sq * eps + 1.0
        b_fwd = (1.0 - phi_sq) * eps + 1.0
        phi_p = rng.beta(a_fwd, b_fwd)
        lp_p = logpost(mu, sigma, p, phi_p, sign_p, xi, varpi)
        if lp_p == -math.inf:
            acc = metropolis_accept(rng, -math.inf)
        else:
            lq_fwd = _log_beta_pdf(phi_p, a_fwd, b_fwd)
            lq_rev = _log_beta_pdf(phi_sq, phi_p * eps + 1.0, (1.0 - phi_p) * eps + 1.0)
            acc = metropolis_accept(rng, lp_p - lp + lq_rev - lq_fwd)
        if acc:
            phi_sq, sign, lp = phi_p, sign_p, lp_p
        counter.update("phi", acc)
        accepts["phi"][t] = acc

        # weight simplex via offset Dirichlet
        p, lp, acc = dirichlet_concentration_step(
            rng,
            p,
            bank.scales["p"],
            lambda q: logpost(mu, sigma, q, phi_sq, sign, xi, varpi),
            lp_cur=lp,
        )
        counter.update("p", acc)
        accepts["p"][t] = acc

        # scale-angle random walk; the support boundary rejects hard
        eps = bank.scales["xi_rw"]
        xi_p = xi + rng.uniform(-eps, eps, size=k - 1)
        if np.any(xi_p < 0.0) or np.any(xi_p > HALF_PI):
            lp_p = -math.inf
        else:
            lp_p = logpost(mu, sigma, p, phi_sq, sign, xi_p, varpi)
        acc = metropolis_accept(rng, lp_p - lp)
        if acc:
            xi, lp = xi_p, lp_p
        counter.update("xi_rw", acc)
        accepts["xi_rw"][t] = acc

        if k >= 3:
            # location-angle random walk with periodic wrapping
            eps = bank.scales["varpi_rw"]
            varpi_p = varpi + rng.uniform(-eps, eps, size=k - 2)
            for j in range(k - 3):
                varpi_p[j] = _wrap(varpi_p[j], math.pi)
            varpi_p[-1] = _wrap(varpi_p[-1], TWO_PI)
            lp_p = logpost(mu, sigma, p, phi_sq, sign, xi, varpi_p)
            acc = metropolis_accept(rng, lp_p - lp)
            if acc:
                varpi, lp = varpi_p, lp_p
            counter.update("varpi_rw", acc)
            accepts["varpi_rw"][t] = acc

        locs, scales, _ = standard_arrays_from_angular(
            mu, sigma, p, phi_sq, sign, varpi, xi
        )
        cols_lp[t] = lp
        cols_mu[t] = mu
        cols_sigma[t] = sigma
        cols_w[t] = p
        cols_locs[t] = locs
        cols_scales[t] = scales
        cols_phi[t] = phi_sq
        cols_sign[t] = sign
        cols_xi[t] = xi
        cols_varpi[t] = varpi

        if (t + 1) % config.batch_size == 0 and t < horizon:
            bank = adapt_scales(bank, counter.rates())
            counter.reset()

    chain = Chain(
        family="gaussian",
        k=k,
        burn_in=config.burn_in,
        log_posterior=cols_lp,
        weights=cols_w,
        locs=cols_locs,
        scales=cols_scales,
        accepts=accepts,
        mu=cols_mu,
        sigma=cols_sigma,
        phi_sq=cols_phi,
        phi_sign=cols_sign,
        xi=cols_xi,
        varpi=cols_varpi,
    )
    return chain, bank


def mwg_gaussian(data: Dataset, k: int, prior_spec: PriorSpec, config: RunConfig) -> RunResult:
    """General-k Gaussian sampler over the angular coordinates.

    Per iteration: a location walk, a log-scale walk, independence
    refreshes of the scale and location angles, a Beta move on the squared
    radius, an offset-Dirichlet move on the weights, and bounded random
    walks on both angle sets.  Requires at least two observations, the
    minimal sample size for a proper posterior under the 1/sigma prior.
    """
    data.check_family("gaussian")
    if data.n < 2:
        raise ValueError(
            "a gaussian mixture fit requires at least two observations for the "
            "posterior to be proper"
        )
    if k < 2:
        raise ValueError("need at least two components")
    seed_seq = np.random.SeedSequence(config.seed)
    chains, banks = [], []
    data_sd = float(np.std(data.values, ddof=1))
    for child in seed_seq.spawn(config.n_chains):
        rng = np.random.Generator(np.random.PCG64(child))
        bank = default_gaussian_bank(k, data.n, data_sd, config)
        chain, final_bank = _run_gaussian_chain(data, k, prior_spec, config, rng, bank)
        chains.append(chain)
        banks.append(final_bank)
    return RunResult(chains=chains, banks=banks, config=config)


# --------------------------------------------------------------------------
# Gaussian sampler, k = 2 specialisation


def default_k2_bank(n: int, data_sd: float, config: RunConfig) -> ScaleBank:
    if config.proposal == 1:
        scales = {"mu": 2.0 * data_sd / math.sqrt(n), "p": float(n), "v": float(n)}
        kinds = {"mu": "width", "sigma": "fixed", "p": "concentration", "v": "concentration"}
    else:
        scales = {"mu": 2.0 * data_sd / math.sqrt(n), "p": 0.5, "v": 0.5}
        kinds = {"mu": "width", "sigma": "fixed", "p": "width", "v": "width"}
    targets = {
        "mu": config.target_scalar,
        "p": config.target_scalar,
        "v": config.target_vector,
    }
    if config.init_scales:
        scales.update(config.init_scales)
    return ScaleBank(scales=scales, kinds=kinds, targets=targets)


def _k2_logpost(data, prior_spec, mu, sigma, p1, v, sign):
    """Target density over (mu, sigma, p, phi_sq, eta1_sq, sign) for k = 2.

    The sigma coordinate keeps the 1/sigma convention used everywhere else;
    the sigma-squared block converts with its own Jacobian.  The scale pair
    (eta1_sq, eta2_sq) is measured through eta1_sq, with the prior density
    depending on the prior kind.
    """
    phi_sq, eta1_sq, eta2_sq = v
    if (
        sigma <= 0
        or not 0.0 < p1 < 1.0
        or min(phi_sq, eta1_sq, eta2_sq) <= 0.0
        or phi_sq >= 1.0
    ):
        return -math.inf
    spec = prior_spec
    weights = np.array([p1, 1.0 - p1])
    lp = -math.log(sigma)
    lp += _log_dirichlet(weights, spec.alpha0)
    lp += _log_beta(phi_sq, *spec.phi_beta)
    lp += math.log(0.5)
    one_minus = 1.0 - phi_sq
    if spec.kind == "single_uniform":
        lp += -math.log(one_minus)
    else:
        lp += -math.log(math.pi) - 0.5 * math.log(eta1_sq) - 0.5 * math.log(eta2_sq)
    if lp == -math.inf:
        return -math.inf
    phi = sign * math.sqrt(phi_sq)
    sq1, sq2 = math.sqrt(p1), math.sqrt(1.0 - p1)
    gamma = np.array([-phi * sq2, phi * sq1])
    eta = np.array([math.sqrt(eta1_sq), math.sqrt(eta2_sq)])
    locs = mu + sigma * gamma / np.array([sq1, sq2])
    scales = sigma * eta / np.array([sq1, sq2])
    return lp + loglik_gaussian_arrays(data.values, weights, locs, scales)


def _run_gaussian_k2_chain(data, prior_spec, config, rng, bank):
    x = data.values
    n = data.n
    xbar = float(np.mean(x))
    svar = float(np.var(x, ddof=1))
    T = config.iterations
    horizon = config.horizon
    ig_shape = (n + 1) / 2.0
    ig_scale = (n - 1) * svar / 2.0

    def logpost(mu, sigma, p1, v, sign):
        return _k2_logpost(data, prior_spec, mu, sigma, p1, v, sign)

    lp = -math.inf
    for _ in range(100):
        draws = sample_prior(prior_spec, 2, "gaussian", 1, rng)
        p1 = float(draws.weights[0, 0])
        sign = int(draws.phi_sign[0])
        phi_sq = float(draws.phi_sq[0])
        xi1 = float(draws.xi[0, 0])
        one_minus = 1.0 - phi_sq
        v = np.array(
            [phi_sq, one_minus * math.cos(xi1) ** 2, one_minus * math.sin(xi1) ** 2]
        )
        mu, sigma = xbar, math.sqrt(svar)
        lp = logpost(mu, sigma, p1, v, sign)
        if np.isfinite(lp):
            break
    if not np.isfinite(lp):
        raise RuntimeError("could not find a finite initial log-posterior")

    block_names = ["mu", "sigma", "p", "v"]
    counter = _BatchCounter(block_names)
    accepts = {name: np.zeros(T, dtype=np.uint8) for name in block_names}

    cols_lp = np.empty(T)
    cols_mu = np.empty(T)
    cols_sigma = np.empty(T)
    cols_w = np.empty((T, 2))
    cols_locs = np.empty((T, 2))
    cols_scales = np.empty((T, 2))
    cols_phi = np.empty(T)
    cols_sign = np.empty(T)
    cols_xi = np.empty((T, 1))

    for t in range(T):
        # global mean: independence proposal at the sample mean
        eps = bank.scales["mu"]
        mu_p = xbar + eps * rng.standard_normal()
        lp_p = logpost(mu_p, sigma, p1, v, sign)
        lq_diff = 0.5 * ((mu_p - xbar) ** 2 - (mu - xbar) ** 2) / (eps * eps)
        acc = metropolis_accept(rng, lp_p - lp + lq_diff)
        if acc:
            mu, lp = mu_p, lp_p
        counter.update("mu", acc)
        accepts["mu"][t] = acc

        # global variance: independence Inverse-Gamma anchored at the sample
        # variance; the chain coordinate is sigma, so both the target and
        # the proposal are re-expressed over sigma^2
        sigma_sq_p = ig_scale / rng.gamma(ig_shape)
        sigma_p = math.sqrt(sigma_sq_p)
        lp_p = logpost(mu, sigma_p, p1, v, sign)
        if lp_p == -math.inf:
            acc = metropolis_accept(rng, -math.inf)
        else:
            target_diff = (lp_p - math.log(sigma_p)) - (lp - math.log(sigma))
            lq_fwd = _log_invgamma_pdf(sigma_sq_p, ig_shape, ig_scale)
            lq_rev = _log_invgamma_pdf(sigma * sigma, ig_shape, ig_scale)
            acc = metropolis_accept(rng, target_diff + lq_rev - lq_fwd)
        if acc:
            sigma, lp = sigma_p, lp_p
        counter.update("sigma", acc)
        accepts["sigma"][t] = acc

        # weight block
        eps = bank.scales["p"]
        if config.proposal == 1:
            p1, lp, acc = beta_concentration_step(
                rng,
                p1,
                eps,
                lambda q: logpost(mu, sigma, q, v, sign),
                offset=0.0,
                lp_cur=lp,
            )
        else:
            logit = math.log(p1 / (1.0 - p1))
            logit_p = logit + eps * rng.standard_normal()
            p_prop = 1.0 / (1.0 + math.exp(-logit_p))
            lp_p = logpost(mu, sigma, p_prop, v, sign)
            if lp_p == -math.inf:
                acc = metropolis_accept(rng, -math.inf)
            else:
                jac = math.log(p_prop * (1.0 - p_prop)) - math.log(p1 * (1.0 - p1))
                acc = metropolis_accept(rng, lp_p - lp + jac)
            if acc:
                p1, lp = p_prop, lp_p
        counter.update("p", acc)
        accepts["p"][t] = acc

        # joint (phi_sq, eta1_sq, eta2_sq) block plus a fair sign draw
        eps = bank.scales["v"]
        sign_p = _random_sign(rng)
        if config.proposal == 1:
            alpha_fwd = v * eps
            v_p = rng.dirichlet(alpha_fwd)
            lp_p = logpost(mu, sigma, p1, v_p, sign_p)
            if lp_p == -math.inf or np.any(v_p <= 0.0):
                acc = metropolis_accept(rng, -math.inf)
            else:
                lq_fwd = _log_dirichlet_pdf(v_p, alpha_fwd)
                lq_rev = _log_dirichlet_pdf(v, v_p * eps)
                acc = metropolis_accept(rng, lp_p - lp + lq_rev - lq_fwd)
        else:
            chi = np.log(v[:2] / v[2])
            chi_p = chi + eps * rng.standard_normal(2)
            expd = np.exp(chi_p)
            denom = 1.0 + expd.sum()
            v_p = np.array([expd[0] / denom, expd[1] / denom, 1.0 / denom])
            lp_p = logpost(mu, sigma, p1, v_p, sign_p)
            if lp_p == -math.inf:
                acc = metropolis_accept(rng, -math.inf)
            else:
                jac = float(np.sum(np.log(v_p)) - np.sum(np.log(v)))
                acc = metropolis_accept(rng, lp_p - lp + jac)
        if acc:
            v, sign, lp = v_p, sign_p, lp_p
        counter.update("v", acc)
        accepts["v"][t] = acc

        phi_sq, eta1_sq, eta2_sq = v
        phi = sign * math.sqrt(phi_sq)
        sq = np.sqrt([p1, 1.0 - p1])
        eta = np.sqrt([eta1_sq, eta2_sq])
        cols_lp[t] = lp
        cols_mu[t] = mu
        cols_sigma[t] = sigma
        cols_w[t] = [p1, 1.0 - p1]
        cols_locs[t] = mu + sigma * np.array([-phi * sq[1], phi * sq[0]]) / sq
        cols_scales[t] = sigma * eta / sq
        cols_phi[t] = phi_sq
        cols_sign[t] = sign
        cols_xi[t, 0] = math.atan2(eta[1], eta[0])

        if (t + 1) % config.batch_size == 0 and t < horizon:
            bank = adapt_scales(bank, counter.rates())
            counter.reset()

    chain = Chain(
        family="gaussian",
        k=2,
        burn_in=config.burn_in,
        log_posterior=cols_lp,
        weights=cols_w,
        locs=cols_locs,
        scales=cols_scales,
        accepts=accepts,
        mu=cols_mu,
        sigma=cols_sigma,
        phi_sq=cols_phi,
        phi_sign=cols_sign,
        xi=cols_xi,
        varpi=np.zeros((T, 0)),
    )
    return chain, bank


def mwg_gaussian_k2(data: Dataset, prior_spec: PriorSpec, config: RunConfig) -> RunResult:
    """Two-component Gaussian sampler with the specialised proposals.

    Variant 1 uses a Beta move on the weight and an offset-free Dirichlet
    move on ``(phi_sq, eta1_sq, eta2_sq)``; variant 2 walks the logit weight
    and the log-ratio simplex coordinates.  Both variants propose the
    globals independently: the mean from a normal law at the sample mean,
    the variance from an Inverse-Gamma law anchored at the sample variance.
    """
    data.check_family("gaussian")
    if data.n < 2:
        raise ValueError(
            "a gaussian mixture fit requires at least two observations for the "
            "posterior to be proper"
        )
    seed_seq = np.random.SeedSequence(config.seed)
    chains, banks = [], []
    data_sd = float(np.std(data.values, ddof=1))
    for child in seed_seq.spawn(config.n_chains):
        rng = np.random.Generator(np.random.PCG64(child))
        bank = default_k2_bank(data.n, data_sd, config)
        chain, final_bank = _run_gaussian_k2_chain(data, prior_spec, config, rng, bank)
        chains.append(chain)
        banks.append(final_bank)
    return RunResult(chains=chains, banks=banks, config=config)


# --------------------------------------------------------------------------
# rate-family sampler (Poisson and exponential)


def default_rate_bank(k: int, n: int, xbar: float, config: RunConfig) -> ScaleBank:
    scales = {
        "lam": 2.0 / math.sqrt(n * xbar + 1.0)
        if config.lambda_proposal == "independence"
        else 0.1,
        "gamma": float(n),
        "p": float(n),
    }
    kinds = {"lam": "width", "gamma": "concentration", "p": "concentration"}
    vec_target = config.target_vector if k > 2 else config.target_scalar
    targets = {"lam": config.target_scalar, "gamma": vec_target, "p": vec_target}
    if config.init_scales:
        scales.update(config.init_scales)
    return ScaleBank(scales=scales, kinds=kinds, targets=targets)


def _run_rate_chain(data, family, k, prior_spec, config, rng, bank):
    T = config.iterations
    horizon = config.horizon
    xbar = float(np.mean(data.values))
    log_xbar = math.log(xbar)

    def logpost(lam, gamma, p):
        return _rate_logpost(data, prior_spec, family, lam, gamma, p)

    lp = -math.inf
    for _ in range(100):
        draws = sample_prior(prior_spec, k, family, 1, rng)
        gamma = draws.gamma[0].copy()
        p = draws.weights[0].copy()
        lam = xbar
        lp = logpost(lam, gamma, p)
        if np.isfinite(lp):
            break
    if not np.isfinite(lp):
        raise RuntimeError("could not find a finite initial log-posterior")

    block_names = ["lam", "gamma", "p"]
    counter = _BatchCounter(block_names)
    accepts = {name: np.zeros(T, dtype=np.uint8) for name in block_names}

    cols_lp = np.empty(T)
    cols_lam = np.empty(T)
    cols_g = np.empty((T, k))
    cols_w = np.empty((T, k))
    cols_rates = np.empty((T, k))

    for t in range(T):
        # global mean rate on the log scale
        eps = bank.scales["lam"]
        if config.lambda_proposal == "independence":
            log_lam_p = log_xbar + eps * rng.standard_normal()
            lam_p = math.exp(log_lam_p)
            lp_p = logpost(lam_p, gamma, p)
            # q over lam includes the 1/lam Jacobian of the log-normal draw
            lq_fwd = -0.5 * ((log_lam_p - log_xbar) / eps) ** 2 - log_lam_p
            lq_rev = -0.5 * ((math.log(lam) - log_xbar) / eps) ** 2 - math.log(lam)
            acc = metropolis_accept(rng, lp_p - lp + lq_rev - lq_fwd)
        else:
            log_lam_p = math.log(lam) + eps * rng.standard_normal()
            lam_p = math.exp(log_lam_p)
            lp_p = logpost(lam_p, gamma, p)
            acc = metropolis_accept(rng, lp_p - lp + log_lam_p - math.log(lam))
        if acc:
            lam, lp = lam_p, lp_p
        counter.update("lam", acc)
        accepts["lam"][t] = acc

        # rate-share simplex
        gamma, lp, acc = dirichlet_concentration_step(
            rng, gamma, bank.scales["gamma"], lambda g: logpost(lam, g, p), lp_cur=lp
        )
        counter.update("gamma", acc)
        accepts["gamma"][t] = acc

        # weight simplex
        p, lp, acc = dirichlet_concentration_step(
            rng, p, bank.scales["p"], lambda q: logpost(lam, gamma, q), lp_cur=lp
        )
        counter.update("p", acc)
        accepts["p"][t] = acc

        cols_lp[t] = lp
        cols_lam[t] = lam
        cols_g[t] = gamma
        cols_w[t] = p
        cols_rates[t] = lam * gamma / p

        if (t + 1) % config.batch_size == 0 and t < horizon:
            bank = adapt_scales(bank, counter.rates())
            counter.reset()

    chain = Chain(
        family=family,
        k=k,
        burn_in=config.burn_in,
        log_posterior=cols_lp,
        weights=cols_w,
        locs=cols_rates,
        scales=None,
        accepts=accepts,
        lam=cols_lam,
        gamma=cols_g,
    )
    return chain, bank


def _run_rate_family(data, family, k, prior_spec, config):
    seed_seq = np.random.SeedSequence(config.seed)
    chains, banks = [], []
    for child in seed_seq.spawn(config.n_chains):
        rng = np.random.Generator(np.random.PCG64(child))
        bank = default_rate_bank(k, data.n, float(np.mean(data.values)), config)
        chain, final_bank = _run_rate_chain(data, family, k, prior_spec, config, rng, bank)
        chains.append(chain)
        banks.append(final_bank)
    return RunResult(chains=chains, banks=banks, config=config)


def mwg_poisson(data: Dataset, k: int, prior_spec: PriorSpec, config: RunConfig) -> RunResult:
    """Poisson mixture sampler over ``(lam, gamma, p)``.

    The global mean moves on the log scale, by default through an
    independence proposal centred at the log sample mean (a random-walk
    mode is available); the two simplexes move through offset Dirichlet
    proposals.  At least one strictly positive count is required for the
    posterior to be proper under the 1/lam prior.
    """
    data.check_family("poisson")
    if not np.any(data.values > 0):
        raise ValueError(
            "a poisson mixture fit requires at least one strictly positive "
            "observation for the posterior to be proper"
        )
    if k < 2:
        raise ValueError("need at least two components")
    return _run_rate_family(data, "poisson", k, prior_spec, config)


def mwg_exponential(data: Dataset, k: int, prior_spec: PriorSpec, config: RunConfig) -> RunResult:
    """Exponential mixture sampler; mirrors the Poisson kernel."""
    data.check_family("exponential")
    if k < 2:
        raise ValueError("need at least two components")
    return _run_rate_family(data, "exponential", k, prior_spec, config)


# --------------------------------------------------------------------------
# convergence monitoring


def gelman_rubin(chains, param: str) -> float:
    """Potential scale reduction factor for one scalar across chains.

    With m chains of post-burn-in length n, within-chain variance W and
    between-chain variance B (the usual ``n * var(chain means)``), the
    factor is ``sqrt(((n-1)/n * W + B/n) / W)``.  Identical chains sit on
    the B = 0 branch and return exactly 1; zero within-chain variance is an
    error.
    """
    if len(chains) < 2:
        raise ValueError("need at least two chains")
    series = [np.asarray(c.post_burn(param), dtype=float) for c in chains]
    n = len(series[0])
    if any(len(s) != n for s in series):
        raise ValueError("chains must have equal post-burn-in length")
    if n < 2:
        raise ValueError("need at least two retained draws per chain")
    within = float(np.mean([np.var(s, ddof=1) for s in series]))
    if within == 0.0:
        raise ValueError("zero within-chain variance")
    means = np.array([s.mean() for s in series])
    between = n * float(np.var(means, ddof=1))
    if between == 0.0:
        return 1.0
    pooled = (n - 1) / n * within + between / n
    return math.sqrt(pooled / within)
