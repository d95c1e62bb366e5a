"""Classical spike-and-slab variable selection sampler.

Dirac spike at zero with one of three conjugate slab families on the
active coefficients. Serves as a comparison baseline for the fusion
sampler and as a cross-check on the shared conjugate machinery.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.special import gammaln

from .model import (
    Chain,
    Dataset,
    EmptyChain,
    HyperParams,
    SingularDesign,
    SingularSystem,
)
from .sampler import LOG_2PI, SamplerConfig, _bernoulli_prob_one, sample_sigma2


@dataclass(frozen=True)
class ISlab:
    """Independence slab: prior covariance scale * identity."""

    scale: float

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("i-slab scale must be positive")


@dataclass(frozen=True)
class GSlab:
    """Zellner g-prior slab: covariance scale * (X'X)^-1."""

    scale: float

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("g-slab scale must be positive")


@dataclass(frozen=True)
class FSlab:
    """Fractional slab: data-centered prior with covariance (1/fraction) * (X'X)^-1.

    The prior mean is the least-squares estimate of the active block.
    The conjugate update then gives posterior covariance
    (1/(1+fraction)) (X'X)^-1, not (X'X)^-1; the latter drops the
    shrinkage factor and breaks the evidence identity.
    """

    fraction: float

    def __post_init__(self):
        if self.fraction <= 0:
            raise ValueError("f-slab fraction must be positive")


Slab = Union[ISlab, GSlab, FSlab]


@dataclass(frozen=True)
class SelectionFactors:
    """Posterior pieces for one inclusion configuration."""

    precision_chol: np.ndarray
    mean: np.ndarray
    scale: float
    log_det_post_cov: float
    log_det_prior_cov: float
    active: np.ndarray


class SelectionKernel:
    """Cached evidence evaluator for the selection model."""

    def __init__(self, data: Dataset, slab: Slab):
        data.validate()
        self.data = data
        self.slab = slab
        self.n, self.p = data.X.shape
        self.gram = data.X.T @ data.X
        self.xty = data.X.T @ data.y
        self.yty = float(data.y @ data.y)
        self._const = gammaln(0.5 * self.n) - 0.5 * self.n * LOG_2PI
        self._cache: dict[bytes, float] = {}

    def factors(self, xi: np.ndarray) -> SelectionFactors:
        active = np.flatnonzero(xi)
        p0 = active.shape[0]
        if p0 == 0:
            return SelectionFactors(
                precision_chol=np.zeros((0, 0)),
                mean=np.zeros(0),
                scale=0.5 * self.yty,
                log_det_post_cov=0.0,
                log_det_prior_cov=0.0,
                active=active,
            )
        gram = self.gram[np.ix_(active, active)]
        rhs = self.xty[active]
        slab = self.slab
        if isinstance(slab, ISlab):
            precision = gram + np.eye(p0) / slab.scale
            full_rhs = rhs
            prior_quad = 0.0
            log_det_prior_cov = p0 * math.log(slab.scale)
        else:
            try:
                gram_factor = cho_factor(gram, lower=True)
            except np.linalg.LinAlgError as exc:
                raise SingularDesign("active design is rank deficient") from exc
            log_det_gram = 2.0 * np.log(np.diag(gram_factor[0])).sum()
            if isinstance(slab, GSlab):
                precision = gram * (1.0 + 1.0 / slab.scale)
                full_rhs = rhs
                prior_quad = 0.0
                log_det_prior_cov = p0 * math.log(slab.scale) - log_det_gram
            else:
                b = slab.fraction
                # Prior mean is the least-squares fit; its precision-weighted
                # contribution is b * X'y, so the combined rhs is (1+b) X'y.
                precision = gram * (1.0 + b)
                full_rhs = (1.0 + b) * rhs
                ls = cho_solve(gram_factor, rhs)
                prior_quad = b * float(rhs @ ls)
                log_det_prior_cov = -p0 * math.log(b) - log_det_gram
        try:
            L, _ = cho_factor(precision, lower=True)
        except np.linalg.LinAlgError as exc:
            raise SingularDesign("posterior precision not PD") from exc
        mean = cho_solve((L, True), full_rhs)
        scale = 0.5 * (self.yty + prior_quad - float(full_rhs @ mean))
        return SelectionFactors(
            precision_chol=L,
            mean=mean,
            scale=scale,
            log_det_post_cov=-2.0 * np.log(np.diag(L)).sum(),
            log_det_prior_cov=log_det_prior_cov,
            active=active,
        )

    def log_marginal(self, xi: np.ndarray) -> float:
        key = xi.tobytes()
        try:
            return self._cache[key]
        except KeyError:
            pass
        try:
            f = self.factors(xi)
        except (SingularDesign, SingularSystem):
            self._cache[key] = -np.inf
            return -np.inf
        if f.scale <= 0.0:
            value = -np.inf
        else:
            value = (
                self._const
                + 0.5 * (f.log_det_post_cov - f.log_det_prior_cov)
                - 0.5 * self.n * math.log(f.scale)
            )
        self._cache[key] = value
        return value


def selection_posterior_factors(data: Dataset, xi: np.ndarray, slab: Slab) -> SelectionFactors:
    """Posterior covariance factor, mean and error scale for one configuration."""
    return SelectionKernel(data, slab).factors(np.asarray(xi, dtype=np.uint8))


def selection_log_marginal(data: Dataset, xi: np.ndarray, slab: Slab) -> float:
    """Log evidence of the response given an inclusion configuration."""
    return SelectionKernel(data, slab).log_marginal(np.asarray(xi, dtype=np.uint8))


def _selection_sweep(
    xi: np.ndarray,
    omega: float,
    kernel: SelectionKernel,
    hyper: HyperParams,
    rng: np.random.Generator,
):
    p = xi.shape[0]
    order = rng.permutation(p)
    cur = kernel.log_marginal(xi)
    for j in order:
        flipped = xi.copy()
        flipped[j] ^= 1
        other = kernel.log_marginal(flipped)
        if xi[j] == 1:
            ml_one, ml_zero = cur, other
        else:
            ml_one, ml_zero = other, cur
        prob_one = _bernoulli_prob_one(ml_one, ml_zero, omega)
        new_bit = 1 if rng.random() < prob_one else 0
        if new_bit != xi[j]:
            xi = flipped
            cur = other
    factors = kernel.factors(xi)
    sigma2 = sample_sigma2(rng, kernel.n, factors.scale)
    p0 = int(xi.sum())
    omega = float(rng.beta(hyper.a_omega + p0, hyper.b_omega + p - p0))
    beta = np.zeros(p)
    if p0 > 0:
        z = rng.standard_normal(p0)
        beta[factors.active] = factors.mean + math.sqrt(sigma2) * solve_triangular(
            factors.precision_chol, z, lower=True, trans="T"
        )
    return xi, omega, sigma2, beta


def selection_gibbs(
    data: Dataset, slab: Slab, hyper: HyperParams, config: SamplerConfig
) -> Chain:
    """Run the selection Gibbs sampler; inactive coefficients are exact zeros."""
    kernel = SelectionKernel(data, slab)
    rng = np.random.default_rng(config.seed)
    p = data.p
    xi = np.ones(p, dtype=np.uint8)
    if kernel.log_marginal(xi) == -np.inf:
        # Full model inadmissible (e.g. p > n with g/f-slab): start empty.
        xi = np.zeros(p, dtype=np.uint8)
    omega = hyper.a_omega / (hyper.a_omega + hyper.b_omega)
    kept = config.total_iterations - config.burn_in
    xi_draws = np.empty((kept, p), dtype=np.uint8)
    beta_draws = np.empty((kept, p))
    sigma2_draws = np.empty(kept)
    omega_draws = np.empty(kept)
    for it in range(config.total_iterations):
        xi, omega, sigma2, beta = _selection_sweep(xi, omega, kernel, hyper, rng)
        keep = it - config.burn_in
        if keep >= 0:
            xi_draws[keep] = xi
            beta_draws[keep] = beta
            sigma2_draws[keep] = sigma2
            omega_draws[keep] = omega
    meta = {
        "seed": config.seed,
        "total_iterations": config.total_iterations,
        "burn_in": config.burn_in,
        "n": data.n,
        "p": data.p,
        "a_omega": hyper.a_omega,
        "b_omega": hyper.b_omega,
        "slab": repr(slab),
        "kind": "selection",
    }
    return Chain(
        delta=xi_draws,
        beta=beta_draws,
        sigma2=sigma2_draws,
        omega=omega_draws,
        meta=meta,
    )


@dataclass(frozen=True)
class SelectionSummary:
    beta_mean: np.ndarray
    xi_prob: np.ndarray
    sigma2_mean: float
    omega_mean: float


def summarize_selection(chain: Chain) -> SelectionSummary:
    if len(chain) == 0:
        raise EmptyChain("cannot summarize an empty chain")
    return SelectionSummary(
        beta_mean=chain.beta.mean(axis=0),
        xi_prob=chain.delta.mean(axis=0),
        sigma2_mean=float(chain.sigma2.mean()),
        omega_mean=float(chain.omega.mean()),
    )
