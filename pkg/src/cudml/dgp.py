"""Synthetic data generation, oracle nuisance functions, and the variance bound.

The synthetic design draws twenty uniform covariates, of which the first five
drive the baseline outcome, the first two drive the treatment effect and the
propensity, and the rest are noise. The treatment effect is X1 + X2, so the
true average effect is exactly 1. A separate helper assigns semi-synthetic
treatments to user-supplied data from externally fitted propensity scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import OutOfRange

#: covariate dimension of the synthetic design
N_COVARIATES = 20

#: E[D] / alpha under the synthetic propensity (exact; min of two uniforms
#: has density 2(1-m), and the Beta(2,4) CDF integrates to 10/21 against it)
SHARE_PER_ALPHA = 31.0 / 21.0

#: variance of the treatment effect X1 + X2 under the uniform design
EFFECT_VARIANCE = 1.0 / 6.0


def beta24_cdf(x):
    """CDF of the Beta(2, 4) distribution, in closed form.

    For integer shapes the regularized incomplete beta function reduces to a
    binomial tail sum: I_x(2,4) = 10x^2(1-x)^3 + 10x^3(1-x)^2 + 5x^4(1-x) + x^5.
    Accepts scalars or arrays in [0, 1].
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise OutOfRange("beta24_cdf requires x in [0, 1]")
    q = 1.0 - x
    out = 10.0 * x**2 * q**3 + 10.0 * x**3 * q**2 + 5.0 * x**4 * q + x**5
    return float(out) if out.ndim == 0 else out


def friedman_baseline(x):
    """Scaled Friedman function sin(pi*x1*x2) + 2(x3-0.5)^2 + x4 + 0.5*x5.

    ``x`` is a single covariate vector (length >= 5) or a matrix with one
    row per observation; only the first five coordinates matter.
    """
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] < 5:
        raise OutOfRange(f"need at least 5 covariates, got {arr.shape[1]}")
    out = (
        np.sin(np.pi * arr[:, 0] * arr[:, 1])
        + 2.0 * (arr[:, 2] - 0.5) ** 2
        + arr[:, 3]
        + 0.5 * arr[:, 4]
    )
    return float(out[0]) if single else out


def synthetic_propensity(x, alpha: float):
    """Treatment probability alpha * (1 + Beta24CDF(min(x1, x2))).

    Bounded in (alpha, 2*alpha], so overlap holds by construction for
    alpha < 0.5.
    """
    if not 0.0 < alpha < 0.5:
        raise OutOfRange(f"alpha must be in (0, 0.5), got {alpha}")
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] < 2:
        raise OutOfRange("need at least 2 covariates")
    m = np.minimum(arr[:, 0], arr[:, 1])
    out = alpha * (1.0 + beta24_cdf(m))
    return float(out[0]) if single else out


def alpha_for_share(share: float) -> float:
    """Propensity scale alpha giving expected treated share E[D] = share.

    Inverts E[D] = (31/21) * alpha; valid for share < 31/42 (alpha < 0.5).
    """
    if not 0.0 < share < 31.0 / 42.0:
        raise OutOfRange(f"share must be in (0, 31/42), got {share}")
    return share / SHARE_PER_ALPHA


@dataclass(frozen=True)
class SyntheticTruth:
    """Oracle access to the synthetic design: true effect, mu_d and p."""

    alpha: float
    sigma: float
    ate: float = 1.0

    def mu(self, x: np.ndarray, d: int) -> np.ndarray:
        """Conditional outcome mean b(x) + (d - 0.5)(x1 + x2)."""
        arr = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return friedman_baseline(arr) + (d - 0.5) * (arr[:, 0] + arr[:, 1])

    def mu1(self, x: np.ndarray) -> np.ndarray:
        return self.mu(x, 1)

    def mu0(self, x: np.ndarray) -> np.ndarray:
        return self.mu(x, 0)

    def prop(self, x: np.ndarray) -> np.ndarray:
        return synthetic_propensity(np.atleast_2d(x), self.alpha)


def generate_synthetic(
    n: int, share: float, sigma: float, rng: np.random.Generator
) -> tuple[Dataset, SyntheticTruth]:
    """Draw a dataset of size n from the synthetic design.

    X ~ Unif[0,1]^20 i.i.d., D|X ~ Bernoulli(p(X)), and
    Y = b(X) + (D - 0.5)(X1 + X2) + sigma * eps with standard normal eps.
    """
    if sigma < 0.0:
        raise OutOfRange(f"sigma must be nonnegative, got {sigma}")
    alpha = alpha_for_share(share)
    x = rng.random((n, N_COVARIATES))
    p = synthetic_propensity(x, alpha)
    d = (rng.random(n) < p).astype(np.int64)
    eps = rng.standard_normal(n)
    y = friedman_baseline(x) + (d - 0.5) * (x[:, 0] + x[:, 1]) + sigma * eps
    return Dataset(x, d, y), SyntheticTruth(alpha=alpha, sigma=sigma)


@dataclass(frozen=True)
class OracleVariance:
    """Efficiency bound V* with the Monte Carlo error of its integral terms."""

    v_star: float
    mc_samples: int
    mc_std_error: float


def oracle_variance(
    share: float,
    sigma: float,
    mc_samples: int = 1_000_000,
    rng: np.random.Generator | None = None,
) -> OracleVariance:
    """Asymptotic variance bound for the synthetic design.

    V* = Var[mu1(X) - mu0(X)] + E[sigma^2 / p(X)] + E[sigma^2 / (1 - p(X))].
    The first term is Var[X1 + X2] = 1/6 exactly; the outcome noise is
    homoskedastic so sigma_d^2(X) = sigma^2, and the two expectations are
    integrated by plain Monte Carlo over (X1, X2).
    """
    if mc_samples < 10_000:
        raise OutOfRange(f"mc_samples must be at least 10000, got {mc_samples}")
    if sigma < 0.0:
        raise OutOfRange(f"sigma must be nonnegative, got {sigma}")
    alpha = alpha_for_share(share)
    if rng is None:
        rng = np.random.default_rng(0)
    x12 = rng.random((mc_samples, 2))
    p = synthetic_propensity(x12, alpha)
    integrand = 1.0 / p + 1.0 / (1.0 - p)
    sigma2 = sigma * sigma
    v_star = EFFECT_VARIANCE + sigma2 * float(np.mean(integrand))
    mc_std_error = sigma2 * float(np.std(integrand)) / np.sqrt(mc_samples)
    return OracleVariance(v_star=v_star, mc_samples=mc_samples, mc_std_error=mc_std_error)


def semi_synthetic_assign(
    p_hat: np.ndarray, lam: float, rng: np.random.Generator
) -> np.ndarray:
    """Assign treatments D_i = 1{V_i < p_hat_i / lam} with V_i ~ Unif[0,1].

    ``lam`` controls the expected treated share, mean(min(p_hat/lam, 1)).
    """
    p = np.asarray(p_hat, dtype=np.float64)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise OutOfRange("propensity scores must lie strictly inside (0, 1)")
    if not lam > 0.0:
        raise OutOfRange(f"lambda must be positive, got {lam}")
    v = rng.random(p.size)
    return (v < p / lam).astype(np.int64)
