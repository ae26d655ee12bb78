"""Closed-form large-N SNR laws for both phase designs.

With many elements the randomly-phased received amplitude is a complex
Gaussian by the CLT, so the SNR is exponential; the co-phased amplitude
is Gaussian on the line with a nonzero mean, so the SNR is a scaled
one-degree noncentral chi-square.  OP, BER, and EC then come out in
closed form.  Both models describe the RIS sum alone: scenarios with a
direct path stay on the exact transform route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics as nm
from .rps import DoubleNakagami, Modulation, x_moment
from .scenario import NakagamiParams, ScenarioConfig, derive

LN2 = math.log(2.0)


def zt_stats(dn: DoubleNakagami) -> tuple:
    """(mean, variance) of one double-Nakagami summand."""
    mean = x_moment(dn, 1)
    variance = x_moment(dn, 2) - mean * mean
    return mean, max(variance, 0.0)


def _cascade_of(config: ScenarioConfig) -> DoubleNakagami:
    d = derive(config)
    return DoubleNakagami(NakagamiParams(config.m_h, d.omega_h),
                          NakagamiParams(config.m_g, d.omega_g))


@dataclass(frozen=True)
class LargeNRps:
    """Exponential SNR model: gamma ~ Exp(mean 2 sigma1_sq)."""

    sigma1_sq: float

    def __post_init__(self) -> None:
        if not self.sigma1_sq > 0.0:
            raise ValueError(f"sigma1_sq must be positive, got {self.sigma1_sq}")

    @classmethod
    def from_scenario(cls, config: ScenarioConfig) -> "LargeNRps":
        if config.geometry.direct_link:
            raise ValueError("large-N models cover the RIS sum only; "
                             "use the exact path for direct-link scenarios")
        d = derive(config)
        return cls(0.5 * config.n_elements * d.rho * d.omega_h * d.omega_g)

    @property
    def mean(self) -> float:
        return 2.0 * self.sigma1_sq


@dataclass(frozen=True)
class LargeNOps:
    """Noncentral-chi-square SNR model: s*gamma ~ chi2_1(noncentrality xi)."""

    xi: float
    s: float

    def __post_init__(self) -> None:
        if not self.xi >= 0.0:
            raise ValueError(f"noncentrality must be nonnegative, got {self.xi}")
        if not self.s > 0.0:
            raise ValueError(f"scale s must be positive, got {self.s}")

    @classmethod
    def from_scenario(cls, config: ScenarioConfig) -> "LargeNOps":
        if config.geometry.direct_link:
            raise ValueError("large-N models cover the RIS sum only; "
                             "use the exact path for direct-link scenarios")
        d = derive(config)
        mean, variance = zt_stats(_cascade_of(config))
        if variance <= 0.0:
            raise ValueError("degenerate summand: zero variance")
        n = float(config.n_elements)
        return cls(xi=n * mean * mean / variance,
                   s=1.0 / (d.rho * n * variance))

    @property
    def mean(self) -> float:
        return (1.0 + self.xi) / self.s


def largen_rps_cdf(model: LargeNRps, x: float) -> float:
    """P(gamma <= x) for the exponential model."""
    if x < 0.0:
        raise ValueError("x must be nonnegative")
    return -math.expm1(-x / (2.0 * model.sigma1_sq))


def largen_rps_chf(model: LargeNRps, t):
    """E[exp(j t gamma)] for the exponential model."""
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = 1.0 / (1.0 - 2.0j * model.sigma1_sq * arr)
    return out if np.ndim(t) else complex(out[0])


def largen_rps_ber(model: LargeNRps, modulation: Modulation) -> float:
    """Closed-form average BER 0.5 - 0.5 q^p (q + 0.5/sigma1_sq)^-p.

    Evaluated through expm1/log1p so the high-SNR tail keeps relative
    accuracy instead of cancelling against 0.5.
    """
    p, q = modulation.p, modulation.q
    b = 0.5 / model.sigma1_sq
    return -0.5 * math.expm1(p * math.log1p(-b / (q + b)))


def largen_rps_ec(model: LargeNRps) -> float:
    """Ergodic capacity of the exponential model, e^z E1(z)/ln2."""
    return nm.exp_scaled_e1(0.5 / model.sigma1_sq) / LN2


def largen_ops_pdf(model: LargeNOps, x: float) -> float:
    """Density of the scaled noncentral-chi-square model at x > 0.

    cosh is folded into two Gaussian exponents, the larger of which is
    -(sqrt(xi)-sqrt(sx))^2/2 <= 0, so nothing overflows at any xi.
    """
    if x <= 0.0:
        raise ValueError("x must be positive")
    root = math.sqrt(model.s * x)
    a = math.sqrt(model.xi)
    both = math.exp(-0.5 * (a - root) ** 2) + math.exp(-0.5 * (a + root) ** 2)
    return model.s * both / (2.0 * math.sqrt(2.0 * math.pi) * root)


def largen_ops_cdf(model: LargeNOps, x: float) -> float:
    """P(gamma <= x) = Q(sqrt(xi)-sqrt(sx)) - Q(sqrt(xi)+sqrt(sx))."""
    if x < 0.0:
        raise ValueError("x must be nonnegative")
    root = math.sqrt(model.s * x)
    a = math.sqrt(model.xi)
    val = nm.gauss_q(a - root) - nm.gauss_q(a + root)
    return min(max(val, 0.0), 1.0)


def largen_ops_chf(model: LargeNOps, t):
    """E[exp(j t gamma)] for the noncentral-chi-square model."""
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = (np.exp(-model.xi * arr / (1j * model.s + 2.0 * arr))
           / np.sqrt(1.0 - 2.0j * arr / model.s))
    return out if np.ndim(t) else complex(out[0])
