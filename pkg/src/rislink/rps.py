"""Exact statistics of the randomly-phase-shifted link.

With random per-element phases the received amplitude is an isotropic
planar random walk whose step lengths are double-Nakagami envelopes.
Every distribution result below is an inversion of the product of the
per-step envelope transforms H(t) = Phi_d(t) * prod_n Phi_n(t), where
Phi(t) = E[J0(t X)].
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import numerics as nm
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec
from .scenario import NakagamiParams, ScenarioConfig, derive

LN2 = math.log(2.0)


class IntegrabilityError(ValueError):
    """Raised when a high-SNR tail integral diverges for the given fading."""


class Modulation(enum.Enum):
    """Binary modulations with conditional-BER parameters (p, q).

    ``snr_scale`` is the argument scale a in the coherent error kernel
    Q(sqrt(2 a gamma)); it is None for the noncoherent BDPSK kernel
    0.5 exp(-gamma).
    """

    BPSK = ("bpsk", 0.5, 1.0, 1.0)
    BFSK = ("bfsk", 0.5, 0.5, 0.5)
    BDPSK = ("bdpsk", 1.0, 1.0, None)

    def __init__(self, label: str, p: float, q: float,
                 snr_scale: Optional[float]):
        self.label = label
        self.p = p
        self.q = q
        self.snr_scale = snr_scale

    @property
    def coherent(self) -> bool:
        return self.snr_scale is not None

    @classmethod
    def from_label(cls, label: str) -> "Modulation":
        for mod in cls:
            if mod.label == label.lower():
                return mod
        raise ValueError(f"unknown modulation {label!r}")


@dataclass(frozen=True)
class DoubleNakagami:
    """Product X = |h||g| of two independent Nakagami-m envelopes."""

    hop_h: NakagamiParams
    hop_g: NakagamiParams

    @property
    def lambda_n(self) -> float:
        return (self.hop_h.omega * self.hop_g.omega
                / (self.hop_h.m * self.hop_g.m))

    @property
    def mean_power(self) -> float:
        return self.hop_h.omega * self.hop_g.omega


def x_moment(dn: DoubleNakagami, k: int) -> float:
    """k-th raw moment of the double-Nakagami envelope."""
    if k < 0 or k != int(k):
        raise ValueError(f"moment order must be a nonnegative integer, got {k}")
    mh, mg = dn.hop_h.m, dn.hop_g.m
    lg = math.lgamma
    return dn.lambda_n ** (k / 2.0) * math.exp(
        lg(mh + k / 2.0) + lg(mg + k / 2.0) - lg(mh) - lg(mg))


def hankel_cascade(dn: DoubleNakagami, t):
    """E[J0(t X)] for a double-Nakagami step length."""
    z = -0.25 * dn.lambda_n * np.square(t)
    return nm.hyp2f1(dn.hop_h.m, dn.hop_g.m, 1.0, z)


def hankel_direct(params: NakagamiParams, t):
    """E[J0(t X)] for a plain Nakagami-m step length."""
    lam = params.omega / params.m
    return nm.hyp1f1(params.m, 1.0, -0.25 * lam * np.square(t))


def _cascade_series(dn: DoubleNakagami, order: int) -> list:
    # Maclaurin coefficients of E[J0(tX)] in the variable u = t^2
    mh, mg, lam = dn.hop_h.m, dn.hop_g.m, dn.lambda_n
    coeffs, c = [1.0], 1.0
    for j in range(order):
        c *= (mh + j) * (mg + j) / ((j + 1.0) ** 2) * (-0.25 * lam)
        coeffs.append(c)
    return coeffs


def _direct_series(params: NakagamiParams, order: int) -> list:
    m, lam = params.m, params.omega / params.m
    coeffs, c = [1.0], 1.0
    for j in range(order):
        c *= (m + j) / ((j + 1.0) ** 2) * (-0.25 * lam)
        coeffs.append(c)
    return coeffs


class HankelProduct:
    """H(t): product of the per-element transforms and the optional direct one.

    Identical cascade factors are grouped and raised to an integer power,
    so homogeneous surfaces cost one transform evaluation regardless of N.
    Evaluations are memoized by the byte pattern of the queried grid; the
    dict is only ever read/replaced whole under the GIL, so a concurrent
    race costs at worst a recomputation, never a torn value.
    """

    def __init__(self, elements: Sequence[DoubleNakagami],
                 direct: Optional[NakagamiParams] = None):
        self.elements = tuple(elements)
        self.direct = direct
        if not self.elements and direct is None:
            raise ValueError("need at least one cascade element or a direct path")
        groups: dict = {}
        for el in self.elements:
            key = (el.hop_h.m, el.hop_h.omega, el.hop_g.m, el.hop_g.omega)
            groups[key] = groups.get(key, 0) + 1
        self._groups = [
            (DoubleNakagami(NakagamiParams(k[0], k[1]), NakagamiParams(k[2], k[3])), n)
            for k, n in groups.items()
        ]
        self._cache: dict = {}
        self._series_cache: dict = {}
        self._tail_integral: Optional[float] = None

    @classmethod
    def from_scenario(cls, config: ScenarioConfig) -> "HankelProduct":
        d = derive(config)
        element = DoubleNakagami(NakagamiParams(config.m_h, d.omega_h),
                                 NakagamiParams(config.m_g, d.omega_g))
        direct = None
        if config.geometry.direct_link:
            direct = NakagamiParams(config.m_d, d.omega_d)
        return cls([element] * config.n_elements, direct)

    @property
    def decay_scale(self) -> float:
        """t-scale on which the fastest factor rolls off from 1."""
        scales = [2.0 / math.sqrt(el.mean_power) for el in self.elements]
        if self.direct is not None:
            scales.append(2.0 / math.sqrt(self.direct.omega))
        return min(scales)

    @property
    def tail_exponent(self) -> float:
        """Algebraic decay rate of H: H(t) = O(t^-e) as t grows."""
        e = sum(2.0 * min(el.hop_h.m, el.hop_g.m) for el in self.elements)
        if self.direct is not None:
            e += 2.0 * self.direct.m
        return e

    def __call__(self, t) -> np.ndarray:
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        key = arr.tobytes()
        got = self._cache.get(key)
        if got is None:
            got = self._evaluate(arr)
            if len(self._cache) >= 512:
                self._cache.clear()
            self._cache[key] = got
        return got if np.ndim(t) else float(got[0])

    def _evaluate(self, arr: np.ndarray) -> np.ndarray:
        out = np.ones_like(arr)
        for el, count in self._groups:
            fac = np.asarray(hankel_cascade(el, arr))
            out = out * (fac ** count if count > 1 else fac)
        if self.direct is not None:
            out = out * np.asarray(hankel_direct(self.direct, arr))
        return out

    def maclaurin_u(self, order: int) -> np.ndarray:
        """Coefficients of H as a series in u = t^2, through u^order."""
        got = self._series_cache.get(order)
        if got is None:
            series = [_cascade_series(el, order) for el in self.elements]
            if self.direct is not None:
                series.append(_direct_series(self.direct, order))
            got = nm.taylor_coefficients_product(series, order)
            self._series_cache[order] = got
        return got

    def tail_integral(self, spec: Optional[QuadratureSpec] = None) -> float:
        """int_0^inf t H(t) dt, the rho-independent high-SNR BER constant.

        The integrand decays like t^(2-e) with e the tail exponent, too
        slowly to run to numerical exhaustion when e is small, so the walk
        stops at a fixed multiple of the roll-off scale and the remainder
        is completed analytically with the locally measured power law.
        """
        if self.tail_exponent <= 2.0 + 1e-12:
            raise IntegrabilityError(
                "sum of per-path decay rates is too small: the high-SNR "
                f"constant diverges (tail exponent {self.tail_exponent:g} <= 2)")
        if self._tail_integral is None:
            base = spec or DEFAULT_QUADRATURE
            eff = replace(base, abs_tol=1e-280)  # scale-free integral
            t_h = self.decay_scale
            cut = 4096.0
            body = nm.integrate_semi_infinite(
                lambda w: np.where(w <= cut, w * self(t_h * w), 0.0),
                eff, breakpoints=2.0 ** np.arange(-8.0, 13.0))
            h_cut = self(t_h * cut)
            h_2cut = self(2.0 * t_h * cut)
            tail = 0.0
            same_sign = h_cut * h_2cut > 0.0
            if same_sign and abs(h_2cut) < abs(h_cut):
                p_hat = math.log(abs(h_cut / h_2cut)) / math.log(2.0)
                if p_hat > 2.05:
                    tail = h_cut * cut * cut / (p_hat - 2.0)
            if tail == 0.0 and abs(h_cut) * cut * cut > 1e-6 * abs(body):
                raise nm.ConvergenceError(
                    "tail of t*H(t) is not in its power-law regime yet",
                    best_estimate=t_h * t_h * body)
            self._tail_integral = t_h * t_h * (body + tail)
        return self._tail_integral


@functools.lru_cache(maxsize=64)
def _j_zeros(order: int, count: int) -> np.ndarray:
    return nm.bessel_zeros(order, count)


def _oscillatory_breakpoints(order: int, u_scale: float) -> np.ndarray:
    # enough Bessel-zero panels to let series acceleration see the tail out
    # to many times the H roll-off point, plus dyadics resolving that roll-off
    count = 64 * int(max(2, min(94, math.ceil(24.0 * max(u_scale, 1.0)
                                              / (64.0 * math.pi)))))
    zeros = _j_zeros(order, count)
    dy = u_scale * 2.0 ** np.arange(-10.0, 5.0)
    dy = dy[(dy > 1e-9) & (dy < zeros[-1])]
    return np.union1d(zeros, dy)


def _nakagami_cdf(params: NakagamiParams, x):
    """Envelope CDF: regularized lower incomplete gamma at m x^2 / Omega."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    gamma_m = math.exp(math.lgamma(params.m))
    out = np.empty_like(arr)
    for i, v in enumerate(arr.ravel()):
        if v <= 0.0:
            out.flat[i] = 0.0
        else:
            y = params.m * v * v / params.omega
            out.flat[i] = 1.0 - nm.upper_incomplete_gamma(params.m, y) / gamma_m
    out = np.clip(out, 0.0, 1.0)
    return out if np.ndim(x) else float(out[0])


def _single_cascade_cdf(dn: DoubleNakagami, r: float,
                        spec: QuadratureSpec) -> float:
    """P(X_h X_g <= r) by conditioning on the first hop.

    A lone cascade factor gives the inversion integral slowly decaying
    signed lobes that dwarf a steep CDF value, so sharp shapes cannot be
    recovered from it; this positive-integrand form has no cancellation.
    """
    m, omega = dn.hop_h.m, dn.hop_h.omega
    ln_c = math.log(2.0) + m * math.log(m / omega) - math.lgamma(m)

    def integrand(u):
        pdf = np.exp(ln_c + (2.0 * m - 1.0) * np.log(u) - m * u * u / omega)
        return pdf * _nakagami_cdf(dn.hop_g, r / u)

    bps = math.sqrt(omega) * 2.0 ** np.arange(-12.0, 6.0)
    return nm.integrate_semi_infinite(integrand, spec, breakpoints=list(bps))


def gamma_r_cdf(hp: HankelProduct, gamma: float, rho: float,
                spec: Optional[QuadratureSpec] = None) -> float:
    """CDF of the e2e SNR under random phases.

    Genuine phasor sums go through Hankel inversion of the transform
    product.  Degenerate sums (one path in total) have phase-free
    magnitudes, so they use the direct envelope law instead, which stays
    accurate for shapes far too sharp for the oscillatory route.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    if gamma == 0.0:
        return 0.0
    r = math.sqrt(gamma / rho)
    if not hp.elements:
        return _nakagami_cdf(hp.direct, r)
    if len(hp.elements) == 1 and hp.direct is None:
        val = _single_cascade_cdf(hp.elements[0], r, spec or DEFAULT_QUADRATURE)
        return min(max(val, 0.0), 1.0)
    bps = _oscillatory_breakpoints(1, r * hp.decay_scale)
    val = nm.integrate_semi_infinite(
        lambda u: nm.bessel_j(1, u) * hp(u / r),
        spec or DEFAULT_QUADRATURE, breakpoints=bps)
    return min(max(val, 0.0), 1.0)


def gamma_r_pdf(hp: HankelProduct, gamma: float, rho: float,
                spec: Optional[QuadratureSpec] = None) -> float:
    """PDF of the e2e SNR under random phases."""
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    r = math.sqrt(gamma / rho)
    bps = _oscillatory_breakpoints(0, r * hp.decay_scale)
    val = nm.integrate_semi_infinite(
        lambda u: u * nm.bessel_j(0, u) * hp(u / r),
        spec or DEFAULT_QUADRATURE, breakpoints=bps)
    return max(val / (2.0 * rho * r * r), 0.0)


def op_rps(hp: HankelProduct, gamma_th: float, rho: float,
           spec: Optional[QuadratureSpec] = None) -> float:
    """Outage probability P(gamma <= gamma_th) under random phases."""
    if gamma_th <= 0.0:
        raise ValueError("gamma_th must be positive")
    return gamma_r_cdf(hp, gamma_th, rho, spec)


def gamma_r_moment(hp: HankelProduct, k: int, rho: float) -> float:
    """k-th raw SNR moment (k <= 4) from the exact Maclaurin data of H."""
    if k != int(k) or not 1 <= k <= 4:
        raise ValueError(f"moment order must be an integer in 1..4, got {k}")
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    k = int(k)
    h = hp.maclaurin_u(k)
    return rho ** k * (-4.0) ** k * math.factorial(k) ** 2 * float(h[k])


def ber_rps(hp: HankelProduct, rho: float, modulation: Modulation,
            spec: Optional[QuadratureSpec] = None) -> float:
    """Average BER under random phases.

    The transform-domain average collapses to a single integral of
    u * M(1+p; 2; -u^2) * H(u sqrt(4 q rho)); for BDPSK the confluent
    kernel is exactly exp(-u^2).
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    p, q = modulation.p, modulation.q
    s = math.sqrt(4.0 * q * rho)
    if modulation is Modulation.BDPSK:
        def kernel(u):
            return np.exp(-u * u)
    else:
        def kernel(u):
            return nm.hyp1f1(1.0 + p, 2.0, -u * u)
    scales = sorted({1.0, hp.decay_scale / s})
    bps = np.unique(np.concatenate(
        [sc * 2.0 ** np.arange(-8.0, 10.0) for sc in scales]))
    # BER spans many decades across a power sweep: drive the quadrature by
    # relative tolerance alone
    eff = replace(spec or DEFAULT_QUADRATURE, abs_tol=1e-280)
    val = p * nm.integrate_semi_infinite(
        lambda u: u * kernel(u) * hp(s * u), eff, breakpoints=bps)
    return min(max(val, 0.0), 0.5)


def ber_rps_asymptotic(hp: HankelProduct, rho: float,
                       modulation: Modulation) -> float:
    """High-SNR BER p/(4 q rho) * int t H(t) dt; decays exactly as 1/rho."""
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    return modulation.p * hp.tail_integral() / (4.0 * modulation.q * rho)


def ec_taylor(mu1: float, mu2: float) -> float:
    """Second-order ergodic-capacity approximation from two SNR moments.

    E[log2(1+g)] ~ log2(1+mu1) - (mu2-mu1^2) / (2 (1+mu1)^2 ln 2), the
    delta-method expansion of the log about the mean.
    """
    if mu1 < 0.0:
        raise ValueError("mean SNR must be nonnegative")
    var = mu2 - mu1 * mu1
    if var < -1e-9 * max(mu2, 1.0):
        raise ValueError(f"negative SNR variance ({var:g}): inconsistent moments")
    var = max(var, 0.0)
    return (math.log1p(mu1) - var / (2.0 * (1.0 + mu1) ** 2)) / LN2


# --- quantized phase shifting ----------------------------------------

def quantized_phase_factors(bits: int) -> tuple:
    """(E[e^{j phi}], E[e^{2j phi}]) for the two-hop b-bit residual phase.

    Each hop phase estimate leaves an independent error uniform on
    [-pi/2^b, pi/2^b), so phi is their sum and both factors are squared
    single-hop sinc terms.
    """
    if bits != int(bits) or bits < 1:
        raise ValueError(f"quantizer bits must be a positive integer, got {bits}")
    a = math.pi / 2.0 ** bits
    c1 = (math.sin(a) / a) ** 2
    c2 = (math.sin(2.0 * a) / (2.0 * a)) ** 2
    return c1, c2


def gamma_q_moment(dn: DoubleNakagami, n_elements: int, rho: float,
                   bits: int, k: int) -> float:
    """k-th raw SNR moment (k in {1, 2}) under b-bit quantized phases.

    Homogeneous elements, no direct path: the moments of |sum X_n
    e^{j phi_n}|^2 follow from the index-pattern expansion with phase
    factors c1, c2.
    """
    if k not in (1, 2):
        raise ValueError("quantized moments available for k = 1 or 2")
    if n_elements < 1:
        raise ValueError("need at least one element")
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    c1, c2 = quantized_phase_factors(bits)
    mu = [x_moment(dn, j) for j in range(5)]
    n = float(n_elements)
    if k == 1:
        s2 = n * mu[2] + n * (n - 1.0) * mu[1] ** 2 * c1 * c1
        return rho * s2
    s4 = (n * mu[4]
          + n * (n - 1.0) * (2.0 * mu[2] ** 2 + mu[2] ** 2 * c2 * c2
                             + 4.0 * mu[3] * mu[1] * c1 * c1)
          + n * (n - 1.0) * (n - 2.0) * (2.0 * mu[2] * mu[1] ** 2 * c2 * c1 * c1
                                         + 4.0 * mu[2] * mu[1] ** 2 * c1 * c1)
          + n * (n - 1.0) * (n - 2.0) * (n - 3.0) * mu[1] ** 4 * c1 ** 4)
    return rho * rho * s4
