"""Exact statistics of the coherently-combined (optimal-phase) link.

With co-phased elements the received amplitude is the plain sum
A = sum_n X_n + |h_d|, handled through its characteristic function
Psi_A(t) = Psi_d(t) * prod_n Psi_n(t) and Fourier (Gil-Pelaez style)
inversion of the distribution.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence

import numpy as np

from . import numerics as nm
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec
from .rps import DoubleNakagami, Modulation, x_moment
from .scenario import NakagamiParams, ScenarioConfig, derive

SQRT_PI = math.sqrt(math.pi)


def nakagami_moment(params: NakagamiParams, k: int) -> float:
    """k-th raw moment of a Nakagami-m envelope."""
    if k < 0 or k != int(k):
        raise ValueError(f"moment order must be a nonnegative integer, got {k}")
    lam = params.omega / params.m
    return lam ** (k / 2.0) * math.exp(
        math.lgamma(params.m + k / 2.0) - math.lgamma(params.m))


def chf_direct(params: NakagamiParams, t):
    """E[e^{jt|h_d|}] for a Nakagami-m envelope."""
    arr = np.asarray(t, dtype=float)
    lam = params.omega / params.m
    x = -0.25 * lam * arr * arr
    even = nm.hyp1f1(params.m, 0.5, x)
    odd = nm.hyp1f1(params.m + 0.5, 1.5, x)
    coef = math.sqrt(lam) * math.exp(
        math.lgamma(params.m + 0.5) - math.lgamma(params.m))
    out = even + 1j * coef * arr * odd
    return out if np.ndim(t) else complex(out)


def chf_cascade(dn: DoubleNakagami, t):
    """E[e^{jtX}] for a double-Nakagami envelope.

    The closed form has a Gauss-hypergeometric factor evaluated on the
    unit circle at Z = (-jt - c0)/(-jt + c0) with c0 = 2/sqrt(Lambda).
    The hop shapes are interchangeable, so they are ordered to make the
    hypergeometric parameter difference nonnegative, the configuration
    with well-behaved connection formulas.
    """
    arr = np.asarray(t, dtype=float)
    mh, mg = dn.hop_h.m, dn.hop_g.m
    if mh > mg:
        mh, mg = mg, mh
    lam = dn.lambda_n
    c0 = 2.0 / math.sqrt(lam)
    zden = c0 - 1j * arr
    z_circ = -np.exp(2j * np.arctan(arr / c0))
    gauss = nm.hyp2f1(2.0 * mh, mh - mg + 0.5, mh + mg + 0.5, z_circ)
    log_pref = (math.lgamma(mh + 0.5) + math.lgamma(mg + 0.5)
                - math.lgamma(mh + mg + 0.5) - 0.5 * math.log(math.pi))
    power = np.exp(2.0 * mh * (math.log(2.0 * c0) - np.log(zden)))
    out = math.exp(log_pref) * power * gauss
    return out if np.ndim(t) else complex(out)


def _chf_cascade_complex(dn: DoubleNakagami, z: np.ndarray) -> np.ndarray:
    """chf_cascade continued to complex arguments with Im z > 0.

    Same closed form; the circle variable is computed from its rational
    definition (no arctan), which maps the upper half-plane strictly
    inside the unit disk.
    """
    mh, mg = dn.hop_h.m, dn.hop_g.m
    if mh > mg:
        mh, mg = mg, mh
    c0 = 2.0 / math.sqrt(dn.lambda_n)
    minus_jz = -1j * z
    z_arg = (minus_jz - c0) / (minus_jz + c0)
    gauss = nm.hyp2f1(2.0 * mh, mh - mg + 0.5, mh + mg + 0.5, z_arg)
    log_pref = (math.lgamma(mh + 0.5) + math.lgamma(mg + 0.5)
                - math.lgamma(mh + mg + 0.5) - 0.5 * math.log(math.pi))
    power = np.exp(2.0 * mh * (math.log(2.0 * c0) - np.log(c0 + minus_jz)))
    return math.exp(log_pref) * power * gauss


_GL20_NODES, _GL20_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _chf_direct_complex(params: NakagamiParams, z: np.ndarray) -> np.ndarray:
    """E[e^{jz|h_d|}] for uniformly damped complex z (constant Im z > 0).

    Direct quadrature of the damped oscillatory density integral; the
    damping e^{-Im(z) r} keeps the effective support short, so panels of
    a few radians each reach machine accuracy.
    """
    imz = float(z.imag[0])
    if imz <= 0.0:
        raise ValueError("complex CHF path requires Im z > 0")
    m, om = params.m, params.omega
    b = m / om
    r_density = math.sqrt((m + 20.0 * math.sqrt(m) + 40.0) / b)
    r_core = min(r_density, 12.0 / imz)
    r_max = min(r_density, 50.0 / imz)
    re_max = float(np.max(np.abs(z.real)))

    def _panel_edges(lo, hi, per_panel):
        n = int(np.clip(math.ceil(re_max * (hi - lo) / per_panel) + 2, 4, 512))
        return np.linspace(lo, hi, n + 1)

    # coarse panels are fine once e^{-imz r} has dropped a dozen e-folds
    edges = _panel_edges(0.0, r_core, 5.0)
    if r_max > r_core * 1.0001:
        edges = np.concatenate([edges, _panel_edges(r_core, r_max, 25.0)[1:]])
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    r = (mid[:, None] + half[:, None] * _GL20_NODES[None, :]).ravel()
    w = (half[:, None] * _GL20_WEIGHTS[None, :]).ravel()
    log_f = (math.log(2.0) + m * math.log(b) + (2.0 * m - 1.0) * np.log(r)
             - b * r * r - math.lgamma(m))
    return np.exp(1j * z[:, None] * r[None, :]) @ (np.exp(log_f) * w)


def _moments_to_cumulants(mom: Sequence[float]) -> List[float]:
    # mom[0] = 1, mom[j] = raw moment of order j
    n = len(mom) - 1
    kap = [0.0] * (n + 1)
    for j in range(1, n + 1):
        acc = mom[j]
        for i in range(1, j):
            acc -= math.comb(j - 1, i - 1) * kap[i] * mom[j - i]
        kap[j] = acc
    return kap


def _cumulants_to_moments(kap: Sequence[float]) -> List[float]:
    n = len(kap) - 1
    mom = [1.0] + [0.0] * n
    for j in range(1, n + 1):
        mom[j] = sum(math.comb(j - 1, i - 1) * kap[i] * mom[j - i]
                     for i in range(1, j + 1))
    return mom


class AmplitudeChf:
    """Characteristic function of the amplitude sum A = sum X_n + |h_d|.

    This is the CHF of the *amplitude*, not of the SNR; every consumer
    squares/scales accordingly.  Identical elements are collapsed into an
    integer power, and evaluations are memoized exactly as in the Hankel
    product (benign-race cache).
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
        self._moment_cache: dict = {}

    @classmethod
    def from_scenario(cls, config: ScenarioConfig) -> "AmplitudeChf":
        d = derive(config)
        element = DoubleNakagami(NakagamiParams(config.m_h, d.omega_h),
                                 NakagamiParams(config.m_g, d.omega_g))
        direct = None
        if config.geometry.direct_link:
            direct = NakagamiParams(config.m_d, d.omega_d)
        return cls([element] * config.n_elements, direct)

    @property
    def tail_exponent(self) -> float:
        e = sum(2.0 * min(el.hop_h.m, el.hop_g.m) for el in self.elements)
        if self.direct is not None:
            e += 2.0 * self.direct.m
        return e

    def amplitude_moment(self, k: int) -> float:
        """Raw moment E[A^k], k <= 8, by cumulant accumulation."""
        if k != int(k) or not 0 <= k <= 8:
            raise ValueError(f"amplitude moment order must be in 0..8, got {k}")
        k = int(k)
        got = self._moment_cache.get(k)
        if got is None:
            kap = [0.0] * (k + 1)
            for el, count in self._groups:
                mom = [1.0] + [x_moment(el, j) for j in range(1, k + 1)]
                for j, kj in enumerate(_moments_to_cumulants(mom)):
                    kap[j] += count * kj
            if self.direct is not None:
                mom = [1.0] + [nakagami_moment(self.direct, j)
                               for j in range(1, k + 1)]
                for j, kj in enumerate(_moments_to_cumulants(mom)):
                    kap[j] += kj
            got = _cumulants_to_moments(kap)[k]
            self._moment_cache[k] = got
        return got

    def __call__(self, t) -> np.ndarray:
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        key = arr.tobytes()
        got = self._cache.get(key)
        if got is None:
            got = self._evaluate(arr)
            if len(self._cache) >= 512:
                self._cache.clear()
            self._cache[key] = got
        return got if np.ndim(t) else complex(got[0])

    def _evaluate(self, arr: np.ndarray) -> np.ndarray:
        out = np.ones(arr.shape, dtype=complex)
        for el, count in self._groups:
            fac = np.asarray(chf_cascade(el, arr))
            out = out * (fac ** count if count > 1 else fac)
        if self.direct is not None:
            out = out * np.asarray(chf_direct(self.direct, arr))
        return out

    def value_complex(self, z: np.ndarray) -> np.ndarray:
        """CHF on a horizontal line Im z = const > 0 (damped evaluation)."""
        out = np.ones(z.shape, dtype=complex)
        for el, count in self._groups:
            fac = _chf_cascade_complex(el, z)
            out = out * (fac ** count if count > 1 else fac)
        if self.direct is not None:
            out = out * _chf_direct_complex(self.direct, z)
        return out


def _kernel_breakpoints(freqs: Sequence[float], span: float) -> np.ndarray:
    parts = [2.0 ** np.arange(-6.0, math.ceil(math.log2(span)) + 1.0)]
    for f in freqs:
        h = math.pi / max(f, 0.02)
        count = int(min(4096, max(4, math.ceil(span / h))))
        parts.append(h * np.arange(1, count + 1))
    bps = np.unique(np.concatenate(parts))
    return bps[bps <= span * 1.0001]


def _envelope_end(chf: "AmplitudeChf", sigma: float, var_t: float,
                  span: float) -> float:
    """First tau where |Psi_A(tau/sigma)| has decayed below 1e-3.

    One coarse vectorized probe; the node array is identical across
    repeated CDF calls on the same CHF, so it hits the evaluation cache.
    """
    cap = min(span, 40.0 * max(1.0, 1.0 / math.sqrt(var_t)))
    taus = np.geomspace(1.0, cap, 96)
    small = np.flatnonzero(np.abs(chf(taus / sigma)) < 1e-3)
    end = taus[small[0]] if small.size else cap
    return max(8.0, end)


def _inversion_breakpoints(rt: float, mt: float, bulk_end: float,
                           span: float) -> np.ndarray:
    """Panel edges for the CDF inversion integrand.

    In the bulk the CHF envelope still oscillates (beat frequency
    |mt - rt| plus the carrier mt); past the envelope the CHF phase is
    constant, so the surviving oscillation of e^{-j rt tau} has the fixed
    half-period pi/rt.  The far ladder is kept *pure* -- a union of
    incommensurate ladders would split half-periods into same-sign runs
    and defeat the alternating-series acceleration.
    """
    bulk_end = min(span, bulk_end)
    parts = [2.0 ** np.arange(-6.0, max(1.0, math.ceil(math.log2(bulk_end))))]
    for f in (abs(mt - rt), mt):
        h = math.pi / max(f, 0.02)
        count = int(min(4096, max(2, math.ceil(bulk_end / h))))
        parts.append(h * np.arange(1, count + 1))
    bulk = np.unique(np.concatenate(parts))
    bulk = bulk[bulk <= bulk_end]
    h_far = math.pi / rt if rt > 0 else math.inf
    if h_far < span - bulk_end:
        count = int(min(4096, math.ceil((span - bulk_end) / h_far)))
        far = bulk_end + h_far * np.arange(1, count + 1)
    else:
        far = bulk_end * 2.0 ** np.arange(1, 14)
        far = far[far <= span * 1.0001]
    return np.concatenate([bulk, far])


def gamma_c_cdf(chf: AmplitudeChf, gamma: float, rho: float,
                spec: Optional[QuadratureSpec] = None) -> float:
    """CDF of the coherent-combining SNR by CHF inversion.

    The inversion integral is evaluated in the normalized variable
    tau = t * sqrt(E[A^2]) so that both the oscillation frequencies and
    the decay length are O(1)-scaled regardless of the physical units;
    the 0/0 at the origin is removed by an analytic patch below tau0.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    if gamma == 0.0:
        return 0.0
    r = math.sqrt(gamma / rho)
    if chf.amplitude_moment(4) < 1e-12 * r ** 4:  # Markov: P(A > r) < 1e-12
        return 1.0
    sigma = math.sqrt(chf.amplitude_moment(2))
    rt = r / sigma
    mt = chf.amplitude_moment(1) / sigma
    var_t = max(1.0 - mt * mt, 1e-12)
    span = min(9000.0, max(64.0, 30.0 / math.sqrt(var_t),
                           1e9 ** (1.0 / max(chf.tail_exponent, 2.0))))
    bulk_end = _envelope_end(chf, sigma, var_t, span)
    bps = _inversion_breakpoints(rt, mt, bulk_end, span)
    tau0 = 1e-6

    def integrand(tau):
        return np.imag(np.exp(-1j * rt * tau) * chf(tau / sigma)) / tau

    val = nm.integrate_semi_infinite(integrand, spec or DEFAULT_QUADRATURE,
                                     breakpoints=bps, lower=tau0)
    cdf = 0.5 - (tau0 * (mt - rt) + val) / math.pi
    return min(max(cdf, 0.0), 1.0)


def op_ops(chf: AmplitudeChf, gamma_th: float, rho: float,
           spec: Optional[QuadratureSpec] = None) -> float:
    """Outage probability P(gamma <= gamma_th) under coherent combining."""
    if gamma_th <= 0.0:
        raise ValueError("gamma_th must be positive")
    return gamma_c_cdf(chf, gamma_th, rho, spec)


def gamma_c_moment(config: ScenarioConfig, k: int) -> float:
    """k-th raw SNR moment (k <= 4) under coherent combining.

    E[gamma^k] = rho^k E[A^(2k)]; the amplitude moment comes from
    cumulant accumulation over the i.i.d. elements plus the direct term.
    """
    if k != int(k) or not 1 <= k <= 4:
        raise ValueError(f"moment order must be an integer in 1..4, got {k}")
    chf = AmplitudeChf.from_scenario(config)
    rho = derive(config).rho
    return rho ** k * chf.amplitude_moment(2 * int(k))


def gamma_c_moment_multinomial(config: ScenarioConfig, k: int) -> float:
    """Literal multinomial expansion of E[(sum X_n + |h_d|)^(2k)].

    Exponential term count: kept as an independent cross-check and
    guarded against blowup at k > 2 with more than 8 elements.
    """
    if k != int(k) or not 1 <= k <= 4:
        raise ValueError(f"moment order must be an integer in 1..4, got {k}")
    n = config.n_elements
    if k > 2 and n > 8:
        raise ValueError("multinomial expansion too large for k > 2 with "
                         "N > 8; use gamma_c_moment")
    d = derive(config)
    element = DoubleNakagami(NakagamiParams(config.m_h, d.omega_h),
                             NakagamiParams(config.m_g, d.omega_g))
    power = 2 * int(k)
    part_moments = [[1.0] + [x_moment(element, j) for j in range(1, power + 1)]
                    for _ in range(n)]
    if config.geometry.direct_link:
        dpar = NakagamiParams(config.m_d, d.omega_d)
        part_moments.append([1.0] + [nakagami_moment(dpar, j)
                                     for j in range(1, power + 1)])

    def expand(idx: int, remaining: int) -> float:
        if idx == len(part_moments) - 1:
            return (part_moments[idx][remaining]
                    / math.factorial(remaining))
        total = 0.0
        for j in range(remaining + 1):
            total += (part_moments[idx][j] / math.factorial(j)
                      * expand(idx + 1, remaining - j))
        return total

    value = math.factorial(power) * expand(0, power)
    return d.rho ** k * value


def _amplitude_square_laplace(chf: AmplitudeChf, lam: float,
                              spec: Optional[QuadratureSpec] = None) -> float:
    """E[e^{-lam A^2}] by a Gaussian average of the CHF on a shifted line.

    The Gaussian identity turns the Laplace transform into
    (2 pi)^{-1/2} int e^{-z^2/2} Psi_A(z sqrt(2 lam)) dz.  On the real
    axis the lobes are O(1) while the sum can be exponentially small, so
    the line is shifted to Im z = c, where the damped CHF both kills the
    cancellation and slows the oscillation to a frequency ~ e/c set by
    the density power e at the origin.
    """
    if lam <= 0.0:
        raise ValueError("laplace argument must be positive")
    spec = spec or DEFAULT_QUADRATURE
    s = math.sqrt(2.0 * lam)
    e = chf.tail_exponent
    c = min(10.0, max(1.0, math.sqrt(e)))
    span = math.sqrt(c * c + 2.0 * math.log(1.0 / max(spec.rel_tol, 1e-14))
                     + 20.0)
    f_eff = max(0.05, min(s * chf.amplitude_moment(1), e / c + 4.0))
    bps = _kernel_breakpoints([f_eff], span)

    kern_floor = 1e-40 * math.exp(0.5 * c * c)

    def integrand(u):
        kern = np.exp(-0.5 * (u + 1j * c) ** 2)
        live = np.abs(kern) > kern_floor
        out = np.zeros(u.shape)
        if live.any():
            z = s * (u[live] + 1j * c)
            out[live] = np.real(kern[live] * chf.value_complex(z))
        return out

    val = nm.integrate_semi_infinite(integrand, spec, breakpoints=bps)
    return min(max(math.sqrt(2.0 / math.pi) * val, 0.0), 1.0)


def ber_ops_coherent(chf: AmplitudeChf, rho: float, modulation: Modulation,
                     spec: Optional[QuadratureSpec] = None) -> float:
    """Average BER of a coherent binary modulation under optimal phases.

    Gaussian-kernel inversion: 1/2 - (1/pi) int t^-1 e^{-t^2/2}
    Im{Psi_A(t sqrt(2 a rho))} dt with a the modulation SNR scale.  The
    half-minus-integral form carries an absolute noise floor around
    1e-8; smaller results are recomputed relatively accurately through
    the Craig average of the squared-amplitude Laplace transform.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if not modulation.coherent:
        raise ValueError(f"{modulation.label} is not a coherent modulation")
    s = math.sqrt(2.0 * modulation.snr_scale * rho)
    omega = s * chf.amplitude_moment(1)
    span = 16.0
    bps = _kernel_breakpoints([omega], span)
    tau0 = 1e-8 / max(1.0, omega)

    def integrand(t):
        return np.exp(-0.5 * t * t) * np.imag(chf(s * t)) / t

    val = nm.integrate_semi_infinite(integrand, spec or DEFAULT_QUADRATURE,
                                     breakpoints=bps, lower=tau0)
    ber = 0.5 - (tau0 * omega + val) / math.pi
    if ber >= 1e-7:
        return min(ber, 0.5)
    return _ber_ops_craig(chf, modulation.snr_scale * rho, spec)


_GL12_NODES, _GL12_WEIGHTS = np.polynomial.legendre.leggauss(12)


def _ber_ops_craig(chf: AmplitudeChf, a_rho: float,
                   spec: Optional[QuadratureSpec] = None) -> float:
    # (1/pi) int_0^{pi/2} E[e^{-a rho A^2 / sin^2 th}] dth; the integrand
    # behaves like sin(th)^e, so panels shrink geometrically toward pi/2
    # where high diversity orders concentrate the mass.
    inner = spec or QuadratureSpec(abs_tol=1e-300, rel_tol=1e-7)
    delta = min(0.5, 3.0 / math.sqrt(max(chf.tail_exponent, 4.0)))
    offsets = [0.0]
    while offsets[-1] < 0.5 * math.pi:
        offsets.append(min(0.5 * math.pi,
                           max(4.0 * offsets[-1], delta)))
    edges = 0.5 * math.pi - np.array(offsets[::-1])
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
        for node, weight in zip(_GL12_NODES, _GL12_WEIGHTS):
            th = mid + half * node
            total += (half * weight *
                      _amplitude_square_laplace(chf, a_rho / math.sin(th) ** 2,
                                                inner))
    return min(max(total / math.pi, 0.0), 0.5)


def ber_ops_bdpsk(chf: AmplitudeChf, rho: float,
                  spec: Optional[QuadratureSpec] = None) -> float:
    """Average BDPSK BER 0.5 E[e^{-gamma}] under optimal phases.

    Averaging the outage CDF against the differential-detection weight
    integrates by parts into the Laplace transform of the SNR.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    return min(0.5 * _amplitude_square_laplace(chf, rho, spec), 0.5)


def diversity_order_ops(m_h: Sequence[float], m_g: Sequence[float]) -> float:
    """High-SNR diversity order min{sum m_h, sum m_g} of the coherent link."""
    if not len(m_h) or not len(m_g):
        raise ValueError("need at least one element per hop list")
    return min(float(np.sum(m_h)), float(np.sum(m_g)))
