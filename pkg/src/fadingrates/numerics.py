"""Quadrature, root finding, Monte Carlo means and low-SNR (wideband) metrics.

All rates are computed internally in nats; bits only appear when results
are formatted. The Monte Carlo path is deterministic for a fixed
(seed, n) pair: samples are drawn in fixed-size chunks from a
counter-based generator and reduced in chunk order.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

LOG2 = math.log(2.0)


class IntegrationError(RuntimeError):
    """Non-finite integrand value or failed quadrature."""


class NoRootError(RuntimeError):
    """Bisection could not bracket a sign change."""


@dataclass(frozen=True)
class Quadrature:
    """Quadrature configuration.

    scheme "gauss-laguerre" evaluates integrals against the exp(-g) weight
    with n nodes; "adaptive" uses adaptive quadrature on a truncated
    domain with tail bound `tail_bound`.
    """

    scheme: str = "gauss-laguerre"
    n: int = 96
    tol: float = 1e-10
    tail_bound: float = 60.0

    def __post_init__(self):
        if self.scheme not in ("gauss-laguerre", "adaptive"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.scheme == "gauss-laguerre" and self.n < 16:
            raise ValueError("Gauss-Laguerre order must be >= 16")
        if not 0.0 < self.tol <= 1e-4:
            raise ValueError("tol must be in (0, 1e-4]")


DEFAULT_QUAD = Quadrature()

_lag_cache = {}


def laguerre_nodes(n):
    """Cached Gauss-Laguerre nodes/weights for int_0^inf e^-g f(g) dg."""
    if n not in _lag_cache:
        _lag_cache[n] = np.polynomial.laguerre.laggauss(n)
    return _lag_cache[n]


def integrate_exp_weighted(f, domain=(0.0, np.inf), q=DEFAULT_QUAD):
    """Integral of exp(-g) * f(g) over `domain` within [0, inf).

    f must accept a numpy array. Gauss-Laguerre handles the [lo, inf)
    case by translation; finite upper limits fall back to adaptive
    quadrature regardless of the configured scheme.
    """
    lo, hi = domain
    if lo < 0.0 or hi < lo:
        raise ValueError(f"bad domain {domain}")
    if lo == hi:
        return 0.0
    if q.scheme == "gauss-laguerre" and np.isinf(hi):
        x, w = laguerre_nodes(q.n)
        vals = np.asarray(f(x + lo), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = x[~np.isfinite(vals)][:3] + lo
            raise IntegrationError(f"non-finite integrand near g={bad}")
        return float(math.exp(-lo) * np.dot(w, vals))
    hi_eff = min(hi, lo + q.tail_bound + 40.0)

    def integrand(g):
        v = f(np.asarray([g], dtype=float))[0]
        if not math.isfinite(v):
            raise IntegrationError(f"non-finite integrand at g={g}")
        return math.exp(-g) * v

    val, _ = integrate.quad(integrand, lo, hi_eff, epsabs=0.0, epsrel=q.tol, limit=400)
    return val


def integrate_radial(f, q=DEFAULT_QUAD, r_max=None):
    """Plane integral of a circularly-symmetric f(|y|) over the complex plane.

    Computes int_0^inf f(r) 2 pi r dr; equals the 2-D integral whenever the
    integrand depends on y only through |y|.
    """
    if r_max is None:
        r_max = math.sqrt(2.0 * q.tail_bound + 80.0)

    def integrand(r):
        v = f(r)
        if not math.isfinite(v):
            raise IntegrationError(f"non-finite integrand at r={r}")
        return 2.0 * math.pi * r * v

    val, _ = integrate.quad(integrand, 0.0, r_max, epsabs=1e-14, epsrel=q.tol, limit=400)
    return val


def bisect_root(f, bracket, tol=1e-12, max_expand=60):
    """Root of a monotone f by bisection; expands the bracket geometrically
    (factor 4, up to `max_expand` times) if f does not change sign on it.
    """
    a, b = float(bracket[0]), float(bracket[1])
    if b <= a:
        raise ValueError(f"bad bracket {bracket}")
    positive_domain = a > 0.0
    fa, fb = f(a), f(b)
    for _ in range(max_expand):
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if fa * fb < 0.0:
            break
        width = b - a
        if abs(fb) < abs(fa):
            a, fa = b, fb
            b = b + 4.0 * width
            fb = f(b)
        else:
            b, fb = a, fa
            a = a - 4.0 * width
            if positive_domain:
                a = max(a, 0.25 * b if b > 0 else 1e-300)
            fa = f(a)
    else:
        raise NoRootError(f"no sign change in [{a}, {b}] after expansion")
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = f(m)
        if abs(fm) <= tol or (b - a) <= tol * max(1.0, abs(m)):
            return m
        if fa * fm <= 0.0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


@dataclass
class McEstimate:
    """Monte Carlo mean with a 95% confidence half-width."""

    mean: float
    ci_half_width: float
    n_samples: int
    seed: int
    n_rejected: int = 0

    @staticmethod
    def exact(value=0.0):
        """Zero-uncertainty record for closed-form results."""
        return McEstimate(mean=value, ci_half_width=0.0, n_samples=0, seed=0)


_CHUNK = 1 << 15


def stream_rng(seed, stream=0):
    """Counter-based generator keyed by (seed, stream); reproducible
    independently of how many other streams are drawn from."""
    return np.random.Generator(np.random.Philox(key=(np.uint64(seed) << np.uint64(16)) + np.uint64(stream)))


def mc_mean(sampler, n, seed, stream=0, max_bad_fraction=1e-4):
    """Mean of n draws from `sampler(count, rng) -> array` with a 95% CI.

    Non-finite samples are dropped and counted; more than
    `max_bad_fraction` of them aborts. Identical (seed, n) reproduce the
    estimate bit-exactly.
    """
    if n < 1000:
        raise ValueError("mc_mean needs n >= 1000")
    rng = stream_rng(seed, stream)
    total = 0.0
    total_sq = 0.0
    kept = 0
    bad = 0
    remaining = n
    while remaining > 0:
        m = min(_CHUNK, remaining)
        vals = np.asarray(sampler(m, rng), dtype=float)
        finite = np.isfinite(vals)
        nbad = int(m - finite.sum())
        if nbad:
            bad += nbad
            vals = vals[finite]
        total += float(vals.sum())
        total_sq += float(np.dot(vals, vals))
        kept += vals.size
        remaining -= m
    if bad > max_bad_fraction * n:
        raise IntegrationError(f"{bad}/{n} non-finite Monte Carlo samples")
    mean = total / kept
    var = max(total_sq / kept - mean * mean, 0.0)
    ci = 1.96 * math.sqrt(var / kept)
    return McEstimate(mean=mean, ci_half_width=ci, n_samples=n, seed=seed, n_rejected=bad)


@dataclass(frozen=True)
class WidebandMetrics:
    """Minimum Eb/N0 in dB and capacity slope in bits per 3 dB."""

    ebn0_min_db: float
    slope_s: float
    cdot0: float = float("nan")
    cddot0: float = float("nan")
    degenerate: bool = False


def _richardson_first(rate_fn, h):
    # C(0)=0, so D(h) = C(h)/h = Cdot + (Cddot/2) h + O(h^2); eliminate the
    # h and h^2 error terms from evaluations at h, h/2, h/4.
    d1 = rate_fn(h) / h
    d2 = rate_fn(h / 2.0) / (h / 2.0)
    d3 = rate_fn(h / 4.0) / (h / 4.0)
    e1 = 2.0 * d2 - d1
    e2 = 2.0 * d3 - d2
    return (4.0 * e2 - e1) / 3.0


def _richardson_second(rate_fn, h):
    # D(h) = (C(2h) - 2 C(h)) / h^2 = Cddot + C''' h + O(h^2)
    def d(hh):
        return (rate_fn(2.0 * hh) - 2.0 * rate_fn(hh)) / hh**2

    d1, d2, d3 = d(h), d(h / 2.0), d(h / 4.0)
    e1 = 2.0 * d2 - d1
    e2 = 2.0 * d3 - d2
    return (4.0 * e2 - e1) / 3.0


def wideband_metrics(rate_fn, h=1e-3, tol=1e-12):
    """Low-SNR metrics of a rate function P -> nats with rate_fn(0) = 0.

    Derivatives at zero come from Richardson-extrapolated one-sided
    differences at steps h, h/2, h/4. Returns Eb/N0|min = log 2 / Cdot(0)
    in dB and slope S = 2 Cdot(0)^2 / (-Cddot(0)) in bits per 3 dB.
    """
    cdot = _richardson_first(rate_fn, h)
    cddot = _richardson_second(rate_fn, h)
    if cdot <= tol:
        return WidebandMetrics(math.inf, 0.0, cdot, cddot, degenerate=True)
    ebn0 = 10.0 * math.log10(LOG2 / cdot)
    slope = 2.0 * cdot * cdot / (-cddot) if cddot < 0.0 else math.inf
    return WidebandMetrics(ebn0, slope, cdot, cddot)


def ebn0_of(power, rate_nats):
    """Eb/N0 in dB at operating power `power` and rate in nats per symbol."""
    if rate_nats <= 0.0:
        return math.inf
    return 10.0 * math.log10(power * LOG2 / rate_nats)
