"""Fading laws, CSI maps, the uniform gain quantizer, channel densities
and reproducible sampling for the scalar AWGN fading channel
y = h x + z with z ~ CN(0, 1) and E[|H|^2] = 1.

CSI values are tagged scalars (reals or complex numbers), never opaque
blobs, so downstream code can condition on exact values for discrete CSI
and on quadrature nodes for continuous CSI.
"""

import math
from dataclasses import dataclass

import numpy as np

from .numerics import DEFAULT_QUAD, integrate_exp_weighted, laguerre_nodes
from .specfun import DomainError, bessel_i0_scaled

SQRT2 = math.sqrt(2.0)


class UsageError(ValueError):
    """Unsupported combination of law / CSI / conditioning."""


def atom_gain(h):
    """|h|^2 for a discrete fading atom, rounded so that gains like
    |sqrt 2|^2 come out exactly 2.0 and can key lookup tables."""
    g = abs(h) ** 2
    return round(g, 12)


# ---------------------------------------------------------------------------
# fading laws


@dataclass(frozen=True)
class FadingLaw:
    """Law of the complex gain H with E[|H|^2] = 1.

    kind "onoff":    P_H(0) = P_H(sqrt 2) = 1/2
    kind "rayleigh": H ~ CN(0, 1), so G = |H|^2 ~ Exp(1)
    kind "discrete": arbitrary atoms [(h, prob), ...]
    """

    kind: str
    atoms: tuple = ()  # ((complex h, prob), ...) for discrete kinds

    def __post_init__(self):
        if self.kind not in ("onoff", "rayleigh", "discrete"):
            raise ValueError(f"unknown fading law {self.kind!r}")
        if self.kind != "rayleigh":
            probs = [p for _, p in self.atoms]
            if abs(sum(probs) - 1.0) > 1e-12 or any(p < 0 for p in probs):
                raise ValueError("atom probabilities must be a distribution")
            second = sum(p * atom_gain(h) for h, p in self.atoms)
            if abs(second - 1.0) > 1e-9:
                raise ValueError(f"E[|H|^2] must be 1, got {second}")

    @staticmethod
    def on_off():
        return FadingLaw("onoff", ((0.0 + 0.0j, 0.5), (SQRT2 + 0.0j, 0.5)))

    @staticmethod
    def rayleigh():
        return FadingLaw("rayleigh")

    @staticmethod
    def discrete(points):
        return FadingLaw("discrete", tuple((complex(h), float(p)) for h, p in points))

    @property
    def is_discrete(self):
        return self.kind != "rayleigh"

    def mean_h(self):
        if self.kind == "rayleigh":
            return 0.0 + 0.0j
        return sum(p * h for h, p in self.atoms)

    def var_h(self):
        return 1.0 - abs(self.mean_h()) ** 2

    def expect_gain(self, f, q=DEFAULT_QUAD):
        """E[f(G)] with G = |H|^2; f vectorized over numpy arrays."""
        if self.kind == "rayleigh":
            return integrate_exp_weighted(f, (0.0, np.inf), q)
        gains = np.array([atom_gain(h) for h, _ in self.atoms])
        probs = np.array([p for _, p in self.atoms])
        return float(np.dot(probs, np.asarray(f(gains), dtype=float)))

    def gain_survival(self, t):
        """Pr{G >= t}."""
        if self.kind == "rayleigh":
            return math.exp(-t) if t > 0 else 1.0
        return sum(p for h, p in self.atoms if atom_gain(h) >= t)

    def sample_h(self, n, rng):
        if self.kind == "rayleigh":
            return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5)
        hs = np.array([h for h, _ in self.atoms])
        probs = np.array([p for _, p in self.atoms])
        return hs[rng.choice(len(hs), size=n, p=probs)]


# ---------------------------------------------------------------------------
# quantizer (uniformly spaced on the gain axis)


def quantize_gain(g, bits, delta):
    """Uniform scalar quantizer of the gain g >= 0 with B in {0, 1, inf}.

    Returns (reconstruction point, cell interval). B = inf is the identity
    with a degenerate cell; B = 0 has the single cell [0, inf).
    """
    if delta <= 0.0:
        raise DomainError(f"quantizer step must be positive, got {delta}")
    if g < 0.0:
        raise DomainError(f"gain must be >= 0, got {g}")
    if bits == math.inf:
        return g, (g, g)
    if bits == 0:
        return 0.5 * delta, (0.0, math.inf)
    if bits == 1:
        if g < delta:
            return 0.5 * delta, (0.0, delta)
        return 1.5 * delta, (delta, math.inf)
    raise UsageError(f"only B in {{0, 1, inf}} supported, got {bits}")


# ---------------------------------------------------------------------------
# CSI specifications


@dataclass(frozen=True)
class Csir:
    """Receiver-side CSI map. kinds: none, full_h, full_hp (S_R = H sqrt(P(S_T))),
    indicator (S_R = 1(G >= t)), flip (S_R = H flipped between two atoms
    w.p. eps), lmmse (H = sqrt(1-eps) S_R + sqrt(eps) Z_R)."""

    kind: str
    t: float = 0.0
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "full_h", "full_hp", "indicator", "flip", "lmmse"):
            raise ValueError(f"unknown CSIR kind {self.kind!r}")
        if self.kind == "flip" and not 0.0 <= self.eps <= 0.5:
            raise ValueError("flip probability must be in [0, 1/2]")
        if self.kind == "lmmse" and not 0.0 <= self.eps <= 1.0:
            raise ValueError("LMMSE noise fraction must be in [0, 1]")
        if self.kind == "indicator" and self.t < 0.0:
            raise ValueError("indicator threshold must be >= 0")


@dataclass(frozen=True)
class Csit:
    """Transmitter-side CSI map. kinds: none, full_h (S_T = H),
    quant_gain (S_T = q_u(G) with B bits, step delta), flip (quantized
    gain bit flipped w.p. eps; for two-atom laws the gain itself flips),
    equals_sr (S_T = S_R), function_of_sr."""

    kind: str
    bits: float = 1
    delta: float = 1.0
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "full_h", "quant_gain", "flip", "equals_sr", "function_of_sr"):
            raise ValueError(f"unknown CSIT kind {self.kind!r}")
        if self.kind in ("quant_gain", "flip") and self.delta <= 0.0 and self.bits not in (0, math.inf):
            raise ValueError("quantizer step must be positive")
        if self.kind == "flip" and not 0.0 <= self.eps <= 0.5:
            raise ValueError("flip probability must be in [0, 1/2]")


@dataclass(frozen=True)
class CsiSpec:
    csir: Csir = Csir("none")
    csit: Csit = Csit("none")


@dataclass(frozen=True)
class ChannelDraw:
    h: complex
    g: float
    s_r: object
    s_t: object


def _flip_two_atom(value, atoms, eps, rng_val):
    a, b = atoms
    other = b if value == a else a
    return other if rng_val < eps else value


def sample_draw(law, csi, rng, policy=None):
    """One reproducible channel-state draw: H plus (S_R, S_T) per the spec.

    `policy` (a map s_T -> power) must be supplied for CSIR kind full_hp
    since that CSIR observes H sqrt(P(S_T)).
    """
    h = law.sample_h(1, rng)[0]
    g = atom_gain(h) if law.is_discrete else abs(h) ** 2

    csit = csi.csit
    if csit.kind == "none":
        s_t = 0.0
    elif csit.kind == "full_h":
        s_t = h
    elif csit.kind == "quant_gain":
        s_t, _ = quantize_gain(g, csit.bits, csit.delta)
    elif csit.kind == "flip":
        if law.is_discrete and len(law.atoms) == 2:
            gains = tuple(atom_gain(a) for a, _ in law.atoms)
            s_t = _flip_two_atom(g, gains, csit.eps, rng.random())
        else:
            bit = 1.0 if g >= csit.delta else 0.0
            s_t = _flip_two_atom(bit, (0.0, 1.0), csit.eps, rng.random())
    elif csit.kind in ("equals_sr", "function_of_sr"):
        s_t = None  # filled in after S_R below
    else:  # pragma: no cover
        raise UsageError(csit.kind)

    csir = csi.csir
    if csir.kind == "none":
        s_r = 0.0
    elif csir.kind == "full_h":
        s_r = h
    elif csir.kind == "full_hp":
        if policy is None:
            raise UsageError("full_hp CSIR needs a bound power policy")
        s_r = h * math.sqrt(max(policy(s_t), 0.0))
    elif csir.kind == "indicator":
        s_r = 1.0 if g >= csir.t else 0.0
    elif csir.kind == "flip":
        if not (law.is_discrete and len(law.atoms) == 2):
            raise UsageError("flip CSIR needs a two-atom law")
        hs = tuple(a for a, _ in law.atoms)
        s_r = _flip_two_atom(h, hs, csir.eps, rng.random())
    elif csir.kind == "lmmse":
        # S_R | H = h is CN(sqrt(1-eps) h, eps)
        w = (rng.standard_normal() + 1j * rng.standard_normal()) * math.sqrt(0.5)
        s_r = math.sqrt(1.0 - csir.eps) * h + math.sqrt(csir.eps) * w
    else:  # pragma: no cover
        raise UsageError(csir.kind)

    if csit.kind in ("equals_sr", "function_of_sr"):
        s_t = abs(s_r) ** 2 if csir.kind == "lmmse" else s_r

    return ChannelDraw(h=h, g=g, s_r=s_r, s_t=s_t)


def sample_lmmse_pair(n, eps, rng):
    """Vectorized draw of (h, s_R) under the LMMSE CSIR model."""
    s_r = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5)
    z_r = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5)
    h = math.sqrt(1.0 - eps) * s_r + math.sqrt(eps) * z_r
    return h, s_r


def awgn_output(h, x, rng):
    """y = h x + z with unit-variance complex Gaussian noise."""
    h = np.asarray(h)
    x = np.asarray(x)
    shape = np.broadcast(h, x).shape
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)
    return h * x + z


def flash_density(p, power, x):
    """Density value (continuous part) of the flash input at x, plus the
    point mass at zero folded in notionally; returns the CSCG component
    density scaled by p for x != 0."""
    if not 0.0 < p <= 1.0:
        raise DomainError(f"flash probability must be in (0, 1], got {p}")
    if power <= 0.0:
        raise DomainError("flash power must be positive")
    v = power / p
    return p * math.exp(-abs(x) ** 2 / v) / (math.pi * v)


def sample_flash(n, p, power, rng):
    """Draws from the flash input: 0 w.p. 1-p, else CN(0, P/p)."""
    on = rng.random(n) < p
    u = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5)
    return np.where(on, math.sqrt(power / p) * u, 0.0 + 0.0j)


def cardinality_bound(n_y, n_st, n_x):
    """Adaptive-symbol support bound min(|Y|, 1 + |S_T| (|X| - 1))."""
    return int(min(n_y, 1 + n_st * (n_x - 1)))


# ---------------------------------------------------------------------------
# densities


def _cscg(y, var):
    return np.exp(-np.abs(y) ** 2 / var) / (math.pi * var)


def density_y(law, policy, csi, y, given):
    """Channel-output density under CSCG inputs for the conditioning in
    `given`: a dict with key "on" in {"none", "x", "h", "a_h", "s_r",
    "x_s_r"} plus the conditioning values.

    policy is a map s_T -> transmit power (or a scalar power for CSIT
    "none"). Supported (law, csi) combinations mirror the closed forms
    the rate computations use; anything else raises UsageError.
    """
    on = given.get("on", "none")
    if on == "x":
        return _density_y_given_x(law, y, given)
    if on == "none":
        return _density_y_marginal(law, policy, csi, y, given)
    if on == "h":
        return _density_y_given_h(law, policy, csi, y, given["h"])
    if on == "a_h":
        return _density_y_given_ah(law, policy, csi, y, given["u"], given["h"])
    if on == "s_r":
        return _density_y_given_sr(law, policy, csi, y, given["s_r"])
    if on == "x_s_r":
        return _density_y_given_xsr(law, policy, csi, y, given["u"], given["s_r"])
    raise UsageError(f"unknown conditioning {on!r}")


def _constant_power(policy):
    if callable(policy):
        raise UsageError("this conditioning needs a scalar power")
    return float(policy)


def _density_y_given_x(law, y, given):
    x = given["x"]
    if law.kind == "rayleigh":
        v = abs(x) ** 2 + 1.0
        return float(_cscg(y, v))
    # discrete law: mixture of unit-noise Gaussians centred at h x
    return float(sum(p * _cscg(y - h * x, 1.0) for h, p in law.atoms))


def _density_y_marginal(law, policy, csi, y, given):
    if csi.csit.kind == "none":
        power = _constant_power(policy)
        if law.kind == "rayleigh":
            # int_0^inf p(q) CN(y; 0, q+1) dq with |X|^2 = q ~ Exp(1/P)
            x_nodes, w = laguerre_nodes(128)
            q = x_nodes * power
            vals = _cscg(y, q + 1.0)
            return float(np.dot(w, vals))
        return float(sum(p * _cscg(y, 1.0 + atom_gain(h) * power) for h, p in law.atoms))
    if csi.csit.kind == "full_h" and law.kind == "rayleigh" and csi.csir.kind in ("none",):
        # truncated channel inversion: equal-gain output for G >= t
        t = given["t"]
        p_hat = given["p_hat"]
        p_on = math.exp(-t)
        return float((1.0 - p_on) * _cscg(y, 1.0) + p_on * _cscg(y, 1.0 + p_hat))
    if law.is_discrete and csi.csit.kind in ("full_h", "quant_gain", "flip"):
        # marginal over (h, s_T)
        total = 0.0
        for h, p_h, s_t, p_st in _discrete_h_st(law, csi.csit):
            total += p_h * p_st * _cscg(y, 1.0 + atom_gain(h) * policy(s_t))
        return float(total)
    raise UsageError(f"p(y) unsupported for law={law.kind}, csit={csi.csit.kind}")


def _discrete_h_st(law, csit):
    """Joint atoms (h, P(h), s_T, P(s_T | h)) for discrete laws."""
    for h, p_h in law.atoms:
        g = atom_gain(h)
        if csit.kind == "full_h":
            yield h, p_h, h, 1.0
        elif csit.kind == "quant_gain":
            s, _ = quantize_gain(g, csit.bits, csit.delta)
            yield h, p_h, s, 1.0
        elif csit.kind == "flip":
            gains = tuple(atom_gain(a) for a, _ in law.atoms)
            other = gains[1] if g == gains[0] else gains[0]
            yield h, p_h, g, 1.0 - csit.eps
            yield h, p_h, other, csit.eps
        else:
            raise UsageError(csit.kind)


def _density_y_given_h(law, policy, csi, y, h):
    g = abs(h) ** 2
    if law.is_discrete or law.kind == "rayleigh":
        total = 0.0
        for s_t, p_st in _csit_kernel(law, csi.csit, g):
            total += p_st * _cscg(y, 1.0 + g * policy(s_t))
        return float(total)
    raise UsageError(law.kind)


def _csit_kernel(law, csit, g):
    """p(s_T | G = g) atoms."""
    if law.is_discrete:
        g = round(g, 12)
    if csit.kind == "none":
        yield 0.0, 1.0
    elif csit.kind == "full_h":
        yield g, 1.0  # phase is compensated; only the gain matters
    elif csit.kind == "quant_gain":
        s, _ = quantize_gain(g, csit.bits, csit.delta)
        yield s, 1.0
    elif csit.kind == "flip":
        if law.is_discrete and len(law.atoms) == 2:
            gains = tuple(atom_gain(a) for a, _ in law.atoms)
            other = gains[1] if g == gains[0] else gains[0]
            yield g, 1.0 - csit.eps
            yield other, csit.eps
        else:
            bit = 1.0 if g >= csit.delta else 0.0
            yield bit, 1.0 - csit.eps
            yield 1.0 - bit, csit.eps
    else:
        raise UsageError(csit.kind)


def _density_y_given_ah(law, policy, csi, y, u, h):
    """p(y | a, h) for the fully-correlated adaptive symbol x(s_T) =
    sqrt(P(s_T)) u."""
    g = abs(h) ** 2
    total = 0.0
    for s_t, p_st in _csit_kernel(law, csi.csit, g):
        total += p_st * _cscg(y - h * math.sqrt(policy(s_t)) * u, 1.0)
    return float(total)


def _density_y_given_sr(law, policy, csi, y, s_r):
    if law.kind == "onoff" and csi.csir.kind == "flip" and csi.csit.kind == "equals_sr":
        eps = csi.csir.eps
        atoms = [a for a, _ in law.atoms]
        other = atoms[1] if s_r == atoms[0] else atoms[0]
        p_true = policy(abs(s_r) ** 2)
        return float(
            (1.0 - eps) * _cscg(y, 1.0 + abs(s_r) ** 2 * p_true)
            + eps * _cscg(y, 1.0 + abs(other) ** 2 * p_true)
        )
    if law.kind == "rayleigh" and csi.csir.kind == "lmmse" and csi.csit.kind == "equals_sr":
        # h | s_R ~ CN(sqrt(1-eps) s_R, eps); integrate the CSCG output
        # density over the noncentral gain distribution
        eps = csi.csir.eps
        p_pow = policy(abs(s_r) ** 2)
        if eps == 0.0:
            return float(_cscg(y, 1.0 + abs(s_r) ** 2 * p_pow))
        nc = (1.0 - eps) * abs(s_r) ** 2
        x_nodes, w = laguerre_nodes(128)
        gp = x_nodes * eps  # integration variable |h|^2
        z = 2.0 * np.sqrt(x_nodes * nc / eps)
        var = 1.0 + gp * p_pow
        # per-node log terms keep the noncentral weight from overflowing
        log_terms = (
            np.log(w)
            - nc / eps
            + z
            + np.log(bessel_i0_scaled_vec(z))
            - np.abs(y) ** 2 / var
            - np.log(math.pi * var)
        )
        peak = np.max(log_terms)
        return float(math.exp(peak) * np.sum(np.exp(log_terms - peak)))
    raise UsageError(f"p(y|s_R) unsupported for law={law.kind}, csir={csi.csir.kind}")


def _density_y_given_xsr(law, policy, csi, y, u, s_r):
    if law.kind == "onoff" and csi.csir.kind == "flip" and csi.csit.kind == "equals_sr":
        eps = csi.csir.eps
        atoms = [a for a, _ in law.atoms]
        other = atoms[1] if s_r == atoms[0] else atoms[0]
        x = math.sqrt(policy(abs(s_r) ** 2)) * u
        return float((1.0 - eps) * _cscg(y - s_r * x, 1.0) + eps * _cscg(y - other * x, 1.0))
    raise UsageError(f"p(y|x,s_R) unsupported for law={law.kind}, csir={csi.csir.kind}")


def bessel_i0_scaled_vec(x):
    x = np.asarray(x, dtype=float)
    return np.vectorize(bessel_i0_scaled, otypes=[float])(x)
