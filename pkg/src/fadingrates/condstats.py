"""Conditional second-order statistics of the codebook symbol U given the
channel output, for Gaussian mixture channels.

Every scenario handled here reduces, after conditioning on the receiver's
side information, to a finite (or quadrature-discretized) mixture

    Y | component i  ~  CN(0, 1 + q_i),   q_i = (channel gain) x (power),

with the transmit symbol x = sqrt(power) u inside component i. The
posterior over components then gives E[U | Y], E[|U|^2 | Y] and
Var(U | Y), which feed both the reverse-model rate E[-log Var(U|Y)] and
the per-output-point forward-model rate.
"""

import math

import numpy as np
from scipy import integrate


def posterior(weights, qs, y_abs2):
    """Posterior component probabilities given |y|^2.

    weights, qs are 1-D arrays over components; y_abs2 is an array of
    squared magnitudes. Returns shape (len(y_abs2), len(qs)).
    """
    w = np.asarray(weights, dtype=float)
    q = np.asarray(qs, dtype=float)
    t = np.asarray(y_abs2, dtype=float)[:, None]
    log_like = -t / (1.0 + q) - np.log1p(q) + np.log(w)
    log_like -= log_like.max(axis=1, keepdims=True)
    like = np.exp(log_like)
    return like / like.sum(axis=1, keepdims=True)


def u_moments(weights, qs, y_abs2):
    """(|E[U|y]|^2, E[|U|^2|y], Var(U|y)) for the mixture channel.

    The conditional mean is proportional to y; only magnitudes matter, so
    everything is a function of |y|^2.
    """
    q = np.asarray(qs, dtype=float)
    t = np.asarray(y_abs2, dtype=float)
    post = posterior(weights, q, t)
    coeff = np.sqrt(q) / (1.0 + q)
    eu_abs2 = (post @ coeff) ** 2 * t
    eu2 = post @ (1.0 / (1.0 + q)) + (post @ (q / (1.0 + q) ** 2)) * t
    var = np.maximum(eu2 - eu_abs2, 1e-14)
    return eu_abs2, eu2, var


def output_density_radial(weights, qs, y_abs2):
    """Mixture output density p(y) as a function of |y|^2."""
    w = np.asarray(weights, dtype=float)
    q = np.asarray(qs, dtype=float)
    t = np.asarray(y_abs2, dtype=float)[:, None]
    return (np.exp(-t / (1.0 + q)) / (math.pi * (1.0 + q)) * w).sum(axis=1)


def _radial_expect(weights, qs, f_of_t, tol=1e-10):
    """int p(y) f(|y|^2) dy over the plane, via the radial substitution
    t = |y|^2 (so dy = pi dt)."""
    scales = sorted({1.0 + float(q) for q in np.atleast_1d(qs)})
    t_max = 60.0 * scales[-1]
    breaks = sorted({c * s for s in scales for c in (1.0, 5.0, 20.0) if c * s < t_max})

    def integrand(t):
        ts = np.asarray([t])
        return math.pi * float(output_density_radial(weights, qs, ts)[0] * f_of_t(ts)[0])

    val, _ = integrate.quad(
        integrand, 0.0, t_max, points=breaks, epsabs=1e-13, epsrel=tol, limit=800
    )
    return val


def reverse_rate_mixture(weights, qs, tol=1e-10):
    """Reverse-model rate E[-log Var(U | Y)] in nats for the mixture."""

    def f(ts):
        _, _, var = u_moments(weights, qs, ts)
        return -np.log(var)

    return _radial_expect(weights, qs, f, tol)


def kinf_forward_rate_mixture(weights, qs, p_bar, tol=1e-10):
    """Per-output-point forward-model rate in nats for the mixture, using
    the LMMSE auxiliary parameters at every output value.

    p_bar is E[|Xbar|^2] for the receiver's linear symbol estimate; the
    U-moments are scaled by it internally.
    """

    def f(ts):
        eu_abs2, eu2, _ = u_moments(weights, qs, ts)
        e_abs2 = p_bar * eu_abs2  # |E[Xbar | y]|^2
        p_y = np.maximum(p_bar * eu2, 1e-14)  # E[|Xbar|^2 | y]
        var = np.maximum(p_y - e_abs2, 1e-14)
        ratio = p_bar / p_y
        term1 = np.log1p(e_abs2 * ratio / var)
        term2 = e_abs2 * (ratio - 1.0) / (var + e_abs2 * ratio)
        return term1 - term2

    return _radial_expect(weights, qs, f, tol)


def nested_reverse_rate(outer_weights, mixtures, tol=1e-9):
    """Reverse rate with receiver side information: sum over outer
    conditioning values s of p(s) * reverse_rate_mixture(mixture | s)."""
    total = 0.0
    for p_s, (w, q) in zip(outer_weights, mixtures):
        if p_s == 0.0:
            continue
        total += p_s * reverse_rate_mixture(w, q, tol)
    return total
