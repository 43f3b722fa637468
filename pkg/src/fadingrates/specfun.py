"""Scalar special functions used by the rate formulas.

Everything here is pure and operates on Python floats: the exponential
integral E1, incomplete gamma functions, the first-order Marcum Q-function,
the modified Bessel function I0, and a family of exponentially weighted
integrals that reduce to E1 in closed form.

Accuracy targets: E1 and I0 to 1e-10 relative, Marcum Q1 to 1e-9 absolute,
gamma identities to 1e-12 relative.
"""

import math

EULER_GAMMA = 0.5772156649015328606

_TOL = 1e-16
_MAX_ITER = 500


class DomainError(ValueError):
    """Argument outside the function's domain."""


def _check_finite(name, x):
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")


def exp_integral_e1(x):
    """Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.

    Power series below x=1, continued fraction above. Underflows to 0
    for x beyond ~740 like exp(-x) itself does.
    """
    _check_finite("x", x)
    if x <= 0.0:
        raise DomainError(f"exp_integral_e1 requires x > 0, got {x}")
    return math.exp(-x) * _e1_cf(x) if x >= 1.0 else _e1_series(x)


def exp_scaled_e1(x):
    """Exponentially scaled exponential integral exp(x)*E1(x), x > 0.

    Safe for large x where E1 itself underflows; this is the form the
    Rayleigh rate formulas actually need.
    """
    _check_finite("x", x)
    if x <= 0.0:
        raise DomainError(f"exp_integral_e1 requires x > 0, got {x}")
    if x < 1.0:
        return math.exp(x) * _e1_series(x)
    return _e1_cf(x)


def _e1_series(x):
    # E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
    total = -EULER_GAMMA - math.log(x)
    term = 1.0
    for k in range(1, _MAX_ITER):
        term *= -x / k
        contrib = -term / k
        total += contrib
        if abs(contrib) < _TOL * max(abs(total), 1e-300):
            return total
    raise ArithmeticError(f"E1 series failed to converge at x={x}")


def _e1_cf(x):
    # Modified Lentz evaluation of exp(x) E1(x) = 1/(x+1-1/(x+3-4/(x+5-...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    f = d
    for k in range(1, _MAX_ITER):
        a = -k * k
        b += 2.0
        d = b + a * d
        if abs(d) < tiny:
            d = tiny
        c = b + a / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        f *= delta
        if abs(delta - 1.0) < _TOL:
            return f
    raise ArithmeticError(f"E1 continued fraction failed to converge at x={x}")


def gamma_upper(s, t):
    """Upper incomplete gamma Gamma(s, t) = int_t^inf e^-g g^(s-1) dg.

    Accepts s > 0 with t >= 0, plus the boundary s = 0 with t > 0 where
    Gamma(0, t) = E1(t).
    """
    _check_finite("s", s)
    _check_finite("t", t)
    if s < 0.0 or (s == 0.0 and t == 0.0):
        raise DomainError(f"gamma_upper needs s > 0 (or s=0, t>0), got s={s}, t={t}")
    if t < 0.0:
        raise DomainError(f"gamma_upper needs t >= 0, got t={t}")
    if s == 0.0:
        return exp_integral_e1(t)
    return _reg_gamma_q(s, t) * math.gamma(s)


def gamma_lower(s, t):
    """Lower incomplete gamma gamma(s, t) = int_0^t e^-g g^(s-1) dg."""
    _check_finite("s", s)
    _check_finite("t", t)
    if s <= 0.0:
        raise DomainError(f"gamma_lower needs s > 0, got s={s}")
    if t < 0.0:
        raise DomainError(f"gamma_lower needs t >= 0, got t={t}")
    return _reg_gamma_p(s, t) * math.gamma(s)


def _reg_gamma_p(s, t):
    # Regularized P(s,t): series for t < s+1, else 1 - Q via continued fraction.
    if t == 0.0:
        return 0.0
    if t < s + 1.0:
        return _gamma_p_series(s, t)
    return 1.0 - _gamma_q_cf(s, t)


def _reg_gamma_q(s, t):
    if t == 0.0:
        return 1.0
    if t < s + 1.0:
        return 1.0 - _gamma_p_series(s, t)
    return _gamma_q_cf(s, t)


def _gamma_p_series(s, t):
    # P(s,t) = t^s e^-t / Gamma(s+1) * sum_k t^k / (s+1)...(s+k)
    ap = s
    total = 1.0 / s
    term = total
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= t / ap
        total += term
        if abs(term) < abs(total) * _TOL:
            return total * math.exp(-t + s * math.log(t) - math.lgamma(s))
    raise ArithmeticError(f"incomplete gamma series failed at s={s}, t={t}")


def _gamma_q_cf(s, t):
    # Q(s,t) via Lentz continued fraction (Numerical Recipes gcf).
    tiny = 1e-300
    b = t + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    f = d
    for k in range(1, _MAX_ITER):
        a = -k * (k - s)
        b += 2.0
        d = a * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + a / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        f *= delta
        if abs(delta - 1.0) < _TOL:
            return f * math.exp(-t + s * math.log(t) - math.lgamma(s))
    raise ArithmeticError(f"incomplete gamma CF failed at s={s}, t={t}")


def bessel_i0(x):
    """Modified Bessel function of the first kind I0(x), x >= 0."""
    return bessel_i0_scaled(x) * math.exp(x)


def bessel_i0_scaled(x):
    """Exponentially scaled exp(-x)*I0(x); no overflow for any x >= 0.

    Power series for x < 20, asymptotic expansion beyond (both branches
    agree to ~1e-13 relative at the switch point).
    """
    _check_finite("x", x)
    if x < 0.0:
        raise DomainError(f"bessel_i0 requires x >= 0, got {x}")
    if x < 20.0:
        q = 0.25 * x * x
        term = 1.0
        total = 1.0
        for k in range(1, _MAX_ITER):
            term *= q / (k * k)
            total += term
            if term < total * _TOL:
                break
        return total * math.exp(-x)
    # I0(x) ~ e^x/sqrt(2 pi x) * sum_k u_k, u_k = u_{k-1} (2k-1)^2/(8 k x)
    u = 1.0
    total = 1.0
    prev = math.inf
    for k in range(1, 40):
        u *= (2 * k - 1) ** 2 / (8.0 * k * x)
        if u > prev:
            break
        total += u
        prev = u
        if u < total * 1e-17:
            break
    return total / math.sqrt(2.0 * math.pi * x)


def marcum_q1(a, b):
    """Marcum Q-function of order 1: Q1(a, b) = Pr{|a + Z|^2 >= b^2},
    Z circularly-symmetric Gaussian with variance 2 (unit per dimension).

    Canonical Poisson-mixture series, summed outward from the Poisson
    mode so large arguments stay stable; truncation at 1e-12 absolute.
    """
    _check_finite("a", a)
    _check_finite("b", b)
    if a < 0.0 or b < 0.0:
        raise DomainError(f"marcum_q1 requires a, b >= 0, got a={a}, b={b}")
    if b == 0.0:
        return 1.0
    lam = 0.5 * a * a  # Poisson rate of the mixing index
    y = 0.5 * b * b  # chi-square threshold per 2 degrees of freedom
    if lam == 0.0:
        return math.exp(-y)
    tol = 1e-14

    n0 = max(int(lam), 0)
    log_pois0 = -lam + n0 * math.log(lam) - math.lgamma(n0 + 1)
    pois0 = math.exp(log_pois0)
    # inner survival Q(n+1, y) = sum_{j<=n} e^-y y^j/j!; seed at n0 and its
    # last Poisson-in-y term for the up/down recurrences
    q0 = _reg_gamma_q(n0 + 1.0, y)
    log_inner0 = -y + n0 * math.log(y) - math.lgamma(n0 + 1)
    inner0 = math.exp(log_inner0)

    total = pois0 * q0
    # upward from n0+1
    pois, q, inner = pois0, q0, inner0
    for n in range(n0 + 1, n0 + 100000):
        pois *= lam / n
        inner *= y / n
        q += inner
        term = pois * q
        total += term
        if term < tol and n > lam:
            break
    # downward from n0-1
    pois, q, inner = pois0, q0, inner0
    for n in range(n0 - 1, -1, -1):
        pois *= (n + 1) / lam
        q -= inner
        inner *= (n + 1) / y
        if q <= 0.0:
            break  # inner survival has underflowed; remaining terms negligible
        term = pois * q
        total += term
        if term < tol:
            break
    return min(max(total, 0.0), 1.0)


_EXPW_KINDS = ("log_t", "inv_t2", "t_over_tpy", "t_over_tpy_sq", "t2_over_tpy_sq")


def exp_weighted_integrals(kind, x, y=0.0):
    """Closed forms for int_x^inf e^-t f(t) dt built from E1.

    kind selects f(t): "log_t" -> log t, "inv_t2" -> 1/t^2,
    "t_over_tpy" -> t/(t+y), "t_over_tpy_sq" -> t/(t+y)^2,
    "t2_over_tpy_sq" -> t^2/(t+y)^2.
    """
    if kind not in _EXPW_KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {_EXPW_KINDS}")
    _check_finite("x", x)
    _check_finite("y", y)
    if x < 0.0 or y < 0.0:
        raise DomainError(f"arguments must be >= 0, got x={x}, y={y}")
    if kind == "log_t":
        if x == 0.0:
            return -EULER_GAMMA
        return exp_integral_e1(x) + math.exp(-x) * math.log(x)
    if kind == "inv_t2":
        if x == 0.0:
            raise DomainError("inv_t2 integral diverges at x=0")
        return math.exp(-x) / x - exp_integral_e1(x)
    if x + y == 0.0:
        if kind == "t_over_tpy" or kind == "t2_over_tpy_sq":
            return 1.0  # integrand reduces to e^-t (resp. e^-t) at y=0
        raise DomainError("t/(t+y)^2 integral diverges at x=y=0")
    e1s = exp_scaled_e1(x + y)  # exp(x+y) E1(x+y); e^y E1(x+y) = e^-x * e1s
    emx = math.exp(-x)
    if kind == "t_over_tpy":
        return emx * (1.0 - y * e1s)
    if kind == "t_over_tpy_sq":
        return emx * (-y / (x + y) + (y + 1.0) * e1s)
    # t2_over_tpy_sq
    return emx * (1.0 + y * y / (x + y) - y * (y + 2.0) * e1s)
