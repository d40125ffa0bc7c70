"""Expected-value machinery of the branching translation process (BTP) on Q_n.

All quantities are for a BTP started at the all-zeroes vertex.  ``m(k, t)`` is
the expected number of particles at a fixed vertex of Hamming weight ``k`` at
time ``t``; ``A``, ``B`` are the expected sums of the contest counters ``a``,
``b`` over the particles at the all-ones vertex; the success bound is the
lower bound on the probability that the all-ones vertex holds an uncontested
particle.

Time is measured in units of the mean edge passage time throughout.
"""

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import integrate

from .hypercube import check_dimension, hamming_weight as hamming

SQRT2 = math.sqrt(2.0)


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, best_estimate=None, est_error=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.est_error = est_error


class DegenerateBoundError(ValueError):
    pass


@dataclass(frozen=True)
class Constants:
    theta: float
    a_limit: float
    b_limit: float
    ab_limit: float
    s_lower_limit: float
    p_lower_limit: float
    geodesic_slope: float


def constants() -> Constants:
    """Large-n limits, evaluated from their closed forms."""
    theta = math.log1p(SQRT2)
    a_limit = theta / SQRT2
    tail = 1.0 / (3.0 - 2.0 * SQRT2)
    b_limit = theta + tail
    ab_limit = theta * math.exp(theta) / SQRT2 + tail
    s_lower = 1.0 - a_limit
    return Constants(
        theta=theta,
        a_limit=a_limit,
        b_limit=b_limit,
        ab_limit=ab_limit,
        s_lower_limit=s_lower,
        p_lower_limit=s_lower * math.exp(-b_limit / s_lower),
        geodesic_slope=SQRT2 * theta,
    )


THETA = constants().theta


@dataclass(frozen=True)
class AnalyticConfig:
    tol: float = 1e-9
    max_subdivisions: int = 200

    def __post_init__(self):
        if not 0 < self.tol <= 1e-6:
            raise ValueError("tol must satisfy 0 < tol <= 1e-6")
        if self.max_subdivisions < 32:
            raise ValueError("max_subdivisions must be at least 32")


@dataclass(frozen=True)
class AnalyticValue:
    value: float
    est_error: float
    n: int
    u: float

    def __float__(self):
        return self.value


# ---------------------------------------------------------------------------
# occupancy m(k, t)


def _xlogy(k, y):
    # k * log(y) with the convention 0 * log(0) = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(np.asarray(k) == 0, 0.0, np.asarray(k) * np.log(y))
    return out


def log_occupancy_mean(k, t, n: int):
    """log m(k, t) = k log sinh t + (n - k) log cosh t; -inf where m = 0."""
    k = np.asarray(k)
    t = np.asarray(t, dtype=float)
    if np.any(k < 0) or np.any(k > n):
        raise ValueError("Hamming weight must lie in [0, n]")
    if np.any(t < 0):
        raise ValueError("time must be nonnegative")
    out = _xlogy(k, np.sinh(t)) + (n - k) * np.log(np.cosh(t))
    return out[()] if out.ndim == 0 else out


def occupancy_mean(k, t, n: int):
    """Expected BTP particle count at a vertex of weight ``k`` at time ``t``.

    Raises OverflowError when the result is not representable; use
    :func:`log_occupancy_mean` in that regime.
    """
    logm = log_occupancy_mean(k, t, n)
    if np.any(logm > 709.0):
        raise OverflowError(
            f"m overflows a double for n={n}; use log_occupancy_mean for this range"
        )
    return np.exp(logm)


def occupancy_derivative(k, t, n: int):
    """Right-hand side of the master equation: k m(k-1, t) + (n-k) m(k+1, t)."""
    k = np.asarray(k)
    lower = np.where(k > 0, k * occupancy_mean(np.maximum(k - 1, 0), t, n), 0.0)
    upper = np.where(k < n, (n - k) * occupancy_mean(np.minimum(k + 1, n), t, n), 0.0)
    out = lower + upper
    return out[()] if out.ndim == 0 else out


def occupancy_second_derivative(k: int, t, n: int):
    """Sum of m(v + e_i + e_j, t) over all ordered direction pairs, |v| = k.

    Grouped by how the two flips interact with the ones of ``v``.
    """
    total = n * occupancy_mean(k, t, n)
    if k >= 2:
        total = total + k * (k - 1) * occupancy_mean(k - 2, t, n)
    if n - k >= 2:
        total = total + (n - k) * (n - k - 1) * occupancy_mean(k + 2, t, n)
    if 0 < k < n:
        total = total + 2 * k * (n - k) * occupancy_mean(k, t, n)
    return total


def convolve_occupancy(k: int, s: float, t: float, n: int) -> float:
    """Sum over all vertices w of m(w, s) m(v + w, t) for a fixed v with |v| = k.

    Explicit summation over the 2**n vertices.
    """
    check_dimension(n)
    if n > 20:
        raise ValueError("explicit vertex summation is limited to n <= 20")
    if not 0 <= k <= n:
        raise ValueError("Hamming weight must lie in [0, n]")
    v = (1 << k) - 1
    w = np.arange(1 << n, dtype=np.uint32)
    ms = occupancy_mean(np.bitwise_count(w).astype(np.int64), s, n)
    mt = occupancy_mean(np.bitwise_count(w ^ np.uint32(v)).astype(np.int64), t, n)
    return float(math.fsum(ms * mt))


# ---------------------------------------------------------------------------
# reduced single-integral forms


def _a_logf(t, u):
    with np.errstate(divide="ignore"):
        return np.log(np.sinh(u - t)) + np.log(np.cosh(t))


def _ab_logf(t, u):
    # 1/2 e^(u-t) cosh 2t - 1/2 e^-(u-t), written without cancellation
    r = u - t
    return np.log(np.sinh(r) * np.cosh(t) ** 2 + np.cosh(r) * np.sinh(t) ** 2)


def _a_prefactor(t, u, n):
    return (u - t) * (n + n * (n - 1) * np.tanh(t) ** 2)


def _ab_prefactor(t, u, n, logf):
    r = u - t
    g = 2.0 * np.exp(r - logf) * np.cosh(2.0 * t)
    h = np.exp(2.0 * (r - logf)) * np.sinh(2.0 * t) ** 2
    return 0.5 * r * (n * g + n * (n - 1) * h)


def _breakpoints(n: int, u: float):
    # the integrands live on scale 1/n next to each endpoint
    pts = {0.0, u}
    for c in (1.0, 4.0, 16.0, 64.0):
        x = c / n
        if x < u / 2:
            pts.add(x)
            pts.add(u - x)
    pts.add(u / 2)
    return sorted(pts)


def _integrate(logf: Callable, prefactor: Callable, n: int, u: float, cfg: AnalyticConfig):
    grid = np.linspace(0.0, u, 2001)
    shift = float(np.max(n * logf(grid)))
    if shift > 700.0:
        raise OverflowError(f"A/B integrand overflows at n={n}, u={u}")

    def integrand(t):
        lf = logf(t)
        if not np.isfinite(lf):
            return 0.0
        return float(prefactor(t, lf) * math.exp(n * lf - shift))

    pts = _breakpoints(n, u)
    total = 0.0
    err = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        out = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=cfg.tol,
                             limit=cfg.max_subdivisions, full_output=1)
        val, e = out[0], out[1]
        if len(out) > 3:
            scale = math.exp(shift)
            raise QuadratureError(out[3], (total + val) * scale, (err + e) * scale)
        total += val
        err += e
    scale = math.exp(shift)
    value, est = total * scale, err * scale
    if value != 0.0 and est / abs(value) > cfg.tol:
        raise QuadratureError(f"relative error {est / abs(value):.2e} exceeds tol", value, est)
    return value, est


def _check_args(n, u):
    # closed forms carry no 2**n state, so only n >= 1 is required here
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not u > 0:
        raise ValueError("u must be positive")


def a_expected(n: int, u: float = THETA, cfg: AnalyticConfig = AnalyticConfig()) -> AnalyticValue:
    """A at the all-ones vertex and time ``u``: the integral over t in [0, u] of
    (u - t)(n + n(n-1) tanh^2 t) (sinh(u - t) cosh t)^n.
    """
    _check_args(n, u)
    value, err = _integrate(
        lambda t: _a_logf(t, u),
        lambda t, lf: _a_prefactor(t, u, n),
        n, u, cfg,
    )
    return AnalyticValue(value, err, n, u)


def ab_expected(n: int, u: float = THETA, cfg: AnalyticConfig = AnalyticConfig()) -> AnalyticValue:
    """A + B at the all-ones vertex and time ``u``.

    Integrand: 1/2 (u - t)(n g + n(n-1) h) e^(n f) with
    f = log(1/2 e^(u-t) cosh 2t - 1/2 e^-(u-t)), g = 2 e^(u-t) cosh(2t) e^-f
    and h = e^(2(u-t)) sinh(2t)^2 e^-2f.
    """
    _check_args(n, u)
    value, err = _integrate(
        lambda t: _ab_logf(t, u),
        lambda t, lf: _ab_prefactor(t, u, n, lf),
        n, u, cfg,
    )
    return AnalyticValue(value, err, n, u)


def b_expected(n: int, u: float = THETA, cfg: AnalyticConfig = AnalyticConfig()) -> AnalyticValue:
    ab = ab_expected(n, u, cfg)
    a = a_expected(n, u, cfg)
    return AnalyticValue(ab.value - a.value, ab.est_error + a.est_error, n, u)


def s_bounds(n: int, u: float = THETA, cfg: AnalyticConfig = AnalyticConfig()) -> Tuple[float, float]:
    """(lower, upper) bounds on the expected number of simple-line particles at 1̂."""
    m = float(occupancy_mean(n, u, n))
    a = a_expected(n, u, cfg).value
    return max(0.0, m - a), m


def success_lower_bound(n: int, u: float = THETA, cfg: AnalyticConfig = AnalyticConfig()) -> AnalyticValue:
    """Lower bound S e^(-B/S) on P(uncontested particle at 1̂ by time u).

    Uses the lower end of :func:`s_bounds` for S; valid because x e^(-B/x) is
    increasing in x > 0.
    """
    _check_args(n, u)
    m = float(occupancy_mean(n, u, n))
    a = a_expected(n, u, cfg)
    b = b_expected(n, u, cfg)
    s = m - a.value
    if s <= 0:
        raise DegenerateBoundError(f"bound degenerate at this (n,u) = ({n}, {u}): S lower bound {s:.4g} <= 0")
    value = s * math.exp(-b.value / s)
    d_ds = math.exp(-b.value / s) * (1.0 + b.value / s)
    d_db = math.exp(-b.value / s)
    return AnalyticValue(value, d_ds * a.est_error + d_db * b.est_error, n, u)


def success_bound_from(s: float, b: float) -> float:
    """x e^(-B/x) evaluated at x = s."""
    if s <= 0:
        raise DegenerateBoundError("S must be positive")
    return s * math.exp(-b / s)


def oriented_mass_ratio(n: int, t: float) -> float:
    """Fraction of expected particles at 1̂ at time t whose ancestral line is oriented.

    Equals (t / sinh t)**n; also the probability that a rate-n walk
    conditioned to sit at 1̂ at time t stepped exactly once per coordinate.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    return math.exp(n * (math.log(t) - math.log(math.sinh(t))))


# ---------------------------------------------------------------------------
# unreduced double-sum / double-integral forms (small-n oracle)


def _simplex_simpson(u: float, nodes: int):
    """Nodes and weights of tensorized composite Simpson on {s, t >= 0, s + t <= u}.

    Returns (s, t, w) as 2-D arrays; the inner s-rule is scaled to [0, u - t].
    """
    if nodes % 2:
        nodes += 1
    x = np.linspace(0.0, 1.0, nodes + 1)
    c = np.ones(nodes + 1)
    c[1:-1:2] = 4.0
    c[2:-1:2] = 2.0
    c /= 3.0 * nodes
    t = u * x[:, None]
    s = (u - t) * x[None, :]
    w = u * c[:, None] * (u - t) * c[None, :]
    return np.broadcast_to(s, (nodes + 1, nodes + 1)), np.broadcast_to(t, s.shape), w


def _class_table(times, n):
    # m(k, time) for every weight class k, stacked on axis 0
    return np.stack([occupancy_mean(k, times, n) for k in range(n + 1)])


def a_expected_bruteforce(n: int, u: float = THETA, nodes: int = 200) -> float:
    """A(1̂, u) from the sum over all v, i, j of the double integral of
    m(v, s) m(1̂ - v, u - s - t) m(e_i + e_j, t) over the simplex s + t <= u.
    """
    if not 1 <= n <= 3:
        raise ValueError("brute-force oracle is limited to n <= 3")
    s, t, w = _simplex_simpson(u, nodes)
    ms, mr, mt = _class_table(s, n), _class_table(np.maximum(u - s - t, 0.0), n), _class_table(t, n)
    full = (1 << n) - 1
    total = np.zeros_like(w)
    for v in range(1 << n):
        outer = ms[hamming(v)] * mr[hamming(full ^ v)]
        for i in range(n):
            for j in range(n):
                total += outer * mt[hamming((1 << i) ^ (1 << j))]
    return float(np.sum(total * w))


def ab_expected_bruteforce(n: int, u: float = THETA, nodes: int = 200) -> float:
    """A(1̂, u) + B(1̂, u) from the unreduced sum over v, w, i, j."""
    if not 1 <= n <= 3:
        raise ValueError("brute-force oracle is limited to n <= 3")
    s, t, w = _simplex_simpson(u, nodes)
    ms, mr, mt = _class_table(s, n), _class_table(np.maximum(u - s - t, 0.0), n), _class_table(t, n)
    full = (1 << n) - 1
    total = np.zeros_like(w)
    for v in range(1 << n):
        for x in range(1 << n):
            d = x ^ v
            outer = ms[hamming(v)] * mr[hamming(full ^ x)]
            inner = np.zeros_like(w)
            for i in range(n):
                ei = 1 << i
                for j in range(n):
                    ej = 1 << j
                    inner += (mt[hamming(d)] * mt[hamming(d ^ ei ^ ej)]
                              + mt[hamming(d ^ ei)] * mt[hamming(d ^ ej)])
            total += outer * inner
    return float(np.sum(total * w))

