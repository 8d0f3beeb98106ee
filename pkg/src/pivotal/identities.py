"""Poisson, Erlang and compound-Poisson identities: closed forms, recursions, quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .quadrature import adaptive_simpson


@dataclass(frozen=True)
class LatticeDistribution:
    """A probability distribution on {0, 1, ..., len(probs)-1}."""

    probs: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.probs, dtype=float)
        q.flags.writeable = False
        object.__setattr__(self, "probs", q)
        if np.any(q < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(q.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {q.sum()!r}, not 1")

    @staticmethod
    def delta(j: int) -> "LatticeDistribution":
        q = np.zeros(j + 1)
        q[j] = 1.0
        return LatticeDistribution(q)

    @staticmethod
    def uniform(values) -> "LatticeDistribution":
        values = list(values)
        q = np.zeros(max(values) + 1)
        for v in values:
            q[v] += 1.0 / len(values)
        return LatticeDistribution(q)

    @staticmethod
    def from_dict(masses: dict[int, float]) -> "LatticeDistribution":
        q = np.zeros(max(masses) + 1)
        for v, p in masses.items():
            q[v] = p
        return LatticeDistribution(q)

    def q(self, j: int) -> float:
        return float(self.probs[j]) if 0 <= j < self.probs.size else 0.0


def poisson_pmf(theta: float, k) -> np.ndarray | float:
    """Poisson mass via log-gamma (stable up to theta ~ 700)."""
    k = np.asarray(k)
    if theta == 0.0:
        return np.where(k == 0, 1.0, 0.0) if k.ndim else (1.0 if k == 0 else 0.0)
    out = np.exp(k * math.log(theta) - theta - gammaln(k + 1.0))
    return out if out.ndim else float(out)


def poisson_tail(theta: float, k: int) -> float:
    """P(Poisson(theta) >= k) as 1 minus the partial sum, with a stable term recurrence."""
    if theta < 0 or k < 1:
        raise ValueError("need theta >= 0 and k >= 1")
    if theta == 0.0:
        return 0.0
    term = math.exp(-theta)
    acc = term
    for j in range(1, k):
        term *= theta / j
        acc += term
    return max(0.0, 1.0 - acc)


def _gamma_kernel_quadrature(shape: float, rate: float, upper: float, integrand, tol: float) -> float:
    """Adaptive quadrature of a gamma-shaped kernel on [0, upper], pre-split
    around the kernel's mode so a narrow bump cannot hide between the initial
    probe points of a single wide interval."""
    sd = math.sqrt(shape) / rate
    mode = max(shape - 1.0, 0.0) / rate
    anchors = sorted({0.0, upper} | {
        min(max(mode + j * sd, 0.0), upper) for j in (-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0)
    })
    pieces = [(a, b) for a, b in zip(anchors, anchors[1:]) if b > a]
    return sum(adaptive_simpson(integrand, a, b, tol=tol / len(pieces)) for a, b in pieces)


def poisson_tail_integral(theta: float, k: int, tol: float = 1e-12) -> float:
    """Integral of the Erlang-type kernel t^(k-1) e^-t / (k-1)! over [0, theta]."""
    if theta < 0 or k < 1:
        raise ValueError("need theta >= 0 and k >= 1")
    if theta == 0.0:
        return 0.0
    lg = math.lgamma(k)

    def integrand(t: float) -> float:
        if t <= 0.0:
            return 1.0 if k == 1 else 0.0
        return math.exp((k - 1) * math.log(t) - t - lg)

    return _gamma_kernel_quadrature(float(k), 1.0, theta, integrand, tol)


def erlang_cdf(n: int, theta: float, x: float, tol: float = 1e-12) -> tuple[float, float, float]:
    """Erlang distribution function three ways: density quadrature, the
    parameter-integral representation, and the Poisson tail at theta*x."""
    if n < 1 or theta <= 0 or x < 0:
        raise ValueError("need n >= 1, theta > 0, x >= 0")
    if x == 0.0:
        return 0.0, 0.0, 0.0
    lg = math.lgamma(n)

    def density(y: float) -> float:
        if y <= 0.0:
            return theta if n == 1 else 0.0
        return math.exp(n * math.log(theta) + (n - 1) * math.log(y) - theta * y - lg)

    direct = _gamma_kernel_quadrature(float(n), theta, x, density, tol)

    def kernel(t: float) -> float:
        if t <= 0.0:
            return x if n == 1 else 0.0
        return math.exp(n * math.log(x) + (n - 1) * math.log(t) - t * x - lg)

    via_integral = _gamma_kernel_quadrature(float(n), x, theta, kernel, tol)
    via_poisson = poisson_tail(theta * x, n)
    return direct, via_integral, via_poisson


# -- compound Poisson ---------------------------------------------------------


def cpois_pmf_direct(theta: float, q: LatticeDistribution, k: int, tol: float = 1e-14) -> float:
    """Mass at k by the defining mixture: sum over n of Po(theta;n) * Q^(*n)(k).

    The sum stops once the Poisson tail bound (times the trivial bound 1 on
    convolution masses) drops below ``tol`` relative to the accumulated mass;
    convolution powers are built iteratively and truncated at argument k.
    When the jump law puts no mass at 0, Q^(*n)(k) vanishes for n > k and the
    sum is finite outright.
    """
    if k < 0:
        return 0.0
    probs = q.probs[: k + 1] if q.probs.size > k else np.pad(q.probs, (0, k + 1 - q.probs.size))
    conv = np.zeros(k + 1)
    conv[0] = 1.0  # Q^(*0) = delta_0
    term = math.exp(-theta)
    acc = term * conv[k]
    nmax = k if probs[0] == 0.0 else 1_000_000
    n = 0
    while n < nmax:
        n += 1
        conv = np.convolve(conv, probs)[: k + 1]
        term *= theta / n
        acc += term * conv[k]
        # P(Po > n) <= term * (theta/(n+1)) / (1 - theta/(n+2)), a geometric
        # bound once n exceeds theta; cancellation-free
        if n + 2 > theta:
            tail_bound = term * (theta / (n + 1)) / (1.0 - theta / (n + 2))
            if tail_bound <= tol * acc or tail_bound < 1e-280:
                break
    return acc


def cpois_pmf_panjer(theta: float, q: LatticeDistribution, k: int) -> float:
    """Mass at k by the Panjer recursion with p_0 = exp(-theta(1-q_0))."""
    return float(panjer_pmfs(theta, q, k)[k])


def panjer_pmfs(theta: float, q: LatticeDistribution, kmax: int) -> np.ndarray:
    """All masses p_0..p_kmax: p_k = (theta/k) * sum_i i q_i p_{k-i}."""
    p = np.zeros(kmax + 1)
    p[0] = math.exp(-theta * (1.0 - q.q(0)))
    jq = np.arange(q.probs.size) * q.probs
    for k in range(1, kmax + 1):
        imax = min(k, q.probs.size - 1)
        if imax >= 1:
            p[k] = (theta / k) * float(np.dot(jq[1 : imax + 1], p[k - imax : k][::-1]))
    return p


def cpois_pmf_polyrec(theta: float, q: LatticeDistribution, k: int) -> float:
    """Mass at k via the polynomial coefficient recursion.

    With c_k(theta) = exp((1-q_0) theta) * mass_k(theta), c_0 = 1 and
    c_k = sum_{j<k} q_{k-j} * Integral_0^theta c_j(t) dt, a degree-k
    polynomial whose coefficients are accumulated exactly.
    """
    if k < 0:
        return 0.0
    # coeff[j] holds the coefficient array of c_j
    coeffs: list[np.ndarray] = [np.array([1.0])]
    for kk in range(1, k + 1):
        c = np.zeros(kk + 1)
        for j in range(kk):
            if q.q(kk - j) == 0.0:
                continue
            cj = coeffs[j]
            integ = np.zeros(cj.size + 1)
            integ[1:] = cj / np.arange(1, cj.size + 1)
            c[: integ.size] += q.q(kk - j) * integ
        coeffs.append(c)
    ck = coeffs[k]
    value = 0.0
    for a in ck[::-1]:  # Horner
        value = value * theta + a
    return math.exp(-theta * (1.0 - q.q(0))) * value


def cpois_cdf(theta: float, q: LatticeDistribution, x: float) -> float:
    """Distribution function of the compound sum at x (lattice support)."""
    if x < 0:
        return 0.0
    kmax = int(math.floor(x + 1e-12))
    return float(panjer_pmfs(theta, q, kmax).sum())


def cpois_cdf_ode_residual(theta: float, q: LatticeDistribution, x: float, delta: float) -> float:
    """Residual of the rate equation for the compound distribution function.

    Central difference in theta of F(theta, x) minus
    sum_z F(theta, x - z) q_z - F(theta, x); O(delta^2) plus roundoff.
    """
    if not 0.0 < delta < theta:
        raise ValueError("need 0 < delta < theta")
    fd = (cpois_cdf(theta + delta, q, x) - cpois_cdf(theta - delta, q, x)) / (2.0 * delta)
    rhs = -cpois_cdf(theta, q, x)
    for z in range(q.probs.size):
        if q.probs[z] > 0.0:
            rhs += q.probs[z] * cpois_cdf(theta, q, x - z)
    return fd - rhs
