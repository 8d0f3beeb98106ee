"""Exact Margulis-Russo machinery for finite i.i.d. Bernoulli systems.

Events live on {0,1}^m with a common success probability.  For m <= 24 all
quantities (event probability as a polynomial in the success probability,
expected signed pivotal counts) are computed exactly by enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quadrature import adaptive_simpson
from .rng import RngStream

MAX_EXACT_BITS = 24


@dataclass(frozen=True)
class BooleanEvent:
    """An event A on {0,1}^nbits given by its indicator.

    ``indicator`` receives an (N, nbits) 0/1 matrix and returns (N,) booleans;
    a scalar fallback (one bit vector in, bool out) is also accepted.
    """

    nbits: int
    indicator: Callable
    monotone: bool = False


def _eval_indicator(event: BooleanEvent, bits: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(event.indicator(bits))
        if out.shape == (bits.shape[0],):
            return out.astype(bool)
    except Exception:
        pass
    return np.array([bool(event.indicator(row)) for row in bits])


def _bits_matrix(m: int, idx: np.ndarray) -> np.ndarray:
    return (idx[:, None] >> np.arange(m)[None, :] & 1).astype(np.uint8)


def truth_table(event: BooleanEvent) -> np.ndarray:
    """Indicator values on all 2^m outcomes, with purity spot checks."""
    m = event.nbits
    if m > MAX_EXACT_BITS:
        raise ValueError(f"exact enumeration capped at {MAX_EXACT_BITS} bits, got {m}")
    idx = np.arange(1 << m, dtype=np.int64)
    table = _eval_indicator(event, _bits_matrix(m, idx))
    # the indicator must be a pure function: re-evaluate a few outcomes
    probe = idx[:: max(1, (1 << m) // 8)][:8]
    again = _eval_indicator(event, _bits_matrix(m, probe))
    if not np.array_equal(table[probe], again):
        raise ValueError("indicator is not a pure function of its input")
    return table


def pivotal_counts(event: BooleanEvent, x) -> tuple[int, int]:
    """(+)- and (-)-pivotal coordinate counts of ``x`` for the event.

    Coordinate i is (+)-pivotal if setting it to 1 puts the outcome in A while
    setting it to 0 leaves A; (-)-pivotal is the reverse.
    """
    x = np.asarray(x, dtype=np.uint8)
    if x.shape != (event.nbits,):
        raise ValueError(f"expected a vector of {event.nbits} bits")
    ups = np.tile(x, (event.nbits, 1))
    downs = ups.copy()
    ups[np.arange(event.nbits), np.arange(event.nbits)] = 1
    downs[np.arange(event.nbits), np.arange(event.nbits)] = 0
    in_up = _eval_indicator(event, ups)
    in_down = _eval_indicator(event, downs)
    nplus = int(np.count_nonzero(in_up & ~in_down))
    nminus = int(np.count_nonzero(in_down & ~in_up))
    return nplus, nminus


@dataclass(frozen=True)
class EventPolynomial:
    """P_theta(A) organized by popcount class: P(t) = sum_j counts[j] t^j (1-t)^(m-j).

    ``counts[j]`` is the number of outcomes of A with exactly j ones, so every
    contribution to P is nonnegative per (j, m-j) power pair and evaluation is
    cancellation-free.  ``coefficients`` are the exact monomial coefficients.
    """

    nbits: int
    counts: np.ndarray  # (m+1,) int64
    coefficients: np.ndarray  # (m+1,) float (exact integers below 2^53)

    def probability(self, theta):
        theta = np.asarray(theta, dtype=float)
        j = np.arange(self.nbits + 1)
        t = theta[..., None]
        with np.errstate(invalid="ignore"):
            terms = self.counts * t**j * (1.0 - t) ** (self.nbits - j)
        return np.where(np.isnan(terms), 0.0, terms).sum(axis=-1)

    def derivative(self, theta):
        theta = np.asarray(theta, dtype=float)
        m = self.nbits
        j = np.arange(m + 1)
        t = theta[..., None]
        with np.errstate(divide="ignore", invalid="ignore"):
            up = self.counts * j * t ** np.maximum(j - 1, 0) * (1.0 - t) ** (m - j)
            down = self.counts * (m - j) * t**j * (1.0 - t) ** np.maximum(m - j - 1, 0)
        up = np.where(np.isfinite(up), up, 0.0)
        down = np.where(np.isfinite(down), down, 0.0)
        return (up - down).sum(axis=-1)


def event_polynomial(event: BooleanEvent) -> EventPolynomial:
    m = event.nbits
    table = truth_table(event)
    idx = np.arange(1 << m, dtype=np.int64)
    pop = np.array([int(v).bit_count() for v in range(1 << m)], dtype=np.int64)
    counts = np.bincount(pop[table], minlength=m + 1)
    # exact integer expansion of sum_j c_j t^j (1-t)^(m-j)
    coeffs = [0] * (m + 1)
    for j in range(m + 1):
        c = int(counts[j])
        if c == 0:
            continue
        for l in range(m - j + 1):
            coeffs[j + l] += c * ((-1) ** l) * math.comb(m - j, l)
    return EventPolynomial(m, counts, np.array(coeffs, dtype=float))


def event_probability(event: BooleanEvent, theta: float) -> float:
    """Exact P_theta(A) by enumeration of all outcomes."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    return float(event_polynomial(event).probability(np.asarray(theta, dtype=float)))


def _signed_pivotal_by_popcount(event: BooleanEvent) -> tuple[np.ndarray, np.ndarray]:
    """Per-popcount sums of N+ and N- over all outcomes (exact integers)."""
    m = event.nbits
    table = truth_table(event)
    idx = np.arange(1 << m, dtype=np.int64)
    pop = np.array([int(v).bit_count() for v in range(1 << m)], dtype=np.int64)
    nplus = np.zeros(1 << m, dtype=np.int64)
    nminus = np.zeros(1 << m, dtype=np.int64)
    for i in range(m):
        bit = 1 << i
        up = table[idx | bit]
        down = table[idx & ~bit]
        nplus += (up & ~down).astype(np.int64)
        nminus += (down & ~up).astype(np.int64)
    eplus = np.bincount(pop, weights=nplus, minlength=m + 1)
    eminus = np.bincount(pop, weights=nminus, minlength=m + 1)
    return eplus, eminus


def russo_derivative(event: BooleanEvent, theta: float) -> float:
    """Exact E_theta[N+ - N-]; equals d/dtheta of the event probability."""
    est = russo_pivotal_expectations(event, theta)
    return est[0] - est[1]


def russo_pivotal_expectations(event: BooleanEvent, theta: float) -> tuple[float, float]:
    """(E_theta N+, E_theta N-) by exact enumeration."""
    m = event.nbits
    eplus, eminus = _signed_pivotal_by_popcount(event)
    j = np.arange(m + 1)
    with np.errstate(invalid="ignore"):
        w = theta**j * (1.0 - theta) ** (m - j)
    w = np.where(np.isfinite(w), w, 0.0)
    return float(np.dot(eplus, w)), float(np.dot(eminus, w))


def russo_derivative_mc(event: BooleanEvent, theta: float, reps: int, rng: RngStream) -> tuple[float, float]:
    """Monte Carlo E_theta[N+ - N-] for systems too large to enumerate."""
    gen = rng.generator()
    vals = np.empty(reps)
    for i in range(reps):
        x = (gen.random(event.nbits) < theta).astype(np.uint8)
        np_, nm = pivotal_counts(event, x)
        vals[i] = np_ - nm
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(reps))


# -- event builders ---------------------------------------------------------


def threshold_event(m: int, k: int) -> BooleanEvent:
    """A = {at least k of m bits are 1} (monotone)."""
    return BooleanEvent(m, lambda bits: bits.sum(axis=1) >= k, monotone=True)


def all_ones_event(m: int) -> BooleanEvent:
    return BooleanEvent(m, lambda bits: bits.sum(axis=1) == m, monotone=True)


def full_event(m: int) -> BooleanEvent:
    return BooleanEvent(m, lambda bits: np.ones(bits.shape[0], dtype=bool), monotone=True)


def dnf_event(m: int, clauses: list[tuple[int, ...]]) -> BooleanEvent:
    """Monotone DNF: OR over clauses of AND over the clause's coordinates."""
    frozen = [np.asarray(c, dtype=int) for c in clauses]

    def indicator(bits):
        out = np.zeros(bits.shape[0], dtype=bool)
        for c in frozen:
            out |= bits[:, c].all(axis=1)
        return out

    return BooleanEvent(m, indicator, monotone=True)


def random_monotone_dnf(m: int, rng: RngStream, max_clauses: int = 4) -> BooleanEvent:
    gen = rng.generator()
    nclauses = int(gen.integers(1, max_clauses + 1))
    clauses = []
    for _ in range(nclauses):
        width = int(gen.integers(1, max(2, m // 2) + 1))
        clauses.append(tuple(sorted(gen.choice(m, size=width, replace=False).tolist())))
    return dnf_event(m, clauses)


def random_event(m: int, rng: RngStream) -> BooleanEvent:
    """An arbitrary event drawn as a uniform random truth table."""
    gen = rng.generator()
    table = gen.random(1 << m) < 0.5
    weights = 1 << np.arange(m, dtype=np.int64)

    def indicator(bits):
        return table[bits.astype(np.int64) @ weights]

    return BooleanEvent(m, indicator)


# -- integral-representation reports ----------------------------------------


def binomial_pmf(n: int, p: float, j: int) -> float:
    return math.comb(n, j) * p**j * (1.0 - p) ** (n - j)


def negbin_pmf(r: int, p: float, j: int) -> float:
    """Mass at j failures before the r-th success."""
    return math.comb(j + r - 1, j) * p**r * (1.0 - p) ** j


@dataclass(frozen=True)
class BinomialIdentityReport:
    n: int
    k: int
    p: float
    tail: float  # P(Bin(n,p) >= k)
    integral: float  # incomplete-beta side
    gap: float


def identity_report_binomial(n: int, k: int, p: float, tol: float = 1e-12) -> BinomialIdentityReport:
    """Binomial tail versus its incomplete-beta integral representation."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    tail = sum(binomial_pmf(n, p, j) for j in range(k, n + 1))
    prefac = math.exp(math.lgamma(n + 1) - math.lgamma(k) - math.lgamma(n - k + 1))
    integral = adaptive_simpson(
        lambda t: prefac * t ** (k - 1) * (1.0 - t) ** (n - k), 0.0, p, tol=tol
    ) if p > 0 else 0.0
    return BinomialIdentityReport(n, k, p, tail, integral, abs(tail - integral))


@dataclass(frozen=True)
class NegBinIdentityReport:
    r: int
    k: int
    p: float
    binomial_tail: float  # P(Bin(k+r-1, p) >= r)
    integral: float
    gap: float
    nb_sum_below_k: float  # sum_{j<=k-1} NB(r,p;j) -- matches the integral
    nb_sum_through_k: float  # sum_{j<=k} NB(r,p;j) -- off by NB(r,p;k)
    gap_below_k: float
    gap_through_k: float


def identity_report_negbin(r: int, k: int, p: float, tol: float = 1e-12) -> NegBinIdentityReport:
    """Negative-binomial identity report.

    Besides the binomial-tail formulation, both partial sums of the
    negative-binomial mass (up to k-1 and up to k) are reported against the
    integral: only the former matches, the latter exceeds it by NB(r,p;k).
    """
    if r < 1 or k < 1:
        raise ValueError("need r, k >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    n = k + r - 1
    tail = sum(binomial_pmf(n, p, j) for j in range(r, n + 1))
    prefac = math.exp(math.lgamma(k + r) - math.lgamma(k) - math.lgamma(r))
    integral = adaptive_simpson(
        lambda t: prefac * t ** (r - 1) * (1.0 - t) ** (k - 1), 0.0, p, tol=tol
    ) if p > 0 else 0.0
    below = sum(negbin_pmf(r, p, j) for j in range(k))
    through = below + negbin_pmf(r, p, k)
    return NegBinIdentityReport(
        r, k, p, tail, integral, abs(tail - integral),
        below, through, abs(below - integral), abs(through - integral),
    )
