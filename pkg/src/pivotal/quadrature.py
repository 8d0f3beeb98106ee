"""Quadrature kernels: Gauss-Legendre, adaptive Simpson, power-law singular integrals."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

_GL_SIZES = (8, 16, 32, 64)
_gl_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


class QuadratureError(RuntimeError):
    """Raised when a quadrature routine cannot meet its tolerance."""


def _gl_nodes(npoints: int) -> tuple[np.ndarray, np.ndarray]:
    if npoints not in _GL_SIZES:
        raise ValueError(f"npoints must be one of {_GL_SIZES}, got {npoints}")
    if npoints not in _gl_cache:
        _gl_cache[npoints] = np.polynomial.legendre.leggauss(npoints)
    return _gl_cache[npoints]


def gauss_legendre(f: Callable, a: float, b: float, npoints: int = 32) -> float:
    """Gauss-Legendre quadrature of ``f`` on ``[a, b]``.

    Exact for polynomials of degree <= 2*npoints - 1.  ``f`` may be
    vectorized over an ndarray of nodes; a scalar fallback is used otherwise.

    Parameters
    ----------
    f : callable
        Integrand.
    a, b : float
        Interval endpoints, ``a < b``.
    npoints : int
        One of 8, 16, 32, 64.
    """
    if not a < b:
        raise ValueError("require a < b")
    x, w = _gl_nodes(npoints)
    y = 0.5 * (b - a) * x + 0.5 * (a + b)
    try:
        vals = np.asarray(f(y), dtype=float)
        if vals.shape != y.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(f(t)) for t in y])
    if not np.all(np.isfinite(vals)):
        bad = y[~np.isfinite(vals)][0]
        raise QuadratureError(f"non-finite integrand at x={bad!r}")
    return 0.5 * (b - a) * float(np.dot(w, vals))


def _simpson(fa: float, fm: float, fb: float, a: float, b: float) -> float:
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 40,
    full_output: bool = False,
):
    """Adaptive Simpson quadrature with the standard |S2-S1|/15 error estimate.

    Returns the integral, or ``(integral, achieved_depth)`` when
    ``full_output`` is set.  Raises :class:`QuadratureError` if the recursion
    exceeds ``max_depth`` before the local tolerance is met.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a == b:
        return (0.0, 0) if full_output else 0.0
    if a > b:
        raise ValueError("require a <= b")

    def _eval(x: float) -> float:
        v = float(f(x))
        if not math.isfinite(v):
            raise QuadratureError(f"non-finite integrand at x={x!r}")
        return v

    depth_used = 0
    unconverged = 0.0  # error budget spent on intervals cut off at max_depth

    def _recurse(x0, x2, f0, f1, f2, whole, eps, depth):
        nonlocal depth_used, unconverged
        xm_l = 0.5 * (x0 + 0.5 * (x0 + x2))
        xm_r = 0.5 * (0.5 * (x0 + x2) + x2)
        fl = _eval(xm_l)
        fr = _eval(xm_r)
        x1 = 0.5 * (x0 + x2)
        left = _simpson(f0, fl, f1, x0, x1)
        right = _simpson(f1, fr, f2, x1, x2)
        err = left + right - whole
        if abs(err) <= 15.0 * eps:
            depth_used = max(depth_used, depth)
            return left + right + err / 15.0
        if depth >= max_depth:
            # localized non-smoothness (e.g. a jump): the interval is now so
            # narrow that its residual error is at most |err|; spend budget
            depth_used = depth
            unconverged += abs(err)
            return left + right + err / 15.0
        return _recurse(x0, x1, f0, fl, f1, left, 0.5 * eps, depth + 1) + _recurse(
            x1, x2, f1, fr, f2, right, 0.5 * eps, depth + 1
        )

    f0, f1, f2 = _eval(a), _eval(0.5 * (a + b)), _eval(b)
    whole = _simpson(f0, f1, f2, a, b)
    value = _recurse(a, b, f0, f1, f2, whole, tol, 1)
    if unconverged > tol:
        raise QuadratureError(
            f"adaptive Simpson: unresolved error {unconverged:.3e} > tol {tol:.3e} "
            f"after max_depth={max_depth}"
        )
    return (value, depth_used) if full_output else value


def power_singular_integral(
    f: Callable[[float], float],
    alpha: float,
    x: float,
    tol: float = 1e-8,
    lipschitz: float | None = None,
) -> float:
    """Integrate ``f(z) * z**(-alpha-1)`` over ``(0, x]`` for ``f(0) = 0``.

    ``lipschitz`` must be a declared bound with ``|f(z)| <= lipschitz * z``
    near zero (we require it on all of ``(0, x]``); it certifies that the
    contribution of ``(0, eps]`` is below ``tol/2``, so quadrature only runs
    on ``[eps, x]``.

    Requires ``alpha < 1`` so that the integrand is integrable at zero.
    """
    if lipschitz is None:
        raise ValueError("a Lipschitz bound for f near 0 must be declared")
    if not 0 < alpha < 1:
        raise ValueError("power kernel exponent must satisfy 0 < alpha < 1")
    if x <= 0:
        return 0.0
    # L * eps^(1-alpha) / (1-alpha) <= tol/2
    if lipschitz == 0.0:
        eps = x
    else:
        eps = (tol * (1.0 - alpha) / (2.0 * lipschitz)) ** (1.0 / (1.0 - alpha))
        eps = min(eps, x)
    if eps >= x:
        return 0.0

    def g(z: float) -> float:
        return float(f(z)) * z ** (-alpha - 1.0)

    # Substitute z = eps * exp(u) to even out the power-law scale near eps.
    umax = math.log(x / eps)

    def g_sub(u: float) -> float:
        z = eps * math.exp(u)
        return g(z) * z

    return adaptive_simpson(g_sub, 0.0, umax, tol=tol / 2.0)
