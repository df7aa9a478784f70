"""Bessel functions J_nu of real order nu >= -1/2, their positive zeros,
and the log-Gamma function.

Evaluation is backed by scipy's AMOS-based routines; zeros of arbitrary
real order are located by bracketed root finding for the first few zeros
and McMahon-expansion guesses refined by Newton iteration beyond.  A
slow arbitrary-precision ascending-series oracle lives in the test suite
and is used to generate the golden tables this module is validated
against; it is never part of the production path.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp
from scipy.optimize import brentq

from .errors import UnsupportedRangeError

# Supported evaluation envelope for bessel_j.
NU_MIN = -0.5
NU_MAX = 50.0
X_MIN = 1e-8
X_MAX = 1e4


@dataclass(frozen=True)
class Order:
    """A validated transform order nu >= -1/2."""

    nu: float

    def __post_init__(self):
        nu = float(self.nu)
        if not math.isfinite(nu) or nu < -0.5:
            raise UnsupportedRangeError(
                f"transform order must satisfy nu >= -1/2, got nu={self.nu!r}")
        object.__setattr__(self, "nu", nu)


def as_order(nu) -> Order:
    """Coerce a float (or Order) to a validated Order."""
    return nu if isinstance(nu, Order) else Order(float(nu))


@dataclass(frozen=True)
class BesselEvalResult:
    value: float
    est_abs_error: float


def _jv(nu, x):
    """Unvalidated vectorized J_nu(x); internal use only."""
    return _sp.jv(nu, x)


def _jvp(nu, x):
    """J_nu'(x) = (J_{nu-1}(x) - J_{nu+1}(x)) / 2."""
    return 0.5 * (_sp.jv(nu - 1.0, x) - _sp.jv(nu + 1.0, x))


def bessel_j(order, x: float) -> BesselEvalResult:
    """Evaluate J_nu(x) for x > 0 within the supported envelope.

    Raises UnsupportedRangeError outside x in [1e-8, 1e4], nu in [-1/2, 50];
    the reported error estimate is conservative and satisfies
    est_abs_error <= 1e-12 * max(1, |value|) on the whole envelope.
    """
    nu = as_order(order).nu
    x = float(x)
    if not (X_MIN <= x <= X_MAX):
        raise UnsupportedRangeError(
            f"bessel_j supports x in [{X_MIN:g}, {X_MAX:g}], got x={x!r}")
    if nu > NU_MAX:
        raise UnsupportedRangeError(
            f"bessel_j supports nu in [-1/2, {NU_MAX:g}], got nu={nu!r}")
    value = float(_sp.jv(nu, x))
    # Error model: a few ulp relative plus phase error ~ eps*x at the
    # oscillatory amplitude x^{-1/2}, i.e. O(eps * sqrt(x)).
    est = 3e-15 + 1.5e-15 * abs(value) + 6e-16 * math.sqrt(max(x, 1.0))
    return BesselEvalResult(value=value, est_abs_error=est)


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0, relative error <= 1e-13."""
    x = float(x)
    if not (x > 0.0) or not math.isfinite(x):
        raise UnsupportedRangeError(f"log_gamma requires x > 0, got x={x!r}")
    return math.lgamma(x)


def gamma(x: float) -> float:
    """Gamma(x) for x > 0."""
    x = float(x)
    if not (x > 0.0) or not math.isfinite(x):
        raise UnsupportedRangeError(f"gamma requires x > 0, got x={x!r}")
    return math.gamma(x)


# ---------------------------------------------------------------------------
# Scaled kernel J_nu(t) / t^nu, the analytic even function appearing in the
# modified Hankel kernel.  Stable for t -> 0 where jv(nu,t)*t**-nu would
# lose accuracy or overflow.

_SERIES_CUT = 0.9
_SERIES_TERMS = 14
_ASYMPT_TERMS = 11


def _asympt_cut(nu: float) -> float:
    """Argument above which the Hankel asymptotic expansion is reliable."""
    return max(34.0, 1.2 * 4.0 * nu * nu)


def jv_asymptotic(nu: float, t):
    """Large-argument Hankel expansion of J_nu(t); t >= _asympt_cut(nu).

    sqrt(2/(pi t)) [P cos(omega) - Q sin(omega)], omega = t - (nu/2+1/4) pi,
    with P, Q the standard even/odd asymptotic sums.  Roughly 20x faster
    than the general-order routine on large arrays.
    """
    t = np.asarray(t, dtype=float)
    mu = 4.0 * nu * nu
    inv = 1.0 / t
    p = np.ones_like(t)
    q = np.zeros_like(t)
    term = np.ones_like(t)
    for k in range(1, _ASYMPT_TERMS):
        term = term * (mu - (2.0 * k - 1.0) ** 2) / (8.0 * k) * inv
        if k % 2 == 1:
            q += term if (k % 4 == 1) else -term
        else:
            p += term if (k % 4 == 0) else -term
    omega = t - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * t)) * (p * np.cos(omega) - q * np.sin(omega))


def jv_over_tnu(nu: float, t):
    """J_nu(t)/t^nu evaluated stably; t may be an array of positives.

    Ascending series below 0.9, AMOS in the middle, Hankel asymptotics for
    large arguments.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = t < _SERIES_CUT
    if small.any():
        ts = t[small]
        q = -0.25 * ts * ts
        c0 = math.exp(-nu * math.log(2.0) - math.lgamma(nu + 1.0))
        acc = np.full_like(ts, c0)
        term = np.full_like(ts, c0)
        for m in range(_SERIES_TERMS):
            term = term * q / ((m + 1.0) * (nu + m + 1.0))
            acc += term
        out[small] = acc
    big = ~small
    if big.any():
        cut = _asympt_cut(nu)
        tb = t[big]
        far = tb >= cut
        vals = np.empty_like(tb)
        if far.any():
            vals[far] = jv_asymptotic(nu, tb[far])
        if (~far).any():
            vals[~far] = _sp.jv(nu, tb[~far])
        if nu != 0.0:
            vals = vals * np.exp(-nu * np.log(tb))
        out[big] = vals
    return out


# ---------------------------------------------------------------------------
# Positive zeros j_{nu,k}

_zero_cache: dict[float, np.ndarray] = {}
_zero_lock = threading.Lock()


def _mcmahon(nu, k):
    """McMahon large-zero asymptotic for j_{nu,k}; k may be an array."""
    beta = (np.asarray(k, dtype=float) + 0.5 * nu - 0.25) * math.pi
    mu = 4.0 * nu * nu
    b8 = 8.0 * beta
    corr = ((mu - 1.0) / b8
            + 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 ** 3)
            + 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0)
            / (15.0 * b8 ** 5))
    return beta - corr


def _mcmahon_k_min(nu):
    """First k at which the McMahon guess is safely inside a Newton basin."""
    beta_min = max(3.0, 0.5 * (4.0 * nu * nu - 1.0))
    return max(1, int(math.ceil(beta_min / math.pi - 0.5 * nu + 0.25)) + 1)


def _first_zeros_scan(nu, count):
    """Locate the first `count` zeros by bracketed sign-change scanning."""
    zeros = []
    # j_{nu,1} lies above the turning point; start the scan just below it.
    t = max(0.25, nu + 0.05)
    if nu > 0.5:
        step = 0.4 * max(1.0, nu ** (1.0 / 3.0))
    else:
        step = 0.4
    f = lambda s: float(_sp.jv(nu, s))
    fa = f(t)
    guard = 0
    while len(zeros) < count:
        guard += 1
        if guard > 100000:  # pragma: no cover - defensive
            raise RuntimeError(f"zero scan failed for nu={nu}")
        b = t + step
        fb = f(b)
        if fa == 0.0:
            zeros.append(t)
            t = t + 1e-9 * max(1.0, t)
            fa = f(t)
            continue
        if fa * fb < 0.0:
            z = brentq(f, t, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            zeros.append(z)
            t = z + 1e-9 * max(1.0, z)
            fa = f(t)
        else:
            t, fa = b, fb
    return zeros


def _extend_zero_cache(nu, n):
    """Grow the cached zero table for `nu` to at least n entries."""
    zeros = _zero_cache.get(nu)
    have = 0 if zeros is None else len(zeros)
    if have >= n:
        return
    if nu == -0.5:
        ks = np.arange(1, n + 1, dtype=float)
        _zero_cache[nu] = (ks - 0.5) * math.pi
        return
    if nu == 0.5:
        ks = np.arange(1, n + 1, dtype=float)
        _zero_cache[nu] = ks * math.pi
        return
    k_min = _mcmahon_k_min(nu)
    parts = [] if zeros is None else [zeros]
    if have < k_min - 1:
        scanned = _first_zeros_scan(nu, min(n, k_min - 1))
        parts = [np.asarray(scanned[have:], dtype=float)] if zeros is None else \
            [zeros, np.asarray(scanned[have:], dtype=float)]
        zeros = np.concatenate(parts) if len(parts) > 1 else parts[0]
        have = len(zeros)
        parts = [zeros]
    if have < n:
        ks = np.arange(have + 1, n + 1, dtype=float)
        x = _mcmahon(nu, ks)
        for _ in range(6):
            delta = _sp.jv(nu, x) / _jvp(nu, x)
            x = x - delta
            if np.max(np.abs(delta)) < 1e-13 * np.min(x):
                break
        parts.append(x)
        zeros = np.concatenate(parts)
    prev = np.concatenate(([0.0], zeros[:-1]))
    if not np.all(zeros > prev):  # pragma: no cover - defensive
        raise RuntimeError(f"zero table for nu={nu} not increasing")
    _zero_cache[nu] = zeros


def bessel_j_zeros(order, n: int) -> np.ndarray:
    """First n positive zeros of J_nu, increasing, relative error <= 1e-12."""
    nu = as_order(order).nu
    n = int(n)
    if n < 1:
        raise UnsupportedRangeError(f"need n >= 1 zeros, got {n}")
    with _zero_lock:
        _extend_zero_cache(nu, n)
        return _zero_cache[nu][:n].copy()


def bessel_j_zero(order, k: int) -> float:
    """The k-th positive zero j_{nu,k}, k >= 1."""
    k = int(k)
    if k < 1:
        raise UnsupportedRangeError(f"zero index must satisfy k >= 1, got {k}")
    return float(bessel_j_zeros(order, k)[-1])
