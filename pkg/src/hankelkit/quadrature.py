"""Numerical integration engines on (0, infinity).

Three families:

* oscillatory half-line integrals against Bessel kernels, segmented at the
  scaled kernel zeros so consecutive panel contributions alternate in sign
  (cheap tail bounds, and iterated averaging accelerates slowly decaying
  alternating tails);
* power-weight endpoint-singular integrals handled by Gauss-Jacobi rules;
* weighted L^p norms with declared-decay tail handling, including a
  geometric-ratio completion for algebraic tails.

All routines are pure functions of value inputs; node/weight caches are
initialize-once and safe for concurrent readers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import special as _sp

from .errors import DivergenceError, TruncationError, UnsupportedRangeError
from .special import as_order, bessel_j_zeros, jv_over_tnu


@dataclass(frozen=True)
class QuadConfig:
    """Budgets and tolerances for oscillatory, singular, and tail quadrature."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    points_per_segment: int = 15
    max_segments: int = 4096
    tail_stop: float = 1e-16

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.tail_stop > 0):
            raise UnsupportedRangeError("all quadrature tolerances must be positive")
        if self.points_per_segment < 5:
            raise UnsupportedRangeError("points_per_segment must be >= 5")
        if self.max_segments < 16:
            raise UnsupportedRangeError("max_segments must be >= 16")

    def with_doubled_points(self) -> "QuadConfig":
        return QuadConfig(self.rel_tol, self.abs_tol,
                          2 * self.points_per_segment, self.max_segments,
                          self.tail_stop)


DEFAULT_CONFIG = QuadConfig()


class DecayClass(enum.Enum):
    COMPACT = "compact"
    SUPEREXPONENTIAL = "superexponential"
    EXPONENTIAL = "exponential"
    POLYNOMIAL = "polynomial"
    UNKNOWN = "unknown"


def truncation_radius(decay: DecayClass, scale: float, tol: float) -> Optional[float]:
    """Radius beyond which a function of the given decay class is < tol.

    None means "no a-priori radius": truncation is then governed purely by
    the running tail-stop criterion.
    """
    if decay is DecayClass.SUPEREXPONENTIAL:
        return scale * (math.sqrt(2.0 * math.log(1.0 / tol)) + 2.0)
    if decay is DecayClass.EXPONENTIAL:
        return scale * (math.log(1.0 / tol) + 5.0)
    return None


class Measure(enum.Enum):
    LEBESGUE_DX = "dx"
    DM_NU = "dm_nu"


@dataclass(frozen=True)
class WeightedNormSpec:
    """Exponent p, power weight, and measure for a weighted L^p norm.

    For measure dm_nu the effective weight is x^weight_power * x^(2nu+1).
    """

    p: float
    weight_power: float = 0.0
    measure: Measure = Measure.LEBESGUE_DX
    nu: Optional[float] = None

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise UnsupportedRangeError(f"norm exponent must be >= 1, got p={self.p!r}")
        if self.measure is Measure.DM_NU:
            if self.nu is None:
                raise UnsupportedRangeError("measure dm_nu requires an order nu")
            as_order(self.nu)

    @property
    def composed_weight(self) -> float:
        w = self.weight_power
        if self.measure is Measure.DM_NU:
            w += 2.0 * self.nu + 1.0
        return w


class QuadResult(NamedTuple):
    value: float
    est_error: float
    segments: int
    truncated: bool


# ---------------------------------------------------------------------------
# node/weight rules


@lru_cache(maxsize=256)
def gauss_legendre_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    return x, w


@lru_cache(maxsize=1024)
def power_weight_rule(n: int, right_exp: float, left_exp: float):
    """Rule for int_0^1 (1-s)^right_exp * s^left_exp * g(s) ds.

    Nodes and weights come from the Gauss-Jacobi rule on [-1, 1]; both
    exponents must exceed -1.
    """
    if right_exp <= -1.0 or left_exp <= -1.0:
        raise DivergenceError(
            f"power weight exponents must exceed -1, got ({right_exp}, {left_exp})")
    t, w = _sp.roots_jacobi(int(n), right_exp, left_exp)
    s = 0.5 * (t + 1.0)
    w = w * 0.5 ** (right_exp + left_exp + 1.0)
    return s, w


def _call_vec(f, arr: np.ndarray) -> np.ndarray:
    """Evaluate f on an array, falling back to a scalar loop."""
    try:
        out = np.asarray(f(arr), dtype=float)
        if out.shape == arr.shape:
            return out
    except Exception:
        pass
    flat = np.array([float(f(v)) for v in arr.ravel()], dtype=float)
    return flat.reshape(arr.shape)


def _panel_nodes(bounds: np.ndarray, n: int):
    """Gauss-Legendre nodes/weights for a batch of panels.

    bounds has m+1 entries; returns (m, n) node and weight arrays.
    """
    x, w = gauss_legendre_rule(n)
    a = bounds[:-1][:, None]
    b = bounds[1:][:, None]
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * x[None, :]
    weights = half * w[None, :]
    return nodes, weights


def alternating_series_limit(partials: Sequence[float]):
    """Iterated-averaging limit of an alternating sequence of partial sums.

    Returns (limit, error_estimate).  Works on the trailing window so early
    pre-asymptotic terms do not pollute the extrapolation.
    """
    arr = np.asarray(partials, dtype=float)
    if arr.size < 3:
        return float(arr[-1]), float("inf")
    arr = arr[-min(arr.size, 30):]
    prev = arr[-1]
    while arr.size > 1:
        arr = 0.5 * (arr[1:] + arr[:-1])
        est = abs(float(arr[-1]) - prev)
        prev = float(arr[-1])
    return prev, est


# ---------------------------------------------------------------------------
# oscillatory half-line integrals


def _head_boundaries(lo: float, hi: float, scale: float) -> np.ndarray:
    """Panel boundaries on [lo, hi]: geometric growth capped at 2*scale."""
    if hi <= lo:
        return np.array([lo, hi])
    pts = [lo]
    if lo == 0.0:
        step = min(0.5 * scale, 0.5 * hi)
    else:
        step = min(0.5 * scale, 0.5 * (hi - lo), 0.25 * lo + 1e-300)
        step = max(step, 1e-3 * (hi - lo))
    t = lo
    cap = 2.0 * scale
    while t < hi:
        t = min(t + step, hi)
        pts.append(t)
        step = min(2.0 * step, cap)
    return np.asarray(pts)


def integrate_oscillatory(f, order, x: float, cfg: QuadConfig = None, *,
                          kernel: str = "modified", small_x: float = 0.0,
                          support=None, decay: DecayClass = DecayClass.UNKNOWN,
                          scale: float = 1.0, f_mp=None) -> QuadResult:
    """Integrate f against a Bessel kernel over (0, inf).

    kernel="modified":     int J_nu(xy)/(xy)^nu * f(y) * y^(2nu+1) dy
    kernel="nonmodified":  int (xy)^(1/2) J_nu(xy) * f(y) dy

    Panels run between consecutive scaled kernel zeros j_{nu,k}/x, with a
    singular-aware head on (0, j_{nu,1}/x); `small_x` declares the leading
    power of f at 0 so the head can use a Gauss-Jacobi rule.  Alternating
    panel sums are extrapolated by iterated averaging, which also handles
    algebraically decaying oscillatory tails.  If the float64 alternating
    sum would lose more relative digits than rel_tol allows and `f_mp` (an
    mpmath-callable twin of f) is available, the computation is redone in
    scaled arbitrary precision.
    """
    cfg = cfg or DEFAULT_CONFIG
    nu = as_order(order).nu
    x = float(x)
    if not (x > 0.0):
        raise UnsupportedRangeError(f"transform abscissa must be > 0, got {x!r}")
    if kernel not in ("modified", "nonmodified"):
        raise UnsupportedRangeError(f"unknown kernel {kernel!r}")

    if kernel == "modified":
        head_exp = small_x + 2.0 * nu + 1.0
    else:
        head_exp = small_x + nu + 0.5
    if head_exp <= -1.0:
        raise DivergenceError(
            f"integrand ~ y^{head_exp:g} at 0 is not integrable "
            f"(small_x={small_x:g}, kernel={kernel})")

    def integrand(y):
        t = x * y
        k = jv_over_tnu(nu, t)
        if kernel == "modified":
            w = k * np.exp((2.0 * nu + 1.0) * np.log(y))
        else:
            w = k * np.exp((nu + 0.5) * np.log(t))
        return w * _call_vec(f, y)

    lo, hi = 0.0, None
    if support is not None:
        lo = max(0.0, float(support[0]))
        hi = float(support[1])
    radius = truncation_radius(decay, scale, cfg.tail_stop)
    if radius is not None:
        hi = radius if hi is None else min(hi, radius)
    if hi is not None and hi <= lo:
        return QuadResult(0.0, 0.0, 0, False)

    n = cfg.points_per_segment
    zeros = bessel_j_zeros(nu, 64) / x

    acc = 0.0
    est_head = 0.0
    max_scale = 0.0

    # Singular-aware innermost panel [lo, a0], then smooth panels up to the
    # first kernel zero above the starting point.
    if lo == 0.0:
        a0 = min(0.5 * scale, 0.5 * (zeros[0] if hi is None else min(zeros[0], hi)))
        s, w = power_weight_rule(n + 8, 0.0, head_exp)
        s2, w2 = power_weight_rule(n + 16, 0.0, head_exp)

        def head_smooth(y):
            t = x * y
            k = jv_over_tnu(nu, t)
            g = _call_vec(f, y) * np.exp(-small_x * np.log(y))
            if kernel == "modified":
                return k * g
            return k * g * np.exp((nu + 0.5) * math.log(x))

        c = a0 ** (head_exp + 1.0)
        v1 = c * float(np.dot(w, head_smooth(a0 * s)))
        v2 = c * float(np.dot(w2, head_smooth(a0 * s2)))
        acc += v2
        est_head = abs(v2 - v1)
        max_scale = abs(v2)
        body_lo = a0
    else:
        body_lo = lo

    # first kernel zero strictly above the body start
    k_start = int(np.searchsorted(zeros, body_lo, side="right"))
    while k_start >= len(zeros):
        zeros = bessel_j_zeros(nu, 2 * len(zeros)) / x
        k_start = int(np.searchsorted(zeros, body_lo, side="right"))
    head_end = zeros[k_start] if hi is None else min(zeros[k_start], hi)

    bounds = _head_boundaries(body_lo, head_end, scale)
    if bounds[-1] > bounds[0]:
        nodes, weights = _panel_nodes(bounds, n + 4)
        vals = integrand(nodes)
        contribs = np.sum(vals * weights, axis=1)
        acc += float(np.sum(contribs))
        max_scale = max(max_scale, float(np.max(np.abs(contribs), initial=0.0)))

    done = hi is not None and head_end >= hi
    segs: list[float] = []
    truncated = False
    accel_value = None
    accel_est = None
    prev_accel = None
    small_streak = 0
    worst_panel = None  # (a, b, contribution)

    k0 = k_start
    seg_sum = 0.0
    chunk = 16
    max_zero_index = k_start + cfg.max_segments + 2
    while not done:
        if k0 + chunk + 1 > len(zeros):
            need = min(max(2 * len(zeros), k0 + chunk + 1), max_zero_index)
            zeros = bessel_j_zeros(nu, need) / x
        upper_idx = min(k0 + chunk, len(zeros) - 1)
        bnds = zeros[k0:upper_idx + 1].copy()
        if hi is not None:
            clipped = bnds < hi
            if not clipped.all():
                bnds = np.concatenate([bnds[clipped], [hi]])
                done = True
        if len(bnds) < 2:
            break
        nodes, weights = _panel_nodes(bnds, n)
        vals = integrand(nodes)
        contribs = np.sum(vals * weights, axis=1)
        for i, c in enumerate(contribs):
            segs.append(float(c))
            seg_sum += float(c)
            mag = abs(float(c))
            if worst_panel is None or mag > worst_panel[2]:
                worst_panel = (float(bnds[i]), float(bnds[i + 1]), mag)
            max_scale = max(max_scale, mag)
            if max_scale > 0.0 and \
                    mag <= cfg.tail_stop * max(abs(acc + seg_sum), cfg.abs_tol):
                small_streak += 1
                if small_streak >= 2 and len(segs) >= 2:
                    done = True
                    break
            else:
                small_streak = 0
        k0 = upper_idx
        if done:
            break
        if len(segs) >= cfg.max_segments:
            truncated = True
            break
        if len(segs) >= 16:
            signs = np.sign(segs[-16:])
            flips = np.sum(signs[1:] * signs[:-1] < 0)
            if flips >= 12:
                partials = acc + np.cumsum(segs)
                val, est = alternating_series_limit(partials)
                if prev_accel is not None and \
                        abs(val - prev_accel) < max(cfg.abs_tol,
                                                    cfg.rel_tol * abs(val)):
                    accel_value = val
                    accel_est = est + abs(val - prev_accel)
                    done = True
                prev_accel = val

    plain = acc + float(np.sum(segs)) if segs else acc
    if accel_value is not None:
        value = accel_value
        tail_est = accel_est
    else:
        value = plain
        tail_est = abs(segs[-1]) if segs else 0.0
        if truncated:
            # Alternating segmentation means the true value lies within the
            # last panel contribution of the partial sum.
            tail_est = max(tail_est, abs(segs[-1]))

    # Error estimate: panel-order doubling on the worst oscillatory panel.
    est_worst = 0.0
    if worst_panel is not None and worst_panel[2] > 0.0:
        a, b, _ = worst_panel
        for m in (n, 2 * n):
            nodes, weights = _panel_nodes(np.array([a, b]), m)
            vals = integrand(nodes)
            if m == n:
                c1 = float(np.sum(vals * weights))
            else:
                c2 = float(np.sum(vals * weights))
        est_worst = abs(c2 - c1) * math.sqrt(max(len(segs), 1))

    est = est_head + est_worst + tail_est
    nsegs = len(segs)

    # Cancellation escalation: when the alternating sum destroys more digits
    # than the requested relative tolerance leaves, redo in mpmath.
    tol_eff = max(cfg.abs_tol, cfg.rel_tol * abs(value))
    if f_mp is not None and max_scale > 0.0 and \
            4e-16 * max_scale > tol_eff and not truncated:
        value_mp, est_mp = _mp_oscillatory(
            f_mp, nu, x, kernel, small_x, lo, hi, max_scale, cfg)
        return QuadResult(value_mp, est_mp, nsegs, False)

    if truncated:
        raise TruncationError(
            f"oscillatory integral did not converge within "
            f"{cfg.max_segments} segments (partial sum {value:.6g}, "
            f"tail bound {tail_est:.3g})",
            partial_sum=value, tail_bound=tail_est)
    return QuadResult(value, est, nsegs, False)


def _mp_oscillatory(f_mp, nu, x, kernel, small_x, lo, hi, max_scale, cfg):
    """Arbitrary-precision fallback for catastrophic alternating cancellation.

    Working precision is chosen from the observed cancellation (digits lost
    between the largest panel contribution and the result) and refined once
    the true magnitude of the result is known.
    """
    import mpmath as mp

    # The float64 truncation radius targets absolute tolerance; a result this
    # deep under the cancellation floor needs a wider window.
    scale_hint = max(1.0, (hi or 10.0) / 10.0)
    hi_mp = max(hi or 0.0, x + 5.0,
                truncation_radius(DecayClass.SUPEREXPONENTIAL, scale_hint, 1e-48)
                or 30.0)
    zero_bounds = [float(z) for z in
                   (bessel_j_zeros(nu, 512) / x) if lo < z < hi_mp]

    value_est = max(1e-300, 1e-17 * max_scale)
    value = 0.0
    est = float("inf")
    for _ in range(3):
        lost = max(0.0, math.log10(max_scale / value_est))
        dps = min(90, max(28, int(lost) + 20))
        with mp.workdps(dps):
            nu_m = mp.mpf(nu)
            x_m = mp.mpf(x)

            def integrand(y):
                t = x_m * y
                if t == 0:
                    ratio = 1 / (2 ** nu_m * mp.gamma(nu_m + 1))
                else:
                    ratio = mp.besselj(nu_m, t) / t ** nu_m
                if kernel == "modified":
                    w = ratio * y ** (2 * nu_m + 1)
                else:
                    w = ratio * t ** (nu_m + mp.mpf(1) / 2)
                return w * f_mp(y)

            pts = [mp.mpf(lo)] + [mp.mpf(z) for z in zero_bounds] + [mp.mpf(hi_mp)]
            val = mp.quad(integrand, pts, method="gauss-legendre")
            value = float(val)
            digits_left = dps - lost - 6.0
            est = abs(value) * 10.0 ** (-digits_left) + 1e-300
        if abs(value) > 2.0 * value_est:
            break  # precision estimate was already adequate
        if digits_left >= 10.0 and abs(value) > 0.0:
            new_est = abs(value)
            if new_est >= 0.5 * value_est:
                break
            value_est = new_est
        else:
            value_est = max(abs(value), 0.01 * value_est)
    return value, est


# ---------------------------------------------------------------------------
# endpoint-singular power-weight integrals


def integrate_singular_left(g, x: float, beta: float, cfg: QuadConfig = None, *,
                            g_small_x: float = 0.0) -> QuadResult:
    """int_0^x (x^2 - y^2)^(beta-1) g(y) dy.

    Substituting y = x*s turns this into a single Gauss-Jacobi integral
    with weight (1-s)^(beta-1) * s^g_small_x and a smooth remainder
    (1+s)^(beta-1) * g(xs) * s^(-g_small_x); beta >= 1 degenerates to a
    regular rule through the same path.
    """
    cfg = cfg or DEFAULT_CONFIG
    x = float(x)
    beta = float(beta)
    if not (x > 0.0):
        raise UnsupportedRangeError(f"upper limit must be > 0, got {x!r}")
    if beta <= 0.0:
        raise UnsupportedRangeError(f"kernel exponent requires beta > 0, got {beta!r}")

    pref = x ** (2.0 * beta - 1.0)

    def smooth(s):
        vals = _call_vec(g, x * s)
        out = (1.0 + s) ** (beta - 1.0) * vals
        if g_small_x != 0.0:
            out = out * np.exp(-g_small_x * np.log(s))
        return out

    n = max(24, 2 * cfg.points_per_segment)
    prev = None
    value = est = 0.0
    while True:
        s, w = power_weight_rule(n, beta - 1.0, g_small_x)
        value = pref * float(np.dot(w, smooth(s)))
        if prev is not None:
            est = abs(value - prev)
            if est <= max(cfg.abs_tol, cfg.rel_tol * abs(value)) or n >= 768:
                break
        prev = value
        n = 2 * n
    return QuadResult(value, est, 1, False)


def integrate_singular_right(g, x: float, beta: float, cfg: QuadConfig = None, *,
                             g_small_x: float = 0.0,
                             decay: DecayClass = DecayClass.SUPEREXPONENTIAL,
                             scale: float = 1.0, support=None) -> QuadResult:
    """int_x^inf (y^2 - x^2)^(beta-1) * y * g(y) dy for rapidly decaying g.

    With u = y^2 - x^2 this is (1/2) int_0^inf u^(beta-1) g(sqrt(u+x^2)) du:
    Gauss-Jacobi on the singular head, doubling panels with the tail-stop
    criterion beyond.  At x = 0 the integral is computed in the original
    variable against the weight y^(2*beta-1).
    """
    cfg = cfg or DEFAULT_CONFIG
    x = float(x)
    beta = float(beta)
    if x < 0.0:
        raise UnsupportedRangeError(f"lower limit must be >= 0, got {x!r}")
    if beta <= 0.0:
        raise UnsupportedRangeError(f"kernel exponent requires beta > 0, got {beta!r}")

    hi = None
    if support is not None:
        hi = float(support[1])
        if hi <= x:
            return QuadResult(0.0, 0.0, 0, False)
    radius = truncation_radius(decay, scale, cfg.tail_stop)
    if radius is not None:
        radius = max(radius, x + 2.0 * scale)
        hi = radius if hi is None else min(hi, radius)

    if x == 0.0:
        exponent = 2.0 * beta - 1.0 + g_small_x

        def head_smooth(y):
            out = _call_vec(g, y)
            if g_small_x != 0.0:
                out = out * np.exp(-g_small_x * np.log(y))
            return out

        def body(y):
            return np.exp((2.0 * beta - 1.0) * np.log(y)) * _call_vec(g, y)
    else:
        exponent = beta - 1.0

        def head_smooth(u):
            return 0.5 * _call_vec(g, np.sqrt(u + x * x))

        def body(u):
            return 0.5 * np.exp((beta - 1.0) * np.log(u)) * \
                _call_vec(g, np.sqrt(u + x * x))

    if exponent <= -1.0:
        raise DivergenceError(
            f"integrand ~ u^{exponent:g} at the lower endpoint is not integrable")

    u_hi = None if hi is None else (hi - x if x == 0.0 else hi * hi - x * x)
    u0 = 1.0 if u_hi is None else min(1.0, u_hi)
    n = max(24, 2 * cfg.points_per_segment)
    s, w = power_weight_rule(n, 0.0, exponent)
    s2, w2 = power_weight_rule(n + 16, 0.0, exponent)
    c = u0 ** (exponent + 1.0)
    v1 = c * float(np.dot(w, head_smooth(u0 * s)))
    v2 = c * float(np.dot(w2, head_smooth(u0 * s2)))
    acc = v2
    est = abs(v2 - v1)

    # doubling panels beyond the head
    a = u0
    nseg = 1
    while (u_hi is None or a < u_hi) and nseg < cfg.max_segments:
        b = 2.0 * a if u_hi is None else min(2.0 * a, u_hi)
        nodes, weights = _panel_nodes(np.array([a, b]), cfg.points_per_segment + 6)
        contrib = float(np.sum(body(nodes) * weights))
        acc += contrib
        nseg += 1
        if abs(contrib) <= cfg.tail_stop * max(abs(acc), cfg.abs_tol) and \
                (u_hi is None or b >= u_hi):
            a = b
            break
        if abs(contrib) <= cfg.tail_stop * max(abs(acc), cfg.abs_tol) and nseg > 4:
            break
        a = b
    return QuadResult(acc, est + cfg.abs_tol, nseg, False)


def _adaptive_gl(fn, a: float, b: float, n: int, tol: float,
                 depth: int = 11) -> float:
    """Bisection-adaptive Gauss-Legendre on [a, b]."""
    nodes, weights = _panel_nodes(np.array([a, b]), n)
    whole = float(np.sum(_call_vec(fn, nodes) * weights))
    stack = [(a, b, whole, depth)]
    total = 0.0
    while stack:
        a0, b0, est, d = stack.pop()
        m = 0.5 * (a0 + b0)
        nodes, weights = _panel_nodes(np.array([a0, m, b0]), n)
        vals = _call_vec(fn, nodes)
        left = float(np.sum(vals[0] * weights[0]))
        right = float(np.sum(vals[1] * weights[1]))
        if d <= 0 or abs(est - (left + right)) <= \
                max(tol, 1e-15 * (abs(left) + abs(right))):
            total += left + right
        else:
            stack.append((a0, m, left, d - 1))
            stack.append((m, b0, right, d - 1))
    return total


def integrate_power_weight(f, w_pow: float, cfg: QuadConfig = None, *,
                           small_x: float = 0.0,
                           decay: DecayClass = DecayClass.UNKNOWN,
                           scale: float = 1.0, support=None) -> float:
    """Signed integral int_0^inf f(y) y^w_pow dy for non-oscillatory f.

    Singular-aware head, geometric body panels, tail-stop truncation.  Used
    for moments and transform values at the origin.
    """
    cfg = cfg or DEFAULT_CONFIG
    lo, hi = 0.0, None
    if support is not None:
        lo = max(0.0, float(support[0]))
        hi = float(support[1])
    radius = truncation_radius(decay, scale, cfg.tail_stop)
    if radius is not None:
        hi = radius if hi is None else min(hi, radius)
    e0 = w_pow + small_x
    if e0 <= -1.0 and lo == 0.0:
        raise DivergenceError(
            f"integrand ~ y^{e0:g} is not integrable at 0 (weight {w_pow:g})")

    acc = 0.0
    if lo == 0.0:
        h = 0.5 * scale if hi is None else min(0.5 * scale, 0.5 * hi)
        s, w = power_weight_rule(48, 0.0, e0)
        smooth = _call_vec(f, h * s) * np.exp(-small_x * np.log(h * s))
        acc += h ** (e0 + 1.0) * float(np.dot(w, smooth))
        a = h
    else:
        a = lo

    n = cfg.points_per_segment + 6

    def body(y):
        return _call_vec(f, y) * np.exp(w_pow * np.log(y))

    nseg = 0
    while (hi is None or a < hi) and nseg < cfg.max_segments:
        b = 2.0 * a if hi is None else min(2.0 * a, hi)
        contrib = _adaptive_gl(body, a, b, n,
                               max(cfg.abs_tol, cfg.rel_tol * abs(acc)) * 0.25)
        acc += contrib
        nseg += 1
        a = b
        # Early stop only without an explicit upper limit; with one, doubling
        # reaches it in logarithmically many panels anyway.
        if hi is None and nseg > 3 and \
                abs(contrib) <= cfg.tail_stop * max(abs(acc), cfg.abs_tol):
            break
    return acc


# ---------------------------------------------------------------------------
# weighted norms


def _sup_norm(f, lo, hi, scale) -> float:
    """Three-stage grid refinement around the running maximizer."""
    grid = np.unique(np.concatenate([
        np.geomspace(max(lo, 1e-6 * scale), hi, 400),
        np.linspace(max(lo, 1e-6 * scale), hi, 400)]))
    best_x = grid[0]
    best = -np.inf
    for _ in range(3):
        vals = np.abs(_call_vec(f, grid))
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_x = float(vals[i]), float(grid[i])
        lo_i = grid[max(0, i - 1)]
        hi_i = grid[min(len(grid) - 1, i + 1)]
        grid = np.linspace(lo_i, hi_i, 200)
    return best


def weighted_norm(f, spec: WeightedNormSpec, cfg: QuadConfig = None, *,
                  small_x: float = 0.0, decay: DecayClass = DecayClass.UNKNOWN,
                  scale: float = 1.0, support=None,
                  breakpoints: Sequence[float] = (),
                  osc_scale: Optional[float] = None) -> float:
    """(int_0^inf |f|^p x^w dx)^(1/p) with w the composed weight power.

    For p = inf returns a grid-refined approximation of the essential sup
    (documented approximation, not a certified supremum).  Algebraic tails
    (decay POLYNOMIAL/UNKNOWN without a support bound) are completed with a
    geometric-ratio extrapolation over dyadic blocks; `osc_scale` hints the
    oscillation period of |f| so block panels resolve it.
    """
    cfg = cfg or DEFAULT_CONFIG
    p = spec.p
    lo = 0.0
    hi = None
    if support is not None:
        lo = max(0.0, float(support[0]))
        hi = float(support[1])

    if math.isinf(p):
        top = hi if hi is not None else \
            (truncation_radius(decay, scale, cfg.tail_stop) or 50.0 * scale)
        return _sup_norm(f, max(lo, 1e-8), top, scale)

    w_pow = spec.composed_weight
    e0 = w_pow + p * small_x
    if e0 <= -1.0 and lo == 0.0:
        raise DivergenceError(
            f"|f|^p weight ~ x^{e0:g} is not integrable at 0 "
            f"(composed weight {w_pow:g}, p={p:g}, small_x={small_x:g})")

    radius = truncation_radius(decay, scale, cfg.tail_stop ** (1.0 / p))
    if radius is not None:
        hi = radius if hi is None else min(hi, radius)

    def phi(y):
        return np.abs(_call_vec(f, y)) ** p * np.exp(w_pow * np.log(y))

    acc = 0.0
    # singular-aware head
    if lo == 0.0:
        h = min(0.5 * scale, 0.25 * hi if hi is not None else 0.5 * scale)
        s, w = power_weight_rule(48, 0.0, e0)

        def head_smooth(y):
            return np.abs(_call_vec(f, y) * np.exp(-small_x * np.log(y))) ** p

        acc += h ** (e0 + 1.0) * float(np.dot(w, head_smooth(h * s)))
        body_lo = h
    else:
        body_lo = lo

    # smooth body panels up to X0, splitting at breakpoints
    X0 = max(8.0 * scale, 2.0 * body_lo)
    if hi is not None:
        X0 = min(X0, hi)
    cuts = sorted(b for b in breakpoints if body_lo < b < X0)
    seam = [body_lo] + cuts + [X0]
    npan = cfg.points_per_segment + 6
    ad_tol = cfg.abs_tol

    def integrate_span(a, b):
        if osc_scale is not None:
            m = max(1, int(math.ceil((b - a) / (1.5 * osc_scale))))
            bounds = np.linspace(a, b, m + 1)
        else:
            m = max(2, int(math.ceil(math.log2(max(b / max(a, 1e-12), 2.0)))) + 2)
            bounds = np.geomspace(max(a, 1e-12), b, m + 1)
        return sum(_adaptive_gl(phi, aa, bb, npan,
                                max(ad_tol, 0.1 * cfg.rel_tol * acc) / m)
                   for aa, bb in zip(bounds[:-1], bounds[1:]))

    for a, b in zip(seam[:-1], seam[1:]):
        if b <= a:
            continue
        acc += integrate_span(a, b)

    if hi is not None and X0 >= hi:
        return acc ** (1.0 / p)

    # dyadic blocks with geometric-ratio tail completion
    a = X0
    blocks = []
    for _ in range(18):
        b = 2.0 * a if hi is None else min(2.0 * a, hi)
        blk = integrate_span(a, b)
        blocks.append(blk)
        acc += blk
        a = b
        if hi is not None and a >= hi:
            return acc ** (1.0 / p)
        if blk <= cfg.tail_stop * max(acc, cfg.abs_tol) and len(blocks) >= 2:
            return acc ** (1.0 / p)
        if len(blocks) >= 3:
            r1 = blocks[-1] / blocks[-2] if blocks[-2] != 0 else 0.0
            r2 = blocks[-2] / blocks[-3] if blocks[-3] != 0 else 0.0
            if 0.0 < r1 < 0.95 and abs(r1 - r2) < 0.05 * (1.0 - r1):
                tail = blocks[-1] * r1 / (1.0 - r1)
                drift = blocks[-1] * abs(r1 - r2) / (1.0 - r1) ** 2
                if drift <= max(cfg.abs_tol, 0.5 * cfg.rel_tol * acc) or \
                        tail <= cfg.abs_tol:
                    return (acc + tail) ** (1.0 / p)
    # budget exhausted: complete with the last observed ratio anyway
    if len(blocks) >= 2 and blocks[-2] != 0:
        r = blocks[-1] / blocks[-2]
        if 0.0 < r < 0.98:
            acc += blocks[-1] * r / (1.0 - r)
    return acc ** (1.0 / p)
