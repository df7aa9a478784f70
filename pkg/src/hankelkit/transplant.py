"""The transplantation operator T = H_mu o H_nu computed by three
independent routes, the Sonine-type kernel constants, and the weighted
L^p -> L^q inequality harness.

Routes:
  composition         H_mu applied to a materialized H_nu f (any orders);
  riemann_liouville   nu < mu: c x^(-2mu) int_0^x (x^2-y^2)^(mu-nu-1)
                      L_nu^(mu-nu) f(y) y^(2nu+1) dy;
  weyl                mu < nu: c int_x^inf (y^2-x^2)^(nu-mu-1) y f(y) dy.

The kernel constants are fixed as c = 1/(2^(d-1) Gamma(d)) with d the
order gap, and gated by two-sided numerical verification of the underlying
Bessel projection identities plus an exact Gaussian closed loop.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidCaseError, UnsupportedFunctionError, UnsupportedRangeError
from .quadrature import (DEFAULT_CONFIG, DecayClass, Measure, QuadConfig,
                         WeightedNormSpec, _panel_nodes,
                         alternating_series_limit, integrate_singular_left,
                         integrate_singular_right, power_weight_rule,
                         weighted_norm)
from .report import VerificationReport
from .special import as_order, bessel_j_zeros, gamma, jv_over_tnu
from .transforms import (BankFunction, SampledFunction, dilate, hankel_grid,
                         materialize_fractional_L, materialize_transform)

ROUTES = ("composition", "riemann_liouville", "weyl")


@dataclass(frozen=True)
class TransplantPlan:
    nu: float
    mu: float
    route: str = "composition"
    cfg: QuadConfig = DEFAULT_CONFIG

    def __post_init__(self):
        nu = float(as_order(self.nu).nu)
        mu = float(as_order(self.mu).nu)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "mu", mu)
        if self.route not in ROUTES:
            raise InvalidCaseError(f"unknown route {self.route!r}")
        if self.route == "riemann_liouville" and not (mu > nu):
            raise InvalidCaseError(
                f"riemann_liouville route needs mu > nu, got nu={nu}, mu={mu}")
        if self.route == "weyl" and not (nu > mu):
            raise InvalidCaseError(
                f"weyl route needs nu > mu, got nu={nu}, mu={mu}")


# ---------------------------------------------------------------------------
# Sonine constants


def sonine_constant_forward(nu, mu) -> float:
    """c with J_mu(a)/a^mu = c a^(-2mu) int_0^a (a^2-t^2)^(mu-nu-1)
    J_nu(t) t^(nu+1) dt, for mu > nu."""
    nu, mu = as_order(nu).nu, as_order(mu).nu
    if not (mu > nu):
        raise InvalidCaseError(f"forward constant needs mu > nu, got {nu}, {mu}")
    return 1.0 / (2.0 ** (mu - nu - 1.0) * gamma(mu - nu))


def sonine_constant_backward(nu, mu) -> float:
    """c with J_mu(a)/a^mu = c int_a^inf t^(1-nu) (t^2-a^2)^(nu-mu-1)
    J_nu(t) dt, for mu < nu."""
    nu, mu = as_order(nu).nu, as_order(mu).nu
    if not (nu > mu):
        raise InvalidCaseError(f"backward constant needs nu > mu, got {nu}, {mu}")
    return 1.0 / (2.0 ** (nu - mu - 1.0) * gamma(nu - mu))


def sonine_forward_residual(nu, mu, a: float, cfg: QuadConfig = None) -> float:
    """Two-sided residual of the forward projection identity at abscissa a."""
    cfg = cfg or DEFAULT_CONFIG
    nu, mu = as_order(nu).nu, as_order(mu).nu
    c = sonine_constant_forward(nu, mu)
    lhs = float(jv_over_tnu(mu, np.asarray(a)))

    def g(t):
        return jv_over_tnu(nu, t) * np.exp((2.0 * nu + 1.0) * np.log(t))

    res = integrate_singular_left(g, a, mu - nu, cfg, g_small_x=2.0 * nu + 1.0)
    rhs = c * a ** (-2.0 * mu) * res.value
    return abs(lhs - rhs)


def _bessel_algebraic_tail(nu: float, a: float, beta: float,
                           cfg: QuadConfig) -> float:
    """int_a^inf (t^2-a^2)^(beta-1) t^(1-nu) J_nu(t) dt.

    The tail decays only algebraically while oscillating, so after a
    Gauss-Jacobi head absorbing the (t-a) singularity the zero-segmented
    partial sums are extrapolated by iterated averaging.
    """
    zeros = bessel_j_zeros(nu, 512)
    k0 = int(np.searchsorted(zeros, a * (1.0 + 1e-12), side="right"))
    while k0 >= len(zeros) - 2:
        zeros = bessel_j_zeros(nu, 2 * len(zeros))
        k0 = int(np.searchsorted(zeros, a * (1.0 + 1e-12), side="right"))
    z0 = zeros[k0]

    # head [a, z0] via u = t^2 - a^2: (1/2) int u^(beta-1) J_nu(t)/t^nu du
    u0 = z0 * z0 - a * a
    s, w = power_weight_rule(64, 0.0, beta - 1.0)
    head = 0.5 * u0 ** beta * float(
        np.dot(w, jv_over_tnu(nu, np.sqrt(u0 * s + a * a))))

    def integrand(t):
        return np.exp((beta - 1.0) * np.log(t * t - a * a)
                      + (1.0 - nu) * np.log(t)) * \
            jv_over_tnu(nu, t) * np.exp(nu * np.log(t))

    partials = []
    acc = head
    prev_limit = None
    k = k0
    for _ in range(40):
        hi_k = min(k + 16, len(zeros) - 1)
        if hi_k <= k:
            zeros = bessel_j_zeros(nu, 2 * len(zeros))
            continue
        nodes, weights = _panel_nodes(zeros[k:hi_k + 1], 16)
        contribs = np.sum(integrand(nodes) * weights, axis=1)
        for c in contribs:
            acc += float(c)
            partials.append(acc)
        k = hi_k
        if len(partials) >= 24:
            limit, est = alternating_series_limit(partials)
            if prev_limit is not None and \
                    abs(limit - prev_limit) < max(cfg.abs_tol,
                                                  0.1 * cfg.rel_tol * abs(limit)):
                return limit
            prev_limit = limit
    limit, _ = alternating_series_limit(partials)
    return limit


def sonine_backward_residual(nu, mu, a: float, cfg: QuadConfig = None) -> float:
    """Two-sided residual of the backward projection identity at abscissa a.

    Verified only in the absolutely convergent window mu < nu < 2mu + 1/2;
    outside it the identity holds by analytic continuation and is stressed
    through route equivalence instead.
    """
    cfg = cfg or DEFAULT_CONFIG
    nu, mu = as_order(nu).nu, as_order(mu).nu
    if not (mu < nu < 2.0 * mu + 0.5):
        raise InvalidCaseError(
            f"backward verification needs mu < nu < 2mu+1/2 for absolute "
            f"convergence, got nu={nu}, mu={mu}")
    c = sonine_constant_backward(nu, mu)
    lhs = float(jv_over_tnu(mu, np.asarray(a)))
    rhs = c * _bessel_algebraic_tail(nu, a, nu - mu, cfg)
    return abs(lhs - rhs)


def gaussian_backward_loop_residual(nu, mu, x: float,
                                    cfg: QuadConfig = None) -> float:
    """|c int_x^inf (y^2-x^2)^(nu-mu-1) y e^(-y^2/2) dy - e^(-x^2/2)|.

    Exact analytic consequence of the backward constant (substitute
    u = y^2 - x^2), so it validates c to quadrature precision.
    """
    cfg = cfg or DEFAULT_CONFIG
    nu, mu = as_order(nu).nu, as_order(mu).nu
    c = sonine_constant_backward(nu, mu)
    res = integrate_singular_right(lambda y: np.exp(-y * y / 2.0), x,
                                   nu - mu, cfg,
                                   decay=DecayClass.SUPEREXPONENTIAL)
    return abs(c * res.value - math.exp(-x * x / 2.0))


# ---------------------------------------------------------------------------
# applying the operator

_L_CACHE: dict = {}
_L_LOCK = threading.Lock()


def _symbolic_L_power(g: BankFunction, nu: float, m: int) -> BankFunction:
    """L_nu^m g computed exactly from the carried sympy expression."""
    import sympy as sp
    yv = sorted(g.expr.free_symbols, key=str)[0]
    e = g.expr
    for _ in range(m):
        e = -(sp.diff(e, yv, 2) + (2.0 * nu + 1.0) / yv * sp.diff(e, yv))
    fn = sp.lambdify(yv, e, "numpy")
    if g.support is not None:
        a, b = g.support

        def masked(t, _fn=fn, _a=a, _b=b):
            t = np.asarray(t, dtype=float)
            out = np.zeros_like(t)
            inside = (t > _a) & (t < _b)
            if inside.any():
                with np.errstate(all="ignore"):
                    v = np.asarray(_fn(t[inside]), dtype=float)
                out[inside] = np.nan_to_num(v, nan=0.0, posinf=0.0, neginf=0.0)
            return out

        eval_fn = masked
    else:
        eval_fn = fn
    return BankFunction(id=f"L{m}[{g.id}]_nu{nu:g}", eval=eval_fn,
                        decay=g.decay, small_x=0.0, support=g.support,
                        scale=g.scale, expr=e)


def _L_fractional_power(g, nu: float, delta: float, cfg: QuadConfig,
                        x_max: float):
    """L_nu^delta g as an evaluable object; exact when delta is a positive
    integer and g carries a closed form, spectral otherwise."""
    key = (id(g), nu, round(delta, 12), x_max, cfg.points_per_segment)
    with _L_LOCK:
        hit = _L_CACHE.get(key)
        if hit is not None:
            return hit[1]
    near_int = round(delta)
    if abs(delta - near_int) < 1e-12 and near_int >= 1 and \
            isinstance(g, BankFunction) and g.expr is not None:
        out = _symbolic_L_power(g, nu, int(near_int))
    else:
        out = materialize_fractional_L(nu, delta, g, cfg, x_max=x_max)
    with _L_LOCK:
        if len(_L_CACHE) > 128:
            _L_CACHE.clear()
        _L_CACHE[key] = (g, out)
    return out


def transplant_apply(plan: TransplantPlan, g, x: float,
                     cfg: QuadConfig = None) -> float:
    """T g(x) = (H_mu o H_nu) g(x) along the planned route."""
    return float(transplant_grid(plan, g, np.array([float(x)]), cfg)[0])


def transplant_grid(plan: TransplantPlan, g, xs,
                    cfg: QuadConfig = None) -> np.ndarray:
    cfg = cfg or plan.cfg
    nu, mu = plan.nu, plan.mu
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if plan.route == "composition":
        inner = materialize_transform(nu, g, cfg, kind="modified")
        return hankel_grid(mu, inner, xs, cfg, kind="modified")
    if plan.route == "riemann_liouville":
        delta = mu - nu
        c = sonine_constant_forward(nu, mu)
        lg = _L_fractional_power(g, nu, delta, cfg,
                                 x_max=float(np.max(xs)) * 1.05 + 1.0)

        def weighted(y, _lg=lg):
            return np.asarray(_lg(y), dtype=float) * \
                np.exp((2.0 * nu + 1.0) * np.log(y))

        out = np.empty_like(xs)
        for i, x in enumerate(xs):
            res = integrate_singular_left(weighted, x, delta, cfg,
                                          g_small_x=2.0 * nu + 1.0)
            out[i] = c * x ** (-2.0 * mu) * res.value
        return out
    # weyl
    delta = nu - mu
    c = sonine_constant_backward(nu, mu)
    small_x, support, decay, scale = 0.0, None, DecayClass.UNKNOWN, 1.0
    if isinstance(g, BankFunction):
        small_x, support, decay, scale = g.small_x, g.support, g.decay, g.scale
    out = np.empty_like(xs)
    for i, x in enumerate(xs):
        res = integrate_singular_right(g, x, delta, cfg, g_small_x=small_x,
                                       decay=decay, scale=scale,
                                       support=support)
        out[i] = c * res.value
    return out


def transplant_sampled(plan: TransplantPlan, g,
                       cfg: QuadConfig = None) -> SampledFunction:
    """T g materialized on its own grid, for norm evaluation.

    The kernel routes are used for sampling (they are cheap per point);
    the composition route is exercised separately by the route-equivalence
    checks.
    """
    cfg = cfg or plan.cfg
    small_x, support, decay, scale = 0.0, None, DecayClass.UNKNOWN, 1.0
    if isinstance(g, BankFunction):
        support, decay, scale = g.support, g.decay, g.scale
    if support is not None:
        hi = support[1]
    else:
        from .quadrature import truncation_radius
        hi = truncation_radius(decay, scale, cfg.tail_stop) or 40.0
    if plan.route == "composition":
        plan = TransplantPlan(plan.nu, plan.mu,
                              "riemann_liouville" if plan.mu > plan.nu
                              else "weyl", cfg)
    if plan.route == "weyl":
        # vanishes beyond the support of g
        grid = np.linspace(0.0, hi, max(200, int(24 * hi)))
        grid = np.maximum(grid, 1e-9)
        grid[0] = 1e-9
        vals = transplant_grid(plan, g, grid, cfg)
        return SampledFunction(grid=grid, values=vals,
                               interpolation="quintic",
                               extrapolation=DecayClass.COMPACT)
    # riemann_liouville: algebraic tail; sample to a generous multiple
    top = 3.0 * hi + 10.0
    grid = np.linspace(0.0, top, max(260, int(16 * top)))
    grid = np.maximum(grid, 1e-9)
    grid[0] = 1e-9
    vals = transplant_grid(plan, g, grid, cfg)
    return SampledFunction(grid=grid, values=vals, interpolation="quintic",
                           extrapolation=DecayClass.POLYNOMIAL)


# ---------------------------------------------------------------------------
# the weighted inequality harness


@dataclass(frozen=True)
class InequalityCase:
    """A validated parameter tuple for one of the two transplantation
    inequalities; construction rejects tuples violating the hypotheses."""

    nu: float
    mu: float
    p: float
    q: float
    theorem: str  # "3.1" (nu < mu) or "3.2" (mu < nu)

    @staticmethod
    def forward(nu, mu, p, q) -> "InequalityCase":
        nu, mu = as_order(nu).nu, as_order(mu).nu
        p, q = float(p), float(q)
        if not (nu < mu):
            raise InvalidCaseError(f"forward case needs nu < mu, got {nu}, {mu}")
        if not (1.0 < p < q < math.inf):
            raise InvalidCaseError(
                f"forward case needs 1 < p < q < inf, got p={p}, q={q}")
        if not (p * (mu + 1.0) >= 1.0):
            raise InvalidCaseError(
                f"forward case needs p(mu+1) >= 1, got {p * (mu + 1.0)}")
        if abs((mu + 1.0) / q - (nu + 1.0) / p) > 1e-12:
            raise InvalidCaseError(
                f"homogeneity (mu+1)/q = (nu+1)/p violated: "
                f"{(mu + 1.0) / q} != {(nu + 1.0) / p}")
        return InequalityCase(nu, mu, p, q, "3.1")

    @staticmethod
    def forward_q(nu, mu, p) -> "InequalityCase":
        """Derive the admissible q from the homogeneity relation."""
        nu, mu = as_order(nu).nu, as_order(mu).nu
        return InequalityCase.forward(nu, mu, p,
                                      float(p) * (mu + 1.0) / (nu + 1.0))

    @staticmethod
    def backward(nu, mu, p, q) -> "InequalityCase":
        nu, mu = as_order(nu).nu, as_order(mu).nu
        p, q = float(p), float(q)
        if not (mu < nu):
            raise InvalidCaseError(f"backward case needs mu < nu, got {nu}, {mu}")
        if not (1.0 <= p <= q < math.inf):
            raise InvalidCaseError(
                f"backward case needs 1 <= p <= q < inf, got p={p}, q={q}")
        if not (p * mu + 1.0 >= 0.0):
            raise InvalidCaseError(
                f"backward case needs p*mu + 1 >= 0, got {p * mu + 1.0}")
        if abs(nu + (mu + 1.0) / q - mu - (nu + 1.0) / p) > 1e-12:
            raise InvalidCaseError(
                "homogeneity nu + (mu+1)/q = mu + (nu+1)/p violated")
        return InequalityCase(nu, mu, p, q, "3.2")

    @staticmethod
    def backward_q(nu, mu, p) -> "InequalityCase":
        nu, mu = as_order(nu).nu, as_order(mu).nu
        q = (mu + 1.0) / (mu - nu + (nu + 1.0) / float(p))
        return InequalityCase.backward(nu, mu, p, q)


def _lhs_norm(case: InequalityCase, tg: SampledFunction, q_cfg) -> float:
    spec = WeightedNormSpec(p=case.q, weight_power=0.0, measure=Measure.DM_NU,
                            nu=case.mu)
    return weighted_norm(tg, spec, q_cfg, small_x=0.0,
                         decay=tg.extrapolation, scale=max(1.0, tg.grid[-1] / 10.0),
                         support=(0.0, tg.grid[-1]))


def _case_ratio_forward(case: InequalityCase, g, cfg: QuadConfig) -> float:
    plan = TransplantPlan(case.nu, case.mu, "riemann_liouville", cfg)
    tg = transplant_sampled(plan, g, cfg)
    lhs = _lhs_norm(case, tg, cfg)
    delta = case.mu - case.nu
    lg = _L_fractional_power(g, case.nu, delta, cfg, x_max=90.0)
    spec = WeightedNormSpec(p=case.p, weight_power=0.0, measure=Measure.DM_NU,
                            nu=case.nu)
    if isinstance(lg, BankFunction):
        rhs = weighted_norm(lg, spec, cfg, small_x=0.0, decay=lg.decay,
                            scale=lg.scale, support=lg.support)
    else:
        rhs = weighted_norm(lg, spec, cfg, small_x=0.0,
                            decay=DecayClass.POLYNOMIAL,
                            support=(0.0, lg.grid[-1]))
    return lhs / rhs


def _case_ratio_backward(case: InequalityCase, g, cfg: QuadConfig) -> float:
    plan = TransplantPlan(case.nu, case.mu, "weyl", cfg)
    tg = transplant_sampled(plan, g, cfg)
    lhs = _lhs_norm(case, tg, cfg)
    spec = WeightedNormSpec(p=case.p, weight_power=0.0, measure=Measure.DM_NU,
                            nu=case.nu)
    rhs = weighted_norm(g, spec, cfg, small_x=g.small_x, decay=g.decay,
                        scale=g.scale, support=g.support)
    return lhs / rhs


def _admissible_for_transplant(g) -> bool:
    return isinstance(g, BankFunction) and (
        g.support is not None or g.decay is DecayClass.SUPEREXPONENTIAL)


def _check_inequality(case: InequalityCase, bank, cfg, ratio_fn,
                      probe_rs=(0.25, 4.0)) -> VerificationReport:
    cfg = cfg or DEFAULT_CONFIG
    usable = [g for g in bank if _admissible_for_transplant(g)]
    if not usable:
        raise UnsupportedFunctionError(
            "inequality check needs compactly supported or Gaussian-class "
            "bank functions")
    ratios = {}
    for g in usable:
        ratios[g.id] = ratio_fn(case, g, cfg)
    observed = max(ratios.values())

    # refinement + dilate-enrichment drift
    cfg2 = cfg.with_doubled_points()
    enriched = list(usable) + [dilate(g, 2.0) for g in usable[:2]]
    ratios2 = {g.id: ratio_fn(case, g, cfg2) for g in enriched}
    observed2 = max(ratios2.values())
    drift = abs(observed2 - observed) / observed

    # dilation covariance: the ratio is exactly invariant when the
    # homogeneity relation holds
    g0 = usable[0]
    base = ratios[g0.id]
    dil_dev = 0.0
    for r in probe_rs:
        rr = ratio_fn(case, dilate(g0, r), cfg)
        dil_dev = max(dil_dev, abs(rr / base - 1.0))

    passed = math.isfinite(observed) and drift < 0.05 and dil_dev <= 1e-3
    notes = ["operator-norm estimates are lower bounds over a finite bank"]
    if case.p == 1.0:
        notes.append("p=1 case: bank-based constant estimate is low-confidence")
    return VerificationReport(
        name=f"transplant_{case.theorem}_nu{case.nu:g}_mu{case.mu:g}"
             f"_p{case.p:g}_q{case.q:g}",
        passed=bool(passed),
        tolerance=0.05,
        observed=float(observed),
        refinement_drift=float(drift),
        inputs={"nu": case.nu, "mu": case.mu, "p": case.p, "q": case.q,
                "lhs_weight": 2.0 * case.mu + 1.0,
                "rhs_weight": 2.0 * case.nu + 1.0},
        details={"per_function_ratios": ratios,
                 "dilation_probe_deviation": dil_dev,
                 "enriched_observed": observed2},
        notes=notes,
    )


def check_inequality_31(case: InequalityCase, bank,
                        cfg: QuadConfig = None) -> VerificationReport:
    """Observed constant in the forward weighted inequality
    ||T g||_{L^q(dm_mu)} <= C ||L_nu^(mu-nu) g||_{L^p(dm_nu)}."""
    if case.theorem != "3.1":
        raise InvalidCaseError("case was not constructed for the forward theorem")
    return _check_inequality(case, bank, cfg, _case_ratio_forward)


def check_inequality_32(case: InequalityCase, bank,
                        cfg: QuadConfig = None) -> VerificationReport:
    """Observed constant in the backward weighted inequality
    ||T g||_{L^q(dm_mu)} <= C ||g||_{L^p(dm_nu)}."""
    if case.theorem != "3.2":
        raise InvalidCaseError("case was not constructed for the backward theorem")
    return _check_inequality(case, bank, cfg, _case_ratio_backward)
