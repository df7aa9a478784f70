"""Arbitrary-precision oracles used to generate and check golden values.

Everything here is test-only: slow, mpmath-based, and deliberately
independent of the production code paths (the Bessel oracle is a direct
ascending series, not a library Bessel routine).
"""

import mpmath as mp

ORACLE_DPS = 50


def bessel_j_series(nu, x, dps=ORACLE_DPS):
    """J_nu(x) by the ascending series at `dps` digits.

    Working precision is raised with x to absorb the cancellation of the
    alternating series, so the result is good to ~`dps` digits.
    """
    x = mp.mpf(x)
    extra = int(0.9 * float(x)) + 20
    with mp.workdps(dps + extra):
        nu = mp.mpf(nu)
        q = -(x / 2) ** 2
        term = (x / 2) ** nu / mp.gamma(nu + 1)
        acc = term
        m = 0
        while True:
            m += 1
            term = term * q / (m * (nu + m))
            acc += term
            if abs(term) < abs(acc) * mp.mpf(10) ** (-(dps + 10)) and m > 4:
                break
            if m > 100000:  # pragma: no cover
                raise RuntimeError("series did not converge")
        return +acc


def bessel_j_mp(nu, x, dps=ORACLE_DPS):
    """mpmath's own Bessel J, used to cross-check the huge-argument rows."""
    with mp.workdps(dps):
        return mp.besselj(mp.mpf(nu), mp.mpf(x))


def quad_mp(f, points, dps=30):
    """Adaptive mpmath quadrature through the given points/intervals."""
    with mp.workdps(dps):
        return mp.quad(f, points)


def hankel_modified_mp(nu, f, x, upper=mp.inf, dps=30):
    """Modified Hankel transform of a (mpmath-callable) f, split at kernel zeros."""
    with mp.workdps(dps):
        nu_m = mp.mpf(nu)
        x_m = mp.mpf(x)

        def integrand(y):
            t = x_m * y
            if t == 0:
                ratio = 1 / (mp.mpf(2) ** nu_m * mp.gamma(nu_m + 1))
            else:
                ratio = mp.besselj(nu_m, t) / t ** nu_m
            return ratio * f(y) * y ** (2 * nu_m + 1)

        # Integration nodes at the first few scaled Bessel zeros keeps the
        # adaptive rule honest about the oscillation.
        pts = [mp.mpf(0)]
        k = 1
        while True:
            z = mp.besseljzero(nu_m, k) / x_m
            if z > upper or k > 40:
                break
            pts.append(z)
            k += 1
        pts.append(upper)
        return mp.quad(integrand, pts)
