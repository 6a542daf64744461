"""Independent reference computations used by the tests.

None of these call into blockprop; they recompute the quantities from
scratch with brute force, arbitrary precision or a different algorithm.
"""
import bisect
import math
from fractions import Fraction

import mpmath


def coverage_sums(k, omega_bar, limit):
    """Exact cumulative coverage k, k + k(wk), ... up to the first value >= limit.

    ``omega_bar`` is read as a decimal string so 0.6 * 5 is exactly 3.
    """
    wk = Fraction(str(omega_bar)) * k
    sums, covered, term = [], Fraction(0), Fraction(k)
    while not sums or sums[-1] < limit:
        covered += term
        term *= wk
        sums.append(covered)
    return sums


def rounds_brute_force(n, k, omega_bar, sums=None):
    """Smallest m+1 with sum_{j=0..m} k (omega k)^j >= n."""
    sums = sums if sums is not None else coverage_sums(k, omega_bar, n)
    return bisect.bisect_left(sums, n) + 1


def aobi_mp(n=4000, m=100, k=3, c=1e13, b=100, tp=20, tmine=600, rv=1e6, psize=300,
            rc=200, w=1e4, omega=0.8, tau=1.0, dps=50):
    """Minimum average AoBI in 50-digit arithmetic."""
    with mpmath.workdps(dps):
        n, m, c, b, tp, tmine = map(mpmath.mpf, (n, m, c, b, tp, tmine))
        rv, psize, rc, w = map(mpmath.mpf, (rv, psize, rc, w))
        omega, tau = mpmath.mpf(str(omega)), mpmath.mpf(str(tau))
        rounds = rounds_brute_force(int(n), k, str(omega))
        mon = (tp + tmine) / 2
        val = rounds * rv * n * b ** 2 / (4 * c * tau * tp)
        com = rounds * psize * tau * tp * omega * n / (m * rc * w)
        return float(mon + val + com), rounds


def consensus_fixed_point(sigma, iters=10_000):
    """Iterate r <- 1 - exp(-sigma r) from r = 1; converges to the positive root for sigma > 1."""
    r = 1.0
    for _ in range(iters):
        r_new = 1.0 - math.exp(-sigma * r)
        if abs(r_new - r) < 1e-15:
            break
        r = r_new
    return r


def central_difference_jacobian(f, x, y, h=1e-6):
    fx_p, fx_m = f(x + h, y), f(x - h, y)
    fy_p, fy_m = f(x, y + h), f(x, y - h)
    return [[(fx_p[0] - fx_m[0]) / (2 * h), (fy_p[0] - fy_m[0]) / (2 * h)],
            [(fx_p[1] - fx_m[1]) / (2 * h), (fy_p[1] - fy_m[1]) / (2 * h)]]
