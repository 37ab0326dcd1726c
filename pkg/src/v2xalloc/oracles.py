"""Independent reference implementations used to cross-check the fast solvers.

Everything here trades speed for transparency: high-precision series, exact
rational arithmetic, exhaustive grids and permutation search.  The production
solvers must agree with these within the documented tolerances; nothing in
this module shares optimization logic with them.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import mpmath as mp
import numpy as np


# ---------------------------------------------------------------------------
# special functions / combinatorics
# ---------------------------------------------------------------------------

def j0_series_reference(x: float, dps: int = 60) -> float:
    """J0 via its power series in high-precision arithmetic.

    sum_k (-1)^k (x/2)^(2k) / (k!)^2 converges for every finite x; evaluated
    with ``dps`` decimal digits so cancellation at large |x| is harmless.
    """
    with mp.workdps(dps):
        xm = mp.mpf(x)
        total = mp.mpf(0)
        term = mp.mpf(1)
        k = 0
        while abs(term) > mp.mpf(10) ** (-dps + 10) or k < 8:
            total += term
            k += 1
            term *= -((xm / 2) ** 2) / (k * k)
            if k > 10000:
                break
        return float(total)


def binomial_cdf_exact(m: int, n: int, p: Fraction) -> Fraction:
    """Exact Pr{Binomial(n, p) <= m} with rational arithmetic."""
    if m < 0:
        return Fraction(0)
    p = Fraction(p)
    q = 1 - p
    return sum(
        (Fraction(math.comb(n, t)) * p**t * q ** (n - t) for t in range(0, min(m, n) + 1)),
        Fraction(0),
    )


def calibration_index_exact(n: int, beta: Fraction, varsigma: Fraction) -> int:
    """Smallest k with Pr{Bin(n, 1-beta) <= k-1} >= 1-varsigma, exactly."""
    target = 1 - Fraction(varsigma)
    p = 1 - Fraction(beta)
    q = Fraction(beta)
    running = Fraction(0)
    for k in range(1, n + 1):
        running += Fraction(math.comb(n, k - 1)) * p ** (k - 1) * q ** (n - k + 1)
        if running >= target:
            return k
    raise ValueError("no index k <= n satisfies the confidence bound")


# ---------------------------------------------------------------------------
# grid searches over the power box
# ---------------------------------------------------------------------------

def _grid_best(
    feasible_capacity,  # (pc_grid, pd_grid) -> masked capacity array
    pc_lo: float, pc_hi: float, pd_lo: float, pd_hi: float,
    n: int,
) -> tuple[float, float, float] | None:
    pc = np.linspace(pc_lo, pc_hi, n)
    pd = np.linspace(pd_lo, pd_hi, n)
    cap = feasible_capacity(pc[:, None], pd[None, :])
    if not np.any(np.isfinite(cap)):
        return None
    idx = np.unravel_index(np.nanargmax(cap), cap.shape)
    if not np.isfinite(cap[idx]):
        return None
    return float(pc[idx[0]]), float(pd[idx[1]]), float(cap[idx])


def grid_search_power(
    feasible_capacity,
    p_max_c: float,
    p_max_d: float,
    n: int = 400,
    stages: int = 3,
) -> tuple[float, float, float] | None:
    """Exhaustive grid maximization over the power box with local refinement.

    ``feasible_capacity(pc, pd)`` must return the objective with -inf/nan at
    infeasible points.  Each refinement stage re-grids a two-cell neighborhood
    of the current best point (wide enough to recapture an optimum sitting in
    a thin feasible wedge), which sharpens the estimate without assuming
    anything about the solvers under test.
    """
    box = (0.0, p_max_c, 0.0, p_max_d)
    best = _grid_best(feasible_capacity, *box, n)
    if best is None:
        return None
    for _ in range(stages - 1):
        pc, pd, _ = best
        dc = 2.0 * (box[1] - box[0]) / (n - 1)
        dd = 2.0 * (box[3] - box[2]) / (n - 1)
        box = (
            max(0.0, pc - dc), min(p_max_c, pc + dc),
            max(0.0, pd - dd), min(p_max_d, pd + dd),
        )
        refined = _grid_best(feasible_capacity, *box, n)
        if refined is not None and refined[2] >= best[2]:
            best = refined
    return best


def bernstein_grid_oracle(params, n: int = 400, stages: int = 3):
    """Grid oracle for the robust per-pair power problem.

    Constraints are evaluated directly from their defining inequalities (CUE
    QoS line and the robust margin); the search itself is pure enumeration.
    """
    from .bernstein import bernstein_margin  # the margin *defines* the constraint

    s2 = params.sigma2
    bw = params.bandwidth_hz

    def feasible_capacity(pc, pd):
        qos_c = pc * params.g_c / params.gamma_min_c - pd * params.g_b - s2
        margin = bernstein_margin(pc, pd, params)
        cap = bw * np.log2(1.0 + pc * params.g_c / (s2 + pd * params.g_b))
        bad = (qos_c < 0) | (margin < 0)
        return np.where(bad, -np.inf, cap)

    return grid_search_power(feasible_capacity, params.p_max_c, params.p_max_d, n, stages)


def corner_grid_oracle(
    g_d: float, g_x: float, g_c: float, g_b: float,
    gamma_min_c: float, gamma_min_d: float, sigma2: float,
    p_max_c: float, p_max_d: float, bandwidth_hz: float,
    n: int = 400, stages: int = 3,
):
    """Grid oracle for the deterministic (known-gain) per-pair power problem."""

    def feasible_capacity(pc, pd):
        qos_c = pc * g_c / gamma_min_c - pd * g_b - sigma2
        qos_d = pd * g_d / gamma_min_d - pc * g_x - sigma2
        cap = bandwidth_hz * np.log2(1.0 + pc * g_c / (sigma2 + pd * g_b))
        return np.where((qos_c < 0) | (qos_d < 0), -np.inf, cap)

    return grid_search_power(feasible_capacity, p_max_c, p_max_d, n, stages)


def inner_pc_grid_oracle(params, p_d: float, step_fraction: float = 1e-6, span: float = 4.0):
    """1-D scan for the largest feasible CUE power at a fixed VUE power.

    The inner problem has no CUE power cap, so the scan covers ``span`` times
    the cap; solutions beyond that are reported as the scan ceiling.
    """
    from .bernstein import bernstein_margin

    s2 = params.sigma2
    hi = max(params.p_max_c * span, 1e-6)
    pc = np.arange(0.0, hi, step_fraction * params.p_max_c)
    ok = (
        (bernstein_margin(pc, p_d, params) >= 0)
        & (pc * params.g_c / params.gamma_min_c - p_d * params.g_b - s2 >= 0)
    )
    if not np.any(ok):
        return None
    return float(pc[np.nonzero(ok)[0][-1]])


def selflearn_z_grid_oracle(
    anchor_c: float, anchor_d: float, r_d: float,
    g_c: float, g_b: float, gamma_c: float, sigma2: float,
    p_max_c: float, p_max_d: float, bandwidth_hz: float,
    n: int = 200_001,
):
    """Grid oracle for the affine-set power problem via its scale variable.

    Along the anchor ray the dual scale z fixes p_d = z*anchor_d and allows
    p_c up to min(z*anchor_c, p_max_c); every other feasible point is weakly
    dominated (capacity rises with p_c, falls with p_d).  Feasibility of each
    grid point is checked directly from the primal constraints.
    """
    if r_d <= 0 or anchor_c <= 0 or anchor_d <= 0:
        return None
    z_lo = sigma2 / r_d
    z_hi = p_max_d / anchor_d
    if z_lo > z_hi:
        return None
    z = np.linspace(z_lo, z_hi, n)
    pd = z * anchor_d
    pc = np.minimum(z * anchor_c, p_max_c)
    ok = pc * g_c / gamma_c - pd * g_b - sigma2 >= 0
    if not np.any(ok):
        return None
    cap = np.where(ok, bandwidth_hz * np.log2(1.0 + pc * g_c / (sigma2 + pd * g_b)), -np.inf)
    i = int(np.argmax(cap))
    return float(z[i]), float(pc[i]), float(pd[i]), float(cap[i])


# ---------------------------------------------------------------------------
# assignment
# ---------------------------------------------------------------------------

def assignment_bruteforce(weights: np.ndarray) -> tuple[float, tuple[int, ...]]:
    """Maximum-weight square assignment by permutation enumeration (J <= ~8)."""
    w = np.asarray(weights, dtype=float)
    jj, ss = w.shape
    if jj != ss:
        raise ValueError("brute force expects a square matrix")
    best_total = -np.inf
    best_perm: tuple[int, ...] = tuple(range(ss))
    for perm in itertools.permutations(range(ss)):
        total = float(w[np.arange(jj), perm].sum())
        if total > best_total:
            best_total = total
            best_perm = perm
    return best_total, best_perm
