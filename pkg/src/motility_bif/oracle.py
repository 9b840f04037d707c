"""Brute-force K2: finite-difference solve of the third-order cos(t) problem.

The third-order stress profile s31 and K2 are unknowns of one linear
system.  The problem carries two boundary conditions at R0 (Dirichlet value
from the shape correction and the kinematic condition), which is one more than
the ODE needs; the extra condition determines K2.  No test function is used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg
from scipy.integrate import cumulative_trapezoid

from .errors import DomainError, EvaluationError, TransversalityError
from .expansion import SecondOrderProfiles, ThirdOrderSource
from .linearization import BifurcationPoint, FirstOrderProfiles
from .model import PhysParams, SteadyState


@dataclass(frozen=True)
class OracleResult:
    k2: float
    k2_coarse: float
    change: float
    n_grid: int
    system: str

    def __float__(self):
        return float(self.k2)

    @property
    def richardson(self):
        return self.k2 + (self.k2 - self.k2_coarse) / 3.0


def _shape_data(fo, so, bp, ss, dtuple):
    d0, d1 = dtuple[0], dtuple[1]
    phys = so.physical(d0, d1)
    rho20, rho22 = phys["rho20"], phys["rho22"]
    rb = rho20 + 0.5 * rho22
    R0 = ss.r0
    mu3 = -rb * fo.m11_pp_r0 + rho22 / R0**2 * float(fo.m11(R0))
    return rho22, rb, mu3


def _solve(A_rows, rhs, size):
    rows, cols, vals = A_rows
    mat = sparse.csc_matrix((vals, (rows, cols)), shape=(size, size))
    try:
        lu = sparse_linalg.splu(mat)
    except RuntimeError as exc:
        raise TransversalityError(f"augmented system is singular ({exc})") from exc
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise TransversalityError("augmented system is singular")
    return x


def _reduced(n, fo, so, ts, bp, params, ss, dtuple, profiles=False):
    """Unknowns s31 on the grid plus K2; m31 eliminated by integrating its equation."""
    P, Z = params.P, params.Z
    R0, m0 = ss.r0, ss.m0
    d0 = dtuple[0]
    k0 = bp.k0
    k2w = (bp.alpha / R0) ** 2
    r = np.linspace(0.0, R0, n + 1)
    h = r[1]
    rho22, rb, mu3 = _shape_data(fo, so, bp, ss, dtuple)
    s11 = fo.sigma11.on(r)
    s11pp = fo.sigma11_pp_r0
    f = ts.f_direct.on(r)
    # W(r) = [r int_r^R0 f + (1/r) int_0^r s^2 f]/2 + C r, trapezoid cumulative sums
    outer = cumulative_trapezoid(f, r, initial=0.0)
    inner = cumulative_trapezoid(r * r * f, r, initial=0.0)
    slope = d0 * mu3 + m0 * rho22 / R0 + k0 * m0 * rb * s11pp
    c = slope + inner[-1] / (2 * R0**2)
    W = np.zeros_like(r)
    W[1:] = 0.5 * (r[1:] * (outer[-1] - outer[1:]) + inner[1:] / r[1:]) + c * r[1:]

    size = n + 2
    kcol = n + 1
    rows, cols, vals = [], [], []
    rhs = np.zeros(size)

    def put(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    scale = Z / h**2
    put(0, 0, scale)  # s31(0) = 0
    ri = r[1:n]
    idx = np.arange(1, n)
    for i, rr in zip(idx, ri):
        put(i, i - 1, Z * (1 / h**2 - 1 / (2 * h * rr)))
        put(i, i, Z * (-2 / h**2 - 1 / rr**2) + Z * k2w)
        put(i, i + 1, Z * (1 / h**2 + 1 / (2 * h * rr)))
        put(i, kcol, P * m0 * s11[i] / d0)
        rhs[i] = -P * W[i] / d0
    put(n, n, scale)
    rhs[n] = -scale * rb / k0
    # kinematic: K0 s31'(R0) + K2/K0 = -rho22/R0 - K0 rb s11''(R0)
    put(kcol, n, k0 * 3 / (2 * h))
    put(kcol, n - 1, -k0 * 4 / (2 * h))
    put(kcol, n - 2, k0 / (2 * h))
    put(kcol, kcol, 1.0 / k0)
    rhs[kcol] = -rho22 / R0 - k0 * rb * s11pp
    x = _solve((rows, cols, vals), rhs, size)
    if profiles:
        s31 = x[: n + 1]
        m31 = (k0 * m0 * s31 + x[kcol] * m0 * s11 + W) / d0
        return r, s31, m31, float(x[kcol])
    return float(x[kcol])


def _coupled(n, fo, so, ts, bp, params, ss, dtuple):
    """Unknowns s31, m31 on the grid plus K2; the m-equation is kept as a second-order ODE."""
    P, Z = params.P, params.Z
    R0, m0 = ss.r0, ss.m0
    d0 = dtuple[0]
    k0 = bp.k0
    r = np.linspace(0.0, R0, n + 1)
    h = r[1]
    rho22, rb, mu3 = _shape_data(fo, so, bp, ss, dtuple)
    s11pp = fo.sigma11_pp_r0
    s11h, m11h = fo.sigma11_hat.on(r), fo.m11_hat.on(r)
    lap_s11 = (s11h - P * m11h) / (Z * d0)  # L1[s11]
    f = ts.f_direct.on(r)
    N1 = n + 1
    size = 2 * N1 + 1
    kcol = 2 * N1
    rows, cols, vals = [], [], []
    rhs = np.zeros(size)

    def put(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    def l1_row(i, col0, coef, row):
        rr = r[i]
        put(row, col0 + i - 1, coef * (1 / h**2 - 1 / (2 * h * rr)))
        put(row, col0 + i, coef * (-2 / h**2 - 1 / rr**2))
        put(row, col0 + i + 1, coef * (1 / h**2 + 1 / (2 * h * rr)))

    S, M = 0, N1
    sc = Z / h**2
    put(S + 0, S + 0, sc)
    put(M + 0, M + 0, sc)
    for i in range(1, n):
        # Z L1 s - s + P m = 0
        l1_row(i, S, Z, S + i)
        put(S + i, S + i, -1.0)
        put(S + i, M + i, P)
        # D L1 m - K0 m0 L1 s - K2 m0 L1 s11 = -f
        l1_row(i, M, d0, M + i)
        l1_row(i, S, -k0 * m0, M + i)
        put(M + i, kcol, -m0 * lap_s11[i])
        rhs[M + i] = -f[i]
    # s31(R0) = -rb/K0
    put(S + n, S + n, sc)
    rhs[S + n] = -sc * rb / k0
    # m31'(R0) = mu3, one-sided second order
    put(M + n, M + n, 3 / (2 * h))
    put(M + n, M + n - 1, -4 / (2 * h))
    put(M + n, M + n - 2, 1 / (2 * h))
    rhs[M + n] = mu3
    put(kcol, S + n, k0 * 3 / (2 * h))
    put(kcol, S + n - 1, -k0 * 4 / (2 * h))
    put(kcol, S + n - 2, k0 / (2 * h))
    put(kcol, kcol, 1.0 / k0)
    rhs[kcol] = -rho22 / R0 - k0 * rb * s11pp
    x = _solve((rows, cols, vals), rhs, size)
    return float(x[kcol])


_SYSTEMS = {"reduced": _reduced, "coupled": _coupled}


def oracle_k2(fo: FirstOrderProfiles, so: SecondOrderProfiles, ts: ThirdOrderSource, bp: BifurcationPoint,
              params: PhysParams, ss: SteadyState, dtuple, n_grid: int = 2048, system: str = "reduced") -> OracleResult:
    """K2 from the augmented solve on n_grid and 2*n_grid intervals.

    The reported value is the fine-grid one; ``change`` is |K2(2N) - K2(N)|.
    """
    if n_grid < 512:
        raise DomainError("oracle grid must have at least 512 intervals")
    try:
        solver = _SYSTEMS[system]
    except KeyError:
        raise DomainError(f"unknown oracle system {system!r}") from None
    coarse = solver(n_grid, fo, so, ts, bp, params, ss, dtuple)
    fine = solver(2 * n_grid, fo, so, ts, bp, params, ss, dtuple)
    if not (math.isfinite(coarse) and math.isfinite(fine)):
        raise EvaluationError("oracle produced a non-finite K2")
    return OracleResult(k2=fine, k2_coarse=coarse, change=abs(fine - coarse), n_grid=2 * n_grid, system=system)


def convergence_order(fo, so, ts, bp, params, ss, dtuple, n_grid=1024, system="reduced"):
    """Empirical order from K2 on N, 2N, 4N intervals; returns (order, values)."""
    solver = _SYSTEMS[system]
    vals = [solver(n_grid * 2**j, fo, so, ts, bp, params, ss, dtuple) for j in range(3)]
    d1, d2 = abs(vals[0] - vals[1]), abs(vals[1] - vals[2])
    if d2 == 0.0:
        return float("inf"), vals
    return math.log2(d1 / d2), vals


def third_order_profiles(fo, so, ts, bp, params, ss, dtuple, n_grid=2048):
    """Grid, s31, m31 and K2 from the reduced augmented solve."""
    return _reduced(n_grid, fo, so, ts, bp, params, ss, dtuple, profiles=True)
