"""One-dimensional analog of the bifurcation pipeline.

Cell occupies [-l, l] in the co-moving frame with velocity V.  Unknowns are
the stress s(x) and myosin m(x):
    Z s'' - s + P m = 0,
    D(m) m' - K m s' + V m = 0          (zero flux),
    s(+-l) = 1 - 2l,  K s'(+-l) = V,  integral of m = 1.
The trigonometric test function sin(beta x)/sin(alpha) replaces the Bessel one.
Profiles are stored on the half-interval [0, l0] using parity: first and
third order are odd in x, second order is even.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateError, DomainError, EvaluationError, NoBifurcationError, NoTransitionError
from .expansion import K2Report, classify, combine_coefficients, term_scale
from .model import DiffusionModel, PhysParams, SteadyState, diffusion_at_steady
from .numerics import (RadialBVP, RadialProfile, cumulative_integral, find_root, grid_integral, linear_combination,
                       quad, solve_radial_bvp)

DUAL_PATH_RTOL = 1e-6


@dataclass(frozen=True)
class OneDConfig:
    params: PhysParams
    diffusion: DiffusionModel
    intervals: int = 4096
    tol_root: float = 1e-13
    tol_quad: float = 1e-11

    def with_diffusion(self, diffusion):
        return replace(self, diffusion=diffusion)


def oned_steady_state(params: PhysParams) -> SteadyState:
    """Rest state: total length L0 solves L^2 - L + P = 0 (larger root); r0 is the half-length."""
    length = 0.5 + math.sqrt(0.25 - params.P)
    m0 = 1.0 / length
    return SteadyState(r0=length / 2.0, m0=m0, sigma0=params.P * m0)


@dataclass(frozen=True)
class OneDBifurcation:
    k0: float
    alpha: float
    k0_hat: float
    d0: float
    half_length: float
    residual: float

    @property
    def wavenumber(self):
        return self.alpha / self.half_length


def oned_residual(k, params, ss, d0):
    """P m0 - (D/K) tan(alpha)/alpha, alpha = l0 sqrt((P K m0/D - 1)/Z)."""
    x = params.P * k * ss.m0 / d0 - 1.0
    if x <= 0:
        raise DomainError("subcritical Peclet number")
    a = ss.r0 * math.sqrt(x / params.Z)
    return params.P * ss.m0 - (d0 / k) * math.tan(a) / a


def oned_k0(params: PhysParams, ss: SteadyState, d0: float, tol: float = 1e-13, scan_points: int = 2000):
    """Smallest critical Peclet number, alpha restricted to (0, pi/2)."""
    l0, Z = ss.r0, params.Z

    def g(a):  # pole-free multiple of the bifurcation residual
        return math.sin(a) - a * math.cos(a) * (1 + Z * a * a / l0**2)

    grid = np.linspace(1e-3, math.pi / 2 - 1e-9, scan_points)
    vals = np.array([g(a) for a in grid])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if idx.size == 0:
        raise NoBifurcationError("no 1D bifurcation root with alpha < pi/2")
    i = idx[0]
    alpha = find_root(g, (grid[i], grid[i + 1]), tol=tol)
    k0 = d0 * (1 + Z * alpha * alpha / l0**2) / (params.P * ss.m0)
    return OneDBifurcation(k0=k0, alpha=alpha, k0_hat=k0 / d0, d0=d0, half_length=l0,
                           residual=oned_residual(k0, params, ss, d0))


_LIN = (lambda x: x, lambda x: np.ones_like(x), lambda x: np.zeros_like(x), lambda x: np.zeros_like(x))


@dataclass
class OneDFirstOrder:
    sigma1_hat: RadialProfile
    m1_hat: RadialProfile
    sigma1: RadialProfile
    m1: RadialProfile


def oned_first_order(bp: OneDBifurcation, params, ss, d0, intervals=4096):
    P, m0, l0 = params.P, ss.m0, ss.r0
    kh, a = bp.k0_hat, bp.alpha
    beta = a / l0
    c = 1.0 / (P * kh * m0 - 1.0)
    ca = math.cos(a)
    trig = (np.sin, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t))

    def s_hat(x, order=0):
        x = np.asarray(x, dtype=float)
        return c * (P * m0 * _LIN[order](x) - (l0 / kh) * beta**order * trig[order](beta * x) / (a * ca))

    def m_hat(x, order=0):
        return kh * m0 * s_hat(x, order) - m0 * _LIN[order](np.asarray(x, dtype=float))

    sh = RadialProfile.analytic(l0, s_hat, intervals)
    mh = RadialProfile.analytic(l0, m_hat, intervals)
    return OneDFirstOrder(sh, mh, sh.scaled(1 / d0), mh.scaled(1 / d0))


@dataclass
class OneDSecondOrder:
    """Hatted even profiles per block: s2X, m2X and endpoint shift l2X."""

    sigma: dict
    m: dict
    shift: dict
    nodes: np.ndarray

    def physical(self, d0, d1):
        ca, cb = 1.0 / d0**2, d1 / d0**3
        return (linear_combination([self.sigma["A"], self.sigma["B"]], [ca, cb]),
                linear_combination([self.m["A"], self.m["B"]], [ca, cb]),
                ca * self.shift["A"] + cb * self.shift["B"])


def oned_second_order(bp, params, ss, fo: OneDFirstOrder, intervals=4096, tol=1e-9):
    """Even second-order profiles; m2 - kh m0 s2 = w + c with w' = flux source."""
    P, Z, m0, l0 = params.P, params.Z, ss.m0, ss.r0
    kh = bp.k0_hat
    beta2 = bp.wavenumber**2
    x = np.linspace(0.0, l0, int(intervals) + 1)
    a = [fo.m1_hat.on(x, d) for d in range(2)]
    b1 = fo.sigma1_hat.on(x, 1)
    sources = {"A": kh * a[0] * b1 - a[0], "B": -a[0] * a[1]}
    out_s, out_m, out_l = {}, {}, {}
    s_c = -P / (Z * beta2)
    for blk, src in sources.items():
        w = cumulative_integral(x, src)
        wp = RadialProfile.from_grid(x, w)
        prob = RadialBVP(0, Z, Z * beta2, wp.scaled(-P), ("neumann", 0.0), l0, dim=1)
        sp = solve_radial_bvp(prob, n_grid=intervals, tol=tol).on(x)
        i_p = grid_integral(x, kh * m0 * sp + w)
        i_c = (kh * m0 * s_c + 1.0) * l0
        c = (m0 * sp[-1] / 2 - i_p) / (i_c - m0 * s_c / 2)
        s = sp + c * s_c
        m = kh * m0 * s + w + c
        # second derivatives from the ODEs
        d2s = (s - P * m) / Z
        out_s[blk] = RadialProfile.from_grid(x, s, d2=d2s)
        out_m[blk] = RadialProfile.from_grid(x, m, d2=src_derivative(x, src) + kh * m0 * d2s)
        out_l[blk] = -s[-1] / 2.0
    return OneDSecondOrder(out_s, out_m, out_l, x)


def src_derivative(x, src):
    return RadialProfile.from_grid(x, src).on(x, 1)


def _cum(x, v):
    return cumulative_integral(x, v)


def oned_sources(fo: OneDFirstOrder, so: OneDSecondOrder, bp, dtuple):
    """Third-order flux integrals: direct W3 and the four diffusion-free parts."""
    d0, d1, d2 = dtuple[0], dtuple[1], dtuple[2]
    x = so.nodes
    kh = bp.k0_hat
    ah, bh1 = fo.m1_hat.on(x), fo.sigma1_hat.on(x, 1)
    mA, mB = so.m["A"].on(x), so.m["B"].on(x)
    sA1, sB1 = so.sigma["A"].on(x, 1), so.sigma["B"].on(x, 1)
    w1 = -ah**3 / 6.0
    w2 = -ah * mB
    w3 = kh * _cum(x, ah * sB1 + mB * bh1) - _cum(x, mB) - ah * mA
    w4 = kh * _cum(x, ah * sA1 + mA * bh1) - _cum(x, mA)
    # direct, physical
    s2, m2, _ = so.physical(d0, d1)
    a, b1 = fo.m1.on(x), fo.sigma1.on(x, 1)
    mm, ms1 = m2.on(x), s2.on(x, 1)
    k0 = bp.k0
    W3 = k0 * _cum(x, a * ms1 + mm * b1) - _cum(x, mm) - d1 * a * mm - d2 / 6.0 * a**3
    parts = [RadialProfile.from_grid(x, v) for v in (w1, w2, w3, w4)]
    return parts, RadialProfile.from_grid(x, W3)


def oned_test_function(bp, ss, intervals=4096):
    beta, a = bp.wavenumber, bp.alpha
    trig = (np.sin, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t))

    def u(x, order=0):
        return beta**order * trig[order](beta * np.asarray(x, dtype=float)) / math.sin(a)

    return RadialProfile.analytic(ss.r0, u, intervals)


@dataclass
class OneDPipeline:
    config: OneDConfig
    ss: SteadyState
    dtuple: tuple
    bp: OneDBifurcation
    fo: OneDFirstOrder
    so: OneDSecondOrder
    parts: list
    W3: RadialProfile
    U: RadialProfile
    report: K2Report


def _quad_grid(prof, U, l0, tol):
    return quad(lambda x: float(prof(x)) * float(U(x)), 0.0, l0, tol)


def oned_compute_k2(fo, so, parts, W3, U, bp, params, ss, dtuple, tol_quad=1e-11, rtol=DUAL_PATH_RTOL):
    P, Z, m0, l0 = params.P, params.Z, ss.m0, ss.r0
    d0, d1 = dtuple[0], dtuple[1]
    k0, kh, a = bp.k0, bp.k0_hat, bp.alpha
    beta = bp.wavenumber
    cot = math.cos(a) / math.sin(a)
    _, _, shift = so.physical(d0, d1)
    s1pp = float(fo.sigma1(l0, 2))
    num = (P / d0) * _quad_grid(W3, U, l0, tol_quad) - Z * shift * s1pp + Z * shift * beta * cot / k0
    den = Z / k0**2 - (P * m0 / d0) * _quad_grid(fo.sigma1, U, l0, tol_quad)
    if den == 0:
        raise DegenerateError("1D K2 denominator vanishes")
    k2 = num / den

    a0 = Z / kh**2 - P * m0 * _quad_grid(fo.sigma1_hat, U, l0, tol_quad)
    sh_pp = float(fo.sigma1_hat(l0, 2))

    def shape(ell):
        return -Z * ell * sh_pp + Z * ell * beta * cot / kh

    numerators = [P * _quad_grid(p, U, l0, tol_quad) for p in parts]
    numerators[2] += shape(so.shift["B"])
    numerators[3] += shape(so.shift["A"])
    coeffs = [float(t / a0) for t in numerators]
    k2_dec = combine_coefficients(coeffs, dtuple)
    if abs(k2 - k2_dec) > rtol * max(abs(k2), abs(k2_dec), term_scale(coeffs, dtuple), 1e-12):
        raise EvaluationError(f"1D K2 paths disagree: {k2:.12g} vs {k2_dec:.12g}")
    return K2Report(k2=float(k2), a0=float(a0), a1=coeffs[0], a2=coeffs[1], a3=coeffs[2], a4=coeffs[3],
                    verdict=classify(k2), k2_decomposition=float(k2_dec), k0=k0, alpha=a,
                    transversality=float(a0), dim=1)


def oned_pipeline(config: OneDConfig) -> OneDPipeline:
    params = config.params
    ss = oned_steady_state(params)
    dtuple = diffusion_at_steady(config.diffusion, ss)
    bp = oned_k0(params, ss, dtuple[0], tol=config.tol_root)
    fo = oned_first_order(bp, params, ss, dtuple[0], config.intervals)
    so = oned_second_order(bp, params, ss, fo, config.intervals)
    parts, W3 = oned_sources(fo, so, bp, dtuple)
    U = oned_test_function(bp, ss, config.intervals)
    report = oned_compute_k2(fo, so, parts, W3, U, bp, params, ss, dtuple, tol_quad=config.tol_quad)
    return OneDPipeline(config, ss, dtuple, bp, fo, so, parts, W3, U, report)


def oned_k2(config: OneDConfig) -> K2Report:
    """K2 and its decomposition for the interval model."""
    return oned_pipeline(config).report


def oned_oracle_k2(pl: OneDPipeline, n_grid=4096, profiles=False):
    """Augmented finite-difference solve for (s3, K2) on [0, l0]."""
    import scipy.sparse as sparse
    import scipy.sparse.linalg as sparse_linalg
    from scipy.integrate import cumulative_trapezoid

    params, ss, bp, fo, so = pl.config.params, pl.ss, pl.bp, pl.fo, pl.so
    P, Z, m0, l0 = params.P, params.Z, ss.m0, ss.r0
    d0, d1, d2 = pl.dtuple[0], pl.dtuple[1], pl.dtuple[2]
    k0 = bp.k0
    beta2 = bp.wavenumber**2
    x = np.linspace(0.0, l0, n_grid + 1)
    h = x[1]
    s2, m2, shift = so.physical(d0, d1)
    a, b, b1 = fo.m1.on(x), fo.sigma1.on(x), fo.sigma1.on(x, 1)
    mm, ms1 = m2.on(x), s2.on(x, 1)
    W3 = (k0 * cumulative_trapezoid(a * ms1 + mm * b1, x, initial=0.0) - cumulative_trapezoid(mm, x, initial=0.0)
          - d1 * a * mm - d2 / 6.0 * a**3)
    n = n_grid
    size = n + 2
    main = np.full(n + 1, Z * (-2 / h**2 + beta2))
    rows = list(range(1, n)) * 3
    cols = list(range(0, n - 1)) + list(range(1, n)) + list(range(2, n + 1))
    vals = [Z / h**2] * (n - 1) + list(main[1:n]) + [Z / h**2] * (n - 1)
    rows += list(range(1, n))
    cols += [n + 1] * (n - 1)
    vals += list(P * m0 * b[1:n] / d0)
    rhs = np.zeros(size)
    rhs[1:n] = -P * W3[1:n] / d0
    sc = Z / h**2
    rows += [0, n, n + 1, n + 1, n + 1, n + 1]
    cols += [0, n, n, n - 1, n - 2, n + 1]
    vals += [sc, sc, k0 * 3 / (2 * h), -k0 * 4 / (2 * h), k0 / (2 * h), 1.0 / k0]
    rhs[n] = -sc * shift / k0
    rhs[n + 1] = -k0 * shift * float(fo.sigma1(l0, 2))
    mat = sparse.csc_matrix((vals, (rows, cols)), shape=(size, size))
    sol = sparse_linalg.spsolve(mat, rhs)
    if profiles:
        return x, sol[: n + 1], float(sol[n + 1])
    return float(sol[n + 1])


def critical_ea(config: OneDConfig, bracket=(0.0, 1.0), tol: float = 1e-12) -> float:
    """Cooperative-binding ratio where K2 changes sign (van der Waals diffusion)."""
    if config.diffusion.kind != "van_der_waals":
        raise DomainError("critical_ea needs a van der Waals diffusion model")
    m_inf = config.diffusion.parameters[0]

    def k2_of(ea):
        return oned_k2(config.with_diffusion(DiffusionModel.van_der_waals(m_inf, ea))).k2

    lo, hi = bracket
    k_lo, k_hi = k2_of(lo), k2_of(hi)
    if k_lo * k_hi >= 0:
        raise NoTransitionError(f"K2 does not change sign on [{lo}, {hi}]: K2 = {k_lo:.6g}, {k_hi:.6g}",
                                (k_lo, k_hi))
    return find_root(k2_of, (lo, hi), tol=tol)
