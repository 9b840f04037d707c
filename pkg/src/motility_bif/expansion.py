"""Second- and third-order expansion of the traveling wave and the curvature K2.

Fields are expanded in the velocity V:
    sigma = sigma0 + V s11 cos(t) + V^2 (s20 + s22 cos 2t) + V^3 s31 cos(t) + ...
    m     = m0     + V m11 cos(t) + V^2 (m20 + m22 cos 2t) + V^3 m31 cos(t) + ...
    R(t)  = R0 + V^2 (rho20 + rho22 cos 2t) + ...,    K = K0 + V^2 K2 + ...

Second-order profiles split into an A block (advection and cross terms) and
a B block (the D'(m0) term), both independent of the diffusion law:
    m2 = m2A / D^2 + D' m2B / D^3, and likewise for s2 and rho2.
K2 comes from pairing the third-order cos(t) problem with the adjoint
solution U = J1(k r)/J1(alpha).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, EvaluationError
from .linearization import (BifurcationPoint, FirstOrderProfiles, first_order_profiles, solve_k0)
from .model import DiffusionModel, PhysParams, SteadyState, diffusion_at_steady, solve_steady_state
from .numerics import (DEFAULT_GRID, RadialBVP, RadialProfile, bessel_eval, cumulative_integral, grid_integral,
                       j1_deriv, linear_combination, quad, solve_radial_bvp)

DUAL_PATH_RTOL = 1e-6


def _lap(u0, u1, u2, r, n):
    return u2 + u1 / r - n * n * u0 / r**2


def _product(u, v):
    """Value, first and second derivative of a product from derivative stacks."""
    return (u[0] * v[0], u[1] * v[0] + u[0] * v[1], u[2] * v[0] + 2 * u[1] * v[1] + u[0] * v[2])


def grad_dot_modes(a, b, r):
    """cos 0 and cos 2 radial parts of grad(a cos t) . grad(b cos t)."""
    r = np.asarray(r, dtype=float)
    out0, out2 = np.zeros_like(r), np.zeros_like(r)
    pos = r > 0
    rp = r[pos]
    a0, a1 = a(rp, 0), a(rp, 1)
    b0, b1 = b(rp, 0), b(rp, 1)
    out0[pos] = 0.5 * (a1 * b1 + a0 * b0 / rp**2)
    out2[pos] = 0.5 * (a1 * b1 - a0 * b0 / rp**2)
    if not pos.all():
        out0[~pos] = float(a(0.0, 1)) * float(b(0.0, 1))
    return out0, out2


def mode_project(a: RadialProfile, b: RadialProfile, nodes=None):
    """Mode-0 and mode-2 profiles of grad(a cos t) . grad(b cos t).

    Uses cos^2 = (1 + cos 2t)/2 and sin^2 = (1 - cos 2t)/2.
    """
    nodes = a.nodes if nodes is None else np.asarray(nodes, dtype=float)
    m0, m2 = grad_dot_modes(a, b, nodes)
    return RadialProfile.from_grid(nodes, m0), RadialProfile.from_grid(nodes, m2)


def second_order_source(fo: FirstOrderProfiles, kh: float, block: str, mode: int):
    """Right-hand side of L_n[m2] - kh m0 L_n[s2] = S for one block and mode (hatted)."""
    a, b = fo.m11_hat, fo.sigma11_hat
    sign = 1.0 if mode == 0 else -1.0

    def src(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        pos = r > 0
        rp = r[pos]
        A = [a(rp, d) for d in range(3)]
        if block == "A":
            B = [b(rp, d) for d in range(3)]
            q = 0.5 * (A[1] * B[1] + sign * A[0] * B[0] / rp**2) + 0.5 * A[0] * _lap(*B, rp, 1)
            e = 0.5 * (A[1] + sign * A[0] / rp)
            out[pos] = kh * q - e
        else:
            out[pos] = -0.25 * _lap(*_product(A, A), rp, mode)
        if not pos.all() and mode == 0:
            a1 = float(a(0.0, 1))
            out[~pos] = kh * a1 * float(b(0.0, 1)) - a1 if block == "A" else -a1 * a1
        return out

    return src


@dataclass
class ModeSolution:
    sigma: RadialProfile
    m: RadialProfile
    rho: float
    source: RadialProfile
    diagnostics: dict = field(default_factory=dict)


@dataclass
class SecondOrderProfiles:
    """Hatted second-order profiles, keyed by (block, mode)."""

    modes: dict
    r0: float
    nodes: np.ndarray

    @classmethod
    def zeros(cls, nodes):
        z = RadialProfile.from_grid(nodes, np.zeros_like(nodes))
        modes = {(b, n): ModeSolution(z, z, 0.0, z) for b in "AB" for n in (0, 2)}
        return cls(modes, float(nodes[-1]), nodes)

    def __getattr__(self, name):
        # m20A, s22B, rho20A, ...
        if len(name) in (4, 5) and name[:-3] in ("m", "s", "rho") and name[-1] in "AB" and name[-3] == "2":
            sol = self.modes[(name[-1], int(name[-2]))]
            return {"m": sol.m, "s": sol.sigma, "rho": sol.rho}[name[:-3]]
        raise AttributeError(name)

    def physical(self, d0: float, d1: float):
        """Combine blocks: X = X_A/D^2 + D' X_B/D^3."""
        ca, cb = 1.0 / d0**2, d1 / d0**3
        out = {}
        for n in (0, 2):
            A, B = self.modes[("A", n)], self.modes[("B", n)]
            out[f"s2{n}"] = linear_combination([A.sigma, B.sigma], [ca, cb])
            out[f"m2{n}"] = linear_combination([A.m, B.m], [ca, cb])
            out[f"rho2{n}"] = ca * A.rho + cb * B.rho
        return out


def _ode_d2(values, d1, lap, r, n):
    """u'' from a known L_n[u]; the r = 0 node uses the regular limit."""
    d2 = np.empty_like(values)
    d2[1:] = lap[1:] - d1[1:] / r[1:] + n * n * values[1:] / r[1:] ** 2
    if n == 0:
        d2[0] = 0.5 * lap[0]
    else:
        d2[0] = 3 * d2[1] - 3 * d2[2] + d2[3]
    return d2


def _grid_profile_with_d2(nodes, values, lap, n):
    spline = RadialProfile.from_grid(nodes, values)
    d2 = _ode_d2(values, spline.on(nodes, 1), lap, nodes, n)
    return RadialProfile.from_grid(nodes, values, d2=d2)


def solve_second_order(bp: BifurcationPoint, params: PhysParams, ss: SteadyState, d0: float,
                       fo: FirstOrderProfiles, intervals: int = DEFAULT_GRID, tol: float = 1e-8) -> SecondOrderProfiles:
    """Solve the mode-0 and mode-2 problems of both blocks.

    For each (block, mode): m = kh m0 s + w with L_n[w] = S, then
    Z (L_n + k^2) s = -P w with s'(R0) = 0.  The shape constant follows
    from the Dirichlet relation for s(R0); mode 0 additionally carries a free
    additive constant in m fixed by conservation of total myosin.
    """
    P, Z, gamma = params.P, params.Z, params.gamma
    R0, m0 = ss.r0, ss.m0
    kh = bp.k0_hat
    k2 = (bp.alpha / R0) ** 2
    nodes = np.linspace(0.0, R0, int(intervals) + 1)
    beta = {0: gamma / R0**2 - 2 * math.pi * R0, 2: -3.0 * gamma / R0**2}
    modes = {}
    for block in "AB":
        for n in (0, 2):
            src = second_order_source(fo, kh, block, n)
            src_vals = src(nodes)
            if n == 0:
                # pure-Neumann problem: pin w(R0) = 0, w'(R0) = 0 holds by compatibility
                wprob = RadialBVP(0, 1.0, 0.0, src, ("dirichlet", 0.0), R0)
                w = solve_radial_bvp(wprob, extra_bc=("neumann", 0.0), n_grid=intervals, tol=tol)
            else:
                wprob = RadialBVP(2, 1.0, 0.0, src, ("neumann", 0.0), R0)
                w = solve_radial_bvp(wprob, n_grid=intervals, tol=tol)
            w_vals = w.on(nodes)
            sprob = RadialBVP(n, Z, Z * k2, w.scaled(-P), ("neumann", 0.0), R0)
            sp = solve_radial_bvp(sprob, n_grid=intervals, tol=tol)
            sp_vals = sp.on(nodes)
            diag = {"w_change": w.info["change"], "s_change": sp.info["change"]}
            if n == 0:
                diag["compatibility"] = w.info["extra_residual"]
                if beta[0] == 0:
                    raise DegenerateError("gamma = 2 pi R0^3: mode-0 shape decouples from the stress")
                s_c = -P / (Z * k2)  # stress response to a unit shift of m
                i_p = grid_integral(nodes, (kh * m0 * sp_vals + w_vals) * nodes)
                i_c = (kh * m0 * s_c + 1.0) * R0**2 / 2
                denom = i_c + R0 * m0 * s_c / beta[0]
                if denom == 0:
                    raise DegenerateError("mode-0 mass constraint is degenerate")
                c = -(i_p + R0 * m0 * sp_vals[-1] / beta[0]) / denom
                s_vals = sp_vals + c * s_c
                m_vals = kh * m0 * s_vals + w_vals + c
                rho = s_vals[-1] / beta[0]
                diag["mass_shift"] = c
                diag["mass_defect"] = grid_integral(nodes, m_vals * nodes) + R0 * m0 * rho
            else:
                s_vals, m_vals = sp_vals, kh * m0 * sp_vals + w_vals
                if beta[2] == 0:
                    if abs(s_vals[-1]) > 1e-14 * max(1.0, np.max(np.abs(s_vals))):
                        raise DegenerateError(
                            "mode-2 boundary shape is undetermined without surface tension (gamma = 0)")
                    rho = 0.0
                else:
                    rho = s_vals[-1] / beta[2]
            lap_s = (s_vals - P * m_vals) / Z
            lap_m = src_vals + kh * m0 * lap_s
            modes[(block, n)] = ModeSolution(
                sigma=_grid_profile_with_d2(nodes, s_vals, lap_s, n),
                m=_grid_profile_with_d2(nodes, m_vals, lap_m, n),
                rho=float(rho),
                source=RadialProfile.from_grid(nodes, src_vals),
                diagnostics=diag,
            )
    return SecondOrderProfiles(modes=modes, r0=R0, nodes=nodes)


# ------------------------------------------------------------ third order


@dataclass
class ThirdOrderSource:
    """f = (D''/D^3) f1 + (D'^2/D^4) f2 + (D'/D^3) f3 + f4/D^2, plus a direct evaluation."""

    f1: RadialProfile
    f2: RadialProfile
    f3: RadialProfile
    f4: RadialProfile
    f: RadialProfile
    f_direct: RadialProfile
    dual_path_gap: float

    @classmethod
    def zeros(cls, nodes):
        z = RadialProfile.from_grid(nodes, np.zeros_like(nodes))
        return cls(z, z, z, z, z, z, 0.0)


def _stack(prof, r):
    return [prof.on(r, d) for d in range(3)]


def _bracket(a, b, p0, p2, q0, q2, r):
    """Stress-gradient coupling terms of the cos t projection at third order."""
    lq0 = _lap(*q0, r, 0)
    lq2 = _lap(*q2, r, 2)
    lb = _lap(*b, r, 1)
    return (a[1] * q0[1] + 0.5 * a[1] * q2[1] + a[0] * q2[0] / r**2 + a[0] * (lq0 + 0.5 * lq2)
            + b[1] * p0[1] + 0.5 * b[1] * p2[1] + p2[0] * b[0] / r**2 + lb * (p0[0] + 0.5 * p2[0]))


def _advect(p0, p2, r):
    return p0[1] + 0.5 * p2[1] + p2[0] / r


def _l1(u, r):
    return _lap(*u, r, 1)


def _half_sum(p0, p2):
    return [p0[i] + 0.5 * p2[i] for i in range(3)]


def _finish(nodes, vals, label):
    out = np.zeros_like(nodes)
    out[1:] = vals
    if not np.all(np.isfinite(out)):
        bad = int(np.nonzero(~np.isfinite(out))[0][0])
        raise EvaluationError(f"non-finite {label} at r = {nodes[bad]:.6g}")
    return RadialProfile.from_grid(nodes, out)


def third_order_sources(fo: FirstOrderProfiles, so: SecondOrderProfiles, bp: BifurcationPoint, params: PhysParams,
                        ss: SteadyState, dtuple) -> ThirdOrderSource:
    d0, d1, d2 = dtuple[0], dtuple[1], dtuple[2]
    kh = bp.k0_hat
    nodes = so.nodes
    r = nodes[1:]  # f(0) = 0 for a cos t mode
    a, b = _stack(fo.m11_hat, r), _stack(fo.sigma11_hat, r)
    blk = {}
    for X in "AB":
        blk[X] = dict(p0=_stack(so.modes[(X, 0)].m, r), p2=_stack(so.modes[(X, 2)].m, r),
                      q0=_stack(so.modes[(X, 0)].sigma, r), q2=_stack(so.modes[(X, 2)].sigma, r))
    A, B = blk["A"], blk["B"]
    a3 = (a[0] ** 3, 3 * a[0] ** 2 * a[1], 6 * a[0] * a[1] ** 2 + 3 * a[0] ** 2 * a[2])
    f1 = _l1(a3, r) / 8.0
    f2 = _l1(_product(a, _half_sum(B["p0"], B["p2"])), r)
    f3 = (_l1(_product(a, _half_sum(A["p0"], A["p2"])), r) - kh * _bracket(a, b, **B, r=r)
          + _advect(B["p0"], B["p2"], r))
    f4 = -kh * _bracket(a, b, **A, r=r) + _advect(A["p0"], A["p2"], r)
    f = (d2 / d0**3) * f1 + (d1**2 / d0**4) * f2 + (d1 / d0**3) * f3 + f4 / d0**2

    # direct evaluation from physical profiles and the actual diffusion data
    phys = so.physical(d0, d1)
    k0 = bp.k0
    pa, pb = _stack(fo.m11, r), _stack(fo.sigma11, r)
    p0, p2 = _stack(phys["m20"], r), _stack(phys["m22"], r)
    q0, q2 = _stack(phys["s20"], r), _stack(phys["s22"], r)
    pc = _product(pa, _half_sum(p0, p2))
    cube = (pa[0] ** 3, 3 * pa[0] ** 2 * pa[1], 6 * pa[0] * pa[1] ** 2 + 3 * pa[0] ** 2 * pa[2])
    fd = (d1 * _l1(pc, r) + d2 / 8.0 * _l1(cube, r) - k0 * _bracket(pa, pb, p0, p2, q0, q2, r)
          + _advect(p0, p2, r))

    ts = dict(f1=_finish(nodes, f1, "f1"), f2=_finish(nodes, f2, "f2"), f3=_finish(nodes, f3, "f3"),
              f4=_finish(nodes, f4, "f4"), f=_finish(nodes, f, "f"), f_direct=_finish(nodes, fd, "f"))
    gap = float(np.max(np.abs(ts["f"].values - ts["f_direct"].values)))
    return ThirdOrderSource(dual_path_gap=gap, **ts)


# --------------------------------------------------------- test function


def test_function(bp: BifurcationPoint, ss: SteadyState, intervals: int = DEFAULT_GRID) -> RadialProfile:
    """U(r) = J1(alpha r/R0)/J1(alpha): adjoint solution with unit cos t boundary data."""
    j = bessel_eval(bp.alpha).j1
    if abs(j) < 1e-14:
        raise DegenerateError("J1(alpha) vanishes; test function undefined")
    k = bp.alpha / ss.r0

    def u(r, order=0):
        return k**order * j1_deriv(k * np.asarray(r, dtype=float), order) / j

    return RadialProfile.analytic(ss.r0, u, intervals)


# -------------------------------------------------------------------- K2


@dataclass(frozen=True)
class K2Report:
    k2: float
    a0: float
    a1: float
    a2: float
    a3: float
    a4: float
    verdict: str
    k2_decomposition: float = float("nan")
    k0: float = float("nan")
    alpha: float = float("nan")
    transversality: float = float("nan")
    dim: int = 2

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def classify(k2, scale=None):
    tol = 1e-9 * max(1.0, abs(k2) if scale is None else abs(scale))
    if k2 > tol:
        return "direct_pitchfork"
    if k2 < -tol:
        return "inverse_pitchfork"
    return "degenerate"


def combine_coefficients(a, dtuple):
    """K2 from A1..A4 and the diffusion data at m0."""
    d0, d1, d2 = dtuple[0], dtuple[1], dtuple[2]
    a1, a2, a3, a4 = a
    return a1 * d2 / d0**2 + a2 * d1**2 / d0**3 + a3 * d1 / d0**2 + a4 / d0


def term_scale(a, dtuple):
    """Sum of the absolute terms in K2; the yardstick for cancellation near K2 = 0."""
    d0, d1, d2 = dtuple[0], dtuple[1], dtuple[2]
    a1, a2, a3, a4 = a
    return abs(a1 * d2 / d0**2) + abs(a2 * d1**2 / d0**3) + abs(a3 * d1 / d0**2) + abs(a4 / d0)


def _kernel_integral(f: RadialProfile, U: RadialProfile, tol):
    """Integral of r W_f(r) U(r), W_f = [r int_r^R0 f + (1/r) int_0^r s^2 f]/2 + r int s^2 f/(2 R0^2)."""
    nodes = f.nodes
    R0 = nodes[-1]
    inner = cumulative_integral(nodes, nodes**2 * f.values)
    outer = cumulative_integral(nodes, f.values)
    tail = RadialProfile.from_grid(nodes, outer[-1] - outer)
    head = RadialProfile.from_grid(nodes, inner)
    i_tail = quad(lambda s: s * s * float(U(s)) * float(tail(s)), 0.0, R0, tol)
    i_head = quad(lambda s: float(U(s)) * float(head(s)), 0.0, R0, tol)
    i_r2u = quad(lambda s: s * s * float(U(s)), 0.0, R0, tol)
    return 0.5 * (i_tail + i_head + inner[-1] * i_r2u / R0**2)


def _w_profile(f: RadialProfile, slope_r0: float):
    """W(r) from f and W'(R0), by cumulative quadrature."""
    nodes = f.nodes
    R0 = nodes[-1]
    inner = cumulative_integral(nodes, nodes**2 * f.values)
    outer = cumulative_integral(nodes, f.values)
    c = slope_r0 + inner[-1] / (2 * R0**2)
    w = np.zeros_like(nodes)
    rp = nodes[1:]
    w[1:] = 0.5 * (rp * (outer[-1] - outer[1:]) + inner[1:] / rp) + c * rp
    return RadialProfile.from_grid(nodes, w)


def compute_k2(fo: FirstOrderProfiles, so: SecondOrderProfiles, ts: ThirdOrderSource, U: RadialProfile,
               bp: BifurcationPoint, params: PhysParams, ss: SteadyState, dtuple, tol_quad: float = 1e-10,
               rtol: float = DUAL_PATH_RTOL) -> K2Report:
    """K2 by direct quadrature and by the diffusion-independent decomposition."""
    P, Z = params.P, params.Z
    R0, m0 = ss.r0, ss.m0
    d0, d1 = dtuple[0], dtuple[1]
    k0, kh = bp.k0, bp.k0_hat
    b = bessel_eval(bp.alpha)
    kj = (bp.alpha / R0) * b.j1p / b.j1  # U'(R0)

    # direct path, physical quantities
    phys = so.physical(d0, d1)
    rho20, rho22 = phys["rho20"], phys["rho22"]
    rb = rho20 + 0.5 * rho22
    s11pp = fo.sigma11_pp_r0
    mu3 = -rb * fo.m11_pp_r0 + rho22 / R0**2 * float(fo.m11(R0))
    w_slope = d0 * mu3 + m0 * rho22 / R0 + k0 * m0 * rb * s11pp
    W = _w_profile(ts.f_direct, w_slope)
    i_wu = quad(lambda r: r * float(W(r)) * float(U(r)), 0.0, R0, tol_quad)
    i_su = quad(lambda r: r * float(fo.sigma11(r)) * float(U(r)), 0.0, R0, tol_quad)
    num = (P / d0) * i_wu - Z * rho22 / k0 - Z * R0 * rb * s11pp + Z * R0 * rb * kj / k0
    den = Z * R0 / k0**2 - (P * m0 / d0) * i_su
    if den == 0.0:
        raise DegenerateError("K2 denominator vanishes (transversality violated)")
    k2 = num / den

    # decomposition path, hatted quantities only
    i_shu = quad(lambda r: r * float(fo.sigma11_hat(r)) * float(U(r)), 0.0, R0, tol_quad)
    a0 = Z * R0 / kh**2 - P * m0 * i_shu
    if a0 == 0.0:
        raise DegenerateError("A0 vanishes (transversality violated)")
    i_r2u = quad(lambda r: r * r * float(U(r)), 0.0, R0, tol_quad)
    sh_pp = float(fo.sigma11_hat(R0, 2))
    mh_pp, mh_r0 = float(fo.m11_hat(R0, 2)), float(fo.m11_hat(R0))

    def shape_part(block):
        r20, r22 = so.modes[(block, 0)].rho, so.modes[(block, 2)].rho
        rbar = r20 + 0.5 * r22
        slope = -rbar * mh_pp + r22 / R0**2 * mh_r0 + m0 * r22 / R0 + kh * m0 * rbar * sh_pp
        return (P * slope * i_r2u - Z * r22 / kh - Z * R0 * rbar * sh_pp + Z * R0 * rbar * kj / kh)

    numerators = [P * _kernel_integral(g, U, tol_quad) for g in (ts.f1, ts.f2, ts.f3, ts.f4)]
    numerators[2] += shape_part("B")
    numerators[3] += shape_part("A")
    coeffs = [float(t / a0) for t in numerators]
    k2_dec = combine_coefficients(coeffs, dtuple)
    scale = max(abs(k2), abs(k2_dec), term_scale(coeffs, dtuple))
    if abs(k2 - k2_dec) > rtol * max(scale, 1e-12):
        raise EvaluationError(f"K2 paths disagree: direct {k2:.12g} vs decomposition {k2_dec:.12g}")
    return K2Report(k2=float(k2), a0=float(a0), a1=coeffs[0], a2=coeffs[1], a3=coeffs[2], a4=coeffs[3],
                    verdict=classify(k2), k2_decomposition=float(k2_dec), k0=bp.k0, alpha=bp.alpha,
                    transversality=bp.transversality, dim=2)


# --------------------------------------------------------------- driver


@dataclass
class Pipeline:
    params: PhysParams
    diffusion: DiffusionModel
    ss: SteadyState
    dtuple: tuple
    bp: BifurcationPoint
    fo: FirstOrderProfiles
    so: SecondOrderProfiles
    ts: ThirdOrderSource
    U: RadialProfile
    report: K2Report


def run_pipeline(params: PhysParams, diffusion: DiffusionModel, intervals: int = DEFAULT_GRID,
                 tol_root: float = 1e-12, tol_quad: float = 1e-10, bvp_tol: float = 1e-8) -> Pipeline:
    """Steady state -> K0 -> first order -> second order -> third-order source -> K2."""
    ss = solve_steady_state(params)
    dtuple = diffusion_at_steady(diffusion, ss)
    bp = solve_k0(params, ss, dtuple[0], tol=tol_root, tol_quad=min(tol_quad, 1e-12))
    fo = first_order_profiles(bp, params, ss, dtuple[0], intervals)
    so = solve_second_order(bp, params, ss, dtuple[0], fo, intervals, tol=bvp_tol)
    ts = third_order_sources(fo, so, bp, params, ss, dtuple)
    U = test_function(bp, ss, intervals)
    report = compute_k2(fo, so, ts, U, bp, params, ss, dtuple, tol_quad=tol_quad)
    return Pipeline(params, diffusion, ss, dtuple, bp, fo, so, ts, U, report)
