"""Critical Peclet number, transversality and first-order traveling-wave profiles.

All profiles live on r in [0, R0].  The first-order fields are
sigma = V*sigma11(r)*cos(theta), m = V*m11(r)*cos(theta); their "hatted"
versions are the same profiles multiplied by D(m0), which removes every
dependence on the diffusion law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, NoBifurcationError, SubcriticalError, TransversalityError
from .model import PhysParams, SteadyState
from .numerics import (RadialBVP, RadialProfile, bessel_eval, find_root, j1_deriv, j1p_zeros, quad,
                       solve_radial_bvp, y1_deriv)

TRANSVERSALITY_TOL = 1e-8


@dataclass(frozen=True)
class BifurcationPoint:
    k0: float
    alpha: float
    k0_hat: float
    transversality: float
    d0: float
    residual: float
    r0: float
    s1p_defect: float = float("nan")
    other_roots: tuple = field(default=())

    @property
    def wavenumber(self):
        """alpha/R0: radial wavenumber of the first-order stress profile."""
        return self.alpha / self.r0


def alpha_of(k, params: PhysParams, ss: SteadyState, d0: float) -> float:
    """Bessel argument at the cell edge for Peclet number k."""
    x = params.P * k * ss.m0 / d0 - 1.0
    if not x > 0.0:
        raise SubcriticalError(f"P*K*m0/D = {x + 1:.6g} must exceed 1 for a real alpha")
    return ss.r0 / math.sqrt(params.Z) * math.sqrt(x)


def k_of_alpha(alpha, params: PhysParams, ss: SteadyState, d0: float) -> float:
    return d0 * (1.0 + params.Z * alpha * alpha / ss.r0**2) / (params.P * ss.m0)


def bifurcation_residual(k, params: PhysParams, ss: SteadyState, d0: float) -> float:
    """P m0 - (D/K) J1(alpha)/(alpha J1'(alpha)); vanishes at K0."""
    a = alpha_of(k, params, ss, d0)
    b = bessel_eval(a)
    return params.P * ss.m0 - (d0 / k) * b.j1 / (a * b.j1p)


def transversality_value(alpha: float, tol: float = 1e-12) -> float:
    """Non-degeneracy combination of Bessel integrals; must not vanish."""
    b = bessel_eval(alpha)

    def sy(s):
        if s == 0.0:
            return 0.0  # s*Y1*J1 ~ -s/pi
        return s * float(y1_deriv(alpha * s)) * float(j1_deriv(alpha * s))

    def sj(s):
        return s * float(j1_deriv(alpha * s)) ** 2

    i_yj = quad(sy, 0.0, 1.0, tol)
    i_jj = quad(sj, 0.0, 1.0, tol)
    return -alpha * b.j1p / b.j1 - i_yj + (b.y1p / b.j1p) * i_jj


def _s1p_defect(alpha, k0, params, ss, d0, tol=1e-12):
    """Mismatch in the kinematic condition of the transversality argument."""
    b = bessel_eval(alpha)
    P, m0, R0 = params.P, ss.m0, ss.r0
    B = P * R0 * m0 / ((P * k0 * m0 - d0) * alpha * b.j1p)
    i_yj = quad(lambda s: 0.0 if s == 0 else s * float(y1_deriv(alpha * s) * j1_deriv(alpha * s)), 0, 1, tol)
    i_jj = quad(lambda s: s * float(j1_deriv(alpha * s)) ** 2, 0, 1, tol)
    return d0 * R0 / (k0 * (d0 - P * k0 * m0)) - B * alpha * b.j1p * i_yj + B * alpha * b.y1p * i_jj


def solve_k0(params: PhysParams, ss: SteadyState, d0: float, tol: float = 1e-12, tol_quad: float = 1e-12,
             scan_points: int = 2000, check_transversality: bool = True) -> BifurcationPoint:
    """First root of the bifurcation condition with alpha below the second zero of J1'.

    The residual has poles where J1'(alpha) = 0; sign changes are only
    accepted between consecutive poles.
    """
    if not d0 > 0:
        raise DegenerateError(f"D(m0) must be positive, got {d0}")
    poles = list(j1p_zeros(2))
    edges = [1e-3] + poles
    roots = []
    for lo_a, hi_a in zip(edges[:-1], edges[1:]):
        span = hi_a - lo_a
        al = np.linspace(lo_a + 1e-7 * span, hi_a - 1e-7 * span, scan_points)
        ks = [k_of_alpha(a, params, ss, d0) for a in al]
        vals = np.array([bifurcation_residual(k, params, ss, d0) for k in ks])
        for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
            # reject jumps through infinity that survived the pole split
            if max(abs(vals[i]), abs(vals[i + 1])) > 1e6 * params.P * ss.m0:
                continue
            roots.append(find_root(lambda k: bifurcation_residual(k, params, ss, d0), (ks[i], ks[i + 1]), tol=tol))
    if not roots:
        raise NoBifurcationError("no root of the bifurcation condition below the second zero of J1'")
    k0 = roots[0]
    alpha = alpha_of(k0, params, ss, d0)
    res = bifurcation_residual(k0, params, ss, d0)
    trans = transversality_value(alpha, tol_quad)
    if check_transversality and abs(trans) <= TRANSVERSALITY_TOL:
        raise TransversalityError(f"transversality expression {trans:.3e} vanishes at K0 = {k0:.10g}")
    return BifurcationPoint(k0=k0, alpha=alpha, k0_hat=k0 / d0, transversality=trans, d0=d0, residual=res,
                            r0=ss.r0, s1p_defect=_s1p_defect(alpha, k0, params, ss, d0, tol_quad),
                            other_roots=tuple(roots[1:]))


@dataclass(frozen=True)
class FirstOrderProfiles:
    sigma11: RadialProfile
    m11: RadialProfile
    sigma11_hat: RadialProfile
    m11_hat: RadialProfile
    d0: float
    k0: float
    r0: float

    @property
    def m11_pp_r0(self):
        return float(self.m11(self.r0, 2))

    @property
    def sigma11_p_r0(self):
        return float(self.sigma11(self.r0, 1))

    @property
    def sigma11_pp_r0(self):
        return float(self.sigma11(self.r0, 2))


_LINEAR = (lambda r: r, lambda r: np.ones_like(r), lambda r: np.zeros_like(r), lambda r: np.zeros_like(r),
           lambda r: np.zeros_like(r))


def first_order_profiles(bp: BifurcationPoint, params: PhysParams, ss: SteadyState, d0: float,
                         intervals: int = 2048) -> FirstOrderProfiles:
    """Closed-form first-order stress and myosin profiles (cos theta mode)."""
    P, m0, R0 = params.P, ss.m0, ss.r0
    kh, alpha = bp.k0_hat, bp.alpha
    k = alpha / R0
    jp = bessel_eval(alpha).j1p
    if abs(jp) < 1e-14:
        raise DegenerateError("J1'(alpha) vanishes; first-order profile undefined")
    c = 1.0 / (P * kh * m0 - 1.0)

    def sig_hat(r, order=0):
        r = np.asarray(r, dtype=float)
        return c * (P * m0 * _LINEAR[order](r) - (R0 / kh) * k**order * j1_deriv(k * r, order) / (alpha * jp))

    def m_hat(r, order=0):
        return kh * m0 * sig_hat(r, order) - m0 * _LINEAR[order](np.asarray(r, dtype=float))

    sh = RadialProfile.analytic(R0, sig_hat, intervals)
    mh = RadialProfile.analytic(R0, m_hat, intervals)
    fo = FirstOrderProfiles(sigma11=sh.scaled(1 / d0), m11=mh.scaled(1 / d0), sigma11_hat=sh, m11_hat=mh,
                            d0=d0, k0=bp.k0, r0=R0)
    scale = max(1.0, sh.max_abs())
    if abs(sig_hat(R0)) > 1e-8 * scale or abs(bp.k0 * fo.sigma11_p_r0 - 1) > 1e-8 or abs(m_hat(R0, 1)) > 1e-8 * scale:
        raise DegenerateError("first-order boundary conditions not met; K0 is not a root")
    return fo


def first_order_numeric(bp: BifurcationPoint, params: PhysParams, ss: SteadyState, d0: float,
                        n_grid: int = 2048) -> RadialProfile:
    """Numerical first-order stress from the reduced radial problem.

    Z L1[s] + (P K0 m0/D - 1) s = P m0 r / D with s(R0) = 0; used to cross-check
    the closed form.  The kinematic condition K0 s'(R0) = 1 is reported as
    the extra boundary residual.
    """
    beta = params.P * bp.k0 * ss.m0 / d0 - 1.0
    prob = RadialBVP(mode=1, coeff_a=params.Z, coeff_b=beta, rhs=lambda r: params.P * ss.m0 * r / d0,
                     bc_right=("dirichlet", 0.0), r0=ss.r0)
    return solve_radial_bvp(prob, extra_bc=("neumann", 1.0 / bp.k0), n_grid=n_grid)
