import math

import numpy as np
import pytest
from scipy import special

from motility_bif.errors import SubcriticalError
from motility_bif.linearization import (alpha_of, bifurcation_residual, first_order_numeric, first_order_profiles,
                                        k_of_alpha, solve_k0, transversality_value)
from motility_bif.model import DiffusionModel, PhysParams, diffusion_at_steady, solve_steady_state

PARAMS = PhysParams(0.1, 1.25, 0.0)


def setup(params=PARAMS, d=None):
    ss = solve_steady_state(params)
    d0 = diffusion_at_steady(d or DiffusionModel.constant(1.0), ss)[0]
    return ss, d0, solve_k0(params, ss, d0)


def test_k0_is_root():
    ss, d0, bp = setup()
    assert abs(bp.residual) < 1e-10
    assert bp.alpha < special.jnp_zeros(1, 2)[1]
    assert k_of_alpha(bp.alpha, PARAMS, ss, d0) == pytest.approx(bp.k0, rel=1e-13)


def test_k0_is_first_root():
    # scan the residual directly on K below K0: no sign change between poles
    ss, d0, bp = setup()
    ks = np.linspace(k_of_alpha(0.01, PARAMS, ss, d0), bp.k0 * (1 - 1e-9), 4000)
    vals = np.array([bifurcation_residual(k, PARAMS, ss, d0) for k in ks])
    jumps = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    alphas = [alpha_of(ks[i], PARAMS, ss, d0) for i in jumps]
    j1p1 = special.jnp_zeros(1, 1)[0]
    # only the pole at the first zero of J1' may produce a sign flip below K0
    assert all(abs(a - j1p1) < 1e-2 for a in alphas)


@pytest.mark.parametrize("c", [0.5, 2.0, 4.0])
def test_k0_scales_with_constant_diffusion(c):
    _, _, b1 = setup()
    _, _, bc = setup(d=DiffusionModel.constant(c))
    assert bc.k0 / c == pytest.approx(b1.k0, rel=1e-10)
    assert bc.alpha == pytest.approx(b1.alpha, rel=1e-12)


def test_subcritical_alpha():
    ss = solve_steady_state(PARAMS)
    with pytest.raises(SubcriticalError):
        alpha_of(0.5, PARAMS, ss, 1.0)


def test_transversality_nonzero_and_quadrature():
    _, _, bp = setup()
    assert abs(bp.transversality) > 1e-8
    coarse = transversality_value(bp.alpha, tol=1e-8)
    assert coarse == pytest.approx(bp.transversality, rel=1e-7)


def _first_order_residuals(fo, params, ss, bp, r):
    P, Z, m0 = params.P, params.Z, ss.m0

    def L1(p):
        return p(r, 2) + p(r, 1) / r - p(r) / r**2

    s, m = fo.sigma11, fo.m11
    e1 = Z * L1(s) - s(r) + P * m(r)
    e2 = fo.d0 * L1(m) - bp.k0 * m0 * L1(s)
    return e1, e2


@pytest.mark.parametrize("gamma", [0.0, 0.05])
def test_first_order_closed_form_residuals(gamma):
    params = PhysParams(0.1, 1.25, gamma)
    ss = solve_steady_state(params)
    d0 = diffusion_at_steady(DiffusionModel.van_der_waals(10, 0.3), ss)[0]
    bp = solve_k0(params, ss, d0)
    fo = first_order_profiles(bp, params, ss, d0)
    r = np.linspace(0, ss.r0, 1025)[1:]
    e1, e2 = _first_order_residuals(fo, params, ss, bp, r)
    assert np.max(np.abs(e1)) < 1e-8 and np.max(np.abs(e2)) < 1e-8
    R0 = ss.r0
    assert abs(float(fo.sigma11(R0))) < 1e-8
    assert abs(bp.k0 * float(fo.sigma11(R0, 1)) - 1) < 1e-8
    assert abs(float(fo.m11(R0, 1))) < 1e-8
    assert abs(float(fo.sigma11(0.0))) < 1e-14 and abs(float(fo.m11(0.0))) < 1e-14


def test_first_order_numeric_matches_closed_form():
    ss, d0, bp = setup()
    fo = first_order_profiles(bp, PARAMS, ss, d0)
    num = first_order_numeric(bp, PARAMS, ss, d0)
    assert np.max(np.abs(num.values - fo.sigma11.on(num.nodes))) < 1e-7
    assert abs(num.info["extra_residual"]) < 1e-6


def test_hatted_profiles_are_diffusion_free():
    ss = solve_steady_state(PARAMS)
    out = []
    for ea in (0.2, 0.8):
        d0 = diffusion_at_steady(DiffusionModel.van_der_waals(10, ea), ss)[0]
        bp = solve_k0(PARAMS, ss, d0)
        out.append(first_order_profiles(bp, PARAMS, ss, d0))
    r = np.linspace(0, ss.r0, 101)
    assert np.allclose(out[0].sigma11_hat(r), out[1].sigma11_hat(r), rtol=1e-10, atol=1e-13)
    assert np.allclose(out[0].m11_hat(r), out[1].m11_hat(r), rtol=1e-10, atol=1e-13)
