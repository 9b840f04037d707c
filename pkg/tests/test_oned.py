import math

import numpy as np
import pytest

from motility_bif.errors import DomainError, NoTransitionError
from motility_bif.model import DiffusionModel, PhysParams
from motility_bif.oned import (OneDConfig, critical_ea, oned_k0, oned_k2, oned_oracle_k2, oned_pipeline,
                               oned_residual, oned_steady_state)
from tw1d import brute_force_k2

PARAMS = PhysParams(0.1, 1.25)

# frozen from the 1D pipeline after agreement with the two independent oracles
K2_FROZEN = {0.0: 2.3170157896, 0.3: 2.9266934869, 0.6: -0.0401387644, 0.63: -1.4010042276}
EA_STAR_FROZEN = 0.59893903845


def cfg(ea, intervals=4096):
    return OneDConfig(PARAMS, DiffusionModel.van_der_waals(10.0, ea), intervals=intervals)


def test_steady_length():
    ss = oned_steady_state(PARAMS)
    L = 2 * ss.r0
    assert L * L - L + PARAMS.P == pytest.approx(0.0, abs=1e-15)
    assert ss.m0 * L == pytest.approx(1.0)


def test_k0_root_and_range():
    ss = oned_steady_state(PARAMS)
    bp = oned_k0(PARAMS, ss, 1.0)
    assert 0 < bp.alpha < math.pi / 2
    assert abs(oned_residual(bp.k0, PARAMS, ss, 1.0)) < 1e-9


@pytest.mark.parametrize("ea", sorted(K2_FROZEN))
def test_k2_regression(ea):
    assert oned_k2(cfg(ea)).k2 == pytest.approx(K2_FROZEN[ea], rel=1e-7, abs=2e-9)


@pytest.mark.parametrize("ea", [0.0, 0.3, 0.63])
def test_k2_against_nonlinear_solver(ea):
    model = DiffusionModel.van_der_waals(10.0, ea)
    k2 = oned_k2(cfg(ea)).k2
    assert brute_force_k2(PARAMS.P, PARAMS.Z, model) == pytest.approx(k2, rel=2e-5, abs=1e-5)


@pytest.mark.parametrize("ea", [0.0, 0.2, 0.45, 0.6, 0.8])
def test_oracle_agreement(ea):
    pl = oned_pipeline(cfg(ea))
    assert oned_oracle_k2(pl, 8192) == pytest.approx(pl.report.k2, rel=1e-5)


def test_oracle_profile_boundary():
    pl = oned_pipeline(cfg(0.3))
    x, s3, k2 = oned_oracle_k2(pl, 2048, profiles=True)
    assert s3[0] == 0.0
    _, _, shift = pl.so.physical(pl.dtuple[0], pl.dtuple[1])
    assert s3[-1] == pytest.approx(-shift / pl.bp.k0, rel=1e-10)


def test_coefficient_signs_and_invariance():
    r1, r2 = oned_k2(cfg(0.1)), oned_k2(cfg(0.9))
    assert r1.a1 > 0 and r1.a2 < 0 and r1.a3 > 0 and r1.a4 > 0
    for a, b in zip((r1.a1, r1.a2, r1.a3, r1.a4), (r2.a1, r2.a2, r2.a3, r2.a4)):
        assert a == pytest.approx(b, rel=1e-6)


def test_sign_structure_stable_under_refinement():
    signs = []
    for n in (1024, 2048, 8192):
        r = oned_k2(cfg(0.3, n))
        signs.append(tuple(np.sign((r.a1, r.a2, r.a3, r.a4))))
    assert len(set(signs)) == 1


def test_constant_diffusion_scaling():
    vals = [oned_k2(OneDConfig(PARAMS, DiffusionModel.constant(c))).k2 * c for c in (0.5, 1.0, 2.0)]
    assert vals[0] == pytest.approx(vals[1], rel=1e-7) and vals[2] == pytest.approx(vals[1], rel=1e-7)


def test_critical_ea():
    e = critical_ea(cfg(0.0))
    assert e == pytest.approx(EA_STAR_FROZEN, abs=1e-6)
    assert abs(oned_k2(cfg(e)).k2) <= 1e-9
    assert oned_k2(cfg(e - 0.01)).verdict == "direct_pitchfork"
    assert oned_k2(cfg(e + 0.01)).verdict == "inverse_pitchfork"


def test_critical_ea_no_transition():
    with pytest.raises(NoTransitionError) as info:
        critical_ea(cfg(0.0), bracket=(0.0, 0.5))
    k_lo, k_hi = info.value.endpoint_values
    assert k_lo > 0 and k_hi > 0


def test_critical_ea_needs_vdw():
    with pytest.raises(DomainError):
        critical_ea(OneDConfig(PARAMS, DiffusionModel.constant(1.0)))


def test_inverse_regime_has_decreasing_diffusion():
    ss = oned_steady_state(PARAMS)
    assert DiffusionModel.van_der_waals(10.0, 0.63).derivatives(ss.m0)[1] < 0
    # with A1, A3, A4 > 0 and A2 < 0 a negative K2 needs D'(m0) < 0
    for ea in np.linspace(0.0, 1.0, 11):
        rep = oned_k2(cfg(ea, 1024))
        if rep.k2 < 0:
            assert DiffusionModel.van_der_waals(10.0, ea).derivatives(ss.m0)[1] < 0
