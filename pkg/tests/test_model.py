import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from motility_bif.errors import DomainError, InvalidDiffusionError, NoSteadyStateError, PoleError
from motility_bif.model import (DiffusionModel, PhysParams, SteadyState, diffusion_at_steady, r0_closed_form,
                                solve_steady_state, steady_residual)


@pytest.mark.parametrize("P", np.linspace(0.01, 0.24, 7))
def test_steady_closed_form(P):
    ss = solve_steady_state(PhysParams(P, 1.0))
    assert ss.r0 == pytest.approx(r0_closed_form(P), abs=1e-12)
    assert ss.m0 * math.pi * ss.r0**2 == pytest.approx(1.0, rel=1e-14)
    assert ss.sigma0 == pytest.approx(P * ss.m0)


def test_steady_reference_value():
    assert solve_steady_state(PhysParams(0.1, 1.25)).r0 == pytest.approx(0.531445, abs=5e-6)


@given(st.floats(0.01, 0.24), st.floats(0.0, 0.1))
@settings(max_examples=40, deadline=None)
def test_steady_root_with_tension(P, gamma):
    try:
        ss = solve_steady_state(PhysParams(P, 1.0, gamma))
    except NoSteadyStateError:
        return
    assert abs(steady_residual(ss.r0, PhysParams(P, 1.0, gamma))) < 1e-12
    # the largest root: no sign change to the right
    Rs = np.linspace(ss.r0 * (1 + 1e-6), 2 / math.sqrt(math.pi), 200)
    vals = [steady_residual(R, PhysParams(P, 1.0, gamma)) for R in Rs]
    assert all(v < 0 for v in vals)


def test_tension_shrinks_cell():
    r = [solve_steady_state(PhysParams(0.1, 1.0, g)).r0 for g in (0.0, 0.02, 0.05)]
    assert r[0] > r[1] > r[2]


def test_no_steady_state_for_large_tension():
    with pytest.raises(NoSteadyStateError):
        solve_steady_state(PhysParams(0.2, 1.0, 0.5))


@pytest.mark.parametrize("kw", [dict(P=0.25, Z=1), dict(P=0.0, Z=1), dict(P=0.1, Z=0), dict(P=0.1, Z=1, gamma=-1),
                                dict(P=math.nan, Z=1), dict(P=0.1, Z=math.inf)])
def test_params_validation(kw):
    with pytest.raises(DomainError):
        PhysParams(**kw)


@given(st.floats(0.1, 8.0), st.floats(0.0, 1.0))
@settings(max_examples=30)
def test_vdw_derivatives_fd(m, ea):
    model = DiffusionModel.van_der_waals(10.0, ea)
    h = 1e-5
    d = model.derivatives(m)
    for k in range(4):
        fd = (model.derivatives(m + h)[k] - model.derivatives(m - h)[k]) / (2 * h)
        assert d[k + 1] == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_vdw_at_zero_and_constant():
    assert DiffusionModel.van_der_waals(10.0, 0.63)(0.0) == pytest.approx(1.0)
    c = DiffusionModel.constant(2.5)
    assert c.derivatives(3.0) == (2.5, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(InvalidDiffusionError):
        DiffusionModel.constant(0.0)


def test_diffusion_at_steady_errors():
    ss = SteadyState(r0=0.5, m0=1.2, sigma0=0.12)
    with pytest.raises(PoleError):
        diffusion_at_steady(DiffusionModel.van_der_waals(1.0, 0.0), ss)
    with pytest.raises(InvalidDiffusionError):
        diffusion_at_steady(DiffusionModel.van_der_waals(10.0, 5.0), ss)
    bad = DiffusionModel.custom(lambda m: (1.0, math.nan, 0.0, 0.0, 0.0))
    with pytest.raises(InvalidDiffusionError):
        diffusion_at_steady(bad, ss)
    with pytest.raises(InvalidDiffusionError):
        diffusion_at_steady(DiffusionModel.custom(lambda m: (1.0, 0.0)), ss)


def test_descriptor():
    assert DiffusionModel.van_der_waals(10, 0.3).descriptor == "van_der_waals(10, 0.3)"
    assert DiffusionModel.constant(2).descriptor == "constant(2)"
