import pytest

from motility_bif.errors import DomainError
from motility_bif.expansion import SecondOrderProfiles, ThirdOrderSource
from motility_bif.oracle import convergence_order, oracle_k2, third_order_profiles


def _args(pl):
    return pl.fo, pl.so, pl.ts, pl.bp, pl.params, pl.ss, pl.dtuple


def test_reduced_oracle_matches_quadrature(pipeline):
    res = oracle_k2(*_args(pipeline))
    assert res.k2 == pytest.approx(pipeline.report.k2, rel=1e-5)
    assert res.change < 1e-4 * abs(res.k2)
    assert float(res) == res.k2
    # Richardson sharpens the agreement
    assert abs(res.richardson - pipeline.report.k2) < abs(res.k2 - pipeline.report.k2)


def test_coupled_oracle_matches_quadrature(pipeline):
    res = oracle_k2(*_args(pipeline), system="coupled")
    assert res.k2 == pytest.approx(pipeline.report.k2, rel=1e-5)


@pytest.mark.parametrize("system", ["reduced", "coupled"])
def test_convergence_order(pipeline, system):
    order, vals = convergence_order(*_args(pipeline), system=system)
    assert 1.7 < order < 2.3, vals


def test_zero_sources_give_zero_k2(pipeline):
    nodes = pipeline.so.nodes
    res = oracle_k2(pipeline.fo, SecondOrderProfiles.zeros(nodes), ThirdOrderSource.zeros(nodes), pipeline.bp,
                    pipeline.params, pipeline.ss, pipeline.dtuple)
    assert res.k2 == 0.0


def test_third_order_profiles_boundary(pipeline):
    r, s31, m31, k2 = third_order_profiles(*_args(pipeline), n_grid=1024)
    phys = pipeline.so.physical(pipeline.dtuple[0], pipeline.dtuple[1])
    rb = phys["rho20"] + 0.5 * phys["rho22"]
    assert s31[0] == pytest.approx(0.0, abs=1e-12)
    assert s31[-1] == pytest.approx(-rb / pipeline.bp.k0, rel=1e-10)
    assert k2 == pytest.approx(pipeline.report.k2, rel=1e-4)


def test_oracle_input_validation(pipeline):
    with pytest.raises(DomainError):
        oracle_k2(*_args(pipeline), n_grid=100)
    with pytest.raises(DomainError):
        oracle_k2(*_args(pipeline), system="spectral")
