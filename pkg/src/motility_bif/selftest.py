"""Quick invariant checks run by ``motility-bif selftest``."""
from __future__ import annotations

import numpy as np

from .expansion import run_pipeline
from .model import DiffusionModel, PhysParams
from .numerics import bessel_eval, quad
from .oned import OneDConfig, oned_oracle_k2, oned_pipeline
from .oracle import oracle_k2


def _check(name, passed, detail):
    return name, bool(passed), detail


def run_selftest():
    out = []
    xs = np.geomspace(0.05, 50, 200)
    err = max(abs(bessel_eval(x).wronskian - 2 / (np.pi * x)) * x for x in xs)
    out.append(_check("wronskian", err < 1e-12, f"max scaled error {err:.2e}"))

    f = np.cos
    gap = abs(quad(f, 0, 1) + quad(f, 1, 2.5) - quad(f, 0, 2.5))
    out.append(_check("quad additivity", gap < 1e-12, f"gap {gap:.2e}"))

    params = PhysParams(0.1, 1.25, 0.05)
    k0s = [run_pipeline(params, DiffusionModel.constant(c), intervals=1024).bp.k0 / c for c in (0.5, 2.0)]
    spread = abs(k0s[0] - k0s[1]) / abs(k0s[0])
    out.append(_check("K0 scaling with constant D", spread < 1e-10, f"relative spread {spread:.2e}"))

    pl = run_pipeline(params, DiffusionModel.van_der_waals(10.0, 0.3), intervals=1024)
    rep = pl.report
    gap = abs(rep.k2 - rep.k2_decomposition) / abs(rep.k2)
    out.append(_check("dual-path K2", gap < 1e-6, f"relative gap {gap:.2e}"))

    orc = oracle_k2(pl.fo, pl.so, pl.ts, pl.bp, pl.params, pl.ss, pl.dtuple, n_grid=1024)
    gap = abs(orc.k2 - rep.k2) / abs(rep.k2)
    out.append(_check("2D oracle agreement", gap < 1e-5, f"relative gap {gap:.2e}"))

    p1 = oned_pipeline(OneDConfig(PhysParams(0.1, 1.25), DiffusionModel.van_der_waals(10.0, 0.3), intervals=2048))
    gap = abs(oned_oracle_k2(p1, 4096) - p1.report.k2) / abs(p1.report.k2)
    out.append(_check("1D oracle agreement", gap < 1e-5, f"relative gap {gap:.2e}"))
    return out
