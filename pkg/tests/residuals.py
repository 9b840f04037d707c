"""Evaluate the full nonlinear traveling-wave problem on the truncated expansion.

The fields are assembled through third order in V:
    m = m0 + V m11 cos t + V^2 (m20 + m22 cos 2t) + V^3 m31 cos t   (same for the stress)
on the perturbed disk R(t) = R0 + V^2 (rho20 + rho22 cos 2t) with K = K0 + V^2 K2.
Fourier projections of every residual are returned.
"""
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline

from motility_bif.oracle import third_order_profiles


class Expansion:
    def __init__(self, pl, n_grid=2048):
        self.pl = pl
        d0, d1 = pl.dtuple[0], pl.dtuple[1]
        r, s31, m31, k2 = third_order_profiles(pl.fo, pl.so, pl.ts, pl.bp, pl.params, pl.ss, pl.dtuple, n_grid)
        self.k2 = k2
        phys = pl.so.physical(d0, d1)
        self.rho0, self.rho2 = phys["rho20"], phys["rho22"]
        s31s, m31s = CubicSpline(r, s31), CubicSpline(r, m31)
        P, m0 = pl.params.P, pl.ss.m0
        # (base, mode-1 first order, mode-0 second, mode-2 second, mode-1 third)
        self.parts = {
            "m": (m0, pl.fo.m11, phys["m20"], phys["m22"], m31s),
            "s": (P * m0, pl.fo.sigma11, phys["s20"], phys["s22"], s31s),
        }

    def fields(self, V, r, t):
        out = {}
        for nm, (base, f1, f20, f22, f3) in self.parts.items():
            def comp(dr, dt):
                def trig(n):
                    return [np.cos(n * t), -n * np.sin(n * t), -n * n * np.cos(n * t)][dt]
                v = V * f1(r, dr) * trig(1) + V**2 * (f20(r, dr) * trig(0) + f22(r, dr) * trig(2))
                v = v + V**3 * f3(r, dr) * trig(1)
                return v + base if dr == 0 and dt == 0 else v
            out[nm] = comp(0, 0)
            out[nm + "_r"], out[nm + "_t"] = comp(1, 0), comp(0, 1)
            out[nm + "_rr"], out[nm + "_tt"] = comp(2, 0), comp(0, 2)
        return out


def residuals(ex, V, M=64):
    pl = ex.pl
    P, Z, gamma = pl.params.P, pl.params.Z, pl.params.gamma
    R0 = pl.ss.r0
    K = pl.bp.k0 + V * V * ex.k2
    dm = pl.diffusion
    th = 2 * np.pi * np.arange(M) / M
    ri = np.linspace(0.05, 0.95, 19) * R0
    RR, TT = np.meshgrid(ri, th, indexing="ij")
    F = ex.fields(V, RR, TT)

    def lap(u):
        return F[u + "_rr"] + F[u + "_r"] / RR + F[u + "_tt"] / RR**2

    def grad(u, v):
        return F[u + "_r"] * F[v + "_r"] + F[u + "_t"] * F[v + "_t"] / RR**2

    m = F["m"]
    dd = dm.derivatives(m)
    e2 = (dd[0] * lap("m") + dd[1] * grad("m", "m") - K * (grad("m", "s") + m * lap("s"))
          + V * (np.cos(TT) * F["m_r"] - np.sin(TT) / RR * F["m_t"]))
    e1 = Z * lap("s") - F["s"] + P * m

    def proj(X, n, axis=-1):
        return (2 if n else 1) / M * (X * np.cos(n * th)).sum(axis=axis)

    res = {}
    for n in (0, 1, 2):
        res[f"E1_{n}"] = float(np.abs(proj(e1, n)).max())
        res[f"E2_{n}"] = float(np.abs(proj(e2, n)).max())
    Rb = R0 + V * V * (ex.rho0 + ex.rho2 * np.cos(2 * th))
    Rp = -2 * V * V * ex.rho2 * np.sin(2 * th)
    Rpp = -4 * V * V * ex.rho2 * np.cos(2 * th)
    F = ex.fields(V, Rb, th)

    def dn(u):  # unnormalized normal derivative; the normalization is 1 + O(V^4)
        return F[u + "_r"] - Rp / Rb**2 * F[u + "_t"]

    curv = (Rb**2 + 2 * Rp**2 - Rb * Rpp) / (Rb**2 + Rp**2) ** 1.5
    area = np.pi * np.mean(Rb**2)
    b1 = dn("m")
    b2 = F["s"] - (-gamma * curv + 1 - area)
    b3 = K * dn("s") - V * (np.cos(th) + Rp / Rb * np.sin(th))
    for n in (0, 1, 2):
        res[f"B1_{n}"] = abs(float(proj(b1, n)))
        res[f"B2_{n}"] = abs(float(proj(b2, n)))
        res[f"B3_{n}"] = abs(float(proj(b3, n)))
    xs, ws = leggauss(60)
    tot = 0.0
    for j, t in enumerate(th):
        rr, ww = 0.5 * Rb[j] * (xs + 1), 0.5 * Rb[j] * ws
        tot += float((ex.fields(V, rr, t * np.ones_like(rr))["m"] * rr * ww).sum()) * 2 * np.pi / M
    res["mass"] = abs(tot - 1)
    return res
