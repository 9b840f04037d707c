"""Independent 1D traveling-wave solver: the full nonlinear problem by collocation.

Unknowns on y in [-1/2, 1/2] (x = L y): stress, its x-derivative, myosin and the
cumulative mass; free parameters are the length L and the Peclet number K.
"""
import numpy as np
from scipy.integrate import solve_bvp
from scipy.optimize import brentq


def solve_traveling_wave(V, P, Z, diffusion, nodes=401, tol=1e-11):
    """Return (K, L, status) for a traveling wave with speed V."""
    L0 = 0.5 + np.sqrt(0.25 - P)
    m0, ell = 1 / L0, L0 / 2
    d0 = diffusion(m0)
    a = brentq(lambda t: np.tan(t) / t - 1 - Z * t * t / ell**2, 1e-6, np.pi / 2 - 1e-9)
    K0 = d0 / (P * m0) * (1 + Z * a * a / ell**2)
    b = a / ell
    y = np.linspace(-0.5, 0.5, nodes)
    x = L0 * y
    c = P * m0 / (P * K0 * m0 - d0)
    amp = -ell * c / np.sin(a)
    s1 = c * x + amp * np.sin(b * x)
    ds1 = c + amp * b * np.cos(b * x)
    m1 = m0 * K0 / d0 * s1 - m0 / d0 * x
    guess = np.vstack([P * m0 + V * s1, V * ds1, m0 + V * m1, y + 0.5])

    def rhs(_, Y, p):
        L, K = p
        sg, s, m, _mu = Y
        return np.vstack([L * s, L * (sg - P * m) / Z, L * m * (K * s - V) / diffusion(m), L * m])

    def bc(ya, yb, p):
        L, K = p
        return np.array([ya[0] - (1 - L), yb[0] - (1 - L), ya[1] - V / K, yb[1] - V / K, ya[3], yb[3] - 1])

    sol = solve_bvp(rhs, bc, y, guess, p=[L0, K0], tol=tol, max_nodes=200000)
    return sol.p[1], sol.p[0], sol.status, K0


def brute_force_k2(P, Z, diffusion, speeds=(0.02, 0.04)):
    """Richardson-extrapolated (K - K0)/V^2 from two nonlinear solves."""
    vals = []
    for V in speeds:
        K, _, status, K0 = solve_traveling_wave(V, P, Z, diffusion)
        if status != 0:
            raise RuntimeError(f"solve_bvp failed at V={V}")
        vals.append((K - K0) / V**2)
    q = (speeds[1] / speeds[0]) ** 2
    return (q * vals[0] - vals[1]) / (q - 1)
