"""Numerical kernel: order-one Bessel functions, root bracketing, quadrature,
radial profiles and a finite-difference solver for radial mode equations.

Bessel values, root polishing and adaptive quadrature are delegated to
scipy; the radial BVP discretization is local.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg
from scipy import integrate, optimize, special
from scipy.interpolate import CubicSpline

from .errors import BracketError, DomainError, EvaluationError, SingularSystemError

DEFAULT_GRID = 2048
_EPS = np.finfo(float).eps


# ---------------------------------------------------------------- Bessel


@dataclass(frozen=True)
class BesselPair:
    x: float
    j1: float
    j1p: float
    y1: float
    y1p: float

    @property
    def wronskian(self):
        return self.j1 * self.y1p - self.j1p * self.y1


def bessel_eval(x: float) -> BesselPair:
    """J1, J1', Y1, Y1' at a positive argument."""
    x = float(x)
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"Bessel argument must be positive and finite, got {x!r}")
    j0, j1 = special.j0(x), special.j1(x)
    y0, y1 = special.y0(x), special.y1(x)
    # Z1' = Z0 - Z1/x for both kinds
    return BesselPair(x, float(j1), float(j0 - j1 / x), float(y1), float(y0 - y1 / x))


def j1_deriv(x, order=0):
    """Vectorized d^order/dx^order J1(x), order 0..4."""
    x = np.asarray(x, dtype=float)
    if order == 0:
        return special.j1(x)
    return special.jvp(1, x, order)


def y1_deriv(x, order=0):
    x = np.asarray(x, dtype=float)
    if order == 0:
        return special.y1(x)
    return special.yvp(1, x, order)


def j1p_zeros(count):
    """First `count` positive zeros of J1'."""
    return special.jnp_zeros(1, count)


# ---------------------------------------------------------- root, quad


def _checked(f, what):
    def g(x):
        v = f(x)
        try:
            v = float(v)
        except (TypeError, ValueError) as exc:
            raise EvaluationError(f"{what} returned a non-scalar at x={x!r}") from exc
        if not math.isfinite(v):
            raise EvaluationError(f"{what} returned non-finite value {v} at x={x!r}")
        return v

    return g


def find_root(f: Callable[[float], float], bracket, tol: float = 1e-12) -> float:
    """Bracketed root (Brent's method). The bracket must straddle a sign change."""
    lo, hi = float(bracket[0]), float(bracket[1])
    if lo > hi:
        lo, hi = hi, lo
    g = _checked(f, "root function")
    flo, fhi = g(lo), g(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise BracketError(f"no sign change on [{lo}, {hi}]: f = {flo:.3e}, {fhi:.3e}")
    return float(optimize.brentq(g, lo, hi, xtol=tol, rtol=4 * _EPS, maxiter=1000))


def quad(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, points=None) -> float:
    """Adaptive Gauss-Kronrod integral with error <= tol*max(1, |result|)."""
    a, b = float(a), float(b)
    if b < a:
        raise DomainError(f"quad requires a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0
    g = _checked(f, "integrand")
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(g, a, b, epsabs=tol, epsrel=tol, limit=1000, points=points)
        except integrate.IntegrationWarning:
            # fall back to the best estimate; the tolerance may be below roundoff
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(g, a, b, epsabs=tol, epsrel=tol, limit=1000, points=points)
    return float(val)


# ------------------------------------------------------------ profiles


@dataclass(frozen=True)
class RadialGrid:
    r0: float
    nodes: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.nodes, dtype=float)
        if n.size < 64:
            raise DomainError("radial grid needs at least 64 nodes")
        if n[0] != 0.0 or not np.isclose(n[-1], self.r0, rtol=0, atol=1e-14 * max(1.0, self.r0)):
            raise DomainError("radial grid must span [0, r0]")
        if np.any(np.diff(n) <= 0):
            raise DomainError("radial grid nodes must increase strictly")
        n.setflags(write=False)
        object.__setattr__(self, "nodes", n)

    @classmethod
    def uniform(cls, r0, intervals=DEFAULT_GRID):
        return cls(float(r0), np.linspace(0.0, r0, int(intervals) + 1))

    @property
    def spacing(self):
        return self.nodes[1] - self.nodes[0]


class RadialProfile:
    """A function of r on [0, r0] with derivative queries.

    Either analytic (a callable ``func(r, order)``) or tabulated on a grid and
    interpolated by cubic splines.  An optional tabulated second derivative
    (e.g. recovered from the governing ODE) is interpolated separately.
    """

    def __init__(self, r0, nodes, values, func=None, d2=None, info=None):
        self.r0 = float(r0)
        self.nodes = np.asarray(nodes, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self._func = func
        self._d2 = None if d2 is None else np.asarray(d2, dtype=float)
        self.info = dict(info or {})
        if func is None:
            self._spline = CubicSpline(self.nodes, self.values)
            self._spline_d2 = None if d2 is None else CubicSpline(self.nodes, self._d2)

    @classmethod
    def analytic(cls, r0, func, intervals=DEFAULT_GRID):
        nodes = np.linspace(0.0, r0, int(intervals) + 1)
        return cls(r0, nodes, func(nodes, 0), func=func)

    @classmethod
    def from_grid(cls, nodes, values, d2=None, info=None):
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes[-1], nodes, values, d2=d2, info=info)

    @classmethod
    def zero(cls, r0, intervals=DEFAULT_GRID):
        return cls.analytic(r0, lambda r, order=0: np.zeros_like(np.asarray(r, dtype=float)), intervals)

    @property
    def is_analytic(self):
        return self._func is not None

    @property
    def grid(self):
        return RadialGrid(self.r0, self.nodes)

    def __call__(self, r, order=0):
        r = np.asarray(r, dtype=float)
        if self._func is not None:
            return self._func(r, order)
        if order <= 1 or self._spline_d2 is None:
            return self._spline(r, order)
        return self._spline_d2(r, order - 2)

    def on(self, nodes, order=0):
        return np.asarray(self(nodes, order), dtype=float)

    def scaled(self, c):
        c = float(c)
        if self._func is not None:
            f = self._func
            return RadialProfile(self.r0, self.nodes, c * self.values, func=lambda r, order=0: c * f(r, order))
        d2 = None if self._d2 is None else c * self._d2
        return RadialProfile(self.r0, self.nodes, c * self.values, d2=d2)

    def max_abs(self):
        return float(np.max(np.abs(self.values)))


def linear_combination(profiles, coeffs):
    """Sum c_i * p_i for profiles sharing one kind (all analytic or one grid)."""
    profiles = list(profiles)
    coeffs = [float(c) for c in coeffs]
    if all(p.is_analytic for p in profiles):
        funcs = [p._func for p in profiles]

        def func(r, order=0):
            return sum(c * f(r, order) for c, f in zip(coeffs, funcs))

        return RadialProfile(profiles[0].r0, profiles[0].nodes, func(profiles[0].nodes), func=func)
    nodes = profiles[0].nodes
    for p in profiles:
        if p.is_analytic or p.nodes.shape != nodes.shape or not np.array_equal(p.nodes, nodes):
            raise DomainError("grid profiles must share nodes to be combined")
    values = sum(c * p.values for c, p in zip(coeffs, profiles))
    if all(p._d2 is not None for p in profiles):
        d2 = sum(c * p._d2 for c, p in zip(coeffs, profiles))
    else:
        d2 = None
    return RadialProfile.from_grid(nodes, values, d2=d2)


def cumulative_integral(nodes, values):
    """Running integral from nodes[0] of the cubic-spline interpolant."""
    anti = CubicSpline(nodes, values).antiderivative()
    return anti(nodes) - anti(nodes[0])


def grid_integral(nodes, values):
    return float(CubicSpline(nodes, values).integrate(nodes[0], nodes[-1]))


# --------------------------------------------------------- radial BVP


@dataclass(frozen=True)
class RadialBVP:
    """a*(u'' + (dim-1)u'/r - n^2 u/r^2) + b*u = rhs on [0, r0].

    Left end: regularity (u(0)=0 for n >= 1, u'(0)=0 for n = 0).  For
    dim=1 the n^2 term is dropped and `mode` only selects parity.
    bc_right is ("dirichlet", value) or ("neumann", value).
    """

    mode: int
    coeff_a: float
    coeff_b: float
    rhs: object
    bc_right: tuple
    r0: float
    dim: int = 2

    def __post_init__(self):
        if self.coeff_a == 0:
            raise DomainError("coeff_a must be nonzero")
        if self.mode < 0:
            raise DomainError("mode must be nonnegative")
        if self.dim not in (1, 2):
            raise DomainError("dim must be 1 or 2")
        kind = str(self.bc_right[0]).lower()
        if kind not in ("dirichlet", "neumann"):
            raise DomainError(f"unknown right boundary condition {self.bc_right[0]!r}")
        if not self.r0 > 0:
            raise DomainError("r0 must be positive")

    def rhs_on(self, r):
        rhs = self.rhs
        if rhs is None:
            return np.zeros_like(r)
        if isinstance(rhs, RadialProfile):
            return rhs.on(r)
        if callable(rhs):
            return np.asarray(rhs(r), dtype=float) * np.ones_like(r)
        return np.full_like(r, float(rhs))


def _assemble(problem: RadialBVP, n):
    """Sparse matrix and right-hand side on a uniform grid of n intervals."""
    a, b = float(problem.coeff_a), float(problem.coeff_b)
    r = np.linspace(0.0, problem.r0, n + 1)
    h = r[1]
    f = problem.rhs_on(r).astype(float).copy()
    nn = problem.mode * problem.mode
    row_scale = abs(a) / h**2  # keeps boundary rows commensurate with the stencil rows
    main = np.empty(n + 1)
    lower = np.zeros(n)  # A[i, i-1]
    upper = np.zeros(n)  # A[i, i+1]
    ri = r[1:n]
    if problem.dim == 2:
        lo = a * (1 / h**2 - 1 / (2 * h * ri))
        up = a * (1 / h**2 + 1 / (2 * h * ri))
        main[1:n] = a * (-2 / h**2 - nn / ri**2) + b
    else:
        lo = np.full(n - 1, a / h**2)
        up = np.full(n - 1, a / h**2)
        main[1:n] = -2 * a / h**2 + b
    lower[0 : n - 1] = lo
    upper[1:n] = up
    # regularity row at r = 0
    if problem.mode == 0:
        coef = 4 * a / h**2 if problem.dim == 2 else 2 * a / h**2
        main[0] = -coef + b
        upper[0] = coef
    else:
        main[0] = row_scale
        upper[0] = 0.0
        f[0] = 0.0
    kind, val = str(problem.bc_right[0]).lower(), float(problem.bc_right[1])
    if kind == "dirichlet":
        main[n] = row_scale
        lower[n - 1] = 0.0
        f[n] = row_scale * val
    else:
        rn = r[n]
        if problem.dim == 2:
            lo_n = a * (1 / h**2 - 1 / (2 * h * rn))
            up_n = a * (1 / h**2 + 1 / (2 * h * rn))
            main[n] = a * (-2 / h**2 - nn / rn**2) + b
        else:
            lo_n = up_n = a / h**2
            main[n] = -2 * a / h**2 + b
        # ghost node u[n+1] = u[n-1] + 2 h val
        lower[n - 1] = lo_n + up_n
        f[n] -= up_n * 2 * h * val
    mat = sparse.diags([lower, main, upper], [-1, 0, 1], format="csc")
    return r, mat, f


def _smallest_singular_value(lu, size, iters=8):
    rng_vec = np.cos(np.arange(size) * 0.7) + 0.1  # fixed start, no randomness
    x = rng_vec / np.linalg.norm(rng_vec)
    s = np.inf
    for _ in range(iters):
        y = lu.solve(x)
        z = lu.solve(y, trans="T")
        nz = np.linalg.norm(z)
        if not np.isfinite(nz) or nz == 0:
            return 0.0
        s = 1.0 / math.sqrt(nz)
        x = z / nz
    return s


def _solve_once(problem, n, singular_rtol=1e-5):
    r, mat, f = _assemble(problem, n)
    try:
        lu = sparse_linalg.splu(mat)
    except RuntimeError as exc:
        raise SingularSystemError(f"singular radial system ({exc}); smallest singular value 0", 0.0) from exc
    smin = _smallest_singular_value(lu, n + 1)
    # away from resonance smin tends to the operator's smallest |eigenvalue|, which is O(|a|/r0^2 + |b|)
    # independently of the grid; at resonance it decays like h^2
    scale = abs(problem.coeff_a) / problem.r0**2 + abs(problem.coeff_b)
    if smin <= singular_rtol * scale:
        raise SingularSystemError(
            f"near-singular radial system: smallest singular value {smin:.3e} (operator scale {scale:.3e})", smin
        )
    u = lu.solve(f)
    if not np.all(np.isfinite(u)):
        raise SingularSystemError("radial solve produced non-finite values", smin)
    return r, u


def solve_radial_bvp(problem: RadialBVP, extra_bc=None, n_grid: Optional[int] = None, tol: float = 1e-8,
                     max_grid: int = 2**17, extrapolate: bool = True) -> RadialProfile:
    """Second-order finite differences with grid doubling.

    Solutions on n and 2n intervals are compared at the shared nodes; doubling
    continues until they differ by less than tol*max(1, |u|).  The returned
    profile carries Richardson-extrapolated values on the coarser grid.
    ``extra_bc`` ("dirichlet"|"neumann", value) is not imposed; its mismatch is
    reported in ``profile.info["extra_residual"]``.
    """
    n = int(n_grid or DEFAULT_GRID)
    if n < 63:
        raise DomainError("n_grid must be at least 63 intervals")
    r, u = _solve_once(problem, n)
    history = []
    best = None
    while True:
        r2, u2 = _solve_once(problem, 2 * n)
        change = float(np.max(np.abs(u2[::2] - u)))
        history.append((n, change))
        scale = max(1.0, float(np.max(np.abs(u2))))
        if best is not None and change > best[0] / 3.0:
            # second order should shrink the change ~4x; a smaller ratio means the roundoff floor
            # (condition number grows like 1/h^2) has been reached, so keep the previous pair
            change, n, r, u, u2 = best
            break
        best = (change, n, r, u, u2)
        if change <= tol * scale or 2 * n >= max_grid:
            break
        n, r, u = 2 * n, r2, u2
    converged = change <= tol * scale
    if not converged:
        warnings.warn(f"radial BVP not converged: change {change:.2e} at n={2 * n}", RuntimeWarning)
    values = (4 * u2[::2] - u) / 3 if extrapolate else u2[::2]
    prof = RadialProfile.from_grid(r, values, info={"n_grid": n, "change": change, "converged": converged,
                                                    "history": history})
    if extra_bc is not None:
        kind, val = str(extra_bc[0]).lower(), float(extra_bc[1])
        got = prof(problem.r0, 1) if kind == "neumann" else prof(problem.r0, 0)
        prof.info["extra_residual"] = float(got - val)
    return prof


def radial_operator(u: RadialProfile, r, mode, a=1.0, b=0.0, dim=2):
    """Apply a*(u'' + (dim-1)u'/r - n^2u/r^2) + b*u at points r > 0."""
    r = np.asarray(r, dtype=float)
    u0, u1, u2 = u.on(r, 0), u.on(r, 1), u.on(r, 2)
    if dim == 1:
        return a * u2 + b * u0
    return a * (u2 + u1 / r - mode * mode * u0 / r**2) + b * u0
