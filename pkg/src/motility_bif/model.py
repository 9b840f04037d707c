"""Physical parameters, diffusion laws and the resting (radially symmetric) cell."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InvalidDiffusionError, NoSteadyStateError, PoleError
from .numerics import find_root


@dataclass(frozen=True)
class PhysParams:
    """Contractility P, viscosity/friction ratio Z, surface tension gamma."""

    P: float
    Z: float
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("P", "Z", "gamma"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite real, got {v!r}")
        if not 0.0 < self.P < 0.25:
            raise DomainError(f"P must lie in (0, 1/4), got {self.P}")
        if not self.Z > 0.0:
            raise DomainError(f"Z must be positive, got {self.Z}")
        if self.gamma < 0.0:
            raise DomainError(f"gamma must be nonnegative, got {self.gamma}")


@dataclass(frozen=True)
class DiffusionModel:
    """Myosin diffusion D(m) with derivatives up to order four.

    ``evaluator(m)`` returns (D, D', D'', D''', D'''').  Use the constructors
    :meth:`constant`, :meth:`van_der_waals` or :meth:`custom`.
    """

    kind: str
    parameters: tuple
    evaluator: Callable = field(repr=False, compare=False)

    @classmethod
    def constant(cls, c=1.0):
        c = float(c)
        if not c > 0:
            raise InvalidDiffusionError(f"constant diffusion must be positive, got {c}")
        return cls("constant", (c,), lambda m: (c, 0.0, 0.0, 0.0, 0.0))

    @classmethod
    def van_der_waals(cls, m_inf=10.0, e_a=0.0):
        """D(m) = m_inf^2/(m_inf - m)^2 - e_a*m."""
        m_inf, e_a = float(m_inf), float(e_a)
        if not m_inf > 0:
            raise DomainError(f"saturation density must be positive, got {m_inf}")

        def ev(m):
            g = m_inf - m
            q = m_inf * m_inf
            return (q / g**2 - e_a * m, 2 * q / g**3 - e_a, 6 * q / g**4, 24 * q / g**5, 120 * q / g**6)

        return cls("van_der_waals", (m_inf, e_a), ev)

    @classmethod
    def custom(cls, evaluator, label="custom"):
        """User-supplied derivative tuples; correctness is the caller's contract."""

        def ev(m):
            out = tuple(evaluator(m))
            if len(out) != 5:
                raise InvalidDiffusionError("custom diffusion must return five values (D..D'''')")
            return out

        return cls("custom", (label,), ev)

    def derivatives(self, m):
        return tuple(float(v) if np.ndim(v) == 0 else np.asarray(v) for v in self.evaluator(m))

    def __call__(self, m):
        return self.evaluator(m)[0]

    @property
    def descriptor(self):
        if self.kind == "constant":
            return f"constant({self.parameters[0]:g})"
        if self.kind == "van_der_waals":
            return f"van_der_waals({self.parameters[0]:g}, {self.parameters[1]:g})"
        return f"custom({self.parameters[0]})"


@dataclass(frozen=True)
class SteadyState:
    r0: float
    m0: float
    sigma0: float


R_MAX = 2.0 / math.sqrt(math.pi)
R_MIN = 1e-6


def steady_residual(R, params: PhysParams):
    """g(R) = -gamma/R + 1 - pi R^2 - P/(pi R^2); zero at the resting radius."""
    return -params.gamma / R + 1.0 - math.pi * R * R - params.P / (math.pi * R * R)


def r0_closed_form(P):
    """Resting radius without surface tension."""
    return math.sqrt((0.5 + math.sqrt(0.25 - P)) / math.pi)


def solve_steady_state(params: PhysParams, tol=1e-15, scan_points=4000) -> SteadyState:
    """Largest positive root of the radius equation, then m0 and sigma0."""
    # geometric spacing resolves the steep part near R_MIN
    Rs = np.geomspace(R_MIN, R_MAX, scan_points)
    g = steady_residual(Rs, params)
    idx = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]
    if idx.size == 0:
        raise NoSteadyStateError(
            f"g(R) has no sign change on ({R_MIN}, {R_MAX:.4f}] for P={params.P}, gamma={params.gamma}"
        )
    i = idx[-1]
    R0 = find_root(lambda R: steady_residual(R, params), (Rs[i], Rs[i + 1]), tol=tol)
    m0 = 1.0 / (math.pi * R0 * R0)
    return SteadyState(r0=R0, m0=m0, sigma0=params.P * m0)


def diffusion_at_steady(model: DiffusionModel, ss: SteadyState):
    """(D, D', D'', D''', D'''') at the resting density."""
    if model.kind == "van_der_waals" and ss.m0 >= model.parameters[0]:
        raise PoleError(f"m0 = {ss.m0:.6g} is at or beyond the saturation density {model.parameters[0]:g}")
    d = tuple(float(v) for v in model.evaluator(ss.m0))
    if not all(math.isfinite(v) for v in d):
        raise InvalidDiffusionError(f"non-finite diffusion data at m0: {d}")
    if d[0] <= 0:
        raise InvalidDiffusionError(f"D(m0) = {d[0]:.6g} must be positive")
    return d
