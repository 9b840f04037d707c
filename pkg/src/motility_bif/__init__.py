"""Traveling-wave bifurcation of a free-boundary cell-motility model with nonlinear myosin diffusion."""
from .errors import *  # noqa: F401,F403
from .expansion import K2Report, run_pipeline
from .model import DiffusionModel, PhysParams, SteadyState, solve_steady_state
from .oned import OneDConfig, critical_ea, oned_k2
from .oracle import oracle_k2

__version__ = "0.1.0"
