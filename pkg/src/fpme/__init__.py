"""Fractional porous medium flows: exponents, kernels, solvers and self-similar profiles."""

from .errors import ConfigError, FpmeError, RegimeError
from .evolve import SchemeConfig, run
from .grid import Field, Grid
from .kernels import BACKEND
from .line import LineGrid
from .params import Params, classify, exponents
from .selfsim import Profile, solve_profile

__version__ = "0.1.0"

__all__ = ["BACKEND", "ConfigError", "Field", "FpmeError", "Grid", "LineGrid", "Params", "Profile",
           "RegimeError", "SchemeConfig", "classify", "exponents", "run", "solve_profile"]
