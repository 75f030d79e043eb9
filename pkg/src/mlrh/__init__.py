"""Rational approximations to the rough Heston Riccati solution under the
Mittag-Leffler kernel, with an Adams benchmark solver and Lewis-formula pricing."""

from .errors import (
    AccuracyError,
    DegenerateError,
    DomainError,
    IntegrationError,
    NoSolutionError,
    PoleError,
    SectorError,
    SingularSystemError,
    SolverOverflowError,
)
from .model_core import REFERENCE_A, REFERENCE_PARAMS, ModelParams, classical_h, kernel, riccati_rhs, riccati_roots
from .pade import RationalApproximant, build_pade, eval_pade, pole_scan, series_match_check
from .adams import adams_at, adams_solve
from .pricer import ForwardVarianceCurve, bs_price, cgf, implied_vol, lewis_call, smile

__version__ = "0.1.0"
