"""Rough Heston parameters, Riccati roots, kernel and the classical closed form.

The fractional Riccati equation solved throughout the package is

    D^alpha h = -a(a+i)/2 + (i rho nu a - lam) h + nu^2 h^2 / 2,   h(0) = 0,

whose right-hand side factors as ``(nu h - r_minus)(nu h - r_plus) / 2``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DomainError
from .special_fn import MittagLefflerParams, mittag_leffler, reciprocal_gamma

DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class ModelParams:
    """Rough Heston parameters under the Mittag-Leffler kernel.

    ``H = 0`` is accepted as the boundary case ``alpha = 1/2``; ``H = 1/2`` is
    classical Heston with mean reversion ``lam``.
    """

    H: float
    nu: float
    rho: float
    lam: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.H <= 0.5:
            raise DomainError(f"H={self.H} must lie in [0, 1/2]")
        if not self.nu > 0.0:
            raise DomainError(f"nu={self.nu} must be positive")
        if not abs(self.rho) < 1.0:
            raise DomainError(f"rho={self.rho} must lie in (-1, 1)")
        if not self.lam >= 0.0:
            raise DomainError(f"lam={self.lam} must be nonnegative")

    @property
    def alpha(self) -> float:
        return self.H + 0.5

    @property
    def lam_prime(self) -> float:
        return self.lam / self.nu

    @property
    def is_boundary(self) -> bool:
        return self.H == 0.0

    @property
    def is_classical(self) -> bool:
        return self.H == 0.5


# Reference parameters: H=0.05, nu=0.4, rho=-0.65, lam=1.
REFERENCE_PARAMS = ModelParams(H=0.05, nu=0.4, rho=-0.65, lam=1.0)
REFERENCE_A = 3.0 - 0.5j


def in_fourier_domain(a: complex, tol: float = 1e-14) -> bool:
    """Membership of ``a`` in ``{Re a >= 0, -1 <= Im a <= 0}``."""
    a = complex(a)
    return a.real >= -tol and -1.0 - tol <= a.imag <= tol


def check_fourier_arg(a: complex) -> complex:
    a = complex(a)
    if not in_fourier_domain(a):
        raise DomainError(f"a={a} is outside the strip Re a >= 0, -1 <= Im a <= 0")
    return a


@dataclass(frozen=True)
class RiccatiRoots:
    A: complex
    r_minus: complex
    r_plus: complex


def riccati_roots(m: ModelParams, a: complex) -> RiccatiRoots:
    a = check_fourier_arg(a)
    lt = m.lam_prime - 1j * m.rho * a
    A = cmath.sqrt(a * (a + 1j) + lt * lt)
    if abs(A) < DEGENERATE_TOL:
        raise DegenerateError(f"double Riccati root at a={a} (A={A})")
    # take the larger root directly and the other from r_- r_+ = -a(a+i),
    # avoiding cancellation in lt - A when lam' dominates
    prod = -a * (a + 1j)
    rp, rm = lt + A, lt - A
    if abs(rp) >= abs(rm):
        rm = prod / rp
    else:
        rp = prod / rm
    return RiccatiRoots(A=A, r_minus=rm, r_plus=rp)


def kernel(m: ModelParams, x: float) -> float:
    """``nu x^(alpha-1) E_{alpha,alpha}(-lam x^alpha)``."""
    if not x > 0.0:
        raise DomainError("kernel is only defined for x > 0")
    al = m.alpha
    if m.lam == 0.0:
        return m.nu * x ** (al - 1.0) * reciprocal_gamma(al)
    e = mittag_leffler(MittagLefflerParams(al, al), -m.lam * x**al)
    return m.nu * x ** (al - 1.0) * e.real


def riccati_rhs(m: ModelParams, a: complex, h):
    """Right-hand side of the fractional Riccati equation; ``h`` may be an array."""
    return -0.5 * a * (a + 1j) + (1j * m.rho * m.nu * a - m.lam) * h + 0.5 * m.nu**2 * h * h


def classical_h(m: ModelParams, a: complex, t):
    """Closed-form solution for ``alpha = 1`` (classical Heston).

    ``nu h = r_- (1 - e) / (1 - (r_-/r_+) e)`` with ``e = exp(-A nu t)``,
    written as ``r_- r_+ (1 - e) / (r_+ - r_- e)``.
    """
    if not m.is_classical:
        raise DomainError(f"classical_h needs H = 1/2, got H={m.H}")
    roots = riccati_roots(m, a)
    if abs(roots.r_plus) < DEGENERATE_TOL:
        raise DegenerateError(f"r_plus vanishes at a={a}")
    t = np.asarray(t, dtype=float)
    e = np.exp(-roots.A * m.nu * t)
    w = roots.r_minus * roots.r_plus * (1.0 - e) / (roots.r_plus - roots.r_minus * e)
    out = w / m.nu
    return out if out.ndim else complex(out)


def sector_angle(m: ModelParams, a: complex, x: float) -> float:
    """``|arg(-A x^alpha)|``; at least ``3 pi / 4`` for every ``a`` in the strip."""
    A = riccati_roots(m, a).A
    return abs(cmath.phase(-A * x**m.alpha))


def power_law_kernel(m: ModelParams, x: float) -> float:
    """The ``lam = 0`` kernel ``nu x^(alpha-1) / Gamma(alpha)``."""
    if not x > 0.0:
        raise DomainError("kernel is only defined for x > 0")
    return m.nu * x ** (m.alpha - 1.0) * reciprocal_gamma(m.alpha)


__all__ = [
    "REFERENCE_A",
    "REFERENCE_PARAMS",
    "ModelParams",
    "RiccatiRoots",
    "check_fourier_arg",
    "classical_h",
    "in_fourier_domain",
    "kernel",
    "power_law_kernel",
    "riccati_rhs",
    "riccati_roots",
    "sector_angle",
]
