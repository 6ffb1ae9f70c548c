"""Pointwise 1D dispersion relation for the period-2 cell.

The unit cell is [-1, 1] with background on [-1, 0) and particle on
[0, 1].  A Bloch mode with quasiperiodicity kappa exists iff

    cos(2*kappa) = f(w),
    f(w) = cos(s0) cos(rho*s0) - (1 + rho^2)/(2*rho) * sin(s0) sin(rho*s0),

with s0 = w sqrt(eps0 mu0) and rho the contrast.  Two independent
recovery routes for kappa are provided: the complex logarithm of the
quadratic root in e^{2i*kappa}, and closed forms for Re/Im kappa built
from the auxiliary functions L1(w), L2(w).  This module is strictly
pointwise; band tracking and gap assembly live in `bandgap`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DegenerateContrast, NumericalError
from .permittivity import MaterialParams, contrast, wavenumbers

# Half-width of the 1D Brillouin zone [-pi/2, pi/2) for the period-2 cell.
BRILLOUIN_HALF = math.pi / 2.0

# |rho| below this makes the 1/(2 rho) factor meaningless.
CONTRAST_CUTOFF = 1e-14


@dataclass(frozen=True)
class BlochPoint:
    """One frequency with its +-kappa branch pair and diagnostics.

    kappa_plus is the branch with Im kappa >= 0 (ties broken toward
    nonnegative real part); kappa_minus is its negative, with both real
    parts folded into [-pi/2, pi/2).  residual is the larger
    |cos(2 kappa) - f(w)| over the pair.
    """

    omega: float
    kappa_plus: complex
    kappa_minus: complex
    f_value: complex
    l1: float
    l2: float
    residual: float


def fold_real(x: float) -> float:
    """Reduce a real number modulo pi into [-pi/2, pi/2)."""
    return (x + BRILLOUIN_HALF) % math.pi - BRILLOUIN_HALF


def fold_kappa(kappa: complex) -> complex:
    """Fold the real part of kappa into the Brillouin zone [-pi/2, pi/2)."""
    return complex(fold_real(kappa.real), kappa.imag)


def rhs_f(p: MaterialParams, omega: float) -> complex:
    """Right-hand side f(w) of the dispersion relation cos(2 kappa) = f(w)."""
    sigma0, _ = wavenumbers(p, omega)
    rho = contrast(p, omega).rho
    if abs(rho) < CONTRAST_CUTOFF:
        raise DegenerateContrast(f"|rho| = {abs(rho):.3e} below cutoff at omega={omega!r}")
    return (
        cmath.cos(sigma0) * cmath.cos(rho * sigma0)
        - (1.0 + rho * rho) / (2.0 * rho) * cmath.sin(sigma0) * cmath.sin(rho * sigma0)
    )


def solve_kappa(p: MaterialParams, omega: float) -> BlochPoint:
    """Solve cos(2 kappa) = f(w) for the +-kappa pair via the complex logarithm.

    e^{2i kappa} solves z^2 - 2 f z + 1 = 0, so
    kappa = (-i/2) log(f +- sqrt(f^2 - 1)) with principal log and square
    root; the two quadratic roots are reciprocal and enumerate the pair.
    """
    f = rhs_f(p, omega)
    w = cmath.sqrt(f * f - 1.0)
    kraw = -0.5j * cmath.log(f + w)
    ka = fold_kappa(kraw)
    kb = fold_kappa(-kraw)
    kplus = ka if (ka.imag, ka.real) >= (kb.imag, kb.real) else kb
    kminus = fold_kappa(-kplus)
    residual = max(abs(cmath.cos(2.0 * ka) - f), abs(cmath.cos(2.0 * kb) - f))
    l1, l2 = l1_l2(p, omega)
    return BlochPoint(
        omega=omega,
        kappa_plus=kplus,
        kappa_minus=kminus,
        f_value=f,
        l1=l1,
        l2=l2,
        residual=residual,
    )


def l1_l2(p: MaterialParams, omega: float) -> tuple[float, float]:
    """Auxiliary functions (L1, L2) of the Re/Im closed-form route.

    They satisfy f(w) = L1 - i*L2 and the system
    cos(2 k1) cosh(2 k2) = L1,  sin(2 k1) sinh(2 k2) = L2
    for kappa = k1 + i*k2 on the dispersion variety.
    """
    sigma0, _ = wavenumbers(p, omega)
    c = contrast(p, omega)
    r1, r2 = c.rho1, c.rho2
    den = r1 * r1 + r2 * r2
    if den < 1e-28:
        raise DegenerateContrast(f"rho1^2 + rho2^2 = {den:.3e} below cutoff at omega={omega!r}")
    s, co = math.sin(sigma0), math.cos(sigma0)
    sr, cr = math.sin(sigma0 * r1), math.cos(sigma0 * r1)
    sh, ch = math.sinh(sigma0 * r2), math.cosh(sigma0 * r2)
    u = r1 * (1.0 + r1 * r1 + r2 * r2)
    v = r2 * (r2 * r2 - 1.0 + r1 * r1)
    l1 = co * cr * ch - s / (2.0 * den) * (u * sr * ch - v * cr * sh)
    l2 = co * sr * sh + s / (2.0 * den) * (v * sr * ch + u * cr * sh)
    return l1, l2


def kappa_re_im(p: MaterialParams, omega: float, sign: int = +1) -> tuple[float, float]:
    """Closed-form (Re kappa, Im kappa) from (L1, L2), branch chosen by ``sign``.

    Im kappa = (1/2) arcsinh(sign * sqrt((L1^2 + L2^2 - 1
               + sqrt((1 - L1^2 - L2^2)^2 + 4 L2^2)) / 2))
    and |Re kappa| = (1/2) arccos(L1 / cosh(2 Im kappa)); the sign of
    Re kappa is fixed by sin(2 Re kappa) sinh(2 Im kappa) = L2.  The two
    sign choices return a pair of opposite points.
    """
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    l1, l2 = l1_l2(p, omega)
    inner = 0.5 * (
        l1 * l1 + l2 * l2 - 1.0 + math.sqrt((1.0 - l1 * l1 - l2 * l2) ** 2 + 4.0 * l2 * l2)
    )
    k2 = 0.5 * math.asinh(sign * math.sqrt(max(inner, 0.0)))
    ch = math.cosh(2.0 * k2)
    arg = l1 / ch
    # Floating-point overshoot at band edges: clamp within 1e-12.
    if arg > 1.0:
        arg = 1.0
    elif arg < -1.0:
        arg = -1.0
    mag = 0.5 * math.acos(arg)
    sh = math.sinh(2.0 * k2)
    if abs(sh) > 0.0 and l2 != 0.0:
        s1 = 1.0 if (l2 / sh) >= 0.0 else -1.0
    else:
        s1 = float(sign)
    return s1 * mag, k2


@dataclass(frozen=True)
class TailImReport:
    """Per-point |Im kappa| along an ascending frequency grid.

    points holds (omega, |Im kappa|) rows for every admissible grid
    point; skipped holds (omega, reason) for points flagged singular or
    degenerate.
    """

    points: list[tuple[float, float]]
    skipped: list[tuple[float, str]]


def tail_im_report(p: MaterialParams, omega_grid) -> TailImReport:
    """Evaluate |Im kappa| pointwise on an ascending grid, no smoothing."""
    grid = list(omega_grid)
    if not grid:
        raise ValueError("omega_grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("omega_grid must be strictly ascending")
    points: list[tuple[float, float]] = []
    skipped: list[tuple[float, str]] = []
    for w in grid:
        try:
            bp = solve_kappa(p, w)
        except NumericalError as exc:
            skipped.append((w, f"{type(exc).__name__}: {exc}"))
            continue
        points.append((w, abs(bp.kappa_plus.imag)))
    return TailImReport(points=points, skipped=skipped)
