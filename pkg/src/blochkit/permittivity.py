"""Drude-Lorentz permittivity model and the frequency-dependent contrast.

The material model is

    eps(w) = eps0 + alpha / (1 - beta*w**2 - i*gamma*w)

with a non-dispersive background eps0, interaction strength alpha
(real in the physical model, complex allowed for damped non-dispersive
media), resonance parameter beta and damping gamma.  The model is
singular at two complex frequencies; their location relative to the
real axis controls the band-gap structure of the crystal.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import NoFiniteSingularity, SingularFrequency

# |1 - beta w^2 - i gamma w| below this counts as sitting on a pole.
POLE_CUTOFF = 1e-14


@dataclass(frozen=True)
class MaterialParams:
    """Parameters of the Drude-Lorentz permittivity model.

    Parameters
    ----------
    alpha : complex
        Interaction strength.  Real and positive in the physical model;
        a complex value models a damped non-dispersive medium.
    beta : float
        Resonance parameter, >= 0.  beta = 0 removes the poles.
    gamma : float
        Damping, >= 0.  gamma = 0 puts the poles on the real axis.
    eps0, mu0 : float
        Background permittivity and permeability, both > 0.
    """

    alpha: complex = 1.0
    beta: float = 0.0
    gamma: float = 0.0
    eps0: float = 1.0
    mu0: float = 1.0

    def __post_init__(self):
        if not self.eps0 > 0:
            raise ValueError(f"eps0 must be > 0, got {self.eps0}")
        if not self.mu0 > 0:
            raise ValueError(f"mu0 must be > 0, got {self.mu0}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")

    @property
    def alpha_is_real(self) -> bool:
        return complex(self.alpha).imag == 0.0


@dataclass(frozen=True)
class ContrastValue:
    """Contrast rho = sqrt(eps(w)/eps0) and its decomposition.

    rho1/rho2 are the real/imaginary parts on the principal branch
    (rho1 >= 0; rho2 >= 0 when rho1 = 0).  a and b are the real and
    imaginary parts of eps(w)/eps0; they are only defined for real
    alpha and are None otherwise.
    """

    rho: complex
    rho1: float
    rho2: float
    a: float | None = None
    b: float | None = None


@dataclass(frozen=True)
class SingularPair:
    """The two permittivity poles w*+- in the complex frequency plane."""

    omega_plus: complex
    omega_minus: complex


def _denominator(p: MaterialParams, omega: float) -> complex:
    return 1.0 - p.beta * omega * omega - 1j * p.gamma * omega


def eval_permittivity(p: MaterialParams, omega: float, cutoff: float = POLE_CUTOFF) -> complex:
    """Evaluate eps(w) = eps0 + alpha/(1 - beta w^2 - i gamma w).

    Raises
    ------
    SingularFrequency
        If the denominator magnitude is below ``cutoff`` (evaluation at
        or too near a pole).
    """
    den = _denominator(p, omega)
    if abs(den) < cutoff:
        raise SingularFrequency(
            f"permittivity pole at omega={omega!r}: |denominator|={abs(den):.3e} < {cutoff:g}"
        )
    return p.eps0 + complex(p.alpha) / den


def singular_frequencies(p: MaterialParams) -> SingularPair:
    """Poles of the permittivity: w*+- = (1/2 beta)(-i gamma +- sqrt(4 beta - gamma^2)).

    For gamma = 0 the poles sit at +-1/sqrt(beta) on the real axis; for
    gamma^2 < 4 beta they are mirror images across the imaginary axis.

    Raises
    ------
    NoFiniteSingularity
        If beta = 0 (the permittivity is entire in omega).
    """
    if p.beta == 0:
        raise NoFiniteSingularity("beta = 0: permittivity has no finite pole")
    disc = 4.0 * p.beta - p.gamma * p.gamma
    pref = 1.0 / (2.0 * p.beta)
    if disc >= 0:
        root = math.sqrt(disc)
        return SingularPair(
            omega_plus=pref * complex(root, -p.gamma),
            omega_minus=pref * complex(-root, -p.gamma),
        )
    # overdamped: both poles imaginary; the direct formula cancels for the
    # smaller one, so derive it from the root product w+ * w- = -1/beta
    big = pref * -1j * (p.gamma + math.sqrt(-disc))
    return SingularPair(omega_plus=(-1.0 / p.beta) / big, omega_minus=big)


def contrast(p: MaterialParams, omega: float, cutoff: float = POLE_CUTOFF) -> ContrastValue:
    """Frequency-dependent contrast rho(w) = sqrt(eps(w)/eps0), principal branch.

    The principal square root fixes rho1 >= 0 (and rho2 >= 0 on the
    rho1 = 0 cut); it matches the w -> infinity limit rho -> +1 and is
    continuous on w > 0 away from the poles.
    """
    eps = eval_permittivity(p, omega, cutoff)
    rho = cmath.sqrt(eps / p.eps0)
    a = b = None
    if p.alpha_is_real:
        alpha = complex(p.alpha).real
        d2 = (1.0 - p.beta * omega * omega) ** 2 + (p.gamma * omega) ** 2
        a = 1.0 + (alpha / p.eps0) * (1.0 - p.beta * omega * omega) / d2
        b = (alpha / p.eps0) * (p.gamma * omega) / d2
    return ContrastValue(rho=rho, rho1=rho.real, rho2=rho.imag, a=a, b=b)


def wavenumbers(p: MaterialParams, omega: float, cutoff: float = POLE_CUTOFF) -> tuple[float, complex]:
    """Background and particle wavenumbers (sigma0, sigma_c) = (w sqrt(eps0 mu0), rho sigma0)."""
    if omega < 0:
        raise ValueError(f"omega must be >= 0, got {omega}")
    sigma0 = omega * math.sqrt(p.eps0 * p.mu0)
    rho = contrast(p, omega, cutoff).rho
    return sigma0, rho * sigma0
