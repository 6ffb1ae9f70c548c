"""Band-gap detection and the gap cascade near a real permittivity pole.

Two gap notions are implemented.  For real permittivities a frequency
is in a gap iff |f(w)| > 1 (no real Bloch wavenumber exists); gaps are
maximal intervals of that condition.  For complex permittivities the
spectrum is blurred and a gap is identified with a local maximum of
w -> |Im kappa(w)|, the spatial decay rate.

Near a real pole (gamma = 0, beta > 0) the right-hand side f oscillates
with unboundedly growing amplitude, producing an infinite cascade of
disjoint gaps.  `cascade_near_pole` enumerates them through the
sentinel frequencies where sin(rho*sigma0) = +-1, and
`envelope_near_pole` tracks the unbounded growth of |Im kappa|.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.signal import find_peaks, peak_prominences, peak_widths

from .dispersion1d import rhs_f, solve_kappa
from .errors import (
    ComplexPermittivity,
    DampedModel,
    NoPole,
    NumericalError,
)
from .permittivity import MaterialParams, eval_permittivity, singular_frequencies, wavenumbers

# Width of the exclusion zone around a permittivity pole in all sweeps.
POLE_EXCLUSION = 1e-10

# Reporting convention for complex-criterion gaps: interval where
# |Im kappa| exceeds this fraction of the peak prominence.
PROMINENCE_FRACTION = 0.5


class GapKind(enum.Enum):
    REAL_CRITERION = "real"
    COMPLEX_CRITERION = "complex"


class Side(enum.Enum):
    BELOW = "below"
    ABOVE = "above"


@dataclass(frozen=True)
class BandGap:
    """A gap interval [lo, hi] with its classification and decay peak."""

    lo: float
    hi: float
    kind: GapKind
    peak_im_kappa: float
    peak_omega: float


@dataclass(frozen=True)
class GapCascade:
    """Ordered gaps accumulating at a real permittivity pole.

    gaps are disjoint and ordered toward the pole; sentinel_points are
    the frequencies where sin(rho*sigma0) = +-1 that seed each gap.
    """

    pole: float
    side: Side
    gaps: list[BandGap]
    sentinel_points: list[float]


def _abs_im_kappa(p: MaterialParams, omega: float) -> float:
    return abs(solve_kappa(p, omega).kappa_plus.imag)


def _real_f(p: MaterialParams, omega: float) -> float:
    return rhs_f(p, omega).real


GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _refine_peak(p, lo, hi, fun, xtol=1e-8):
    """Golden-section maximum of `fun(p, .)` on [lo, hi]; returns (argmax, max)."""
    a, b = float(lo), float(hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(p, c), fun(p, d)
    while b - a > xtol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(p, c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(p, d)
    w = 0.5 * (a + b)
    return w, fun(p, w)


def find_gaps_real(p: MaterialParams, lo: float, hi: float, n: int) -> list[BandGap]:
    """Maximal |f| > 1 intervals on [lo, hi], edges refined to |f| = 1.

    Requires a real permittivity on the window.  Grid points falling in
    the exclusion zone of a pole are skipped.

    Raises
    ------
    ComplexPermittivity
        If Im eps exceeds 1e-12 anywhere on the grid.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not lo < hi:
        raise ValueError("need lo < hi")
    grid = np.linspace(lo, hi, n)
    try:
        poles = singular_frequencies(p)
        pole_res = [poles.omega_plus.real, poles.omega_minus.real]
    except NumericalError:
        pole_res = []
    omegas, fvals = [], []
    for w in grid:
        if any(abs(w - wp) < POLE_EXCLUSION for wp in pole_res):
            continue
        eps = eval_permittivity(p, w)
        if abs(eps.imag) > 1e-12:
            raise ComplexPermittivity(
                f"Im eps = {eps.imag:.3e} at omega={w!r}; use find_gaps_complex"
            )
        omegas.append(w)
        fvals.append(_real_f(p, w))
    omegas = np.asarray(omegas)
    fvals = np.asarray(fvals)
    inside = np.abs(fvals) > 1.0

    gaps: list[BandGap] = []
    i = 0
    m = len(omegas)
    while i < m:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < m and inside[j + 1]:
            j += 1
        # Refine edges against the neighbouring outside samples.
        left = omegas[i]
        if i > 0:
            left = brentq(lambda w: abs(_real_f(p, w)) - 1.0, omegas[i - 1], omegas[i], xtol=1e-13)
        right = omegas[j]
        if j + 1 < m:
            right = brentq(lambda w: abs(_real_f(p, w)) - 1.0, omegas[j], omegas[j + 1], xtol=1e-13)
        peak_w, peak_im = _refine_peak(p, left, right, _abs_im_kappa)
        gaps.append(
            BandGap(lo=float(left), hi=float(right), kind=GapKind.REAL_CRITERION,
                    peak_im_kappa=peak_im, peak_omega=peak_w)
        )
        i = j + 1
    return gaps


def find_gaps_complex(p: MaterialParams, lo: float, hi: float, n: int) -> list[BandGap]:
    """Gaps as local maxima of |Im kappa| on [lo, hi].

    Maxima are detected on the sample grid (plateaus collapse to their
    centre), then each peak location is refined by bounded golden
    search between its grid neighbours.  The reported interval is where
    |Im kappa| exceeds half the peak prominence; per-point singular
    frequencies are skipped.
    """
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if not lo < hi:
        raise ValueError("need lo < hi")
    grid = np.linspace(lo, hi, n)
    omegas, y = [], []
    for w in grid:
        try:
            y.append(_abs_im_kappa(p, w))
        except NumericalError:
            continue
        omegas.append(w)
    omegas = np.asarray(omegas)
    y = np.asarray(y)
    if len(y) < 3 or np.max(y) < 1e-12:
        return []

    # height floor keeps numerically-zero decay (real bands) from
    # registering as rounding-noise peaks
    peaks, _ = find_peaks(y, height=1e-12)
    if len(peaks) == 0:
        return []
    prom = peak_prominences(y, peaks)
    widths = peak_widths(y, peaks, rel_height=PROMINENCE_FRACTION,
                         prominence_data=prom)
    gaps: list[BandGap] = []
    for k, idx in enumerate(peaks):
        wlo = omegas[max(idx - 1, 0)]
        whi = omegas[min(idx + 1, len(omegas) - 1)]
        peak_w, peak_im = _refine_peak(p, wlo, whi, _abs_im_kappa)
        # Map interpolated half-prominence crossings back to omega.
        left_ip, right_ip = widths[2][k], widths[3][k]
        glo = float(np.interp(left_ip, np.arange(len(omegas)), omegas))
        ghi = float(np.interp(right_ip, np.arange(len(omegas)), omegas))
        gaps.append(
            BandGap(lo=glo, hi=ghi, kind=GapKind.COMPLEX_CRITERION,
                    peak_im_kappa=peak_im, peak_omega=peak_w)
        )
    return gaps


def _require_undamped_pole(p: MaterialParams, positive_alpha: bool = False) -> float:
    if p.gamma > 0:
        raise DampedModel(f"gamma = {p.gamma} > 0: real-pole analysis needs gamma = 0")
    if p.beta == 0:
        raise NoPole("beta = 0: permittivity has no pole")
    if positive_alpha:
        if complex(p.alpha) == 0:
            raise NoPole("alpha = 0: permittivity is constant, no pole")
        if not p.alpha_is_real or complex(p.alpha).real < 0:
            raise ComplexPermittivity("pole cascade requires real alpha > 0")
    return 1.0 / math.sqrt(p.beta)


def _rho_sigma0(p: MaterialParams, omega: float) -> float:
    """rho(w) * sigma0(w); real and increasing on (0, pole)."""
    _, sigmac = wavenumbers(p, omega)
    return sigmac.real


def cascade_near_pole(
    p: MaterialParams, delta: float, side: Side, max_gaps: int
) -> GapCascade:
    """Enumerate the gap cascade in the pole neighbourhood.

    For ``Side.BELOW`` works on [w* - delta, w*) at the positive pole
    w* = 1/sqrt(beta), where eps -> +infinity.  For ``Side.ABOVE`` the
    mirrored interval (w*, w* + delta] at the negative pole
    w* = -1/sqrt(beta) is used (f is even in w for gamma = 0, so this is
    the exact mirror of the below-side cascade).

    Each gap encloses a sentinel frequency where sin(rho*sigma0) = +-1
    and |f| > 1; consecutive sentinels alternate the sign of f.
    """
    pole = _require_undamped_pole(p, positive_alpha=True)
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    if max_gaps < 1:
        raise ValueError(f"max_gaps must be >= 1, got {max_gaps}")

    w_lo = pole - delta
    w_hi = pole - POLE_EXCLUSION
    if w_lo <= 0:
        raise ValueError(f"delta = {delta} reaches past omega = 0")
    g_lo = _rho_sigma0(p, w_lo)
    n_first = max(0, math.ceil((g_lo - 0.5 * math.pi) / math.pi))

    # Collect sentinels until max_gaps of them open gaps (|f| > 1) plus
    # one more to bound the scan window of the last requested gap.
    g_cap = _rho_sigma0(p, w_hi)
    sent: list[tuple[int, float]] = []
    usable = 0
    n = n_first
    while n - n_first < 10_000:
        target = 0.5 * math.pi + n * math.pi
        if target > g_cap:
            break
        lo_b = sent[-1][1] if sent else w_lo
        root = brentq(lambda w: _rho_sigma0(p, w) - target, lo_b, w_hi, xtol=1e-15, maxiter=100)
        sent.append((n, float(root)))
        n += 1
        if abs(_real_f(p, root)) > 1.0:
            usable += 1
        if usable > max_gaps:
            break

    gaps: list[BandGap] = []
    sentinels: list[float] = []
    for k, (nk, wk) in enumerate(sent):
        if len(gaps) >= max_gaps:
            break
        f_at = _real_f(p, wk)
        if abs(f_at) <= 1.0:
            continue  # too far from the pole for this sentinel to open a gap
        left_bound = sent[k - 1][1] if k > 0 else w_lo
        right_bound = sent[k + 1][1] if k + 1 < len(sent) else w_hi
        scan = np.linspace(left_bound, right_bound, 400)
        fs = np.array([_real_f(p, w) for w in scan])
        inside = np.abs(fs) > 1.0
        idx = int(np.argmin(np.abs(scan - wk)))
        if not inside[idx]:
            idx = int(np.argmax(np.abs(fs)))
        i = j = idx
        while i - 1 >= 0 and inside[i - 1]:
            i -= 1
        while j + 1 < len(scan) and inside[j + 1]:
            j += 1
        left = scan[i]
        if i > 0:
            left = brentq(lambda w: abs(_real_f(p, w)) - 1.0, scan[i - 1], scan[i], xtol=1e-13)
        right = scan[j]
        if j + 1 < len(scan):
            right = brentq(lambda w: abs(_real_f(p, w)) - 1.0, scan[j], scan[j + 1], xtol=1e-13)
        peak_w, peak_im = _refine_peak(p, left, right, _abs_im_kappa)
        gaps.append(
            BandGap(lo=float(left), hi=float(right), kind=GapKind.REAL_CRITERION,
                    peak_im_kappa=peak_im, peak_omega=peak_w)
        )
        sentinels.append(wk)

    if side is Side.ABOVE:
        # Mirror to the interval (-w*, -w* + delta] above the negative pole.
        gaps = [
            BandGap(lo=-g.hi, hi=-g.lo, kind=g.kind,
                    peak_im_kappa=g.peak_im_kappa, peak_omega=-g.peak_omega)
            for g in gaps
        ]
        sentinels = [-s for s in sentinels]
        return GapCascade(pole=-pole, side=side, gaps=gaps, sentinel_points=sentinels)
    return GapCascade(pole=pole, side=side, gaps=gaps, sentinel_points=sentinels)


def envelope_near_pole(
    p: MaterialParams, deltas, samples: int = 600
) -> list[tuple[float, float]]:
    """Max |Im kappa| over an adaptive sample of [w* - delta, w*) per delta.

    The sample resolves distances down to max(1e-4 * delta, 1e-10) from
    the pole: a uniform background grid plus the last few sentinel
    frequencies before the resolution floor, where the decay rate
    peaks.  For a descending delta list the maxima are nondecreasing,
    reflecting the unbounded growth of |Im kappa| at the pole.
    """
    pole = _require_undamped_pole(p)
    deltas = list(deltas)
    if not deltas:
        raise ValueError("deltas must be nonempty")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly descending")

    out: list[tuple[float, float]] = []
    for delta in deltas:
        if delta <= 0 or pole - delta <= 0:
            raise ValueError(f"invalid delta {delta} for pole at {pole}")
        eta_min = max(1e-4 * delta, POLE_EXCLUSION)
        w_lo, w_hi = pole - delta, pole - eta_min
        points = list(np.linspace(w_lo, w_hi, samples))
        # Last sentinels before the resolution floor carry the running max.
        g_hi = _rho_sigma0(p, w_hi)
        n_max = math.floor((g_hi - 0.5 * math.pi) / math.pi)
        g_lo = _rho_sigma0(p, w_lo)
        n_lo = max(0, math.ceil((g_lo - 0.5 * math.pi) / math.pi))
        for nk in range(max(n_lo, n_max - 9), n_max + 1):
            target = 0.5 * math.pi + nk * math.pi
            if target < g_lo or target > g_hi:
                continue
            root = brentq(lambda w: _rho_sigma0(p, w) - target, w_lo, w_hi,
                          xtol=1e-15, maxiter=100)
            points.append(float(root))
        best = 0.0
        for w in points:
            try:
                best = max(best, _abs_im_kappa(p, w))
            except NumericalError:
                continue
        out.append((float(delta), best))
    return out
