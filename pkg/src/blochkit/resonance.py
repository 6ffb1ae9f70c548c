"""Quasiperiodic volume-integral operators on small disks and the
resonance determinant.

The scattering problem for N small particles, Floquet-transformed at
quasiperiodicity kappa, reduces to a volume Lippmann-Schwinger equation
with the quasiperiodic kernel.  Discretizing each disk with a polar
tensor quadrature (Nystrom) gives per-particle self blocks K and
coupling blocks R; a pole-pencil reduction turns the resonance search
into zeros of the determinant of a small N x N matrix built from
projections of those blocks.

Performance note: all kernels here are entire in the scaled wavenumber
delta*k0 once the logarithmic factor is split off, so every block is a
short power series in (delta*k0)^2 whose coefficient matrices depend
only on geometry, lattice truncation and kappa.  Those moment tables
are built once; re-assembly at a new frequency is a cheap contraction,
which is what makes determinant scans over complex omega affordable.

Only the two-dimensional (disk) case is assembled; the free-space and
quasiperiodic 3D kernels live in `greens` but no ball quadrature is
provided here.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DilutenessWarning,
    DomainError,
    EigenFailure,
    PolePencilSingular,
    QuadratureTooCoarse,
)
from .greens import GAMMA_HAT
from .lattice import LatticeSpec, lattice_points_within
from .permittivity import MaterialParams, eval_permittivity, singular_frequencies

# Largest |delta*k0| * (max pair distance) the series assembly accepts.
SERIES_VALID = 8.0
# Power-series order kept in the moment tables; the tail term at the
# validity edge is ~ (SERIES_VALID/2)^(2M)/(M!)^2.
SERIES_ORDER = 20

PENCIL_CUTOFF = 1e-14
POWER_ITER_CAP = 10_000


def mod_floor(m: int, n: int) -> int:
    """One-based modulo: the unique r in {1..n} with m = tau*n + r."""
    if m < 1 or n < 1:
        raise ValueError(f"need m >= 1 and n >= 1, got ({m}, {n})")
    return (m - 1) % n + 1


def xi_contrast(p: MaterialParams, omega: complex) -> complex:
    """Permittivity contrast xi(w) = mu0 * (eps(w) - eps0)."""
    if isinstance(omega, complex) and omega.imag != 0.0:
        den = 1.0 - p.beta * omega * omega - 1j * p.gamma * omega
        if abs(den) < PENCIL_CUTOFF:
            raise DomainError(f"permittivity pole at omega={omega!r}")
        return p.mu0 * complex(p.alpha) / den
    eps = eval_permittivity(p, float(np.real(omega)))
    return p.mu0 * (eps - p.eps0)


@dataclass(frozen=True)
class DiskQuadrature:
    """Polar tensor rule on one disk: Gauss radial (r = R t^2) x uniform angular."""

    nodes: np.ndarray    # (n, 2)
    weights: np.ndarray  # (n,)
    center: np.ndarray
    radius: float
    order: tuple[int, int]

    @classmethod
    def build(cls, center, radius: float, order: tuple[int, int] = (8, 16)) -> "DiskQuadrature":
        nr, nt = order
        t, wt = np.polynomial.legendre.leggauss(nr)
        u = 0.5 * (t + 1.0)
        wu = 0.5 * wt
        r = radius * u * u
        wr = 2.0 * radius * u * wu          # dr under the r = R u^2 map
        th = 2.0 * np.pi * np.arange(nt) / nt
        wth = 2.0 * np.pi / nt
        rr, tt = np.meshgrid(r, th, indexing="ij")
        ww = np.meshgrid(wr * r, th, indexing="ij")[0] * wth   # r dr dtheta
        c = np.asarray(center, dtype=float)
        nodes = np.stack(
            [c[0] + rr.ravel() * np.cos(tt.ravel()), c[1] + rr.ravel() * np.sin(tt.ravel())],
            axis=1,
        )
        return cls(nodes=nodes, weights=ww.ravel(), center=c, radius=float(radius), order=(nr, nt))


@dataclass
class ParticleGeometry:
    """Disks in the rescaled unit cell, plus the physical cell scale delta.

    centers/radii describe order-one disks; delta is the small scale
    factor of the physical particles.  In-cell disjointness is enforced
    at construction; lattice-image separations (and the resulting
    diluteness figure) are checked at assembly where the lattice is
    known.
    """

    centers: np.ndarray
    radii: np.ndarray
    delta: float

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        self.radii = np.atleast_1d(np.asarray(self.radii, dtype=float))
        if self.centers.shape[0] != self.radii.shape[0]:
            raise ValueError("centers and radii must have matching lengths")
        if self.centers.shape[1] != 2:
            raise ValueError("centers must be points in R^2")
        if np.any(self.radii <= 0):
            raise ValueError("radii must be positive")
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        for i in range(self.n_particles):
            for j in range(i + 1, self.n_particles):
                gap = np.linalg.norm(self.centers[i] - self.centers[j])
                if gap <= self.radii[i] + self.radii[j]:
                    raise ValueError(f"particles {i} and {j} overlap")

    @property
    def n_particles(self) -> int:
        return len(self.radii)

    @property
    def diluteness(self) -> float:
        """In-cell diluteness (nan for a single particle; see diluteness_in)."""
        if self.n_particles < 2:
            return math.nan
        sep = min(
            float(np.linalg.norm(self.centers[i] - self.centers[j]))
            for i in range(self.n_particles)
            for j in range(i + 1, self.n_particles)
        )
        return float(2.0 * np.max(self.radii) / sep)

    def diluteness_in(self, spec: LatticeSpec) -> float:
        """max diameter / min centre separation, lattice images included."""
        shell = lattice_points_within(spec, 2.5 * float(np.max(np.linalg.norm(spec.generators, axis=1))))
        sep = np.inf
        for i in range(self.n_particles):
            for j in range(self.n_particles):
                d = np.linalg.norm(self.centers[i] - self.centers[j] - shell, axis=1)
                if i == j:
                    d = d[d > 1e-12]
                if len(d):
                    sep = min(sep, float(d.min()))
        return float(2.0 * np.max(self.radii) / sep)


# -- moment tables -----------------------------------------------------------

def _hankel_series_coeffs(dk0: complex, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of (i/4) H0^(1)(dk0 * r) = -(1/2pi) sum_m A_m r^(2m) + B_m r^(2m) log r."""
    a = np.empty(order + 1, dtype=complex)
    b = np.empty(order + 1, dtype=complex)
    log_g = cmath.log(GAMMA_HAT * dk0)
    c = 1.0 + 0.0j
    harmonic = 0.0
    dk2 = dk0 * dk0
    power = 1.0 + 0.0j
    for m in range(order + 1):
        a[m] = c * power * (log_g - harmonic)
        b[m] = c * power
        c = -c / (4.0 * (m + 1) * (m + 1))
        harmonic += 1.0 / (m + 1)
        power = power * dk2
    return a, b


class _PairTables:
    """Phase-weighted distance-power sums for one (source i -> target j) pair.

    P[m][p, q] = sum_l exp(i kappa . l) r_pql^(2m)
    Q[m][p, q] = sum_l exp(i kappa . l) r_pql^(2m) log r_pql

    with r_pql = |x_p - y_q - l| over the truncated lattice.  For a
    self pair the singular (p = q, l = 0) term is excluded and the
    tables additionally carry the l = 0 pair powers (ZP/ZQ, diagonal
    zeroed) plus local polar moments of the whole disk around every
    node (M/ML), used to build the locally corrected diagonal.
    """

    def __init__(self, src: DiskQuadrature, tgt: DiskQuadrature, lat_pts, phases,
                 order: int, self_pair: bool):
        d = tgt.nodes[:, None, None, :] - src.nodes[None, :, None, :] - lat_pts[None, None, :, :]
        r = np.sqrt(np.einsum("pqld,pqld->pql", d, d))
        sing = r < 1e-13
        if sing.any() and not self_pair:
            raise DomainError("source and target nodes coincide across the lattice")
        safe = np.where(sing, 1.0, r)
        logr = np.log(safe)
        mask = np.where(sing, 0.0, 1.0)
        self.rmax = float(r.max())
        self.P = np.empty((order + 1, tgt.nodes.shape[0], src.nodes.shape[0]), dtype=complex)
        self.Q = np.empty_like(self.P)
        r2m = mask.copy()
        r2 = r * r
        for m in range(order + 1):
            self.P[m] = np.einsum("pql,l->pq", r2m, phases)
            self.Q[m] = np.einsum("pql,l->pq", r2m * logr, phases)
            if m < order:
                r2m = r2m * r2
        self.self_pair = self_pair
        self.order = order
        if self_pair:
            d0 = tgt.nodes[:, None, :] - src.nodes[None, :, :]
            r0 = np.linalg.norm(d0, axis=-1)
            np.fill_diagonal(r0, 1.0)
            lg0 = np.log(r0)
            n = r0.shape[0]
            self.ZP = np.empty((order + 1, n, n))
            self.ZQ = np.empty((order + 1, n, n))
            r2m = np.ones_like(r0)
            np.fill_diagonal(r2m, 0.0)
            r02 = r0 * r0
            for m in range(order + 1):
                self.ZP[m] = r2m
                self.ZQ[m] = r2m * lg0
                if m < order:
                    r2m = r2m * r02
            self.M, self.ML = _local_disk_moments(tgt.nodes, tgt.center, tgt.radius, order)

    def kernel_matrix(self, dk0: complex, weights: np.ndarray) -> np.ndarray:
        """Nystrom matrix of u -> -int G^{kappa, dk0}(x - y) u(y) dy at this pair."""
        if abs(dk0) * self.rmax > SERIES_VALID:
            raise DomainError(
                f"|delta k0| * max distance = {abs(dk0) * self.rmax:.3f} outside the "
                f"validated series range {SERIES_VALID}"
            )
        a, b = _hankel_series_coeffs(dk0, self.order)
        pref = -1.0 / (2.0 * np.pi)
        kern = pref * (np.tensordot(a, self.P, axes=1) + np.tensordot(b, self.Q, axes=1))
        mat = kern * weights[None, :]
        if self.self_pair:
            moment = pref * (a @ self.M + b @ self.ML)
            sampled = pref * (np.tensordot(a, self.ZP, axes=1) + np.tensordot(b, self.ZQ, axes=1))
            corr = moment - (sampled * weights[None, :]).sum(axis=1)
            mat[np.arange(mat.shape[0]), np.arange(mat.shape[0])] += corr
        return mat

    def log_matrix(self, weights: np.ndarray) -> np.ndarray:
        """Nystrom matrix of the pure log kernel -(1/2pi) sum_l log|x-y-l| e^{i kappa l}."""
        pref = -1.0 / (2.0 * np.pi)
        mat = pref * self.Q[0] * weights[None, :]
        if self.self_pair:
            corr = pref * self.ML[0] - (pref * self.ZQ[0] * weights[None, :]).sum(axis=1)
            mat[np.arange(mat.shape[0]), np.arange(mat.shape[0])] += corr
        return mat


def _local_disk_moments(nodes, center, radius, order, nth=64, nr=24):
    """Moments int_D r^(2m) dy and int_D r^(2m) log r dy around every node.

    Polar coordinates centred at the node, radial substitution r = rho t^2
    to soften the logarithmic integrand near zero.
    """
    th = 2.0 * np.pi * (np.arange(nth) + 0.5) / nth
    wth = 2.0 * np.pi / nth
    t, wt = np.polynomial.legendre.leggauss(nr)
    u = 0.5 * (t + 1.0)
    wu = 0.5 * wt
    n = nodes.shape[0]
    mom = np.zeros((order + 1, n))
    mom_log = np.zeros((order + 1, n))
    c = np.asarray(center, dtype=float)
    for pidx in range(n):
        dvec = nodes[pidx] - c
        b = dvec[0] * np.cos(th) + dvec[1] * np.sin(th)
        disc = b * b + radius * radius - dvec @ dvec
        rho = -b + np.sqrt(np.maximum(disc, 0.0))   # distance to the rim per angle
        r = rho[:, None] * (u * u)[None, :]
        dr = 2.0 * rho[:, None] * u[None, :] * wu[None, :]
        rdr = r * dr
        lg = np.log(np.where(r > 0.0, r, 1.0))
        r2m = np.ones_like(r)
        for m in range(order + 1):
            mom[m, pidx] = (r2m * rdr).sum() * wth
            mom_log[m, pidx] = (r2m * lg * rdr).sum() * wth
            if m < order:
                r2m = r2m * r * r
    return mom, mom_log


# -- public block assembly ---------------------------------------------------

@dataclass
class OperatorBlocks:
    """Discretized self and coupling operators at one (kappa, omega).

    K_blocks[i] is the full self operator on disk i; K0_blocks[i] and
    Km1_blocks[i] are its log-split parts (pure log kernel and
    phase-sum rank-one part); R_blocks[(i, j)] maps densities on disk i
    to values on disk j (i != j).  quadratures holds the per-disk rules
    and phase_sum the truncated lattice phase sum shared by all blocks.
    """

    K_blocks: list[np.ndarray]
    K0_blocks: list[np.ndarray]
    Km1_blocks: list[np.ndarray]
    R_blocks: dict[tuple[int, int], np.ndarray]
    quadratures: list[DiskQuadrature]
    phase_sum: complex
    trunc_radius: float
    kappa: np.ndarray
    omega: complex
    dk0: complex
    delta: float


class _Assembler:
    """Caches moment tables for one (geometry, lattice, kappa, quad) setup."""

    def __init__(self, geom: ParticleGeometry, spec: LatticeSpec, kappa,
                 trunc_radius: float, quad_order: tuple[int, int]):
        if spec.d != 2:
            raise DomainError("operator assembly is implemented for d = 2 (disks) only")
        self.geom = geom
        self.spec = spec
        self.kappa = np.asarray(kappa, dtype=float).reshape(spec.d)
        self.trunc_radius = float(trunc_radius)
        dil = geom.diluteness_in(spec)
        if dil >= 1.0:
            raise ValueError(f"diluteness {dil:.3f} >= 1: particles touch across cells")
        if dil > 0.5:
            warnings.warn(f"diluteness {dil:.3f} > 0.5", DilutenessWarning, stacklevel=3)
        self.lat_pts = lattice_points_within(spec, trunc_radius)
        self.phases = np.exp(1j * (self.lat_pts @ self.kappa))
        self.phase_sum = complex(self.phases.sum())
        self.quads = [
            DiskQuadrature.build(geom.centers[i], geom.radii[i], quad_order)
            for i in range(geom.n_particles)
        ]
        self.tables: dict[tuple[int, int], _PairTables] = {}
        for i in range(geom.n_particles):          # source
            for j in range(geom.n_particles):      # target
                self.tables[(i, j)] = _PairTables(
                    self.quads[i], self.quads[j], self.lat_pts, self.phases,
                    SERIES_ORDER, self_pair=(i == j),
                )


def assemble_blocks(
    geom: ParticleGeometry,
    spec: LatticeSpec,
    kappa,
    omega: complex,
    p: MaterialParams,
    trunc_radius: float = 6.0,
    quad_order: tuple[int, int] = (8, 16),
    check_quadrature: bool = True,
) -> OperatorBlocks:
    """Assemble all blocks at one (kappa, omega).

    Diagonal (singular) entries use the log split of the 2D kernel with
    a locally corrected Nystrom diagonal; off-diagonal blocks are plain
    Nystrom on the truncated quasiperiodic kernel.

    Raises QuadratureTooCoarse when the constant-mode projection of the
    self blocks moves by more than 1e-3 (relative) between quad_order
    and quad_order + 2.
    """
    asm = _Assembler(geom, spec, kappa, trunc_radius, quad_order)
    blocks = _blocks_from_assembler(asm, geom, p, omega)
    if check_quadrature:
        nr, nt = quad_order
        asm2 = _Assembler(geom, spec, kappa, trunc_radius, (nr + 2, nt + 4))
        fine = _blocks_from_assembler(asm2, geom, p, omega)
        for i in range(geom.n_particles):
            nu_c = constant_mode_projection(blocks, i)
            nu_f = constant_mode_projection(fine, i)
            rel = abs(nu_c - nu_f) / max(abs(nu_f), 1e-300)
            if rel > 1e-3:
                raise QuadratureTooCoarse(
                    f"disk {i}: projection moved by {rel:.2e} between orders {quad_order} "
                    f"and {(nr + 2, nt + 4)}"
                )
    return blocks


def _blocks_from_assembler(asm: _Assembler, geom: ParticleGeometry, p: MaterialParams,
                           omega: complex) -> OperatorBlocks:
    k0 = omega * math.sqrt(p.eps0 * p.mu0)
    dk0 = geom.delta * k0
    n = geom.n_particles
    K, K0, Km1 = [], [], []
    R: dict[tuple[int, int], np.ndarray] = {}
    pref = -1.0 / (2.0 * np.pi)
    for i in range(n):
        w = asm.quads[i].weights
        tab = asm.tables[(i, i)]
        K.append(tab.kernel_matrix(dk0, w))
        K0.append(tab.log_matrix(w))
        Km1.append(pref * asm.phase_sum * np.tile(w, (len(w), 1)))
    for i in range(n):
        for j in range(n):
            if i != j:
                R[(i, j)] = asm.tables[(i, j)].kernel_matrix(dk0, asm.quads[i].weights)
    return OperatorBlocks(
        K_blocks=K, K0_blocks=K0, Km1_blocks=Km1, R_blocks=R,
        quadratures=asm.quads, phase_sum=asm.phase_sum,
        trunc_radius=asm.trunc_radius, kappa=asm.kappa,
        omega=omega, dk0=dk0, delta=geom.delta,
    )


# -- spectral helpers --------------------------------------------------------

def _wdot(w: np.ndarray, u: np.ndarray, v: np.ndarray) -> complex:
    """Weighted bilinear pairing int u v (no conjugation)."""
    return complex(np.sum(w * u * v))


def _wnorm(w: np.ndarray, u: np.ndarray) -> float:
    return float(np.sqrt(np.sum(w * np.abs(u) ** 2).real))


def constant_hat(quad: DiskQuadrature) -> np.ndarray:
    """Normalized indicator 1/sqrt(|D|) at the quadrature nodes."""
    area = float(quad.weights.sum())
    return np.full(quad.nodes.shape[0], 1.0 / math.sqrt(area))


def constant_mode_projection(blocks: OperatorBlocks, i: int) -> complex:
    """<K_i 1hat, 1hat>: the constant-mode value of the self block."""
    quad = blocks.quadratures[i]
    one = constant_hat(quad)
    return _wdot(quad.weights, blocks.K_blocks[i] @ one, one)


def leading_eigenpair(blocks: OperatorBlocks, i: int, seed: np.ndarray | None = None,
                      tol: float = 1e-13) -> tuple[complex, np.ndarray]:
    """Dominant eigenpair of the self block K_i by power iteration.

    The eigenvector is normalized to unit weighted L2 norm.  Raises
    EigenFailure if the Rayleigh quotient has not settled after 10^4
    iterations.
    """
    quad = blocks.quadratures[i]
    w = quad.weights
    mat = blocks.K_blocks[i]
    v = constant_hat(quad).astype(complex) if seed is None else seed.astype(complex)
    v = v / _wnorm(w, v)
    lam_prev = None
    for _ in range(POWER_ITER_CAP):
        av = mat @ v
        norm = _wnorm(w, av)
        if norm == 0.0:
            raise EigenFailure("power iteration hit the zero vector")
        v_new = av / norm
        lam = complex(np.sum(w * np.conj(v_new) * (mat @ v_new)) / np.sum(w * np.abs(v_new) ** 2))
        if lam_prev is not None and abs(lam - lam_prev) <= tol * abs(lam):
            return lam, v_new
        lam_prev = lam
        v = v_new
    raise EigenFailure(f"power iteration did not converge in {POWER_ITER_CAP} steps")


def script_A(p: MaterialParams, omega: complex, delta: float, nu: complex) -> complex:
    """Pole-pencil amplitude delta^2 w^2 xi / (1 - delta^2 w^2 xi nu).

    Raises PolePencilSingular when the denominator is within cutoff of
    zero; that is itself a resonance indicator.
    """
    xi = xi_contrast(p, omega)
    num = delta * delta * omega * omega * xi
    den = 1.0 - num * nu
    if abs(den) < PENCIL_CUTOFF:
        raise PolePencilSingular(f"1 - delta^2 w^2 xi nu = {den!r} within cutoff")
    return num / den


@dataclass(frozen=True)
class ResonanceMatrix:
    """The N x N resonance matrix, its pole-pencil amplitudes and nu values."""

    entries: np.ndarray
    scriptA: np.ndarray
    nu: np.ndarray


def _mode_vectors(blocks: OperatorBlocks, path: str) -> tuple[list[np.ndarray], np.ndarray]:
    """Per-particle (phi, nu) for the requested path.

    'dilute': phi = normalized constant, nu its bilinear projection.
    'generic': phi = dominant eigenvector (bilinearly normalized), nu
    the dominant eigenvalue.
    """
    n = len(blocks.K_blocks)
    phis: list[np.ndarray] = []
    nus = np.empty(n, dtype=complex)
    for i in range(n):
        quad = blocks.quadratures[i]
        if path == "dilute":
            phi = constant_hat(quad).astype(complex)
            nus[i] = _wdot(quad.weights, blocks.K_blocks[i] @ phi, phi)
        elif path == "generic":
            lam, psi = leading_eigenpair(blocks, i)
            b = _wdot(quad.weights, psi, psi)
            if abs(b) < 1e-12:
                raise EigenFailure(f"disk {i}: eigenvector is bilinearly degenerate")
            phi = psi / np.sqrt(b)
            nus[i] = lam
        else:
            raise ValueError(f"unknown path {path!r}")
        phis.append(phi)
    return phis, nus


def resonance_matrix(
    blocks: OperatorBlocks,
    geom: ParticleGeometry,
    p: MaterialParams,
    omega: complex,
    delta: float,
    kappa=None,
    path: str = "dilute",
) -> ResonanceMatrix:
    """Build the N x N resonance matrix at an assembled (kappa, omega).

    Diagonal entries couple each particle to the next one (one-based
    index i+1 mod-floor N, which is the particle itself for N = 1);
    off-diagonal entries carry the pole-pencil amplitude.
    """
    n = geom.n_particles
    phis, nus = _mode_vectors(blocks, path)
    amps = np.array([script_A(p, omega, delta, nus[i]) for i in range(n)])

    def rmat(i, j):
        return blocks.K_blocks[i] if i == j else blocks.R_blocks[(i, j)]

    def proj(i, j):
        # <R_{D_i D_j} phi_i, phi_j> with the bilinear weighted pairing
        wj = blocks.quadratures[j].weights
        return _wdot(wj, rmat(i, j) @ phis[i], phis[j])

    entries = np.empty((n, n), dtype=complex)
    for i in range(n):
        nxt = mod_floor(i + 2, n) - 1   # zero-based successor of particle i
        diag = proj(i, nxt)
        for j in range(n):
            if i == j:
                entries[i, j] = diag
            else:
                entries[i, j] = -amps[i] * proj(j, i) * diag
    return ResonanceMatrix(entries=entries, scriptA=amps, nu=nus)


def lippmann_schwinger_residual(
    geom: ParticleGeometry,
    spec: LatticeSpec,
    p: MaterialParams,
    kappa,
    omega: complex,
    field_on_particles,
    blocks: OperatorBlocks | None = None,
    trunc_radius: float = 6.0,
    quad_order: tuple[int, int] = (8, 16),
) -> float:
    """Discrete residual of u - delta^2 w^2 xi [K u + sum R u] (no incident wave).

    field_on_particles is a list of node-value arrays, one per disk.
    Returns the weighted L2 norm of the stacked residual; callers
    compare against the same norm of the field itself.
    """
    if blocks is None:
        blocks = assemble_blocks(geom, spec, kappa, omega, p, trunc_radius, quad_order,
                                 check_quadrature=False)
    xi = xi_contrast(p, omega)
    fac = geom.delta ** 2 * omega * omega * xi
    n = geom.n_particles
    total = 0.0
    for i in range(n):
        u_i = np.asarray(field_on_particles[i], dtype=complex)
        acc = blocks.K_blocks[i] @ u_i
        for j in range(n):
            if j != i:
                acc = acc + blocks.R_blocks[(j, i)] @ np.asarray(field_on_particles[j], dtype=complex)
        res = u_i - fac * acc
        total += _wnorm(blocks.quadratures[i].weights, res) ** 2
    return float(math.sqrt(total))


# -- resonance search --------------------------------------------------------

class _CharFunction:
    """Pole-cleared characteristic function for the winding scan.

    Phi(w) = det(q(w) * diag(1 - d^2 w^2 xi nu_i) * K(w)) with
    q(w) = 1 - beta w^2 - i gamma w multiplying each row once, i.e.

      row i diagonal:      (q - d^2 w^2 mu0 alpha nu_i) * <R_{i,next} phi_i, phi_next>
      row i off-diagonal:  -d^2 w^2 mu0 alpha * <R_{ji} phi_j, phi_i> * <R_{i,next} ...>

    This clears both the pole-pencil denominators and the permittivity
    pole of xi, so Phi is analytic on the scan rectangle and its zeros
    inside it are exactly the resonances (plus zeros of the projection
    factors, which are filtered by the pencil check afterwards).
    """

    def __init__(self, asm: _Assembler, geom: ParticleGeometry, p: MaterialParams,
                 delta: float, path: str):
        self.asm = asm
        self.geom = geom
        self.p = p
        self.delta = delta
        self.path = path
        self._seeds: list[np.ndarray | None] = [None] * geom.n_particles

    def blocks(self, omega: complex) -> OperatorBlocks:
        return _blocks_from_assembler(self.asm, self.geom, self.p, omega)

    def modes(self, blocks: OperatorBlocks):
        n = self.geom.n_particles
        phis, nus = [], np.empty(n, dtype=complex)
        for i in range(n):
            quad = blocks.quadratures[i]
            if self.path == "dilute":
                phi = constant_hat(quad).astype(complex)
                nus[i] = _wdot(quad.weights, blocks.K_blocks[i] @ phi, phi)
            else:
                lam, psi = leading_eigenpair(blocks, i, seed=self._seeds[i])
                self._seeds[i] = psi
                b = _wdot(quad.weights, psi, psi)
                phi = psi / np.sqrt(b)
                nus[i] = lam
            phis.append(phi)
        return phis, nus

    def pencil(self, omega: complex) -> complex:
        """1 - delta^2 w^2 xi(w) nu_1(w); scalar oracle for the N = 1 case."""
        blocks = self.blocks(omega)
        _, nus = self.modes(blocks)
        xi = xi_contrast(self.p, omega)
        return 1.0 - self.delta ** 2 * omega ** 2 * xi * nus[0]

    def __call__(self, omega: complex) -> complex:
        blocks = self.blocks(omega)
        phis, nus = self.modes(blocks)
        n = self.geom.n_particles
        p = self.p
        q = 1.0 - p.beta * omega * omega - 1j * p.gamma * omega
        cleared = self.delta ** 2 * omega * omega * p.mu0 * complex(p.alpha)

        def rmat(i, j):
            return blocks.K_blocks[i] if i == j else blocks.R_blocks[(i, j)]

        def proj(i, j):
            wj = blocks.quadratures[j].weights
            return _wdot(wj, rmat(i, j) @ phis[i], phis[j])

        mat = np.empty((n, n), dtype=complex)
        for i in range(n):
            nxt = mod_floor(i + 2, n) - 1
            diag = proj(i, nxt)
            for j in range(n):
                if i == j:
                    mat[i, j] = (q - cleared * nus[i]) * diag
                else:
                    mat[i, j] = -cleared * proj(j, i) * diag
        return complex(np.linalg.det(mat))


def _cell_winding(fun, re0, re1, im0, im1, samples_per_edge=8, max_refine=14):
    """Winding number of fun around the rectangle boundary.

    Edge samples are refined until consecutive phase increments stay
    below pi/2, which pins the integer winding for a nonvanishing
    boundary.
    """
    corners = [re0 + 1j * im0, re1 + 1j * im0, re1 + 1j * im1, re0 + 1j * im1]
    pts: list[complex] = []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        ts = np.linspace(0.0, 1.0, samples_per_edge, endpoint=False)
        pts.extend(a + (b - a) * t for t in ts)
    vals = [fun(z) for z in pts]
    for _ in range(max_refine):
        new_pts: list[complex] = []
        new_vals: list[complex] = []
        refined = False
        m = len(pts)
        for idx in range(m):
            z0, z1 = pts[idx], pts[(idx + 1) % m]
            v0, v1 = vals[idx], vals[(idx + 1) % m]
            new_pts.append(z0)
            new_vals.append(v0)
            if v0 == 0 or v1 == 0:
                continue
            dphi = cmath.phase(v1 / v0)
            if abs(dphi) > 0.5 * math.pi:
                zm = 0.5 * (z0 + z1)
                new_pts.append(zm)
                new_vals.append(fun(zm))
                refined = True
        pts, vals = new_pts, new_vals
        if not refined:
            break
    total = 0.0
    m = len(vals)
    for idx in range(m):
        v0, v1 = vals[idx], vals[(idx + 1) % m]
        if v0 == 0 or v1 == 0:
            return None
        total += cmath.phase(v1 / v0)
    winding = total / (2.0 * math.pi)
    rounded = round(winding)
    if abs(winding - rounded) > 0.25:
        return None
    return int(rounded)


def _newton_polish(fun, z0, re0, re1, im0, im1, tol=1e-12, max_iter=60):
    z = z0
    span = max(re1 - re0, im1 - im0)
    for _ in range(max_iter):
        f0 = fun(z)
        h = 1e-7 * max(1.0, abs(z))
        d = (fun(z + h) - fun(z - h)) / (2.0 * h)
        if d == 0:
            return None
        step = f0 / d
        z_new = z - step
        if (z_new.real < re0 - 1.5 * span or z_new.real > re1 + 1.5 * span
                or z_new.imag < im0 - 1.5 * span or z_new.imag > im1 + 1.5 * span):
            return None
        if abs(step) < tol * max(1.0, abs(z_new)):
            return z_new
        z = z_new
    return None


def find_resonances(
    geom: ParticleGeometry,
    spec: LatticeSpec,
    p: MaterialParams,
    kappa,
    delta: float,
    search: tuple[complex, complex],
    grid: tuple[int, int] = (6, 4),
    trunc_radius: float = 6.0,
    quad_order: tuple[int, int] = (8, 16),
    path: str = "generic",
    pole_margin: float = 1e-6,
) -> list[complex]:
    """Locate complex resonant frequencies inside a search rectangle.

    Scans the winding number of the pole-cleared determinant over grid
    cells, then polishes each counted zero by Newton iteration with a
    numerical derivative.  Returned roots satisfy the pole-pencil
    resonance check; candidates that fail to converge are dropped with
    a warning.  The rectangle must keep a margin of ``pole_margin``
    from the permittivity poles.
    """
    lo, hi = complex(search[0]), complex(search[1])
    re0, re1 = sorted((lo.real, hi.real))
    im0, im1 = sorted((lo.imag, hi.imag))
    if p.beta > 0:
        poles = singular_frequencies(p)
        for wp in (poles.omega_plus, poles.omega_minus):
            inside_re = re0 - pole_margin <= wp.real <= re1 + pole_margin
            inside_im = im0 - pole_margin <= wp.imag <= im1 + pole_margin
            if inside_re and inside_im:
                raise ValueError(
                    f"search rectangle comes within {pole_margin:g} of the "
                    f"permittivity pole at {wp:.6g}"
                )
    if complex(p.alpha) == 0:
        return []

    if delta != geom.delta:
        geom = ParticleGeometry(centers=geom.centers, radii=geom.radii, delta=delta)
    asm = _Assembler(geom, spec, kappa, trunc_radius, quad_order)
    fun = _CharFunction(asm, geom, p, delta, path)

    n_re, n_im = grid
    res = np.linspace(re0, re1, n_re + 1)
    ims = np.linspace(im0, im1, n_im + 1)
    scale_samples = [abs(fun(r + 1j * i)) for r in res for i in ims]
    scale = float(np.median(scale_samples)) or 1.0

    roots: list[complex] = []

    def handle_cell(a, b, c, d, depth=0):
        wind = _cell_winding(fun, a, b, c, d)
        if wind is None:
            # unresolved boundary (possible root on the contour): perturb
            # by subdividing rather than silently skipping the cell
            if depth < 4:
                rm, imid = 0.5 * (a + b), 0.5 * (c + d)
                for cell in ((a, rm, c, imid), (rm, b, c, imid),
                             (a, rm, imid, d), (rm, b, imid, d)):
                    handle_cell(*cell, depth + 1)
            else:
                warnings.warn(
                    f"winding unresolved in cell [{a:.6g},{b:.6g}]x[{c:.6g},{d:.6g}]",
                    UserWarning,
                    stacklevel=2,
                )
            return
        if wind == 0:
            return
        if wind >= 2 and depth < 4:
            rm, imid = 0.5 * (a + b), 0.5 * (c + d)
            for cell in ((a, rm, c, imid), (rm, b, c, imid), (a, rm, imid, d), (rm, b, imid, d)):
                handle_cell(*cell, depth + 1)
            return
        z = _newton_polish(fun, complex(0.5 * (a + b), 0.5 * (c + d)), a, b, c, d)
        if z is None and depth < 4:
            rm, imid = 0.5 * (a + b), 0.5 * (c + d)
            for cell in ((a, rm, c, imid), (rm, b, c, imid), (a, rm, imid, d), (rm, b, imid, d)):
                handle_cell(*cell, depth + 1)
            return
        if z is None:
            warnings.warn(
                f"root candidate in cell [{a:.6g},{b:.6g}]x[{c:.6g},{d:.6g}] "
                "did not converge and was dropped",
                UserWarning,
                stacklevel=2,
            )
            return
        roots.append(z)

    for ci in range(n_re):
        for cj in range(n_im):
            handle_cell(res[ci], res[ci + 1], ims[cj], ims[cj + 1])

    accepted: list[complex] = []
    for z in roots:
        if not (re0 - 1e-12 <= z.real <= re1 + 1e-12 and im0 - 1e-12 <= z.imag <= im1 + 1e-12):
            continue
        if abs(fun(z)) > 1e-8 * scale:
            continue
        if geom.n_particles == 1 and abs(fun.pencil(z)) > 1e-6:
            continue  # zero of a projection factor, not a resonance
        if not any(abs(z - prev) < 1e-9 * max(1.0, abs(z)) for prev in accepted):
            accepted.append(z)
    accepted.sort(key=lambda z: (z.real, z.imag))
    return accepted
