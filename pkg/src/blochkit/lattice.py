"""Lattice, dual lattice and Brillouin-zone geometry for d_l <= d <= 3.

A lattice of dimension d_l embedded in R^d is generated by d_l linearly
independent vectors l_1..l_{d_l}; the dual generators a_i satisfy
a_i . l_j = 2*pi*delta_ij and span the same subspace.  Enumeration of
lattice points is deterministically ordered so partial sums downstream
are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLattice

DUALITY_TOL = 1e-12


@dataclass(frozen=True)
class LatticeSpec:
    """Generators, duals and cell volume of a d_l-dimensional lattice in R^d."""

    d: int
    d_l: int
    generators: np.ndarray  # (d_l, d), rows are generators
    duals: np.ndarray       # (d_l, d), rows are dual generators
    cell_volume: float

    @classmethod
    def make(cls, generators) -> "LatticeSpec":
        gens = np.atleast_2d(np.asarray(generators, dtype=float))
        d_l, d = gens.shape
        if d_l > d:
            raise DegenerateLattice(f"lattice dimension {d_l} exceeds space dimension {d}")
        duals = dual_lattice(gens)
        gram = gens @ gens.T
        vol = float(np.sqrt(np.linalg.det(gram)))
        spec = cls(d=d, d_l=d_l, generators=gens, duals=duals, cell_volume=vol)
        res = np.max(np.abs(duals @ gens.T - 2.0 * np.pi * np.eye(d_l)))
        if res > DUALITY_TOL:
            raise DegenerateLattice(f"duality residual {res:.3e} exceeds {DUALITY_TOL:g}")
        return spec


def dual_lattice(generators) -> np.ndarray:
    """Dual generators a_i with a_i . l_j = 2*pi*delta_ij, in span(generators)."""
    gens = np.atleast_2d(np.asarray(generators, dtype=float))
    d_l = gens.shape[0]
    gram = gens @ gens.T
    det = np.linalg.det(gram)
    scale = np.prod(np.linalg.norm(gens, axis=1)) ** 2
    if not np.isfinite(det) or abs(det) < 1e-24 * max(scale, 1.0):
        raise DegenerateLattice("generators are (numerically) linearly dependent")
    return 2.0 * np.pi * np.linalg.solve(gram, gens)


def fold_to_brillouin(kappa_real, spec: LatticeSpec) -> np.ndarray:
    """Reduce a real wavevector modulo the dual lattice into the centred cell.

    The component in span(generators) is written in dual coordinates and
    each coordinate is folded into [-1/2, 1/2); the orthogonal component
    is untouched.  Idempotent.
    """
    kappa = np.asarray(kappa_real, dtype=float).reshape(spec.d)
    coords = (spec.generators @ kappa) / (2.0 * np.pi)  # c_j = kappa . l_j / 2pi
    folded = (coords + 0.5) % 1.0 - 0.5
    return kappa + (folded - coords) @ spec.duals


def lattice_points_within(spec: LatticeSpec, radius: float) -> np.ndarray:
    """All lattice vectors m with |m| <= radius, ordered by (|m|, lexicographic)."""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    # Integer coordinate bounds: |c_i| = |m . a_i| / 2pi <= radius |a_i| / 2pi.
    bounds = np.floor(radius * np.linalg.norm(spec.duals, axis=1) / (2.0 * np.pi) + 1e-9).astype(int)
    axes = [np.arange(-b, b + 1) for b in bounds]
    if spec.d_l == 0:
        return np.zeros((1, spec.d))
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    pts = coords @ spec.generators
    norms2 = np.einsum("ij,ij->i", pts, pts)
    keep = norms2 <= radius * radius + 1e-9 * (1.0 + radius * radius)
    pts = pts[keep]
    norms2 = norms2[keep]
    order = np.lexsort(tuple(pts[:, j] for j in range(spec.d - 1, -1, -1)) + (np.round(norms2, 9),))
    return pts[order]


def square_lattice(period: float = 1.0) -> LatticeSpec:
    """Convenience: full-rank square lattice in R^2."""
    return LatticeSpec.make([[period, 0.0], [0.0, period]])


def chain_lattice(period: float = 2.0, d: int = 1) -> LatticeSpec:
    """Convenience: 1D chain of the given period embedded in R^d."""
    gen = np.zeros((1, d))
    gen[0, 0] = period
    return LatticeSpec.make(gen)
