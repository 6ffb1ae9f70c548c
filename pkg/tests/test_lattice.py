import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blochkit import (
    DegenerateLattice,
    LatticeSpec,
    chain_lattice,
    dual_lattice,
    fold_to_brillouin,
    lattice_points_within,
    square_lattice,
)


class TestDualLattice:
    def test_1d_period_two(self):
        duals = dual_lattice([[2.0]])
        assert duals[0, 0] == pytest.approx(math.pi)

    def test_unit_square(self):
        duals = dual_lattice([[1.0, 0.0], [0.0, 1.0]])
        assert duals == pytest.approx(2 * math.pi * np.eye(2))

    def test_hexagonal(self):
        gens = [[1.0, 0.0], [0.5, math.sqrt(3) / 2]]
        duals = dual_lattice(gens)
        res = np.abs(duals @ np.asarray(gens).T - 2 * math.pi * np.eye(2))
        assert res.max() < 1e-12

    def test_chain_in_2d(self):
        spec = chain_lattice(period=2.0, d=2)
        assert spec.duals[0] == pytest.approx([math.pi, 0.0])

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateLattice):
            dual_lattice([[1.0, 0.0], [2.0, 0.0]])


class TestFoldToBrillouin:
    def test_1d_multiple_of_dual_folds_to_zero(self):
        # kappa = pi is the dual generator of the period-2 chain, so it
        # is equivalent to 0 in [-pi/2, pi/2)
        spec = chain_lattice(period=2.0, d=1)
        assert fold_to_brillouin([math.pi], spec)[0] == pytest.approx(0.0, abs=1e-14)

    def test_1d_zone_edge_maps_to_lower_edge(self):
        spec = chain_lattice(period=2.0, d=1)
        assert fold_to_brillouin([math.pi / 2], spec)[0] == pytest.approx(-math.pi / 2)

    def test_unchanged_inside(self):
        spec = square_lattice(1.0)
        k = np.array([0.3, -0.8])
        assert fold_to_brillouin(k, spec) == pytest.approx(k)

    def test_2d_square_3pi(self):
        spec = square_lattice(1.0)
        folded = fold_to_brillouin([3 * math.pi, 0.0], spec)
        # modular-arithmetic oracle: 3pi - 2pi*round(3pi / 2pi) = -pi ... folded
        # representative in [-pi, pi) is -pi
        assert folded == pytest.approx([-math.pi, 0.0])

    @given(st.floats(-30.0, 30.0), st.floats(-30.0, 30.0))
    @settings(max_examples=100, deadline=None)
    def test_idempotent(self, kx, ky):
        spec = square_lattice(1.0)
        once = fold_to_brillouin([kx, ky], spec)
        twice = fold_to_brillouin(once, spec)
        assert np.allclose(once, twice, atol=1e-12)

    def test_orthogonal_component_preserved(self):
        spec = chain_lattice(period=2.0, d=2)
        folded = fold_to_brillouin([5.0, 0.77], spec)
        assert folded[1] == pytest.approx(0.77)
        assert -math.pi / 2 - 1e-12 <= folded[0] < math.pi / 2 + 1e-12


class TestLatticePointsWithin:
    def test_radius_zero(self):
        pts = lattice_points_within(square_lattice(1.0), 0.0)
        assert pts.shape == (1, 2)
        assert np.allclose(pts, 0.0)

    def test_1d_period_two_radius_five(self):
        pts = lattice_points_within(chain_lattice(period=2.0, d=1), 5.0)
        assert sorted(pts[:, 0].tolist()) == [-4.0, -2.0, 0.0, 2.0, 4.0]

    def test_unit_square_radius_2p5(self):
        pts = lattice_points_within(square_lattice(1.0), 2.5)
        assert len(pts) == 21  # brute-force enumeration over the box

    def test_brute_force_cross_check(self):
        spec = LatticeSpec.make([[1.0, 0.2], [-0.1, 0.9]])
        r = 3.3
        pts = lattice_points_within(spec, r)
        brute = set()
        for i in range(-10, 11):
            for j in range(-10, 11):
                v = i * np.array([1.0, 0.2]) + j * np.array([-0.1, 0.9])
                if np.linalg.norm(v) <= r + 1e-12:
                    brute.add((round(v[0], 9), round(v[1], 9)))
        got = {(round(x, 9), round(y, 9)) for x, y in pts}
        assert got == brute

    def test_symmetric_under_negation(self):
        pts = lattice_points_within(square_lattice(1.0), 3.7)
        keys = {(round(x, 9), round(y, 9)) for x, y in pts}
        assert all((-x, -y) in keys for x, y in keys)

    def test_deterministic_ordering(self):
        a = lattice_points_within(square_lattice(1.0), 4.0)
        b = lattice_points_within(square_lattice(1.0), 4.0)
        assert np.array_equal(a, b)
        norms = np.linalg.norm(a, axis=1)
        assert np.all(np.diff(np.round(norms, 9)) >= 0)


class TestLatticeSpec:
    def test_duality_invariant(self):
        spec = LatticeSpec.make([[1.3, 0.1], [0.2, 0.8]])
        res = np.abs(spec.duals @ spec.generators.T - 2 * math.pi * np.eye(2))
        assert res.max() < 1e-12

    def test_cell_volume(self):
        spec = LatticeSpec.make([[2.0, 0.0], [0.0, 3.0]])
        assert spec.cell_volume == pytest.approx(6.0)
