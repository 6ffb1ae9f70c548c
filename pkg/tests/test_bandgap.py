import math

import numpy as np
import pytest

from blochkit import (
    ComplexPermittivity,
    DampedModel,
    GapKind,
    MaterialParams,
    NoPole,
    Side,
    cascade_near_pole,
    envelope_near_pole,
    find_gaps_complex,
    find_gaps_real,
    rhs_f,
    solve_kappa,
)


class TestFindGapsReal:
    def test_homogeneous_no_gaps(self, vacuum):
        assert find_gaps_real(vacuum, 0.1, 10.0, 400) == []

    def test_constant_eps_gap_edges_solve_abs_f_one(self, constant_eps2):
        gaps = find_gaps_real(constant_eps2, 0.05, 10.0, 800)
        assert gaps
        for g in gaps:
            for edge in (g.lo, g.hi):
                assert abs(abs(rhs_f(constant_eps2, edge).real) - 1.0) < 1e-9

    def test_gap_interior_and_exterior(self, constant_eps2):
        gaps = find_gaps_real(constant_eps2, 0.05, 10.0, 800)
        for g in gaps:
            mid = 0.5 * (g.lo + g.hi)
            assert abs(rhs_f(constant_eps2, mid).real) > 1.0
            assert solve_kappa(constant_eps2, mid).kappa_plus.imag > 0
            assert g.kind is GapKind.REAL_CRITERION
            assert g.lo <= g.peak_omega <= g.hi
        # points outside all gaps propagate
        rng = np.random.default_rng(2)
        for w in rng.uniform(0.05, 10.0, 200):
            if any(g.lo <= w <= g.hi for g in gaps):
                continue
            assert abs(solve_kappa(constant_eps2, float(w)).kappa_plus.imag) < 1e-8

    def test_near_pole_refinement(self, undamped_pole):
        gaps = find_gaps_real(undamped_pole, 0.9, 0.999, 4000)
        assert len(gaps) >= 3

    def test_complex_material_rejected(self, halide):
        with pytest.raises(ComplexPermittivity):
            find_gaps_real(halide, 0.1, 5.0, 100)


class TestFindGapsComplex:
    def test_homogeneous_empty(self, vacuum):
        assert find_gaps_complex(vacuum, 0.1, 5.0, 300) == []

    def test_halide_first_peak_near_pole(self, halide):
        # decay peaks open around the permittivity resonance: the first
        # (and largest) one sits within 0.1 of the pole's real part
        gaps = find_gaps_complex(halide, 0.05, 5.0, 1200)
        assert gaps
        first = min(gaps, key=lambda g: g.peak_omega)
        assert abs(first.peak_omega - math.sqrt(3.75) / 2) < 0.1
        assert first.peak_im_kappa == max(g.peak_im_kappa for g in gaps)
        for g in gaps:
            assert g.kind is GapKind.COMPLEX_CRITERION
            assert g.peak_im_kappa > 0

    def test_peak_is_local_max(self, halide):
        gaps = find_gaps_complex(halide, 0.05, 5.0, 1200)
        h = 5e-3
        for g in gaps:
            peak = abs(solve_kappa(halide, g.peak_omega).kappa_plus.imag)
            assert peak >= abs(solve_kappa(halide, g.peak_omega - h).kappa_plus.imag) - 1e-9
            assert peak >= abs(solve_kappa(halide, g.peak_omega + h).kappa_plus.imag) - 1e-9

    @pytest.mark.parametrize("alpha", [0.5, 2.0, 5.0])
    def test_criteria_agree_for_varied_real_materials(self, alpha):
        # each real-criterion gap lying fully inside the window hosts
        # exactly one decay peak (a gap clipped by the window edge has
        # its peak outside, where no grid local maximum can exist)
        lo, hi = 0.05, 8.0
        p = MaterialParams(alpha=alpha)
        real_gaps = find_gaps_real(p, lo, hi, 1200)
        complex_gaps = find_gaps_complex(p, lo, hi, 1200)
        interior = [g for g in real_gaps if g.lo > lo + 1e-9 and g.hi < hi - 1e-9]
        assert interior
        for rg in interior:
            inside = [cg for cg in complex_gaps if rg.lo <= cg.peak_omega <= rg.hi]
            assert len(inside) == 1

    def test_real_material_peaks_inside_real_gaps(self, constant_eps2):
        lo, hi, n = 0.05, 10.0, 1500
        real_gaps = find_gaps_real(constant_eps2, lo, hi, n)
        complex_gaps = find_gaps_complex(constant_eps2, lo, hi, n)
        assert len(complex_gaps) == len(real_gaps)
        grid_tol = (hi - lo) / n
        for cg, rg in zip(sorted(complex_gaps, key=lambda g: g.peak_omega),
                          sorted(real_gaps, key=lambda g: g.peak_omega)):
            mid = 0.5 * (rg.lo + rg.hi)
            assert abs(cg.peak_omega - mid) < max(5 * grid_tol, 0.05 * (rg.hi - rg.lo))


class TestCascadeNearPole:
    def test_ten_disjoint_ordered_gaps(self, undamped_pole):
        cas = cascade_near_pole(undamped_pole, 0.1, Side.BELOW, 10)
        assert len(cas.gaps) == 10
        assert cas.pole == pytest.approx(1.0)
        for a, b in zip(cas.gaps, cas.gaps[1:]):
            assert a.hi < b.lo  # disjoint, strictly ordered toward the pole
        assert all(g.hi < 1.0 for g in cas.gaps)
        assert all(g.lo < s < g.hi for g, s in zip(cas.gaps, cas.sentinel_points))

    def test_sentinels_alternate_f_sign(self, undamped_pole):
        cas = cascade_near_pole(undamped_pole, 0.1, Side.BELOW, 8)
        fvals = [rhs_f(undamped_pole, s).real for s in cas.sentinel_points]
        # sin(sigma0) > 0 here: f < -1 at sin(rho sigma0) = +1 sentinels,
        # f > +1 at sin = -1 sentinels, strictly alternating
        signs = [1 if f > 0 else -1 for f in fvals]
        assert all(abs(f) > 1 for f in fvals)
        assert all(s1 != s2 for s1, s2 in zip(signs, signs[1:]))

    def test_requested_counts_always_available(self, undamped_pole):
        for count in (5, 10, 20):
            cas = cascade_near_pole(undamped_pole, 0.1, Side.BELOW, count)
            assert len(cas.gaps) == count

    def test_above_side_mirrors(self, undamped_pole):
        below = cascade_near_pole(undamped_pole, 0.1, Side.BELOW, 4)
        above = cascade_near_pole(undamped_pole, 0.1, Side.ABOVE, 4)
        assert above.pole == pytest.approx(-1.0)
        for g_b, g_a in zip(below.gaps, above.gaps):
            assert g_a.lo == pytest.approx(-g_b.hi)
            assert g_a.hi == pytest.approx(-g_b.lo)

    def test_damped_rejected(self, halide):
        with pytest.raises(DampedModel):
            cascade_near_pole(halide, 0.1, Side.BELOW, 3)

    def test_no_pole_rejected(self, constant_eps2):
        with pytest.raises(NoPole):
            cascade_near_pole(constant_eps2, 0.1, Side.BELOW, 3)

    def test_alpha_zero_no_pole(self):
        # beta > 0 but alpha = 0: eps is constant, there is nothing to cascade
        p = MaterialParams(alpha=0.0, beta=1.0, gamma=0.0)
        with pytest.raises(NoPole):
            cascade_near_pole(p, 0.1, Side.BELOW, 3)


class TestEnvelopeNearPole:
    def test_strictly_increasing_maxima(self, undamped_pole):
        env = envelope_near_pole(undamped_pole, [0.1, 0.01, 0.001])
        vals = [v for _, v in env]
        assert vals[0] < vals[1] < vals[2]

    def test_exceeds_two_on_hundredth(self, undamped_pole):
        env = envelope_near_pole(undamped_pole, [0.01])
        assert env[0][1] > 2.0

    def test_homogeneous_zeros(self):
        p = MaterialParams(alpha=0.0, beta=1.0, gamma=0.0)
        env = envelope_near_pole(p, [0.1, 0.01])
        assert all(v == pytest.approx(0.0, abs=1e-12) for _, v in env)

    def test_damped_rejected(self, halide):
        with pytest.raises(DampedModel):
            envelope_near_pole(halide, [0.1])

    def test_rejects_ascending_deltas(self, undamped_pole):
        with pytest.raises(ValueError):
            envelope_near_pole(undamped_pole, [0.01, 0.1])
