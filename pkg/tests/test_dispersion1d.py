import cmath
import math

import numpy as np
import pytest

from blochkit import (
    DegenerateContrast,
    MaterialParams,
    kappa_re_im,
    l1_l2,
    rhs_f,
    solve_kappa,
    tail_im_report,
)

# 50-digit arithmetic reference for f at the halide parameters, omega = 1.
F_HALIDE_AT_1 = -0.723402525718769 - 0.8789132693678721j


def fold_dist(a: complex, b: complex) -> float:
    """Distance between Bloch parameters modulo the pi real-part period."""
    dre = abs(a.real - b.real) % math.pi
    dre = min(dre, math.pi - dre)
    return math.hypot(dre, a.imag - b.imag)


class TestRhsF:
    def test_alpha_zero_gives_cos_2sigma(self, vacuum):
        for w in (0.2, 1.1, 4.4):
            assert rhs_f(vacuum, w) == pytest.approx(math.cos(2 * w), abs=1e-14)

    def test_omega_zero_is_one(self, halide):
        assert rhs_f(halide, 0.0) == pytest.approx(1.0)

    def test_high_precision_reference(self, halide):
        assert rhs_f(halide, 1.0) == pytest.approx(F_HALIDE_AT_1, abs=1e-12)

    def test_transfer_matrix_trace_oracle(self, halide):
        # independent route: half the trace of the unit-cell transfer
        # matrix (background layer then particle layer, transferring
        # (u, u') with continuity) must reproduce f(omega)
        from blochkit import contrast, wavenumbers

        def layer(q, length=1.0):
            c, s = np.cos(q * length), np.sin(q * length)
            return np.array([[c, s / q], [-q * s, c]], dtype=complex)

        rng = np.random.default_rng(41)
        for w in rng.uniform(0.1, 15.0, 100):
            w = float(w)
            sigma0, sigmac = wavenumbers(halide, w)
            t = layer(sigmac) @ layer(sigma0)
            assert abs(0.5 * np.trace(t) - rhs_f(halide, w)) < 1e-11


class TestSolveKappa:
    def test_homogeneous_quarter_pi(self, vacuum):
        bp = solve_kappa(vacuum, math.pi / 4)
        ks = sorted((bp.kappa_plus, bp.kappa_minus), key=lambda z: z.real)
        assert ks[1] == pytest.approx(math.pi / 4, abs=1e-14)
        assert ks[0] == pytest.approx(-math.pi / 4, abs=1e-14)
        assert abs(bp.kappa_plus.imag) < 1e-14

    def test_real_gap_pure_imaginary(self, constant_eps2):
        # inside a gap of the real-permittivity crystal, f < -1 and
        # Re kappa sits at the zone edge, Im kappa = arccosh(|f|)/2
        w = 1.32
        f = rhs_f(constant_eps2, w)
        assert f.real < -1
        bp = solve_kappa(constant_eps2, w)
        assert abs(abs(bp.kappa_plus.real) - math.pi / 2) < 1e-12
        assert bp.kappa_plus.imag == pytest.approx(math.acosh(-f.real) / 2, abs=1e-10)

    def test_real_gap_f_above_one(self, constant_eps2):
        # in the second gap f > +1: Re kappa saturates at 0 instead
        w = 2.6
        f = rhs_f(constant_eps2, w)
        assert f.real > 1
        bp = solve_kappa(constant_eps2, w)
        assert abs(bp.kappa_plus.real) < 1e-12
        assert bp.kappa_plus.imag == pytest.approx(math.acosh(f.real) / 2, abs=1e-10)

    def test_residual_oracle_halide(self, halide):
        bp = solve_kappa(halide, 2.0)
        for k in (bp.kappa_plus, bp.kappa_minus):
            assert abs(cmath.cos(2 * k) - bp.f_value) < 1e-10

    def test_branch_pair_symmetry(self, halide):
        rng = np.random.default_rng(7)
        for w in rng.uniform(0.05, 20.0, 300):
            bp = solve_kappa(halide, float(w))
            assert bp.kappa_plus.imag >= 0
            assert fold_dist(bp.kappa_minus, -bp.kappa_plus) < 1e-12
            assert bp.residual < 1e-9

    def test_quadratic_root_product_is_one(self, halide):
        # z+- = e^{2i kappa+-} are roots of a quadratic with equal first
        # and last coefficients, so their product is exactly 1.
        rng = np.random.default_rng(11)
        for w in rng.uniform(0.05, 20.0, 200):
            bp = solve_kappa(halide, float(w))
            zp = cmath.exp(2j * bp.kappa_plus)
            zm = cmath.exp(2j * bp.kappa_minus)
            assert abs(zp * zm - 1.0) < 1e-9

    def test_real_permittivity_dichotomy(self, constant_eps2):
        rng = np.random.default_rng(3)
        for w in rng.uniform(0.05, 20.0, 400):
            bp = solve_kappa(constant_eps2, float(w))
            im_small = abs(bp.kappa_plus.imag) < 1e-8
            sin_small = abs(math.sin(2 * bp.kappa_plus.real)) < 1e-8
            assert im_small != sin_small


class TestL1L2:
    def test_alpha_zero(self, vacuum):
        for w in (0.4, 2.0):
            l1, l2 = l1_l2(vacuum, w)
            assert l1 == pytest.approx(math.cos(2 * w), abs=1e-14)
            assert l2 == pytest.approx(0.0, abs=1e-14)

    def test_f_identity(self, halide):
        rng = np.random.default_rng(5)
        for w in rng.uniform(0.05, 20.0, 300):
            f = rhs_f(halide, float(w))
            l1, l2 = l1_l2(halide, float(w))
            assert abs(f - (l1 - 1j * l2)) < 1e-10

    def test_real_constant_l2_vanishes(self, constant_eps2):
        for w in (0.3, 1.7, 6.1):
            _, l2 = l1_l2(constant_eps2, w)
            assert l2 == pytest.approx(0.0, abs=1e-14)

    def test_degenerate_contrast_at_eps_zero(self):
        # alpha = -1 makes eps identically zero: contrast degenerates
        p_zero = MaterialParams(alpha=-1.0)
        with pytest.raises(DegenerateContrast):
            l1_l2(p_zero, 1.0)
        with pytest.raises(DegenerateContrast):
            rhs_f(p_zero, 1.0)


class TestKappaReIm:
    def test_homogeneous(self, vacuum):
        k1, k2 = kappa_re_im(vacuum, math.pi / 4, +1)
        assert (k1, k2) == pytest.approx((math.pi / 4, 0.0), abs=1e-14)

    def test_signs_give_opposite_points(self, halide):
        k1p, k2p = kappa_re_im(halide, 2.0, +1)
        k1m, k2m = kappa_re_im(halide, 2.0, -1)
        assert (k1m, k2m) == pytest.approx((-k1p, -k2p), abs=1e-12)

    def test_real_gap_closed_form(self, constant_eps2):
        w = 1.32  # inside the first gap, f < -1
        l1, _ = l1_l2(constant_eps2, w)
        k1, k2 = kappa_re_im(constant_eps2, w, +1)
        assert abs(abs(k1) - math.pi / 2) < 1e-12
        assert abs(k2) == pytest.approx(math.acosh(abs(l1)) / 2, abs=1e-10)

    def test_satisfies_system_brute_force(self, constant_eps2):
        # brute-force scan of the (k1, k2) system confirms the closed form
        w = 1.32
        l1, l2 = l1_l2(constant_eps2, w)
        k1s = np.linspace(-math.pi / 2, math.pi / 2, 801)
        k2s = np.linspace(-3.0, 3.0, 801)
        g1 = np.cos(2 * k1s)[:, None] * np.cosh(2 * k2s)[None, :] - l1
        g2 = np.sin(2 * k1s)[:, None] * np.sinh(2 * k2s)[None, :] - l2
        err = np.abs(g1) + np.abs(g2)
        i, j = np.unravel_index(np.argmin(err), err.shape)
        k1, k2 = kappa_re_im(constant_eps2, w, +1)
        # the brute-force grid minimum must sit within a cell of one solution branch
        cands = [(k1, k2), (-k1, -k2)]
        assert min(math.hypot(k1s[i] - a, k2s[j] - b) for a, b in cands) < 2e-2

    def test_route_equivalence_random(self, halide):
        rng = np.random.default_rng(13)
        for w in rng.uniform(0.05, 20.0, 500):
            bp = solve_kappa(halide, float(w))
            k1, k2 = kappa_re_im(halide, float(w), +1)
            pt = complex(k1, k2)
            d = min(fold_dist(pt, bp.kappa_plus), fold_dist(pt, bp.kappa_minus))
            assert d < 1e-8

    def test_system_residual(self, halide):
        rng = np.random.default_rng(17)
        for w in rng.uniform(0.05, 20.0, 200):
            l1, l2 = l1_l2(halide, float(w))
            for sign in (+1, -1):
                k1, k2 = kappa_re_im(halide, float(w), sign)
                assert abs(math.cos(2 * k1) * math.cosh(2 * k2) - l1) < 1e-8
                assert abs(math.sin(2 * k1) * math.sinh(2 * k2) - l2) < 1e-8


class TestTailImReport:
    def test_damped_tail_decays(self, halide):
        rep = tail_im_report(halide, np.linspace(50.0, 60.0, 200))
        assert not rep.skipped
        assert max(v for _, v in rep.points) < 0.01

    def test_complex_alpha_growth(self):
        p = MaterialParams(alpha=1 + 1j)
        rep = tail_im_report(p, [5.0, 50.0])
        vals = dict(rep.points)
        assert vals[50.0] > vals[5.0]

    def test_homogeneous_all_zero(self, vacuum):
        rep = tail_im_report(vacuum, np.linspace(1.0, 10.0, 50))
        assert all(v == pytest.approx(0.0, abs=1e-14) for _, v in rep.points)

    def test_skips_degenerate_points(self):
        # alpha = -1 makes eps identically zero: every point is flagged
        p_zero = MaterialParams(alpha=-1.0)
        rep = tail_im_report(p_zero, [1.0, 2.0])
        assert not rep.points
        assert len(rep.skipped) == 2

    def test_rejects_unsorted_grid(self, halide):
        with pytest.raises(ValueError):
            tail_im_report(halide, [2.0, 1.0])
