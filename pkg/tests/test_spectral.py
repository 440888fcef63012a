import numpy as np
import pytest
from scipy.integrate import quad

from screenwave import build_mesh, make_screen
from screenwave.spectral import (assemble, assemble_mesh_matrix, basis_ft,
                                 bessel, build_quadrature, hypersingular,
                                 mesh_dof_factors, single_layer,
                                 symbol_integral, symbol_Z,
                                 truncated_kernel_ft)
from screenwave.spectral.factors import AxisFactor

SQRT2PI = np.sqrt(2 * np.pi)


class TestSymbolZ:
    def test_at_origin(self):
        assert symbol_Z(0.0, 2.0) == pytest.approx(2.0)

    def test_branch_point(self):
        assert symbol_Z(3.0, 3.0) == 0.0

    def test_evanescent(self):
        assert symbol_Z(2.0, 1.0) == pytest.approx(1j * np.sqrt(3.0))

    def test_branch_invariant(self):
        xi = np.linspace(0, 10, 401)
        z = symbol_Z(xi, 3.0)
        assert np.all(z.real >= 0) and np.all(z.imag >= 0)
        both = (z.real > 0) & (z.imag > 0)
        assert not np.any(both)

    def test_planar_points(self):
        pts = np.array([[3.0, 4.0]])   # |xi| = 5
        assert symbol_Z(pts, 1.0)[0] == pytest.approx(1j * np.sqrt(24.0))


class TestBasisFT:
    def test_p0_at_zero(self):
        f = AxisFactor("box", 0.0, 1.0)
        assert basis_ft(f, 0.0) == pytest.approx(1.0 / SQRT2PI)

    def test_p0_sinc_zero(self):
        f = AxisFactor("box", 0.0, 1.0)
        assert abs(basis_ft(f, 2 * np.pi)) < 1e-15

    def test_p1_hat_area(self):
        f = AxisFactor("hat", 0.0, 1.0)
        assert basis_ft(f, 0.0) == pytest.approx(1.0 / SQRT2PI)

    def test_conjugate_symmetry(self):
        f = AxisFactor("box", 0.37, 0.25)
        xi = np.linspace(-30, 30, 101)
        v = basis_ft(f, xi)
        assert np.allclose(v[::-1], np.conj(v), atol=1e-15)

    def test_zero_frequency_is_area(self):
        mesh = build_mesh(make_screen(3, [((0, 0), (1, 1))]), 0.25, "P0")
        fac = mesh_dof_factors(mesh)[0]
        area = mesh.h ** 2
        assert basis_ft(fac, np.array([[0.0, 0.0]]))[0] == pytest.approx(
            area / (2 * np.pi))

    def test_exp_terms_match_direct(self):
        for kind in ("box", "hat", "dhat"):
            f = AxisFactor(kind, 0.4, 0.125)
            p, terms = f.exp_terms()
            xi = np.linspace(2.0, 47.0, 23)
            recon = sum(a * np.exp(1j * w * xi) for a, w in terms) / xi ** p
            assert np.allclose(recon, f.value(xi), atol=1e-14)


class TestBuildQuadrature:
    def test_hypersingular_p0_rejected(self, p0_mesh8):
        with pytest.raises(ValueError, match="non-integrable"):
            build_quadrature(hypersingular(5.0), p0_mesh8)

    def test_panel_structure(self, p0_mesh8):
        quad_ = build_quadrature(single_layer(5.0), p0_mesh8, tol=1e-8)
        tags = [p.substitution for p in quad_.panels]
        assert tags == ["sin-sub", "cosh-sub", "plain"]
        assert quad_.panels[0].hi == pytest.approx(5.0)   # sin panel ends at k
        assert quad_.panels[1].lo == pytest.approx(5.0)   # cosh panel starts at k
        assert quad_.tail_bound <= 1e-8

    def test_parseval_gram(self, p0_mesh8):
        quad_ = build_quadrature(bessel(2.0, 0.0), p0_mesh8, tol=1e-10)
        g00 = symbol_integral(bessel(2.0, 0.0), 0, 0, quad_)
        assert g00 == pytest.approx(p0_mesh8.h, abs=1e-10)

    def test_refinement_self_consistency(self, p0_mesh8):
        coarse = assemble_mesh_matrix(single_layer(5.0), p0_mesh8, tol=1e-6)
        fine = assemble_mesh_matrix(single_layer(5.0), p0_mesh8, tol=1e-12)
        assert np.abs(coarse - fine).max() < 1e-6

    def test_unreachable_tolerance_is_numerical_failure(self):
        from screenwave.spectral import QuadratureError
        from screenwave.spectral.factors import AxisFactor, pair_profile
        from screenwave.spectral.tails import required_axis_Y

        prof = pair_profile(AxisFactor("dhat", 0.5, 0.25),
                            AxisFactor("dhat", 0.5, 0.25))
        with pytest.raises(QuadratureError, match="tolerance"):
            required_axis_Y(prof, other_abs=1.0, budget=1e-40,
                            has_subtracted=False)


class TestSymbolIntegral:
    def test_parseval_unit_element(self):
        mesh = build_mesh(make_screen(2, [(0.0, 1.0)]), 1.0, "P0")
        quad_ = build_quadrature(bessel(1.0, 0.0), mesh, tol=1e-12)
        val = symbol_integral(bessel(1.0, 0.0), 0, 0, quad_)
        assert val == pytest.approx(1.0, abs=1e-12)

    def test_disjoint_supports_orthogonal(self, p0_mesh8):
        quad_ = build_quadrature(bessel(3.0, 0.0), p0_mesh8, tol=1e-11)
        assert abs(symbol_integral(bessel(3.0, 0.0), 0, 5, quad_)) < 1e-11

    def test_single_layer_vs_brute_force(self):
        """Single element (0,1), k=1: independent real-line quadrature."""
        mesh = build_mesh(make_screen(2, [(0.0, 1.0)]), 1.0, "P0")
        k = 1.0

        def mod2(x):
            return np.sinc(x / (2 * np.pi)) ** 2 / (2 * np.pi)

        re = quad(lambda x: mod2(x) / np.sqrt(x * x - 1), 1, 60,
                  points=[1], limit=400)[0]
        re += quad(lambda x: mod2(x) / np.sqrt(x * x - 1), 60, np.inf,
                   limit=800)[0]
        im = quad(lambda x: mod2(x) / np.sqrt(1 - x * x), 0, 1, limit=200)[0]
        expected = re + 1j * im
        A = assemble_mesh_matrix(single_layer(k), mesh, tol=1e-10)
        assert A[0, 0] == pytest.approx(expected, abs=5e-9)

    def test_complex_symmetry(self, p0_mesh8):
        A = assemble_mesh_matrix(single_layer(4.0), p0_mesh8, tol=1e-10)
        assert np.abs(A - A.T).max() < 1e-12

    def test_entry_symmetry_under_index_swap(self, p0_mesh8):
        kind = single_layer(4.0)
        quad_ = build_quadrature(kind, p0_mesh8, tol=1e-10)
        a = symbol_integral(kind, 1, 6, quad_)
        b = symbol_integral(kind, 6, 1, quad_)
        assert abs(a - b) < 1e-12

    def test_sign_structure_single_layer(self, p0_mesh8, rng):
        A = assemble_mesh_matrix(single_layer(4.0), p0_mesh8, tol=1e-10)
        for _ in range(10):
            c = rng.standard_normal(p0_mesh8.n_dofs)
            q = np.vdot(c, A @ c)
            assert q.real >= -1e-12 and q.imag >= -1e-12

    def test_sign_structure_hypersingular(self, p1_mesh, rng):
        B = assemble_mesh_matrix(hypersingular(4.0), p1_mesh, tol=1e-10)
        for _ in range(10):
            c = rng.standard_normal(p1_mesh.n_dofs)
            q = np.vdot(c, B @ c)
            assert q.real <= 1e-12 and q.imag >= -1e-12

    def test_cross_family_assembly(self, p0_mesh8):
        fine = build_mesh(p0_mesh8.screen, p0_mesh8.h / 2, "P0")
        C = assemble(single_layer(3.0), mesh_dof_factors(fine),
                     mesh_dof_factors(p0_mesh8), tol=1e-9)
        # prolongation consistency: coarse self-pairing equals summed cross rows
        A = assemble_mesh_matrix(single_layer(3.0), p0_mesh8, tol=1e-9)
        P = np.zeros((fine.n_dofs, p0_mesh8.n_dofs))
        for i in range(fine.n_dofs):
            P[i, i // 2] = 1.0
        assert np.abs(P.T @ C - A).max() < 1e-8


class TestTruncatedKernelFT:
    def test_closed_form_n3_origin(self):
        # int_0^1 e^{ir}/(4pi) dr = (e^i - 1)/(4pi i)
        val = truncated_kernel_ft(0.0, 1.0, 1.0, 0.0, n=3)
        expected = (np.exp(1j) - 1.0) / (4j * np.pi)
        assert val == pytest.approx(expected, abs=1e-12)

    def test_conjugate_structure_n2(self):
        # cosine weight: the transform is even in xi
        a = truncated_kernel_ft(2.5, 1.0, 3.0, 0.0, n=2)
        b = truncated_kernel_ft(-2.5, 1.0, 3.0, 0.0, n=2)
        assert a == pytest.approx(b, abs=1e-13)

    def test_positive_at_center(self):
        v = truncated_kernel_ft(0.0, 1.0, 1.0, 0.0, n=2)
        assert abs(v) > 0

    def test_bound_shape_n3(self):
        # |Phi_L_hat| sqrt(k^2+xi^2) <= C (1 + sqrt(kL)) over a small grid
        L, vals = 1.0, []
        for k in (1.0, 4.0, 16.0, 64.0):
            for xi in (0.0, 0.5 * k, k, 2.0 * k):
                w = abs(truncated_kernel_ft(xi, L, k, 0.0, n=3))
                vals.append(w * np.sqrt(k * k + xi * xi) / (1 + np.sqrt(k * L)))
        vals = np.array(vals)
        assert vals.max() < 10 * vals.mean()   # a single constant fits
