import math

import numpy as np
import pytest

from fpualt import (DegenerateSpectrumError, IntegratorConfig, ReducedState,
                    build_reduced, eigendecompose, eval_accel_reduced,
                    eval_qh_rhs, integrate, load_system, pair_eigenvalues,
                    save_system, to_quasi_harmonic)
from fpualt.linalg import jacobi_eigh
from fpualt.reduction import ReducedSystem
from fpualt.spectral import all_pair_eigenvalues


class TestJacobi:
    def test_against_lapack(self, rng):
        for n in (1, 2, 5, 20, 46):
            m = rng.standard_normal((n, n))
            a = 0.5 * (m + m.T)
            w, v = jacobi_eigh(a)
            ref = np.sort(np.linalg.eigvalsh(a))
            assert np.abs(np.sort(w) - ref).max() <= 1e-12 * max(1, np.abs(a).max())
            assert np.abs(a @ v - v * w[None, :]).max() <= 1e-12 * np.abs(a).max()
            assert np.abs(v.T @ v - np.eye(n)).max() <= 1e-13

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            jacobi_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestPairEigenvalues:
    def test_p3_values(self):
        lo, hi = pair_eigenvalues(0.01, 3, 1)
        assert lo == pytest.approx(0.0149623, abs=5e-8)
        assert hi == pytest.approx(2.0050377, abs=5e-8)

    def test_p5_closed_forms(self):
        # the two pairs match a+1 -/+ sqrt(1 - (1 -/+ sqrt5)/2 a + a^2)
        for a in (0.01, 0.17, 1.3):
            s5 = math.sqrt(5.0)
            lo1, hi1 = pair_eigenvalues(a, 5, 1)
            lo2, hi2 = pair_eigenvalues(a, 5, 2)
            r1 = math.sqrt(1.0 - 0.5 * (1.0 - s5) * a + a * a)
            r2 = math.sqrt(1.0 - 0.5 * (1.0 + s5) * a + a * a)
            assert lo1 == pytest.approx(a + 1 - r1, abs=1e-14)
            assert hi1 == pytest.approx(a + 1 + r1, abs=1e-14)
            assert lo2 == pytest.approx(a + 1 - r2, abs=1e-14)
            assert hi2 == pytest.approx(a + 1 + r2, abs=1e-14)

    def test_p9_published_list(self):
        published = {0.019391, 2.00061, 0.0149623, 2.00504,
                     0.00821511, 2.01178, 0.00231905, 2.01768}
        ours = sorted(all_pair_eigenvalues(0.01, 9))
        for val in published:
            assert min(abs(val - x) for x in ours) <= 5e-6

    def test_pair_sum_identity(self):
        for p in range(3, 49, 2):
            for a in (0.01, 0.001):
                for j in range(1, (p - 1) // 2 + 1):
                    lo, hi = pair_eigenvalues(a, p, j)
                    assert abs(lo + hi - (2 + 2 * a)) <= 1e-12

    def test_range_check(self):
        with pytest.raises(ValueError, match="pair index"):
            pair_eigenvalues(0.01, 5, 3)


class TestEigendecompose:
    @pytest.mark.parametrize("p", [3, 9, 23, 47])
    def test_invariants(self, p):
        sys = build_reduced(p, 0.01, 1.0)
        basis = eigendecompose(sys)
        d = p - 1
        # conjugation: M^{-1} K T = T Lambda
        minvk = (1.0 / sys.masses)[:, None] * sys.stiffness
        assert np.abs(minvk @ basis.t - basis.t * basis.lambdas[None, :]).max() <= 1e-10
        # matches the closed forms, in pair order
        assert np.abs(basis.lambdas - all_pair_eigenvalues(0.01, p)).max() <= 1e-9
        # pair sums
        sums = basis.lambdas[0::2] + basis.lambdas[1::2]
        assert np.abs(sums - 2.02).max() <= 1e-12
        # acoustic/optical windows and labels
        for i, lab in enumerate(basis.labels):
            lam = basis.lambdas[i]
            if i % 2 == 0:
                assert lab.kind == "acoustic" and 0 < lam < 4 * 0.01
            else:
                assert lab.kind == "optical" and lam > 2
            assert lab.pair == i // 2 + 1
        # M-weighted unit columns, dominant entry positive
        mnorm = np.einsum("ij,i,ij->j", basis.t, sys.masses, basis.t)
        assert np.abs(mnorm - 1).max() <= 1e-12
        dominant = np.argmax(np.abs(basis.t), axis=0)
        assert np.all(basis.t[dominant, np.arange(d)] > 0)
        # exact inverse
        assert np.abs(basis.t @ basis.t_inv - np.eye(d)).max() <= 1e-12
        assert np.abs(basis.t_inv @ basis.t - np.eye(d)).max() <= 1e-12

    def test_p3_lambda_values(self):
        basis = eigendecompose(build_reduced(3, 0.01, 1.0))
        assert basis.lambdas[0] == pytest.approx(0.0149623, abs=5e-8)
        assert basis.lambdas[1] == pytest.approx(2.0050377, abs=5e-8)

    def test_degenerate_spectrum_refused(self):
        # a synthetic system whose linear part has a double eigenvalue
        d = 4
        sys = ReducedSystem(p=5, a=0.01, alpha=1.0, masses=np.ones(d),
                            stiffness=np.eye(d), w=np.zeros((d, d, d)))
        with pytest.raises(DegenerateSpectrumError):
            eigendecompose(sys)


class TestQuasiHarmonic:
    def test_change_of_variables_identity(self, systems, rng):
        for p in (3, 5, 9):
            red, basis, qh = systems[p]
            for _ in range(100 if p == 3 else 30):
                x = rng.uniform(-0.5, 0.5, p - 1)
                q = basis.t @ x
                lhs = basis.t_inv @ eval_accel_reduced(red, ReducedState(q, np.zeros(p - 1)))
                rhs = eval_qh_rhs(qh, x)
                scale = max(1.0, np.abs(lhs).max())
                assert np.abs(lhs - rhs).max() <= 1e-9 * scale

    def test_roundtrip_coordinates(self, systems, rng):
        red, basis, _ = systems[9]
        q = rng.uniform(-1, 1, 8)
        assert np.abs(basis.t @ (basis.t_inv @ q) - q).max() <= 1e-12

    def test_alpha_scales_at_evaluation(self, systems):
        _, _, qh = systems[3]
        x = np.array([0.3, -0.2])
        base = eval_qh_rhs(qh, x, alpha=0.0)
        assert np.abs(base + qh.lambdas * x).max() == 0.0
        full = eval_qh_rhs(qh, x, alpha=1.0)
        twice = eval_qh_rhs(qh, x, alpha=2.0)
        assert np.abs((twice - base) - 2.0 * (full - base)).max() <= 1e-14

    def test_p5_square_placement(self, systems):
        # squares of pair 1 modes live only in pair 2 equations and vice versa
        _, _, qh = systems[5]
        thresh = 1e-10 * qh.tensor_scale()
        for sq_mode, eqs in ((1, (3, 4)), (2, (3, 4)), (3, (1, 2)), (4, (1, 2))):
            present = {r + 1 for r in range(4)
                       if abs(qh.bilinear[r, sq_mode - 1, sq_mode - 1]) > thresh}
            assert present == set(eqs)

    def test_trajectory_equivalence(self, systems, rng):
        # x-dynamics and q-dynamics agree after transformation
        red, basis, qh = systems[3]
        q0 = rng.uniform(-0.2, 0.2, 2)
        v0 = rng.uniform(-0.02, 0.02, 2)
        cfg = IntegratorConfig(t_end=200.0, sample_dt=1.0)
        tr_q = integrate(red, np.concatenate([q0, v0]), cfg)
        x0 = basis.t_inv @ q0
        u0 = basis.t_inv @ v0
        tr_x = integrate(qh, np.concatenate([x0, u0]), cfg)
        assert tr_q.ok and tr_x.ok
        q_from_x = tr_x.positions() @ basis.t.T
        assert np.abs(q_from_x - tr_q.positions()).max() <= 1e-7


class TestSystemFiles:
    def test_roundtrip(self, systems, tmp_path):
        _, _, qh = systems[5]
        path = tmp_path / "p5.txt"
        save_system(qh, path)
        loaded = load_system(path)
        assert loaded.p == 5 and loaded.a == 0.01 and loaded.alpha == 1.0
        assert np.abs(loaded.lambdas - qh.lambdas).max() == 0.0
        assert np.abs(loaded.bilinear - qh.bilinear).max() <= 1e-17
        assert [(l.kind, l.pair) for l in loaded.labels] == \
               [(l.kind, l.pair) for l in qh.labels]

    def test_comments_and_errors(self, tmp_path):
        good = tmp_path / "ok.txt"
        good.write_text("# comment\n3 0.01 1.0\n0.5 acoustic 1\n1.5 optical 1\n"
                        "1 1 2 0.25  # inline comment\n")
        sys = load_system(good)
        assert sys.dof == 2 and sys.monomial(1, 1, 2) == 0.25

        bad = tmp_path / "bad.txt"
        bad.write_text("3 0.01 1.0\n0.5 acoustic 1\nnot a line at all here\n")
        with pytest.raises(ValueError, match="unrecognised"):
            load_system(bad)

        out_of_range = tmp_path / "range.txt"
        out_of_range.write_text("3 0.01 1.0\n0.5 acoustic 1\n1.5 optical 1\n"
                                "1 2 3 0.25\n")
        with pytest.raises(ValueError, match="out of range"):
            load_system(out_of_range)
