import math

import numpy as np
import pytest

from fpualt import (IntegratorConfig, QuasiHarmonicSystem, ReducedState,
                    build_reduced, cartoon_system, classify_equilibrium,
                    energy_drift, find_equilibria, first_order_response,
                    integrate, integrate_fixed_step, load_reference,
                    mode_actions)
from fpualt.dynamics import energy_function


def single_mode(lam=1.0):
    return QuasiHarmonicSystem(lambdas=np.array([lam]),
                               bilinear=np.zeros((1, 1, 1)),
                               labels=(None,), alpha=0.0)


class TestIntegratorBasics:
    def test_config_validation(self):
        with pytest.raises(ValueError, match="abs_tol"):
            IntegratorConfig(t_end=1.0, abs_tol=1e-3).validate()
        with pytest.raises(ValueError, match="sample_dt"):
            IntegratorConfig(t_end=1.0, sample_dt=0.0).validate()
        with pytest.raises(ValueError, match="t_end"):
            IntegratorConfig(t_end=-2.0).validate()

    def test_harmonic_oscillator_period(self):
        tr = integrate(single_mode(1.0), np.array([1.0, 0.0]),
                       IntegratorConfig(t_end=2 * math.pi, sample_dt=math.pi / 2))
        assert tr.ok
        assert abs(tr.states[-1, 0] - 1.0) <= 1e-9
        assert abs(tr.states[-1, 1]) <= 1e-9

    def test_sample_grid(self):
        tr = integrate(single_mode(), np.array([1.0, 0.0]),
                       IntegratorConfig(t_end=10.0, sample_dt=1.0))
        assert np.array_equal(tr.times, np.arange(11.0))

    def test_order_eight_convergence(self):
        # halving a fixed step must shrink the endpoint error by >= 2^7
        sys = single_mode(1.0)
        y0 = np.array([1.0, 0.0])
        errs = []
        for h in (0.4, 0.2):
            tr = integrate_fixed_step(sys, y0, h, 20.0)
            errs.append(abs(tr.states[-1, 0] - math.cos(20.0)))
        assert errs[0] / errs[1] >= 2 ** 7

    def test_determinism(self, systems, rng):
        _, _, qh = systems[5]
        y0 = np.concatenate([rng.uniform(-0.2, 0.2, 4), np.zeros(4)])
        tr1 = integrate(qh, y0, IntegratorConfig(t_end=50.0))
        tr2 = integrate(qh, y0, IntegratorConfig(t_end=50.0))
        assert np.array_equal(tr1.states, tr2.states)
        assert np.array_equal(tr1.times, tr2.times)

    def test_against_scipy(self, systems, rng):
        scipy_ivp = pytest.importorskip("scipy.integrate")
        red, _, _ = systems[3]
        y0 = np.concatenate([rng.uniform(-0.3, 0.3, 2), rng.uniform(-0.03, 0.03, 2)])
        cfg = IntegratorConfig(t_end=50.0, abs_tol=1e-12, rel_tol=1e-12,
                               sample_dt=50.0)
        ours = integrate(red, y0, cfg)

        def f(t, y):
            from fpualt import eval_accel_reduced
            return np.concatenate([y[2:],
                                   eval_accel_reduced(red, ReducedState(y[:2], y[2:]))])

        ref = scipy_ivp.solve_ivp(f, [0.0, 50.0], y0, method="DOP853",
                                  rtol=1e-12, atol=1e-12)
        assert np.abs(ours.states[-1] - ref.y[:, -1]).max() <= 1e-8

    def test_time_reversal(self, systems, rng):
        _, _, qh = systems[3]
        y0 = np.concatenate([rng.uniform(-0.3, 0.3, 2), rng.uniform(-0.1, 0.1, 2)])
        cfg = IntegratorConfig(t_end=100.0)
        fwd = integrate(qh, y0, cfg)
        yf = fwd.final_state()
        back = integrate(qh, np.concatenate([yf[:2], -yf[2:]]), cfg)
        yb = back.final_state()
        assert np.abs(yb[:2] - y0[:2]).max() <= 1e-6
        assert np.abs(yb[2:] + y0[2:]).max() <= 1e-6


class TestDivergence:
    def test_unbounded_run_is_reported(self, systems):
        red, _, _ = systems[3]
        tr = integrate(red, np.array([1.00754, 2.0, 0.0, 0.0]),
                       IntegratorConfig(t_end=400.0))
        assert tr.status == "diverged"
        assert 0 < tr.t_reached < 400.0
        assert "exceeded" in tr.message
        # drift diagnostic still works on the truncated trajectory
        assert math.isfinite(energy_drift(red, tr))

    def test_cutoff_configurable(self, systems):
        red, _, _ = systems[3]
        tr = integrate(red, np.array([1.00754, 2.0, 0.0, 0.0]),
                       IntegratorConfig(t_end=400.0, divergence_norm=1e3))
        assert tr.status == "diverged" and np.abs(tr.states[-1]).max() >= 1e3


class TestActionsAndEnergy:
    def test_linear_actions_constant(self, systems):
        red, basis, qh = systems[5]
        qh0 = QuasiHarmonicSystem(lambdas=qh.lambdas, bilinear=qh.bilinear,
                                  labels=qh.labels, alpha=0.0,
                                  a=qh.a, p=qh.p, basis=basis, reduced=red)
        y0 = np.concatenate([[0.3, -0.2, 0.1, 0.05], np.zeros(4)])
        tr = integrate(qh0, y0, IntegratorConfig(t_end=100.0))
        acts = mode_actions(qh0, tr)
        assert np.abs(acts.actions - acts.actions[0]).max() <= 1e-10

    def test_requires_diagonal_coordinates(self, systems):
        red, _, _ = systems[3]
        tr = integrate(red, np.array([0.1, 0.0, 0.0, 0.0]),
                       IntegratorConfig(t_end=1.0))
        with pytest.raises(TypeError, match="diagonal"):
            mode_actions(red, tr)

    def test_linear_energy_drift_tiny(self, systems):
        # the pulled-back energy diagnostic needs a linear reduced twin,
        # since the alpha=1 reduced potential is not conserved at alpha=0
        _, basis, qh = systems[5]
        red0 = build_reduced(5, 0.01, alpha=0.0)
        qh0 = QuasiHarmonicSystem(lambdas=qh.lambdas, bilinear=qh.bilinear,
                                  labels=qh.labels, alpha=0.0,
                                  a=qh.a, p=qh.p, basis=basis, reduced=red0)
        y0 = np.concatenate([[0.3, -0.2, 0.1, 0.05], np.zeros(4)])
        tr = integrate(qh0, y0, IntegratorConfig(t_end=100.0, abs_tol=1e-12,
                                                 rel_tol=1e-12))
        assert energy_drift(qh0, tr) <= 1e-10

    def test_loaded_system_has_no_energy(self):
        ref = load_reference("p3_full")
        assert energy_function(ref) is None
        tr = integrate(ref, np.array([0.1, 0.0, 0.0, 0.0]),
                       IntegratorConfig(t_end=1.0))
        with pytest.raises(ValueError, match="no exact energy"):
            energy_drift(ref, tr)


class TestEquilibria:
    def test_p3_complete_set(self, systems):
        red, _, _ = systems[3]
        reports = find_equilibria(red)
        points = sorted(tuple(np.round(r.point, 8)) for r in reports)
        assert points == [(-2.0, -1.0), (0.0, 0.0), (1.0, -1.0), (1.0, 2.0)]
        assert all(r.residual <= 1e-12 for r in reports)

    def test_p3_classified_eigenvalues(self, systems):
        red, _, _ = systems[3]
        reports = {tuple(np.round(r.point, 6)): r for r in find_equilibria(red)}
        expected = {
            (1.0, 2.0): (2.4525, 0.1223),
            (1.0, -1.0): (0.5477, 0.5477),
            (-2.0, -1.0): (0.5758, 0.5211),
        }
        for point, (omega, sigma) in expected.items():
            r = reports[point]
            imag = sorted(abs(z.imag) for z in r.eigenvalues if abs(z.real) < 1e-8)
            real = sorted(abs(z.real) for z in r.eigenvalues if abs(z.real) >= 1e-8)
            assert imag[-1] == pytest.approx(omega, abs=1e-3)
            assert real[-1] == pytest.approx(sigma, abs=1e-3)
            assert (r.n_center, r.n_unstable, r.n_stable) == (2, 1, 1)

    def test_origin_is_center(self, systems):
        red, _, qh = systems[3]
        r = classify_equilibrium(red, np.zeros(2))
        assert r.n_center == 4 and r.n_unstable == 0 and r.n_stable == 0
        freqs = sorted({round(abs(z.imag), 6) for z in r.eigenvalues})
        assert freqs == sorted({round(math.sqrt(l), 6) for l in qh.lambdas})

    def test_spectral_symmetry(self, systems):
        red, _, _ = systems[5]
        for r in find_equilibria(red):
            eig = r.eigenvalues
            for z in eig:
                assert min(abs(eig + z)) <= 1e-9          # closed under negation
                assert min(abs(eig - z.conjugate())) <= 1e-9  # and conjugation

    def test_p5_equilibrium_set(self, systems):
        # The grid search resolves the full Bezout count 2^4 = 16, all
        # real.  Two of the four published p=5 points check out exactly;
        # the other two published points fail the system's own middle
        # rows by integer amounts (static residuals (0,-6,-4,0) and
        # (0,-6,0,0)) and are correctly absent.
        red, _, _ = systems[5]
        from fpualt.dynamics import _static_functions
        fun, _, _ = _static_functions(red, None)
        reports = find_equilibria(red)
        assert len(reports) == 16
        points = {tuple(np.round(r.point, 8)) for r in reports}
        assert (0.0, 0.0, 0.0, 0.0) in points
        assert (2.0, -1.0, 1.0, -2.0) in points
        assert (2.0, -1.0, 1.0, 3.0) in points
        for bogus in ((3.0, -1.0, 1.0, -1.0), (3.0, -1.0, 1.0, 3.0)):
            assert np.abs(fun(np.array(bogus))).max() >= 4.0
            assert bogus not in points
        # the boundary rows factor exactly: eq1 forces q2 = 2 q1 or
        # q2 = -1, eq4 forces q3 = 1 or q3 = 2 q4; every root obeys both
        for p in points:
            assert min(abs(p[1] - 2 * p[0]), abs(p[1] + 1)) < 1e-7
            assert min(abs(p[2] - 1), abs(p[2] - 2 * p[3])) < 1e-7

    def test_rejects_non_equilibrium(self, systems):
        red, _, _ = systems[3]
        with pytest.raises(ValueError, match="not an equilibrium"):
            classify_equilibrium(red, np.array([0.5, 0.5]))


class TestFirstOrderResponse:
    def test_reference_system_mean_level(self):
        ref = load_reference("p3_full")
        resp = first_order_response(ref, driven=1, driver=2, amplitude=0.2)
        assert resp.k0 == pytest.approx(-0.0528, abs=2e-4)
        assert abs(resp.k2) < 1e-3

    def test_reference_rhs_forcing_value(self):
        # at x = (0, 0.2) the acoustic equation of the published two-mode
        # system is forced by its x2^2 coefficient alone
        from fpualt import eval_qh_rhs
        ref = load_reference("p3_full")
        rhs = eval_qh_rhs(ref, np.array([0.0, 0.2]))
        assert rhs[0] == pytest.approx(-0.0395000057 * 0.04, rel=1e-12)

    def test_zero_amplitude(self, systems):
        resp = first_order_response(systems[3][2], 1, 2, 0.0)
        t = np.linspace(0, 100, 101)
        assert np.all(resp(t) == 0.0)

    def test_resonance_rejected(self):
        sys = QuasiHarmonicSystem(lambdas=np.array([4.0, 1.0]),
                                  bilinear=np.ones((2, 2, 2)),
                                  labels=(None, None), alpha=1.0)
        with pytest.raises(ValueError, match="resonance"):
            first_order_response(sys, driven=1, driver=2, amplitude=0.1)

    def test_matches_integration_on_reference_system(self):
        # the published two-mode system integrated from the optical mode:
        # closed form tracks the integration within 0.03 over 200 units
        ref = load_reference("p3_full")
        resp = first_order_response(ref, driven=1, driver=2, amplitude=0.2)
        y0 = np.array([0.0, 0.2, 0.0, 0.0])
        tr = integrate(ref, y0, IntegratorConfig(t_end=200.0))
        dev = np.abs(resp(tr.times) - tr.positions()[:, 0]).max()
        assert dev <= 0.03
        # mean level and minimum of the forced mode
        x1 = tr.positions()[:, 0]
        assert x1.min() == pytest.approx(-0.106, abs=0.01)
        assert x1.min() <= -0.1 and x1.max() <= 1e-3

    def test_our_frame_consistency(self, systems):
        # same check on the pipeline-built system in its own normalisation
        _, _, qh = systems[3]
        amp = 0.35
        resp = first_order_response(qh, driven=1, driver=2, amplitude=amp)
        tr = integrate(qh, np.array([0.0, amp, 0.0, 0.0]),
                       IntegratorConfig(t_end=200.0))
        dev = np.abs(resp(tr.times) - tr.positions()[:, 0]).max()
        assert dev <= 0.2 * max(abs(resp.k0) * 2, 1e-9)


class TestCartoons:
    def test_validation(self):
        with pytest.raises(ValueError, match="cartoon id"):
            cartoon_system(3)
        with pytest.raises(ValueError, match="two oscillators"):
            cartoon_system(1, omegas=(0.1, 1.0, 1.05))

    def test_zero_state_stays_zero(self):
        car = cartoon_system(1)
        tr = integrate(car, np.zeros(4), IntegratorConfig(t_end=50.0))
        assert np.abs(tr.states).max() == 0.0

    def test_bounded_cartoon_action(self, scenario_results):
        # oracle-frozen value: E1 stays bounded, peaking near 3.0 x E1(0)
        tr = scenario_results["cartoon_bounded"].trajectory
        car = cartoon_system(1)
        e1 = mode_actions(car, tr).actions[:, 0]
        assert e1[0] == pytest.approx(5e-5, rel=1e-12)
        assert e1.max() <= 4.0 * e1[0]
        assert e1.max() == pytest.approx(3.01 * e1[0], rel=0.05)

    def test_forced_cartoon_action_grows(self, scenario_results):
        tr = scenario_results["cartoon_forced"].trajectory
        car = cartoon_system(2)
        e1 = mode_actions(car, tr).actions[:, 0]
        assert e1[0] == pytest.approx(5e-5, rel=1e-12)
        assert e1.max() >= 10.0 * e1[0]
