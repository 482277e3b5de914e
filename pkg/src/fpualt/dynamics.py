"""Adaptive high-order integration and trajectory diagnostics.

The integrator is an explicit 12-stage Runge-Kutta method of order 8
(Dormand-Prince coefficients as tabulated by Hairer, Norsett & Wanner)
with the companion 5th/3rd-order embedded error estimate and a PI step
controller (safety 0.9, growth capped at 5x).  Output samples land
exactly on the requested time grid by clipping the step, so results are
bit-reproducible for fixed inputs.

Unbounded solutions are a genuine feature of these cubic systems:
integration terminates with a divergence report (never an exception)
once the state norm passes the cutoff or the step size underflows.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .chain import FullChainSystem, FullState, hamiltonian
from .reduction import ReducedSystem, ReducedState, reduced_energy
from .spectral import QuasiHarmonicSystem

# --- Runge-Kutta tableau (order 8 propagation, 12 stages) ------------------

_RK_C = np.array([
    0.0, 0.05260015195876773, 0.0789002279381516, 0.1183503419072274,
    0.2816496580927726, 0.3333333333333333, 0.25, 0.3076923076923077,
    0.6512820512820513, 0.6, 0.8571428571428571, 1.0])

_RK_B = np.array([
    0.054293734116568765, 0.0, 0.0, 0.0, 0.0, 4.450312892752409,
    1.8915178993145003, -5.801203960010585, 0.3111643669578199,
    -0.1521609496625161, 0.20136540080403034, 0.04471061572777259])

_RK_E3 = np.array([
    -0.18980075407240762, 0.0, 0.0, 0.0, 0.0, 4.450312892752409,
    1.8915178993145003, -5.801203960010585, -0.4226823213237919,
    -0.1521609496625161, 0.20136540080403034, 0.02265179219836082, 0.0])

_RK_E5 = np.array([
    0.01312004499419488, 0.0, 0.0, 0.0, 0.0, -1.2251564463762044,
    -0.4957589496572502, 1.6643771824549864, -0.35032884874997366,
    0.3341791187130175, 0.08192320648511571, -0.022355307863886294, 0.0])

_RK_A = np.array([
    [0.0, 0.0, 0.0, 0.0,
     0.0, 0.0, 0.0, 0.0,
     0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0,
     0.0, 0.0, 0.0, 0.0,
     0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0,
     0.0, 0.0, 0.0, 0.0,
     0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0,
     0.0, 0.0, 0.0, 0.0,
     0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792,
     0.0, 0.0, 0.0, 0.0,
     0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386,
     0.12546768756682242, 0.0, 0.0, 0.0,
     0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405,
     0.06021653898045596, -0.017578125, 0.0, 0.0,
     0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998,
     0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0,
     0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414,
     -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996,
     0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677,
     -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486,
     -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064,
     1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505,
     2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725,
     -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235,
     -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
])

_N_STAGES = 12
_ERROR_EXPONENT = 1.0 / 8.0      # embedded order 7 -> 1/(q+1)
_PI_ALPHA = 0.095                # 1/8 - 0.75 * beta, the standard PI pairing
_PI_BETA = 0.04
_SAFETY = 0.9
_MAX_GROWTH = 5.0
_MIN_SHRINK = 0.2


@dataclass(frozen=True)
class CartoonSystem:
    """Small coupled-oscillator models illustrating mixed-term forcing.

    cid=1 is the two-oscillator system  xdd + w1^2 x = x y,
    ydd + w2^2 y = x^2 / 2.  cid=2 is the three-oscillator system with
    the 0.2 / 0.25 couplings where the two fast modes are in detuned
    resonance and strongly force the slow one.
    """

    cid: int
    omegas: tuple

    @property
    def dof(self):
        return len(self.omegas)

    @property
    def lambdas(self):
        return np.array([w * w for w in self.omegas])


def cartoon_system(cid: int, omegas=None) -> CartoonSystem:
    if cid == 1:
        omegas = (0.1, 1.0) if omegas is None else omegas
        if len(omegas) != 2:
            raise ValueError("cartoon 1 has two oscillators")
    elif cid == 2:
        omegas = (0.1, 1.0, 1.05) if omegas is None else omegas
        if len(omegas) != 3:
            raise ValueError("cartoon 2 has three oscillators")
    else:
        raise ValueError(f"cartoon id must be 1 or 2, got {cid}")
    return CartoonSystem(cid=cid, omegas=tuple(float(w) for w in omegas))


def _cartoon_accel(sys: CartoonSystem, u):
    w2 = sys.lambdas
    if sys.cid == 1:
        x, y = u
        return np.array([-w2[0] * x + x * y,
                         -w2[1] * y + 0.5 * x * x])
    x, y, z = u
    return np.array([
        -w2[0] * x + 0.2 * y * z,
        -w2[1] * y + 0.2 * x * z + 0.25 * (z * z + 2.0 * y * z),
        -w2[2] * z + 0.2 * x * y + 0.25 * (y * y + 2.0 * y * z),
    ])


def _cartoon_energy(sys: CartoonSystem, u, v):
    w2 = sys.lambdas
    h = 0.5 * float(np.sum(v * v) + np.sum(w2 * u * u))
    if sys.cid == 1:
        x, y = u
        return h - 0.5 * x * x * y
    x, y, z = u
    return h - 0.2 * x * y * z - 0.25 * (y * z * z + y * y * z)


# --- system dispatch --------------------------------------------------------


def system_dof(system) -> int:
    if isinstance(system, FullChainSystem):
        return system.n_particles
    if isinstance(system, (ReducedSystem, QuasiHarmonicSystem, CartoonSystem)):
        return system.dof
    raise TypeError(f"unsupported system type {type(system).__name__}")


def acceleration_function(system):
    """Position -> acceleration map of the second-order system."""
    if isinstance(system, FullChainSystem):
        masses = system.masses
        dpot = system.dpotential

        def accel(q):
            f = dpot(np.roll(q, -1) - q)
            return (f - np.roll(f, 1)) / masses

        return accel
    if isinstance(system, ReducedSystem):
        k = system.stiffness
        w = system.w
        alpha = system.alpha
        masses = system.masses

        def accel(q):
            return (-k @ q + alpha * np.einsum("ijk,j,k->i", w, q, q)) / masses

        return accel
    if isinstance(system, QuasiHarmonicSystem):
        lam = system.lambdas
        b = system.bilinear
        alpha = system.alpha

        def accel(x):
            return -lam * x + alpha * np.einsum("ijk,j,k->i", b, x, x)

        return accel
    if isinstance(system, CartoonSystem):
        return lambda u: _cartoon_accel(system, u)
    raise TypeError(f"unsupported system type {type(system).__name__}")


def energy_function(system):
    """State-vector -> energy map, or None if no exact energy is known.

    Quasi-harmonic systems built by the pipeline pull the reduced energy
    back through the modal matrix; systems loaded from coefficient files
    carry no exact invariant.
    """
    if isinstance(system, FullChainSystem):
        n = system.n_particles
        return lambda y: hamiltonian(system, FullState(y[:n], y[n:]))
    if isinstance(system, ReducedSystem):
        d = system.dof
        return lambda y: reduced_energy(system, ReducedState(y[:d], y[d:]))
    if isinstance(system, QuasiHarmonicSystem):
        if system.basis is None or system.reduced is None:
            return None
        d = system.dof
        t = system.basis.t
        red = system.reduced

        def energy(y):
            return reduced_energy(red, ReducedState(t @ y[:d], t @ y[d:]))

        return energy
    if isinstance(system, CartoonSystem):
        d = system.dof
        return lambda y: _cartoon_energy(system, y[:d], y[d:])
    raise TypeError(f"unsupported system type {type(system).__name__}")


def as_state_vector(system, state) -> np.ndarray:
    """Accept FullState/ReducedState/(q, v)/flat vector and return [q, v]."""
    if hasattr(state, "q") and hasattr(state, "v"):
        vec = np.concatenate([np.asarray(state.q, float), np.asarray(state.v, float)])
    elif isinstance(state, (tuple, list)) and len(state) == 2:
        vec = np.concatenate([np.asarray(state[0], float), np.asarray(state[1], float)])
    else:
        vec = np.asarray(state, dtype=float).ravel()
    d = system_dof(system)
    if vec.size != 2 * d:
        raise ValueError(f"state vector has length {vec.size}, expected {2 * d}")
    return vec


# --- integration ------------------------------------------------------------


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and sampling for one integration run.

    ``sample_dt`` is the output stride; figure captions count time in
    these unit samples.  Tolerances outside (0, 1e-4] are refused.
    """

    t_end: float
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    sample_dt: float = 1.0
    max_step: float = math.inf
    divergence_norm: float = 1e8

    def validate(self):
        for name, tol in (("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol)):
            if not 0.0 < tol <= 1e-4:
                raise ValueError(f"{name} must lie in (0, 1e-4], got {tol}")
        if not self.sample_dt > 0:
            raise ValueError(f"sample_dt must be positive, got {self.sample_dt}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")


@dataclass
class Trajectory:
    """Sampled solution with integration diagnostics.

    ``states`` rows are [positions, velocities] at ``times``; samples
    are exact integration endpoints, not dense-output interpolants
    (``dense`` is False).  ``status`` is "ok", "diverged" or
    "step_underflow"; a non-ok run stops at ``t_reached`` with the last
    accepted state appended.
    """

    times: np.ndarray
    states: np.ndarray
    status: str
    t_reached: float
    message: str = ""
    dense: bool = False
    n_steps: int = 0
    n_rejected: int = 0
    n_rhs: int = 0

    @property
    def ok(self):
        return self.status == "ok"

    @property
    def dof(self):
        return self.states.shape[1] // 2

    def positions(self):
        return self.states[:, : self.dof]

    def velocities(self):
        return self.states[:, self.dof:]

    def final_state(self):
        return self.states[-1].copy()


def _initial_step(f, y0, f0, atol, rtol, t_span):
    """Conservative automatic initial step (Hairer's starting heuristic)."""
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = f(y1)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** _ERROR_EXPONENT
    return min(100.0 * h0, h1, t_span)


def integrate(system, state0, cfg: IntegratorConfig) -> Trajectory:
    """Integrate a second-order system, sampling every ``sample_dt``.

    Deterministic for fixed inputs.  Divergence (state norm above the
    cutoff) and step-size underflow terminate early with a report in
    ``status``/``message`` rather than raising.
    """
    cfg.validate()
    accel = acceleration_function(system)
    d = system_dof(system)

    def f(y):
        return np.concatenate([y[d:], accel(y[:d])])

    y = as_state_vector(system, state0)
    t = 0.0
    times = [0.0]
    states = [y.copy()]
    n_rhs = 1
    f_cur = f(y)

    sample_idx = 1
    eps_t = 1e-12 * max(1.0, cfg.t_end)

    def next_target():
        ts = sample_idx * cfg.sample_dt
        return min(ts, cfg.t_end)

    # h_free is the controller's preferred step; clipping a step to land
    # on a sample time must not shrink that preference.
    h_free = _initial_step(f, y, f_cur, cfg.abs_tol, cfg.rel_tol, cfg.t_end)
    n_rhs += 1
    h_free = min(h_free, cfg.max_step)

    err_prev = 1e-4
    n_steps = n_rejected = 0
    status, message = "ok", ""
    k = np.empty((_N_STAGES + 1, 2 * d))

    while t < cfg.t_end - eps_t:
        if not np.all(np.isfinite(y)) or np.abs(y).max() > cfg.divergence_norm:
            status = "diverged"
            message = (f"state norm {np.abs(y).max():.3e} exceeded "
                       f"{cfg.divergence_norm:.1e} at t={t:.6g}")
            break
        if h_free < 16.0 * np.finfo(float).eps * max(abs(t), 1.0):
            status = "step_underflow"
            message = f"step size underflow (h={h_free:.3e}) at t={t:.6g}"
            break

        target = next_target()
        landing = t + h_free >= target - eps_t
        h = target - t if landing else h_free

        k[0] = f_cur
        finite = True
        for s in range(1, _N_STAGES):
            ys = y + h * (k[:s].T @ _RK_A[s, :s])
            k[s] = f(ys)
            if not np.all(np.isfinite(k[s])):
                finite = False
                break
        n_rhs += _N_STAGES - 1
        if finite:
            y_new = y + h * (k[:_N_STAGES].T @ _RK_B)
            k[_N_STAGES] = f(y_new)
            n_rhs += 1
            finite = np.all(np.isfinite(y_new)) and np.all(np.isfinite(k[_N_STAGES]))
        if not finite:
            n_rejected += 1
            h_free = h * _MIN_SHRINK
            continue

        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err5 = (k.T @ _RK_E5) / scale
        err3 = (k.T @ _RK_E3) / scale
        n5 = float(np.dot(err5, err5))
        n3 = float(np.dot(err3, err3))
        denom = n5 + 0.01 * n3
        err_norm = 0.0 if denom <= 0.0 else abs(h) * n5 / math.sqrt(denom * len(scale))

        if err_norm <= 1.0:
            n_steps += 1
            y = y_new
            f_cur = k[_N_STAGES].copy()
            if landing:
                if abs(target - sample_idx * cfg.sample_dt) <= eps_t:
                    sample_idx += 1
                times.append(target)
                states.append(y.copy())
                t = target
            else:
                t = t + h
            if err_norm == 0.0:
                factor = _MAX_GROWTH
            else:
                factor = _SAFETY * err_norm ** (-_PI_ALPHA) * err_prev ** _PI_BETA
                factor = min(_MAX_GROWTH, max(_MIN_SHRINK, factor))
            err_prev = max(err_norm, 1e-4)
            proposed = min(h * factor, cfg.max_step)
            h_free = max(proposed, h_free) if landing else proposed
        else:
            n_rejected += 1
            h_free = h * min(1.0, max(_MIN_SHRINK,
                                      _SAFETY * err_norm ** (-_ERROR_EXPONENT)))

    if status != "ok" and (not times or times[-1] < t - eps_t):
        times.append(t)
        states.append(y.copy())

    return Trajectory(
        times=np.array(times), states=np.array(states), status=status,
        t_reached=float(t), message=message, n_steps=n_steps,
        n_rejected=n_rejected, n_rhs=n_rhs,
    )


def integrate_fixed_step(system, state0, h: float, t_end: float) -> Trajectory:
    """Fixed-step variant of the same tableau (for order verification)."""
    accel = acceleration_function(system)
    d = system_dof(system)

    def f(y):
        return np.concatenate([y[d:], accel(y[:d])])

    y = as_state_vector(system, state0)
    n = int(round(t_end / h))
    times = [0.0]
    states = [y.copy()]
    for i in range(n):
        k = np.empty((_N_STAGES, 2 * d))
        k[0] = f(y)
        for s in range(1, _N_STAGES):
            k[s] = f(y + h * (k[:s].T @ _RK_A[s, :s]))
        y = y + h * (k.T @ _RK_B)
        times.append((i + 1) * h)
        states.append(y.copy())
    return Trajectory(times=np.array(times), states=np.array(states),
                      status="ok", t_reached=float(times[-1]),
                      n_steps=n, n_rhs=n * _N_STAGES)


# --- diagnostics -------------------------------------------------------------


@dataclass(frozen=True)
class ModeActionSeries:
    """Per-mode actions E_j(t) = (v_j^2 + lambda_j x_j^2) / 2."""

    times: np.ndarray
    actions: np.ndarray     # shape (n_samples, n_modes)


def mode_actions(system, trajectory: Trajectory) -> ModeActionSeries:
    """Actions along a quasi-harmonic or cartoon trajectory.

    Requires diagonal coordinates; raise for chain/reduced trajectories,
    whose coordinates mix the modes.
    """
    if not isinstance(system, (QuasiHarmonicSystem, CartoonSystem)):
        raise TypeError(
            "mode actions require diagonal (quasi-harmonic or cartoon) "
            f"coordinates, not {type(system).__name__}")
    lam = system.lambdas
    x = trajectory.positions()
    v = trajectory.velocities()
    return ModeActionSeries(times=trajectory.times.copy(),
                            actions=0.5 * (v**2 + lam[None, :] * x**2))


def energy_drift(system, trajectory: Trajectory) -> float:
    """max_t |E(t) - E(0)| / max(|E(0)|, 1e-12) over the sampled states."""
    efun = energy_function(system)
    if efun is None:
        raise ValueError("system has no exact energy function")
    e = np.array([efun(y) for y in trajectory.states])
    return float(np.abs(e - e[0]).max() / max(abs(e[0]), 1e-12))


# --- equilibria ---------------------------------------------------------------


@dataclass
class EquilibriumReport:
    """An equilibrium point with its linearisation.

    ``eigenvalues`` belong to the first-order system of dimension
    2(p-1); counts classify them as pure-imaginary / positive-real /
    negative-real with the relative threshold stated below.
    """

    point: np.ndarray
    residual: float
    eigenvalues: np.ndarray
    n_center: int
    n_unstable: int
    n_stable: int

    def is_origin(self, tol=1e-10):
        return bool(np.abs(self.point).max(initial=0.0) <= tol)


IMAG_CLASSIFY_REL = 1e-8


def _static_functions(system, alpha):
    """Return (F, J) with F(u) = 0 the static equations, J its Jacobian."""
    if isinstance(system, ReducedSystem):
        a = system.alpha if alpha is None else alpha
        k, w = system.stiffness, system.w

        def fun(q):
            return -k @ q + a * np.einsum("ijk,j,k->i", w, q, q)

        def jac(q):
            return -k + 2.0 * a * np.einsum("ijk,k->ij", w, q)

        return fun, jac, system.dof
    if isinstance(system, QuasiHarmonicSystem):
        a = system.alpha if alpha is None else alpha
        lam, b = system.lambdas, system.bilinear

        def fun(x):
            return -lam * x + a * np.einsum("ijk,j,k->i", b, x, x)

        def jac(x):
            return np.diag(-lam) + 2.0 * a * np.einsum("ijk,k->ij", b, x)

        return fun, jac, system.dof
    raise TypeError(
        f"equilibrium search supports reduced and quasi-harmonic systems, "
        f"not {type(system).__name__}")


def _dynamic_jacobian(system, point, alpha):
    """Jacobian of the first-order flow at a static point."""
    _, jac, d = _static_functions(system, alpha)
    g = jac(point)
    if isinstance(system, ReducedSystem):
        g = g / system.masses[:, None]
    j = np.zeros((2 * d, 2 * d))
    j[:d, d:] = np.eye(d)
    j[d:, :d] = g
    return j


def find_equilibria(system, alpha=None, box_halfwidth=4.0, grid_per_dim=9,
                    max_dim=6, newton_steps=50, dedup_tol=1e-8,
                    residual_tol=1e-12):
    """All equilibria reachable by Newton from a regular grid of seeds.

    Seeds fill [-box_halfwidth, box_halfwidth]^d; non-convergent seeds
    are dropped silently, converged points deduplicated and classified.
    The count is bounded by the Bezout number 2^d of the quadratic
    static system.
    """
    fun, jac, d = _static_functions(system, alpha)
    if d > max_dim:
        raise ValueError(
            f"exhaustive grid search limited to dimension {max_dim} "
            f"(got {d}); raise max_dim explicitly for larger systems")
    axis = np.linspace(-box_halfwidth, box_halfwidth, grid_per_dim)
    found = []
    for seed in np.stack(np.meshgrid(*([axis] * d), indexing="ij"), -1).reshape(-1, d):
        x = seed.copy()
        converged = False
        for _ in range(newton_steps):
            fx = fun(x)
            try:
                step = np.linalg.solve(jac(x), -fx)
            except np.linalg.LinAlgError:
                break
            x = x + step
            if not np.all(np.isfinite(x)) or np.abs(x).max() > 1e3:
                break
            if np.abs(step).max() <= 1e-13:
                converged = True
                break
        if not converged:
            continue
        if float(np.abs(fun(x)).max()) > residual_tol:
            continue
        if any(np.abs(x - g).max() <= dedup_tol for g in found):
            continue
        found.append(x)
    found.sort(key=lambda p: tuple(np.round(p, 9)))
    return [classify_equilibrium(system, p, alpha=alpha) for p in found]


def classify_equilibrium(system, point, alpha=None) -> EquilibriumReport:
    """Linearise the flow at an equilibrium and classify its spectrum.

    Eigenvalues come in the symplectic patterns (+-i w, +-sigma,
    quadruples); one is counted pure-imaginary when |Re| is below
    1e-8 of the largest magnitude.
    """
    fun, _, d = _static_functions(system, alpha)
    point = np.asarray(point, dtype=float)
    residual = float(np.abs(fun(point)).max())
    if residual > 1e-10:
        raise ValueError(f"point is not an equilibrium (residual {residual:.3e})")
    eig = np.linalg.eigvals(_dynamic_jacobian(system, point, alpha))
    eig = np.array(sorted(eig, key=lambda z: (round(z.real, 12), z.imag)))
    thr = IMAG_CLASSIFY_REL * max(np.abs(eig).max(initial=0.0), 1e-30)
    n_center = int(np.sum(np.abs(eig.real) <= thr))
    n_unstable = int(np.sum(eig.real > thr))
    n_stable = int(np.sum(eig.real < -thr))
    return EquilibriumReport(point=point.copy(), residual=residual,
                             eigenvalues=eig, n_center=n_center,
                             n_unstable=n_unstable, n_stable=n_stable)


# --- first-order forced response ---------------------------------------------


@dataclass(frozen=True)
class ClosedFormResponse:
    """Analytic first-order response of one mode driven by another's square.

    With the driver at x_r(t) = A cos(sqrt(lambda_r) t) (zeroth order)
    the driven equation  xdd + lambda_d x = g cos^2(...)  has the exact
    zero-initial-data solution

        x(t) = k0 (1 - cos(w_d t)) + k2 (cos(2 w_r t) - cos(w_d t)).
    """

    driven: int
    driver: int
    amplitude: float
    lambda_driven: float
    lambda_driver: float
    forcing: float        # alpha * C_{d,rr} * A^2
    k0: float
    k2: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        wd = math.sqrt(self.lambda_driven)
        wr = math.sqrt(self.lambda_driver)
        return (self.k0 * (1.0 - np.cos(wd * t))
                + self.k2 * (np.cos(2.0 * wr * t) - np.cos(wd * t)))

    def mean_level(self):
        """Centre of the slow oscillation, k0."""
        return self.k0


def first_order_response(sys: QuasiHarmonicSystem, driven: int, driver: int,
                         amplitude: float, alpha=None) -> ClosedFormResponse:
    """Closed-form response of mode ``driven`` to mode ``driver``'s square.

    Mode indices are 1-based.  The driver starts at ``amplitude`` with
    zero velocity and all other modes at rest.  Exact 2:1 resonance
    between sqrt(lambda_driven) and 2 sqrt(lambda_driver) is refused.
    """
    d = sys.dof
    if not (1 <= driven <= d and 1 <= driver <= d) or driven == driver:
        raise ValueError(f"driven/driver must be distinct modes in 1..{d}")
    if alpha is None:
        alpha = sys.alpha
    lam_d = float(sys.lambdas[driven - 1])
    lam_r = float(sys.lambdas[driver - 1])
    if lam_d <= 0 or lam_r <= 0:
        raise ValueError("response formula requires positive eigenvalues")
    if abs(lam_d - 4.0 * lam_r) <= 1e-9 * max(lam_d, 4.0 * lam_r):
        raise ValueError(
            f"exact 2:1 resonance (lambda_driven = 4 lambda_driver = {lam_d!r})")
    g = alpha * sys.monomial(driven, driver, driver) * amplitude**2
    return ClosedFormResponse(
        driven=driven, driver=driver, amplitude=float(amplitude),
        lambda_driven=lam_d, lambda_driver=lam_r, forcing=g,
        k0=g / (2.0 * lam_d), k2=g / (2.0 * (lam_d - 4.0 * lam_r)),
    )
