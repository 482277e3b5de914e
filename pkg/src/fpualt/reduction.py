"""Symmetry reduction of the 2p-particle chain to p-1 degrees of freedom.

For odd p the periodic chain has invariant manifolds on which

    q_p = q_{2p} = 0,   q_{2p-i} = -q_i   (1 <= i <= p-1),

and the same relations for velocities.  On such a manifold the dynamics
is that of a fixed-end FPU chain with p-1 particles: masses alternate
1, 1/a, the linear part is the standard tridiagonal stiffness, and the
cubic spring terms contribute the quadratic vector

    N(q)_i = q_{i+1}^2 - 2 q_i q_{i+1} + 2 q_{i-1} q_i - q_{i-1}^2

with the virtual boundary values q_0 = q_p = 0.  The equations of motion
are M qdd + K q = alpha N(q), which is exactly minus the gradient of the
fixed-end potential sum_i V(q_{i+1} - q_i); that potential provides an
exact conserved energy for the reduced flow.
"""

from dataclasses import dataclass

import numpy as np

from .chain import FullChainSystem, FullState, eval_accel_full


@dataclass(frozen=True)
class ReducedSystem:
    """Fixed-end reduced system with p-1 particles.

    The quadratic tensor ``w`` stores the symmetric bilinear forms of the
    alpha-free nonlinearity: N(q)_i = q . w[i] . q.  ``alpha`` multiplies
    at evaluation time, which allows alpha sweeps without rebuilding.
    """

    p: int
    a: float
    alpha: float
    masses: np.ndarray          # diagonal of M, pattern 1, 1/a, 1, ...
    stiffness: np.ndarray       # K, tridiagonal (2 on diag, -1 off)
    w: np.ndarray               # (p-1, p-1, p-1), symmetric in last two axes

    @property
    def dof(self):
        return self.p - 1


@dataclass
class ReducedState:
    """Displacements and velocities of the p-1 reduced coordinates."""

    q: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.q.shape != self.v.shape or self.q.ndim != 1:
            raise ValueError("q and v must be 1-d arrays of equal length")


def build_reduced(p: int, a: float, alpha: float = 1.0) -> ReducedSystem:
    """Build the reduced (p-1)-dof system for odd p >= 3 and a > 0."""
    if p < 3 or p % 2 == 0:
        raise ValueError(f"p must be an odd integer >= 3, got {p}")
    if not a > 0:
        raise ValueError(f"mass parameter a must be positive, got {a}")
    d = p - 1
    masses = np.empty(d)
    masses[0::2] = 1.0
    masses[1::2] = 1.0 / a
    k = 2.0 * np.eye(d)
    for i in range(d - 1):
        k[i, i + 1] = -1.0
        k[i + 1, i] = -1.0

    # Row i (0-based) of the quadratic vector, boundary terms dropped.
    w = np.zeros((d, d, d))
    for i in range(d):
        if i + 1 < d:
            w[i, i + 1, i + 1] += 1.0          # q_{i+1}^2
            w[i, i, i + 1] -= 1.0              # -2 q_i q_{i+1}
            w[i, i + 1, i] -= 1.0
        if i - 1 >= 0:
            w[i, i - 1, i] += 1.0              # +2 q_{i-1} q_i
            w[i, i, i - 1] += 1.0
            w[i, i - 1, i - 1] -= 1.0          # -q_{i-1}^2
    return ReducedSystem(p=p, a=a, alpha=alpha, masses=masses, stiffness=k, w=w)


def _check_dim(sys: ReducedSystem, state: ReducedState):
    if state.q.size != sys.dof:
        raise ValueError(f"state has {state.q.size} dof, system has {sys.dof}")


def quadratic_vector(sys: ReducedSystem, q):
    """N(q), the alpha-free quadratic part of the right-hand side."""
    q = np.asarray(q, dtype=float)
    return np.einsum("ijk,j,k->i", sys.w, q, q)


def eval_accel_reduced(sys: ReducedSystem, state: ReducedState, alpha=None):
    """qdd = M^{-1} (-K q + alpha N(q))."""
    _check_dim(sys, state)
    if alpha is None:
        alpha = sys.alpha
    rhs = -sys.stiffness @ state.q + alpha * quadratic_vector(sys, state.q)
    return rhs / sys.masses


def reduced_potential(sys: ReducedSystem, q, alpha=None) -> float:
    """Fixed-end potential sum_{i=0}^{p-1} V(q_{i+1} - q_i), q_0 = q_p = 0."""
    if alpha is None:
        alpha = sys.alpha
    dq = np.diff(np.asarray(q, dtype=float), prepend=0.0, append=0.0)
    return float(np.sum(0.5 * dq * dq + (alpha / 3.0) * dq**3))


def reduced_energy(sys: ReducedSystem, state: ReducedState) -> float:
    """Conserved energy sum M_i v_i^2 / 2 + U(q) of the reduced flow."""
    _check_dim(sys, state)
    kinetic = 0.5 * np.sum(sys.masses * state.v**2)
    return float(kinetic) + reduced_potential(sys, state.q)


def lift_symmetric(state: ReducedState) -> FullState:
    """Lift a reduced state to the symmetric 2p-particle state.

    Positions p and 2p are zero and the second half mirrors the first
    with a sign flip; the same pattern applies to velocities.
    """

    def lift(x):
        return np.concatenate([x, [0.0], -x[::-1], [0.0]])

    return FullState(q=lift(state.q), v=lift(state.v))


def symmetry_residual(sys: FullChainSystem, state: ReducedState) -> float:
    """Largest violation of the symmetry relations by the lifted acceleration.

    The symmetric subspace is exactly invariant, so for every reduced
    state the full-chain acceleration of the lifted state must itself
    satisfy acc_p = acc_{2p} = 0 and acc_{2p-i} = -acc_i.
    """
    p = state.q.size + 1
    if sys.n_particles != 2 * p:
        raise ValueError(
            f"chain has {sys.n_particles} particles, expected {2 * p} for p={p}"
        )
    acc = eval_accel_full(sys, lift_symmetric(state))
    head, mid = acc[: p - 1], acc[p - 1]
    tail, last = acc[p : 2 * p - 1], acc[2 * p - 1]
    return float(
        max(abs(mid), abs(last), np.abs(tail + head[::-1]).max(initial=0.0))
    )
