"""Normal-mode transformation of the reduced system.

The linear part M^{-1} K of the reduced system decomposes into
(p-1)/2 two-by-two blocks indexed by j = 1 .. (p-1)/2, each contributing
one acoustic and one optical eigenvalue

    lambda = (1+a) -/+ sqrt((1+a)^2 - 4 a sin^2(pi j / p)),

so that every pair sums to 2 + 2a exactly.  Diagonalising in the
mass-weighted symmetric form avoids the small-a ill-conditioning of the
raw eigenvector matrix.  Substituting q = T x into the quadratic vector
and premultiplying by T^{-1} M^{-1} yields the quasi-harmonic system

    xdd_i + lambda_i x_i = alpha * sum_{j<=k} c_{i,jk} x_j x_k.

Modes are kept in pair order: (acoustic, optical) for j = 1, 2, ...
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import jacobi_eigh
from .reduction import ReducedSystem


class DegenerateSpectrumError(RuntimeError):
    """Two eigenvalues are too close to assign a canonical mode order."""


@dataclass(frozen=True)
class ModeLabel:
    kind: str          # "acoustic" or "optical"
    pair: int          # 1-based pair index j

    def __str__(self):
        return f"{self.kind} {self.pair}"


@dataclass(frozen=True)
class ModalBasis:
    """Diagonalising basis of a reduced system, modes in pair order.

    Columns of ``t`` are eigenvectors of M^{-1} K (q = T x), normalised
    to unit M-weighted norm with the dominant component positive.
    """

    lambdas: np.ndarray
    t: np.ndarray
    t_inv: np.ndarray
    labels: tuple


def pair_eigenvalues(a: float, p: int, j: int):
    """Closed-form (acoustic, optical) eigenvalues of pair j.

    These are the eigenvalues of the 2x2 block
    [[2a, 2a cos(pi j/p)], [2 cos(pi j/p), 2]].
    """
    if not 1 <= j <= (p - 1) // 2:
        raise ValueError(f"pair index j must be in 1..{(p - 1) // 2}, got {j}")
    s2 = math.sin(math.pi * j / p) ** 2
    disc = math.sqrt((1.0 + a) ** 2 - 4.0 * a * s2)
    return (1.0 + a) - disc, (1.0 + a) + disc


def all_pair_eigenvalues(a: float, p: int):
    """All p-1 eigenvalues in pair order (acoustic_1, optical_1, ...)."""
    out = np.empty(p - 1)
    for j in range(1, (p - 1) // 2 + 1):
        lo, hi = pair_eigenvalues(a, p, j)
        out[2 * j - 2] = lo
        out[2 * j - 1] = hi
    return out


def pair_labels(p: int):
    labels = []
    for j in range(1, (p - 1) // 2 + 1):
        labels.append(ModeLabel("acoustic", j))
        labels.append(ModeLabel("optical", j))
    return tuple(labels)


def eigendecompose(sys: ReducedSystem, match_tol=1e-9) -> ModalBasis:
    """Diagonalise the reduced linear part and order modes canonically.

    Solves the symmetric similarity M^{-1/2} K M^{-1/2} by cyclic
    Jacobi, matches each computed eigenvalue to its closed-form pair
    value, and fixes signs and M-weighted normalisation.  Raises
    DegenerateSpectrumError if eigenvalues collide within ``match_tol``
    instead of silently picking an order.
    """
    analytic = all_pair_eigenvalues(sys.a, sys.p)
    gaps = np.diff(np.sort(analytic))
    if gaps.size and gaps.min() < 2.0 * match_tol:
        raise DegenerateSpectrumError(
            f"eigenvalue gap {gaps.min():.3e} below resolution for "
            f"p={sys.p}, a={sys.a}"
        )

    dm = 1.0 / np.sqrt(sys.masses)
    s = dm[:, None] * sys.stiffness * dm[None, :]
    w, u = jacobi_eigh(s)

    # Match computed to analytic values: both sorted ascending align 1:1.
    order_comp = np.argsort(w)
    rank_of_pair = np.argsort(np.argsort(analytic))
    perm = order_comp[rank_of_pair]
    if np.abs(w[perm] - analytic).max() > match_tol:
        raise DegenerateSpectrumError(
            "computed eigenvalues do not match the closed-form pair values "
            f"(worst deviation {np.abs(w[perm] - analytic).max():.3e})"
        )

    u = u[:, perm]
    t = dm[:, None] * u                      # columns have unit M-norm
    dominant = np.argmax(np.abs(t), axis=0)
    signs = np.where(t[dominant, np.arange(t.shape[1])] < 0, -1.0, 1.0)
    t = t * signs
    t_inv = (u * signs).T * np.sqrt(sys.masses)[None, :]
    return ModalBasis(lambdas=w[perm].copy(), t=t, t_inv=t_inv,
                      labels=pair_labels(sys.p))


@dataclass(frozen=True)
class QuasiHarmonicSystem:
    """Diagonal linear part plus symmetric quadratic coupling tensor.

    ``bilinear[i]`` is the symmetric matrix B_i with
    xdd_i = -lambda_i x_i + alpha * x . B_i . x; the printed (monomial)
    coefficient of x_j x_k with j < k is 2 B_i[j, k], and B_i[j, j] for
    the squares.  Entries below the relative drop threshold are stored
    as exact zeros.
    """

    lambdas: np.ndarray
    bilinear: np.ndarray          # (d, d, d), symmetric in the last two axes
    labels: tuple
    alpha: float
    a: float = math.nan
    p: int = 0
    basis: ModalBasis = None
    reduced: ReducedSystem = None
    name: str = ""

    @property
    def dof(self):
        return self.lambdas.size

    def monomial(self, i: int, j: int, k: int) -> float:
        """Coefficient of the monomial x_j x_k in equation i (1-based)."""
        j, k = min(j, k), max(j, k)
        mult = 1.0 if j == k else 2.0
        return mult * self.bilinear[i - 1, j - 1, k - 1]

    def monomial_entries(self, threshold=0.0):
        """Yield (i, j, k, coeff) with j <= k, 1-based, |coeff| > threshold."""
        d = self.dof
        for i in range(d):
            for j in range(d):
                for k in range(j, d):
                    c = self.bilinear[i, j, k] * (1.0 if j == k else 2.0)
                    if abs(c) > threshold:
                        yield i + 1, j + 1, k + 1, c

    def tensor_scale(self) -> float:
        """Largest monomial magnitude; reference for relative thresholds."""
        d = self.dof
        mult = np.where(np.eye(d, dtype=bool), 1.0, 2.0)
        return float(np.abs(self.bilinear * mult[None, :, :]).max())


DROP_THRESHOLD_REL = 1e-12   # pure round-off, far below physical couplings


def to_quasi_harmonic(sys: ReducedSystem, basis: ModalBasis = None,
                      name: str = "") -> QuasiHarmonicSystem:
    """Pull the reduced quadratic vector back through the modal basis."""
    if basis is None:
        basis = eigendecompose(sys)
    if basis.t.shape[0] != sys.dof:
        raise ValueError("basis dimension does not match the system")
    a_rows = basis.t_inv * (1.0 / sys.masses)[None, :]   # T^{-1} M^{-1}
    b = np.einsum("ir,rab,aj,bk->ijk", a_rows, sys.w, basis.t, basis.t,
                  optimize=True)
    b = 0.5 * (b + b.transpose(0, 2, 1))
    cutoff = DROP_THRESHOLD_REL * np.abs(b).max()
    b[np.abs(b) < cutoff] = 0.0
    return QuasiHarmonicSystem(
        lambdas=basis.lambdas.copy(), bilinear=b, labels=basis.labels,
        alpha=sys.alpha, a=sys.a, p=sys.p, basis=basis, reduced=sys,
        name=name or f"p{sys.p}",
    )


def eval_qh_rhs(sys: QuasiHarmonicSystem, x, alpha=None):
    """xdd = -Lambda x + alpha * C(x, x)."""
    x = np.asarray(x, dtype=float)
    if x.size != sys.dof:
        raise ValueError(f"state has {x.size} modes, system has {sys.dof}")
    if alpha is None:
        alpha = sys.alpha
    return -sys.lambdas * x + alpha * np.einsum("ijk,j,k->i", sys.bilinear, x, x)


# ---------------------------------------------------------------------------
# Plain-text system files: header "p a alpha", one lambda line per mode
# ("<lambda> <kind> <pair>"), then one line "i j k value" per nonzero
# monomial coefficient, everything 1-based with 17 significant digits.
# ---------------------------------------------------------------------------


def save_system(sys: QuasiHarmonicSystem, path):
    with open(path, "w") as fh:
        fh.write(f"{sys.p} {sys.a!r} {sys.alpha!r}\n")
        for lam, lab in zip(sys.lambdas, sys.labels):
            fh.write(f"{lam:.16e} {lab.kind} {lab.pair}\n")
        for i, j, k, c in sys.monomial_entries():
            fh.write(f"{i} {j} {k} {c:.16e}\n")


def load_system(path, name: str = "") -> QuasiHarmonicSystem:
    """Read a system file written by :func:`save_system` (comments allowed)."""
    lams, labels, entries = [], [], []
    header = None
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if header is None:
                if len(parts) != 3:
                    raise ValueError(f"{path}: malformed header {line!r}")
                header = (int(parts[0]), float(parts[1]), float(parts[2]))
            elif len(parts) == 3 and parts[1] in ("acoustic", "optical"):
                lams.append(float(parts[0]))
                labels.append(ModeLabel(parts[1], int(parts[2])))
            elif len(parts) == 4:
                entries.append((int(parts[0]), int(parts[1]), int(parts[2]),
                                float(parts[3])))
            else:
                raise ValueError(f"{path}: unrecognised line {line!r}")
    if header is None or not lams:
        raise ValueError(f"{path}: missing header or mode lines")
    p, a, alpha = header
    d = len(lams)
    b = np.zeros((d, d, d))
    for i, j, k, c in entries:
        if not (1 <= i <= d and 1 <= j <= k <= d):
            raise ValueError(f"{path}: entry indices out of range: {(i, j, k)}")
        val = c if j == k else 0.5 * c
        b[i - 1, j - 1, k - 1] = val
        b[i - 1, k - 1, j - 1] = val
    return QuasiHarmonicSystem(
        lambdas=np.array(lams), bilinear=b, labels=tuple(labels),
        alpha=alpha, a=a, p=p, name=name or str(path),
    )
