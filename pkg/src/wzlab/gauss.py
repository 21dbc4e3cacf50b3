"""Gaussian-vector primitives: covariance validation, conditioning, eigendecomposition, sampling.

Conventions: all vectors are zero mean; covariance matrices are symmetric PSD.
Sample blocks are arrays of shape (n, dim), one row per i.i.d. draw.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DomainError, NotConverged, SingularCovariance

MAX_DIM = 64

_SYM_RTOL = 1e-12
_PSD_TOL = 1e-10


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def validate_sym_psd(m, name: str = "matrix") -> np.ndarray:
    """Check symmetry (1e-12 relative) and positive semidefiniteness; return a float copy."""
    a = _as_matrix(m)
    if a.shape[0] > MAX_DIM:
        raise DomainError(f"{name}: dimension {a.shape[0]} exceeds cap {MAX_DIM}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > _SYM_RTOL * scale:
        raise DomainError(f"{name} is not symmetric within tolerance")
    a = 0.5 * (a + a.T)
    evals = _jacobi(a)[0]
    if evals.min() < -_PSD_TOL * max(np.trace(a), 1.0):
        raise DomainError(f"{name} is not positive semidefinite (min eig {evals.min():g})")
    return a


@dataclass(frozen=True)
class JointGaussianSpec:
    """Zero-mean jointly Gaussian (X, Y) described by covariance blocks.

    Qx: (dx, dx), Qy: (dy, dy), Cxy: (dx, dy) cross-covariance E[X Y^T].
    """

    Qx: np.ndarray
    Qy: np.ndarray
    Cxy: np.ndarray
    dim_x: int = field(init=False)
    dim_y: int = field(init=False)

    def __post_init__(self):
        qx = validate_sym_psd(self.Qx, "Qx")
        qy = validate_sym_psd(self.Qy, "Qy")
        cxy = np.asarray(self.Cxy, dtype=float)
        if cxy.ndim == 0:
            cxy = cxy.reshape(1, 1)
        if cxy.shape != (qx.shape[0], qy.shape[0]):
            raise DimensionMismatch(
                f"Cxy shape {cxy.shape} incompatible with ({qx.shape[0]}, {qy.shape[0]})"
            )
        object.__setattr__(self, "Qx", qx)
        object.__setattr__(self, "Qy", qy)
        object.__setattr__(self, "Cxy", cxy)
        object.__setattr__(self, "dim_x", qx.shape[0])
        object.__setattr__(self, "dim_y", qy.shape[0])
        validate_sym_psd(self.joint_cov(), "joint covariance")

    def joint_cov(self) -> np.ndarray:
        top = np.hstack([self.Qx, self.Cxy])
        bot = np.hstack([self.Cxy.T, self.Qy])
        return np.vstack([top, bot])


@dataclass(frozen=True)
class EigenDecomp:
    """Orthogonal V and nonincreasing eigenvalues with V diag(lambdas) V^T = input."""

    V: np.ndarray
    lambdas: np.ndarray


def _jacobi(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 64):
    """Cyclic Jacobi rotations; returns (eigenvalues, eigenvectors as columns), unsorted."""
    n = a.shape[0]
    A = a.copy()
    V = np.eye(n)
    if n == 1:
        return np.array([A[0, 0]]), V
    scale = max(np.abs(a).max(), 1.0)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                off = max(off, abs(apq))
                if abs(apq) <= tol * scale:
                    continue
                theta = 0.5 * (A[q, q] - A[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
        if off <= tol * scale:
            return np.diag(A).copy(), V
    raise NotConverged(f"Jacobi sweep limit {max_sweeps} reached (off-diag {off:g})")


def eigh(Q) -> EigenDecomp:
    """Symmetric PSD eigendecomposition with deterministic ordering and sign convention.

    Eigenvalues are sorted nonincreasing; each eigenvector is flipped so its
    first entry of magnitude above 1e-12 is positive.
    """
    a = validate_sym_psd(Q, "Q")
    lam, V = _jacobi(a)
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    V = V[:, order]
    for j in range(V.shape[1]):
        col = V[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0:
            V[:, j] = -col
    return EigenDecomp(V=V, lambdas=np.maximum(lam, 0.0))


def conditional_moments(spec: JointGaussianSpec, cond_cap: float = 1e12):
    """Return (gain, Qcond) with E[X|Y] = gain @ Y and Qcond = Qx - Cxy Qy^-1 Cxy^T."""
    dec = eigh(spec.Qy)
    lam = dec.lambdas
    if lam[0] <= 0.0 or lam[-1] <= lam[0] / cond_cap:
        raise SingularCovariance(
            f"Qy condition number exceeds {cond_cap:g} (eigenvalues {lam})"
        )
    qy_inv = dec.V @ np.diag(1.0 / lam) @ dec.V.T
    gain = spec.Cxy @ qy_inv
    qcond = spec.Qx - gain @ spec.Cxy.T
    qcond = validate_sym_psd(0.5 * (qcond + qcond.T), "Qcond")
    return gain, qcond


def sample_joint(spec: JointGaussianSpec, n: int, seed: int):
    """Draw n i.i.d. (x, y) pairs; returns (x_block (n, dx), y_block (n, dy)).

    The joint covariance is factored through its eigendecomposition so
    PSD-singular blocks (e.g. a zero-variance Y) sample correctly.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    cov = spec.joint_cov()
    dec = eigh(cov)
    root = dec.V * np.sqrt(dec.lambdas)[None, :]
    g = np.random.default_rng(np.random.SeedSequence(seed)).standard_normal(
        (n, cov.shape[0])
    )
    samples = g @ root.T
    return samples[:, : spec.dim_x], samples[:, spec.dim_x :]
