"""Dense linear-algebra kernels.

Thin QR with a deterministic sign convention, exponentials of symmetric
matrices through their eigendecomposition, the rank-structured identity

    e^{t Q B Q^T} = (I - Q Q^T) + Q e^{tB} Q^T     (Q^T Q = I),

which lets an N x N exponential be assembled from an r x r one, and the
spectral / logarithmic norms used by the splitting-error analysis.

Everything here is a pure function of its inputs and safe to call
concurrently.  Matrices are plain float ndarrays.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotOrthonormal, NotSymmetric, RankDeficient

# Default tolerances; every operation accepts an override.
RANK_TOL = 1e-10
SYMMETRY_TOL = 1e-10
ORTHONORMALITY_TOL = 1e-8


@dataclass(frozen=True)
class ThinQR:
    """Factors q (orthonormal columns) and r (zero below the diagonal).

    For a tall input (rows >= cols) q is rows x cols and r is square upper
    triangular; for a wide input q is square and r upper trapezoidal.
    ``q @ r`` reconstructs the input.
    """

    q: np.ndarray
    r: np.ndarray


def _qr_nonneg(m: np.ndarray, rank_tol: float) -> ThinQR:
    q, r = np.linalg.qr(m, mode="reduced")
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    q = q * d
    r = np.triu(d[:, None] * r)
    scale = np.linalg.norm(m)
    if np.any(np.abs(np.diag(r)) < rank_tol * max(scale, np.finfo(float).tiny)):
        raise RankDeficient(
            f"matrix of shape {m.shape} is rank deficient below "
            f"relative tolerance {rank_tol:g}"
        )
    return ThinQR(q, r)


def thin_qr(m: np.ndarray, rank_tol: float | None = None) -> ThinQR:
    """Thin QR of a tall matrix (rows >= cols), diagonal of r nonnegative.

    Raises RankDeficient when any diagonal entry of r falls below
    ``rank_tol * ||m||_F``: the input columns are (numerically) dependent.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got ndim={m.ndim}")
    if m.shape[0] < m.shape[1]:
        raise DimensionMismatch(
            f"thin_qr needs rows >= cols, got {m.shape}; use economy_qr"
        )
    if not np.all(np.isfinite(m)):
        raise ValueError("thin_qr requires finite entries")
    return _qr_nonneg(m, RANK_TOL if rank_tol is None else rank_tol)


def economy_qr(m: np.ndarray, rank_tol: float | None = None) -> ThinQR:
    """QR of an arbitrary matrix with the same sign fix and rank check.

    For wide inputs q is square (rows x rows) and r upper trapezoidal; this
    is the factorization used for batches with more samples than features.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError("economy_qr requires finite entries")
    return _qr_nonneg(m, RANK_TOL if rank_tol is None else rank_tol)


def expm_sym(s: np.ndarray, t: float, sym_tol: float | None = None) -> np.ndarray:
    """exp(t*s) for symmetric s, via the eigendecomposition of s.

    The input is symmetrized before use; asymmetry beyond
    ``sym_tol * max(1, |s|_max)`` raises NotSymmetric.  For positive
    semidefinite s and t <= 0 the result has spectral norm at most 1.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {s.shape}")
    tol = SYMMETRY_TOL if sym_tol is None else sym_tol
    asym = float(np.max(np.abs(s - s.T))) if s.size else 0.0
    scale = max(1.0, float(np.max(np.abs(s)))) if s.size else 1.0
    if asym > tol * scale:
        raise NotSymmetric(f"asymmetry {asym:.3e} exceeds tolerance {tol * scale:.3e}")
    sym = (s + s.T) / 2.0
    w, u = np.linalg.eigh(sym)
    out = (u * np.exp(t * w)) @ u.T
    return (out + out.T) / 2.0


def expm_lowrank(
    q: np.ndarray, b: np.ndarray, t: float, orth_tol: float | None = None
) -> np.ndarray:
    """exp(t * q b q^T) assembled as I + q (exp(t*b) - I) q^T.

    q must have orthonormal columns (checked, NotOrthonormal otherwise) and
    b must be symmetric.  Equals the dense exponential of the N x N matrix
    q b q^T, but only an r x r exponential is ever computed.
    """
    q = np.asarray(q, dtype=float)
    b = np.asarray(b, dtype=float)
    if q.ndim != 2:
        raise DimensionMismatch(f"expected a matrix q, got ndim={q.ndim}")
    r = q.shape[1]
    if b.shape != (r, r):
        raise DimensionMismatch(f"core must be {r}x{r}, got {b.shape}")
    tol = ORTHONORMALITY_TOL if orth_tol is None else orth_tol
    dev = float(np.max(np.abs(q.T @ q - np.eye(r))))
    if dev > tol:
        raise NotOrthonormal(f"q^T q deviates from identity by {dev:.3e}")
    core = expm_sym(b, t)
    out = np.eye(q.shape[0]) + q @ ((core - np.eye(r)) @ q.T)
    return (out + out.T) / 2.0 if q.shape[0] == q.shape[1] else out


def spectral_norm(m: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value, by block power iteration on the Gram matrix.

    A 4-vector subspace iteration with Rayleigh-Ritz extraction and a
    deterministic seeded start; the residual bound for symmetric matrices
    makes the returned value accurate to ~tol relative.  Falls back to a
    dense symmetric eigensolve in the (stagnation) corner case.
    """
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0.0
    scale = float(np.max(np.abs(m)))
    if scale == 0.0:
        return 0.0
    ms = m / scale
    g = ms @ ms.T if ms.shape[0] <= ms.shape[1] else ms.T @ ms
    g = (g + g.T) / 2.0
    n = g.shape[0]
    k = min(4, n)
    v = np.random.default_rng(0x5EED).standard_normal((n, k))
    q, _ = np.linalg.qr(v)
    theta = 0.0
    for _ in range(max_iter):
        w = g @ q
        h = q.T @ w
        evals, evecs = np.linalg.eigh((h + h.T) / 2.0)
        theta = float(evals[-1])
        top = q @ evecs[:, -1]
        res = float(np.linalg.norm(g @ top - theta * top))
        if res <= tol * max(abs(theta), np.finfo(float).tiny):
            return float(np.sqrt(max(theta, 0.0))) * scale
        q, _ = np.linalg.qr(w)
    theta = float(np.linalg.eigvalsh(g)[-1])
    return float(np.sqrt(max(theta, 0.0))) * scale


def log_norm(m: np.ndarray) -> float:
    """Logarithmic norm: the largest eigenvalue of the symmetric part.

    Controls exponential decay: ``||exp(t*m)||_2 <= exp(t * log_norm(m))``
    for t >= 0.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {m.shape}")
    return float(np.linalg.eigvalsh((m + m.T) / 2.0)[-1])
