"""Asymptotic splitting-error analysis for row-partitioned quadratics.

Splitting a full-rank matrix X into row blocks X_1..X_k turns the linear
flow matrix A = -X^T X into a sum of negative semidefinite low-rank parts
A_i = -X_i^T X_i = Q_i B_i Q_i^T with B_i = -R_i R_i^T from the thin QR of
X_i^T.  The one-step (time t) composition of the part flows differs from
the exact flow by

    err(t) = || e^{A_k t} ... e^{A_1 t} - e^{A t} ||_2,

which, because every exponential decays on its range, tends for t -> inf
to the norm of the product of the orthogonal complements

    lim err(t) = || Pi_k ... Pi_1 ||_2,   Pi_i = I - Q_i Q_i^T.

``splitting_error`` evaluates the left side (parts through the low-rank
exponential identity, the exact flow densely), ``error_limit`` the right
side, and ``error_sweep`` tabulates both over a time grid.  Products apply
part 1 first, i.e. the factor with the highest index sits leftmost.

The approach to the limit is governed by the slowest decay rate among the
parts and the full flow, exp(t * mu) with mu the largest of the
logarithmic norms; for an iid Gaussian X the smallest singular value can
make that rate impractically slow, so ``random_full_rank`` draws matrices
with singular values bounded away from zero.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient
from .linalg import expm_lowrank, expm_sym, spectral_norm, thin_qr


@dataclass
class LowRankPart:
    q: np.ndarray  # N x r_i, orthonormal columns
    b: np.ndarray  # r_i x r_i, symmetric negative definite


@dataclass
class SplitOperators:
    parts: list
    a_full: np.ndarray
    ranks: list


def random_full_rank(
    n: int, seed: int, sigma_min: float = 0.7, sigma_max: float = 10.0
) -> np.ndarray:
    """Random n x n matrix with singular values in [sigma_min, sigma_max].

    Random orthogonal factors around a uniform spectrum; keeping
    sigma_min away from zero bounds every decay rate in the error sweep
    below by -sigma_min^2, so the sweep visibly reaches its limit.
    """
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((n, n)))
    v, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = rng.uniform(sigma_min, sigma_max, n)
    return u @ (s[:, None] * v.T)


def build_split(x: np.ndarray, blocks: int, seed: int | None = None) -> SplitOperators:
    """Split the rows of a square full-rank x into near-equal blocks.

    With a seed the rows are permuted first (the default keeps them
    contiguous).  Raises RankDeficient when a block loses full row rank or
    the assembled A = -x^T x is not negative definite.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if x.ndim != 2 or x.shape[1] != n:
        raise ValueError(f"expected a square matrix, got {x.shape}")
    if not (1 <= blocks <= n):
        raise ValueError(f"blocks must be in [1, {n}]")
    if seed is not None:
        x = x[np.random.default_rng(seed).permutation(n)]
    edges = np.linspace(0, n, blocks + 1).astype(int)
    parts, ranks = [], []
    for i in range(blocks):
        xi = x[edges[i] : edges[i + 1]]
        fac = thin_qr(xi.T)
        parts.append(LowRankPart(q=fac.q, b=-(fac.r @ fac.r.T)))
        ranks.append(xi.shape[0])
    a_full = -(x.T @ x)
    w = np.linalg.eigvalsh(a_full)
    if not (w[-1] < -1e-10 * abs(w[0])):
        raise RankDeficient("sum of the parts is not negative definite (x is singular)")
    return SplitOperators(parts=parts, a_full=a_full, ranks=ranks)


def splitting_error(ops: SplitOperators, t: float) -> float:
    """Spectral norm of (product of part flows at time t) - (exact flow)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    n = ops.a_full.shape[0]
    prod = np.eye(n)
    for part in ops.parts:
        prod = expm_lowrank(part.q, part.b, t) @ prod
    return spectral_norm(prod - expm_sym(ops.a_full, t))


def error_limit(ops: SplitOperators) -> float:
    """Spectral norm of Pi_k ... Pi_1, the t -> infinity error value."""
    n = ops.a_full.shape[0]
    prod = np.eye(n)
    for part in ops.parts:
        prod = (np.eye(n) - part.q @ part.q.T) @ prod
    return spectral_norm(prod)


def error_sweep(ops: SplitOperators, t_grid) -> np.ndarray:
    """Rows (t, splitting_error(t), limit) over an ascending time grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValueError("t_grid must be a nonempty 1-D sequence")
    if np.any(np.diff(t_grid) < 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be ascending and nonnegative")
    lim = error_limit(ops)
    rows = np.empty((t_grid.size, 3))
    for i, t in enumerate(t_grid):
        rows[i] = (t, splitting_error(ops, float(t)), lim)
    return rows


def write_sweep_csv(rows: np.ndarray, path) -> None:
    """Emit a sweep as CSV with columns t,error,limit."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "error", "limit"])
        for t, err, lim in rows:
            writer.writerow([repr(float(t)), repr(float(err)), repr(float(lim))])
