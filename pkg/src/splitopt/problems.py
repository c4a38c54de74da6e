"""Objective families: linear least squares, binary logistic, softmax.

A Problem holds the design matrix and targets; parameters are plain float
arrays, shaped (p,) for least squares and logistic regression and (p, K)
for softmax.  Losses are sample means:

    least-squares   (1/2n) ||X theta - y||^2
    logistic        mean negative log-likelihood, targets in {0, 1}
    softmax         mean negative log of the true-class probability

The 1/2 on the quadratic keeps every gradient free of stray factors, so
the batch gradient is exactly (1/b) x_i^T (x_i theta - y_i) and the local
flow matches the closed-form solver.

Each minibatch carries its precomputed QR factors of X_i^T, through which
the per-batch gradient-flow ODE restricts to the coordinates eta = Q^T
theta: the flow never leaves theta_0 + range(Q), so only a state of size
min(b, p) (times K) needs to be evolved.  ``local_rhs`` is the original
full-space right-hand side, ``reduced_rhs`` the restricted one.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg import ThinQR

KINDS = ("least-squares", "logistic", "softmax")


@dataclass
class Problem:
    kind: str
    x: np.ndarray
    targets: np.ndarray
    theta_ref: np.ndarray | None = None  # planted solution / phantom, if known

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}")
        self.x = np.asarray(self.x, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        if self.x.ndim != 2 or self.x.shape[0] < 1 or self.x.shape[1] < 1:
            raise DimensionMismatch(f"design matrix must be n x p, got {self.x.shape}")
        if not np.all(np.isfinite(self.x)) or not np.all(np.isfinite(self.targets)):
            raise ValueError("design and targets must be finite")
        n = self.x.shape[0]
        if self.kind == "softmax":
            if self.targets.ndim != 2 or self.targets.shape[0] != n:
                raise DimensionMismatch(
                    f"softmax targets must be n x K one-hot, got {self.targets.shape}"
                )
            onehot = (np.isin(self.targets, (0.0, 1.0)).all()
                      and np.all(self.targets.sum(axis=1) == 1.0))
            if not onehot:
                raise ValueError("softmax targets must be one-hot rows")
        else:
            if self.targets.shape != (n,):
                raise DimensionMismatch(
                    f"targets must have shape ({n},), got {self.targets.shape}"
                )
            if self.kind == "logistic" and not np.isin(self.targets, (0.0, 1.0)).all():
                raise ValueError("logistic targets must be 0/1")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def k(self) -> int:
        return self.targets.shape[1] if self.kind == "softmax" else 1


@dataclass
class BatchFactorization:
    """One minibatch (x_i, y_i) with the QR factors of x_i^T.

    ``qr.q`` spans the subspace the local flow moves in.  For batches wider
    than the feature count (b > p) the factors are the economy QR of the
    wide x_i^T: q is square and the "reduced" state simply has size p.
    """

    x_i: np.ndarray
    y_i: np.ndarray
    qr: ThinQR
    index: int  # batch ordinal, 1-based

    @property
    def b(self) -> int:
        return self.x_i.shape[0]


def theta_shape(pb: Problem) -> tuple:
    return (pb.p, pb.k) if pb.kind == "softmax" else (pb.p,)


def _check_theta(pb: Problem, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != theta_shape(pb):
        raise DimensionMismatch(
            f"parameters must have shape {theta_shape(pb)}, got {theta.shape}"
        )
    return theta


def sigmoid(x):
    """Elementwise logistic function, stable for arguments of any size."""
    scalar = np.ndim(x) == 0
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    return float(out[0]) if scalar else out


def softmax_cols(m: np.ndarray) -> np.ndarray:
    """Column-wise softmax of a K x b matrix, stable under column shifts."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a K x b matrix, got ndim={m.ndim}")
    z = m - m.max(axis=0, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=0, keepdims=True)


def _softmax_rows(m: np.ndarray) -> np.ndarray:
    z = m - m.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _residual(kind: str, x: np.ndarray, targets: np.ndarray, theta: np.ndarray):
    """Prediction minus target; rows x 1 target layout matching the kind."""
    if kind == "least-squares":
        return x @ theta - targets
    if kind == "logistic":
        return sigmoid(x @ theta) - targets
    return _softmax_rows(x @ theta) - targets


def _mean_loss(kind: str, x: np.ndarray, targets: np.ndarray, theta: np.ndarray) -> float:
    rows = x.shape[0]
    z = x @ theta
    if kind == "least-squares":
        return float(np.sum(np.square(z - targets))) / (2 * rows)
    if kind == "logistic":
        # softplus(z) - y z, the stable form of the negative log-likelihood
        return float(np.sum(np.logaddexp(0.0, z) - targets * z)) / rows
    zmax = z.max(axis=1)
    lse = zmax + np.log(np.sum(np.exp(z - zmax[:, None]), axis=1))
    true_score = np.sum(z * targets, axis=1)
    return float(np.sum(lse - true_score)) / rows


def loss(pb: Problem, theta: np.ndarray) -> float:
    """Full-data mean loss."""
    theta = _check_theta(pb, theta)
    return _mean_loss(pb.kind, pb.x, pb.targets, theta)


def batch_loss(pb: Problem, bf: BatchFactorization, theta: np.ndarray) -> float:
    """Mean loss restricted to one batch (1/b scaling)."""
    theta = _check_theta(pb, theta)
    return _mean_loss(pb.kind, bf.x_i, bf.y_i, theta)


def batch_gradient(pb: Problem, bf: BatchFactorization, theta: np.ndarray) -> np.ndarray:
    """Gradient of the batch-mean loss: (1/b) x_i^T (pred - y_i)."""
    theta = _check_theta(pb, theta)
    return bf.x_i.T @ _residual(pb.kind, bf.x_i, bf.y_i, theta) / bf.b


def full_gradient(pb: Problem, theta: np.ndarray) -> np.ndarray:
    """Gradient of the full-data mean loss: (1/n) x^T (pred - y)."""
    theta = _check_theta(pb, theta)
    return pb.x.T @ _residual(pb.kind, pb.x, pb.targets, theta) / pb.n


def local_rhs(pb: Problem, bf: BatchFactorization, theta: np.ndarray) -> np.ndarray:
    """Right-hand side of the per-batch flow: -(1/n) x_i^T (pred - y_i).

    Note the 1/n scaling: one explicit Euler step of this flow with step
    ``h = alpha * m`` is exactly an SGD step with learning rate alpha.
    """
    theta = _check_theta(pb, theta)
    return -(bf.x_i.T @ _residual(pb.kind, bf.x_i, bf.y_i, theta)) / pb.n


def reduced_rhs(pb: Problem, bf: BatchFactorization, eta: np.ndarray) -> np.ndarray:
    """The per-batch flow restricted to eta = q^T theta.

    -(1/n) r (pred(r^T eta) - y_i); equals q^T local_rhs(theta) at any theta
    with q^T theta = eta.  The state has min(b, p) rows (times K columns for
    softmax) instead of p.
    """
    eta = np.asarray(eta, dtype=float)
    r = bf.qr.r
    want = (r.shape[0], pb.k) if pb.kind == "softmax" else (r.shape[0],)
    if eta.shape != want:
        raise DimensionMismatch(f"reduced state must have shape {want}, got {eta.shape}")
    scores = r.T @ eta
    if pb.kind == "least-squares":
        resid = scores - bf.y_i
    elif pb.kind == "logistic":
        resid = sigmoid(scores) - bf.y_i
    else:
        resid = _softmax_rows(scores) - bf.y_i
    return -(r @ resid) / pb.n


def test_error(pb: Problem, theta: np.ndarray, holdout: Problem) -> float:
    """Misclassification fraction on a holdout set.

    Logistic predicts class 1 where the score is nonnegative (threshold at
    probability 0.5); softmax predicts the argmax with smallest-index
    tie-break.  Defined for classification problems only.
    """
    if pb.kind == "least-squares":
        raise ValueError("test_error is defined for classification problems")
    if holdout.kind != pb.kind or holdout.p != pb.p or holdout.k != pb.k:
        raise DimensionMismatch("holdout problem does not match (kind, p, K)")
    theta = _check_theta(pb, theta)
    z = holdout.x @ theta
    if pb.kind == "logistic":
        pred = (z >= 0).astype(float)
        return float(np.mean(pred != holdout.targets))
    pred = np.argmax(z, axis=1)
    truth = np.argmax(holdout.targets, axis=1)
    return float(np.mean(pred != truth))
