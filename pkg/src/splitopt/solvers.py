"""Single local-step solvers for the per-batch gradient flow.

For least squares the flow dtheta/dt = -(1/n) x_i^T (x_i theta - y_i) has a
closed form through the QR factors of x_i^T:

    theta(h) = q e^{-(1/n) r r^T h} (q^T theta_0 - eta*) + q eta* +
               (theta_0 - q q^T theta_0),        r r^T eta* = r y_i,

computed entirely through applications of q (no p x p matrix is ever
formed), so the component of theta_0 orthogonal to range(q) is preserved
exactly.  With a single row the formula collapses to a rank-one update
whose h -> infinity limit is the Kaczmarz projection.  Logistic and softmax
local flows have no closed form and are integrated in the reduced
coordinates eta = q^T theta with the adaptive Runge-Kutta pair, then lifted
back by theta(h) = q (eta(h) - eta(0)) + theta_0.

An explicit Euler step of the local flow at step h = alpha * m is exactly
one SGD step at learning rate alpha; ``euler_step`` is that baseline.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import SingularR, ZeroRow
from .linalg import expm_sym
from .ode import IntegratorConfig, rk45_integrate
from .problems import (
    BatchFactorization,
    Problem,
    batch_gradient,
    batch_loss,
    reduced_rhs,
)


@dataclass
class LocalStepReport:
    theta_next: np.ndarray
    method: str
    rhs_evals: int
    batch_loss_before: float
    batch_loss_after: float


def _solve_rt(r: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Stationary reduced state eta*: solve r r^T eta = r y.

    For a square (tall-batch) r this is the triangular solve r^T eta = y;
    for a wide r (batch larger than the feature count) it is the SPD
    normal-equations solve.
    """
    k, cols = r.shape
    dmin = float(np.min(np.abs(np.diag(r)))) if min(k, cols) else 0.0
    if dmin < 1e-12 * max(float(np.max(np.abs(r))), np.finfo(float).tiny):
        raise SingularR("triangular factor has a (numerically) zero diagonal")
    if k == cols:
        return solve_triangular(r, y, trans="T", lower=False)
    return np.linalg.solve(r @ r.T, r @ y)


def lls_local_exact(bf: BatchFactorization, theta0: np.ndarray, h: float, n: int) -> np.ndarray:
    """Exact flow of the least-squares local ODE at time h (1/n scaling)."""
    if h < 0:
        raise ValueError("h must be nonnegative")
    theta0 = np.asarray(theta0, dtype=float)
    q, r = bf.qr.q, bf.qr.r
    eta0 = q.T @ theta0
    eta_star = _solve_rt(r, bf.y_i)
    core = expm_sym(r @ r.T, -h / n)
    eta_h = core @ (eta0 - eta_star) + eta_star
    return theta0 + q @ (eta_h - eta0)


def lls_local_unit(x: np.ndarray, y: float, theta0: np.ndarray, h: float, n: int) -> np.ndarray:
    """Closed form for a single-row batch:

    theta(h) = theta_0 + ((y - x^T theta_0) / ||x||^2) (1 - e^{-||x||^2 h / n}) x
    """
    if h < 0:
        raise ValueError("h must be nonnegative")
    x = np.asarray(x, dtype=float)
    theta0 = np.asarray(theta0, dtype=float)
    nx2 = float(x @ x)
    if nx2 <= np.finfo(float).tiny:
        raise ZeroRow("row has zero norm")
    gain = (float(y) - float(x @ theta0)) / nx2 * -np.expm1(-nx2 * h / n)
    return theta0 + gain * x


def kaczmarz_step(x: np.ndarray, y: float, theta0: np.ndarray) -> np.ndarray:
    """Orthogonal projection of theta_0 onto the hyperplane x^T theta = y."""
    x = np.asarray(x, dtype=float)
    theta0 = np.asarray(theta0, dtype=float)
    nx2 = float(x @ x)
    if nx2 <= np.finfo(float).tiny:
        raise ZeroRow("row has zero norm")
    return theta0 + ((float(y) - float(x @ theta0)) / nx2) * x


def local_step_rk(
    pb: Problem,
    bf: BatchFactorization,
    theta0: np.ndarray,
    h: float,
    cfg: IntegratorConfig | None = None,
) -> LocalStepReport:
    """One local step for logistic/softmax: integrate the reduced flow.

    The state q^T theta (size min(b, p), times K for softmax) is integrated
    from 0 to h and lifted back; least-squares batches are served by the
    closed form instead and are rejected here.
    """
    if pb.kind == "least-squares":
        raise ValueError("least-squares local steps use lls_local_exact")
    if h < 0:
        raise ValueError("h must be nonnegative")
    theta0 = np.asarray(theta0, dtype=float)
    q = bf.qr.q
    eta0 = q.T @ theta0
    shape = eta0.shape

    def rhs(v):
        return reduced_rhs(pb, bf, v.reshape(shape)).ravel()

    before = batch_loss(pb, bf, theta0)
    sol = rk45_integrate(rhs, eta0.ravel(), (0.0, h), cfg)
    eta_h = sol.y_end.reshape(shape)
    theta = theta0 + q @ (eta_h - eta0)
    return LocalStepReport(
        theta_next=theta,
        method="rk45",
        rhs_evals=sol.rhs_evals,
        batch_loss_before=before,
        batch_loss_after=batch_loss(pb, bf, theta),
    )


def euler_step(pb: Problem, bf: BatchFactorization, theta0: np.ndarray, alpha: float) -> np.ndarray:
    """Vanilla SGD step: theta_0 - alpha * batch_gradient."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    theta0 = np.asarray(theta0, dtype=float)
    return theta0 - alpha * batch_gradient(pb, bf, theta0)
