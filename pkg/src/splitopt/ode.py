"""Adaptive explicit Runge-Kutta integration of small initial value problems.

Implements the Dormand-Prince 5(4) embedded pair with the standard
step-size controller: error estimated from the difference of the 5th- and
4th-order solutions, scaled per component by ``atol + rtol * |y|``, accepted
when the RMS of the scaled error is at most 1, and the next step chosen as
``h * clip(0.9 * err^(-1/5), 0.2, 5.0)``.

The right-hand side is autonomous: a callable mapping the state vector to
its derivative, with no side effects.  States are 1-D float arrays; callers
integrating matrix-valued states flatten and reshape around the call.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteState, StepBudgetExceeded

# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# Difference between the 5th-order weights and the embedded 4th-order ones.
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_ORDER_EXP = 1 / 5


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and budgets for rk45_integrate.

    ``h_init = 0`` selects the starting step automatically from the usual
    error-norm heuristic.
    """

    rtol: float = 1e-6
    atol: float = 1e-9
    h_init: float = 0.0
    h_max: float = math.inf
    max_steps: int = 10_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.h_init < 0 or self.h_max <= 0:
            raise ValueError("h_init must be >= 0 and h_max > 0")


@dataclass
class OdeSolution:
    y_end: np.ndarray
    steps_taken: int
    rhs_evals: int
    rejected_steps: int


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x)))) if x.size else 0.0


def _initial_step(rhs, y0, f0, t_len, cfg):
    """Starting step from the curvature probe heuristic."""
    sc = cfg.atol + cfg.rtol * np.abs(y0)
    d0 = _rms(y0 / sc)
    d1 = _rms(f0 / sc)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t_len)
    f1 = rhs(y0 + h0 * f0)
    d2 = _rms((f1 - f0) / sc) / h0 if np.all(np.isfinite(f1)) else math.inf
    if not math.isfinite(d2) or max(d1, d2) <= 1e-15:
        h1 = max(1e-9, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** _ORDER_EXP
    return min(100 * h0, h1, t_len, cfg.h_max)


def rk45_integrate(rhs, y0, t_span, cfg: IntegratorConfig | None = None) -> OdeSolution:
    """Integrate ``dy/dt = rhs(y)`` from t0 to t1 with adaptive steps.

    Raises StepBudgetExceeded when ``cfg.max_steps`` accepted steps were not
    enough to reach t1 (or the step size underflows), and NonFiniteState
    when the right-hand side turns non-finite at an accepted state, which
    signals divergence or severe stiffness.
    """
    if cfg is None:
        cfg = IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 < t0:
        raise ValueError(f"t_span must be increasing, got {t_span}")
    y = np.array(y0, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise NonFiniteState("initial state contains NaN or Inf")
    if t1 == t0:
        return OdeSolution(y_end=y.copy(), steps_taken=0, rhs_evals=0, rejected_steps=0)

    evals = 0

    def f(state):
        nonlocal evals
        evals += 1
        return np.asarray(rhs(state), dtype=float).ravel()

    t_len = t1 - t0
    k1 = f(y)
    if not np.all(np.isfinite(k1)):
        raise NonFiniteState("right-hand side is non-finite at the initial state")
    h = cfg.h_init if cfg.h_init > 0 else _initial_step(f, y, k1, t_len, cfg)
    h = min(h, cfg.h_max, t_len)

    t = t0
    steps = 0
    rejected = 0
    k = [k1] + [np.empty_like(y) for _ in range(6)]
    while t < t1:
        remaining = t1 - t
        if remaining <= 1e-14 * t_len:
            break  # endpoint reached within rounding of the span
        if steps >= cfg.max_steps:
            raise StepBudgetExceeded(
                f"needed more than {cfg.max_steps} steps to reach t={t1:g}"
            )
        if h <= 1e-14 * max(abs(t), t_len):
            raise StepBudgetExceeded(f"step size underflow at t={t:g}")
        h_step = min(h, remaining)
        for i in range(1, 7):
            yi = y + h_step * sum(a * ki for a, ki in zip(_A[i], k[:i]))
            k[i] = f(yi)
        y_new = y + h_step * sum(b * ki for b, ki in zip(_B5, k))
        err_vec = h_step * sum(e * ki for e, ki in zip(_E, k))
        if np.all(np.isfinite(y_new)) and np.all(np.isfinite(err_vec)):
            sc = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = _rms(err_vec / sc)
        else:
            err = math.inf
        if err <= 1.0:
            t += h_step
            y = y_new
            steps += 1
            if t < t1:
                k1 = f(y)
                if not np.all(np.isfinite(k1)):
                    raise NonFiniteState(
                        f"right-hand side turned non-finite at t={t:g}"
                    )
                k[0] = k1
        else:
            rejected += 1
        if err == 0.0 or err == math.inf:
            factor = _MIN_FACTOR if err == math.inf else _MAX_FACTOR
        else:
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** (-_ORDER_EXP)))
        h = min(h_step * factor, cfg.h_max)

    return OdeSolution(y_end=y, steps_taken=steps, rhs_evals=evals, rejected_steps=rejected)
