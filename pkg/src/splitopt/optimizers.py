"""Full training loops: SGD, splitting optimization, Kaczmarz sweeps.

One run fixes the batches once (QR included), sets the local time step to
``h = alpha * m``, then sweeps the batches every epoch in a freshly seeded
order, applying one of

    sgd         theta <- theta - alpha * batch_gradient
    splitting   theta <- flow of the local ODE over time h
                (closed form for least squares, adaptive RK otherwise)
    kaczmarz    theta <- projection onto the single-row hyperplane
                (least squares, unit batches only)

Metrics are recorded once per epoch by default; positive
``StoppingRule.eval_every`` switches to every that many inner iterations.
Divergence (non-finite loss or loss above ``divergence_factor`` times the
initial one) is recorded in the trace and ends the run, it is not an error.
Traces are deterministic given the config, except for wall-clock times.
"""

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .data import partition
from .errors import MissingReference
from .ode import IntegratorConfig
from .problems import Problem, loss, test_error, theta_shape
from .solvers import euler_step, kaczmarz_step, lls_local_exact, local_step_rk

METHODS = ("sgd", "splitting", "kaczmarz")
STOP_KINDS = ("relative-residual", "solution-distance", "test-error", "loss-threshold")


@dataclass(frozen=True)
class StoppingRule:
    kind: str
    threshold: float
    eval_every: int = 0  # 0 = once per epoch

    def __post_init__(self):
        if self.kind not in STOP_KINDS:
            raise ValueError(f"unknown stopping rule {self.kind!r}")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.eval_every < 0:
            raise ValueError("eval_every must be nonnegative")


@dataclass(frozen=True)
class RunConfig:
    method: str = "splitting"
    alpha: float = 0.1
    batch_size: int = 32
    seed: int = 0
    max_epochs: int = 100
    stop: StoppingRule | None = None
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    shuffle_each_epoch: bool = True
    init_scale: float = 0.01
    init_seed: int | None = None  # parameter init; defaults to `seed`
    divergence_factor: float = 1e6

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")


@dataclass
class TraceRecord:
    epoch: int
    iteration: int
    wall_seconds: float
    loss: float
    metric: float
    diverged: bool


@dataclass
class Trace:
    method: str
    alpha: float
    batch_size: int
    m: int
    h: float
    seed: int
    stop_kind: str | None
    records: list = field(default_factory=list)
    theta: np.ndarray | None = None
    stopped: bool = False
    diverged: bool = False
    qr_seconds: float = 0.0

    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.records])

    def metrics(self) -> np.ndarray:
        return np.array([r.metric for r in self.records])

    def iterations(self) -> np.ndarray:
        return np.array([r.iteration for r in self.records])


def evaluate_stop(
    rule: StoppingRule,
    pb: Problem,
    holdout: Problem | None,
    theta: np.ndarray,
    theta_ref: np.ndarray | None = None,
) -> bool:
    """Whether the stopping rule fires at theta."""
    return _metric_value(rule, pb, holdout, theta, theta_ref) <= rule.threshold


def _metric_value(rule, pb, holdout, theta, theta_ref):
    if rule.kind == "relative-residual":
        if pb.kind != "least-squares":
            raise ValueError("relative-residual applies to least-squares problems")
        ynorm = float(np.linalg.norm(pb.targets))
        return float(np.linalg.norm(pb.x @ theta - pb.targets)) / max(ynorm, 1e-300)
    if rule.kind == "solution-distance":
        if theta_ref is None:
            raise MissingReference("solution-distance needs a known reference solution")
        ref = np.asarray(theta_ref, dtype=float)
        return float(np.linalg.norm(theta - ref)) / max(float(np.linalg.norm(ref)), 1e-300)
    if rule.kind == "test-error":
        if holdout is None:
            raise MissingReference("test-error needs a holdout problem")
        return test_error(pb, theta, holdout)
    return loss(pb, theta)


def _init_theta(pb: Problem, cfg: RunConfig) -> np.ndarray:
    seed = cfg.seed if cfg.init_seed is None else cfg.init_seed
    rng = np.random.default_rng([seed, 3])
    return cfg.init_scale * rng.standard_normal(theta_shape(pb))


def run(
    pb: Problem,
    holdout: Problem | None,
    cfg: RunConfig,
    theta0: np.ndarray | None = None,
) -> Trace:
    """Train on a problem until the stop rule, the epoch budget, or divergence.

    The wall clock covers the optimization loop only; the one-time QR
    precompute is reported separately as ``qr_seconds``.
    """
    if cfg.method == "kaczmarz":
        if pb.kind != "least-squares" or cfg.batch_size != 1:
            raise ValueError("kaczmarz needs a least-squares problem and batch size 1")
    t_qr = time.perf_counter()
    part, batches = partition(pb, cfg.batch_size, cfg.seed)
    qr_seconds = time.perf_counter() - t_qr
    m = part.m
    h = cfg.alpha * m
    theta = _check_shape(pb, theta0) if theta0 is not None else _init_theta(pb, cfg)

    trace = Trace(
        method=cfg.method,
        alpha=cfg.alpha,
        batch_size=cfg.batch_size,
        m=m,
        h=h,
        seed=cfg.seed if cfg.init_seed is None else cfg.init_seed,
        stop_kind=cfg.stop.kind if cfg.stop else None,
        qr_seconds=qr_seconds,
    )
    eval_every = cfg.stop.eval_every if cfg.stop else 0

    t0 = time.perf_counter()

    def observe(epoch: int, iteration: int) -> bool:
        """Record a measurement; True when the run should end."""
        cur_loss = loss(pb, theta)
        metric = (
            _metric_value(cfg.stop, pb, holdout, theta, pb.theta_ref)
            if cfg.stop
            else math.nan
        )
        # Absolute floor keeps rounding noise near a zero-loss optimum from
        # being read as a blowup.
        bad = not math.isfinite(cur_loss) or (
            cur_loss > cfg.divergence_factor * initial_loss + 1e-12
        )
        trace.records.append(
            TraceRecord(
                epoch=epoch,
                iteration=iteration,
                wall_seconds=time.perf_counter() - t0,
                loss=cur_loss,
                metric=metric,
                diverged=bad,
            )
        )
        if bad:
            trace.diverged = True
            return True
        if cfg.stop and metric <= cfg.stop.threshold:
            trace.stopped = True
            return True
        return False

    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        initial_loss = loss(pb, theta)
        done = observe(0, 0)
        iteration = 0
        for epoch in range(1, cfg.max_epochs + 1):
            if done:
                break
            order = (
                part.epoch_order(epoch - 1)
                if cfg.shuffle_each_epoch
                else np.arange(m)
            )
            for idx in order:
                bf = batches[idx]
                if cfg.method == "sgd":
                    theta = euler_step(pb, bf, theta, cfg.alpha)
                elif cfg.method == "kaczmarz":
                    theta = kaczmarz_step(bf.x_i[0], float(bf.y_i[0]), theta)
                elif pb.kind == "least-squares":
                    theta = lls_local_exact(bf, theta, h, pb.n)
                else:
                    theta = local_step_rk(pb, bf, theta, h, cfg.integrator).theta_next
                iteration += 1
                if eval_every > 0 and iteration % eval_every == 0:
                    done = observe(epoch, iteration)
                    if done:
                        break
            if not done and eval_every == 0:
                done = observe(epoch, iteration)

    trace.theta = theta
    return trace


def _check_shape(pb, theta0):
    theta0 = np.array(theta0, dtype=float)
    if theta0.shape != theta_shape(pb):
        raise ValueError(f"theta0 must have shape {theta_shape(pb)}")
    return theta0


def lr_grid(pb, holdout, base_cfg: RunConfig, alphas) -> list:
    """Independent runs over a learning-rate grid, same seeds throughout."""
    alphas = list(alphas)
    if not alphas:
        raise ValueError("alpha grid must be nonempty")
    return [run(pb, holdout, replace(base_cfg, alpha=float(a))) for a in alphas]
