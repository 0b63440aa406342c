"""Differentiable solving loop over a population of candidate assignments.

One real parameter per variable per candidate (``theta``, V x N). The
forward pass is

    theta -> row-mean normalization -> binarize -> R = P @ A -> smooth-min -> loss

where the binarized matrix A has 2V rows: row 2v holds the positive literal
of variable v and row 2v+1 its complement. The backward pass treats the
binarization as identity (straight-through) and folds the two literal rows
of each variable into a single gradient.
"""

from __future__ import annotations

import csv
import logging
import time
import warnings
from dataclasses import dataclass, field, replace
from decimal import Decimal

import numpy as np

from . import kernels
from .cnf import Model
from .encoding import ProblemMatrix, spmm_forward, spmm_transpose

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerConfig:
    lr_initial: float = 1e-1
    lr_final: float = 1e-15
    decay_factor: float = 10.0
    decay_every: int = 30
    restart_every: int = 360
    tau: float = 1.0
    max_iterations: int = 3600
    convergence_fraction: float = 0.99
    check_stride: int = 10
    rng_seed: int = 0
    normalize: bool = False
    norm_eps: float = 1e-8
    reset_moments_on_restart: bool = True
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    weight_decay: float = 0.0

    def __post_init__(self):
        if not self.lr_initial > self.lr_final > 0:
            raise ValueError("need lr_initial > lr_final > 0")
        for name in ("decay_every", "restart_every", "max_iterations", "check_stride"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.decay_factor <= 0:
            raise ValueError("decay_factor must be positive")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 0 < self.convergence_fraction <= 1:
            raise ValueError("convergence_fraction must lie in (0, 1]")
        if self.restart_every % self.decay_every:
            warnings.warn("restart_every is not a multiple of decay_every", stacklevel=3)

    def replace(self, **changes) -> "OptimizerConfig":
        return replace(self, **changes)


@dataclass
class AssignmentTensor:
    theta: np.ndarray
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @property
    def shape(self):
        return self.theta.shape


@dataclass
class GradSnapshot:
    """State of the final iterate of the gradient phase.

    ``grad_theta`` is the full gradient w.r.t. theta; ``grad_folded`` is the
    per-variable gradient before the normalization Jacobian. ``assignment``
    is the binarized 2V x N matrix both gradients were computed at.
    """

    grad_theta: np.ndarray
    grad_folded: np.ndarray
    hard_sat_counts: np.ndarray
    best_column: int
    loss_history: list[float]
    assignment: np.ndarray
    num_clauses: int
    iterations: int
    stop_reason: str
    model: Model | None = None
    trace: list[tuple[int, float, float, float]] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def best_fraction(self) -> float:
        if self.num_clauses == 0:
            return 1.0
        return float(self.hard_sat_counts[self.best_column]) / self.num_clauses

    @property
    def is_sat(self) -> bool:
        return self.model is not None


def init_assignments(num_vars: int, num_candidates: int, seed=0) -> AssignmentTensor:
    if num_vars < 1 or num_candidates < 1:
        raise ValueError("need at least one variable and one candidate")
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal((num_vars, num_candidates))
    return AssignmentTensor(theta, np.zeros_like(theta), np.zeros_like(theta), 0)


def _row_denominator(theta, eps):
    mu = theta.mean(axis=1, keepdims=True)
    sign = np.where(mu < 0, -1.0, 1.0)
    clamped = np.abs(mu) <= eps
    denom = np.where(clamped, sign * eps, mu)
    return mu, denom, clamped


def normalize_rows(theta: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    """Divide each row by its mean, guarded away from zero."""
    _, denom, _ = _row_denominator(theta, eps)
    return theta / denom


def normalize_rows_vjp(theta: np.ndarray, g: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    """Pull ``g`` (gradient w.r.t. the normalized rows) back to ``theta``.

    For an unclamped row with mean mu the Jacobian is
    I/mu - theta 1^T / (N mu^2); a clamped row has a constant denominator.
    """
    _, denom, clamped = _row_denominator(theta, eps)
    n = theta.shape[1]
    out = g / denom
    coupling = (g * theta).sum(axis=1, keepdims=True) / (n * denom * denom)
    return out - np.where(clamped, 0.0, coupling)


def binarize(theta_norm: np.ndarray) -> np.ndarray:
    """2V x N uint8 matrix: positive literal = [theta_norm > 0], negative = complement."""
    pos = (np.asarray(theta_norm) > 0).astype(np.uint8)
    V, N = pos.shape
    A = np.empty((2 * V, N), dtype=np.uint8)
    A[0::2] = pos
    A[1::2] = 1 - pos
    return A


def decode_column(A: np.ndarray, column: int) -> Model:
    return Model(A[0::2, column] == 1)


def smooth_min(column, tau: float) -> float:
    r = np.asarray(column, dtype=np.float64).reshape(-1, 1)
    if r.size == 0:
        raise ValueError("smooth_min of an empty column")
    if tau <= 0:
        raise ValueError("tau must be positive")
    return float(kernels.smooth_min_columns(r, tau)[0])


def loss(R: np.ndarray, tau: float) -> float:
    """Negative sum of the column smooth-minima of R."""
    return -float(kernels.smooth_min_columns(R, tau).sum())


def loss_grad_R(R: np.ndarray, tau: float) -> tuple[float, np.ndarray]:
    """Loss and its gradient with respect to R."""
    S, dS = kernels.smooth_min_grad(R, tau)
    return -float(S.sum()), -dS


def fold_literal_grad(grad_A: np.ndarray) -> np.ndarray:
    return grad_A[0::2] - grad_A[1::2]


def _forward_backward(P, theta, tau, normalize=True, eps=1e-8):
    Z = normalize_rows(theta, eps) if normalize else theta
    A = binarize(Z)
    R = spmm_forward(P, A)
    value, dR = loss_grad_R(R, tau)
    folded = fold_literal_grad(spmm_transpose(P, dR))
    grad = normalize_rows_vjp(theta, folded, eps) if normalize else folded
    return A, R, value, folded, grad


def backward(P: ProblemMatrix, theta: np.ndarray, tau: float,
             normalize: bool = False, eps: float = 1e-8) -> np.ndarray:
    """Gradient of the loss with respect to theta (straight-through binarization)."""
    return _forward_backward(P, theta, tau, normalize, eps)[4]


def adamw_step(tensor: AssignmentTensor, grad: np.ndarray, lr: float,
               config: OptimizerConfig = OptimizerConfig()) -> AssignmentTensor:
    if grad.shape != tensor.theta.shape:
        raise ValueError("gradient shape does not match theta")
    b1, b2 = config.beta1, config.beta2
    step = tensor.step + 1
    m = b1 * tensor.m + (1 - b1) * grad
    v = b2 * tensor.v + (1 - b2) * grad * grad
    m_hat = m / (1 - b1 ** step)
    v_hat = v / (1 - b2 ** step)
    theta = tensor.theta
    if config.weight_decay:
        theta = theta * (1 - lr * config.weight_decay)
    theta = theta - lr * m_hat / (np.sqrt(v_hat) + config.adam_eps)
    return AssignmentTensor(theta, m, v, step)


def lr_at(iteration: int, config: OptimizerConfig = OptimizerConfig()) -> float:
    """Stepwise decay inside each restart cycle, floored at lr_final."""
    if iteration < 0:
        raise ValueError("iteration must be non-negative")
    drops = (iteration % config.restart_every) // config.decay_every
    # decimal arithmetic so that 1e-1 / 10**6 is exactly 1e-7, not one ulp off
    lr = Decimal(repr(config.lr_initial)) / Decimal(repr(config.decay_factor)) ** drops
    return max(float(lr), config.lr_final)


def hard_evaluate(P: ProblemMatrix, A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column satisfied-clause counts and full-satisfaction flags."""
    counts = (spmm_forward(P, A) >= 1).sum(axis=0)
    return counts, counts == P.num_clauses


def run_gradient_phase(P: ProblemMatrix, config: OptimizerConfig = OptimizerConfig(),
                       num_candidates: int = 256, time_limit: float | None = None
                       ) -> GradSnapshot:
    """Optimize ``num_candidates`` assignments until convergence or a limit.

    Stops at a check iteration when some column satisfies every clause, or
    the best column satisfies more than ``convergence_fraction`` of them.
    Otherwise stops at ``max_iterations`` or after ``time_limit`` seconds.
    """
    t0 = time.monotonic()
    C, V = P.num_clauses, P.num_vars
    tensor = init_assignments(V, num_candidates, config.rng_seed)

    losses: list[float] = []
    trace = []
    best_fraction = 0.0
    stop_reason = "max_iterations"
    it = 0
    while True:
        if it and it % config.restart_every == 0 and config.reset_moments_on_restart:
            tensor = AssignmentTensor(tensor.theta, np.zeros_like(tensor.m),
                                      np.zeros_like(tensor.v), 0)
        lr = lr_at(it, config)
        if C:
            A, R, value, folded, grad = _forward_backward(
                P, tensor.theta, config.tau, config.normalize, config.norm_eps)
        else:
            A = binarize(tensor.theta)
            R = np.zeros((0, num_candidates), dtype=np.int64)
            value, folded, grad = 0.0, np.zeros_like(tensor.theta), np.zeros_like(tensor.theta)
        losses.append(value)

        last = it + 1 >= config.max_iterations
        timed_out = time_limit is not None and time.monotonic() - t0 >= time_limit
        if it % config.check_stride == 0 or last or timed_out:
            counts = (R >= 1).sum(axis=0)
            best = int(np.argmax(counts))
            best_fraction = counts[best] / C if C else 1.0
            if counts[best] == C:
                stop_reason = "sat"
            elif best_fraction > config.convergence_fraction:
                stop_reason = "converged"
            elif timed_out:
                stop_reason = "timeout"
            elif last:
                stop_reason = "max_iterations"
            else:
                stop_reason = None
        else:
            stop_reason = None
        trace.append((it, lr, value, float(best_fraction)))

        if stop_reason is not None:
            model = decode_column(A, best) if stop_reason == "sat" else None
            snap = GradSnapshot(
                grad_theta=grad, grad_folded=folded, hard_sat_counts=counts,
                best_column=best, loss_history=losses, assignment=A, num_clauses=C,
                iterations=it + 1, stop_reason=stop_reason, model=model, trace=trace,
                seconds=time.monotonic() - t0)
            log.debug("gradient phase stopped (%s) after %d iterations, best %.4f",
                      stop_reason, it + 1, snap.best_fraction)
            return snap

        tensor = adamw_step(tensor, grad, lr, config)
        if not np.isfinite(tensor.theta).all():
            raise FloatingPointError(f"non-finite parameters at iteration {it}")
        it += 1


def write_trace(snapshot: GradSnapshot, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["iteration", "lr", "loss", "best_fraction"])
        for it, lr, value, frac in snapshot.trace:
            w.writerow([it, repr(lr), repr(value), repr(frac)])

