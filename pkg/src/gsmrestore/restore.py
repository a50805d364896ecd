"""Restoration by alternating diffusivity updates and linear solves.

Four ways to minimize (or approximately integrate) the posterior energy

    (1/(2 sigma^2)) ||A u - v||^2 + sum_x penalty(t(x)),

with t the channel-averaged half squared gradient magnitude:

* ``em_restore``: alternate the conditional-mean diffusivity
  d = diffusivity(t) with the exact quadratic solve.  Monotone descent.
* ``lagged_diffusivity_restore``: freeze the diffusivity at the previous
  iterate and solve the resulting linear stationarity equation.  Produces
  the same iterates as EM; kept as a separate code path so the equivalence
  stays testable.
* ``gradient_descent_restore``: explicit descent with backtracking.
  Baseline only; slow but makes no structural assumptions.
* ``mean_field_restore``: like EM, but the diffusivity argument gets a
  per-pixel variance correction driven by a diagonal posterior-covariance
  estimate c, which damps the diffusivity where the reconstruction is
  uncertain.  c itself is the reciprocal of the operator diagonal.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import diffusion_diagonal, divergence, edge_statistic, gradient, gradient_variance
from .priors import CapabilityError
from .solver import ConvergenceError, DiffusionOperator, cg_solve

_METHODS = ("em", "lagged_diffusivity", "gradient_descent", "mean_field_approx")


class ConvergenceFailure(RuntimeError):
    """Line search or outer iteration could not make progress."""


@dataclass
class RestoreConfig:
    prior: object
    forward: object
    sigma: float
    method: str = "em"
    max_outer_iters: int = 100
    outer_tol: float = 1e-4
    cg_tol: float = 1e-8
    cg_max_iter: Optional[int] = None
    cg_jacobi: bool = False

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        if self.outer_tol <= 0:
            raise ValueError("outer_tol must be positive")
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {_METHODS}")


@dataclass
class RestoreResult:
    image: np.ndarray
    diffusivity: np.ndarray
    gradient_variance: np.ndarray
    pixel_variance: Optional[np.ndarray]
    objective_trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def field_shape(observed):
    """Per-pixel field shape for an observation (channels share fields)."""
    return np.asarray(observed).shape[-2:]


def objective(config, u, observed):
    """Posterior energy of an image candidate."""
    if not getattr(config.prior, "has_penalty", False):
        raise CapabilityError(f"prior '{config.prior.kind}' has no penalty function")
    u = np.asarray(u, dtype=float)
    residual = config.forward.apply(u) - observed
    data = float(np.vdot(residual, residual)) / (2.0 * config.sigma ** 2)
    return data + float(np.sum(config.prior.penalty(edge_statistic(u))))


def objective_gradient(config, u, observed):
    """Exact gradient of ``objective``.

    Channel averaging inside the edge statistic puts a 1/channels factor on
    the diffusion term for multi-channel images.
    """
    u = np.asarray(u, dtype=float)
    d = config.prior.diffusivity(edge_statistic(u))
    channels = 1 if u.ndim == 2 else u.shape[0]
    data = config.forward.adjoint(config.forward.apply(u) - observed) / config.sigma ** 2
    return data - divergence(d * gradient(u)) / channels


def _relative_change(u_new, u_old):
    denom = np.linalg.norm(u_old)
    return np.linalg.norm(u_new - u_old) / max(denom, 1e-300)


def _quadratic_solve(config, diffusivity, observed, x0, outer_iteration):
    op = DiffusionOperator(config.forward, config.sigma, diffusivity)
    try:
        return cg_solve(
            op,
            op.rhs(observed),
            tol=config.cg_tol,
            max_iter=config.cg_max_iter,
            x0=x0,
            jacobi=config.cg_jacobi,
        )
    except ConvergenceError as exc:
        raise ConvergenceError(
            f"outer iteration {outer_iteration}: {exc}",
            residual=exc.residual,
            iterations=exc.iterations,
        ) from exc


def em_restore(config, observed, callback=None, u0=None):
    """Expectation-maximization over the latent scales.

    E step: replace each latent scale by its conditional mean
    diffusivity(t).  M step: minimize the resulting quadratic, i.e. one
    linear solve.  The objective trace is nonincreasing because the
    quadratic majorizes the energy (penalty is concave in t) and conjugate
    gradients never increases it from the warm start.
    """
    observed = np.asarray(observed, dtype=float)
    u = observed.copy() if u0 is None else np.asarray(u0, dtype=float).copy()
    trace = [objective(config, u, observed)]
    d = None
    converged = False
    iterations = 0
    for k in range(config.max_outer_iters):
        d = config.prior.diffusivity(edge_statistic(u))
        u_new = _quadratic_solve(config, d, observed, x0=u, outer_iteration=k + 1)
        trace.append(objective(config, u_new, observed))
        change = _relative_change(u_new, u)
        u = u_new
        iterations = k + 1
        if callback is not None:
            callback(iterations, u)
        if change < config.outer_tol:
            converged = True
            break
    return RestoreResult(
        image=u,
        diffusivity=d,
        gradient_variance=np.zeros(field_shape(observed)),
        pixel_variance=None,
        objective_trace=trace,
        iterations=iterations,
        converged=converged,
    )


def lagged_diffusivity_restore(config, observed, callback=None, u0=None):
    """Fixed-point iteration on the stationarity equation.

    Each step freezes the edge-stopping function at the previous iterate
    and solves the linear elliptic system
    (1/sigma^2) A'(A u - v) - div(d_frozen grad u) = 0.  Identical iterates
    to ``em_restore``; see there.
    """
    observed = np.asarray(observed, dtype=float)
    u = observed.copy() if u0 is None else np.asarray(u0, dtype=float).copy()
    trace = [objective(config, u, observed)]
    frozen = None
    converged = False
    iterations = 0
    for k in range(config.max_outer_iters):
        frozen = config.prior.diffusivity(edge_statistic(u))
        u_new = _quadratic_solve(config, frozen, observed, x0=u, outer_iteration=k + 1)
        trace.append(objective(config, u_new, observed))
        change = _relative_change(u_new, u)
        u = u_new
        iterations = k + 1
        if callback is not None:
            callback(iterations, u)
        if change < config.outer_tol:
            converged = True
            break
    return RestoreResult(
        image=u,
        diffusivity=frozen,
        gradient_variance=np.zeros(field_shape(observed)),
        pixel_variance=None,
        objective_trace=trace,
        iterations=iterations,
        converged=converged,
    )


def gradient_descent_restore(config, observed, step=1.0, callback=None, u0=None):
    """Backtracking gradient descent on the posterior energy.

    Halves the step until the energy does not increase; errors out if the
    step underflows 1e-12 without an acceptable point.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    observed = np.asarray(observed, dtype=float)
    u = observed.copy() if u0 is None else np.asarray(u0, dtype=float).copy()
    obj = objective(config, u, observed)
    trace = [obj]
    converged = False
    iterations = 0
    for k in range(config.max_outer_iters):
        g = objective_gradient(config, u, observed)
        h = step
        while True:
            u_trial = u - h * g
            obj_trial = objective(config, u_trial, observed)
            if obj_trial <= obj + 1e-12 * (1.0 + abs(obj)):
                break
            h *= 0.5
            if h < 1e-12:
                raise ConvergenceFailure(
                    f"backtracking step underflowed at outer iteration {k + 1}"
                )
        trace.append(obj_trial)
        change = _relative_change(u_trial, u)
        u, obj = u_trial, obj_trial
        iterations = k + 1
        if callback is not None:
            callback(iterations, u)
        if change < config.outer_tol:
            converged = True
            break
    return RestoreResult(
        image=u,
        diffusivity=config.prior.diffusivity(edge_statistic(u)),
        gradient_variance=np.zeros(field_shape(observed)),
        pixel_variance=None,
        objective_trace=trace,
        iterations=iterations,
        converged=converged,
    )


def mean_field_restore(config, observed, callback=None, u0=None, update_c=True):
    """Variance-corrected diffusion iteration.

    Per outer iteration:
      1. spread the pixel variances c into gradient variances
         delta(x) = sum_y c(y) |grad indicator_y(x)|^2,
      2. evaluate the diffusivity at t + delta/2 instead of t,
      3. solve the quadratic for the new mean image,
      4. refresh c as the reciprocal of the operator diagonal.

    Starting from c = 0 the first iteration coincides with ``em_restore``;
    ``update_c=False`` keeps c frozen at zero, reducing the whole iteration
    to the plain MAP path (useful for ablation).
    """
    observed = np.asarray(observed, dtype=float)
    u = observed.copy() if u0 is None else np.asarray(u0, dtype=float).copy()
    shape = field_shape(observed)
    c = np.zeros(shape)
    delta = np.zeros(shape)
    d = None
    column_norms = config.forward.column_norms_sq(shape)
    trace = [objective(config, u, observed)]
    converged = False
    iterations = 0
    for k in range(config.max_outer_iters):
        delta = gradient_variance(c)
        d = config.prior.diffusivity(edge_statistic(u) + 0.5 * delta)
        u_new = _quadratic_solve(config, d, observed, x0=u, outer_iteration=k + 1)
        if update_c:
            c = 1.0 / (column_norms / config.sigma ** 2 + diffusion_diagonal(d))
        trace.append(objective(config, u_new, observed))
        change = _relative_change(u_new, u)
        u = u_new
        iterations = k + 1
        if callback is not None:
            callback(iterations, u)
        if change < config.outer_tol:
            converged = True
            break
    return RestoreResult(
        image=u,
        diffusivity=d,
        gradient_variance=delta,
        pixel_variance=c if update_c else None,
        objective_trace=trace,
        iterations=iterations,
        converged=converged,
    )


def restore(config, observed, **kwargs):
    """Dispatch on config.method."""
    if config.method == "em":
        return em_restore(config, observed, **kwargs)
    if config.method == "lagged_diffusivity":
        return lagged_diffusivity_restore(config, observed, **kwargs)
    if config.method == "gradient_descent":
        return gradient_descent_restore(config, observed, **kwargs)
    return mean_field_restore(config, observed, **kwargs)
