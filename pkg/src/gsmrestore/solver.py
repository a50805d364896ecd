"""The restoration operator and its linear solves.

Every algorithm in the package reduces to solving symmetric positive
definite systems with the operator

    L u = (1/sigma^2) A'A u - div(d * grad u)

for a forward model A and a nonnegative per-pixel diffusivity field d.
Solves use plain conjugate gradients on the matrix-free operator, channel
by channel with the shared diffusivity.  ``dense_oracle`` assembles L
explicitly on small grids and is the ground truth the iterative path is
tested against.
"""

from dataclasses import dataclass, field

import numpy as np

from .grid import diffusion_diagonal, divergence, gradient


class ConvergenceError(RuntimeError):
    """Conjugate gradients ran out of iterations."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass
class DiffusionOperator:
    """Matrix-free L = (1/sigma^2) A'A - div(d grad .) with d >= 0.

    Symmetric by construction (divergence is the exact negative adjoint of
    gradient) and positive definite whenever A maps constants away from
    zero, which holds for the identity and for unit-sum convolutions.
    """

    forward: object
    sigma: float
    diffusivity: np.ndarray

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        self.diffusivity = np.asarray(self.diffusivity, dtype=float)
        if self.diffusivity.ndim != 2:
            raise ValueError("diffusivity must be a 2-D per-pixel field")
        if np.any(self.diffusivity < 0):
            raise ValueError("diffusivity must be nonnegative")

    @property
    def shape(self):
        return self.diffusivity.shape

    def apply(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[-2:] != self.shape:
            raise ValueError(f"image shape {u.shape} does not match grid {self.shape}")
        data = self.forward.adjoint(self.forward.apply(u)) / self.sigma ** 2
        return data - divergence(self.diffusivity * gradient(u))

    def rhs(self, observed):
        """Right-hand side (1/sigma^2) A' v for the normal equations."""
        return self.forward.adjoint(observed) / self.sigma ** 2

    def diagonal(self):
        """diag(L), channel-shared: (1/sigma^2)|A e_x|^2 plus stencil terms."""
        return (
            self.forward.column_norms_sq(self.shape) / self.sigma ** 2
            + diffusion_diagonal(self.diffusivity)
        )


def _cg_single(op, b, tol, max_iter, x0, precond_diag):
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return np.zeros_like(b)
    r = b - op.apply(x)
    z = r / precond_diag if precond_diag is not None else r
    p = z.copy()
    rz = float(np.vdot(r, z))
    res = np.linalg.norm(r)
    for _ in range(max_iter):
        if res <= tol * b_norm:
            return x
        Ap = op.apply(p)
        alpha = rz / float(np.vdot(p, Ap))
        x += alpha * p
        r -= alpha * Ap
        res = np.linalg.norm(r)
        z = r / precond_diag if precond_diag is not None else r
        rz_new = float(np.vdot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    if res <= tol * b_norm:
        return x
    raise ConvergenceError(
        f"cg did not reach tolerance {tol:g} within {max_iter} iterations "
        f"(relative residual {res / b_norm:.3e})",
        residual=res,
        iterations=max_iter,
    )


def cg_solve(op, b, tol=1e-8, max_iter=None, x0=None, jacobi=False):
    """Solve L u = b by conjugate gradients.

    ``b`` may be (h, w) or (channels, h, w); channels are solved
    independently.  ``x0`` warm-starts the iteration (same shape as b).
    Raises ConvergenceError carrying the final residual if the relative
    residual does not drop below ``tol`` in ``max_iter`` iterations
    (default 10 * pixels).
    """
    b = np.asarray(b, dtype=float)
    h, w = op.shape
    if max_iter is None:
        max_iter = 10 * h * w
    precond = op.diagonal() if jacobi else None
    if b.ndim == 2:
        return _cg_single(op, b, tol, max_iter, x0, precond)
    out = np.empty_like(b)
    for ch in range(b.shape[0]):
        ch_x0 = None if x0 is None else x0[ch]
        out[ch] = _cg_single(op, b[ch], tol, max_iter, ch_x0, precond)
    return out


@dataclass
class DenseOracle:
    """Explicitly assembled restoration operator for small grids."""

    matrix: np.ndarray
    grid_shape: tuple = field(repr=False, default=None)

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if b.ndim == 2:
            return np.linalg.solve(self.matrix, b.ravel()).reshape(self.grid_shape)
        return np.stack(
            [np.linalg.solve(self.matrix, ch.ravel()).reshape(self.grid_shape) for ch in b]
        )

    @property
    def diagonal(self):
        return self.matrix.diagonal().reshape(self.grid_shape)

    @property
    def log_det(self):
        sign, value = np.linalg.slogdet(self.matrix)
        if sign <= 0:
            raise ValueError("operator is not positive definite")
        return value

    @property
    def inverse_diagonal(self):
        return np.linalg.inv(self.matrix).diagonal().reshape(self.grid_shape)


def dense_oracle(op, max_pixels=64):
    """Assemble L column by column from indicator images.

    Only feasible on small grids; refuses more than ``max_pixels`` pixels.
    """
    h, w = op.shape
    if h * w > max_pixels:
        raise ValueError(f"{h}x{w} grid too large for dense assembly (limit {max_pixels} pixels)")
    n = h * w
    matrix = np.empty((n, n))
    for idx in range(n):
        e = np.zeros((h, w))
        e.flat[idx] = 1.0
        matrix[:, idx] = op.apply(e).ravel()
    return DenseOracle(matrix=matrix, grid_shape=(h, w))
