"""Discrete calculus on the pixel grid.

Images are float64 arrays of shape (h, w) or (channels, h, w).  Gradient
fields carry the two difference components in an extra axis just before the
spatial ones, i.e. (..., 2, h, w), component 0 running along columns and
component 1 along rows.  Per-pixel scalar fields (diffusivities, variances)
are always (h, w) and shared across channels.

The convention throughout: forward differences that would cross the grid
boundary are zero, and ``divergence`` is constructed as the exact negative
adjoint of ``gradient``, so <grad u, p> + <u, div p> = 0 holds to rounding
for arbitrary u and p.
"""

import numpy as np


def gradient(u):
    """Forward-difference gradient of an image.

    Returns an array of shape u.shape[:-2] + (2, h, w).  The component along
    each axis is zero on the last column/row (no forward neighbour).
    """
    u = np.asarray(u, dtype=float)
    g = np.zeros(u.shape[:-2] + (2,) + u.shape[-2:])
    g[..., 0, :, :-1] = u[..., :, 1:] - u[..., :, :-1]
    g[..., 1, :-1, :] = u[..., 1:, :] - u[..., :-1, :]
    return g


def divergence(p):
    """Negative adjoint of ``gradient``, as a backward difference.

    Takes a field of shape (..., 2, h, w) and returns (..., h, w).  Values of
    the first component on the last column (and of the second on the last
    row) do not enter the result; gradients produced by ``gradient`` are zero
    there anyway, and ignoring them is what makes the adjoint identity hold
    for arbitrary input fields.
    """
    p = np.asarray(p, dtype=float)
    out = np.zeros(p.shape[:-3] + p.shape[-2:])
    p1 = p[..., 0, :, :-1]
    out[..., :, :-1] += p1
    out[..., :, 1:] -= p1
    p2 = p[..., 1, :-1, :]
    out[..., :-1, :] += p2
    out[..., 1:, :] -= p2
    return out


def edge_statistic(u):
    """Half squared gradient magnitude, averaged over channels.

    For a (h, w) image this is 0.5*|grad u|^2 per pixel; for (c, h, w) the
    per-channel values are averaged so that all channels share one edge
    field.  This is the quantity the diffusivity functions are evaluated at.
    """
    g = gradient(u)
    sq = np.sum(g * g, axis=-3)
    if sq.ndim > 2:
        sq = sq.mean(axis=tuple(range(sq.ndim - 2)))
    return 0.5 * sq


def indicator_gradient_sq(pixel, shape):
    """Squared gradient magnitude of a single-pixel indicator image.

    ``pixel`` is (row, col).  The result is an (h, w) map over evaluation
    positions: 2 at the pixel itself (1 per existing forward difference),
    1 at its left and upper neighbours, truncated at the boundary.  Summed
    over positions this is 4 in the interior and drops to 3 or 2 near the
    boundary.
    """
    h, w = shape
    row, col = pixel
    if not (0 <= row < h and 0 <= col < w):
        raise ValueError(f"pixel {pixel} outside {h}x{w} grid")
    out = np.zeros(shape)
    out[row, col] = (col < w - 1) + (row < h - 1)
    if col >= 1:
        out[row, col - 1] += 1.0
    if row >= 1:
        out[row - 1, col] += 1.0
    return out


def diffusion_diagonal(diffusivity):
    """Diagonal of the operator u -> -div(diffusivity * grad u).

    Entry x equals sum_y diffusivity(y) * |grad indicator_x(y)|^2, i.e. the
    weight the pixel's own unknowns receive in the quadratic form.  With unit
    weights this reduces to the stencil sums {2, 3, 4}.
    """
    d = np.asarray(diffusivity, dtype=float)
    out = np.zeros_like(d)
    out[:, :-1] += d[:, :-1]
    out[:, 1:] += d[:, :-1]
    out[:-1, :] += d[:-1, :]
    out[1:, :] += d[:-1, :]
    return out


def gradient_variance(pixel_variance):
    """Variance of the forward-difference gradient under independent pixels.

    Given per-pixel variances c, returns the field
    sum_y c(y) * |grad indicator_y(x)|^2, which is exactly
    Var(|grad u(x)|-components summed) when the pixels of u are independent
    with variances c.  Used as the diagonal-covariance correction of the
    mean-field iteration.
    """
    c = np.asarray(pixel_variance, dtype=float)
    out = np.zeros_like(c)
    out[:, :-1] += c[:, :-1] + c[:, 1:]
    out[:-1, :] += c[:-1, :] + c[1:, :]
    return out
