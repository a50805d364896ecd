"""Linear forward models with exact adjoints.

Two kinds are provided: the identity (denoising) and convolution with a
small kernel under replicate padding (deconvolution).  Replicate padding
keeps constant images constant under a unit-sum kernel, which in turn keeps
the restoration operator positive definite.

The adjoint of replicate-padded convolution is not plain correlation: mass
that the padding pulled from edge pixels has to be folded back onto them.
Both directions are built from the same shift decomposition, so the inner
product identity <A u, w> = <u, A' w> holds to rounding.
"""

import numpy as np


def gaussian_kernel(radius, sigma_blur):
    """Sampled Gaussian on a (2*radius+1)^2 grid, normalized to unit sum."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if sigma_blur <= 0:
        raise ValueError("sigma_blur must be positive")
    ii, jj = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    k = np.exp(-(ii * ii + jj * jj) / (2.0 * sigma_blur ** 2))
    return k / k.sum()


class IdentityOperator:
    """The trivial forward model A = I."""

    kind = "identity"

    def apply(self, u):
        return np.asarray(u, dtype=float).copy()

    def adjoint(self, w):
        return np.asarray(w, dtype=float).copy()

    def column_norms_sq(self, shape):
        """Per-pixel |A e_x|^2, identically one."""
        return np.ones(shape)


class ConvolutionOperator:
    """Convolution with a small odd-sized kernel, replicate boundary.

    The kernel must have odd dimensions and unit sum (so A applied to a
    constant image is that constant, and in particular A 1 != 0).
    """

    kind = "convolution"

    def __init__(self, kernel):
        kernel = np.asarray(kernel, dtype=float)
        if kernel.ndim != 2:
            raise ValueError("kernel must be 2-D")
        if kernel.shape[0] % 2 == 0 or kernel.shape[1] % 2 == 0:
            raise ValueError(f"kernel dimensions must be odd, got {kernel.shape}")
        if abs(kernel.sum() - 1.0) > 1e-8:
            raise ValueError("kernel entries must sum to 1")
        self.kernel = kernel
        self.radius = (kernel.shape[0] // 2, kernel.shape[1] // 2)

    def apply(self, u):
        """Convolve the last two axes with the kernel, replicate padding."""
        u = np.asarray(u, dtype=float)
        ry, rx = self.radius
        h, w = u.shape[-2:]
        pad = [(0, 0)] * (u.ndim - 2) + [(ry, ry), (rx, rx)]
        p = np.pad(u, pad, mode="edge")
        out = np.zeros_like(u)
        for i in range(-ry, ry + 1):
            for j in range(-rx, rx + 1):
                out += self.kernel[ry + i, rx + j] * p[..., ry - i:ry - i + h, rx - j:rx - j + w]
        return out

    def adjoint(self, w):
        """Exact adjoint of ``apply``: spread, then fold the padding back."""
        w = np.asarray(w, dtype=float)
        ry, rx = self.radius
        h, wd = w.shape[-2:]
        q = np.zeros(w.shape[:-2] + (h + 2 * ry, wd + 2 * rx))
        for i in range(-ry, ry + 1):
            for j in range(-rx, rx + 1):
                q[..., ry - i:ry - i + h, rx - j:rx - j + wd] += self.kernel[ry + i, rx + j] * w
        # Fold each padded border strip onto the edge row/column it replicated.
        core = q[..., :, rx:rx + wd].copy()
        if rx:
            core[..., :, 0] += q[..., :, :rx].sum(axis=-1)
            core[..., :, -1] += q[..., :, rx + wd:].sum(axis=-1)
        out = core[..., ry:ry + h, :].copy()
        if ry:
            out[..., 0, :] += core[..., :ry, :].sum(axis=-2)
            out[..., -1, :] += core[..., ry + h:, :].sum(axis=-2)
        return out

    def column_norms_sq(self, shape):
        """Per-pixel |A e_x|^2.

        Away from the boundary every column of A is a translate of the
        kernel, so the value is just sum(kernel^2).  Pixels closer than the
        kernel radius to an edge are handled by applying the operator to an
        indicator on a local window; the window is wide enough that its
        artificial edges never interact with the indicator.
        """
        h, w = shape
        ry, rx = self.radius
        out = np.full(shape, float((self.kernel ** 2).sum()))
        my, mx = 3 * ry, 3 * rx
        for row in range(h):
            for col in range(w):
                if ry <= row < h - ry and rx <= col < w - rx:
                    continue
                top, left = max(0, row - my), max(0, col - mx)
                bottom, right = min(h, row + my + 1), min(w, col + mx + 1)
                e = np.zeros((bottom - top, right - left))
                e[row - top, col - left] = 1.0
                out[row, col] = (self.apply(e) ** 2).sum()
        return out
