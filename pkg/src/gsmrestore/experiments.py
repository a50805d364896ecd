"""Experiment support: noise synthesis, metrics, test images, presets.

The package ships no binary images.  ``make_test_image`` generates the
standard desk-scale target (two flat regions split by a vertical step edge,
plus a sinusoidal texture patch) and ``make_test_image_masks`` exposes which
pixels count as step edge and which as reliably flat, for scoring edge
maps.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .image_io import save_image


def add_noise(u, sigma, seed=0):
    """Add i.i.d. Gaussian noise per pixel and channel, unclamped."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    u = np.asarray(u, dtype=float)
    if sigma == 0:
        return u.copy()
    rng = np.random.default_rng(seed)
    return u + rng.normal(0.0, sigma, size=u.shape)


def psnr(u, reference):
    """Peak signal-to-noise ratio in dB against peak value 1.0.

    Returns +inf for identical inputs.
    """
    u = np.asarray(u, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if u.shape != reference.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {reference.shape}")
    mse = float(np.mean((u - reference) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def make_test_image(size=64, channels=1):
    """Piecewise-constant target with a step edge and a texture patch.

    Dark left half (0.25), bright right half (0.75), and a sinusoidal
    texture patch in the lower left quadrant.  Values stay within [0, 1].
    """
    h = w = int(size)
    img = np.full((h, w), 0.25)
    img[:, w // 2:] = 0.75
    r0, r1 = 5 * h // 8, 7 * h // 8
    c0, c1 = w // 8, 3 * w // 8
    rows, cols = np.mgrid[r0:r1, c0:c1]
    img[r0:r1, c0:c1] = 0.45 + 0.15 * np.sin(2 * np.pi * cols / 6.0) * np.sin(
        2 * np.pi * rows / 6.0
    )
    if channels == 1:
        return img
    return np.broadcast_to(img, (channels, h, w)).copy()


def make_test_image_masks(size=64):
    """(edge_mask, flat_mask) for the ``make_test_image`` layout.

    Edge pixels are where the clean image has its step (the forward
    difference convention puts that on the column left of the jump).  Flat
    pixels keep a safety margin from both the step and the texture patch.
    """
    h = w = int(size)
    edge = np.zeros((h, w), dtype=bool)
    edge[:, w // 2 - 1] = True
    flat = np.ones((h, w), dtype=bool)
    flat[:, w // 2 - 4:w // 2 + 3] = False
    r0, r1 = 5 * h // 8, 7 * h // 8
    c0, c1 = w // 8, 3 * w // 8
    flat[max(0, r0 - 3):r1 + 3, max(0, c0 - 3):c1 + 3] = False
    return edge, flat


def export_edge_map(edge_weights, path):
    """Write the reciprocal edge-weight image, brightest where weights vanish.

    ``edge_weights`` is a per-pixel diffusivity-like field (the restoration
    diffusivity, or mean latent scale / lam for sampler output).  The image
    holds 1/weights affinely rescaled to [0, 1]; pixels with weight exactly
    zero (infinitely strong edges) map to 1.0.  A sidecar text file
    ``<path>.txt`` records the affine range so 1/weights can be recovered
    from the 8-bit image up to quantization:

        reciprocal = min + pixel_value * (max - min)

    Returns (min, max) of the finite reciprocal range.
    """
    w = np.asarray(edge_weights, dtype=float)
    if np.any(w < 0):
        raise ValueError("edge weights must be nonnegative")
    recip = np.full(w.shape, np.inf)
    positive = w > 0
    recip[positive] = 1.0 / w[positive]
    finite = np.isfinite(recip)
    if not finite.any():
        lo = hi = 0.0
        img = np.ones(w.shape)
    else:
        lo = float(recip[finite].min())
        hi = float(recip[finite].max())
        if hi > lo:
            img = (recip - lo) / (hi - lo)
        else:
            img = np.full(w.shape, 0.5)
        img[~finite] = 1.0
    save_image(img, path)
    with open(f"{path}.txt", "w") as f:
        f.write(f"min = {lo!r}\nmax = {hi!r}\n")
    return lo, hi


@dataclass(frozen=True)
class ExperimentPreset:
    """A named bundle of hyperparameters for one reference experiment."""

    name: str
    command: str  # denoise | deblur | sample
    method: str
    prior: str
    lam: float
    C: Optional[float]
    mu: Optional[float]
    sigma: float
    iters: int
    burn_in: Optional[int] = None
    blur_radius: Optional[int] = None
    blur_sigma: Optional[float] = None
    tol: float = 1e-4
    seed: int = 0


# fig3-deblur fixes its own 3x3 Gaussian kernel (radius 1, blur sigma 1.0);
# the choice is part of this preset, not a reproduction of any external blur.
PRESETS = {
    "fig2-denoise": ExperimentPreset(
        name="fig2-denoise",
        command="denoise",
        method="em",
        prior="gamma",
        lam=1e3,
        C=1e3,
        mu=None,
        sigma=0.1,
        iters=60,
    ),
    "fig3-deblur": ExperimentPreset(
        name="fig3-deblur",
        command="deblur",
        method="em",
        prior="gamma",
        lam=4e3,
        C=4e3,
        mu=None,
        sigma=0.02,
        iters=60,
        blur_radius=1,
        blur_sigma=1.0,
    ),
    "fig4-msprior": ExperimentPreset(
        name="fig4-msprior",
        command="sample",
        method="em",  # MAP fallback if the preset is used with denoise
        prior="two-point",
        lam=800.0,
        C=None,
        mu=3.8,
        sigma=0.1,
        iters=100,
        burn_in=20,
    ),
}
