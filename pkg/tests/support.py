"""Injected stub priors used across the tests.

These are deliberately not part of the package: the point-mass prior turns
the model exactly Gaussian (ground truth for the sampler and the Tikhonov
checks), and the quadratic penalty is a function that provably has no
latent-scale representation (its exp-negative is not completely monotone).
"""

import numpy as np


class PointMassPrior:
    """Deterministic latent scale: penalty(t) = lam * t.

    Equivalent to quadratic (Tikhonov) smoothing with constant weight, so
    the posterior is exactly Gaussian and every algorithm has a closed-form
    target to compare against.
    """

    kind = "point_mass"
    has_penalty = True
    has_diffusivity = True
    has_latent_sampler = True

    def __init__(self, lam):
        self.lam = float(lam)

    def penalty(self, t):
        return self.lam * np.asarray(t, dtype=float)

    def diffusivity(self, t):
        return np.full(np.shape(t), self.lam)

    def sample_latent(self, t, rng):
        return np.full(np.shape(t), self.lam)


class QuadraticPenaltyStub:
    """penalty(t) = t**2: not a scale mixture of Gaussians."""

    kind = "quadratic_stub"
    has_penalty = True
    has_diffusivity = True
    has_latent_sampler = False

    def penalty(self, t):
        t = np.asarray(t, dtype=float)
        return t * t

    def diffusivity(self, t):
        return 2.0 * np.asarray(t, dtype=float)
