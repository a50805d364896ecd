"""Scale-mixture gradient priors and their diffusivity functions.

Each prior couples the image gradient to a nonnegative latent scale per
pixel.  Integrating the scale out leaves a penalty ``penalty(t)`` of the
half squared gradient magnitude t; its derivative ``diffusivity(t)`` is both
the edge-stopping function of the diffusion iteration and the conditional
mean of the latent scale given t.  Priors with a tractable latent law also
expose ``sample_latent`` for the Gibbs sampler.

``mixture_integral`` / ``latent_mean_oracle`` evaluate the defining
integrals numerically and exist to cross-check the closed forms;
``complete_monotonicity_check`` tests whether exp(-penalty) behaves like a
Laplace transform of a nonnegative measure at all, i.e. whether a latent
representation can exist.
"""

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy.integrate import quad
from scipy.special import expit
from scipy.stats import gamma as gamma_dist


class CapabilityError(ValueError):
    """Raised when a prior is asked for a facility it does not provide."""


@dataclass(frozen=True)
class GammaPrior:
    """Gamma-distributed latent scale.

    diffusivity(t) = C / (1 + lam*t): C is the smoothing weight on flat
    regions, lam controls how fast smoothing shuts off across edges.  The
    latent scale given t is Gamma(shape C/lam, rate t + 1/lam).
    """

    lam: float
    C: float

    kind: ClassVar[str] = "gamma"
    has_penalty: ClassVar[bool] = True
    has_diffusivity: ClassVar[bool] = True
    has_latent_sampler: ClassVar[bool] = True

    def __post_init__(self):
        if self.lam <= 0 or self.C <= 0:
            raise ValueError("lam and C must be positive")

    def penalty(self, t):
        return (self.C / self.lam) * np.log1p(self.lam * np.asarray(t, dtype=float))

    def diffusivity(self, t):
        return self.C / (1.0 + self.lam * np.asarray(t, dtype=float))

    def sample_latent(self, t, rng):
        t = np.asarray(t, dtype=float)
        shape = self.C / self.lam
        return rng.gamma(shape, 1.0 / (t + 1.0 / self.lam))


@dataclass(frozen=True)
class TwoPointPrior:
    """Latent scale supported on {0, lam}: a per-pixel edge switch.

    A pixel with latent value 0 is an edge (no smoothing there at all),
    lam is full smoothing.  The switch probability is a logistic function
    of t, giving the sigmoid diffusivity lam * sigmoid(mu - lam*t); mu sets
    the gradient level at which the decision flips.
    """

    lam: float
    mu: float

    kind: ClassVar[str] = "two_point"
    has_penalty: ClassVar[bool] = True
    has_diffusivity: ClassVar[bool] = True
    has_latent_sampler: ClassVar[bool] = True

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")

    def penalty(self, t):
        t = np.asarray(t, dtype=float)
        return -np.logaddexp(0.0, self.mu - self.lam * t)

    def diffusivity(self, t):
        t = np.asarray(t, dtype=float)
        return self.lam * expit(self.mu - self.lam * t)

    def sample_latent(self, t, rng):
        t = np.asarray(t, dtype=float)
        p_smooth = expit(self.mu - self.lam * t)
        return self.lam * (rng.random(t.shape) < p_smooth)


@dataclass(frozen=True)
class ExponentialDiffusivityPrior:
    """penalty(t) = 1 - exp(-t), diffusivity(t) = exp(-t).

    exp(-penalty) is completely monotone, so a latent-scale representation
    exists, but no closed form for its law is known; the prior therefore
    supports the MAP and mean-field paths only.
    """

    kind: ClassVar[str] = "exponential_diffusivity"
    has_penalty: ClassVar[bool] = True
    has_diffusivity: ClassVar[bool] = True
    has_latent_sampler: ClassVar[bool] = False

    def penalty(self, t):
        return -np.expm1(-np.asarray(t, dtype=float))

    def diffusivity(self, t):
        return np.exp(-np.asarray(t, dtype=float))

    def sample_latent(self, t, rng):
        raise CapabilityError(
            "prior 'exponential_diffusivity' has no latent-scale sampler"
        )


def _gamma_integral_bounds(prior, t, moment):
    """Integration cutoff leaving < 1e-13 of the gamma mass outside."""
    shape = prior.C / prior.lam + moment
    rate = t + 1.0 / prior.lam
    return float(gamma_dist.isf(1e-13, shape, scale=1.0 / rate))


def mixture_integral(prior, t, moment=0):
    """Numerically evaluate integral of z^moment * exp(-t*z - v(z)) dq(z).

    Independent oracle for the closed forms: adaptive quadrature for the
    gamma prior, exact two-term summation for the two-point prior.
    """
    if prior.kind == "gamma":
        a = prior.C / prior.lam

        def integrand(z):
            # exp(-v(z)) = z**(a-1) * exp(-z/lam), written in log form
            return math.exp(-t * z - z / prior.lam + (a - 1 + moment) * math.log(z))

        zmax = _gamma_integral_bounds(prior, t, moment)
        value, _ = quad(integrand, 0.0, zmax, limit=400)
        return value
    if prior.kind == "two_point":
        # counting measure on {0, lam} with v(z) = -(mu/lam) z
        w0 = 0.0 if moment > 0 else 1.0
        w1 = prior.lam ** moment * math.exp(-t * prior.lam + prior.mu)
        return w0 + w1
    raise CapabilityError(f"no latent measure available for prior '{prior.kind}'")


def latent_mean_oracle(prior, t):
    """Conditional mean of the latent scale given t, by direct integration.

    Must agree with ``diffusivity(t)``; evaluating it through the defining
    integrals keeps the check independent of the closed forms.
    """
    return mixture_integral(prior, t, moment=1) / mixture_integral(prior, t, moment=0)


def complete_monotonicity_check(prior, order=4, points=(0.0, 0.5, 1.0, 2.0)):
    """Finite-difference test that exp(-penalty) is completely monotone.

    Checks (-1)^k * central-kth-difference >= -1e-6 for k <= order at each
    point, with step 1e-3.  Differences of order five and beyond drown in
    rounding noise, hence the cap at 4.
    """
    if order > 4:
        raise ValueError("finite differences beyond order 4 are unreliable")
    h = 1e-3
    tol = 1e-6
    for k in range(order + 1):
        for t in points:
            diff = 0.0
            for j in range(k + 1):
                diff += (-1.0) ** j * math.comb(k, j) * math.exp(
                    -float(prior.penalty(t + (k / 2.0 - j) * h))
                )
            if (-1.0) ** k * diff < -tol:
                return False
    return True
