"""Finite Gaussian mixtures under the additive-noise heat flow.

Adding independent noise ``sqrt(t) Z`` to a mixture shifts every
component variance by t, so densities, spatial derivatives, and the
derivative ratios f_m/f have closed forms at all t > 0.  Derivatives use
probabilists' Hermite polynomials,

    d^m/dy^m phi(y; mu, s) = phi * (-1)^m He_m(z) / s^(m/2),   z = (y-mu)/sqrt(s),

and ratios are computed as posterior-weighted averages of per-component
terms with log-sum-exp weights.  That form never divides by a tiny
density, which matters for monomials like f1^8/f^7 far into the tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GaussianMixture:
    """Mixture of normals: tuple of (weight, mean, variance) components."""

    components: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        total = 0.0
        for w, _, v in self.components:
            if w <= 0:
                raise ValueError(f"component weight {w} must be positive")
            if v <= 0:
                raise ValueError(f"component variance {v} must be positive")
            total += w
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total}, not 1 (renormalize first)")

    @staticmethod
    def create(components: Iterable[Tuple[float, float, float]]) -> "GaussianMixture":
        """Build a mixture, renormalizing weights that are off by <= 1e-12."""
        comps = [(float(w), float(mu), float(v)) for w, mu, v in components]
        total = sum(w for w, _, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total}, not 1")
        comps = [(w / total, mu, v) for w, mu, v in comps]
        return GaussianMixture(tuple(comps))

    @staticmethod
    def single(mu: float = 0.0, var: float = 1.0) -> "GaussianMixture":
        return GaussianMixture(((1.0, float(mu), float(var)),))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _, _ in self.components])

    @property
    def means(self) -> np.ndarray:
        return np.array([mu for _, mu, _ in self.components])

    @property
    def variances(self) -> np.ndarray:
        return np.array([v for _, _, v in self.components])

    def support_interval(self, t: float, sigmas: float = 12.0) -> Tuple[float, float]:
        """Integration window: means padded by ``sigmas`` flow standard deviations."""
        spread = sigmas * math.sqrt(float(np.max(self.variances)) + t)
        return float(np.min(self.means)) - spread, float(np.max(self.means)) + spread


# The bimodal example used throughout the numeric experiments: two sharp
# modes ten apart, where 1/J(Y_t) changes convexity along the flow.
BIMODAL_MIXTURE = GaussianMixture(((0.5, 0.0, 0.1), (0.5, 10.0, 0.1)))


def _component_logpdf(mix: GaussianMixture, t: float, y: np.ndarray) -> np.ndarray:
    """log(w_i * phi_i(y)) for every component, shape (n_components, n_points)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    s = mix.variances + t
    z = (y[None, :] - mix.means[:, None]) / np.sqrt(s)[:, None]
    return (
        np.log(mix.weights)[:, None]
        - 0.5 * (_LOG_2PI + np.log(s))[:, None]
        - 0.5 * z * z
    )


def log_density(mix: GaussianMixture, t: float, y: np.ndarray) -> np.ndarray:
    """log f(y, t) for the mixture flowed to time t >= 0."""
    if t < 0:
        raise ValueError("t must be >= 0")
    lp = _component_logpdf(mix, t, y)
    top = np.max(lp, axis=0)
    return top + np.log(np.sum(np.exp(lp - top), axis=0))


def hermite_he(max_m: int, z: np.ndarray) -> np.ndarray:
    """Probabilists' Hermite values He_0..He_max_m, shape (max_m+1, *z.shape)."""
    out = np.empty((max_m + 1,) + z.shape)
    out[0] = 1.0
    if max_m >= 1:
        out[1] = z
    for m in range(1, max_m):
        out[m + 1] = z * out[m] - m * out[m - 1]
    return out


def derivative_ratios(
    mix: GaussianMixture, t: float, y: np.ndarray, max_m: int
) -> np.ndarray:
    """Rows m = 0..max_m of f_m(y, t) / f(y, t); row 0 is all ones.

    Each row is the posterior-weighted average of the per-component ratio
    (-1)^m He_m(z_i) / s_i^(m/2), so no explicit density quotient appears.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    s = mix.variances + t
    z = (y[None, :] - mix.means[:, None]) / np.sqrt(s)[:, None]
    lp = _component_logpdf(mix, t, y)
    top = np.max(lp, axis=0)
    post = np.exp(lp - top[None, :])
    post /= np.sum(post, axis=0)[None, :]

    he = hermite_he(max_m, z)
    out = np.empty((max_m + 1, y.size))
    out[0] = 1.0
    for m in range(1, max_m + 1):
        scale = ((-1.0) ** m) / s ** (m / 2.0)
        out[m] = np.sum(post * scale[:, None] * he[m], axis=0)
    return out


def density_deriv(mix: GaussianMixture, t: float, y, m: int = 0):
    """The m-th spatial derivative f_m(y, t); m = 0 is the density itself.

    t = 0 is allowed only for m = 0 (component variances keep the density
    smooth there); negative t is rejected.
    """
    if m < 0:
        raise ValueError("derivative order must be >= 0")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0 and m > 0:
        raise ValueError("derivatives require t > 0")
    arr = np.atleast_1d(np.asarray(y, dtype=float))
    f = np.exp(log_density(mix, t, arr))
    if m == 0:
        values = f
    else:
        values = f * derivative_ratios(mix, t, arr, m)[m]
    if np.isscalar(y) or getattr(y, "ndim", 0) == 0:
        return float(values[0])
    return values
