"""Gaussian-mixture (kernel density) construction for arbitrary univariate data.

A dataset is turned into a sampleable density by centering one Gaussian
kernel on each point, all sharing a single bandwidth (Silverman's rule by
default). The resulting mixture is the programmable-distribution format
the accelerator consumes: three arrays of means, standard deviations, and
weights.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, DomainError

__all__ = [
    "GaussianMixture",
    "BandwidthSpec",
    "silverman_bandwidth",
    "fit_kde",
    "mixture_pdf",
]

_WEIGHT_TOL = 1e-9
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class GaussianMixture:
    """Weighted sum of Gaussian components.

    Arrays must have equal length; weights are non-negative and sum to 1.
    """

    means: np.ndarray
    stds: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        means = np.atleast_1d(np.asarray(self.means, dtype=np.float64))
        stds = np.atleast_1d(np.asarray(self.stds, dtype=np.float64))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=np.float64))
        if not (means.shape == stds.shape == weights.shape) or means.ndim != 1:
            raise DomainError("means, stds, weights must be 1-D arrays of equal length")
        if means.size < 1:
            raise DomainError("mixture needs at least one component")
        if not np.all(np.isfinite(means)) or not np.all(np.isfinite(stds)):
            raise DomainError("mixture parameters must be finite")
        if np.any(stds <= 0):
            raise DomainError("all component stds must be positive")
        if np.any(weights < 0):
            raise DomainError("weights must be non-negative")
        total = float(weights.sum())
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise DomainError(f"weights must sum to 1 (got {total!r})")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return int(self.means.size)

    def mean(self) -> float:
        return float(self.weights @ self.means)

    def variance(self) -> float:
        second = self.weights @ (self.stds**2 + self.means**2)
        return float(second - self.mean() ** 2)

    def std(self) -> float:
        return math.sqrt(self.variance())

    def to_json(self) -> str:
        return json.dumps(
            {
                "means": self.means.tolist(),
                "stds": self.stds.tolist(),
                "weights": self.weights.tolist(),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "GaussianMixture":
        doc = json.loads(text)
        try:
            return cls(
                means=np.asarray(doc["means"], dtype=np.float64),
                stds=np.asarray(doc["stds"], dtype=np.float64),
                weights=np.asarray(doc["weights"], dtype=np.float64),
            )
        except KeyError as exc:
            raise DomainError(f"mixture JSON missing key {exc}") from exc


@dataclass(frozen=True)
class BandwidthSpec:
    """Bandwidth selection: Silverman's rule, or a fixed width."""

    method: str = "silverman"
    h: float | None = None

    def __post_init__(self):
        if self.method not in ("silverman", "fixed"):
            raise DomainError(f"unknown bandwidth method {self.method!r}")
        if self.method == "fixed":
            if self.h is None or not (self.h > 0):
                raise DomainError("fixed bandwidth requires h > 0")
        elif self.h is not None:
            raise DomainError("h is only meaningful with method='fixed'")

    @classmethod
    def fixed(cls, h: float) -> "BandwidthSpec":
        return cls(method="fixed", h=h)

    def resolve(self, data: np.ndarray) -> float:
        if self.method == "fixed":
            return float(self.h)  # type: ignore[arg-type]
        return silverman_bandwidth(data)


def silverman_bandwidth(data) -> float:
    """Rule-of-thumb bandwidth (4 sigma^5 / (3 N))^(1/5).

    sigma is the unbiased sample standard deviation over all N points.
    Zero-spread data is an error: a zero bandwidth cannot be sampled.
    """
    data = np.asarray(data, dtype=np.float64)
    n = data.size
    if n < 2:
        raise DomainError("need at least two data points")
    sigma = float(np.std(data, ddof=1))
    if sigma == 0.0:
        raise DegenerateDataError("data has zero spread; bandwidth undefined")
    return float((4.0 * sigma**5 / (3.0 * n)) ** 0.2)


def fit_kde(
    data,
    bandwidth: BandwidthSpec | None = None,
    *,
    max_components: int | None = None,
) -> GaussianMixture:
    """Equal-weight Gaussian mixture with one component per data point.

    ``max_components`` uniformly thins large datasets to bound the size of
    the sampling tables; the bandwidth is still computed from the full
    dataset.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 1 or data.size < 1:
        raise DomainError("data must be a non-empty 1-D array")
    bandwidth = bandwidth or BandwidthSpec()
    h = bandwidth.resolve(data)
    means = data
    if max_components is not None and data.size > max_components:
        idx = np.linspace(0, data.size - 1, max_components).round().astype(int)
        means = data[np.unique(idx)]
    m = means.size
    return GaussianMixture(
        means=means.copy(),
        stds=np.full(m, h),
        weights=np.full(m, 1.0 / m),
    )


def mixture_pdf(mix: GaussianMixture, x) -> np.ndarray | float:
    """Density of the mixture at x (scalar or array)."""
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    z = (xs[:, None] - mix.means[None, :]) / mix.stds[None, :]
    dens = np.exp(-0.5 * z * z) / (_SQRT_2PI * mix.stds[None, :])
    out = dens @ mix.weights
    if np.isscalar(x):
        return float(out[0])
    return out
