"""Gaussian-to-Gaussian affine transform and the 12-to-64-bit dither stage.

The accelerator takes raw 12-bit codes from the noise source, uniformly
dithers each code inside its quantization bin to recover a continuous
value in [0, 1), and then maps that calibrated unit-scale Gaussian onto
any target Gaussian with a single scale-and-offset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSourceError, DomainError
from .noise_source import (
    ADC_MAX,
    AdcTrace,
    FlipCorrectedStream,
    NoiseSourceModel,
    SimulatedAdcStream,
)
from .rng import UniformStream, derive_seed, u64_to_unit

__all__ = [
    "GaussianSpec",
    "TransformCoeffs",
    "calibrate",
    "calibrate_values",
    "transform_coeffs",
    "interpolate_12_to_64",
    "sample_gaussian",
    "SourcePipeline",
]

_BIN_COUNT = ADC_MAX + 1  # 4096
_BELOW_ONE = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class GaussianSpec:
    """Mean and standard deviation of a univariate Gaussian."""

    mean: float
    std: float

    def __post_init__(self):
        if not (np.isfinite(self.mean) and np.isfinite(self.std)):
            raise DomainError("Gaussian parameters must be finite")
        if self.std <= 0:
            raise DomainError(f"std must be positive, got {self.std}")


@dataclass(frozen=True)
class TransformCoeffs:
    """Scale/offset pair mapping one Gaussian onto another: y = a*x + b."""

    a: float
    b: float

    def apply(self, x):
        return self.a * np.asarray(x) + self.b

    def to_json(self) -> str:
        return json.dumps({"a": self.a, "b": self.b})

    @classmethod
    def from_json(cls, text: str) -> "TransformCoeffs":
        doc = json.loads(text)
        return cls(a=float(doc["a"]), b=float(doc["b"]))


def transform_coeffs(source: GaussianSpec, target: GaussianSpec) -> TransformCoeffs:
    """Coefficients sending N(source) to N(target): a = std'/std, b = mu' - mu*a."""
    a = target.std / source.std
    return TransformCoeffs(a=a, b=target.mean - source.mean * a)


def calibrate_values(values: np.ndarray) -> GaussianSpec:
    """Sample mean and unbiased standard deviation of observed source values."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise DomainError("calibration needs at least two samples")
    std = float(np.std(values, ddof=1))
    if std == 0.0:
        raise DegenerateSourceError("calibration input has zero spread")
    return GaussianSpec(mean=float(np.mean(values)), std=std)


def calibrate(trace: AdcTrace) -> GaussianSpec:
    """Calibrate directly on a code-domain trace."""
    return calibrate_values(trace.samples)


def interpolate_12_to_64(adc_value, u) -> np.ndarray | float:
    """Dither a 12-bit code uniformly within its quantization bin.

    Returns (code + u / 2**64) / 4096, a value in [code/4096, (code+1)/4096).
    Accepts scalars or arrays. The top-of-range corner where float64
    rounding would reach 1.0 exactly is clamped to the largest double
    below 1 so the half-open contract survives the float representation.
    """
    codes = np.asarray(adc_value, dtype=np.float64)
    if codes.size and (codes.min() < 0 or codes.max() > ADC_MAX):
        raise DomainError(f"ADC codes outside [0, {ADC_MAX}]")
    out = (codes + u64_to_unit(u)) / _BIN_COUNT
    out = np.minimum(out, _BELOW_ONE)
    if np.isscalar(adc_value) and np.isscalar(u):
        return float(out)
    return out


def sample_gaussian(
    source_spec: GaussianSpec,
    coeffs: TransformCoeffs,
    n: int,
    adc_stream,
    prng_stream: UniformStream,
) -> np.ndarray:
    """Draw n samples: read codes, dither to [0, 1), apply the affine map.

    ``source_spec`` is the calibrated unit-scale spec the coefficients were
    computed against; it is accepted here so callers cannot pair coefficients
    with a stream they were not calibrated for without being explicit.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    del source_spec  # documented pairing only; the math lives in coeffs
    codes = adc_stream.take(int(n))
    unit = interpolate_12_to_64(codes, prng_stream.next_u64(int(n)))
    return coeffs.apply(unit)


class SourcePipeline:
    """Calibrated source-to-Gaussian sampling pipeline.

    Wires together a code stream (simulated by default), the flip
    correction, the dither stage, and an empirical calibration of the
    resulting unit-scale values. After construction, ``sample_gaussian``
    emits samples from any requested target Gaussian.
    """

    DEFAULT_CALIBRATION_N = 100_000

    def __init__(
        self,
        model: NoiseSourceModel | None = None,
        *,
        adc_stream=None,
        seed: int = 0,
        flip: bool = True,
        calibration_n: int = DEFAULT_CALIBRATION_N,
    ):
        if adc_stream is None:
            if model is None:
                raise DomainError("provide a model or an adc_stream")
            adc_stream = SimulatedAdcStream(model, stream=derive_seed(seed, 1))
        if flip:
            adc_stream = FlipCorrectedStream(adc_stream, seed=derive_seed(seed, 2))
        self._stream = adc_stream
        self._dither = UniformStream(derive_seed(seed, 3))
        if calibration_n < 2:
            raise DomainError("calibration_n must be >= 2")
        self.source_spec = calibrate_values(self.draw_unit(calibration_n))

    def draw_unit(self, n: int) -> np.ndarray:
        """Flip-corrected, dithered source values in [0, 1)."""
        if n < 1:
            raise DomainError("n must be >= 1")
        codes = self._stream.take(int(n))
        return interpolate_12_to_64(codes, self._dither.next_u64(int(n)))

    def coeffs_for(self, target: GaussianSpec) -> TransformCoeffs:
        return transform_coeffs(self.source_spec, target)

    def sample_gaussian(self, target: GaussianSpec, n: int) -> np.ndarray:
        coeffs = self.coeffs_for(target)
        return sample_gaussian(self.source_spec, coeffs, n, self._stream, self._dither)
