"""Simulated reverse-biased-diode noise source seen through a 12-bit ADC.

The physical source produces an amplified tunneling-noise voltage whose
mean and standard deviation drift with temperature; the ADC quantizes it
to unsigned 12-bit codes. This module provides a parametric stand-in
(Gaussian before quantization, affine temperature curves), trace-file
replay of real captures, the random flip correction that symmetrizes the
code distribution, and a least-squares fit of the temperature curves from
multi-temperature traces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DomainError,
    EmptyTraceError,
    InsufficientDataError,
    ModelDomainError,
    StreamUnderrunError,
    TraceParseError,
)
from .rng import UniformStream

__all__ = [
    "ADC_MAX",
    "AdcSample",
    "AdcTrace",
    "NoiseSourceModel",
    "simulate_raw",
    "replay_trace",
    "save_trace",
    "flip_correct",
    "flip_values",
    "fit_temperature_model",
    "trace_autocorrelation",
    "SimulatedAdcStream",
    "TraceAdcStream",
    "FlipCorrectedStream",
    "ideal_model",
]

ADC_BITS = 12
ADC_MAX = (1 << ADC_BITS) - 1  # 4095
FLIP_CENTER = ADC_MAX / 2.0  # 2047.5


@dataclass(frozen=True)
class AdcSample:
    """A single 12-bit ADC code."""

    value: int

    def __post_init__(self):
        if not (0 <= self.value <= ADC_MAX):
            raise DomainError(f"ADC code {self.value} outside [0, {ADC_MAX}]")


def _validate_codes(samples: np.ndarray) -> None:
    if samples.size and (samples.min() < 0 or samples.max() > ADC_MAX):
        raise DomainError(f"ADC codes outside [0, {ADC_MAX}]")


@dataclass(frozen=True)
class AdcTrace:
    """An ordered batch of ADC codes, optionally tagged with its capture temperature.

    ``clamped_count`` is a diagnostic filled in by the simulator: how many
    pre-quantization values hit the ADC rails and were clamped.
    """

    samples: np.ndarray
    temperature_celsius: float | None = None
    clamped_count: int | None = None

    def __post_init__(self):
        arr = np.ascontiguousarray(self.samples, dtype=np.int64)
        _validate_codes(arr)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return int(self.samples.size)

    def mean(self) -> float:
        return float(np.mean(self.samples))

    def std(self) -> float:
        """Unbiased (n-1 denominator) sample standard deviation."""
        return float(np.std(self.samples, ddof=1))


@dataclass(frozen=True)
class NoiseSourceModel:
    """Parametric source: Gaussian in code units with affine temperature curves.

    ``mean_at(T) = mean_intercept + mean_slope * T`` (codes), and likewise
    for the standard deviation. The standard deviation curve must stay
    positive on the supported 0..45 degC range.
    """

    mean_intercept: float
    mean_slope: float = 0.0
    std_intercept: float = 200.0
    std_slope: float = 0.0
    temperature_celsius: float = 25.0
    seed: int = 0

    TEMP_RANGE = (0.0, 45.0)

    def __post_init__(self):
        lo, hi = self.TEMP_RANGE
        if self.std_at(lo) <= 0 or self.std_at(hi) <= 0:
            raise ModelDomainError(
                "std curve must be positive over the supported temperature range"
            )

    def mean_at(self, temperature: float | None = None) -> float:
        t = self.temperature_celsius if temperature is None else temperature
        return self.mean_intercept + self.mean_slope * t

    def std_at(self, temperature: float | None = None) -> float:
        t = self.temperature_celsius if temperature is None else temperature
        return self.std_intercept + self.std_slope * t

    def at_temperature(self, temperature: float) -> "NoiseSourceModel":
        return NoiseSourceModel(
            self.mean_intercept,
            self.mean_slope,
            self.std_intercept,
            self.std_slope,
            temperature_celsius=temperature,
            seed=self.seed,
        )

    def curves_to_json(self) -> str:
        return json.dumps(
            {
                "mean_intercept": self.mean_intercept,
                "mean_slope": self.mean_slope,
                "std_intercept": self.std_intercept,
                "std_slope": self.std_slope,
            },
            indent=2,
        )

    @classmethod
    def curves_from_json(
        cls, text: str, temperature_celsius: float = 25.0, seed: int = 0
    ) -> "NoiseSourceModel":
        doc = json.loads(text)
        try:
            return cls(
                mean_intercept=float(doc["mean_intercept"]),
                mean_slope=float(doc["mean_slope"]),
                std_intercept=float(doc["std_intercept"]),
                std_slope=float(doc["std_slope"]),
                temperature_celsius=temperature_celsius,
                seed=seed,
            )
        except KeyError as exc:
            raise DomainError(f"model JSON missing key {exc}") from exc


def ideal_model(seed: int = 0, temperature_celsius: float = 25.0) -> NoiseSourceModel:
    """Default operating point: mid-rail mean 2048 codes, std 200 codes."""
    return NoiseSourceModel(
        mean_intercept=2048.0,
        std_intercept=200.0,
        temperature_celsius=temperature_celsius,
        seed=seed,
    )


def _quantize(values: np.ndarray) -> tuple[np.ndarray, int]:
    codes = np.rint(values)
    clamped = int(np.count_nonzero((codes < 0) | (codes > ADC_MAX)))
    return np.clip(codes, 0, ADC_MAX).astype(np.int64), clamped


def simulate_raw(model: NoiseSourceModel, n: int) -> AdcTrace:
    """Draw ``n`` quantized codes from the model at its operating temperature.

    Pure function of (model fields, seed, n): repeated calls return the
    same trace.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    mu, sigma = model.mean_at(), model.std_at()
    if sigma <= 0:
        raise ModelDomainError(f"std {sigma} not positive at T={model.temperature_celsius}")
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([model.seed])))
    codes, clamped = _quantize(gen.normal(mu, sigma, size=int(n)))
    return AdcTrace(codes, model.temperature_celsius, clamped_count=clamped)


_HEADER_PREFIX = "# temperature_celsius="


def replay_trace(path) -> AdcTrace:
    """Parse a trace file: one base-10 code per line, optional temperature header."""
    path = Path(path)
    temperature = None
    values: list[int] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if lineno == 1 and line.startswith(_HEADER_PREFIX):
                    try:
                        temperature = float(line[len(_HEADER_PREFIX):])
                    except ValueError:
                        raise TraceParseError(path, lineno, "malformed temperature header")
                    continue
                raise TraceParseError(path, lineno, "unexpected comment line")
            try:
                value = int(line)
            except ValueError:
                raise TraceParseError(path, lineno, f"not a base-10 integer: {line!r}")
            if not (0 <= value <= ADC_MAX):
                raise TraceParseError(path, lineno, f"code {value} outside [0, {ADC_MAX}]")
            values.append(value)
    if not values:
        raise EmptyTraceError(f"{path}: no samples")
    return AdcTrace(np.asarray(values, dtype=np.int64), temperature)


def save_trace(trace: AdcTrace, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        if trace.temperature_celsius is not None:
            fh.write(f"{_HEADER_PREFIX}{trace.temperature_celsius}\n")
        np.savetxt(fh, trace.samples, fmt="%d")


def flip_values(codes: np.ndarray, u: UniformStream) -> np.ndarray:
    """Replace each code by ADC_MAX - code with probability 0.5."""
    codes = np.asarray(codes)
    flip = u.next_u64(codes.size) >> np.uint64(63)  # top bit: fair coin
    return np.where(flip.astype(bool), ADC_MAX - codes, codes)


def flip_correct(trace: AdcTrace, seed: int) -> AdcTrace:
    """Randomly mirror half the samples about the code midpoint (2047.5).

    Symmetrizes the distribution and pins its mean at ADC_MAX / 2
    regardless of the raw mean, at the cost of inflating the spread when
    the raw mean is off-center.
    """
    if len(trace) == 0:
        raise EmptyTraceError("cannot flip-correct an empty trace")
    flipped = flip_values(trace.samples, UniformStream(seed))
    return AdcTrace(flipped, trace.temperature_celsius)


def fit_temperature_model(
    traces: Sequence[AdcTrace], seed: int = 0, temperature_celsius: float = 25.0
) -> NoiseSourceModel:
    """Least-squares affine fit of per-trace mean and std against temperature."""
    tagged = [t for t in traces if t.temperature_celsius is not None]
    if any(len(t) == 0 for t in tagged):
        raise EmptyTraceError("calibration traces must be non-empty")
    temps = np.array([t.temperature_celsius for t in tagged], dtype=float)
    if np.unique(temps).size < 2:
        raise InsufficientDataError(
            "need at least two traces at distinct temperatures"
        )
    means = np.array([t.mean() for t in tagged])
    stds = np.array([t.std() for t in tagged])
    mean_slope, mean_intercept = np.polyfit(temps, means, 1)
    std_slope, std_intercept = np.polyfit(temps, stds, 1)
    return NoiseSourceModel(
        mean_intercept=float(mean_intercept),
        mean_slope=float(mean_slope),
        std_intercept=float(std_intercept),
        std_slope=float(std_slope),
        temperature_celsius=temperature_celsius,
        seed=seed,
    )


def fit_slope_stderr(traces: Sequence[AdcTrace]) -> float:
    """Standard error of the fitted mean-curve slope (diagnostic for drift tests)."""
    tagged = [t for t in traces if t.temperature_celsius is not None]
    temps = np.array([t.temperature_celsius for t in tagged], dtype=float)
    means = np.array([t.mean() for t in tagged])
    slope, intercept = np.polyfit(temps, means, 1)
    resid = means - (intercept + slope * temps)
    dof = max(len(tagged) - 2, 1)
    s2 = float(resid @ resid) / dof
    sxx = float(np.sum((temps - temps.mean()) ** 2))
    return float(np.sqrt(s2 / sxx))


def trace_autocorrelation(trace: AdcTrace, max_lag: int = 20) -> np.ndarray:
    """Normalized autocorrelation at lags 0..max_lag.

    Diagnostic for the i.i.d. assumption on consecutive ADC samples; no
    whitening is applied anywhere in the pipeline.
    """
    x = trace.samples.astype(np.float64)
    if x.size < 2:
        raise DomainError("need at least two samples for autocorrelation")
    x = x - x.mean()
    denom = float(x @ x)
    if denom == 0.0:
        raise DomainError("constant trace has undefined autocorrelation")
    max_lag = min(max_lag, x.size - 1)
    acf = np.empty(max_lag + 1)
    for lag in range(max_lag + 1):
        acf[lag] = float(x[: x.size - lag] @ x[lag:]) / denom
    return acf


class SimulatedAdcStream:
    """Endless stream of simulated raw codes from a NoiseSourceModel.

    Unlike ``simulate_raw`` this is a stateful cursor: consecutive ``take``
    calls continue the same underlying sequence.
    """

    def __init__(self, model: NoiseSourceModel, stream: int = 0):
        sigma = model.std_at()
        if sigma <= 0:
            raise ModelDomainError(
                f"std {sigma} not positive at T={model.temperature_celsius}"
            )
        self.model = model
        self._mu = model.mean_at()
        self._sigma = sigma
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([model.seed, stream]))
        )
        self.clamped_count = 0

    def take(self, n: int) -> np.ndarray:
        codes, clamped = _quantize(self._gen.normal(self._mu, self._sigma, size=int(n)))
        self.clamped_count += clamped
        return codes


class TraceAdcStream:
    """Replay a recorded trace as a finite stream; raises on underrun."""

    def __init__(self, trace: AdcTrace):
        self._samples = trace.samples
        self._pos = 0

    @property
    def remaining(self) -> int:
        return int(self._samples.size - self._pos)

    def take(self, n: int) -> np.ndarray:
        n = int(n)
        if n > self.remaining:
            raise StreamUnderrunError(
                f"requested {n} samples, only {self.remaining} left in trace"
            )
        out = self._samples[self._pos : self._pos + n]
        self._pos += n
        return out


class FlipCorrectedStream:
    """Wrap a code stream with the random flip correction."""

    def __init__(self, inner, seed: int):
        self._inner = inner
        self._u = UniformStream(seed)

    def take(self, n: int) -> np.ndarray:
        return flip_values(self._inner.take(n), self._u)
