"""Twelve Monte Carlo benchmark applications, each runnable on either backend.

Every kernel is a pure function of instrumented sampler draws, so the two
backends (accelerator pipeline vs. software baseline) can be compared
like-for-like: same kernel arithmetic, same draw counts, different
generator. Kernel formulas and parameter defaults are reconstructions
defined by this project; all are overridable through
``BenchmarkSpec.parameters`` and recorded in the output.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .errors import CatalogError, DomainError, ParameterError
from .kernel_density import GaussianMixture, fit_kde
from .noise_source import NoiseSourceModel, ideal_model
from .rng import UniformStream, derive_seed
from .samplers import (
    sample_box_muller,
    sample_mixture_baseline,
    sample_mixture_prva,
    sample_student_t,
)
from .transform import GaussianSpec, SourcePipeline

__all__ = [
    "BenchmarkSpec",
    "BenchmarkOutput",
    "BenchmarkDef",
    "CATALOG",
    "BENCHMARK_NAMES",
    "BACKEND_NAMES",
    "run_benchmark",
    "BaselineBackend",
    "PrvaBackend",
    "make_backend",
    "InstrumentedSampler",
]

BACKEND_NAMES = ("prva", "baseline")


@dataclass(frozen=True)
class BenchmarkSpec:
    """One benchmark job: which kernel, how many samples, which backend, which seed."""

    name: str
    n_samples: int = 10_000
    backend: str = "baseline"
    seed: int = 0
    parameters: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in CATALOG:
            raise CatalogError(
                f"unknown benchmark {self.name!r}; valid names: {', '.join(BENCHMARK_NAMES)}"
            )
        if self.backend not in BACKEND_NAMES:
            raise DomainError(
                f"unknown backend {self.backend!r}; valid: {', '.join(BACKEND_NAMES)}"
            )
        if self.n_samples < 1:
            raise DomainError("n_samples must be >= 1")


@dataclass(frozen=True)
class BenchmarkOutput:
    """Samples plus exact instrumentation of the run's random-draw cost."""

    samples: np.ndarray
    rng_time: float
    total_time: float
    rng_call_count: int
    resolved_parameters: dict

    @property
    def sampling_fraction(self) -> float:
        return self.rng_time / self.total_time if self.total_time > 0 else float("nan")


# --- sampler backends ---------------------------------------------------------


class BaselineBackend:
    """Software reference generators: Box-Muller Gaussians and friends."""

    name = "baseline"

    def __init__(self, seed: int):
        self._u = UniformStream(seed)

    def gaussian(self, spec: GaussianSpec, n: int) -> np.ndarray:
        return sample_box_muller(spec, n, self._u)

    def mixture(self, mix: GaussianMixture, n: int) -> np.ndarray:
        return sample_mixture_baseline(mix, n, self._u)

    def student_t(self, dof: float, n: int) -> np.ndarray:
        return sample_student_t(dof, n, self._u)


class PrvaBackend:
    """Accelerator path: calibrated noise-source pipeline behind every draw.

    Student-T targets have no Gaussian transform, so they are approximated
    by a kernel-density mixture fitted to a one-off batch of baseline
    Student-T draws and then sampled through the mixture path.
    """

    name = "prva"

    STUDENT_T_FIT_N = 10_000

    def __init__(
        self,
        seed: int,
        model: NoiseSourceModel | None = None,
        calibration_n: int = SourcePipeline.DEFAULT_CALIBRATION_N,
    ):
        if model is None:
            model = ideal_model(seed=derive_seed(seed, 0xAD0))
        self.model = model
        self.pipeline = SourcePipeline(
            model, seed=derive_seed(seed, 0xCAB), calibration_n=calibration_n
        )
        self._pick = UniformStream(derive_seed(seed, 0x71C))
        self._boot = UniformStream(derive_seed(seed, 0xB07))
        self._t_mixtures: dict[float, GaussianMixture] = {}

    def gaussian(self, spec: GaussianSpec, n: int) -> np.ndarray:
        return self.pipeline.sample_gaussian(spec, n)

    def mixture(self, mix: GaussianMixture, n: int) -> np.ndarray:
        return sample_mixture_prva(mix, n, self.pipeline, self._pick)

    def student_t(self, dof: float, n: int) -> np.ndarray:
        mix = self._t_mixtures.get(dof)
        if mix is None:
            fit_data = sample_student_t(dof, self.STUDENT_T_FIT_N, self._boot)
            mix = fit_kde(fit_data)
            self._t_mixtures[dof] = mix
        return self.mixture(mix, n)


def make_backend(backend: str, seed: int, model: NoiseSourceModel | None = None):
    if backend == "baseline":
        return BaselineBackend(seed)
    if backend == "prva":
        return PrvaBackend(seed, model=model)
    raise DomainError(f"unknown backend {backend!r}; valid: {', '.join(BACKEND_NAMES)}")


class InstrumentedSampler:
    """Times every sampler call and counts the variates it delivers."""

    def __init__(self, backend):
        self._backend = backend
        self.rng_time = 0.0
        self.rng_call_count = 0

    def _timed(self, fn, n: int, *args) -> np.ndarray:
        t0 = time.perf_counter()
        out = fn(*args, n)
        self.rng_time += time.perf_counter() - t0
        self.rng_call_count += int(n)
        return out

    def gaussian(self, spec: GaussianSpec, n: int) -> np.ndarray:
        return self._timed(self._backend.gaussian, n, spec)

    def mixture(self, mix: GaussianMixture, n: int) -> np.ndarray:
        return self._timed(self._backend.mixture, n, mix)

    def student_t(self, dof: float, n: int) -> np.ndarray:
        return self._timed(self._backend.student_t, n, dof)


# --- kernels -------------------------------------------------------------------


def _mixture_from_params(p: Mapping[str, Any]) -> GaussianMixture:
    try:
        return GaussianMixture(
            means=np.asarray(p["means"], dtype=np.float64),
            stds=np.asarray(p["stds"], dtype=np.float64),
            weights=np.asarray(p["weights"], dtype=np.float64),
        )
    except KeyError as exc:
        raise ParameterError(f"mixture benchmark missing parameter {exc}") from exc


def _kernel_gaussian_sampling(s: InstrumentedSampler, n: int, p) -> np.ndarray:
    return s.gaussian(GaussianSpec(p["mu"], p["sigma"]), n)


def _kernel_gaussian_mixture(s, n, p) -> np.ndarray:
    return s.mixture(_mixture_from_params(p), n)


def _two_gaussians(s, n, p):
    x = s.gaussian(GaussianSpec(p["mu_x"], p["sigma_x"]), n)
    y = s.gaussian(GaussianSpec(p["mu_y"], p["sigma_y"]), n)
    return x, y


def _kernel_addition(s, n, p):
    x, y = _two_gaussians(s, n, p)
    return x + y


def _kernel_subtract(s, n, p):
    x, y = _two_gaussians(s, n, p)
    return x - y


def _kernel_multiply(s, n, p):
    x, y = _two_gaussians(s, n, p)
    return x * y


def _kernel_divide(s, n, p):
    # defaults keep mu_y >> sigma_y so the denominator stays away from zero
    x, y = _two_gaussians(s, n, p)
    return x / y


def _kernel_schlieren(s, n, p):
    # knife-edge deflection: angle = L * K * dRho / (1 + K * rho0)
    length = s.gaussian(GaussianSpec(p["path_length_m"], p["path_length_std"]), n)
    gladstone = s.gaussian(GaussianSpec(p["gladstone_dale"], p["gladstone_dale_std"]), n)
    grad = s.gaussian(GaussianSpec(p["density_gradient"], p["density_gradient_std"]), n)
    rho = s.gaussian(GaussianSpec(p["density"], p["density_std"]), n)
    return length * gladstone * grad / (1.0 + gladstone * rho)


def _kernel_dynamic_viscosity(s, n, p):
    # falling-ball viscometer: eta = k * (rho_ball - rho_fluid) * t_fall
    k = s.gaussian(GaussianSpec(p["viscometer_constant"], p["viscometer_constant_std"]), n)
    rho_ball = s.gaussian(GaussianSpec(p["ball_density"], p["ball_density_std"]), n)
    rho_fluid = s.gaussian(GaussianSpec(p["fluid_density"], p["fluid_density_std"]), n)
    t_fall = s.gaussian(GaussianSpec(p["fall_time"], p["fall_time_std"]), n)
    return k * (rho_ball - rho_fluid) * t_fall


def _kernel_thermal_expansion(s, n, p):
    dof = p["dof"]
    l0 = p["l0"] + p["length_scale"] * s.student_t(dof, n)
    l1 = p["l1"] + p["length_scale"] * s.student_t(dof, n)
    t0 = p["t0"] + p["temp_scale"] * s.student_t(dof, n)
    t1 = p["t1"] + p["temp_scale"] * s.student_t(dof, n)
    dt = t1 - t0
    # heavy t tails could produce a near-zero span; floor it to keep outputs finite
    dt = np.sign(dt) * np.maximum(np.abs(dt), 1e-3)
    return (l1 - l0) / (l0 * dt)


def _kernel_covid_r0(s, n, p):
    r0 = s.mixture(_mixture_from_params(p), n)
    return np.maximum(0.0, 1.0 - 1.0 / np.maximum(r0, 1e-9))


def _kernel_gbm(s, n, p):
    z = s.gaussian(GaussianSpec(0.0, 1.0), n)
    drift = (p["mu"] - 0.5 * p["sigma"] ** 2) * p["t"]
    return p["s0"] * np.exp(drift + p["sigma"] * np.sqrt(p["t"]) * z)


def _kernel_black_scholes(s, n, p):
    z = s.gaussian(GaussianSpec(0.0, 1.0), n)
    drift = (p["r"] - 0.5 * p["sigma"] ** 2) * p["t"]
    terminal = p["s0"] * np.exp(drift + p["sigma"] * np.sqrt(p["t"]) * z)
    return np.exp(-p["r"] * p["t"]) * np.maximum(terminal - p["k"], 0.0)


# --- catalog -------------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkDef:
    name: str
    display_name: str
    sampling_distribution: str
    defaults: dict
    kernel: Callable
    draws_per_sample: int


_ARITH_DEFAULTS = {"mu_x": 10.0, "sigma_x": 1.0, "mu_y": 5.0, "sigma_y": 0.5}

_DEFAULT_MIXTURE = {
    "means": (-2.0, 0.0, 3.0),
    "stds": (0.5, 1.0, 0.8),
    "weights": (0.3, 0.4, 0.3),
}

_COVID_R0_MIXTURE = {
    "means": (1.5, 2.5, 3.5),
    "stds": (0.2, 0.3, 0.4),
    "weights": (0.3, 0.5, 0.2),
}

CATALOG: dict[str, BenchmarkDef] = {
    d.name: d
    for d in [
        BenchmarkDef(
            "gaussian_sampling", "Gaussian Sampling", "Gaussian",
            {"mu": 0.0, "sigma": 1.0}, _kernel_gaussian_sampling, 1,
        ),
        BenchmarkDef(
            "gaussian_mixture", "Gaussian Mixture", "Mixture",
            dict(_DEFAULT_MIXTURE), _kernel_gaussian_mixture, 1,
        ),
        BenchmarkDef(
            "addition", "Addition", "Gaussian",
            dict(_ARITH_DEFAULTS), _kernel_addition, 2,
        ),
        BenchmarkDef(
            "divide", "Divide", "Gaussian",
            dict(_ARITH_DEFAULTS), _kernel_divide, 2,
        ),
        BenchmarkDef(
            "multiply", "Multiply", "Gaussian",
            dict(_ARITH_DEFAULTS), _kernel_multiply, 2,
        ),
        BenchmarkDef(
            "subtract", "Subtract", "Gaussian",
            dict(_ARITH_DEFAULTS), _kernel_subtract, 2,
        ),
        BenchmarkDef(
            "schlieren", "Schlieren", "Gaussian",
            {
                "path_length_m": 0.1, "path_length_std": 0.001,
                "gladstone_dale": 2.26e-4, "gladstone_dale_std": 1e-6,
                "density_gradient": 5.0, "density_gradient_std": 0.25,
                "density": 1.204, "density_std": 0.012,
            },
            _kernel_schlieren, 4,
        ),
        BenchmarkDef(
            "dynamic_viscosity", "NIST-UM Dynamic Viscosity", "Gaussian",
            {
                "viscometer_constant": 7.0e-4, "viscometer_constant_std": 5e-6,
                "ball_density": 7870.0, "ball_density_std": 15.0,
                "fluid_density": 998.0, "fluid_density_std": 3.0,
                "fall_time": 12.0, "fall_time_std": 0.05,
            },
            _kernel_dynamic_viscosity, 4,
        ),
        BenchmarkDef(
            "thermal_expansion", "NIST-UM Thermal Expansion Coefficient", "Student-T",
            {
                "dof": 3.0,
                "l0": 1.0, "l1": 1.0002, "length_scale": 2e-5,
                "t0": 20.0, "t1": 30.0, "temp_scale": 0.02,
            },
            _kernel_thermal_expansion, 4,
        ),
        BenchmarkDef(
            "covid_r0", "Medical Covid-19 R0", "Mixture",
            dict(_COVID_R0_MIXTURE), _kernel_covid_r0, 1,
        ),
        BenchmarkDef(
            "geometric_brownian_motion", "Geometric Brownian Motion", "Gaussian",
            {"s0": 100.0, "mu": 0.05, "sigma": 0.2, "t": 1.0}, _kernel_gbm, 1,
        ),
        BenchmarkDef(
            "black_scholes", "Black Scholes Monte Carlo Pricing", "Gaussian",
            {"s0": 100.0, "k": 100.0, "r": 0.05, "sigma": 0.2, "t": 1.0},
            _kernel_black_scholes, 1,
        ),
    ]
}

BENCHMARK_NAMES = tuple(CATALOG)
_CATALOG_INDEX = {name: i for i, name in enumerate(BENCHMARK_NAMES)}


def catalog_index(name: str) -> int:
    try:
        return _CATALOG_INDEX[name]
    except KeyError:
        raise CatalogError(
            f"unknown benchmark {name!r}; valid names: {', '.join(BENCHMARK_NAMES)}"
        )


def resolve_parameters(name: str, overrides: Mapping[str, Any] | None) -> dict:
    defn = CATALOG[name]
    params = dict(defn.defaults)
    for key, value in (overrides or {}).items():
        if key not in params:
            raise ParameterError(
                f"benchmark {name!r} has no parameter {key!r}; "
                f"known: {', '.join(sorted(params))}"
            )
        params[key] = value
    return params


def run_benchmark(spec: BenchmarkSpec) -> BenchmarkOutput:
    """Execute one benchmark; all randomness flows through the instrumented sampler."""
    defn = CATALOG[spec.name]
    params = resolve_parameters(spec.name, spec.parameters)
    backend = make_backend(spec.backend, spec.seed)
    sampler = InstrumentedSampler(backend)
    t0 = time.perf_counter()
    samples = np.asarray(defn.kernel(sampler, int(spec.n_samples), params))
    total = time.perf_counter() - t0
    if samples.size != spec.n_samples:
        raise ParameterError(
            f"kernel {spec.name} produced {samples.size} samples, expected {spec.n_samples}"
        )
    return BenchmarkOutput(
        samples=samples,
        rng_time=min(sampler.rng_time, total),
        total_time=total,
        rng_call_count=sampler.rng_call_count,
        resolved_parameters=params,
    )
