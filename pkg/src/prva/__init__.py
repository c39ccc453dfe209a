"""Simulated programmable random variate accelerator (PRVA).

A software model of a noise-source sampling accelerator: a 12-bit ADC
noise source with flip correction and dithering, affine Gaussian
transforms, kernel-density mixture programming, classical baseline
samplers, and a Wasserstein-distance benchmark suite comparing the two
generation paths on twelve Monte Carlo applications.
"""

from .benchmarks import (
    BACKEND_NAMES,
    BENCHMARK_NAMES,
    CATALOG,
    BaselineBackend,
    BenchmarkOutput,
    BenchmarkSpec,
    InstrumentedSampler,
    PrvaBackend,
    make_backend,
    run_benchmark,
)
from .errors import (
    AcceptanceStarvationError,
    CapabilityError,
    CatalogError,
    DegenerateDataError,
    DegenerateSourceError,
    DomainError,
    DominanceViolationError,
    EmptyTraceError,
    InsufficientDataError,
    ModelDomainError,
    ParameterError,
    PrvaError,
    StreamUnderrunError,
    TargetSyntaxError,
    TraceParseError,
)
from .evaluation import (
    REFERENCE_SEED,
    Aggregates,
    BenchmarkReport,
    BenchmarkRow,
    CycleCostModel,
    EmpiricalDistribution,
    RunRecord,
    SuiteResult,
    build_reference,
    evaluate_suite,
    gaussian_quantile_grid,
    w1_to_gaussian,
    wasserstein1,
)
from .kernel_density import (
    BandwidthSpec,
    GaussianMixture,
    fit_kde,
    mixture_pdf,
    silverman_bandwidth,
)
from .noise_source import (
    ADC_BITS,
    ADC_MAX,
    FLIP_CENTER,
    AdcTrace,
    FlipCorrectedStream,
    NoiseSourceModel,
    SimulatedAdcStream,
    TraceAdcStream,
    fit_temperature_model,
    flip_correct,
    flip_values,
    ideal_model,
    replay_trace,
    save_trace,
    simulate_raw,
    trace_autocorrelation,
)
from .rng import UniformStream, derive_seed
from .samplers import (
    AcceptRejectStats,
    EmpiricalTarget,
    GaussianTarget,
    MixtureTarget,
    StudentTTarget,
    gaussian_quantile,
    parse_target,
    sample_accept_reject,
    sample_box_muller,
    sample_inversion,
    sample_mixture_baseline,
    sample_mixture_prva,
    sample_student_t,
    standard_normal,
)
from .transform import (
    GaussianSpec,
    SourcePipeline,
    TransformCoeffs,
    calibrate,
    calibrate_values,
    interpolate_12_to_64,
    sample_gaussian,
    transform_coeffs,
)

__version__ = "0.1.0"
