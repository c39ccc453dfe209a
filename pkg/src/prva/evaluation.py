"""Distribution-quality evaluation: Wasserstein-1 distances against large
cached reference sample sets, plus the benchmark comparison protocol.

The headline quantity is the W1 ratio (accelerator backend / baseline
backend) per benchmark, each side measured against the same frozen
reference distribution. References are expensive (default 10^6 baseline
samples), so they are cached on disk keyed by benchmark, parameters,
size, and seed.
"""

from __future__ import annotations

import hashlib
import json
import os
import platform
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import special

from .benchmarks import (
    BACKEND_NAMES,
    BENCHMARK_NAMES,
    CATALOG,
    BenchmarkSpec,
    catalog_index,
    resolve_parameters,
    run_benchmark,
)
from .errors import DomainError
from .rng import derive_seed

__all__ = [
    "EmpiricalDistribution",
    "wasserstein1",
    "gaussian_quantile_grid",
    "w1_to_gaussian",
    "REFERENCE_SEED",
    "reference_cache_dir",
    "build_reference",
    "CycleCostModel",
    "RunRecord",
    "BenchmarkRow",
    "Aggregates",
    "BenchmarkReport",
    "SuiteResult",
    "evaluate_suite",
    "assemble_report",
    "report_to_csv",
    "report_to_json",
]

REFERENCE_SEED = 111_111_111


# --- empirical distributions and W1 ---------------------------------------------


@dataclass(frozen=True)
class EmpiricalDistribution:
    """A finite sample held sorted ascending, ready for quantile arithmetic."""

    sorted_samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.sorted_samples, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("empirical distribution needs a non-empty 1-d sample")
        if not np.all(np.isfinite(arr)):
            raise DomainError("empirical distribution requires finite samples")
        arr = np.sort(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "sorted_samples", arr)

    def __len__(self) -> int:
        return self.sorted_samples.size

    def mean(self) -> float:
        return float(np.mean(self.sorted_samples))


def _as_empirical(x) -> EmpiricalDistribution:
    if isinstance(x, EmpiricalDistribution):
        return x
    return EmpiricalDistribution(np.asarray(x, dtype=np.float64))


def _w1_order_stats(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.mean(np.abs(a - b)))


def _w1_ecdf(a: np.ndarray, b: np.ndarray) -> float:
    """Exact integral of |F_a - F_b| over the merged support (any sizes)."""
    # concatenating two sorted runs lets the stable mergesort finish in O(n)
    merged = np.sort(np.concatenate([a, b]), kind="stable")
    if merged.size < 2:
        return 0.0
    gaps = np.diff(merged)
    cdf_a = np.searchsorted(a, merged[:-1], side="right") / a.size
    cdf_b = np.searchsorted(b, merged[:-1], side="right") / b.size
    return float(np.sum(np.abs(cdf_a - cdf_b) * gaps))


def wasserstein1(a, b) -> float:
    """W1 distance between two empirical distributions.

    Equal sizes reduce to the mean absolute difference of order
    statistics; unequal sizes use the exact ECDF-difference integral.
    """
    da, db = _as_empirical(a), _as_empirical(b)
    x, y = da.sorted_samples, db.sorted_samples
    if x.size == y.size:
        return _w1_order_stats(x, y)
    return _w1_ecdf(x, y)


def gaussian_quantile_grid(n: int, mean: float = 0.0, std: float = 1.0) -> EmpiricalDistribution:
    """Deterministic n-point stand-in for N(mean, std): midpoint quantiles."""
    if n < 1:
        raise DomainError("quantile grid needs n >= 1")
    q = (np.arange(n, dtype=np.float64) + 0.5) / n
    return EmpiricalDistribution(mean + std * special.ndtri(q))


def w1_to_gaussian(samples, mean: float = 0.0, std: float = 1.0) -> float:
    """Exact W1 between an empirical sample and the continuous N(mean, std).

    Integrates |x_i - Q(q)| in closed form on each quantile segment
    [(i-1)/n, i/n], using d/dq[-phi(ndtri(q))] = ndtri(q).
    """
    if std <= 0:
        raise DomainError("std must be positive")
    x = _as_empirical(samples).sorted_samples
    n = x.size
    lo = np.arange(n, dtype=np.float64) / n
    hi = (np.arange(n, dtype=np.float64) + 1.0) / n
    # quantile where Q(q) crosses the sample value, clipped into the segment
    cross = np.clip(special.ndtr((x - mean) / std), lo, hi)

    def _anti(q: np.ndarray) -> np.ndarray:
        # antiderivative of Q(q) = mean + std * ndtri(q), with exact endpoints
        z = special.ndtri(np.clip(q, 1e-300, 1.0 - 1e-16))
        phi = np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)
        phi = np.where((q <= 0.0) | (q >= 1.0), 0.0, phi)
        return mean * q - std * phi

    below = x * (cross - lo) - (_anti(cross) - _anti(lo))
    above = (_anti(hi) - _anti(cross)) - x * (hi - cross)
    return float(np.sum(below + above))


# --- reference cache -------------------------------------------------------------


def reference_cache_dir(cache_dir: str | Path | None = None) -> Path:
    if cache_dir is not None:
        return Path(cache_dir)
    env = os.environ.get("PRVA_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "prva" / "references"


def _reference_key(name: str, params: Mapping, n_ref: int, seed: int) -> dict:
    return {
        "benchmark": name,
        "parameters": json.loads(json.dumps(params, sort_keys=True)),
        "n_ref": int(n_ref),
        "seed": int(seed),
        "backend": "baseline",
    }


def _key_digest(key: Mapping) -> str:
    blob = json.dumps(key, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:20]


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_reference(
    name: str,
    n_ref: int,
    parameters: Mapping | None = None,
    seed: int = REFERENCE_SEED,
    cache_dir: str | Path | None = None,
) -> EmpiricalDistribution:
    """Load or generate the frozen baseline reference sample for a benchmark.

    The sample is always drawn with the baseline backend. On disk it is a
    little-endian float64 array plus a JSON sidecar carrying the cache key
    and a sha256 checksum; corrupt or mismatched entries are regenerated.
    """
    if n_ref < 1:
        raise DomainError("n_ref must be >= 1")
    params = resolve_parameters(name, parameters)
    key = _reference_key(name, params, n_ref, seed)
    digest = _key_digest(key)
    root = reference_cache_dir(cache_dir)
    bin_path = root / f"{name}-{digest}.f64"
    meta_path = root / f"{name}-{digest}.json"

    if bin_path.exists() and meta_path.exists():
        try:
            meta = json.loads(meta_path.read_text())
            blob = bin_path.read_bytes()
            if (
                meta.get("key") == key
                and meta.get("sha256") == hashlib.sha256(blob).hexdigest()
                and len(blob) == 8 * n_ref
            ):
                arr = np.frombuffer(blob, dtype="<f8").copy()
                return EmpiricalDistribution(arr)
        except (ValueError, OSError, json.JSONDecodeError):
            pass  # fall through and regenerate

    out = run_benchmark(
        BenchmarkSpec(name=name, n_samples=n_ref, backend="baseline", seed=seed,
                      parameters=params)
    )
    blob = np.ascontiguousarray(out.samples, dtype="<f8").tobytes()
    meta = {"key": key, "sha256": hashlib.sha256(blob).hexdigest(), "dtype": "<f8"}
    _atomic_write(bin_path, blob)
    _atomic_write(meta_path, json.dumps(meta, indent=2, sort_keys=True).encode())
    return EmpiricalDistribution(out.samples)


# --- cost model -------------------------------------------------------------------


@dataclass(frozen=True)
class CycleCostModel:
    """Amdahl-style projection: speed up only the random-draw share of a run.

    cost_ratio is accelerated draw cost over baseline draw cost; the
    modeled speedup for a kernel spending fraction f of its time drawing
    is 1 / ((1 - f) + f * cost_ratio).
    """

    accel_cost_per_sample: float = 1.0
    baseline_cost_per_sample: float = 10.0

    def __post_init__(self):
        if self.accel_cost_per_sample <= 0 or self.baseline_cost_per_sample <= 0:
            raise DomainError("per-sample costs must be positive")

    @property
    def cost_ratio(self) -> float:
        return self.accel_cost_per_sample / self.baseline_cost_per_sample

    def modeled_speedup(self, sampling_fraction: float) -> float:
        f = float(sampling_fraction)
        if not 0.0 <= f <= 1.0:
            raise DomainError("sampling_fraction must lie in [0, 1]")
        return 1.0 / ((1.0 - f) + f * self.cost_ratio)


# --- suite protocol ---------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    """One benchmark execution inside the comparison protocol."""

    benchmark: str
    backend: str
    backend_index: int
    repeat: int
    seed: int
    w1: float
    rng_time: float
    total_time: float
    rng_call_count: int


@dataclass(frozen=True)
class BenchmarkRow:
    name: str
    display_name: str
    sampling_distribution: str
    repeats: int
    n_samples: int
    w1_prva: float
    w1_baseline: float
    ratio: float
    sampling_fraction: float
    speedup: float
    speedup_cycle_model: float
    prva_rng_time: float
    prva_total_time: float
    baseline_rng_time: float
    baseline_total_time: float


@dataclass(frozen=True)
class Aggregates:
    mean_ratio: float
    median_ratio: float
    mean_speedup: float
    median_speedup: float
    mean_speedup_cycle_model: float
    median_speedup_cycle_model: float


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple[BenchmarkRow, ...]
    aggregates: Aggregates
    protocol: dict

    @staticmethod
    def aggregate(rows: Sequence[BenchmarkRow]) -> Aggregates:
        ratios = np.array([r.ratio for r in rows], dtype=np.float64)
        speedups = np.array([r.speedup for r in rows], dtype=np.float64)
        modeled = np.array([r.speedup_cycle_model for r in rows], dtype=np.float64)
        return Aggregates(
            mean_ratio=float(np.mean(ratios)),
            median_ratio=float(np.median(ratios)),
            mean_speedup=float(np.mean(speedups)),
            median_speedup=float(np.median(speedups)),
            mean_speedup_cycle_model=float(np.mean(modeled)),
            median_speedup_cycle_model=float(np.median(modeled)),
        )


@dataclass(frozen=True)
class SuiteResult:
    report: BenchmarkReport
    runs: tuple[RunRecord, ...]
    references: dict
    parameters: dict


def _summarize_backend(records: Sequence[RunRecord]):
    w1 = float(np.mean([r.w1 for r in records]))
    rng_time = float(np.sum([r.rng_time for r in records]))
    total_time = float(np.sum([r.total_time for r in records]))
    frac = rng_time / total_time if total_time > 0 else float("nan")
    return w1, rng_time, total_time, frac


def _make_row(
    name: str,
    n_samples: int,
    repeats: int,
    first: Sequence[RunRecord],
    second: Sequence[RunRecord],
    cost_model: CycleCostModel,
) -> BenchmarkRow:
    defn = CATALOG[name]
    w1_first, rng_first, total_first, _ = _summarize_backend(first)
    w1_second, rng_second, total_second, frac_second = _summarize_backend(second)
    ratio = w1_first / w1_second if w1_second > 0 else float("nan")
    speedup = total_second / total_first if total_first > 0 else float("nan")
    modeled = cost_model.modeled_speedup(min(max(frac_second, 0.0), 1.0))
    return BenchmarkRow(
        name=name,
        display_name=defn.display_name,
        sampling_distribution=defn.sampling_distribution,
        repeats=repeats,
        n_samples=n_samples,
        w1_prva=w1_first,
        w1_baseline=w1_second,
        ratio=ratio,
        sampling_fraction=frac_second,
        speedup=speedup,
        speedup_cycle_model=modeled,
        prva_rng_time=rng_first,
        prva_total_time=total_first,
        baseline_rng_time=rng_second,
        baseline_total_time=total_second,
    )


def evaluate_suite(
    repeats: int = 100,
    n_samples: int = 10_000,
    n_ref: int = 1_000_000,
    benchmarks: Iterable[str] | None = None,
    seed: int = 0,
    backends: tuple[str, str] = ("prva", "baseline"),
    parameters: Mapping[str, Mapping] | None = None,
    cache_dir: str | Path | None = None,
    cost_model: CycleCostModel | None = None,
    reference_seed: int = REFERENCE_SEED,
) -> SuiteResult:
    """Run the full comparison protocol and assemble the per-benchmark report.

    Per-run seeds derive from (seed, benchmark catalog position, backend
    position, repeat index), so a filtered suite reproduces the same run
    seeds as the full one. The W1 for each run is measured against the
    shared cached reference, then averaged across repeats per backend.
    """
    if repeats < 1:
        raise DomainError("repeats must be >= 1")
    if len(backends) != 2:
        raise DomainError("backends must name exactly two entries (first vs second)")
    for b in backends:
        if b not in BACKEND_NAMES:
            raise DomainError(f"unknown backend {b!r}; valid: {', '.join(BACKEND_NAMES)}")
    names = list(benchmarks) if benchmarks is not None else list(BENCHMARK_NAMES)
    for name in names:
        catalog_index(name)  # raises CatalogError on unknown names
    cost_model = cost_model or CycleCostModel()
    overrides = dict(parameters or {})

    rows: list[BenchmarkRow] = []
    runs: list[RunRecord] = []
    references: dict = {}
    resolved_params: dict = {}

    for name in names:
        bench_overrides = overrides.get(name)
        params = resolve_parameters(name, bench_overrides)
        resolved_params[name] = params
        reference = build_reference(
            name, n_ref, parameters=params, seed=reference_seed, cache_dir=cache_dir
        )
        key = _reference_key(name, params, n_ref, reference_seed)
        references[name] = {"key": key, "digest": _key_digest(key)}

        per_backend: list[list[RunRecord]] = [[], []]
        for backend_pos, backend in enumerate(backends):
            for rep in range(repeats):
                run_seed = derive_seed(seed, catalog_index(name), backend_pos, rep)
                out = run_benchmark(
                    BenchmarkSpec(
                        name=name,
                        n_samples=n_samples,
                        backend=backend,
                        seed=run_seed,
                        parameters=params,
                    )
                )
                record = RunRecord(
                    benchmark=name,
                    backend=backend,
                    backend_index=backend_pos,
                    repeat=rep,
                    seed=run_seed,
                    w1=wasserstein1(out.samples, reference),
                    rng_time=out.rng_time,
                    total_time=out.total_time,
                    rng_call_count=out.rng_call_count,
                )
                per_backend[backend_pos].append(record)
                runs.append(record)
        rows.append(
            _make_row(name, n_samples, repeats, per_backend[0], per_backend[1], cost_model)
        )

    protocol = {
        "repeats": repeats,
        "n_samples": n_samples,
        "n_ref": n_ref,
        "seed": seed,
        "reference_seed": reference_seed,
        "backends": list(backends),
        "benchmarks": names,
        "cost_model": asdict(cost_model),
    }
    report = BenchmarkReport(
        rows=tuple(rows), aggregates=BenchmarkReport.aggregate(rows), protocol=protocol
    )
    return SuiteResult(
        report=report, runs=tuple(runs), references=references, parameters=resolved_params
    )


def assemble_report(runs_doc: Mapping) -> BenchmarkReport:
    """Rebuild a BenchmarkReport from a serialized runs document.

    This recomputes every mean, ratio, and aggregate from the per-run
    records, so a report can be regenerated without rerunning benchmarks.
    """
    protocol = dict(runs_doc["protocol"])
    cost_model = CycleCostModel(**protocol.get("cost_model", {}))
    records = [RunRecord(**r) for r in runs_doc["runs"]]
    names = protocol.get("benchmarks") or sorted({r.benchmark for r in records})
    rows = []
    for name in names:
        mine = [r for r in records if r.benchmark == name]
        if not mine:
            continue
        first = [r for r in mine if r.backend_index == 0]
        second = [r for r in mine if r.backend_index == 1]
        if not first or not second:
            raise DomainError(f"runs for {name!r} missing one of the two backends")
        rows.append(
            _make_row(
                name,
                protocol["n_samples"],
                protocol["repeats"],
                sorted(first, key=lambda r: r.repeat),
                sorted(second, key=lambda r: r.repeat),
                cost_model,
            )
        )
    return BenchmarkReport(
        rows=tuple(rows), aggregates=BenchmarkReport.aggregate(rows), protocol=protocol
    )


# --- serialization ----------------------------------------------------------------


_CSV_COLUMNS = (
    "benchmark",
    "display_name",
    "sampling_distribution",
    "backend",
    "repeats",
    "n_samples",
    "mean_w1",
    "rng_time_s",
    "total_time_s",
    "sampling_fraction",
    "w1_ratio",
    "speedup_wall",
    "speedup_cycle_model",
)


def report_to_csv(report: BenchmarkReport) -> str:
    """One row per benchmark per backend; pair-level columns repeat on both rows."""
    lines = [",".join(_CSV_COLUMNS)]
    for row in report.rows:
        for backend, w1, rng_t, tot_t in (
            (report.protocol["backends"][0], row.w1_prva, row.prva_rng_time,
             row.prva_total_time),
            (report.protocol["backends"][1], row.w1_baseline, row.baseline_rng_time,
             row.baseline_total_time),
        ):
            frac = rng_t / tot_t if tot_t > 0 else float("nan")
            cells = (
                row.name,
                row.display_name,
                row.sampling_distribution,
                backend,
                str(row.repeats),
                str(row.n_samples),
                f"{w1:.9g}",
                f"{rng_t:.6g}",
                f"{tot_t:.6g}",
                f"{frac:.6g}",
                f"{row.ratio:.9g}",
                f"{row.speedup:.6g}",
                f"{row.speedup_cycle_model:.6g}",
            )
            lines.append(",".join(f'"{c}"' if "," in c else c for c in cells))
    return "\n".join(lines) + "\n"


def report_to_json(report: BenchmarkReport, extra: Mapping | None = None) -> dict:
    doc = {
        "protocol": report.protocol,
        "host": {
            "platform": platform.platform(),
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "rows": [asdict(r) for r in report.rows],
        "aggregates": asdict(report.aggregates),
    }
    if extra:
        doc.update(extra)
    return doc


def runs_to_json(result: SuiteResult) -> dict:
    return {
        "protocol": result.report.protocol,
        "references": result.references,
        "parameters": result.parameters,
        "runs": [asdict(r) for r in result.runs],
    }
