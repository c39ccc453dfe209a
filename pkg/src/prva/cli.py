"""Command-line front door: characterize noise traces, fit mixtures, draw
samples, run the benchmark suite, and emit comparison reports.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 internal error. Every command that consumes randomness takes --seed;
without it a random seed is chosen and printed so the run can be
reproduced after the fact.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import secrets
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .benchmarks import (
    BENCHMARK_NAMES,
    CATALOG,
    make_backend,
)
from .errors import CatalogError, PrvaError, TargetSyntaxError, TraceParseError
from .evaluation import (
    REFERENCE_SEED,
    BenchmarkReport,
    BenchmarkRow,
    CycleCostModel,
    assemble_report,
    evaluate_suite,
    report_to_csv,
    report_to_json,
)
from .kernel_density import BandwidthSpec, fit_kde
from .noise_source import (
    NoiseSourceModel,
    fit_temperature_model,
    flip_correct,
    ideal_model,
    replay_trace,
)
from .rng import derive_seed
from .samplers import (
    GaussianTarget,
    MixtureTarget,
    StudentTTarget,
    parse_target,
)

__all__ = ["main", "RunManifest"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route through our own codes instead
    def error(self, message):
        raise _UsageError(message)


@dataclass
class RunManifest:
    """Everything needed to rerun a command bit-for-bit on the same host."""

    command_line: list
    seeds: dict
    parameter_overrides: dict
    started_at: str
    finished_at: str = ""
    output_paths: list = field(default_factory=list)
    checksums: dict = field(default_factory=dict)

    def record_output(self, path: Path) -> None:
        self.output_paths.append(str(path))
        self.checksums[str(path)] = hashlib.sha256(path.read_bytes()).hexdigest()

    def finish(self) -> None:
        self.finished_at = _now()

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(32)
    print(f"seed = {seed} (chosen randomly; pass --seed {seed} to reproduce)")
    return seed


def _read_reals(path: Path) -> np.ndarray:
    values = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            values.append(float(text))
        except ValueError:
            raise TraceParseError(path, lineno, f"not a real number: {text!r}") from None
    if not values:
        raise TraceParseError(path, 1, "no data lines found")
    return np.asarray(values, dtype=np.float64)


def _load_model(args, seed: int) -> NoiseSourceModel:
    temperature = args.temperature if args.temperature is not None else 25.0
    if args.model:
        text = Path(args.model).read_text()
        return NoiseSourceModel.curves_from_json(
            text, temperature_celsius=temperature, seed=derive_seed(seed, 0x50DE)
        )
    return ideal_model(seed=derive_seed(seed, 0x50DE), temperature_celsius=temperature)


# --- characterize ---------------------------------------------------------------


def cmd_characterize(args, argv) -> int:
    seed = _resolve_seed(args)
    header = (
        f"{'trace':<32} {'n':>8} {'temp_C':>7} "
        f"{'raw_mean':>10} {'raw_std':>9} {'flip_mean':>10} {'flip_std':>9}"
    )
    print(header)
    raw_traces = []
    failures = 0
    for idx, name in enumerate(args.traces):
        try:
            trace = replay_trace(name)
        except (PrvaError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            failures += 1
            continue
        corrected = flip_correct(trace, seed=derive_seed(seed, idx))
        raw_traces.append(trace)
        temp = "-" if trace.temperature_celsius is None else f"{trace.temperature_celsius:.1f}"
        print(
            f"{Path(name).name:<32} {len(trace):>8} {temp:>7} "
            f"{trace.mean():>10.3f} {trace.std():>9.3f} "
            f"{corrected.mean():>10.3f} {corrected.std():>9.3f}"
        )

    tagged = [t for t in raw_traces if t.temperature_celsius is not None]
    temps = {t.temperature_celsius for t in tagged}
    if len(temps) >= 2:
        model = fit_temperature_model(tagged, seed=seed)
        out = Path(args.out or "noise_model.json")
        out.write_text(model.curves_to_json() + "\n")
        print(f"fitted noise model ({len(tagged)} traces, {len(temps)} temperatures): {out}")
    return 2 if failures else 0


# --- sample ---------------------------------------------------------------------


def cmd_sample(args, argv) -> int:
    if args.n < 1:
        raise _UsageError("--n must be >= 1")
    target = parse_target(args.target)
    seed = _resolve_seed(args)
    model = _load_model(args, seed) if args.backend == "prva" else None
    backend = make_backend(args.backend, seed, model=model)

    if isinstance(target, GaussianTarget):
        samples = backend.gaussian(target.spec, args.n)
    elif isinstance(target, StudentTTarget):
        samples = backend.student_t(target.dof, args.n)
    elif isinstance(target, MixtureTarget):
        samples = backend.mixture(target.mixture, args.n)
    else:
        raise _UsageError(f"cannot sample target type {type(target).__name__}")

    out = Path(args.out)
    if args.binary:
        out.write_bytes(np.ascontiguousarray(samples, dtype="<f8").tobytes())
    else:
        out.write_text("".join(f"{v:.17g}\n" for v in samples))
    print(
        f"wrote {args.n} samples to {out}  "
        f"mean={np.mean(samples):.6g} std={np.std(samples, ddof=1):.6g} "
        f"min={np.min(samples):.6g} max={np.max(samples):.6g}"
    )
    return 0


# --- fit ------------------------------------------------------------------------


def cmd_fit(args, argv) -> int:
    data = _read_reals(Path(args.data))
    bandwidth = None
    if args.bandwidth is not None:
        bandwidth = BandwidthSpec.fixed(args.bandwidth)
    mixture = fit_kde(data, bandwidth=bandwidth, max_components=args.max_components)
    out = Path(args.out or "mixture.json")
    out.write_text(mixture.to_json() + "\n")
    print(
        f"fitted {len(mixture)}-component mixture from {data.size} points "
        f"(bandwidth h={mixture.stds[0]:.6g}): {out}"
    )
    return 0


# --- bench / evaluate -----------------------------------------------------------


def _parse_filter(text: str) -> list[str]:
    if text.strip() == "all":
        return list(BENCHMARK_NAMES)
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise _UsageError("--filter must name at least one benchmark or 'all'")
    return names


def _parse_params(text: str | None) -> dict:
    if not text:
        return {}
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise _UsageError("--params must be a JSON object keyed by benchmark name")
    return doc


def _failed_row(name: str, repeats: int, n_samples: int) -> BenchmarkRow:
    defn = CATALOG[name]
    nan = float("nan")
    return BenchmarkRow(
        name=name,
        display_name=defn.display_name,
        sampling_distribution=defn.sampling_distribution,
        repeats=repeats,
        n_samples=n_samples,
        w1_prva=nan,
        w1_baseline=nan,
        ratio=nan,
        sampling_fraction=nan,
        speedup=nan,
        speedup_cycle_model=nan,
        prva_rng_time=nan,
        prva_total_time=nan,
        baseline_rng_time=nan,
        baseline_total_time=nan,
    )


def _print_report(report: BenchmarkReport, failures: dict) -> None:
    print(
        f"{'benchmark':<38} {'w1_prva':>10} {'w1_base':>10} "
        f"{'ratio':>7} {'frac':>6} {'speedup':>8} {'modeled':>8}"
    )
    for row in report.rows:
        if row.name in failures:
            print(f"{row.display_name:<38} {'FAILED':>10}  {failures[row.name]}")
            continue
        print(
            f"{row.display_name:<38} {row.w1_prva:>10.5f} {row.w1_baseline:>10.5f} "
            f"{row.ratio:>7.3f} {row.sampling_fraction:>6.3f} "
            f"{row.speedup:>8.3f} {row.speedup_cycle_model:>8.3f}"
        )
    agg = report.aggregates
    print(
        f"aggregates: ratio mean={agg.mean_ratio:.3f} median={agg.median_ratio:.3f}  "
        f"modeled speedup mean={agg.mean_speedup_cycle_model:.2f} "
        f"median={agg.median_speedup_cycle_model:.2f}"
    )


def cmd_bench(args, argv) -> int:
    names = _parse_filter(args.filter)
    for name in names:
        if name not in CATALOG:
            raise CatalogError(
                f"unknown benchmark {name!r}; valid names: {', '.join(BENCHMARK_NAMES)}"
            )
    overrides = _parse_params(args.params)
    seed = _resolve_seed(args)
    out_dir = Path(args.out or "prva_report")
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest = RunManifest(
        command_line=["prva"] + list(argv),
        seeds={"master": seed, "reference": REFERENCE_SEED},
        parameter_overrides=overrides,
        started_at=_now(),
    )

    rows: list[BenchmarkRow] = []
    runs: list = []
    references: dict = {}
    parameters: dict = {}
    failures: dict[str, str] = {}
    for name in names:
        try:
            result = evaluate_suite(
                repeats=args.repeats,
                n_samples=args.n,
                n_ref=args.n_ref,
                benchmarks=[name],
                seed=seed,
                parameters=overrides,
            )
        except (PrvaError, FloatingPointError) as exc:
            failures[name] = str(exc)
            print(f"benchmark {name} failed: {exc}", file=sys.stderr)
            continue
        rows.extend(result.report.rows)
        runs.extend(result.runs)
        references.update(result.references)
        parameters.update(result.parameters)

    ok_rows = list(rows)
    for name in failures:
        rows.append(_failed_row(name, args.repeats, args.n))
    if not ok_rows and failures:
        print("error: every selected benchmark failed", file=sys.stderr)
        return 2

    protocol = {
        "repeats": args.repeats,
        "n_samples": args.n,
        "n_ref": args.n_ref,
        "seed": seed,
        "reference_seed": REFERENCE_SEED,
        "backends": ["prva", "baseline"],
        "benchmarks": names,
        "cost_model": asdict(CycleCostModel()),
    }
    report = BenchmarkReport(
        rows=tuple(rows),
        aggregates=BenchmarkReport.aggregate(ok_rows),
        protocol=protocol,
    )
    _print_report(report, failures)

    csv_path = out_dir / "report.csv"
    json_path = out_dir / "report.json"
    runs_path = out_dir / "runs.json"
    csv_path.write_text(report_to_csv(report))
    json_doc = report_to_json(report, extra={"failures": failures, "references": references})
    json_path.write_text(json.dumps(json_doc, indent=2) + "\n")
    runs_doc = {
        "protocol": protocol,
        "references": references,
        "parameters": parameters,
        "runs": [asdict(r) for r in runs],
    }
    runs_path.write_text(json.dumps(runs_doc, indent=2) + "\n")

    for path in (csv_path, json_path, runs_path):
        manifest.record_output(path)
    manifest.finish()
    manifest_path = out_dir / "manifest.json"
    manifest.write(manifest_path)
    print(f"report written to {out_dir}")
    return 2 if failures else 0


def cmd_evaluate(args, argv) -> int:
    runs_path = Path(args.runs) if args.runs else Path(args.out or "prva_report") / "runs.json"
    doc = json.loads(runs_path.read_text())
    report = assemble_report(doc)
    _print_report(report, {})
    out_dir = Path(args.out or runs_path.parent)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "report.csv"
    json_path = out_dir / "report.json"
    csv_path.write_text(report_to_csv(report))
    json_path.write_text(
        json.dumps(report_to_json(report, extra={"recomputed_from": str(runs_path)}), indent=2)
        + "\n"
    )
    print(f"report recomputed from {runs_path} into {out_dir}")
    return 0


# --- parser ----------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="prva", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("characterize", help="trace statistics and temperature-model fit")
    p.add_argument("traces", nargs="+", help="ADC trace files, one integer code per line")
    p.add_argument("--seed", type=int, default=None, help="flip-correction seed")
    p.add_argument("--out", default=None, help="output path for fitted model JSON")
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("sample", help="draw samples from a target distribution")
    p.add_argument("target", help="gaussian(mu,sigma), studentt(dof), or mixture JSON path")
    p.add_argument("--n", type=int, default=10_000, help="number of samples")
    p.add_argument("--backend", choices=["prva", "baseline"], default="prva")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output file, one value per line")
    p.add_argument("--binary", action="store_true", help="write little-endian float64 instead")
    p.add_argument("--temperature", type=float, default=None, help="noise-source temperature, Celsius")
    p.add_argument("--model", default=None, help="noise model JSON for the prva backend")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", help="fit a kernel-density mixture to a data file")
    p.add_argument("data", help="data file, one real per line")
    p.add_argument("--out", default=None, help="output mixture JSON path")
    p.add_argument("--bandwidth", type=float, default=None, help="fixed bandwidth override")
    p.add_argument("--max-components", type=int, default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bench", help="run the benchmark comparison suite")
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--n", type=int, default=10_000, help="samples per run")
    p.add_argument("--n-ref", type=int, default=1_000_000, help="reference sample size")
    p.add_argument("--filter", default="all", help="comma-separated benchmark names or 'all'")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory (default prva_report)")
    p.add_argument("--params", default=None,
                   help="JSON map of per-benchmark parameter overrides, or @file")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("evaluate", help="recompute a report from cached runs.json")
    p.add_argument("--runs", default=None, help="path to runs.json")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return int(args.func(args, argv) or 0)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except TargetSyntaxError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (PrvaError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
