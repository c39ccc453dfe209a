"""Random variate generation engines.

The accelerator path (``sample_mixture_prva``) turns calibrated noise
source draws into samples from a programmable Gaussian mixture. The
software baselines are the classical generators those draws replace:
inversion through the quantile function, accept-reject, and Box-Muller,
plus a Student-T generator built on them.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special, stats

from .errors import (
    AcceptanceStarvationError,
    CapabilityError,
    DominanceViolationError,
    DomainError,
    TargetSyntaxError,
)
from .kernel_density import GaussianMixture
from .rng import UniformStream
from .transform import GaussianSpec, SourcePipeline, transform_coeffs

__all__ = [
    "GaussianTarget",
    "MixtureTarget",
    "StudentTTarget",
    "EmpiricalTarget",
    "TargetDistribution",
    "parse_target",
    "gaussian_quantile",
    "sample_inversion",
    "sample_box_muller",
    "sample_student_t",
    "sample_accept_reject",
    "AcceptRejectStats",
    "sample_mixture_prva",
    "sample_mixture_baseline",
    "pick_components",
]


# --- target distributions ----------------------------------------------------


@dataclass(frozen=True)
class GaussianTarget:
    spec: GaussianSpec


@dataclass(frozen=True)
class MixtureTarget:
    mixture: GaussianMixture


@dataclass(frozen=True)
class StudentTTarget:
    dof: float

    def __post_init__(self):
        if not self.dof > 0:
            raise DomainError(f"dof must be positive, got {self.dof}")


@dataclass(frozen=True)
class EmpiricalTarget:
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise DomainError("empirical data must be a non-empty 1-D array")
        object.__setattr__(self, "data", arr)


TargetDistribution = GaussianTarget | MixtureTarget | StudentTTarget | EmpiricalTarget

_GAUSSIAN_RE = re.compile(r"^gaussian\(\s*([^,\s]+)\s*,\s*([^,\s)]+)\s*\)$")
_STUDENTT_RE = re.compile(r"^studentt\(\s*([^,\s)]+)\s*\)$")


def parse_target(text: str) -> TargetDistribution:
    """Parse ``gaussian(mu,sigma)``, ``studentt(dof)``, or a mixture JSON path.

    Unrecognized syntax raises TargetSyntaxError; a recognized mixture
    path whose contents violate the mixture invariants raises the usual
    validation errors instead.
    """
    text = text.strip()
    m = _GAUSSIAN_RE.match(text)
    if m:
        try:
            mean, std = float(m.group(1)), float(m.group(2))
        except ValueError:
            raise TargetSyntaxError(f"non-numeric gaussian arguments in {text!r}") from None
        return GaussianTarget(GaussianSpec(mean, std))
    m = _STUDENTT_RE.match(text)
    if m:
        try:
            dof = float(m.group(1))
        except ValueError:
            raise TargetSyntaxError(f"non-numeric studentt argument in {text!r}") from None
        return StudentTTarget(dof)
    path = Path(text)
    if path.exists():
        return MixtureTarget(GaussianMixture.from_json(path.read_text()))
    raise TargetSyntaxError(
        f"unparsable target {text!r}: expected gaussian(mu,sigma), "
        "studentt(dof), or a path to a mixture JSON file"
    )


# --- Gaussian quantile --------------------------------------------------------

# Rational approximation coefficients (Acklam), refined below to near
# machine precision with one Halley step against the exact CDF.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _quantile_central(p):
    q = p - 0.5
    r = q * q
    num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num * q / den


def _quantile_tail(p):
    # lower tail; callers mirror for the upper tail
    q = np.sqrt(-2.0 * np.log(p))
    num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
    den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
    return num / den


def gaussian_quantile(p) -> np.ndarray | float:
    """Standard normal quantile for p in (0, 1)."""
    ps = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if ps.size and (ps.min() <= 0.0 or ps.max() >= 1.0):
        raise DomainError("quantile argument must lie strictly inside (0, 1)")
    x = np.empty_like(ps)
    low = ps < _P_LOW
    high = ps > 1.0 - _P_LOW
    mid = ~(low | high)
    with np.errstate(divide="ignore"):
        if low.any():
            x[low] = _quantile_tail(ps[low])
        if high.any():
            x[high] = -_quantile_tail(1.0 - ps[high])
        if mid.any():
            x[mid] = _quantile_central(ps[mid])
    # Halley refinement against the exact CDF. The residual CDF(x) - p is
    # formed in the nearer tail: near p = 1 the CDF value rounds to p itself
    # at double precision, but 1 - p is exact there (Sterbenz), so the
    # upper-tail form keeps the residual at full relative precision.
    hi = ps > 0.5
    err = np.where(
        hi,
        (1.0 - ps) - 0.5 * special.erfc(x / math.sqrt(2.0)),
        0.5 * special.erfc(-x / math.sqrt(2.0)) - ps,
    )
    u = err * math.sqrt(2.0 * math.pi) * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)
    if np.isscalar(p):
        return float(x[0])
    return x


# --- classical generators -----------------------------------------------------


def _open_unit(u: UniformStream, n: int) -> np.ndarray:
    # uniforms strictly inside (0, 1): bin centers of a 2**53 grid
    return (u.next_u64(n) >> np.uint64(11)).astype(np.float64) / 2.0**53 + 2.0**-54


def sample_inversion(target: TargetDistribution, n: int, u: UniformStream) -> np.ndarray:
    """Inversion method: apply the target's quantile function to uniform draws.

    Only targets with a usable quantile are supported; mixtures and
    empirical targets have no closed form and raise CapabilityError.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if isinstance(target, GaussianTarget):
        z = gaussian_quantile(_open_unit(u, n))
        return target.spec.mean + target.spec.std * z
    if isinstance(target, StudentTTarget):
        return stats.t.ppf(_open_unit(u, n), df=target.dof)
    raise CapabilityError(
        f"inversion needs a quantile function; {type(target).__name__} has none"
    )


def _standard_normal_pairs(n_pairs: int, u: UniformStream) -> tuple[np.ndarray, np.ndarray]:
    u1 = u.uniform01(n_pairs)
    # u1 = 0 would blow up the log; redraw those lanes
    zero = u1 == 0.0
    while zero.any():
        u1[zero] = u.uniform01(int(zero.sum()))
        zero = u1 == 0.0
    u2 = u.uniform01(n_pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * math.pi * u2
    return r * np.cos(theta), r * np.sin(theta)


def standard_normal(n: int, u: UniformStream) -> np.ndarray:
    """n standard normal draws via Box-Muller, pair outputs interleaved."""
    n_pairs = (int(n) + 1) // 2
    z1, z2 = _standard_normal_pairs(n_pairs, u)
    out = np.empty(2 * n_pairs)
    out[0::2] = z1
    out[1::2] = z2
    return out[: int(n)]


def sample_box_muller(spec: GaussianSpec, n: int, u: UniformStream) -> np.ndarray:
    """Gaussian draws from uniform pairs via the Box-Muller transform."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return spec.mean + spec.std * standard_normal(n, u)


def _gamma_marsaglia_tsang(shape: float, n: int, u: UniformStream) -> np.ndarray:
    """Gamma(shape, 1) via the Marsaglia-Tsang squeeze, shape >= 1."""
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n)
    pending = np.arange(n)
    while pending.size:
        x = standard_normal(pending.size, u)
        v = (1.0 + c * x) ** 3
        uu = u.uniform01(pending.size)
        ok = v > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            accept = ok & (np.log(np.maximum(uu, 1e-320)) < 0.5 * x * x + d - d * v + d * np.log(np.where(ok, v, 1.0)))
        out[pending[accept]] = d * v[accept]
        pending = pending[~accept]
    return out


def _chi_square(dof: float, n: int, u: UniformStream) -> np.ndarray:
    shape = dof / 2.0
    if shape >= 1.0:
        return 2.0 * _gamma_marsaglia_tsang(shape, n, u)
    # shape boost for dof < 2: Gamma(a) = Gamma(a+1) * U^(1/a)
    g = _gamma_marsaglia_tsang(shape + 1.0, n, u)
    boost = _open_unit(u, n) ** (1.0 / shape)
    return 2.0 * g * boost


def sample_student_t(dof: float, n: int, u: UniformStream) -> np.ndarray:
    """Student-T draws as a Gaussian over an independent scaled chi."""
    if not dof > 0:
        raise DomainError(f"dof must be positive, got {dof}")
    if n < 1:
        raise DomainError("n must be >= 1")
    z = standard_normal(n, u)
    v = _chi_square(dof, int(n), u)
    return z * np.sqrt(dof / v)


# --- accept-reject ------------------------------------------------------------


@dataclass
class AcceptRejectStats:
    accept_count: int = 0
    reject_count: int = 0

    @property
    def proposals(self) -> int:
        return self.accept_count + self.reject_count

    @property
    def acceptance_rate(self) -> float:
        return self.accept_count / self.proposals if self.proposals else float("nan")


_DOMINANCE_TOL = 1e-9


def sample_accept_reject(
    f,
    g_sampler,
    g,
    c: float,
    n: int,
    u: UniformStream,
    *,
    starvation_floor: float = 1e-4,
    starvation_window: int = 100_000,
) -> tuple[np.ndarray, AcceptRejectStats]:
    """Draw n samples from density f by thinning proposals from g.

    A proposal x is accepted when u <= f(x) / (c * g(x)). Observing
    f(x) > c * g(x) at any proposal point means the envelope constant is
    wrong and raises immediately; an acceptance rate below
    ``starvation_floor`` over a full ``starvation_window`` of proposals
    raises instead of spinning forever.
    """
    if c < 1.0:
        raise DomainError(f"envelope constant c must be >= 1, got {c}")
    if n < 1:
        raise DomainError("n must be >= 1")
    stats_ = AcceptRejectStats()
    out = np.empty(n)
    filled = 0
    window_proposals = 0
    window_accepts = 0
    batch = max(1024, int(n))
    while filled < n:
        x = np.asarray(g_sampler(u, batch), dtype=np.float64)
        us = u.uniform01(batch)
        fx = np.asarray(f(x), dtype=np.float64)
        gx = np.asarray(g(x), dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = fx / (c * gx)
        bad = (gx <= 0.0) & (fx > 0.0)
        if bad.any() or np.nanmax(ratio, initial=0.0) > 1.0 + _DOMINANCE_TOL:
            worst = float(np.nanmax(ratio[np.isfinite(ratio)], initial=np.inf if bad.any() else 0.0))
            raise DominanceViolationError(
                f"f(x) > c*g(x) observed (max f/(c*g) = {worst}); envelope does not dominate"
            )
        accept = us <= ratio
        accepted = x[accept]
        take = min(accepted.size, n - filled)
        out[filled : filled + take] = accepted[:take]
        filled += take
        stats_.accept_count += int(accepted.size)
        stats_.reject_count += int(batch - accepted.size)
        window_proposals += batch
        window_accepts += int(accepted.size)
        if window_proposals >= starvation_window:
            if window_accepts / window_proposals < starvation_floor:
                raise AcceptanceStarvationError(
                    f"acceptance rate {window_accepts / window_proposals:.2e} below "
                    f"floor {starvation_floor:.0e} over {window_proposals} proposals"
                )
            window_proposals = 0
            window_accepts = 0
    return out, stats_


# --- mixture sampling ---------------------------------------------------------


def pick_components(mix: GaussianMixture, n: int, u: UniformStream) -> np.ndarray:
    """Component index per draw, chosen with probability equal to its weight."""
    cum = np.cumsum(mix.weights)
    cum[-1] = 1.0  # guard the floating-point sum at the top edge
    idx = np.searchsorted(cum, u.uniform01(int(n)), side="right")
    return np.minimum(idx, len(mix) - 1)


def sample_mixture_prva(
    mix: GaussianMixture, n: int, pipeline: SourcePipeline, u: UniformStream
) -> np.ndarray:
    """Accelerator path: per draw, pick a component and affine-map one
    calibrated source sample onto it."""
    if n < 1:
        raise DomainError("n must be >= 1")
    idx = pick_components(mix, n, u)
    src = pipeline.source_spec
    a = mix.stds / src.std
    b = mix.means - src.mean * a
    x = pipeline.draw_unit(int(n))
    return a[idx] * x + b[idx]


def sample_mixture_baseline(mix: GaussianMixture, n: int, u: UniformStream) -> np.ndarray:
    """Software path: pick a component, then Box-Muller within it."""
    if n < 1:
        raise DomainError("n must be >= 1")
    idx = pick_components(mix, n, u)
    z = standard_normal(int(n), u)
    return mix.means[idx] + mix.stds[idx] * z
