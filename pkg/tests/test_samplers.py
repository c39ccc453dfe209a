import math

import numpy as np
import pytest
from scipy import special, stats

from _helpers import FakeU64Stream, ks_critical_1pct, ks_statistic
from prva.errors import (
    AcceptanceStarvationError,
    CapabilityError,
    DominanceViolationError,
    DomainError,
    TargetSyntaxError,
)
from prva.evaluation import wasserstein1
from prva.kernel_density import GaussianMixture, fit_kde, silverman_bandwidth
from prva.noise_source import ideal_model
from prva.rng import UniformStream
from prva.samplers import (
    EmpiricalTarget,
    GaussianTarget,
    MixtureTarget,
    StudentTTarget,
    gaussian_quantile,
    parse_target,
    pick_components,
    sample_accept_reject,
    sample_box_muller,
    sample_inversion,
    sample_mixture_baseline,
    sample_mixture_prva,
    sample_student_t,
    standard_normal,
)
from prva.transform import GaussianSpec, SourcePipeline

# scipy.special.ndtri(0.975), the exact standard normal quantile oracle
Z_975 = 1.959963984540054


def _normal_cdf(x):
    return special.ndtr(x)


# --- gaussian_quantile ---------------------------------------------------------


def test_quantile_median_is_exact_zero():
    assert gaussian_quantile(0.5) == 0.0


def test_quantile_975():
    assert gaussian_quantile(0.975) == pytest.approx(Z_975, abs=1e-12)


def test_quantile_matches_reference_across_domain():
    # spans the central region and both tails down to 1e-300
    ps = np.concatenate(
        [
            np.logspace(-300, -2, 400),
            np.linspace(0.0001, 0.9999, 2001),
            1.0 - np.logspace(-16, -2, 200),
        ]
    )
    ours = gaussian_quantile(ps)
    ref = special.ndtri(ps)
    assert np.max(np.abs(ours - ref)) < 1e-9


def test_quantile_symmetry():
    ps = np.linspace(0.01, 0.49, 50)
    np.testing.assert_allclose(
        gaussian_quantile(ps), -np.asarray(gaussian_quantile(1.0 - ps)), rtol=0, atol=1e-13
    )


def test_quantile_domain_errors():
    for p in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(DomainError):
            gaussian_quantile(p)
    with pytest.raises(DomainError):
        gaussian_quantile(np.array([0.5, 1.0]))


def test_quantile_scalar_and_array_types():
    assert isinstance(gaussian_quantile(0.3), float)
    out = gaussian_quantile(np.array([0.3, 0.7]))
    assert isinstance(out, np.ndarray) and out.shape == (2,)


# --- inversion --------------------------------------------------------------------


def test_inversion_gaussian_ks():
    x = sample_inversion(GaussianTarget(GaussianSpec(0, 1)), 100_000, UniformStream(21))
    assert ks_statistic(x, _normal_cdf) < ks_critical_1pct(100_000)


def test_inversion_gaussian_scales_affinely():
    a = sample_inversion(GaussianTarget(GaussianSpec(0, 1)), 1000, UniformStream(3))
    b = sample_inversion(GaussianTarget(GaussianSpec(7, 2)), 1000, UniformStream(3))
    np.testing.assert_allclose(b, 7 + 2 * a, rtol=1e-12)


def test_inversion_student_t_reproduces_quantile_transform():
    n, dof = 2000, 4.5
    x = sample_inversion(StudentTTarget(dof), n, UniformStream(55))
    raw = UniformStream(55).next_u64(n)
    u = (raw >> np.uint64(11)).astype(np.float64) / 2.0**53 + 2.0**-54
    np.testing.assert_array_equal(x, stats.t.ppf(u, df=dof))


def test_inversion_unsupported_targets():
    mix = GaussianMixture(means=[0.0], stds=[1.0], weights=[1.0])
    with pytest.raises(CapabilityError):
        sample_inversion(MixtureTarget(mix), 10, UniformStream(0))
    with pytest.raises(CapabilityError):
        sample_inversion(EmpiricalTarget(np.array([1.0, 2.0])), 10, UniformStream(0))
    with pytest.raises(DomainError):
        sample_inversion(GaussianTarget(GaussianSpec(0, 1)), 0, UniformStream(0))


# --- Box-Muller ---------------------------------------------------------------------


def test_box_muller_fixed_pair():
    # u1 = e^-2 gives radius sqrt(4) = 2; u2 = 0.25 puts theta at pi/2
    u = FakeU64Stream(uniforms=[math.exp(-2.0), 0.25])
    z = sample_box_muller(GaussianSpec(0, 1), 2, u)
    assert abs(z[0] - 0.0) < 1e-12
    assert abs(z[1] - 2.0) < 1e-12


def test_box_muller_zero_uniform_redrawn():
    u = FakeU64Stream(uniforms=[0.0, 0.5, 0.25])
    z = sample_box_muller(GaussianSpec(0, 1), 2, u)
    r = math.sqrt(-2.0 * math.log(0.5))
    assert abs(z[1] - r) < 1e-12


def test_box_muller_moments_at_1e6():
    x = sample_box_muller(GaussianSpec(0, 1), 1_000_000, UniformStream(8))
    assert abs(np.mean(x)) < 0.005
    assert abs(np.std(x, ddof=1) - 1.0) < 0.005


def test_box_muller_interleaves_pairs_and_truncates():
    uniforms = [0.9, 0.8, 0.7, 0.1, 0.2, 0.3]
    z = standard_normal(5, FakeU64Stream(uniforms=list(uniforms)))
    assert z.shape == (5,)
    u1, u2 = uniforms[:3], uniforms[3:]
    for k in range(3):
        r = math.sqrt(-2.0 * math.log(u1[k]))
        expect_cos = r * math.cos(2 * math.pi * u2[k])
        expect_sin = r * math.sin(2 * math.pi * u2[k])
        assert z[2 * k] == pytest.approx(expect_cos, abs=1e-12)
        if 2 * k + 1 < 5:
            assert z[2 * k + 1] == pytest.approx(expect_sin, abs=1e-12)


def test_box_muller_spec_and_n_validation():
    with pytest.raises(DomainError):
        GaussianSpec(5, 0)
    with pytest.raises(DomainError):
        sample_box_muller(GaussianSpec(0, 1), 0, UniformStream(0))


# --- Student-T -----------------------------------------------------------------------


def test_student_t_large_dof_is_nearly_normal():
    x = sample_student_t(1e6, 1_000_000, UniformStream(17))
    assert abs(np.std(x, ddof=1) - 1.0) < 0.01


def test_student_t_dof3_variance():
    x = sample_student_t(3.0, 1_000_000, UniformStream(0))
    assert abs(np.var(x, ddof=1) - 3.0) < 0.1


def test_student_t_ks_against_reference_cdf():
    for dof in (0.5, 2.0, 5.0):
        x = sample_student_t(dof, 20_000, UniformStream(int(dof * 10)))
        assert np.all(np.isfinite(x))
        stat = ks_statistic(x, lambda v: stats.t.cdf(v, df=dof))
        assert stat < ks_critical_1pct(20_000), f"dof={dof}"


def test_student_t_rejects_bad_dof():
    for dof in (0.0, -1.0):
        with pytest.raises(DomainError):
            sample_student_t(dof, 10, UniformStream(0))
    with pytest.raises(DomainError):
        sample_student_t(3.0, 0, UniformStream(0))


def test_student_t_deterministic():
    a = sample_student_t(7.0, 1000, UniformStream(99))
    b = sample_student_t(7.0, 1000, UniformStream(99))
    np.testing.assert_array_equal(a, b)


# --- accept-reject --------------------------------------------------------------------


def _uniform01_sampler(u, k):
    return u.uniform01(k)


def test_accept_reject_degenerate_envelope_passes_everything():
    f = lambda x: np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    out, st = sample_accept_reject(
        f, lambda u, k: standard_normal(k, u), f, 1.0, 2000, UniformStream(42)
    )
    assert st.reject_count == 0
    assert st.acceptance_rate == 1.0
    replay = standard_normal(2000, UniformStream(42))
    np.testing.assert_array_equal(out, replay)


def test_accept_reject_triangular_density():
    # f(x) = 2x on [0,1] under a uniform proposal with c = 2
    f = lambda x: 2.0 * np.clip(x, 0.0, 1.0)
    g = lambda x: np.ones_like(x)
    out, st = sample_accept_reject(f, _uniform01_sampler, g, 2.0, 100_000, UniformStream(7))
    assert out.shape == (100_000,)
    assert abs(st.acceptance_rate - 0.5) < 0.008
    assert abs(st.proposals / st.accept_count - 2.0) < 0.05 * 2.0
    assert ks_statistic(out, lambda x: np.clip(x, 0, 1) ** 2) < ks_critical_1pct(100_000)


def test_accept_reject_detects_dominance_violation():
    f = lambda x: 3.0 * np.clip(x, 0.0, 1.0)
    g = lambda x: np.ones_like(x)
    with pytest.raises(DominanceViolationError):
        sample_accept_reject(f, _uniform01_sampler, g, 2.0, 1000, UniformStream(1))


def test_accept_reject_starves_on_tiny_acceptance():
    g = lambda x: np.ones_like(x)
    f = lambda x: 1e-5 * np.ones_like(x)
    with pytest.raises(AcceptanceStarvationError):
        sample_accept_reject(f, _uniform01_sampler, g, 1.0, 100_000, UniformStream(2))


def test_accept_reject_validates_arguments():
    f = lambda x: np.ones_like(x)
    with pytest.raises(DomainError):
        sample_accept_reject(f, _uniform01_sampler, f, 0.5, 10, UniformStream(0))
    with pytest.raises(DomainError):
        sample_accept_reject(f, _uniform01_sampler, f, 1.0, 0, UniformStream(0))


# --- mixture sampling -------------------------------------------------------------------


def test_pick_components_zero_weight_excluded():
    mix = GaussianMixture(means=[0.0, 5.0], stds=[1.0, 1.0], weights=[1.0, 0.0])
    idx = pick_components(mix, 10_000, UniformStream(3))
    assert np.all(idx == 0)


def test_pick_components_frequencies_match_weights():
    mix = GaussianMixture(means=[0.0, 1.0, 2.0], stds=[1.0, 1.0, 1.0], weights=[0.2, 0.3, 0.5])
    idx = pick_components(mix, 100_000, UniformStream(123))
    counts = np.bincount(idx, minlength=3)
    expected = mix.weights * 100_000
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < stats.chi2.ppf(0.99, 2)


def test_prva_single_component_equals_pipeline_gaussian():
    mix = GaussianMixture(means=[0.0], stds=[1.0], weights=[1.0])
    pa = SourcePipeline(ideal_model(seed=11), seed=12)
    pb = SourcePipeline(ideal_model(seed=11), seed=12)
    xa = sample_mixture_prva(mix, 5000, pa, UniformStream(13))
    xb = pb.sample_gaussian(GaussianSpec(0.0, 1.0), 5000)
    np.testing.assert_array_equal(xa, xb)


def test_prva_two_component_split():
    mix = GaussianMixture(means=[-10.0, 10.0], stds=[0.1, 0.1], weights=[0.25, 0.75])
    pipe = SourcePipeline(ideal_model(seed=7), seed=8)
    x = sample_mixture_prva(mix, 100_000, pipe, UniformStream(9))
    assert abs(np.mean(x > 0) - 0.75) < 0.007


def test_prva_kde_mixture_variance_inflation():
    # the fitted mixture's std is sqrt(var_ml(data) + h^2); samples track it
    data = sample_box_muller(GaussianSpec(0, 1), 1000, UniformStream(202))
    mix = fit_kde(data)
    h = silverman_bandwidth(data)
    pipe = SourcePipeline(ideal_model(seed=302), seed=402)
    x = sample_mixture_prva(mix, 100_000, pipe, UniformStream(502))
    sampled_std = np.std(x, ddof=1)
    assert abs(sampled_std - mix.std()) < 0.02
    assert abs(sampled_std - math.sqrt(1.0 + h * h)) < 0.02


def test_baseline_mixture_moments():
    mix = GaussianMixture(
        means=[-2.0, 0.0, 3.0], stds=[0.5, 1.0, 0.8], weights=[0.3, 0.4, 0.3]
    )
    x = sample_mixture_baseline(mix, 200_000, UniformStream(31))
    assert abs(np.mean(x) - mix.mean()) < 5 * mix.std() / math.sqrt(200_000)
    assert abs(np.std(x, ddof=1) - mix.std()) < 0.02


def test_prva_and_baseline_agree_in_distribution():
    mix = GaussianMixture(
        means=[-2.0, 0.0, 3.0], stds=[0.5, 1.0, 0.8], weights=[0.3, 0.4, 0.3]
    )
    pipe = SourcePipeline(ideal_model(seed=61), seed=62)
    a = sample_mixture_prva(mix, 100_000, pipe, UniformStream(63))
    b = sample_mixture_baseline(mix, 100_000, UniformStream(64))
    assert wasserstein1(a, b) < 0.05


def test_mixture_samplers_validate_n():
    mix = GaussianMixture(means=[0.0], stds=[1.0], weights=[1.0])
    with pytest.raises(DomainError):
        sample_mixture_baseline(mix, 0, UniformStream(0))
    pipe = SourcePipeline(ideal_model(seed=1), seed=1, calibration_n=100)
    with pytest.raises(DomainError):
        sample_mixture_prva(mix, 0, pipe, UniformStream(0))


def test_inversion_box_muller_w1_agreement():
    a = sample_inversion(GaussianTarget(GaussianSpec(0, 1)), 100_000, UniformStream(71))
    b = sample_box_muller(GaussianSpec(0, 1), 100_000, UniformStream(72))
    assert wasserstein1(a, b) <= 0.02


# --- target parsing --------------------------------------------------------------------


def test_parse_gaussian_forms():
    t = parse_target("gaussian(0,1)")
    assert isinstance(t, GaussianTarget) and t.spec == GaussianSpec(0.0, 1.0)
    t = parse_target("  gaussian( -2.5 , 0.75 )  ")
    assert t.spec == GaussianSpec(-2.5, 0.75)


def test_parse_student_t():
    t = parse_target("studentt(4.5)")
    assert isinstance(t, StudentTTarget) and t.dof == 4.5


def test_parse_mixture_path(tmp_path):
    mix = GaussianMixture(means=[0.0, 1.0], stds=[1.0, 1.0], weights=[0.5, 0.5])
    p = tmp_path / "mix.json"
    p.write_text(mix.to_json())
    t = parse_target(str(p))
    assert isinstance(t, MixtureTarget)
    np.testing.assert_array_equal(t.mixture.means, mix.means)


def test_parse_syntax_errors():
    for bad in ("gaussian(a,b)", "studentt(x)", "triangle(1)", "no/such/file.json"):
        with pytest.raises(TargetSyntaxError):
            parse_target(bad)


def test_parse_validation_errors_are_not_syntax_errors(tmp_path):
    with pytest.raises(DomainError) as exc:
        parse_target("studentt(0)")
    assert not isinstance(exc.value, TargetSyntaxError)
    p = tmp_path / "bad.json"
    p.write_text('{"means": [0], "stds": [1], "weights": [0.4]}')
    with pytest.raises(DomainError) as exc:
        parse_target(str(p))
    assert not isinstance(exc.value, TargetSyntaxError)
    with pytest.raises(DomainError):
        parse_target("gaussian(0,-1)")
