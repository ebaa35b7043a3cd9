import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcpgap.geometry import (
    CurvatureParams,
    DomainError,
    GridDensity,
    density_from_mixing_field,
    log_derivative_envelope,
    log_s_kappa,
    model_density,
    random_mcp_density,
    random_mixing_field,
    s_kappa,
    s_ratio_derivative,
    sample_model_density,
    sigma_coeff,
    tau_coeff,
    validate_mcp_density,
)

P = CurvatureParams


def test_s_kappa_examples():
    assert s_kappa(1.0, math.pi / 4) == pytest.approx(math.sqrt(2) / 2, rel=1e-15)
    assert s_kappa(0.0, 2.5) == 2.5
    assert s_kappa(-4.0, 1.0) == pytest.approx(math.sinh(2.0) / 2, rel=1e-15)
    assert s_kappa(1.0, math.pi) == pytest.approx(0.0, abs=1e-15)


def test_s_kappa_series_branch_matches_exact():
    th = np.linspace(1e-6, 1e-4, 50)
    for k in (1.0, -1.0):
        r = math.sqrt(abs(k))
        exact = np.sin(r * th) / r if k > 0 else np.sinh(r * th) / r
        np.testing.assert_allclose(s_kappa(k, th), exact, rtol=1e-14)


@given(st.floats(-5, 5), st.floats(0.01, 1.0))
def test_s_kappa_continuous_in_kappa(k, th):
    # |s_k - theta| <= |k| theta^3 / 6 * cosh-type factor
    assert abs(s_kappa(k, th) - th) <= abs(k) * th ** 3 / 6 * math.cosh(math.sqrt(abs(k)) * th) + 1e-15


def test_s_kappa_rejects_out_of_domain():
    with pytest.raises(DomainError):
        s_kappa(1.0, 4.0)
    with pytest.raises(DomainError):
        s_kappa(0.0, -1.0)


def test_log_s_kappa_large_argument_no_overflow():
    val = log_s_kappa(-1.0, 2000.0)
    assert val == pytest.approx(2000.0 - math.log(2), rel=1e-14)
    small = log_s_kappa(-1.0, 0.5)
    assert small == pytest.approx(math.log(math.sinh(0.5)), rel=1e-14)


def test_sigma_tau_examples():
    p = P(2.0, 3.0)  # kappa = 1
    sig = sigma_coeff(0.5, p, math.pi / 2)
    assert sig == pytest.approx(math.sin(math.pi / 4), rel=1e-14)
    assert tau_coeff(0.5, p, math.pi / 2) == pytest.approx(0.5 ** (1 / 3) * sig ** (2 / 3), rel=1e-14)
    assert sigma_coeff(0.5, p, math.pi) == math.inf
    assert sigma_coeff(0.3, P(0.0, 4.0), 7.0) == pytest.approx(0.3)


@given(st.sampled_from([-1.0, 0.0, 1.0]), st.floats(1.1, 20), st.floats(0.05, 0.95),
       st.floats(0.05, 0.95))
def test_sigma_monotone_in_theta(K, N, t, frac):
    p = P(K, N)
    top = p.diameter_bound if K > 0 else 10.0
    th1, th2 = frac * top * 0.5, frac * top
    s1, s2 = sigma_coeff(t, p, th1), sigma_coeff(t, p, th2)
    # sigma decreases with theta when kappa < 0, increases when kappa > 0
    if K < 0:
        assert s2 <= s1 * (1 + 1e-12)
    elif K > 0:
        assert s2 >= s1 * (1 - 1e-12)
    else:
        assert s1 == pytest.approx(s2)


@given(st.sampled_from([-1.0, 0.0, 1.0]), st.floats(1.5, 10), st.floats(0.25, 4.0),
       st.floats(0.01, 0.99))
def test_model_density_scaling_identity(K, N, a, frac):
    # h_{K,N,D}(x) = a^{-(N-1)} h_{a^2 K, N, D/a}(x/a)
    p = P(K, N)
    D = 0.9 * p.diameter_bound if K > 0 else 2.0
    x = frac * D
    lhs = model_density(p, D, x)
    rhs = a ** (N - 1) * model_density(p.scaled(a), D / a, x / a)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_model_density_symmetric_and_pinned():
    p = P(-1.0, 3.0)
    x = np.linspace(0, 2.0, 41)
    h = model_density(p, 2.0, x)
    np.testing.assert_allclose(h, h[::-1], rtol=1e-13)
    g = sample_model_density(p, 2.0, 64)
    assert g.x[32] == 1.0
    assert np.argmin(g.samples) == 32


def test_model_density_domain_errors():
    with pytest.raises(DomainError):
        model_density(P(1.0, 2.0), 4.0, 1.0)
    with pytest.raises(DomainError):
        model_density(P(0.0, 2.0), 1.0, 1.5)


def test_envelope_at_negative_curvature():
    env = log_derivative_envelope(P(-1.0, 2.0), 2.0, 1.0)
    c = 1 / math.tanh(1.0)
    assert env.upper == pytest.approx(c)
    assert env.lower == pytest.approx(-c)


def test_envelope_brackets_model_log_slope():
    p, D = P(1.0, 4.0), 2.0
    x = np.linspace(0.05, 1.95, 200)
    lo, up = log_derivative_envelope(p, D, x)
    k = p.kappa
    slope = np.where(x < D / 2, -(p.N - 1) * s_ratio_derivative(k, D - x),
                     (p.N - 1) * s_ratio_derivative(k, x))
    assert np.all(slope >= lo - 1e-12) and np.all(slope <= up + 1e-12)


@pytest.mark.parametrize("K", [-1.0, 0.0, 1.0])
@pytest.mark.parametrize("N", [2.0, 5.0, 13.0])
def test_random_densities_validate(K, N):
    p = P(K, N)
    D = 0.8 * p.diameter_bound if K > 0 else 2.0
    for seed in range(112):  # 1008 densities over the 3x3 lattice
        h = random_mcp_density(p, D, seed, 128)
        rep = validate_mcp_density(h, p)
        assert rep.passed, (seed, rep)


@pytest.mark.parametrize("K", [-1.0, 0.0, 1.0])
def test_model_density_validates(K):
    p = P(K, 3.0)
    D = p.diameter_bound if K > 0 else 3.0
    assert validate_mcp_density(sample_model_density(p, D, 200), p).passed


def test_validator_rejects_non_mcp():
    p = P(0.0, 2.0)
    h = GridDensity.from_function(lambda x: x ** 3, 0.0, 1.0, 128)
    rep = validate_mcp_density(h, p)
    assert not rep.passed and rep.worst_ratio > 1


def test_validator_checks_diameter():
    p = P(1.0, 2.0)
    h = GridDensity(0.0, 4.0, np.ones(17))
    rep = validate_mcp_density(h, p)
    assert not rep.passed and not rep.diameter_ok


def test_validator_large_grid_samples_pairs():
    p = P(0.0, 3.0)
    h = random_mcp_density(p, 1.0, 3, 1024)
    rep = validate_mcp_density(h, p)
    assert rep.passed and rep.pairs_checked < 1025 * 1024 // 2


def test_mixing_field_extremes_are_envelope_branches():
    # theta = 1 integrates the upper branch only: h proportional to s(x)^(N-1)
    p, D, n = P(-1.0, 3.0), 2.0, 200
    x = np.linspace(0, D, n + 1)
    up = density_from_mixing_field(p, D, np.ones(n), n).samples
    ref = s_kappa(p.kappa, x[1:]) ** (p.N - 1)
    ratio = up[1:] / ref
    np.testing.assert_allclose(ratio[n // 4:], ratio[-1], rtol=1e-10)
    lo = density_from_mixing_field(p, D, np.zeros(n), n).samples
    np.testing.assert_allclose(lo, up[::-1], rtol=1e-10)


def test_ratio_condition_monotone_quotient():
    # for MCP densities h(x)/s(x)^(N-1) is non-increasing on the right of any point
    p, D = P(1.0, 5.0), 3.0
    h = random_mcp_density(p, D, 11, 256)
    x = h.x[1:-1]
    q = np.log(h.samples[1:-1]) - (p.N - 1) * log_s_kappa(p.kappa, x)
    assert np.all(np.diff(q) <= 1e-9)


def test_mixing_field_range_and_determinism():
    f = random_mixing_field(5, 2.0)
    g = random_mixing_field(5, 2.0)
    x = np.linspace(0, 2, 101)
    v = f(x)
    assert np.all((v >= 0) & (v <= 1))
    np.testing.assert_array_equal(v, g(x))


def test_density_from_mixing_field_rejects_bad_weights():
    p = P(0.0, 2.0)
    with pytest.raises(DomainError):
        density_from_mixing_field(p, 1.0, np.full(10, 1.5), 10)
    with pytest.raises(DomainError):
        density_from_mixing_field(p, 1.0, np.ones(9), 10)


@settings(max_examples=30)
@given(st.floats(-3, 3), st.floats(0.1, 10), st.lists(st.floats(0.01, 5.0), min_size=3, max_size=30))
def test_grid_density_json_round_trip(a, length, samples):
    h = GridDensity(a, a + length, np.array(samples))
    back = GridDensity.from_json(h.to_json())
    assert back.a == h.a and back.b == h.b and back.n == h.n
    np.testing.assert_array_equal(back.samples, h.samples)


def test_grid_density_validation():
    with pytest.raises(DomainError):
        GridDensity(0.0, 1.0, np.array([1.0, -1.0, 1.0]))
    with pytest.raises(DomainError):
        GridDensity(1.0, 0.0, np.ones(5))
    h = GridDensity(0.0, 1.0, np.ones(9))
    assert h.restrict(4, 8).a == 0.5
    assert h.coarsen().n == 4


def test_curvature_params_validation():
    with pytest.raises(DomainError):
        P(0.0, 1.0)
    with pytest.raises(DomainError):
        P(float("nan"), 2.0)
    assert P(1.0, 2.0).diameter_bound == pytest.approx(math.pi)
    assert P(-1.0, 2.0).diameter_bound == math.inf
