import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from returnstat import dist
from returnstat.dist import CompoundParams, DistributionOnN
from returnstat.errors import ParameterError, UsageError


def delta(k):
    return dist.point_mass(k)


def masses(values):
    return DistributionOnN(np.array(values, dtype=float), 0.0, "generic", {})


# -- point pmfs -------------------------------------------------------------


@pytest.mark.parametrize(
    "t, k, expected",
    [(1.0, 0, math.exp(-1)), (1.0, 1, math.exp(-1)), (2.0, 3, math.exp(-2) * 8 / 6)],
)
def test_poisson_pmf_examples(t, k, expected):
    assert dist.poisson_pmf(t, k) == pytest.approx(expected, rel=1e-14)


def test_poisson_pmf_large_k_uses_logs():
    # direct evaluation would overflow t**k / k!
    value = dist.poisson_pmf(500.0, 520)
    assert value == pytest.approx(math.exp(-500 + 520 * math.log(500) - math.lgamma(521)), rel=1e-12)


@pytest.mark.parametrize("t", [0.0, -1.0, math.nan])
def test_poisson_rejects_bad_rate(t):
    with pytest.raises(ParameterError):
        dist.poisson_pmf(t, 1)


@pytest.mark.parametrize("p, k, expected", [(0.5, 1, 0.5), (0.3, 2, 0.21), (0.3, 0, 0.0)])
def test_geometric_pmf_examples(p, k, expected):
    assert dist.geometric_pmf(p, k) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("p", [-0.1, 1.0, 1.5])
def test_geometric_rejects_bad_p(p):
    with pytest.raises(ParameterError, match=r"p must be in \[0,1\)"):
        dist.geometric_pmf(p, 1)


def test_polya_aeppli_examples():
    assert dist.polya_aeppli_pmf(2.0, 0.5, 0) == pytest.approx(math.exp(-2), rel=1e-15)
    assert dist.polya_aeppli_pmf(1.0, 0.5, 1) == pytest.approx(0.5 * math.exp(-1), rel=1e-14)
    for k in range(40):
        assert dist.polya_aeppli_pmf(1.0, 0.0, k) == pytest.approx(dist.poisson_pmf(1.0, k), rel=1e-14, abs=1e-300)


def test_compound_poisson_examples():
    assert dist.compound_poisson_pmf(CompoundParams(1.0, delta(1)), 2, 1e-12) == pytest.approx(
        dist.poisson_pmf(1.0, 2), abs=1e-12
    )
    geo = dist.geometric(0.5)
    assert dist.compound_poisson_pmf(CompoundParams(1.0, geo), 1, 1e-12) == pytest.approx(0.5 * math.exp(-1), abs=1e-12)
    for t in (0.3, 2.0):
        assert dist.compound_poisson_pmf(CompoundParams(t, geo), 0, 1e-12) == pytest.approx(math.exp(-t), abs=1e-12)


def test_compound_poisson_rejects_bad_tol():
    with pytest.raises(ParameterError):
        dist.compound_poisson_pmf(CompoundParams(1.0, delta(1)), 1, 0.0)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("p", [0.0, 0.3, 0.7])
def test_pa_equals_cp_of_geometric(t, p):
    geo = dist.geometric(p) if p > 0 else delta(1)
    params = CompoundParams(t, geo)
    worst = max(abs(dist.polya_aeppli_pmf(t, p, k) - dist.compound_poisson_pmf(params, k, 1e-14)) for k in range(51))
    assert worst <= 1e-10


# -- constructed laws -------------------------------------------------------


@pytest.mark.parametrize(
    "d",
    [
        dist.poisson(3.0),
        dist.geometric(0.8),
        dist.polya_aeppli(2.0, 0.7),
        dist.compound_poisson(1.5, dist.geometric(0.4), 40),
        dist.point_mass(4),
    ],
)
def test_normalization_invariant(d):
    assert abs(math.fsum(d.masses) + d.tail_mass - 1.0) <= 1e-12
    assert d.tail_mass >= 0
    assert np.all((d.masses >= 0) & (d.masses <= 1))


def test_exact_family_tail_below_tolerance():
    assert dist.poisson(5.0, tol=1e-13).tail_mass <= 1e-13
    assert dist.polya_aeppli(1.0, 0.6, tol=1e-13).tail_mass <= 1e-13


def test_invalid_distribution_rejected():
    with pytest.raises(ParameterError):
        DistributionOnN(np.array([0.5, 0.4]), 0.0, "generic", {})
    with pytest.raises(ParameterError):
        DistributionOnN(np.array([1.2, -0.2]), 0.0, "generic", {})


def test_masses_are_read_only():
    d = dist.poisson(1.0)
    with pytest.raises(ValueError):
        d.masses[0] = 0.0


def test_json_round_trip():
    d = dist.polya_aeppli(1.3, 0.4)
    back = DistributionOnN.from_json(d.to_json())
    assert np.array_equal(back.masses, d.masses)
    assert back.tail_mass == d.tail_mass
    assert back.kind == "polya_aeppli"


def test_json_validates_on_load():
    bad = '{"kind": "generic", "params": {}, "masses": [0.3, 0.3], "tail_mass": 0.0}'
    with pytest.raises(ParameterError):
        DistributionOnN.from_json(bad)


# -- convolution ------------------------------------------------------------


def test_convolve_identity():
    nu = dist.polya_aeppli(1.0, 0.3)
    out = dist.convolve(delta(0), nu)
    assert np.allclose(out.masses[: nu.masses.size], nu.masses, atol=0)


def test_convolve_point_masses():
    geo0 = dist.geometric(0.0)
    out = dist.convolve(geo0, geo0)
    assert out.pmf(2) == pytest.approx(1.0)
    assert out.mean() == pytest.approx(2.0)


def test_convolve_fair_coin():
    coin = masses([0.5, 0.5])
    assert np.allclose(dist.convolve(coin, coin).masses, [0.25, 0.5, 0.25])


def test_convolve_poisson_is_poisson():
    out = dist.convolve(dist.poisson(1.0), dist.poisson(2.0))
    ref = dist.poisson(3.0)
    assert dist.total_variation(out, ref) < 1e-12


# -- characteristic functions ------------------------------------------------


def test_characteristic_basics():
    d = dist.polya_aeppli(2.0, 0.3)
    assert abs(dist.characteristic_function(d, 0.0) - 1.0) <= d.tail_mass + 1e-15
    for x in (0.3, 2.0):
        assert dist.characteristic_function(delta(1), x) == pytest.approx(np.exp(1j * x))


@pytest.mark.parametrize("t, p", [(0.5, 0.3), (1.0, 0.7), (2.0, 0.0), (2.0, 0.7)])
def test_characteristic_identity(t, p):
    x = np.array([0.1, 0.7, 1.3, 2.9])
    lhs = dist.characteristic_function(dist.polya_aeppli(t, p), x)
    rhs = np.exp(t * (dist.geometric_characteristic(p, x) - 1.0))
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


# -- total variation ---------------------------------------------------------


def test_total_variation_examples():
    mu = dist.poisson(1.0)
    assert dist.total_variation(mu, mu) == 0.0
    assert dist.total_variation(delta(0), delta(1)) == 1.0
    assert dist.total_variation(delta(0), masses([0.5, 0.5])) == pytest.approx(0.5)


def test_total_variation_uncertainty_reports_tails():
    a = dist.poisson(1.0, tol=1e-6)
    b = dist.poisson(2.0, tol=1e-6)
    value, unc = dist.total_variation(a, b, with_uncertainty=True)
    assert 0 < value < 1
    assert unc == pytest.approx(0.5 * (a.tail_mass + b.tail_mass))


_laws = st.builds(
    lambda t, p: dist.polya_aeppli(t, p),
    st.floats(0.05, 4.0),
    st.sampled_from([0.0, 0.2, 0.5, 0.8]),
)


@settings(max_examples=40, deadline=None)
@given(_laws, _laws, _laws)
def test_total_variation_is_a_metric(a, b, c):
    ab = dist.total_variation(a, b)
    assert ab == dist.total_variation(b, a)
    assert 0.0 <= ab <= 1.0
    assert ab <= dist.total_variation(a, c) + dist.total_variation(c, b) + 1e-12


def test_tv_convergence_matches_pointwise_convergence():
    # Poisson(1 + 1/j) -> Poisson(1): pointwise and in TV, both shrinking together
    target = dist.poisson(1.0)
    tvs, sups = [], []
    for j in (1, 4, 16, 64, 256):
        mu = dist.poisson(1.0 + 1.0 / j)
        tvs.append(dist.total_variation(mu, target))
        K = max(mu.kmax, target.kmax)
        sups.append(np.max(np.abs(mu.padded(K) - target.padded(K))))
    assert all(x > y for x, y in zip(tvs, tvs[1:]))
    assert all(x > y for x, y in zip(sups, sups[1:]))
    assert tvs[-1] < 3e-3
    # a sequence that does not converge pointwise keeps a TV gap
    assert dist.total_variation(delta(200), target) == pytest.approx(1.0)


# -- sampling ---------------------------------------------------------------


def test_sample_pa_with_p_zero_is_poisson():
    a = dist.sample_polya_aeppli(1.7, 0.0, np.random.default_rng(3), size=1000)
    b = np.random.default_rng(3).poisson(1.7, 1000)
    assert np.array_equal(a, b)


def test_sample_pa_tiny_rate():
    draws = dist.sample_polya_aeppli(1e-9, 0.5, np.random.default_rng(0), size=10_000)
    assert np.all(draws == 0)
    assert isinstance(dist.sample_polya_aeppli(1.0, 0.5, np.random.default_rng(0)), int)


def test_sample_pa_matches_pmf_million():
    draws = dist.sample_polya_aeppli(1.0, 0.5, np.random.default_rng(11), size=10**6)
    assert dist.total_variation(dist.empirical_distribution(draws), dist.polya_aeppli(1.0, 0.5)) <= 0.002


def test_empirical_consistency():
    draws = dist.sample_polya_aeppli(1.0, 0.3, np.random.default_rng(5), size=10**5)
    assert dist.total_variation(dist.empirical_distribution(draws), dist.polya_aeppli(1.0, 0.3)) <= 0.01


def test_empirical_examples():
    e = dist.empirical_distribution([0, 0, 1, 1])
    assert np.allclose(e.masses, [0.5, 0.5]) and e.kind == "empirical" and e.tail_mass == 0.0
    assert dist.empirical_distribution([3]).pmf(3) == 1.0
    with pytest.raises(UsageError):
        dist.empirical_distribution([])
