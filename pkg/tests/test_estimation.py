import numpy as np
import pytest
from dataclasses import replace

from dedchoice import (
    ConsiderationParams,
    EstimationOptions,
    ModelParams,
    PopulationConfig,
    PreferenceParams,
    QuadratureRule,
    fit,
    gen_population,
    loglik,
    neutral_init,
    param_names,
    simulate_choices,
    subsample_ci,
    synthetic_truth,
)
from dedchoice.estimation import (
    InvalidInit,
    LikelihoodEvaluator,
    natural_vector,
    params_to_vector,
    vector_to_params,
)


@pytest.fixture(scope="module")
def small_data(truth):
    pop = gen_population(PopulationConfig(n=1500, seed=21))
    return simulate_choices(pop, truth, "broad", seed=22)


def test_param_names(cfg):
    names = param_names(cfg)
    assert len(names) == 5 + 29
    assert names[:5] == ["alpha", "beta_nu_a", "beta_nu_b", "beta_omega_a", "beta_omega_b"]
    assert names[5] == "phi_1000_500"
    assert "phi_1000_1000" not in names  # pinned, not a free parameter


def test_transform_roundtrip(truth):
    vec = params_to_vector(truth)
    again = params_to_vector(vector_to_params(vec, truth.cfg))
    np.testing.assert_allclose(again, vec, atol=1e-12)


def test_transform_boundary_clamped(cfg):
    mp = synthetic_truth(cfg)  # contains exact zeros in phi
    vec = params_to_vector(mp)
    assert np.all(np.isfinite(vec))
    back = vector_to_params(vec, cfg)
    assert np.all(back.cons.phi >= 0.0) and np.all(back.cons.phi <= 1.0)
    with pytest.raises(ValueError):
        vector_to_params(vec[:-1], cfg)


def test_loglik_ordering_invariance(truth, small_data, quad64):
    forward = loglik(truth, small_data, quad64)
    backward = loglik(truth, list(reversed(small_data)), quad64)
    assert forward == backward


def test_loglik_floor_flags_zero_probability(truth, small_data, quad64):
    # drive a chosen bundle's phi to zero: its households get floored
    phi = truth.cons.phi.copy()
    phi[1, 1] = 0.0
    broken = ModelParams(pref=truth.pref, cons=ConsiderationParams(phi=phi), cfg=truth.cfg)
    ev = LikelihoodEvaluator(small_data, truth.cfg, quad64)
    ll, n_floored = ev.loglik(broken)
    n_chose = sum(1 for h in small_data if (h.choice.idx_i, h.choice.idx_ii) == (1, 1))
    assert n_chose > 0
    assert n_floored == n_chose
    assert np.isfinite(ll)


def test_truth_beats_perturbations(truth, small_data, quad64):
    base = loglik(truth, small_data, quad64)
    rng = np.random.Generator(np.random.Philox(17))
    vec = params_to_vector(truth)
    worse = 0
    for _ in range(20):
        cand = vector_to_params(vec + 0.35 * rng.standard_normal(vec.size), truth.cfg)
        if loglik(cand, small_data, quad64) <= base:
            worse += 1
    assert worse >= 18  # allow tiny Monte-Carlo slack at n = 1500


def test_fit_from_truth_is_stationary(truth, small_data):
    opts = EstimationOptions(multistart=1, optimizer="lbfgs", quad_nodes=32, seed=0)
    res = fit(small_data, truth, opts)
    quad = QuadratureRule.gauss(32)
    assert res.loglik >= loglik(truth, small_data, quad) - 1e-6
    assert res.converged
    assert res.n_evals > 0
    assert len(res.multistart_logliks) == 1


def test_invalid_init(small_data, cfg):
    bad = "not params"
    with pytest.raises((InvalidInit, AttributeError)):
        fit(small_data, bad, EstimationOptions(multistart=1))


def test_never_chosen_bundle_phi_to_zero(truth, small_data):
    # truth has phi = 0 above the diagonal: those bundles are never
    # chosen, and the MLE drives their phi to the boundary
    opts = EstimationOptions(multistart=1, optimizer="lbfgs", quad_nodes=32, seed=0)
    res = fit(small_data, neutral_init(truth.cfg), opts)
    zero_cells = truth.cons.phi == 0.0
    assert np.all(res.params.cons.phi[zero_cells] < 0.01)


def test_fit_deterministic(truth, small_data):
    opts = EstimationOptions(multistart=2, quad_nodes=32, seed=13)
    a = fit(small_data, neutral_init(truth.cfg), opts)
    b = fit(small_data, neutral_init(truth.cfg), opts)
    assert a.loglik == b.loglik
    np.testing.assert_array_equal(
        natural_vector(a.params), natural_vector(b.params)
    )


def test_subsample_ci_shape_and_pin(truth, small_data):
    opts = EstimationOptions(multistart=1, optimizer="lbfgs", quad_nodes=32, seed=0)
    res = fit(small_data, truth, opts)
    ci = subsample_ci(small_data, res, opts, n_subsamples=4, subsample_frac=0.25, seed=1)
    intervals = ci["intervals"]
    assert intervals["phi_1000_1000"] == (1.0, 1.0)
    for name in param_names(truth.cfg):
        lo, hi = intervals[name]
        assert lo <= hi
    a_lo, a_hi = intervals["alpha"]
    assert 0.0 <= a_lo and a_hi <= 1.0
    with pytest.raises(ValueError):
        subsample_ci(small_data, res, opts, subsample_frac=1.5)


def test_estimation_options_validation():
    with pytest.raises(ValueError):
        EstimationOptions(multistart=0)
    with pytest.raises(ValueError):
        EstimationOptions(optimizer="genetic")
    with pytest.raises(ValueError):
        EstimationOptions(tol=0.0)
