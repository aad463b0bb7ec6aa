import numpy as np
import pytest

from dedchoice import (
    ConsiderationParams,
    ConsiderationScenario,
    ModelParams,
    PopulationConfig,
    PreferenceParams,
    PreferenceType,
    ValuationMode,
    build_auto_product,
    bundled_counterfactual,
    eu_bundling_bound,
    excess_wtp,
    full_consideration_gain,
    gen_population,
    prelec,
    welfare_summary,
)
from dedchoice.welfare import InvalidScenario, scenario_phi


@pytest.fixture(scope="module")
def households():
    return gen_population(PopulationConfig(n=12, seed=30))


def test_excess_wtp_zero_cases():
    assert excess_wtp(PreferenceType.EU, 0.0) == 0.0  # exact
    assert excess_wtp(PreferenceType.DT, 1.0) == 0.0  # exact
    with pytest.raises(ValueError):
        excess_wtp(PreferenceType.EU, -0.001)


def test_excess_wtp_frozen_values():
    assert excess_wtp(PreferenceType.EU, 0.005) == pytest.approx(
        100.11799819771392, abs=1e-9
    )
    assert excess_wtp(PreferenceType.DT, 0.5) == pytest.approx(
        59.637664430010474, abs=1e-9
    )


def test_full_consideration_gain_zero_at_full(cfg, households, quad64):
    mp = ModelParams(
        pref=PreferenceParams(alpha=0.46, beta_nu=(2.0, 4.0), beta_omega=(2.0, 3.0)),
        cons=ConsiderationParams.full(cfg.shape),
        cfg=cfg,
    )
    for h in households[:3]:
        gain = full_consideration_gain(h, mp, ValuationMode.CHOICE_UTILITY, quad64)
        assert gain == pytest.approx(0.0, abs=1e-10)


def test_full_consideration_gain_positive(truth, households, quad64):
    for h in households[:4]:
        gain = full_consideration_gain(h, truth, ValuationMode.CHOICE_UTILITY, quad64)
        assert gain > 0.0


def test_auto_product_construction(cfg, households):
    h = households[0]
    product = build_auto_product(h, cfg)
    assert product.mu_auto == pytest.approx(h.mu_i + h.mu_ii)
    assert product.deductibles == tuple(float(d) for d in cfg.collision.deductibles)
    p_i = cfg.collision.premiums(h.x_i)
    p_ii = cfg.comprehensive.premiums(h.x_ii)
    d_ii = [float(d) for d in cfg.comprehensive.deductibles]
    for k, d in enumerate(product.deductibles):
        assert product.premiums[k] == pytest.approx(p_i[k] + p_ii[d_ii.index(d)])


def test_scenario_phi_shapes_and_pin(truth):
    for scenario in ConsiderationScenario:
        phi = scenario_phi(scenario, truth)
        assert phi.shape == (5,)
        assert phi[0] == 1.0
        assert np.all((phi >= 0.0) & (phi <= 1.0))
    full = scenario_phi(ConsiderationScenario.FULL, truth)
    assert np.all(full == 1.0)
    worst = scenario_phi(ConsiderationScenario.WORST, truth)
    middle = scenario_phi(ConsiderationScenario.MIDDLE, truth)
    assert np.all(middle >= worst - 1e-12)
    with pytest.raises(InvalidScenario):
        scenario_phi("worst", truth)
    with pytest.raises(ValueError):
        scenario_phi(ConsiderationScenario.MIDDLE, truth, marginal_mode="max")


def test_scenario_ordering_per_household(truth, households, quad64):
    # criterion 8 component: Full >= Middle >= Worst by choice utility
    for h in households:
        vals = {
            s: bundled_counterfactual(h, truth, s, ValuationMode.CHOICE_UTILITY, quad64)
            for s in ConsiderationScenario
        }
        assert vals[ConsiderationScenario.FULL] >= vals[ConsiderationScenario.MIDDLE] - 1e-10
        assert vals[ConsiderationScenario.MIDDLE] >= vals[ConsiderationScenario.WORST] - 1e-10


def test_dt_subadditivity():
    mu_i, mu_ii = 0.081, 0.023
    for omega in np.linspace(0.05, 0.95, 19):
        assert prelec(mu_i + mu_ii, omega) < prelec(mu_i, omega) + prelec(mu_ii, omega)


def test_eu_bundling_bound_properties(cfg, households):
    # the merged product is safer (double claims disregarded), so the
    # gap is nonnegative, vanishes as nu -> 0, and grows with nu
    for h in households[:4]:
        small = eu_bundling_bound(h, cfg, [1e-5])
        mid = eu_bundling_bound(h, cfg, [0.01])
        big = eu_bundling_bound(h, cfg, np.linspace(1e-5, 0.024, 15))
        assert 0.0 <= small < 1.0
        assert small <= mid <= big


def test_npv_valuation_differs_for_dt(households, quad64, truth):
    h = households[0]
    a = bundled_counterfactual(
        h, truth, ConsiderationScenario.FULL, ValuationMode.CHOICE_UTILITY, quad64
    )
    b = bundled_counterfactual(
        h, truth, ConsiderationScenario.FULL, ValuationMode.NPV, quad64
    )
    assert a != b  # distortion stripped only under NPV


def test_welfare_summary_quartiles():
    out = welfare_summary([1.0, 2.0, 3.0, 4.0])
    assert out["mean"] == pytest.approx(2.5)
    assert out["q50"] == pytest.approx(2.5)
    assert out["q25"] < out["q50"] < out["q75"]
