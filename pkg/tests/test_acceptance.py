"""Acceptance suite: one pass/fail line per criterion.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines as
they complete.  The parameter-recovery criterion refits a 50k-household
synthetic dataset and takes several minutes.
"""

import time

import numpy as np
import pytest

from dedchoice import (
    ConsiderationParams,
    ConsiderationScenario,
    EstimationOptions,
    ModelParams,
    PopulationConfig,
    PreferenceParams,
    PreferenceType,
    ValuationMode,
    assumption_battery,
    bundled_counterfactual,
    ce_eu,
    choice_prob_all,
    corollary1_alpha_check,
    eu_bundling_bound,
    excess_wtp,
    fit,
    gen_population,
    neutral_init,
    prelec,
    simulate_choices,
    simulated_shares,
    theorem1_identity_check,
    write_households,
)
from dedchoice.choice_model import bruteforce_given_coeff, choice_prob_given_coeff
from dedchoice.estimation import natural_vector, param_names

from conftest import mic1_params, mic2_params
from test_choice_model import random_model

MU = (0.081, 0.023)


def _report(num, name, passed, detail=""):
    line = f"CRITERION {num} [{name}]: {'PASS' if passed else 'FAIL'} {detail}"
    print("\n" + line)
    assert passed, line


# -- shared expensive artifacts ---------------------------------------------

@pytest.fixture(scope="module")
def recovery(truth):
    """Simulate at the reference truth and refit with multistarts."""
    pop = gen_population(PopulationConfig(n=50_000, seed=11))
    sim = simulate_choices(pop, truth, "broad", seed=5)
    t0 = time.time()
    res = fit(sim, neutral_init(truth.cfg), EstimationOptions(multistart=5, seed=3))
    return {"sim": sim, "result": res, "fit_seconds": time.time() - t0}


def test_criterion_1_arc_oracle_equivalence(menu_2x2, menu_2x3):
    t0 = time.time()
    rng = np.random.Generator(np.random.Philox(101))
    worst = 0.0
    for cfg in (menu_2x2, menu_2x3):
        for _ in range(100):
            mp = random_model(rng, cfg)
            ptype = PreferenceType.EU if rng.random() < 0.5 else PreferenceType.DT
            lo, hi = mp.pref.support(ptype)
            zeta = float(rng.uniform(lo + 1e-5, hi - 1e-5))
            x_i = float(rng.uniform(60, 600))
            x_ii = float(rng.uniform(40, 400))
            mu_i = float(rng.uniform(0.01, 0.3))
            mu_ii = float(rng.uniform(0.01, 0.3))
            for flat in range(cfg.n_bundles):
                b = cfg.bundle(flat)
                fast = choice_prob_given_coeff(
                    b, ptype, zeta, x_i, x_ii, mu_i, mu_ii, mp.cons, cfg
                )
                slow = bruteforce_given_coeff(
                    b, ptype, zeta, x_i, x_ii, mu_i, mu_ii, mp.cons, cfg
                )
                worst = max(worst, abs(fast - slow))
    elapsed = time.time() - t0
    _report(
        1, "ARC oracle equivalence",
        worst < 1e-6 and elapsed < 60.0,
        f"max gap {worst:.2e}, {elapsed:.1f}s",
    )


def test_criterion_2_probability_conservation(cfg, quad64):
    rng = np.random.Generator(np.random.Philox(102))
    worst = 0.0
    for _ in range(1000):
        mp = random_model(rng, cfg)
        total = np.sum(choice_prob_all(
            mp,
            float(rng.uniform(60, 600)), float(rng.uniform(40, 400)),
            float(rng.uniform(0.005, 0.4)), float(rng.uniform(0.005, 0.4)),
            quad64,
        ))
        worst = max(worst, abs(total - 1.0))
    _report(2, "probability conservation", worst < 1e-8, f"max |sum-1| {worst:.2e}")


def test_criterion_3_closed_form_limits():
    npv = -(187.0 + 0.081 * 500.0)
    eu_gap = abs(ce_eu(187.0, 500.0, 0.081, 1e-10) - npv)
    prelec_id = abs(prelec(0.1, 1.0) - 0.1)
    prelec_fix = abs(prelec(np.exp(-1.0), 0.37) - np.exp(-1.0))
    wtp_eu = excess_wtp(PreferenceType.EU, 0.0)
    wtp_dt = excess_wtp(PreferenceType.DT, 1.0)
    ok = (
        eu_gap <= 1e-6
        and prelec_id <= 1e-12
        and prelec_fix <= 1e-12
        and wtp_eu == 0.0
        and wtp_dt == 0.0
    )
    _report(
        3, "closed-form/limit checks", ok,
        f"eu_gap {eu_gap:.1e}, prelec {max(prelec_id, prelec_fix):.1e},"
        f" wtp ({wtp_eu}, {wtp_dt})",
    )


def test_criterion_4_theorem1_identity(cfg):
    t0 = time.time()
    grid = np.linspace(0.004, 0.021, 10)
    worst = 0.0
    mono_fail = 0
    for mp in (mic1_params(cfg), mic2_params(cfg)):
        for nu in grid:
            rel = theorem1_identity_check(float(nu), mp, *MU, step=1e-4, offset=1e-3)
            worst = max(worst, rel)
        # dyadic refinement on the coarse ladder at nu values where the
        # O(offset) truncation dominates; near the density mode the error
        # sits at the finite-difference noise floor (orders below 1e-2)
        # and halving the offset no longer moves it
        for nu in (0.012, 0.015, 0.018):
            errs = [
                theorem1_identity_check(nu, mp, *MU, step=o / 10.0, offset=o)
                for o in (3.2e-2, 1.6e-2, 8e-3, 4e-3)
            ]
            if not all(a > b for a, b in zip(errs, errs[1:])):
                mono_fail += 1
    elapsed = time.time() - t0
    _report(
        4, "derivative-jump identity",
        worst < 1e-2 and mono_fail == 0 and elapsed < 300.0,
        f"max rel {worst:.2e}, monotone fails {mono_fail}, {elapsed:.0f}s",
    )


def test_criterion_5_alpha_recovery(cfg):
    worst = 0.0
    for alpha in (0.2, 0.46, 0.8):
        mp = mic1_params(cfg)
        mp = ModelParams(
            pref=PreferenceParams(
                alpha=alpha, beta_nu=(2.0, 4.0), beta_omega=(2.0, 3.0)
            ),
            cons=mp.cons, cfg=cfg,
        )
        a_hat = corollary1_alpha_check(mp, *MU)
        worst = max(worst, abs(a_hat - alpha))
    _report(5, "mixture share recovery", worst <= 0.02, f"max |err| {worst:.4f}")


def test_criterion_6_parameter_recovery(truth, recovery):
    res = recovery["result"]
    names = param_names(truth.cfg)
    est = dict(zip(names, natural_vector(res.params)))
    tru = dict(zip(names, natural_vector(truth)))

    alpha_err = abs(est["alpha"] - tru["alpha"])
    mean_errs = []
    for ptype in PreferenceType:
        mean_errs.append(abs(
            res.params.pref.coefficient_mean(ptype) / truth.pref.coefficient_mean(ptype) - 1.0
        ))
    phi_hat = res.params.cons.phi
    phi_star = truth.cons.phi
    big = phi_star >= 0.2
    zero = phi_star == 0.0
    big_err = float(np.max(np.abs(phi_hat - phi_star)[big]))
    zero_max = float(np.max(phi_hat[zero]))

    ok = (
        alpha_err <= 0.05
        and max(mean_errs) <= 0.05
        and big_err <= 0.03
        and zero_max < 0.01
        and recovery["fit_seconds"] <= 1800.0
    )
    _report(
        6, "parameter recovery round trip", ok,
        f"alpha err {alpha_err:.4f}, mean rel errs {max(mean_errs):.4f},"
        f" phi err {big_err:.4f} (phi*>=0.2), zeros max {zero_max:.4f},"
        f" fit {recovery['fit_seconds']:.0f}s",
    )


def test_criterion_7_joint_share_pattern(truth, recovery):
    shares = simulated_shares(recovery["sim"])
    full = np.zeros(truth.cfg.shape)
    full[: shares.shape[0], : shares.shape[1]] = shares
    d_i = truth.cfg.collision.deductibles
    d_ii = truth.cfg.comprehensive.deductibles
    upper_mass = sum(
        full[i, j]
        for i in range(5) for j in range(6)
        if d_i[i] < d_ii[j]
    )
    modal = np.unravel_index(np.argmax(full), full.shape)
    modal_deds = (d_i[modal[0]], d_ii[modal[1]])
    ok = upper_mass < 1e-6 and modal_deds == (500, 500)
    _report(
        7, "joint share pattern", ok,
        f"upper-triangle mass {upper_mass:.1e}, modal bundle {modal_deds}",
    )


def test_criterion_8_welfare_logic(cfg, truth, quad64):
    pop = gen_population(PopulationConfig(n=25, seed=81))

    order_ok = True
    for h in pop:
        vals = {
            s: bundled_counterfactual(h, truth, s, ValuationMode.CHOICE_UTILITY, quad64)
            for s in ConsiderationScenario
        }
        order_ok &= (
            vals[ConsiderationScenario.FULL] >= vals[ConsiderationScenario.MIDDLE]
            and vals[ConsiderationScenario.MIDDLE] >= vals[ConsiderationScenario.WORST]
        )

    sub_ok = all(
        prelec(MU[0] + MU[1], w) < prelec(MU[0], w) + prelec(MU[1], w)
        for w in np.linspace(0.02, 0.98, 25)
    )

    # pure EU model, full consideration: bundling gain bounded by the
    # documented safety margin of the merged claim probability
    eu_mp = ModelParams(
        pref=PreferenceParams(alpha=1.0, beta_nu=(2.0, 4.0), beta_omega=(2.0, 3.0)),
        cons=ConsiderationParams.full(cfg.shape),
        cfg=cfg,
    )
    nodes, _ = quad64.mapped(eu_mp.pref, PreferenceType.EU)
    bound_ok = True
    worst_excess = -np.inf
    for h in pop[:10]:
        delta = bundled_counterfactual(
            h, eu_mp, ConsiderationScenario.FULL, ValuationMode.CHOICE_UTILITY,
            quad64, baseline="full",
        )
        bound = eu_bundling_bound(h, cfg, nodes)
        worst_excess = max(worst_excess, delta - bound)
        bound_ok &= delta <= bound + 1e-9

    _report(
        8, "welfare logic",
        order_ok and sub_ok and bound_ok,
        f"ordering {order_ok}, subadditivity {sub_ok},"
        f" eu bound slack {worst_excess:.2e}",
    )


def test_criterion_9_determinism(tmp_path, truth, cfg):
    # simulate: byte-identical CSV
    runs = []
    for tag in ("a", "b"):
        pop = gen_population(PopulationConfig(n=2000, seed=7))
        sim = simulate_choices(pop, truth, "broad", seed=8)
        path = tmp_path / f"{tag}.csv"
        write_households(path, sim, cfg)
        runs.append(path.read_bytes())
    sim_ok = runs[0] == runs[1]

    # fit: identical loglik and parameter vector
    pop = gen_population(PopulationConfig(n=1200, seed=9))
    data = simulate_choices(pop, truth, "broad", seed=10)
    opts = EstimationOptions(multistart=2, quad_nodes=32, seed=13)
    r1 = fit(data, neutral_init(cfg), opts)
    r2 = fit(data, neutral_init(cfg), opts)
    fit_ok = (
        r1.loglik == r2.loglik
        and np.array_equal(natural_vector(r1.params), natural_vector(r2.params))
    )

    # diagnose: identical report and identity value
    mp = mic1_params(cfg)
    d1 = assumption_battery(mp, [MU], [(187.0, 117.0)]).to_dict()
    d2 = assumption_battery(mp, [MU], [(187.0, 117.0)]).to_dict()
    t1 = theorem1_identity_check(0.009, mp, *MU, step=8e-4, offset=8e-3)
    t2 = theorem1_identity_check(0.009, mp, *MU, step=8e-4, offset=8e-3)
    diag_ok = d1 == d2 and t1 == t2

    _report(
        9, "determinism", sim_ok and fit_ok and diag_ok,
        f"simulate {sim_ok}, fit {fit_ok}, diagnose {diag_ok}",
    )
