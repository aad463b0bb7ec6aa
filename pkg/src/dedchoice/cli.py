"""Command-line surface.

Subcommands: simulate, fit, diagnose, welfare, report, print-defaults.
Every artifact embeds its resolved configuration; exit codes are
0 success, 1 input validation, 2 nonconvergence (output still written),
3 internal error.  DEDCHOICE_THREADS caps the numerical thread pools.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from dataclasses import replace

import click
import numpy as np
from scipy import stats

from . import io as dio
from .choice_model import ModelParams, QuadratureRule, choice_prob_all
from .cutoffs import OutOfRangeError, indifference_locus
from .diagnostics import assumption_battery, theorem1_identity_check
from .estimation import EstimationOptions, fit as fit_mle, neutral_init, subsample_ci
from .menus import default_menu
from .preferences import PreferenceType
from .simulation import (
    REGIMES,
    PopulationConfig,
    gen_population,
    simulate_choices,
    simulated_shares,
    synthetic_truth,
)
from .welfare import (
    ConsiderationScenario,
    ValuationMode,
    bundled_counterfactual,
    excess_wtp,
    full_consideration_gain,
    welfare_summary,
)

# file/content validation should exit 1, not click's usage default
click.UsageError.exit_code = 1

_THREAD_ENV = "DEDCHOICE_THREADS"


def _apply_thread_limit():
    raw = os.environ.get(_THREAD_ENV)
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise click.UsageError(f"{_THREAD_ENV} must be an integer, got {raw!r}")
    if n <= 0:
        raise click.UsageError(f"{_THREAD_ENV} must be positive")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _guarded(f):
    """Map exceptions to the documented exit codes."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except click.ClickException:
            raise
        except (dio.DataFormatError, ValueError, OSError, KeyError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except Exception as exc:  # pragma: no cover - defensive
            click.echo(f"internal error: {exc!r}", err=True)
            sys.exit(3)

    return wrapper


def _load_cfg(menu_path):
    return dio.load_menu(menu_path) if menu_path else default_menu()


def _load_params(params_path, cfg) -> ModelParams:
    if params_path is None:
        return synthetic_truth(cfg)
    doc = dio.read_json(params_path)
    return ModelParams.from_dict(doc["params"] if "params" in doc else doc)


@click.group()
def main():
    """Structural estimation of deductible choices under risk."""
    limit = _apply_thread_limit()
    if limit is not None:
        ctx = click.get_current_context()
        ctx.call_on_close(limit.unregister)


@main.command()
@click.option("--n", default=5000, show_default=True, help="Households to draw.")
@click.option("--seed", default=0, show_default=True,
              help="Master seed (population and choices derive from it).")
@click.option("--regime", default="broad", show_default=True,
              type=click.Choice(REGIMES))
@click.option("--params", "params_path", type=click.Path(exists=True),
              help="Generating parameters JSON; defaults to the built-in truth.")
@click.option("--menu", "menu_path", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Household CSV.")
@click.option("--truth-out", type=click.Path(), help="Generating-parameter JSON.")
@_guarded
def simulate(n, seed, regime, params_path, menu_path, out, truth_out):
    """Draw a synthetic population and simulate its bundle choices."""
    cfg = _load_cfg(menu_path)
    mp = _load_params(params_path, cfg)
    pc = PopulationConfig(n=n, seed=seed)
    pop = simulate_choices(gen_population(pc), mp, regime, seed=seed + 1)
    dio.write_households(out, pop, cfg)
    config = {"command": "simulate", "regime": regime, "seed": seed,
              "population": pc.to_dict(), "menu": cfg.to_dict()}
    if truth_out:
        dio.write_json(truth_out, {"params": mp.to_dict()}, config)
    click.echo(f"wrote {len(pop)} households to {out}")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(), help="Result JSON.")
@click.option("--menu", "menu_path", type=click.Path(exists=True))
@click.option("--init", "init_path", type=click.Path(exists=True),
              help="Starting parameters JSON; defaults to a neutral start.")
@click.option("--quad-nodes", default=64, show_default=True)
@click.option("--multistart", default=5, show_default=True)
@click.option("--optimizer", default="hybrid", show_default=True,
              type=click.Choice(["neldermead", "lbfgs", "hybrid"]))
@click.option("--seed", default=0, show_default=True)
@click.option("--subsamples", default=0, show_default=True,
              help="Subsampling replications for confidence intervals.")
@click.option("--subsample-frac", default=0.2, show_default=True)
@_guarded
def fit(data_path, out, menu_path, init_path, quad_nodes, multistart,
        optimizer, seed, subsamples, subsample_frac):
    """Maximum-likelihood fit on a household CSV."""
    cfg = _load_cfg(menu_path)
    data = dio.read_households(data_path, cfg)
    if any(h.choice is None for h in data):
        raise click.UsageError("every household must carry an observed choice")
    if init_path:
        init = _load_params(init_path, cfg)
    else:
        init = neutral_init(cfg)
    opts = EstimationOptions(quad_nodes=quad_nodes, multistart=multistart,
                             optimizer=optimizer, seed=seed)
    result = fit_mle(data, init, opts)
    if subsamples > 0:
        ci = subsample_ci(data, result, opts, n_subsamples=subsamples,
                          subsample_frac=subsample_frac, seed=seed)
        result = replace(result, intervals=ci["intervals"])
    config = {"command": "fit", "data": str(data_path), "seed": seed,
              "quad_nodes": quad_nodes, "multistart": multistart,
              "optimizer": optimizer, "subsamples": subsamples,
              "subsample_frac": subsample_frac, "menu": cfg.to_dict()}
    dio.write_json(out, dio.result_to_dict(result), config)
    click.echo(f"loglik {result.loglik:.3f} converged={result.converged}"
               f" floored={result.n_floored}")
    if not result.converged:
        click.echo("warning: optimizer did not report convergence", err=True)
        sys.exit(2)


@main.command()
@click.option("--params", "params_path", type=click.Path(exists=True))
@click.option("--menu", "menu_path", type=click.Path(exists=True))
@click.option("--mu", nargs=2, type=float, default=(0.081, 0.023),
              show_default=True, help="Claim probabilities (collision, comp).")
@click.option("--x", "x_pair", nargs=2, type=float, default=(187.0, 117.0),
              show_default=True, help="Base prices (collision, comp).")
@click.option("--theorem-points", default=0, show_default=True,
              help="Also check the derivative-jump identity at N interior points.")
@click.option("--step", default=1e-4, show_default=True)
@click.option("--offset", default=1e-3, show_default=True)
@click.option("--out", type=click.Path(), help="Report JSON (table to stdout).")
@_guarded
def diagnose(params_path, menu_path, mu, x_pair, theorem_points, step, offset, out):
    """Run the numerical assumption battery and identification checks."""
    cfg = _load_cfg(menu_path)
    mp = _load_params(params_path, cfg)
    report = assumption_battery(mp, [tuple(mu)], [tuple(x_pair)])
    doc = report.to_dict()
    if theorem_points > 0:
        lo, hi = mp.pref.support(PreferenceType.EU)
        pad = 0.1 * (hi - lo)
        grid = np.linspace(lo + pad, hi - pad, theorem_points)
        doc["theorem_identity"] = {
            f"{z:.6f}": theorem1_identity_check(float(z), mp, mu[0], mu[1],
                                                step=step, offset=offset)
            for z in grid
        }
    config = {"command": "diagnose", "mu": list(mu), "x": list(x_pair),
              "step": step, "offset": offset, "menu": cfg.to_dict()}
    click.echo(report.table())
    if out:
        dio.write_json(out, doc, config)
    if not report.passed:
        click.echo("battery: FAIL", err=True)


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--params", "params_path", type=click.Path(exists=True))
@click.option("--menu", "menu_path", type=click.Path(exists=True))
@click.option("--scenario", default="middle", show_default=True,
              type=click.Choice([s.value for s in ConsiderationScenario]))
@click.option("--valuation", default="choice_utility", show_default=True,
              type=click.Choice([v.value for v in ValuationMode]))
@click.option("--quad-nodes", default=64, show_default=True)
@click.option("--limit", default=500, show_default=True,
              help="Cap on households evaluated (welfare loops are per household).")
@click.option("--out", required=True, type=click.Path())
@_guarded
def welfare(data_path, params_path, menu_path, scenario, valuation,
            quad_nodes, limit, out):
    """Welfare counterfactuals: consideration gain and product bundling."""
    cfg = _load_cfg(menu_path)
    mp = _load_params(params_path, cfg)
    data = dio.read_households(data_path, cfg)[:limit]
    quad = QuadratureRule.gauss(quad_nodes)
    val = ValuationMode(valuation)
    scen = ConsiderationScenario(scenario)

    gains = [full_consideration_gain(h, mp, val, quad) for h in data]
    bundled = [bundled_counterfactual(h, mp, scen, val, quad) for h in data]

    nu_mean = mp.pref.coefficient_mean(PreferenceType.EU)
    om_mean = mp.pref.coefficient_mean(PreferenceType.DT)
    doc = {
        "n_households": len(data),
        "excess_wtp_at_means": {
            "EU": excess_wtp(PreferenceType.EU, nu_mean),
            "DT": excess_wtp(PreferenceType.DT, om_mean),
        },
        "full_consideration_gain": welfare_summary(gains),
        "bundled_counterfactual": welfare_summary(bundled),
    }
    config = {"command": "welfare", "data": str(data_path),
              "scenario": scenario, "valuation": valuation,
              "quad_nodes": quad_nodes, "limit": limit, "menu": cfg.to_dict()}
    dio.write_json(out, doc, config)
    click.echo(json.dumps(doc, indent=2, sort_keys=True))


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--params", "params_path", type=click.Path(exists=True))
@click.option("--menu", "menu_path", type=click.Path(exists=True))
@click.option("--quad-nodes", default=64, show_default=True)
@click.option("--limit", default=1000, show_default=True,
              help="Households used for the model-share average.")
@click.option("--out-dir", required=True, type=click.Path())
@_guarded
def report(data_path, params_path, menu_path, quad_nodes, limit, out_dir):
    """Emit plot-ready CSVs: distortion curves, coefficient CDF, shares, loci."""
    cfg = _load_cfg(menu_path)
    mp = _load_params(params_path, cfg)
    data = dio.read_households(data_path, cfg)
    os.makedirs(out_dir, exist_ok=True)

    # distortion curves at quantiles of the omega law
    a, b = mp.pref.beta_omega
    lo, hi = mp.pref.support(PreferenceType.DT)
    qs = (0.1, 0.25, 0.5, 0.75, 0.9)
    omegas = lo + (hi - lo) * stats.beta.ppf(qs, a, b)
    mu_grid = np.linspace(0.005, 0.995, 199)
    from .preferences import prelec

    with open(os.path.join(out_dir, "distortion_curves.csv"), "w") as fh:
        fh.write("mu," + ",".join(f"omega_q{int(100 * q)}" for q in qs) + "\n")
        for m in mu_grid:
            row = [f"{m:.6f}"] + [f"{prelec(m, w):.8f}" for w in omegas]
            fh.write(",".join(row) + "\n")

    # CDF of the risk-aversion coefficient
    lo_n, hi_n = mp.pref.support(PreferenceType.EU)
    nu_grid = np.linspace(lo_n, hi_n, 201)
    with open(os.path.join(out_dir, "nu_cdf.csv"), "w") as fh:
        fh.write("nu,cdf\n")
        for z in nu_grid:
            fh.write(f"{z:.8f},{mp.pref.cdf(PreferenceType.EU, z):.8f}\n")

    # model-vs-data bundle shares
    quad = QuadratureRule.gauss(quad_nodes)
    sub = data[:limit]
    model = np.mean(
        [choice_prob_all(mp, h.x_i, h.x_ii, h.mu_i, h.mu_ii, quad) for h in sub],
        axis=0,
    )
    have_choices = all(h.choice is not None for h in data)
    emp = simulated_shares(data).reshape(-1) if have_choices else None
    with open(os.path.join(out_dir, "bundle_shares.csv"), "w") as fh:
        fh.write("collision_deductible,comprehensive_deductible,model_share"
                 + (",data_share\n" if have_choices else "\n"))
        for flat in range(cfg.n_bundles):
            d_i, d_ii = cfg.bundle_deductibles(cfg.bundle(flat))
            row = f"{int(d_i)},{int(d_ii)},{model[flat]:.8f}"
            if have_choices:
                row += f",{emp[flat]:.8f}"
            fh.write(row + "\n")

    # indifference loci over each coefficient support
    h0 = data[0]
    with open(os.path.join(out_dir, "indifference_loci.csv"), "w") as fh:
        fh.write("type,coefficient,x_collision,x_comprehensive\n")
        for ptype in PreferenceType:
            lo_t, hi_t = mp.pref.support(ptype)
            pad = 0.05 * (hi_t - lo_t)
            for z in np.linspace(lo_t + pad, hi_t - pad, 40):
                try:
                    pt = indifference_locus(
                        float(z), ptype, h0.mu_i, h0.mu_ii, cfg
                    )
                except (OutOfRangeError, ValueError):
                    continue
                fh.write(f"{ptype.value},{z:.8f},{pt.x_i:.6f},{pt.x_ii:.6f}\n")

    config = {"command": "report", "data": str(data_path),
              "quad_nodes": quad_nodes, "limit": limit, "menu": cfg.to_dict()}
    dio.write_json(os.path.join(out_dir, "report.json"),
                   {"outputs": ["distortion_curves.csv", "nu_cdf.csv",
                                "bundle_shares.csv", "indifference_loci.csv"]},
                   config)
    click.echo(f"report written to {out_dir}")


@main.command(name="print-defaults")
@_guarded
def print_defaults():
    """Print the built-in menu and sampling defaults as JSON."""
    doc = {
        "menu": default_menu().to_dict(),
        "population": PopulationConfig(n=5000).to_dict(),
        "estimation": {
            "quad_nodes": 64, "multistart": 5, "optimizer": "hybrid",
            "seed": 0, "tol": 1e-7,
        },
    }
    click.echo(json.dumps(doc, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
