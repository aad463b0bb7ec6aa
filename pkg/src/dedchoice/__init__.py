"""Structural estimation of deductible choices under risk.

A mixture of CARA expected-utility and dual-theory (Prelec distortion)
agents chooses insurance deductible bundles in two contexts under
alternative-specific random consideration.  The package simulates
populations, estimates the model by maximum likelihood, certifies the
identification argument numerically, and evaluates welfare
counterfactuals.
"""

from .choice_model import (
    ModelParams,
    PreferenceParams,
    QuadratureRule,
    choice_prob,
    choice_prob_all,
    choice_prob_derivative,
    choice_prob_interval,
    conditional_choice_probs,
)
from .consideration import ConsiderationParams, inclusion_prob, set_prob
from .cutoffs import (
    CutoffQuery,
    IndifferenceLocusPoint,
    bundle_cutoff,
    indifference_locus,
    scp_verify,
    triplet_check,
    within_context_cutoff,
)
from .diagnostics import (
    DiagnosticsReport,
    assumption_battery,
    classify_mic,
    corollary1_alpha_check,
    density_recovery_cross_check,
    limit_difference,
    theorem1_identity_check,
)
from .estimation import (
    EstimationOptions,
    EstimationResult,
    fit,
    loglik,
    neutral_init,
    param_names,
    subsample_ci,
)
from .estimator import DeductibleChoiceEstimator
from .io import (
    CSV_COLUMNS,
    DataFormatError,
    read_households,
    read_json,
    write_households,
    write_json,
)
from .menus import Bundle, ContextMenu, Lottery, MenuConfig, default_menu
from .preferences import (
    NU_SUPPORT,
    OMEGA_SUPPORT,
    PreferenceType,
    bundle_ce,
    bundle_ce_grid,
    cara_utility,
    ce_dt,
    ce_eu,
    prelec,
    prelec_inverse,
)
from .simulation import (
    Household,
    PopulationConfig,
    gen_population,
    simulate_choices,
    simulated_shares,
    synthetic_truth,
)
from .welfare import (
    AutoProduct,
    ConsiderationScenario,
    ValuationMode,
    build_auto_product,
    bundled_counterfactual,
    eu_bundling_bound,
    excess_wtp,
    full_consideration_gain,
    welfare_summary,
)

__version__ = "0.1.0"

__all__ = [
    "AutoProduct", "Bundle", "CSV_COLUMNS", "ConsiderationParams",
    "ConsiderationScenario", "ContextMenu", "CutoffQuery", "DataFormatError",
    "DeductibleChoiceEstimator", "DiagnosticsReport", "EstimationOptions",
    "EstimationResult", "Household", "IndifferenceLocusPoint", "Lottery",
    "MenuConfig", "ModelParams", "NU_SUPPORT", "OMEGA_SUPPORT",
    "PopulationConfig", "PreferenceParams", "PreferenceType", "QuadratureRule",
    "ValuationMode", "assumption_battery", "build_auto_product", "bundle_ce",
    "bundle_ce_grid", "bundle_cutoff", "bundled_counterfactual",
    "cara_utility", "ce_dt", "ce_eu", "choice_prob", "choice_prob_all",
    "choice_prob_derivative", "choice_prob_interval", "classify_mic",
    "conditional_choice_probs", "corollary1_alpha_check", "default_menu",
    "density_recovery_cross_check", "eu_bundling_bound", "excess_wtp", "fit",
    "full_consideration_gain", "gen_population", "inclusion_prob",
    "indifference_locus", "limit_difference", "loglik", "neutral_init",
    "param_names", "prelec", "prelec_inverse", "read_households", "read_json",
    "scp_verify", "set_prob", "simulate_choices", "simulated_shares",
    "subsample_ci", "synthetic_truth", "theorem1_identity_check",
    "triplet_check", "welfare_summary", "within_context_cutoff",
    "write_households", "write_json",
]
