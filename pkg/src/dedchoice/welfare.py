"""Welfare counterfactuals.

Three exercises: the excess willingness to pay to avoid a reference
lottery (10% chance of losing $500), the certainty-equivalent gain from
removing consideration frictions, and a bundled single auto product with
mu_auto = mu_I + mu_II evaluated under three consideration scenarios.

Valuation modes: choice utility values outcomes with the same functional
the agent chooses by; NPV mode strips the probability distortion from DT
agents (their chosen alternatives are valued at net present value) while
EU agents are always valued by choice utility.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .choice_model import ModelParams, QuadratureRule, conditional_choice_probs
from .consideration import total_premiums
from .menus import MenuConfig
from .preferences import (
    NU_LINEAR_SWITCH,
    PreferenceType,
    bundle_ce_grid,
    ce_eu,
    prelec,
)
from .simulation import narrow_marginals

REFERENCE_LOSS = 500.0
REFERENCE_PROB = 0.1


class ValuationMode(enum.Enum):
    CHOICE_UTILITY = "choice_utility"
    NPV = "npv"


class ConsiderationScenario(enum.Enum):
    WORST = "worst"
    MIDDLE = "middle"
    FULL = "full"


class InvalidScenario(ValueError):
    pass


@dataclass(frozen=True)
class AutoProduct:
    """Single-product line replacing the two-context bundle grid."""

    deductibles: tuple
    mu_auto: float
    premiums: tuple

    def __post_init__(self):
        if not 0.0 < self.mu_auto < 1.0:
            raise ValueError("mu_auto must lie strictly in (0,1); claim"
                             " probabilities too large to merge")
        if len(self.deductibles) != len(self.premiums):
            raise ValueError("one premium per product deductible")


def excess_wtp(ptype: PreferenceType, zeta: float) -> float:
    """WTP above actuarial value to avoid losing $500 with probability 10%.

    EU: WTP = (1/nu) ln(0.9 + 0.1 exp(500 nu)); DT: WTP = 500 Omega(0.1).
    The actuarial value of the lottery is $50.
    """
    if zeta < 0:
        raise ValueError("risk parameter must be nonnegative")
    fair = REFERENCE_PROB * REFERENCE_LOSS
    if ptype is PreferenceType.EU:
        if zeta < NU_LINEAR_SWITCH:
            return 0.0
        wtp = np.log(
            (1.0 - REFERENCE_PROB) + REFERENCE_PROB * np.exp(REFERENCE_LOSS * zeta)
        ) / zeta
        return float(wtp - fair)
    return float(REFERENCE_LOSS * prelec(REFERENCE_PROB, zeta) - fair)


def _npv_values(cfg: MenuConfig, x_i, x_ii, mu_i, mu_ii) -> np.ndarray:
    """Net present value of every bundle, flat grid."""
    d_i = np.asarray(cfg.collision.deductibles, dtype=float)
    d_ii = np.asarray(cfg.comprehensive.deductibles, dtype=float)
    p_i = cfg.collision.premiums(x_i)
    p_ii = cfg.comprehensive.premiums(x_ii)
    v_i = -(p_i + mu_i * d_i)
    v_ii = -(p_ii + mu_ii * d_ii)
    return (v_i[:, None] + v_ii[None, :]).reshape(-1)


def _node_values(ce_flat, npv_flat, ptype, valuation):
    if valuation is ValuationMode.NPV and ptype is PreferenceType.DT:
        return npv_flat
    return ce_flat


def full_consideration_gain(
    h, mp: ModelParams, valuation: ValuationMode, quad: QuadratureRule
) -> float:
    """Expected CE gain from lifting the consideration friction.

    At each coefficient node: value of the full-menu optimum (by choice
    utility) minus the expected value of the ARC choice distribution,
    mixed over types and integrated over the Beta laws.
    """
    phi = mp.cons.flat
    prem = total_premiums(mp.cfg, h.x_i, h.x_ii)
    npv = _npv_values(mp.cfg, h.x_i, h.x_ii, h.mu_i, h.mu_ii)
    out = 0.0
    for ptype in PreferenceType:
        share = mp.pref.weight(ptype)
        if share == 0.0:
            continue
        zeta, w = quad.mapped(mp.pref, ptype)
        ce = bundle_ce_grid(
            mp.cfg, ptype, zeta, h.x_i, h.x_ii, h.mu_i, h.mu_ii
        ).reshape(quad.n, -1)
        cond = conditional_choice_probs(ce, prem, phi)
        # choice under full consideration: max CE, premium tie-break
        best = np.lexsort((np.broadcast_to(prem, ce.shape), -ce), axis=-1)[:, 0]
        values = np.stack(
            [_node_values(ce[k], npv, ptype, valuation) for k in range(quad.n)]
        )
        gain_nodes = values[np.arange(quad.n), best] - np.einsum(
            "kj,kj->k", cond, values
        )
        out += share * float(w @ gain_nodes)
    return out


def build_auto_product(h, cfg: MenuConfig) -> AutoProduct:
    """Merge the two contexts into one product on the collision deductibles.

    mu_auto adds the claim probabilities (double claims disregarded) and
    each product premium adds the context premiums at the same dollar
    deductible.
    """
    d_i = [float(d) for d in cfg.collision.deductibles]
    d_ii = [float(d) for d in cfg.comprehensive.deductibles]
    p_i = cfg.collision.premiums(h.x_i)
    p_ii = cfg.comprehensive.premiums(h.x_ii)
    prem = []
    for k, d in enumerate(d_i):
        if d not in d_ii:
            raise ValueError(f"no comprehensive deductible matches ${d:.0f}")
        prem.append(float(p_i[k] + p_ii[d_ii.index(d)]))
    return AutoProduct(
        deductibles=tuple(d_i), mu_auto=h.mu_i + h.mu_ii, premiums=tuple(prem)
    )


def scenario_phi(
    scenario: ConsiderationScenario,
    mp: ModelParams,
    marginal_mode: str = "arc",
) -> np.ndarray:
    """Per-product consideration probabilities, cheapest product pinned.

    Worst takes the diagonal bundle probability phi(d, d).  Middle adds
    the two per-context marginals of deductible d and caps at one; the
    default marginal is the ARC probability that d appears in at least
    one considered bundle of its row/column, the `sum` mode adds the raw
    phi entries instead.
    """
    if not isinstance(scenario, ConsiderationScenario):
        raise InvalidScenario(f"unknown scenario {scenario!r}")
    cfg = mp.cfg
    d_i = [float(d) for d in cfg.collision.deductibles]
    d_ii = [float(d) for d in cfg.comprehensive.deductibles]
    cols = [d_ii.index(d) for d in d_i]
    if scenario is ConsiderationScenario.FULL:
        phi = np.ones(len(d_i))
    elif scenario is ConsiderationScenario.WORST:
        phi = np.array([mp.cons.phi[i, c] for i, c in enumerate(cols)])
    else:
        if marginal_mode == "arc":
            p_i, p_ii = narrow_marginals(mp.cons)
        elif marginal_mode == "sum":
            p_i = mp.cons.phi.sum(axis=1)
            p_ii = mp.cons.phi.sum(axis=0)
        else:
            raise ValueError(f"unknown marginal_mode {marginal_mode!r}")
        phi = np.minimum(1.0, np.array([p_i[i] + p_ii[c] for i, c in enumerate(cols)]))
    phi[0] = 1.0
    return phi


def _auto_ce(product: AutoProduct, ptype: PreferenceType, zeta) -> np.ndarray:
    x = np.asarray(product.premiums)
    d = np.asarray(product.deductibles)
    if ptype is PreferenceType.EU:
        return ce_eu(x, d, product.mu_auto, np.asarray(zeta)[..., None])
    om = prelec(np.full(1, product.mu_auto), np.asarray(zeta)[..., None])
    return -x - om * d


def bundled_counterfactual(
    h,
    mp: ModelParams,
    scenario: ConsiderationScenario,
    valuation: ValuationMode,
    quad: QuadratureRule,
    marginal_mode: str = "arc",
    baseline: str = "status_quo",
) -> float:
    """Expected CE change from replacing the bundle grid with one product.

    ``baseline`` selects the comparison point: the status-quo limited
    consideration choice distribution, or the status-quo choice under
    full consideration (isolating the pure menu-shrink effect).
    """
    if baseline not in ("status_quo", "full"):
        raise ValueError(f"unknown baseline {baseline!r}")
    product = build_auto_product(h, mp.cfg)
    phi_auto = scenario_phi(scenario, mp, marginal_mode)
    phi = mp.cons.flat
    prem = total_premiums(mp.cfg, h.x_i, h.x_ii)
    npv = _npv_values(mp.cfg, h.x_i, h.x_ii, h.mu_i, h.mu_ii)
    prem_auto = np.asarray(product.premiums)
    d_auto = np.asarray(product.deductibles)
    npv_auto = -(prem_auto + product.mu_auto * d_auto)

    out = 0.0
    for ptype in PreferenceType:
        share = mp.pref.weight(ptype)
        if share == 0.0:
            continue
        zeta, w = quad.mapped(mp.pref, ptype)
        ce_auto = _auto_ce(product, ptype, zeta)
        cond_auto = conditional_choice_probs(ce_auto, prem_auto, phi_auto)
        ce = bundle_ce_grid(
            mp.cfg, ptype, zeta, h.x_i, h.x_ii, h.mu_i, h.mu_ii
        ).reshape(quad.n, -1)
        for k in range(quad.n):
            v_auto = _node_values(ce_auto[k], npv_auto, ptype, valuation)
            v_sq = _node_values(ce[k], npv, ptype, valuation)
            new = float(cond_auto[k] @ v_auto)
            if baseline == "full":
                order = np.lexsort((prem, -ce[k]))
                old = float(v_sq[order[0]])
            else:
                cond = conditional_choice_probs(ce[k], prem, phi)
                old = float(cond @ v_sq)
            out += share * w[k] * (new - old)
    return out


def eu_bundling_bound(h, cfg: MenuConfig, nu_grid) -> float:
    """Upper bound on the EU gain from the compound-product construction.

    Disregarding double claims makes the merged product slightly safer
    than the matching diagonal bundle; the bound is the largest CE gap
    between a product and its same-deductible bundle over the grid.
    """
    product = build_auto_product(h, cfg)
    d_ii = [float(d) for d in cfg.comprehensive.deductibles]
    cols = [d_ii.index(float(d)) for d in cfg.collision.deductibles]
    bound = 0.0
    for nu in np.atleast_1d(nu_grid):
        ce_auto = _auto_ce(product, PreferenceType.EU, float(nu))
        ce = bundle_ce_grid(
            cfg, PreferenceType.EU, float(nu), h.x_i, h.x_ii, h.mu_i, h.mu_ii
        )
        diag = np.array([ce[i, c] for i, c in enumerate(cols)])
        bound = max(bound, float(np.max(ce_auto - diag)))
    return bound


def welfare_summary(values) -> dict:
    """Mean and quartiles of a per-household welfare column."""
    v = np.asarray(list(values), dtype=float)
    return {
        "mean": float(v.mean()),
        "q25": float(np.quantile(v, 0.25)),
        "q50": float(np.quantile(v, 0.50)),
        "q75": float(np.quantile(v, 0.75)),
    }
