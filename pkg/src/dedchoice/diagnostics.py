"""Numerical certification of the identification argument.

The central object is a two-sided derivative limit: near a point on the
indifference locus, the jump in the price derivative of the cheapest
bundle's choice probability equals the type share times the coefficient
density times a known combination of consideration probabilities and
cutoff derivatives.  Everything here is evaluated on the cutoff-interval
probability path, which is smooth in prices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .choice_model import ModelParams, choice_prob_derivative
from .consideration import inclusion_prob
from .cutoffs import (
    CutoffQuery,
    OutOfRangeError,
    bundle_cutoff,
    indifference_locus,
    scp_verify,
    triplet_check,
    within_context_cutoff,
)
from .menus import COLLISION, COMPREHENSIVE, Bundle
from .preferences import PreferenceType

MIC_ATOL = 1e-12


class MICViolation(ValueError):
    """Neither minimally-informative-consideration branch holds."""


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    discrepancy: float
    tolerance: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "discrepancy": float(self.discrepancy),
            "tolerance": float(self.tolerance),
            "detail": self.detail,
        }


@dataclass(frozen=True)
class DiagnosticsReport:
    checks: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}

    def table(self) -> str:
        lines = [f"{'check':42s} {'pass':5s} {'discrepancy':>12s} {'tolerance':>10s}"]
        for c in self.checks:
            lines.append(
                f"{c.name:42s} {'ok' if c.passed else 'FAIL':5s}"
                f" {c.discrepancy:12.4g} {c.tolerance:10.3g}"
            )
        return "\n".join(lines)


def _corner_indices(cfg):
    """Flat indices of the four cheap-corner bundles I11, I12, I21, I22."""
    return (
        cfg.flat_index(Bundle(0, 0)),
        cfg.flat_index(Bundle(0, 1)),
        cfg.flat_index(Bundle(1, 0)),
        cfg.flat_index(Bundle(1, 1)),
    )


def classify_mic(mp: ModelParams) -> str:
    """Which branch of minimally informative consideration holds.

    Branch I: the triplets (I11, I22, I21) and (I11, I22, I12) are
    considered together with equal positive probability.  Branch II:
    those probabilities differ and I11, I21 can only be jointly
    considered when I22 and I12 are both out.  Raises MICViolation when
    neither holds.
    """
    i11, i12, i21, i22 = _corner_indices(mp.cfg)
    cp = mp.cons
    o_tri_21 = inclusion_prob([i11, i22, i21], [], cp)
    o_tri_12 = inclusion_prob([i11, i22, i12], [], cp)
    if abs(o_tri_21 - o_tri_12) < MIC_ATOL and o_tri_21 > 0:
        return "I"
    o_pair = inclusion_prob([i11, i21], [], cp)
    o_pair_excl = inclusion_prob([i11, i21], [i22, i12], cp)
    if abs(o_tri_21 - o_tri_12) >= MIC_ATOL and abs(o_pair - o_pair_excl) < MIC_ATOL:
        return "II"
    raise MICViolation(
        "consideration probabilities satisfy neither symmetry (branch I)"
        " nor the exclusion degeneracy (branch II) at the cheap corner"
    )


def _fd(fun, x, step):
    return (fun(x + step) - fun(x - step)) / (2.0 * step)


def _locus_and_bundle(ptype, zeta, mp, mu_i, mu_ii, channel):
    """Locus point and target bundle for a density channel.

    ``channel`` is 'cheapest' (bundle I11, cheapest alternative pairs)
    or 'dearest' (the most expensive bundle and the two most expensive
    alternatives of each context).
    """
    mi, mii = mp.cfg.shape
    if channel == "cheapest":
        pair_i, pair_ii = (0, 1), (0, 1)
        b = Bundle(0, 0)
    elif channel == "dearest":
        pair_i, pair_ii = (mi - 2, mi - 1), (mii - 2, mii - 1)
        b = Bundle(mi - 1, mii - 1)
    else:
        raise ValueError(f"unknown channel {channel!r}")
    locus = indifference_locus(
        zeta, ptype, mu_i, mu_ii, mp.cfg, pair=pair_i, pair_ii=pair_ii
    )
    return locus, b, pair_i, pair_ii


def limit_difference(
    ptype: PreferenceType,
    zeta: float,
    mp: ModelParams,
    mu_i: float,
    mu_ii: float,
    step: float,
    offset: float,
    channel: str = "cheapest",
) -> float:
    """Two-sided derivative jump of the target bundle's choice probability.

    Evaluates the price derivative in the collision base price at the
    two offset points straddling the indifference locus (the context-II
    cutoff above respectively below zeta) and returns their difference.
    """
    if step >= offset:
        raise ValueError("finite-difference step must be below the locus offset")
    locus, b, _, pair_ii = _locus_and_bundle(ptype, zeta, mp, mu_i, mu_ii, channel)

    cut_hi = within_context_cutoff(
        mp.cfg, COMPREHENSIVE, pair_ii[0], pair_ii[1], locus.x_ii + offset, mu_ii, ptype
    )
    # x' is the side where the context-II cutoff exceeds zeta
    sign = 1.0 if cut_hi > zeta else -1.0

    d_prime = choice_prob_derivative(
        b, mp, locus.x_i, locus.x_ii + sign * offset, mu_i, mu_ii, "x_I", step
    )
    d_dblprime = choice_prob_derivative(
        b, mp, locus.x_i, locus.x_ii - sign * offset, mu_i, mu_ii, "x_I", step
    )
    return d_prime - d_dblprime


def h_factor(
    ptype: PreferenceType,
    mp: ModelParams,
    locus,
    mu_i: float,
    mu_ii: float,
    step: float,
) -> float:
    """Consideration-weighted cutoff-derivative combination at the locus.

    h = O({11,21}; {}) dV21 + O({11,22}; {21}) dV22
      - O({11,22}; {12}) dV22 - O({11,21}; {22,12}) dV21
    with all derivatives taken in the collision base price.
    """
    cfg = mp.cfg
    i11, i12, i21, i22 = _corner_indices(cfg)
    cp = mp.cons

    def v21(x):
        return within_context_cutoff(cfg, COLLISION, 0, 1, x, mu_i, ptype)

    def v22(x):
        q = CutoffQuery(
            bundle_a=Bundle(0, 0), bundle_b=Bundle(1, 1), ptype=ptype,
            x_i=x, x_ii=locus.x_ii, mu_i=mu_i, mu_ii=mu_ii,
        )
        return bundle_cutoff(q, cfg)

    dv21 = _fd(v21, locus.x_i, step)
    dv22 = _fd(v22, locus.x_i, step)
    return (
        inclusion_prob([i11, i21], [], cp) * dv21
        + inclusion_prob([i11, i22], [i21], cp) * dv22
        - inclusion_prob([i11, i22], [i12], cp) * dv22
        - inclusion_prob([i11, i21], [i22, i12], cp) * dv21
    )


def theorem1_identity_check(
    nu: float,
    mp: ModelParams,
    mu_i: float,
    mu_ii: float,
    step: float = 1e-4,
    offset: float = 1e-3,
) -> float:
    """Relative discrepancy of the derivative-jump identity at one nu.

    The measured jump should equal alpha f(nu) h; the discrepancy decays
    with the offset because the two evaluation points only merge in the
    limit.  Raises MICViolation when the phi grid supports neither
    branch of the identification argument.
    """
    classify_mic(mp)
    lhs = limit_difference(PreferenceType.EU, nu, mp, mu_i, mu_ii, step, offset)
    locus, _, _, _ = _locus_and_bundle(PreferenceType.EU, nu, mp, mu_i, mu_ii, "cheapest")
    h = h_factor(PreferenceType.EU, mp, locus, mu_i, mu_ii, step)
    rhs = mp.pref.alpha * float(mp.pref.density(PreferenceType.EU, nu)) * h
    if rhs == 0.0:
        raise MICViolation("identity right-hand side degenerates to zero")
    return abs(lhs - rhs) / abs(rhs)


def corollary1_alpha_check(
    mp: ModelParams,
    mu_i: float,
    mu_ii: float,
    n_grid: int = 21,
    margin: float = 0.04,
    step: float = 1e-4,
    offset: float = 1e-3,
) -> float:
    """Recover the EU share from the two measured limit quantities.

    For each type, the derivative jump divided by the known cutoff
    derivative equals (type share) x (density) x (consideration
    constant); integrating over the support removes the density, and
    with type-independent consideration the constants cancel in the
    ratio.  Interior grids suffice when both Beta densities vanish at
    the support endpoints.
    """
    classify_mic(mp)
    totals = {}
    for ptype in PreferenceType:
        lo, hi = mp.pref.support(ptype)
        pad = margin * (hi - lo)
        grid = np.linspace(lo + pad, hi - pad, n_grid)
        vals = []
        for z in grid:
            lhs = limit_difference(ptype, float(z), mp, mu_i, mu_ii, step, offset)
            locus, _, _, _ = _locus_and_bundle(ptype, float(z), mp, mu_i, mu_ii, "cheapest")

            def v21(x):
                return within_context_cutoff(mp.cfg, COLLISION, 0, 1, x, mu_i, ptype)

            dv21 = _fd(v21, locus.x_i, step)
            vals.append(lhs / dv21)
        totals[ptype] = float(np.trapezoid(vals, grid))
    a = totals[PreferenceType.EU]
    b = totals[PreferenceType.DT]
    return a / (a + b)


def density_recovery_cross_check(
    mp: ModelParams,
    nu_grid,
    mu_i: float,
    mu_ii: float,
    step: float = 1e-4,
    offset: float = 1e-3,
) -> float:
    """Max gap between the two normalized density-recovery channels.

    Recovers the EU coefficient density up to scale from the cheapest
    bundle and from the most expensive bundle, normalizes both to unit
    integral on the grid, and reports the largest pointwise difference
    relative to the density scale.
    """
    nu_grid = np.asarray(nu_grid, dtype=float)
    curves = {}
    for channel, pair in (("cheapest", (0, 1)), ("dearest", None)):
        vals = []
        for z in nu_grid:
            lhs = limit_difference(
                PreferenceType.EU, float(z), mp, mu_i, mu_ii, step, offset, channel
            )
            locus, _, pair_i, _ = _locus_and_bundle(
                PreferenceType.EU, float(z), mp, mu_i, mu_ii, channel
            )

            def vcut(x):
                return within_context_cutoff(
                    mp.cfg, COLLISION, pair_i[0], pair_i[1], x, mu_i, PreferenceType.EU
                )

            vals.append(lhs / _fd(vcut, locus.x_i, step))
        vals = np.abs(np.asarray(vals))
        curves[channel] = vals / np.trapezoid(vals, nu_grid)
    gap = np.max(np.abs(curves["cheapest"] - curves["dearest"]))
    scale = np.max(curves["cheapest"])
    return float(gap / scale)


def _distinct_contexts_separation(mp, mu_i, mu_ii, n_grid=12):
    """Smallest locus separation between the two types away from parity.

    At each EU locus point, finds the DT coefficient sharing the same
    collision base price and measures how far the DT comprehensive
    locus coordinate sits from the EU one.  Identical contexts would
    make the loci coincide everywhere.
    """
    lo, hi = mp.pref.support(PreferenceType.EU)
    pad = 0.15 * (hi - lo)
    seps = []
    for nu in np.linspace(lo + pad, hi - pad, n_grid):
        try:
            locus = indifference_locus(float(nu), PreferenceType.EU, mu_i, mu_ii, mp.cfg)
            omega = within_context_cutoff(
                mp.cfg, COLLISION, 0, 1, locus.x_i, mu_i, PreferenceType.DT
            )
            locus_dt = indifference_locus(omega, PreferenceType.DT, mu_i, mu_ii, mp.cfg)
        except (OutOfRangeError, ValueError):
            continue
        seps.append(abs(locus_dt.x_ii - locus.x_ii) / max(1.0, locus.x_ii))
    return float(np.median(seps)) if seps else 0.0


def assumption_battery(mp: ModelParams, mu_grid, x_grid) -> DiagnosticsReport:
    """Run the numerical assumption checks and aggregate pass/fail.

    ``mu_grid`` is an iterable of (mu_I, mu_II) pairs and ``x_grid`` an
    iterable of (x_I, x_II) base price pairs.
    """
    checks = []
    mu_grid = [tuple(m) for m in mu_grid]
    x_grid = [tuple(x) for x in x_grid]

    for context, col in ((COLLISION, 0), (COMPREHENSIVE, 1)):
        for ptype in PreferenceType:
            ok = all(
                triplet_check(mp.cfg, context, x[col], m[col], ptype)
                for m in mu_grid
                for x in x_grid
            )
            checks.append(CheckResult(
                name=f"triplet_{context}_{ptype.value}",
                passed=ok, discrepancy=0.0 if ok else 1.0, tolerance=0.0,
                detail="every alternative optimal somewhere",
            ))

    for context, col in ((COLLISION, 0), (COMPREHENSIVE, 1)):
        for ptype in PreferenceType:
            lo, hi = mp.pref.support(ptype)
            grid = np.linspace(lo + 1e-6, hi - 1e-6, 1200)
            n_viol = 0
            for m in mu_grid:
                for x in x_grid:
                    rep = scp_verify(mp.cfg, context, x[col], m[col], ptype, grid)
                    n_viol += len(rep.violations)
            checks.append(CheckResult(
                name=f"single_crossing_{context}_{ptype.value}",
                passed=n_viol == 0, discrepancy=float(n_viol), tolerance=0.0,
            ))

    mu0 = mu_grid[0]
    sep = _distinct_contexts_separation(mp, mu0[0], mu0[1])
    checks.append(CheckResult(
        name="distinct_contexts_locus_separation",
        passed=sep > 1e-3, discrepancy=sep, tolerance=1e-3,
        detail="median relative gap between type loci",
    ))

    lo, hi = mp.pref.support(PreferenceType.EU)
    pad = 0.05 * (hi - lo)
    coverage_ok = True
    for nu in np.linspace(lo + pad, hi - pad, 8):
        try:
            indifference_locus(float(nu), PreferenceType.EU, mu0[0], mu0[1], mp.cfg)
        except OutOfRangeError:
            coverage_ok = False
    checks.append(CheckResult(
        name="support_coverage_locus",
        passed=coverage_ok, discrepancy=0.0 if coverage_ok else 1.0, tolerance=0.0,
        detail="interior coefficients reachable by base-price variation",
    ))

    try:
        branch = classify_mic(mp)
        checks.append(CheckResult(
            name="mic_branch", passed=True, discrepancy=0.0, tolerance=0.0,
            detail=f"branch {branch}",
        ))
    except MICViolation as exc:
        checks.append(CheckResult(
            name="mic_branch", passed=False, discrepancy=1.0, tolerance=0.0,
            detail=str(exc),
        ))

    return DiagnosticsReport(checks=tuple(checks))
