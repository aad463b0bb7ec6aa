"""Indifference cutoffs in the risk parameter and indifference loci.

Within a context the single crossing property makes the indifference
point between two alternatives unique; across bundles uniqueness is
guaranteed only when the cheapest (or the most expensive) bundle is one
side of the comparison, so generic bundle pairs are scanned for multiple
crossings before refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .menus import COLLISION, MenuConfig
from .preferences import (
    NU_SUPPORT,
    OMEGA_SUPPORT,
    PreferenceType,
    bundle_ce_grid,
    ce_dt,
    ce_eu,
    prelec_inverse,
)

# tight enough that root placement error stays far below the
# finite-difference signals taken on cutoff-interval probabilities
ZETA_TOL = 1e-13
PRICE_TOL = 1e-6
SCAN_POINTS = 2048
SUPPORT_EXTENSION = 0.2

# within-context EU cutoffs are root-found on this bracket, wider than
# the Beta support: cutoffs beyond the support carry no density mass
# but still order the alternatives
EU_EVAL_RANGE = (-0.03, 0.3)


class NoCrossingError(ValueError):
    """The CE difference has constant sign on the search range."""


class MultipleCrossingsError(ValueError):
    """More than one indifference point exists on the scan grid."""

    def __init__(self, roots):
        super().__init__(f"multiple indifference points found: {roots}")
        self.roots = list(roots)


class OutOfRangeError(ValueError):
    """No base price in the admissible range attains the target cutoff."""


@dataclass(frozen=True)
class CutoffQuery:
    """Inputs for a bundle-versus-bundle cutoff computation."""

    bundle_a: object
    bundle_b: object
    ptype: PreferenceType
    x_i: float
    x_ii: float
    mu_i: float
    mu_ii: float

    def __post_init__(self):
        if self.bundle_a == self.bundle_b:
            raise ValueError("cutoff query needs two distinct bundles")


@dataclass(frozen=True)
class IndifferenceLocusPoint:
    """Base prices at which both within-context cheapest-pair cutoffs equal zeta."""

    zeta: float
    x_i: float
    x_ii: float
    ptype: PreferenceType


def zeta_support(ptype: PreferenceType) -> tuple:
    return NU_SUPPORT if ptype is PreferenceType.EU else OMEGA_SUPPORT


def zeta_scan_range(ptype: PreferenceType, extension: float = SUPPORT_EXTENSION) -> tuple:
    lo, hi = zeta_support(ptype)
    pad = extension * (hi - lo)
    return (lo - pad, hi + pad)


def _bisect(f, lo, hi, flo, fhi, tol):
    """Plain bisection; the bracket must already straddle a sign change."""
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (flo < 0.0) == (fm < 0.0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return 0.5 * (lo + hi)


def within_context_cutoff(
    cfg: MenuConfig,
    context: str,
    ell: int,
    k: int,
    x: float,
    mu: float,
    ptype: PreferenceType,
) -> float:
    """Risk parameter at which alternatives ``ell`` and ``k`` are tied.

    ``ell < k`` (ell is the cheaper, higher-deductible alternative).
    For DT the indifference condition is linear in the distorted
    probability and inverted in closed form; for EU the CE difference is
    root-found by bracketed bisection over the scan range.

    Raises NoCrossingError when the CE difference keeps one sign on the
    whole scan range (a dominated alternative at this base price).
    """
    menu = cfg.context(context)
    if not 0 <= ell < k < menu.n_alternatives:
        raise ValueError("need alternative indices ell < k within the menu")
    prem = menu.premiums(x)
    d_ell, d_k = menu.deductibles[ell], menu.deductibles[k]
    dx = prem[k] - prem[ell]
    dd = d_ell - d_k
    if dd <= 0:
        raise ValueError("degenerate pair: deductibles must differ")
    if ptype is PreferenceType.DT:
        target = dx / dd
        if not 0.0 < target < 1.0:
            raise NoCrossingError(
                f"distorted-probability target {target:.6g} outside (0,1)"
            )
        return prelec_inverse(target, mu)

    def diff(nu):
        return ce_eu(prem[ell], d_ell, mu, nu) - ce_eu(prem[k], d_k, mu, nu)

    lo, hi = EU_EVAL_RANGE
    flo, fhi = diff(lo), diff(hi)
    if flo == 0.0 and fhi == 0.0:
        raise NoCrossingError("CE difference vanishes identically")
    if (flo < 0.0) == (fhi < 0.0):
        raise NoCrossingError(
            f"CE difference keeps sign {np.sign(flo):+.0f} on [{lo}, {hi}]"
        )
    return _bisect(diff, lo, hi, flo, fhi, ZETA_TOL)


def scan_bundle_cutoffs(q: CutoffQuery, cfg: MenuConfig, n_scan: int = SCAN_POINTS):
    """All roots of the bundle-CE difference on the extended scan grid."""
    ia = cfg.flat_index(q.bundle_a)
    ib = cfg.flat_index(q.bundle_b)

    def diff(z):
        ce = bundle_ce_grid(
            cfg, q.ptype, np.asarray(z), q.x_i, q.x_ii, q.mu_i, q.mu_ii
        ).reshape(np.shape(z) + (cfg.n_bundles,))
        return ce[..., ia] - ce[..., ib]

    lo, hi = zeta_scan_range(q.ptype)
    grid = np.linspace(lo, hi, n_scan)
    vals = diff(grid)
    if np.all(np.abs(vals) < 1e-12):
        raise NoCrossingError("bundles are payoff-identical (degenerate input)")
    sign = np.sign(vals)
    # treat exact zeros as belonging to the left sign
    nonzero = sign != 0
    sign = np.where(nonzero, sign, np.maximum.accumulate(np.where(nonzero, sign, -2)))
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    scalar_diff = lambda z: float(diff(float(z)))
    roots = [
        _bisect(scalar_diff, grid[i], grid[i + 1], float(vals[i]), float(vals[i + 1]), ZETA_TOL)
        for i in flips
    ]
    return roots


def bundle_cutoff(q: CutoffQuery, cfg: MenuConfig) -> float:
    """Unique indifference point between two bundles.

    Uniqueness holds whenever the cheapest bundle is one of the pair;
    generic pairs may cross more than once, in which case
    MultipleCrossingsError carries all located roots.
    """
    roots = scan_bundle_cutoffs(q, cfg)
    if not roots:
        raise NoCrossingError("bundle CE difference keeps one sign on the scan range")
    if len(roots) > 1:
        raise MultipleCrossingsError(roots)
    return roots[0]


def _cutoff_position(cfg, context, ell, k, x, mu, ptype):
    """Cutoff value, mapping NoCrossing onto +/- infinity by sign."""
    try:
        return within_context_cutoff(cfg, context, ell, k, x, mu, ptype)
    except NoCrossingError:
        menu = cfg.context(context)
        prem = menu.premiums(x)
        lo = EU_EVAL_RANGE[0] if ptype is PreferenceType.EU else zeta_scan_range(ptype)[0]
        if ptype is PreferenceType.EU:
            f = ce_eu(prem[ell], menu.deductibles[ell], mu, lo) - ce_eu(
                prem[k], menu.deductibles[k], mu, lo
            )
        else:
            f = ce_dt(prem[ell], menu.deductibles[ell], mu, lo) - ce_dt(
                prem[k], menu.deductibles[k], mu, lo
            )
        # the cheap-minus-expensive CE difference is monotone in the
        # coefficient: decreasing for EU (and DT with mu > 1/e), but
        # increasing for DT with mu < 1/e where the distortion falls in
        # omega; the missing crossing sits on the shrinking side
        increasing = ptype is PreferenceType.DT and mu < np.exp(-1.0)
        if increasing:
            return -np.inf if f > 0 else np.inf
        return np.inf if f > 0 else -np.inf


def indifference_locus(
    zeta: float,
    ptype: PreferenceType,
    mu_i: float,
    mu_ii: float,
    cfg: MenuConfig,
    x_max: float = 5000.0,
    pair: tuple = (0, 1),
    pair_ii: tuple | None = None,
) -> IndifferenceLocusPoint:
    """Base prices making a fixed alternative pair tie in both contexts.

    With the default pair (0, 1) this is the locus of Definition-1 type:
    indifference between the two cheapest alternatives of each context.
    Other pairs (e.g. the two most expensive alternatives) support the
    density-recovery channel at the opposite corner of the grid.  Solved
    for the base price by bisection to PRICE_TOL dollars.
    """
    if pair_ii is None:
        pair_ii = pair
    xs = []
    for context, mu, (ell, k) in (
        (COLLISION, mu_i, pair),
        ("comprehensive", mu_ii, pair_ii),
    ):

        def h(x, ell=ell, k=k):
            return _cutoff_position(cfg, context, ell, k, x, mu, ptype) - zeta

        lo, hi = 1e-9 * x_max, x_max
        flo, fhi = h(lo), h(hi)
        if not np.isfinite(flo):
            flo = np.sign(flo)
        if not np.isfinite(fhi):
            fhi = np.sign(fhi)
        if flo == 0.0:
            xs.append(lo)
            continue
        if fhi == 0.0:
            xs.append(hi)
            continue
        if (flo < 0.0) == (fhi < 0.0):
            raise OutOfRangeError(
                f"no base price in (0, {x_max}] attains cutoff {zeta} in {context}"
            )
        xs.append(_bisect(h, lo, hi, flo, fhi, PRICE_TOL))
    return IndifferenceLocusPoint(zeta=zeta, x_i=xs[0], x_ii=xs[1], ptype=ptype)


@dataclass(frozen=True)
class ScpReport:
    """Outcome of a single-crossing scan for one context."""

    passed: bool
    violations: list


def scp_verify(
    cfg: MenuConfig,
    context: str,
    x: float,
    mu: float,
    ptype: PreferenceType,
    zeta_grid: np.ndarray,
) -> ScpReport:
    """Check at most one sign change of every pairwise CE difference.

    The grid must have at least 1000 points spanning the support.
    """
    zeta_grid = np.asarray(zeta_grid, dtype=float)
    if zeta_grid.size < 1000:
        raise ValueError("single-crossing scan needs a grid of >= 1000 points")
    menu = cfg.context(context)
    prem = menu.premiums(x)
    d = np.asarray(menu.deductibles, dtype=float)
    if np.any(np.abs(np.diff(d)) < 1e-12):
        raise ValueError("degenerate menu: repeated deductibles")
    if ptype is PreferenceType.EU:
        ce = ce_eu(prem, d, mu, zeta_grid[:, None])
    else:
        ce = ce_dt(prem, d, mu, zeta_grid[:, None])
    violations = []
    m = menu.n_alternatives
    for ell in range(m):
        for k in range(ell + 1, m):
            diff = ce[:, ell] - ce[:, k]
            sign = np.sign(diff)
            sign = sign[sign != 0]
            changes = int(np.sum(sign[:-1] * sign[1:] < 0))
            if changes > 1:
                violations.append((ell, k, changes))
    return ScpReport(passed=not violations, violations=violations)


def triplet_check(
    cfg: MenuConfig, context: str, x: float, mu: float, ptype: PreferenceType
) -> bool:
    """Does every alternative win somewhere on the risk-parameter line?

    Under single crossing, alternative k is uniquely optimal on the
    interval between the adjacent cutoffs (k-1 vs k) and (k vs k+1), so
    every alternative wins somewhere iff the adjacent-pair cutoff chain
    is finite and strictly ordered in the direction in which demand for
    coverage rises (increasing in nu for EU; for DT the distortion falls
    in omega when mu < 1/e, so the chain runs the other way).  The chain
    of cheapest-versus-k cutoffs being ordered is necessary but not
    sufficient: an overpriced middle deductible can keep that chain
    increasing while never being optimal itself.
    """
    menu = cfg.context(context)
    cuts = [
        _cutoff_position(cfg, context, k - 1, k, x, mu, ptype)
        for k in range(1, menu.n_alternatives)
    ]
    if not all(np.isfinite(c) for c in cuts):
        return False
    direction = 1.0
    if ptype is PreferenceType.DT and mu < np.exp(-1.0):
        direction = -1.0
    ordered = np.asarray(cuts) * direction
    return bool(np.all(np.diff(ordered) > 0))
