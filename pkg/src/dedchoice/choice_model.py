"""Model-implied choice probabilities.

Conditional on a preference coefficient the ARC closed form gives the
probability of each bundle exactly: the bundle must be considered and
every strictly dominating bundle not considered.  Integration over the
Beta-distributed coefficients and the two-type mixture uses fixed
Gauss-Legendre nodes reweighted by the Beta density.

Two evaluation paths coexist.  The quadrature path is fast and smooth in
the model parameters, which is what the likelihood needs, but it is a
step function of the base prices (dominance flips only when a cutoff
crosses a node).  The interval path integrates the Beta mass exactly
between the cutoffs of the target bundle against every rival, which is
smooth in prices, so all price derivatives are taken on that path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .consideration import ConsiderationParams, dominance_set, set_prob, total_premiums
from .cutoffs import CutoffQuery, NoCrossingError, scan_bundle_cutoffs
from .menus import Bundle, MenuConfig
from .preferences import (
    NU_SUPPORT,
    OMEGA_SUPPORT,
    PreferenceType,
    bundle_ce_grid,
)

DEFAULT_QUAD_NODES = 64
BRUTEFORCE_MAX_BUNDLES = 12


class SizeError(ValueError):
    """Brute-force enumeration requested on too large a bundle grid."""


@dataclass(frozen=True)
class PreferenceParams:
    """Mixing share and Beta shape pairs of the two coefficient laws.

    ``alpha`` is the population share of the EU type; ``beta_nu`` are
    the shapes of the Beta law of nu on [0, 0.025] and ``beta_omega``
    those of omega on [0, 1].
    """

    alpha: float
    beta_nu: tuple
    beta_omega: tuple

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0,1], got {self.alpha}")
        for name, shapes in (("beta_nu", self.beta_nu), ("beta_omega", self.beta_omega)):
            if len(shapes) != 2 or not all(s > 0 for s in shapes):
                raise ValueError(f"{name} must be a pair of positive shapes")

    def shapes(self, ptype: PreferenceType) -> tuple:
        return self.beta_nu if ptype is PreferenceType.EU else self.beta_omega

    def support(self, ptype: PreferenceType) -> tuple:
        return NU_SUPPORT if ptype is PreferenceType.EU else OMEGA_SUPPORT

    def weight(self, ptype: PreferenceType) -> float:
        return self.alpha if ptype is PreferenceType.EU else 1.0 - self.alpha

    def coefficient_mean(self, ptype: PreferenceType) -> float:
        a, b = self.shapes(ptype)
        lo, hi = self.support(ptype)
        return lo + (hi - lo) * a / (a + b)

    def density(self, ptype: PreferenceType, zeta):
        """Beta density of the coefficient on its own support."""
        a, b = self.shapes(ptype)
        lo, hi = self.support(ptype)
        return stats.beta.pdf((np.asarray(zeta) - lo) / (hi - lo), a, b) / (hi - lo)

    def cdf(self, ptype: PreferenceType, zeta):
        a, b = self.shapes(ptype)
        lo, hi = self.support(ptype)
        return stats.beta.cdf((np.asarray(zeta) - lo) / (hi - lo), a, b)

    def to_dict(self) -> dict:
        return {
            "alpha": float(self.alpha),
            "beta_nu": [float(s) for s in self.beta_nu],
            "beta_omega": [float(s) for s in self.beta_omega],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreferenceParams":
        return cls(
            alpha=float(d["alpha"]),
            beta_nu=tuple(d["beta_nu"]),
            beta_omega=tuple(d["beta_omega"]),
        )


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on the unit interval."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be matching 1-d arrays")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.nodes.size

    @classmethod
    def gauss(cls, n: int = DEFAULT_QUAD_NODES) -> "QuadratureRule":
        x, w = np.polynomial.legendre.leggauss(n)
        return cls(nodes=0.5 * (x + 1.0), weights=0.5 * w)

    def mapped(self, pref: PreferenceParams, ptype: PreferenceType):
        """Coefficient nodes on the type's support and normalized weights.

        Weights are Beta-density reweighted and renormalized to sum to
        one exactly, so constants integrate to 1 without quadrature
        error.
        """
        a, b = pref.shapes(ptype)
        lo, hi = pref.support(ptype)
        zeta = lo + (hi - lo) * self.nodes
        w = self.weights * stats.beta.pdf(self.nodes, a, b)
        total = w.sum()
        if not total > 0:
            raise ValueError("Beta density vanishes at every quadrature node")
        return zeta, w / total


@dataclass(frozen=True)
class ModelParams:
    """Full model: preference mixture, consideration grid, pricing menu."""

    pref: PreferenceParams
    cons: ConsiderationParams
    cfg: MenuConfig = field()

    def __post_init__(self):
        if self.cons.phi.shape != self.cfg.shape:
            raise ValueError(
                f"phi grid {self.cons.phi.shape} does not match menu {self.cfg.shape}"
            )

    def to_dict(self) -> dict:
        return {
            "pref": self.pref.to_dict(),
            "phi": [[float(v) for v in row] for row in self.cons.phi],
            "menu": self.cfg.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(
            pref=PreferenceParams.from_dict(d["pref"]),
            cons=ConsiderationParams(phi=np.asarray(d["phi"], dtype=float)),
            cfg=MenuConfig.from_dict(d["menu"]),
        )


def conditional_choice_probs(
    ce_flat: np.ndarray, prem_flat: np.ndarray, phi_flat: np.ndarray
) -> np.ndarray:
    """ARC choice probability of every bundle given the CE vector.

    ``ce_flat`` has the bundle axis last; leading axes broadcast.  A
    bundle is chosen iff considered and no strictly dominating bundle is
    considered; CE ties count the cheaper bundle (lower total premium)
    as dominating, which makes dominance a strict total order and the
    output sum to the all-considered mass exactly.
    """
    ce = np.asarray(ce_flat, dtype=float)
    prem = np.asarray(prem_flat, dtype=float)
    # dominates[..., j, k]: bundle j strictly dominates bundle k
    dominates = (ce[..., :, None] > ce[..., None, :]) | (
        (ce[..., :, None] == ce[..., None, :]) & (prem[:, None] < prem[None, :])
    )
    survive = np.where(dominates, (1.0 - phi_flat)[..., :, None], 1.0)
    return phi_flat * np.prod(survive, axis=-2)


def choice_prob_given_coeff(
    b: Bundle,
    ptype: PreferenceType,
    zeta: float,
    x_i: float,
    x_ii: float,
    mu_i: float,
    mu_ii: float,
    cp: ConsiderationParams,
    cfg: MenuConfig,
) -> float:
    """Exact ARC choice probability of one bundle at a fixed coefficient."""
    mask = dominance_set(b, ptype, zeta, x_i, x_ii, mu_i, mu_ii, cfg)
    phi = cp.flat
    k = cfg.flat_index(b)
    return float(phi[k] * np.prod(1.0 - phi[mask]))


def choice_prob_all(
    mp: ModelParams,
    x_i: float,
    x_ii: float,
    mu_i: float,
    mu_ii: float,
    quad: QuadratureRule,
) -> np.ndarray:
    """Mixture choice probabilities of every bundle for one household."""
    prem = total_premiums(mp.cfg, x_i, x_ii)
    phi = mp.cons.flat
    out = np.zeros(mp.cfg.n_bundles)
    for ptype in PreferenceType:
        share = mp.pref.weight(ptype)
        if share == 0.0:
            continue
        zeta, w = quad.mapped(mp.pref, ptype)
        ce = bundle_ce_grid(mp.cfg, ptype, zeta, x_i, x_ii, mu_i, mu_ii)
        cond = conditional_choice_probs(ce.reshape(quad.n, -1), prem, phi)
        out += share * (w @ cond)
    return out


def choice_prob(
    b: Bundle,
    mp: ModelParams,
    x_i: float,
    x_ii: float,
    mu_i: float,
    mu_ii: float,
    quad: QuadratureRule,
) -> float:
    """Mixture choice probability of a single bundle."""
    return float(choice_prob_all(mp, x_i, x_ii, mu_i, mu_ii, quad)[mp.cfg.flat_index(b)])


def _enumerate_sets(n: int):
    """All consideration sets containing the pinned bundle, as masks."""
    for bits in itertools.product((False, True), repeat=n - 1):
        mask = np.empty(n, dtype=bool)
        mask[0] = True
        mask[1:] = bits
        yield mask


def bruteforce_given_coeff(
    b: Bundle,
    ptype: PreferenceType,
    zeta: float,
    x_i: float,
    x_ii: float,
    mu_i: float,
    mu_ii: float,
    cp: ConsiderationParams,
    cfg: MenuConfig,
) -> float:
    """Set-enumeration oracle for the conditional choice probability.

    Sums set_prob over every consideration set whose best member (with
    the premium tie-break) is the target bundle.  Exponential in the
    grid size; refuses grids above BRUTEFORCE_MAX_BUNDLES.
    """
    n = cfg.n_bundles
    if n > BRUTEFORCE_MAX_BUNDLES:
        raise SizeError(f"set enumeration on {n} bundles is intractable")
    ce = bundle_ce_grid(cfg, ptype, zeta, x_i, x_ii, mu_i, mu_ii).reshape(-1)
    prem = total_premiums(cfg, x_i, x_ii)
    target = cfg.flat_index(b)
    # lexicographic best: highest CE, then lowest premium
    rank = np.lexsort((prem, -ce))
    total = 0.0
    for mask in _enumerate_sets(n):
        best = rank[mask[rank].argmax()]
        if best == target:
            total += set_prob(mask, cp)
    return total


def _cutoff_breakpoints(
    b: Bundle,
    rivals,
    ptype: PreferenceType,
    x_i: float,
    x_ii: float,
    mu_i: float,
    mu_ii: float,
    cfg: MenuConfig,
) -> np.ndarray:
    """Coefficient values where the dominance set of ``b`` can change."""
    roots = []
    for j in rivals:
        if j == b:
            continue
        q = CutoffQuery(
            bundle_a=b, bundle_b=j, ptype=ptype,
            x_i=x_i, x_ii=x_ii, mu_i=mu_i, mu_ii=mu_ii,
        )
        try:
            roots.extend(scan_bundle_cutoffs(q, cfg))
        except NoCrossingError:
            continue
    return np.asarray(sorted(roots))


def choice_prob_interval(
    b: Bundle,
    mp: ModelParams,
    x_i: float,
    x_ii: float,
    mu_i: float,
    mu_ii: float,
) -> float:
    """Choice probability by exact Beta-mass integration between cutoffs.

    The conditional probability of ``b`` is piecewise constant in the
    coefficient, jumping only at indifference points between ``b`` and a
    rival, so the integral is a finite sum of interval masses.  Unlike
    the quadrature path this is smooth in the base prices.
    """
    phi = mp.cons.flat
    k = mp.cfg.flat_index(b)
    all_bundles = [mp.cfg.bundle(i) for i in range(mp.cfg.n_bundles)]
    out = 0.0
    for ptype in PreferenceType:
        share = mp.pref.weight(ptype)
        if share == 0.0:
            continue
        lo, hi = mp.pref.support(ptype)
        cuts = _cutoff_breakpoints(b, all_bundles, ptype, x_i, x_ii, mu_i, mu_ii, mp.cfg)
        cuts = cuts[(cuts > lo) & (cuts < hi)]
        edges = np.concatenate(([lo], cuts, [hi]))
        cdf = mp.pref.cdf(ptype, edges)
        acc = 0.0
        for a, c, mass in zip(edges[:-1], edges[1:], np.diff(cdf)):
            if mass <= 0.0:
                continue
            mid = 0.5 * (a + c)
            mask = dominance_set(b, ptype, mid, x_i, x_ii, mu_i, mu_ii, mp.cfg)
            acc += mass * phi[k] * np.prod(1.0 - phi[mask])
        out += share * acc
    return float(out)


def choice_prob_bruteforce(
    b: Bundle,
    mp: ModelParams,
    x_i: float,
    x_ii: float,
    mu_i: float,
    mu_ii: float,
    n_grid: int = 10_000,
) -> float:
    """Test oracle: exact set enumeration, cutoff-aware coefficient grid.

    The conditional probability is constant between adjacent pair
    cutoffs, so integrating set-enumeration values at interval midpoints
    against exact Beta interval masses is exact up to root tolerance.
    ``n_grid`` caps the refinement used when a support interval is wide.
    """
    if mp.cfg.n_bundles > BRUTEFORCE_MAX_BUNDLES:
        raise SizeError(f"set enumeration on {mp.cfg.n_bundles} bundles is intractable")
    all_bundles = [mp.cfg.bundle(i) for i in range(mp.cfg.n_bundles)]
    out = 0.0
    for ptype in PreferenceType:
        share = mp.pref.weight(ptype)
        if share == 0.0:
            continue
        lo, hi = mp.pref.support(ptype)
        # breakpoints of every pair, not just pairs involving b: the
        # argmax of an arbitrary set can flip at any pair cutoff
        roots = []
        for a_b, b_b in itertools.combinations(all_bundles, 2):
            q = CutoffQuery(
                bundle_a=a_b, bundle_b=b_b, ptype=ptype,
                x_i=x_i, x_ii=x_ii, mu_i=mu_i, mu_ii=mu_ii,
            )
            try:
                roots.extend(scan_bundle_cutoffs(q, cfg=mp.cfg))
            except NoCrossingError:
                continue
        cuts = np.asarray(sorted(r for r in roots if lo < r < hi))
        edges = np.concatenate(([lo], cuts, [hi]))
        cdf = mp.pref.cdf(ptype, edges)
        acc = 0.0
        for a, c, mass in zip(edges[:-1], edges[1:], np.diff(cdf)):
            if mass <= 0.0:
                continue
            mid = 0.5 * (a + c)
            acc += mass * bruteforce_given_coeff(
                b, ptype, mid, x_i, x_ii, mu_i, mu_ii, mp.cons, mp.cfg
            )
        out += share * acc
    return float(out)


def choice_prob_derivative(
    b: Bundle,
    mp: ModelParams,
    x_i: float,
    x_ii: float,
    mu_i: float,
    mu_ii: float,
    wrt: str,
    step: float,
) -> float:
    """Central finite difference of the choice probability in a base price.

    Taken on the interval path: the quadrature approximation is a step
    function of prices (dominance at a fixed node flips discretely), so
    differencing it would return zeros and spikes.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if wrt == "x_I":
        hi = choice_prob_interval(b, mp, x_i + step, x_ii, mu_i, mu_ii)
        lo = choice_prob_interval(b, mp, x_i - step, x_ii, mu_i, mu_ii)
    elif wrt == "x_II":
        hi = choice_prob_interval(b, mp, x_i, x_ii + step, mu_i, mu_ii)
        lo = choice_prob_interval(b, mp, x_i, x_ii - step, mu_i, mu_ii)
    else:
        raise ValueError(f"wrt must be 'x_I' or 'x_II', got {wrt!r}")
    return (hi - lo) / (2.0 * step)
