"""Synthetic populations and choice simulation.

Base prices are correlated lognormals and claim probabilities are
independent lognormals clipped away from 0 and 1; defaults are
calibrated so the $500-deductible premium means and the claim
probability means match the observed descriptives.  Choices can be
simulated under the full ARC model or under restricted consideration
regimes (full, narrow, triangular) for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .choice_model import ModelParams, PreferenceParams
from .consideration import ConsiderationParams, total_premiums
from .menus import Bundle, MenuConfig, default_menu
from .preferences import PreferenceType, bundle_ce_grid

REGIMES = ("broad", "narrow", "triangular", "full")

CLAIM_PROB_CLIP = (0.001, 0.5)


@dataclass(frozen=True)
class PopulationConfig:
    """Sampling law of household observables."""

    n: int
    price_means: tuple = (187.0, 117.0)
    price_dispersion: tuple = (0.52, 0.66)
    price_corr: float = 0.74
    claim_means: tuple = (0.081, 0.023)
    claim_dispersion: tuple = (0.31, 0.50)
    price_claim_corr: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("population size must be positive")
        if not -1.0 <= self.price_corr <= 1.0:
            raise ValueError("price_corr must lie in [-1,1]")
        if not -1.0 <= self.price_claim_corr <= 1.0:
            raise ValueError("price_claim_corr must lie in [-1,1]")
        for name, pair in (
            ("price_means", self.price_means),
            ("price_dispersion", self.price_dispersion),
            ("claim_means", self.claim_means),
            ("claim_dispersion", self.claim_dispersion),
        ):
            if len(pair) != 2 or not all(v > 0 for v in pair):
                raise ValueError(f"{name} must be a pair of positive values")

    def to_dict(self) -> dict:
        return {
            "n": int(self.n),
            "price_means": list(self.price_means),
            "price_dispersion": list(self.price_dispersion),
            "price_corr": float(self.price_corr),
            "claim_means": list(self.claim_means),
            "claim_dispersion": list(self.claim_dispersion),
            "price_claim_corr": float(self.price_claim_corr),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PopulationConfig":
        return cls(
            n=int(d["n"]),
            price_means=tuple(d.get("price_means", (187.0, 117.0))),
            price_dispersion=tuple(d.get("price_dispersion", (0.52, 0.66))),
            price_corr=float(d.get("price_corr", 0.74)),
            claim_means=tuple(d.get("claim_means", (0.081, 0.023))),
            claim_dispersion=tuple(d.get("claim_dispersion", (0.31, 0.50))),
            price_claim_corr=float(d.get("price_claim_corr", 0.0)),
            seed=int(d.get("seed", 0)),
        )


@dataclass(frozen=True)
class Household:
    """One observation: prices, claim probabilities, optional choice."""

    id: int
    x_i: float
    x_ii: float
    mu_i: float
    mu_ii: float
    choice: Bundle | None = None

    def __post_init__(self):
        if not (self.x_i > 0 and self.x_ii > 0):
            raise ValueError("base prices must be positive")
        if not (0.0 < self.mu_i < 1.0 and 0.0 < self.mu_ii < 1.0):
            raise ValueError("claim probabilities must lie strictly in (0,1)")


def household_arrays(pop) -> dict:
    """Column arrays of a household list, ordered by id."""
    pop = sorted(pop, key=lambda h: h.id)
    out = {
        "id": np.array([h.id for h in pop], dtype=np.int64),
        "x_i": np.array([h.x_i for h in pop]),
        "x_ii": np.array([h.x_ii for h in pop]),
        "mu_i": np.array([h.mu_i for h in pop]),
        "mu_ii": np.array([h.mu_ii for h in pop]),
    }
    if all(h.choice is not None for h in pop):
        out["choice_i"] = np.array([h.choice.idx_i for h in pop], dtype=np.int64)
        out["choice_ii"] = np.array([h.choice.idx_ii for h in pop], dtype=np.int64)
    return out


def _rng(seed: int) -> np.random.Generator:
    # counter-based bit generator: cheap independent streams by key
    return np.random.Generator(np.random.Philox(seed))


def _lognormal_with_mean(rng, mean, sigma, z=None):
    """Lognormal draws with the requested arithmetic mean."""
    mu_log = np.log(mean) - 0.5 * sigma**2
    if z is None:
        z = rng.standard_normal(1)
    return np.exp(mu_log + sigma * z)


def gen_population(pc: PopulationConfig) -> list:
    """Draw a synthetic population of households.

    Base prices across contexts share a Gaussian copula with the
    configured correlation; claim probabilities are independent unless
    price_claim_corr couples each context's claim draw to its price
    draw.
    """
    rng = _rng(pc.seed)
    n = pc.n
    rho = pc.price_corr
    z1 = rng.standard_normal(n)
    z2 = rho * z1 + np.sqrt(max(0.0, 1.0 - rho**2)) * rng.standard_normal(n)
    x_i = _lognormal_with_mean(rng, pc.price_means[0], pc.price_dispersion[0], z1)
    x_ii = _lognormal_with_mean(rng, pc.price_means[1], pc.price_dispersion[1], z2)

    rpc = pc.price_claim_corr
    w1 = rpc * z1 + np.sqrt(max(0.0, 1.0 - rpc**2)) * rng.standard_normal(n)
    w2 = rpc * z2 + np.sqrt(max(0.0, 1.0 - rpc**2)) * rng.standard_normal(n)
    mu_i = _lognormal_with_mean(rng, pc.claim_means[0], pc.claim_dispersion[0], w1)
    mu_ii = _lognormal_with_mean(rng, pc.claim_means[1], pc.claim_dispersion[1], w2)
    mu_i = np.clip(mu_i, *CLAIM_PROB_CLIP)
    mu_ii = np.clip(mu_ii, *CLAIM_PROB_CLIP)

    return [
        Household(id=i, x_i=float(x_i[i]), x_ii=float(x_ii[i]),
                  mu_i=float(mu_i[i]), mu_ii=float(mu_ii[i]))
        for i in range(n)
    ]


def triangular_phi(cfg: MenuConfig) -> np.ndarray:
    """Deterministic grid: consider iff collision deductible >= comprehensive."""
    d_i = np.asarray(cfg.collision.deductibles, dtype=float)
    d_ii = np.asarray(cfg.comprehensive.deductibles, dtype=float)
    return (d_i[:, None] >= d_ii[None, :]).astype(float)


def narrow_marginals(cp: ConsiderationParams) -> tuple:
    """Per-context consideration marginals implied by the bundle grid.

    Under ARC the probability that collision deductible l appears in at
    least one considered bundle is 1 - prod_q (1 - phi(l, q)); the
    cheapest alternative of each context stays pinned to 1.
    """
    phi = cp.phi
    p_i = 1.0 - np.prod(1.0 - phi, axis=1)
    p_ii = 1.0 - np.prod(1.0 - phi, axis=0)
    p_i[0] = 1.0
    p_ii[0] = 1.0
    return p_i, p_ii


def _consideration_masks(regime, mp, n, rng):
    """(n, n_bundles) boolean masks of considered bundles."""
    mi, mii = mp.cfg.shape
    if regime == "full":
        return np.ones((n, mi * mii), dtype=bool)
    if regime == "broad":
        phi = mp.cons.flat
    elif regime == "triangular":
        phi = triangular_phi(mp.cfg).reshape(-1)
    elif regime == "narrow":
        p_i, p_ii = narrow_marginals(mp.cons)
        m_i = rng.random((n, mi)) < p_i
        m_ii = rng.random((n, mii)) < p_ii
        m_i[:, 0] = True
        m_ii[:, 0] = True
        return (m_i[:, :, None] & m_ii[:, None, :]).reshape(n, -1)
    else:
        raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    mask = rng.random((n, phi.size)) < phi
    mask[:, 0] = True
    return mask


def simulate_choices(pop, mp: ModelParams, regime: str, seed: int) -> list:
    """Assign each household its simulated bundle choice.

    Draws preference type, coefficient, and consideration set, then
    picks the considered bundle with the highest certainty equivalent
    (ties toward the lower total premium).  Returns a new household
    list; the input is not mutated.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    cols = household_arrays(pop)
    n = cols["id"].size
    rng = _rng(seed)

    is_eu = rng.random(n) < mp.pref.alpha
    a_n, b_n = mp.pref.beta_nu
    a_o, b_o = mp.pref.beta_omega
    lo_n, hi_n = mp.pref.support(PreferenceType.EU)
    lo_o, hi_o = mp.pref.support(PreferenceType.DT)
    nu = lo_n + (hi_n - lo_n) * rng.beta(a_n, b_n, n)
    omega = lo_o + (hi_o - lo_o) * rng.beta(a_o, b_o, n)

    masks = _consideration_masks(regime, mp, n, rng)

    ce = np.empty((n, mp.cfg.n_bundles))
    for ptype, sel, zeta in (
        (PreferenceType.EU, is_eu, nu),
        (PreferenceType.DT, ~is_eu, omega),
    ):
        if not np.any(sel):
            continue
        ce[sel] = bundle_ce_grid(
            mp.cfg, ptype, zeta[sel],
            cols["x_i"][sel], cols["x_ii"][sel],
            cols["mu_i"][sel], cols["mu_ii"][sel],
        ).reshape(int(sel.sum()), -1)

    prem = total_premiums(mp.cfg, cols["x_i"], cols["x_ii"])
    ce_masked = np.where(masks, ce, -np.inf)
    # argmax with premium tie-break: sort by (-ce, premium) and take the head
    order = np.lexsort((prem, -ce_masked), axis=-1)
    best = order[:, 0]

    out = []
    pop_sorted = sorted(pop, key=lambda h: h.id)
    for h, flat in zip(pop_sorted, best):
        out.append(replace(h, choice=mp.cfg.bundle(int(flat))))
    return out


def synthetic_truth(cfg: MenuConfig | None = None) -> ModelParams:
    """Reference generating parameters for synthetic experiments.

    Mixture share 0.46; consideration grid occupies the lower triangle
    (collision deductible >= comprehensive), densest on the diagonal,
    with all strictly upper-triangle bundles at zero.  Requires the
    default 5x6 menu shape.
    """
    if cfg is None:
        cfg = default_menu()
    if cfg.shape != (5, 6):
        raise ValueError("the reference truth is defined on the 5x6 menu")
    phi = np.array([
        [1.00, 0.47, 0.07, 0.18, 0.03, 0.04],
        [0.00, 0.83, 0.18, 0.46, 0.06, 0.13],
        [0.00, 0.00, 0.09, 0.08, 0.03, 0.04],
        [0.00, 0.00, 0.00, 0.29, 0.04, 0.12],
        [0.00, 0.00, 0.00, 0.00, 0.01, 0.05],
    ])
    return ModelParams(
        pref=PreferenceParams(alpha=0.46, beta_nu=(2.0, 4.0), beta_omega=(2.0, 3.0)),
        cons=ConsiderationParams(phi=phi),
        cfg=cfg,
    )


def simulated_shares(pop) -> np.ndarray:
    """Empirical joint choice frequencies on the (M_I, M_II) grid."""
    pop = list(pop)
    if any(h.choice is None for h in pop):
        raise ValueError("population has unsimulated households")
    mi = 1 + max(h.choice.idx_i for h in pop)
    mii = 1 + max(h.choice.idx_ii for h in pop)
    counts = np.zeros((mi, mii))
    for h in pop:
        counts[h.choice.idx_i, h.choice.idx_ii] += 1
    return counts / counts.sum()
