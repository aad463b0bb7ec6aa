"""Bundle-level alternative-specific random consideration (ARC).

Every bundle enters the consideration set independently with its own
probability ``phi``; the cheapest bundle (index (0, 0), the highest
deductible pair) is pinned to probability one so the consideration set
is never empty.  Consideration probabilities are type-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .menus import Bundle, MenuConfig
from .preferences import PreferenceType, bundle_ce_grid


class OverlapError(ValueError):
    """Raised when the required-in and required-out sets intersect."""


@dataclass(frozen=True)
class ConsiderationParams:
    """Per-bundle inclusion probabilities on the (M_I, M_II) grid.

    ``phi`` is stored row-major with rows = collision deductibles
    descending and columns = comprehensive deductibles descending;
    phi[0, 0] must be exactly 1.
    """

    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if phi.ndim != 2:
            raise ValueError("phi must be a 2-d grid")
        if phi[0, 0] != 1.0:
            raise ValueError("the cheapest bundle must be considered with probability 1")
        if np.any(phi < 0.0) or np.any(phi > 1.0):
            raise ValueError("phi entries must lie in [0,1]")
        object.__setattr__(self, "phi", phi)

    @property
    def flat(self) -> np.ndarray:
        return self.phi.reshape(-1)

    @classmethod
    def full(cls, shape) -> "ConsiderationParams":
        return cls(phi=np.ones(shape))

    @classmethod
    def from_flat(cls, values, shape) -> "ConsiderationParams":
        return cls(phi=np.asarray(values, dtype=float).reshape(shape))


def _as_mask(bundles, n: int) -> np.ndarray:
    """Normalize a bundle collection to a boolean mask over flat indices."""
    mask = np.zeros(n, dtype=bool)
    for b in bundles:
        mask[b] = True
    return mask


def set_prob(member_mask, cp: ConsiderationParams) -> float:
    """Probability that the consideration set equals exactly this set.

    ``member_mask`` is a boolean array over the flat bundle grid.  Any
    set excluding the pinned cheapest bundle has probability zero.
    """
    phi = cp.flat
    mask = np.asarray(member_mask, dtype=bool)
    if mask.shape != phi.shape:
        raise ValueError("membership mask does not match the bundle grid")
    if not mask[0]:
        return 0.0
    return float(np.prod(np.where(mask, phi, 1.0 - phi)))


def inclusion_prob(k1, k2, cp: ConsiderationParams) -> float:
    """Probability that all of k1 is considered and none of k2 is.

    k1 and k2 are iterables of flat bundle indices (or boolean masks).
    Under ARC independence this is the product of the phis over k1 times
    the product of (1 - phi) over k2.
    """
    phi = cp.flat
    n = phi.size
    m1 = np.asarray(k1, dtype=bool) if _is_mask(k1, n) else _as_mask(k1, n)
    m2 = np.asarray(k2, dtype=bool) if _is_mask(k2, n) else _as_mask(k2, n)
    if np.any(m1 & m2):
        raise OverlapError("required-in and required-out bundle sets overlap")
    return float(np.prod(phi[m1]) * np.prod(1.0 - phi[m2]))


def _is_mask(obj, n: int) -> bool:
    arr = np.asarray(obj)
    return arr.dtype == bool and arr.shape == (n,)


def sample_set(cp: ConsiderationParams, rng: np.random.Generator, size: int | None = None):
    """Draw consideration sets as boolean masks over the flat grid.

    Each bundle is included independently with its phi; the pinned
    bundle is always in.  With ``size`` given, returns (size, n_bundles).
    """
    phi = cp.flat
    shape = (phi.size,) if size is None else (size, phi.size)
    draws = rng.random(shape) < phi
    draws[..., 0] = True
    return draws


def dominance_set(
    b: Bundle,
    ptype: PreferenceType,
    zeta: float,
    x_i: float,
    x_ii: float,
    mu_i: float,
    mu_ii: float,
    cfg: MenuConfig,
) -> np.ndarray:
    """Boolean mask of bundles with strictly higher bundle CE than ``b``.

    Ties are broken toward the cheaper bundle (lower total premium): a
    bundle with equal CE but lower premium counts as dominating.
    """
    ce = bundle_ce_grid(cfg, ptype, zeta, x_i, x_ii, mu_i, mu_ii).reshape(-1)
    prem = total_premiums(cfg, x_i, x_ii)
    k = cfg.flat_index(b)
    mask = (ce > ce[k]) | ((ce == ce[k]) & (prem < prem[k]))
    mask[k] = False
    return mask


def total_premiums(cfg: MenuConfig, x_i, x_ii) -> np.ndarray:
    """Total premium of every bundle on the flat grid."""
    p_i = cfg.collision.premiums(x_i)
    p_ii = cfg.comprehensive.premiums(x_ii)
    return (p_i[..., :, None] + p_ii[..., None, :]).reshape(
        np.shape(x_i) + (cfg.n_bundles,)
    )
