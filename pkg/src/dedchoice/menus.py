"""Pricing menus, lotteries, and the bundle grid.

Each insurance context (collision, comprehensive) offers a menu of
deductibles whose premiums derive from a single household-specific base
price through agent-invariant multiplicative factors plus a flat expense
fee.  A bundle is one deductible choice per context; bundles are indexed
so that index (0, 0) is the cheapest bundle (highest deductibles).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

COLLISION = "collision"
COMPREHENSIVE = "comprehensive"

DEFAULT_COLLISION_DEDUCTIBLES = (1000, 500, 250, 200, 100)
DEFAULT_COMPREHENSIVE_DEDUCTIBLES = (1000, 500, 250, 200, 100, 50)


@dataclass(frozen=True)
class Lottery:
    """A premium/deductible/claim-probability triple.

    The agent pays ``premium`` for sure and additionally pays
    ``deductible`` with probability ``claim_prob``.
    """

    premium: float
    deductible: float
    claim_prob: float

    def __post_init__(self):
        if not np.isfinite(self.premium) or self.premium < 0:
            raise ValueError(f"premium must be finite and >= 0, got {self.premium}")
        if not self.deductible > 0:
            raise ValueError(f"deductible must be > 0, got {self.deductible}")
        if not 0.0 < self.claim_prob < 1.0:
            raise ValueError(f"claim_prob must lie strictly in (0,1), got {self.claim_prob}")


@dataclass(frozen=True)
class ContextMenu:
    """Deductible list, pricing factors, and expense fee for one context.

    Deductibles are strictly decreasing (more coverage later in the
    list) and factors strictly increasing, so implied premiums
    ``factor * base_price + expense_fee`` strictly increase with
    coverage for any positive base price.
    """

    deductibles: tuple
    factors: tuple
    expense_fee: float

    def __post_init__(self):
        d = np.asarray(self.deductibles, dtype=float)
        g = np.asarray(self.factors, dtype=float)
        if d.size != g.size:
            raise ValueError("deductibles and factors must have equal length")
        if d.size < 2:
            raise ValueError("a context needs at least two alternatives")
        if not np.all(np.diff(d) < 0):
            raise ValueError("deductibles must be strictly decreasing")
        if not (np.all(g > 0) and np.all(np.diff(g) > 0)):
            raise ValueError("factors must be positive and strictly increasing")
        if not self.expense_fee > 0:
            raise ValueError("expense_fee must be > 0")

    @property
    def n_alternatives(self) -> int:
        return len(self.deductibles)

    def premiums(self, base_price):
        """Premium for every alternative at the given base price(s).

        ``base_price`` may be a scalar or array; the alternative axis is
        appended last.
        """
        x = np.asarray(base_price, dtype=float)
        g = np.asarray(self.factors, dtype=float)
        return g * x[..., None] + self.expense_fee

    def to_dict(self) -> dict:
        return {
            "deductibles": [float(d) for d in self.deductibles],
            "factors": [float(g) for g in self.factors],
            "expense_fee": float(self.expense_fee),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ContextMenu":
        return cls(
            deductibles=tuple(d["deductibles"]),
            factors=tuple(d["factors"]),
            expense_fee=float(d["expense_fee"]),
        )


@dataclass(frozen=True)
class Bundle:
    """A pair of menu indices, one per context; (0, 0) is cheapest."""

    idx_i: int
    idx_ii: int

    def __post_init__(self):
        if self.idx_i < 0 or self.idx_ii < 0:
            raise ValueError("bundle indices must be nonnegative")


@dataclass(frozen=True)
class MenuConfig:
    """The two context menus making up the bundle grid."""

    collision: ContextMenu = field()
    comprehensive: ContextMenu = field()

    @property
    def shape(self) -> tuple:
        return (self.collision.n_alternatives, self.comprehensive.n_alternatives)

    @property
    def n_bundles(self) -> int:
        return self.shape[0] * self.shape[1]

    def context(self, name: str) -> ContextMenu:
        if name == COLLISION:
            return self.collision
        if name == COMPREHENSIVE:
            return self.comprehensive
        raise ValueError(f"unknown context {name!r}")

    def flat_index(self, b: Bundle) -> int:
        mi, mii = self.shape
        if not (0 <= b.idx_i < mi and 0 <= b.idx_ii < mii):
            raise ValueError(f"bundle {b} outside {mi}x{mii} grid")
        return b.idx_i * mii + b.idx_ii

    def bundle(self, flat: int) -> Bundle:
        mi, mii = self.shape
        if not 0 <= flat < mi * mii:
            raise ValueError(f"flat index {flat} outside grid")
        return Bundle(flat // mii, flat % mii)

    def bundle_deductibles(self, b: Bundle) -> tuple:
        return (self.collision.deductibles[b.idx_i], self.comprehensive.deductibles[b.idx_ii])

    def bundle_premiums(self, b: Bundle, x_i: float, x_ii: float) -> tuple:
        p_i = self.collision.premiums(x_i)[..., b.idx_i]
        p_ii = self.comprehensive.premiums(x_ii)[..., b.idx_ii]
        return (p_i, p_ii)

    def to_dict(self) -> dict:
        return {COLLISION: self.collision.to_dict(), COMPREHENSIVE: self.comprehensive.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "MenuConfig":
        return cls(
            collision=ContextMenu.from_dict(d[COLLISION]),
            comprehensive=ContextMenu.from_dict(d[COMPREHENSIVE]),
        )


def default_menu() -> MenuConfig:
    """Menu calibrated to the observed average pricing steps.

    At the mean base prices (187, 117) the $500 deductible costs the
    base price itself, moving $500 -> $250 costs about ($56, $31), and
    moving $500 -> $1000 saves about ($42, $23).  The $200 collision
    deductible is deliberately overpriced so that it is never optimal
    under full consideration (dominated by $250 for low risk aversion
    and by $100 for high risk aversion).
    """
    fee_i, fee_ii = 15.0, 10.0
    x_i, x_ii = 187.0, 117.0
    # target premiums at the mean base price, cheapest first
    targets_i = (145.0, 187.0, 243.0, 268.0, 295.0)
    targets_ii = (94.0, 117.0, 148.0, 156.0, 176.0, 189.0)
    collision = ContextMenu(
        deductibles=DEFAULT_COLLISION_DEDUCTIBLES,
        factors=tuple((t - fee_i) / x_i for t in targets_i),
        expense_fee=fee_i,
    )
    comprehensive = ContextMenu(
        deductibles=DEFAULT_COMPREHENSIVE_DEDUCTIBLES,
        factors=tuple((t - fee_ii) / x_ii for t in targets_ii),
        expense_fee=fee_ii,
    )
    return MenuConfig(collision=collision, comprehensive=comprehensive)
