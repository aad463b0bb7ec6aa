"""Preference functional forms and certainty equivalents.

Two preference types are supported: expected utility with CARA Bernoulli
utility (risk parameter ``nu``) and Yaari dual theory with a Prelec
probability distortion (parameter ``omega``).  Wealth is normalized to
zero throughout: CARA makes choices wealth-independent and dual-theory
utility is affine in wealth, so the normalization is harmless for
choices and certainty-equivalent differences.

All certainty equivalents are reported on the cost side (nonpositive
money) and every operation is pure and vectorized over numpy inputs.
"""

from __future__ import annotations

import enum

import numpy as np

from .menus import Bundle, Lottery, MenuConfig

# below this |nu| the CARA branch switches to its linear (risk-neutral)
# limit to avoid catastrophic cancellation
NU_LINEAR_SWITCH = 1e-9

# estimation supports of the random coefficients
NU_SUPPORT = (0.0, 0.025)
OMEGA_SUPPORT = (0.0, 1.0)


class PreferenceType(enum.Enum):
    EU = "EU"
    DT = "DT"


def cara_utility(y, nu):
    """CARA utility (1 - exp(-nu*y)) / nu, with u(y) = y at nu = 0."""
    y = np.asarray(y, dtype=float)
    nu = np.asarray(nu, dtype=float)
    linear = np.abs(nu) < NU_LINEAR_SWITCH
    nu_safe = np.where(linear, 1.0, nu)
    out = np.where(linear, y, -np.expm1(-nu_safe * y) / nu_safe)
    return out if out.ndim else float(out)


def prelec(mu, omega):
    """Prelec probability distortion exp(-(-ln mu)^omega).

    Identity at omega = 1, fixed point at mu = 1/e for every omega.
    Raises ValueError when mu is outside (0, 1).
    """
    mu = np.asarray(mu, dtype=float)
    if np.any(mu <= 0.0) or np.any(mu >= 1.0):
        raise ValueError("prelec requires mu strictly inside (0,1)")
    omega = np.asarray(omega, dtype=float)
    out = np.exp(-((-np.log(mu)) ** omega))
    # exact identity at omega = 1: exp(log(mu)) need not round-trip in floats
    out = np.where(omega == 1.0, mu, out)
    return out if out.ndim else float(out)


def prelec_inverse(p, mu):
    """The omega at which the Prelec distortion of ``mu`` equals ``p``.

    Undefined at mu = 1/e (the distortion is constant there).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("target distorted probability must lie in (0,1)")
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie strictly in (0,1)")
    denom = np.log(-np.log(mu))
    if denom == 0.0:
        raise ValueError("prelec distortion is constant in omega at mu = 1/e")
    return float(np.log(-np.log(p)) / denom)


def ce_eu(premium, deductible, claim_prob, nu):
    """Certainty equivalent of a deductible lottery under EU-CARA.

    Closed form -x - ln(1 - mu + mu*exp(nu*d)) / nu for nu != 0 and the
    net-present-value limit -x - mu*d at nu = 0.  Evaluated via shifted
    exponentials so large nu*(x+d) cannot overflow.
    """
    x = np.asarray(premium, dtype=float)
    d = np.asarray(deductible, dtype=float)
    mu = np.asarray(claim_prob, dtype=float)
    nu = np.asarray(nu, dtype=float)
    linear = np.abs(nu) < NU_LINEAR_SWITCH
    nu_safe = np.where(linear, 1.0, nu)
    # log((1-mu) + mu*exp(nu*d)) without forming exp(nu*(x+d))
    log_mix = np.logaddexp(np.log1p(-mu), np.log(mu) + nu_safe * d)
    out = np.where(linear, -x - mu * d, -x - log_mix / nu_safe)
    return out if out.ndim else float(out)


def ce_dt(premium, deductible, claim_prob, omega):
    """Certainty equivalent under dual theory: -x - Omega(mu)*d."""
    x = np.asarray(premium, dtype=float)
    d = np.asarray(deductible, dtype=float)
    out = -x - prelec(claim_prob, omega) * d
    return out if out.ndim else float(out)


def ce_lottery(lot: Lottery, ptype: PreferenceType, zeta):
    """Certainty equivalent of a Lottery for either preference type."""
    if ptype is PreferenceType.EU:
        return ce_eu(lot.premium, lot.deductible, lot.claim_prob, zeta)
    return ce_dt(lot.premium, lot.deductible, lot.claim_prob, zeta)


def context_ce_grid(menu, base_price, claim_prob, ptype: PreferenceType, zeta):
    """CEs of every alternative in one context menu.

    Broadcasts over ``base_price``/``claim_prob``/``zeta``; the
    alternative axis comes last.
    """
    x = menu.premiums(base_price)  # (..., M)
    d = np.asarray(menu.deductibles, dtype=float)
    mu = np.asarray(claim_prob, dtype=float)[..., None]
    z = np.asarray(zeta, dtype=float)[..., None]
    if ptype is PreferenceType.EU:
        return ce_eu(x, d, mu, z)
    return ce_dt(x, d, mu, z)


def bundle_ce_grid(cfg: MenuConfig, ptype: PreferenceType, zeta, x_i, x_ii, mu_i, mu_ii):
    """CE of every bundle under narrow bracketing (sum of context CEs).

    Returns an array with trailing shape (M_I, M_II) after any broadcast
    leading dimensions of the scalar/array inputs.
    """
    ce_i = context_ce_grid(cfg.collision, x_i, mu_i, ptype, zeta)
    ce_ii = context_ce_grid(cfg.comprehensive, x_ii, mu_ii, ptype, zeta)
    return ce_i[..., :, None] + ce_ii[..., None, :]


def bundle_ce(b: Bundle, ptype: PreferenceType, zeta, x_i, x_ii, mu_i, mu_ii, cfg: MenuConfig):
    """Certainty equivalent of a single bundle."""
    p_i, p_ii = cfg.bundle_premiums(b, x_i, x_ii)
    d_i, d_ii = cfg.bundle_deductibles(b)
    if ptype is PreferenceType.EU:
        return ce_eu(p_i, d_i, mu_i, zeta) + ce_eu(p_ii, d_ii, mu_ii, zeta)
    return ce_dt(p_i, d_i, mu_i, zeta) + ce_dt(p_ii, d_ii, mu_ii, zeta)
