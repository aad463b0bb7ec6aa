"""Maximum-likelihood estimation and subsampling confidence intervals.

The likelihood exploits a structural fact: with fixed quadrature nodes,
the certainty equivalents and hence the dominance relations of each
household's observed bundle at every node do not depend on any model
parameter.  They are precomputed once as packed bitmasks and compressed
through np.unique, after which each likelihood evaluation is a handful
of dense vector operations.  The resulting objective is smooth in the
transformed parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize, special

from .choice_model import (
    DEFAULT_QUAD_NODES,
    ModelParams,
    PreferenceParams,
    QuadratureRule,
)
from .consideration import ConsiderationParams
from .menus import MenuConfig
from .preferences import NU_SUPPORT, OMEGA_SUPPORT, PreferenceType, ce_dt, ce_eu
from .simulation import household_arrays

LOGLIK_FLOOR = 1e-12
LOGIT_CLAMP = 36.0
_CHUNK = 2048


class InvalidInit(ValueError):
    """Starting parameters violate a model invariant."""


@dataclass(frozen=True)
class EstimationOptions:
    quad_nodes: int = DEFAULT_QUAD_NODES
    multistart: int = 5
    seed: int = 0
    optimizer: str = "hybrid"  # neldermead | lbfgs | hybrid
    explore_budget: int = 1500  # simplex evaluations per start
    polish_budget: int = 400  # quasi-Newton iterations on the best start
    tol: float = 1e-7
    jitter: float = 0.5
    n_polish: int = 2  # how many of the best starts get the polish pass

    def __post_init__(self):
        if self.quad_nodes <= 0 or self.multistart <= 0:
            raise ValueError("quad_nodes and multistart must be positive")
        if self.explore_budget <= 0 or self.polish_budget <= 0:
            raise ValueError("optimizer budgets must be positive")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.optimizer not in ("neldermead", "lbfgs", "hybrid"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class EstimationResult:
    params: ModelParams
    loglik: float
    converged: bool
    n_evals: int
    n_floored: int
    multistart_logliks: tuple = ()
    intervals: dict | None = None


def _logit(p):
    p = np.asarray(p, dtype=float)
    out = np.where(
        p <= 0.0, -LOGIT_CLAMP, np.where(p >= 1.0, LOGIT_CLAMP, special.logit(np.clip(p, 1e-300, 1.0 - 1e-16)))
    )
    return np.clip(out, -LOGIT_CLAMP, LOGIT_CLAMP)


def _expit(z):
    return special.expit(np.clip(z, -LOGIT_CLAMP, LOGIT_CLAMP))


def param_names(cfg: MenuConfig) -> list:
    """Flat parameter naming: mixture block then the free phi entries."""
    names = ["alpha", "beta_nu_a", "beta_nu_b", "beta_omega_a", "beta_omega_b"]
    d_i = cfg.collision.deductibles
    d_ii = cfg.comprehensive.deductibles
    for i in range(cfg.shape[0]):
        for j in range(cfg.shape[1]):
            if i == 0 and j == 0:
                continue
            names.append(f"phi_{int(d_i[i])}_{int(d_ii[j])}")
    return names


def params_to_vector(mp: ModelParams) -> np.ndarray:
    """Unconstrained coordinates: logit for alpha/phi, log for shapes."""
    pref = mp.pref
    head = [
        float(_logit(pref.alpha)),
        np.log(pref.beta_nu[0]),
        np.log(pref.beta_nu[1]),
        np.log(pref.beta_omega[0]),
        np.log(pref.beta_omega[1]),
    ]
    return np.concatenate([head, _logit(mp.cons.flat[1:])])


def vector_to_params(vec: np.ndarray, cfg: MenuConfig) -> ModelParams:
    vec = np.asarray(vec, dtype=float)
    if vec.size != 5 + cfg.n_bundles - 1:
        raise ValueError(f"parameter vector must have length {5 + cfg.n_bundles - 1}")
    pref = PreferenceParams(
        alpha=float(_expit(vec[0])),
        beta_nu=(float(np.exp(vec[1])), float(np.exp(vec[2]))),
        beta_omega=(float(np.exp(vec[3])), float(np.exp(vec[4]))),
    )
    phi = np.concatenate([[1.0], _expit(vec[5:])]).reshape(cfg.shape)
    return ModelParams(pref=pref, cons=ConsiderationParams(phi=phi), cfg=cfg)


class LikelihoodEvaluator:
    """Precomputed per-household dominance structure at fixed nodes.

    For each household, preference type, and quadrature node, the set of
    bundles strictly dominating the observed bundle (with the premium
    tie-break) is packed into a 30-bit integer; the packed masks are
    deduplicated so each evaluation touches every distinct mask once.
    """

    def __init__(self, data, cfg: MenuConfig, quad: QuadratureRule):
        cols = household_arrays(data)
        if "choice_i" not in cols:
            raise ValueError("every household needs an observed choice")
        self.cfg = cfg
        self.quad = quad
        self.n = cols["id"].size
        mii = cfg.shape[1]
        self.obs_flat = cols["choice_i"] * mii + cols["choice_ii"]

        nb = cfg.n_bundles
        pow2 = (np.uint64(1) << np.arange(nb, dtype=np.uint64))
        packed = np.empty((self.n, 2, quad.n), dtype=np.uint64)
        d_i = np.asarray(cfg.collision.deductibles, dtype=float)
        d_ii = np.asarray(cfg.comprehensive.deductibles, dtype=float)

        for t, ptype in enumerate(PreferenceType):
            # nodes on the unit interval map to either support; the Beta
            # reweighting happens at evaluation time
            lo, hi = NU_SUPPORT if ptype is PreferenceType.EU else OMEGA_SUPPORT
            zeta = lo + (hi - lo) * quad.nodes
            for s in range(0, self.n, _CHUNK):
                sl = slice(s, min(s + _CHUNK, self.n))
                x_i = cols["x_i"][sl][:, None]
                x_ii = cols["x_ii"][sl][:, None]
                mu_i = cols["mu_i"][sl][:, None, None]
                mu_ii = cols["mu_ii"][sl][:, None, None]
                p_i = cfg.collision.premiums(cols["x_i"][sl])
                p_ii = cfg.comprehensive.premiums(cols["x_ii"][sl])
                cefun = ce_eu if ptype is PreferenceType.EU else ce_dt
                ce_i = cefun(p_i[:, None, :], d_i, mu_i, zeta[None, :, None])
                ce_ii = cefun(p_ii[:, None, :], d_ii, mu_ii, zeta[None, :, None])
                ce = (ce_i[..., :, None] + ce_ii[..., None, :]).reshape(
                    ce_i.shape[0], quad.n, nb
                )
                prem = (p_i[:, :, None] + p_ii[:, None, :]).reshape(-1, nb)
                obs = self.obs_flat[sl]
                rows = np.arange(obs.size)
                ce_obs = ce[rows, :, obs][:, :, None]
                prem_obs = prem[rows, obs][:, None, None]
                dom = (ce > ce_obs) | ((ce == ce_obs) & (prem[:, None, :] < prem_obs))
                packed[sl, t, :] = (dom * pow2).sum(axis=-1, dtype=np.uint64)

        uniq, inv = np.unique(packed, return_inverse=True)
        self.inv = inv.reshape(self.n, 2, quad.n).astype(np.int64)
        self.bits = ((uniq[:, None] >> np.arange(nb, dtype=np.uint64)) & np.uint64(1)).astype(
            np.float64
        )

    def loglik(self, mp: ModelParams, floor: float = LOGLIK_FLOOR):
        """(log-likelihood, number of floored observations)."""
        phi = mp.cons.flat
        logs = np.log(np.maximum(1.0 - phi, 1e-300))
        w_uniq = np.exp(self.bits @ logs)
        per_node = w_uniq[self.inv]  # (n, 2, N)
        lik = np.zeros(self.n)
        for t, ptype in enumerate(PreferenceType):
            share = mp.pref.weight(ptype)
            if share == 0.0:
                continue
            _, w = self.quad.mapped(mp.pref, ptype)
            lik += share * (per_node[:, t, :] @ w)
        lik *= phi[self.obs_flat]
        floored = int(np.sum(lik < floor))
        return float(np.sum(np.log(np.maximum(lik, floor)))), floored


def loglik(mp: ModelParams, data, quad: QuadratureRule) -> float:
    """Log-likelihood of the data; convenience wrapper over the evaluator."""
    return LikelihoodEvaluator(data, mp.cfg, quad).loglik(mp)[0]


def fit(data, init: ModelParams, opts: EstimationOptions = EstimationOptions()) -> EstimationResult:
    """Maximize the likelihood from multistarted transformed coordinates.

    Exploration uses Nelder-Mead from jittered starts; with the hybrid
    or lbfgs optimizer the best starts get a quasi-Newton polish (the
    fixed-node likelihood is smooth in the transformed parameters).
    """
    try:
        v0 = params_to_vector(init)
    except (ValueError, TypeError) as exc:
        raise InvalidInit(str(exc)) from exc
    cfg = init.cfg
    quad = QuadratureRule.gauss(opts.quad_nodes)
    ev = LikelihoodEvaluator(data, cfg, quad)
    n_evals = 0

    def objective(vec):
        nonlocal n_evals
        n_evals += 1
        try:
            return -ev.loglik(vector_to_params(vec, cfg))[0]
        except (ValueError, FloatingPointError):
            # degenerate Beta shapes probed by the line search: steer back
            return 1e12 * (1.0 + float(np.sum(np.square(vec))))

    rng = np.random.Generator(np.random.Philox(opts.seed))
    starts = [v0]
    for _ in range(opts.multistart - 1):
        starts.append(v0 + opts.jitter * rng.standard_normal(v0.size))

    explored = []
    for vec in starts:
        if opts.optimizer == "lbfgs":
            explored.append((objective(vec), vec, False))
            continue
        res = optimize.minimize(
            objective, vec, method="Nelder-Mead",
            options={"maxfev": opts.explore_budget, "xatol": 1e-4, "fatol": opts.tol},
        )
        explored.append((res.fun, res.x, bool(res.success)))
    explored.sort(key=lambda t: t[0])

    if opts.optimizer == "neldermead":
        best_f, best_x, conv = explored[0]
        res = optimize.minimize(
            objective, best_x, method="Nelder-Mead",
            options={"maxfev": 4 * opts.explore_budget, "xatol": 1e-6, "fatol": opts.tol},
        )
        best_f, best_x, conv = res.fun, res.x, bool(res.success)
    else:
        best_f, best_x, conv = explored[0]
        for f0, x0, _ in explored[: opts.n_polish]:
            res = optimize.minimize(
                objective, x0, method="L-BFGS-B",
                options={"maxiter": opts.polish_budget, "ftol": opts.tol / max(1.0, abs(f0))},
            )
            if res.fun < best_f:
                best_f, best_x, conv = res.fun, res.x, bool(res.success)

    mp_hat = vector_to_params(best_x, cfg)
    ll, floored = ev.loglik(mp_hat)
    return EstimationResult(
        params=mp_hat,
        loglik=ll,
        converged=conv,
        n_evals=n_evals,
        n_floored=floored,
        multistart_logliks=tuple(-f for f, _, _ in explored),
    )


def neutral_init(cfg: MenuConfig) -> ModelParams:
    """Agnostic starting point: even mixture, flat shapes, phi = 0.3."""
    phi = np.full(cfg.shape, 0.3)
    phi[0, 0] = 1.0
    return ModelParams(
        pref=PreferenceParams(alpha=0.5, beta_nu=(1.5, 1.5), beta_omega=(1.5, 1.5)),
        cons=ConsiderationParams(phi=phi),
        cfg=cfg,
    )


def natural_vector(mp: ModelParams) -> np.ndarray:
    """Parameters in natural units, matching param_names order."""
    return np.concatenate(
        [
            [mp.pref.alpha, *mp.pref.beta_nu, *mp.pref.beta_omega],
            mp.cons.flat[1:],
        ]
    )


def subsample_ci(
    data,
    result: EstimationResult,
    opts: EstimationOptions,
    n_subsamples: int = 50,
    subsample_frac: float = 0.2,
    level: float = 0.95,
    seed: int = 0,
) -> dict:
    """Subsampling intervals around the full-sample estimate.

    Refits on without-replacement subsamples of size floor(frac * n),
    each initialized at the full-sample estimate with a single start,
    and inverts the sqrt(m)-scaled deviations.  The pinned phi of the
    cheapest bundle is reported as the degenerate interval [1, 1].
    """
    if not 0.0 < subsample_frac < 1.0:
        raise ValueError("subsample_frac must lie in (0,1)")
    data = sorted(data, key=lambda h: h.id)
    n = len(data)
    m = int(subsample_frac * n)
    if m < 1:
        raise ValueError("subsample size is empty")
    rng = np.random.Generator(np.random.Philox(seed))
    theta_hat = natural_vector(result.params)
    sub_opts = replace(opts, multistart=1, optimizer="lbfgs")

    deviations = []
    n_failed = 0
    for _ in range(n_subsamples):
        idx = rng.choice(n, size=m, replace=False)
        sub = [data[i] for i in idx]
        try:
            sub_res = fit(sub, result.params, sub_opts)
        except Exception:
            n_failed += 1
            continue
        deviations.append(np.sqrt(m) * (natural_vector(sub_res.params) - theta_hat))
    if not deviations:
        raise RuntimeError("every subsample refit failed")
    dev = np.asarray(deviations)
    a = 0.5 * (1.0 - level)
    q_lo = np.quantile(dev, a, axis=0)
    q_hi = np.quantile(dev, 1.0 - a, axis=0)
    lo = theta_hat - q_hi / np.sqrt(n)
    hi = theta_hat - q_lo / np.sqrt(n)

    names = param_names(result.params.cfg)
    bounds_lo = np.array([0.0, 0.0, 0.0, 0.0, 0.0] + [0.0] * (len(names) - 5))
    bounds_hi = np.array([1.0, np.inf, np.inf, np.inf, np.inf] + [1.0] * (len(names) - 5))
    lo = np.maximum(lo, bounds_lo)
    hi = np.minimum(hi, bounds_hi)

    out = {"n_failed": n_failed, "intervals": {}}
    d_i = result.params.cfg.collision.deductibles
    d_ii = result.params.cfg.comprehensive.deductibles
    out["intervals"][f"phi_{int(d_i[0])}_{int(d_ii[0])}"] = (1.0, 1.0)
    for name, l, h in zip(names, lo, hi):
        out["intervals"][name] = (float(l), float(h))
    return out
