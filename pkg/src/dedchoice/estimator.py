"""Scikit-learn style front end over the structural estimator.

`DeductibleChoiceEstimator` adapts the likelihood machinery to the
fit/predict protocol: tabular observables in, per-bundle choice
probabilities out.  The underlying model is a two-type mixture (CARA
expected utility and dual theory with a Prelec distortion) with
bundle-level random consideration.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .choice_model import ModelParams, PreferenceParams, QuadratureRule, choice_prob_all
from .consideration import ConsiderationParams
from .estimation import EstimationOptions, LikelihoodEvaluator, fit as _fit
from .menus import Bundle, MenuConfig, default_menu
from .simulation import Household

_COLUMNS = (
    "base_price_collision",
    "base_price_comprehensive",
    "claim_prob_collision",
    "claim_prob_comprehensive",
)
_CHOICE_COLUMNS = ("choice_collision_deductible", "choice_comprehensive_deductible")


def _column(X, name, n):
    if hasattr(X, "columns"):
        if name not in X.columns:
            raise ValueError(f"missing column {name!r}")
        return np.asarray(X[name], dtype=float)
    raise ValueError("X must be a mapping/DataFrame with named columns")


def _as_households(X, y, cfg: MenuConfig, require_choice: bool):
    """Rows of X (+ optional y with chosen deductibles) as Households."""
    if isinstance(X, (list, tuple)) and (len(X) == 0 or isinstance(X[0], Household)):
        pop = list(X)
        if require_choice and any(h.choice is None for h in pop):
            raise ValueError("every household needs an observed choice to fit")
        return pop
    n = len(X)
    cols = {name: _column(X, name, n) for name in _COLUMNS}
    choices = None
    if y is not None:
        y = np.asarray(y)
        if y.shape != (n, 2):
            raise ValueError("y must have shape (n, 2): chosen deductibles"
                             " in dollars, collision then comprehensive")
        choices = y
    elif hasattr(X, "columns") and all(c in X.columns for c in _CHOICE_COLUMNS):
        choices = np.column_stack([np.asarray(X[c]) for c in _CHOICE_COLUMNS])
    if require_choice and choices is None:
        raise ValueError("observed choices required: pass y or choice columns")
    d_i = [int(d) for d in cfg.collision.deductibles]
    d_ii = [int(d) for d in cfg.comprehensive.deductibles]
    ids = (
        np.asarray(X["household_id"], dtype=int)
        if hasattr(X, "columns") and "household_id" in X.columns
        else np.arange(n)
    )
    pop = []
    for k in range(n):
        choice = None
        if choices is not None:
            da, db = int(choices[k, 0]), int(choices[k, 1])
            if da not in d_i or db not in d_ii:
                raise ValueError(f"row {k}: chosen deductibles ({da}, {db})"
                                 " not offered by the menu")
            choice = Bundle(d_i.index(da), d_ii.index(db))
        pop.append(Household(
            id=int(ids[k]),
            x_i=float(cols["base_price_collision"][k]),
            x_ii=float(cols["base_price_comprehensive"][k]),
            mu_i=float(cols["claim_prob_collision"][k]),
            mu_ii=float(cols["claim_prob_comprehensive"][k]),
            choice=choice,
        ))
    return pop


class DeductibleChoiceEstimator(BaseEstimator):
    """Mixture-of-risk-preferences choice model with random consideration.

    Parameters double as the starting point of the likelihood search;
    the fitted model is exposed through `params_` and `result_`.

    Parameters
    ----------
    menu : MenuConfig or None
        Pricing menu; None selects the built-in calibrated menu.
    alpha : float
        Initial expected-utility type share.
    beta_nu, beta_omega : tuple of float
        Initial Beta shapes of the risk-aversion and distortion laws.
    phi : float or array
        Initial consideration probabilities (scalar fills the grid; the
        cheapest bundle is always pinned at 1).
    quad_nodes, multistart, optimizer, seed, tol
        Passed through to the likelihood optimizer.
    """

    def __init__(self, menu=None, alpha=0.5, beta_nu=(1.5, 1.5),
                 beta_omega=(1.5, 1.5), phi=0.3, quad_nodes=64,
                 multistart=5, optimizer="hybrid", seed=0, tol=1e-7):
        self.menu = menu
        self.alpha = alpha
        self.beta_nu = beta_nu
        self.beta_omega = beta_omega
        self.phi = phi
        self.quad_nodes = quad_nodes
        self.multistart = multistart
        self.optimizer = optimizer
        self.seed = seed
        self.tol = tol

    def _cfg(self) -> MenuConfig:
        return self.menu if self.menu is not None else default_menu()

    def _init_params(self, cfg: MenuConfig) -> ModelParams:
        phi = np.asarray(self.phi, dtype=float)
        if phi.ndim == 0:
            phi = np.full(cfg.shape, float(phi))
        else:
            phi = phi.reshape(cfg.shape).copy()
        phi[0, 0] = 1.0
        return ModelParams(
            pref=PreferenceParams(
                alpha=self.alpha,
                beta_nu=tuple(self.beta_nu),
                beta_omega=tuple(self.beta_omega),
            ),
            cons=ConsiderationParams(phi=phi),
            cfg=cfg,
        )

    def fit(self, X, y=None):
        """Maximum-likelihood fit on observed bundle choices.

        X is a DataFrame with the household CSV columns (or a list of
        Household records); y optionally supplies chosen deductibles in
        dollars, shape (n, 2).
        """
        cfg = self._cfg()
        data = _as_households(X, y, cfg, require_choice=True)
        opts = EstimationOptions(
            quad_nodes=self.quad_nodes, multistart=self.multistart,
            optimizer=self.optimizer, seed=self.seed, tol=self.tol,
        )
        self.result_ = _fit(data, self._init_params(cfg), opts)
        self.params_ = self.result_.params
        self.loglik_ = self.result_.loglik
        self.n_features_in_ = len(_COLUMNS)
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Per-bundle choice probabilities, shape (n, n_bundles)."""
        check_is_fitted(self, "params_")
        cfg = self.params_.cfg
        pop = _as_households(X, None, cfg, require_choice=False)
        quad = QuadratureRule.gauss(self.quad_nodes)
        return np.vstack([
            choice_prob_all(self.params_, h.x_i, h.x_ii, h.mu_i, h.mu_ii, quad)
            for h in pop
        ])

    def predict(self, X) -> np.ndarray:
        """Modal bundle per household: (n, 2) deductibles in dollars."""
        check_is_fitted(self, "params_")
        cfg = self.params_.cfg
        flat = np.argmax(self.predict_proba(X), axis=1)
        deds = np.array([cfg.bundle_deductibles(cfg.bundle(int(f))) for f in flat])
        return deds.astype(int)

    def score(self, X, y=None) -> float:
        """Mean log-likelihood per household."""
        check_is_fitted(self, "params_")
        cfg = self.params_.cfg
        data = _as_households(X, y, cfg, require_choice=True)
        quad = QuadratureRule.gauss(self.quad_nodes)
        ll, _ = LikelihoodEvaluator(data, cfg, quad).loglik(self.params_)
        return ll / len(data)
