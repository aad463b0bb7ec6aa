import numpy as np
import pytest

from dedchoice import (
    ConsiderationParams,
    ContextMenu,
    MenuConfig,
    ModelParams,
    PreferenceParams,
    QuadratureRule,
    default_menu,
    synthetic_truth,
)

DEFAULT_MU = (0.081, 0.023)
DEFAULT_X = (187.0, 117.0)


def make_menu(targets_i, targets_ii, deds_i, deds_ii,
              fees=(15.0, 10.0), base=(187.0, 117.0)) -> MenuConfig:
    """Menu from target premiums at reference base prices."""
    return MenuConfig(
        collision=ContextMenu(
            deductibles=deds_i,
            factors=tuple((t - fees[0]) / base[0] for t in targets_i),
            expense_fee=fees[0],
        ),
        comprehensive=ContextMenu(
            deductibles=deds_ii,
            factors=tuple((t - fees[1]) / base[1] for t in targets_ii),
            expense_fee=fees[1],
        ),
    )


@pytest.fixture(scope="session")
def cfg() -> MenuConfig:
    return default_menu()


@pytest.fixture(scope="session")
def clean_cfg() -> MenuConfig:
    """Default menu with the $200 collision option repriced so no
    alternative is dominated (adjacent price-per-deductible increasing)."""
    return make_menu(
        targets_i=(145.0, 187.0, 243.0, 257.0, 295.0),
        targets_ii=(94.0, 117.0, 148.0, 156.0, 176.0, 189.0),
        deds_i=(1000, 500, 250, 200, 100),
        deds_ii=(1000, 500, 250, 200, 100, 50),
    )


@pytest.fixture(scope="session")
def menu_2x2() -> MenuConfig:
    return make_menu(
        targets_i=(150.0, 200.0), targets_ii=(90.0, 125.0),
        deds_i=(1000, 500), deds_ii=(1000, 500),
    )


@pytest.fixture(scope="session")
def menu_2x3() -> MenuConfig:
    return make_menu(
        targets_i=(150.0, 200.0), targets_ii=(90.0, 125.0, 170.0),
        deds_i=(1000, 500), deds_ii=(1000, 500, 250),
    )


@pytest.fixture(scope="session")
def truth(cfg) -> ModelParams:
    return synthetic_truth(cfg)


@pytest.fixture(scope="session")
def quad64() -> QuadratureRule:
    return QuadratureRule.gauss(64)


def mic1_params(cfg, dearest_symmetric=False) -> ModelParams:
    """Grid satisfying the symmetric (branch I) consideration condition."""
    phi = np.full(cfg.shape, 0.3)
    phi[0, 0] = 1.0
    phi[0, 1] = phi[1, 0] = 0.4
    phi[1, 1] = 0.7
    if dearest_symmetric:
        mi, mii = cfg.shape
        phi[mi - 1, mii - 1] = 0.6
        phi[mi - 2, mii - 1] = phi[mi - 1, mii - 2] = 0.35
        phi[mi - 2, mii - 2] = 0.5
    return ModelParams(
        pref=PreferenceParams(alpha=0.46, beta_nu=(2.0, 4.0), beta_omega=(2.0, 3.0)),
        cons=ConsiderationParams(phi=phi),
        cfg=cfg,
    )


def mic2_params(cfg) -> ModelParams:
    """Grid satisfying the exclusion-degeneracy (branch II) condition."""
    phi = np.full(cfg.shape, 0.3)
    phi[0, 0] = 1.0
    phi[1, 0] = 0.0
    phi[0, 1] = 0.5
    phi[1, 1] = 0.7
    return ModelParams(
        pref=PreferenceParams(alpha=0.46, beta_nu=(2.0, 4.0), beta_omega=(2.0, 3.0)),
        cons=ConsiderationParams(phi=phi),
        cfg=cfg,
    )
