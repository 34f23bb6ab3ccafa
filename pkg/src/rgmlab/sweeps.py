"""Size-indexed model families with mean degree held near a constant ``C``."""

from __future__ import annotations

from .errors import ParameterError
from .mobility import MobilityConfig, build_mobility_model, calibrate_r_link
from .rng import derive_seed
from .zoo import MixtureLaw, make_gnp, make_mixture

GENERATORS = ("gnp", "mixture", "mobility")


def gnp_generator(C):
    """``n -> G(n, C/(n-1))``."""
    return lambda n: make_gnp(min(C / (n - 1), 1.0))


def mixture_generator(C):
    """``n -> mixture`` with ``eta ~ Beta(1, (n-1)/C - 1)``, so ``E(eta) = C/(n-1)``."""

    def make(n):
        b = (n - 1) / C - 1
        if b <= 0:
            raise ParameterError(f"mixture generator needs C < n-1, got C={C}, n={n}")
        return make_mixture(MixtureLaw("beta", a=1.0, b=b))

    return make


def mobility_generator(cfg, target_dbar, pilot_trials, master_seed):
    """``n -> mobility model`` with ``r_link`` tuned on pilot trials to hit ``target_dbar``.

    Pilot trials use their own derived seed, so they never share draws with
    the measured trials.
    """
    cfg = cfg if isinstance(cfg, MobilityConfig) else MobilityConfig.from_dict(dict(cfg or {}))
    radii = {}

    def make(n):
        if n not in radii:
            radii[n] = calibrate_r_link(cfg, n, target_dbar, pilot_trials, derive_seed(master_seed, 0xCA1, n))
        return build_mobility_model(cfg.replace(r_link=radii[n]))

    make.radii = radii
    return make


def make_generator(kind, C, master_seed=0, mobility=None, pilot_trials=10, target_dbar=None):
    if kind == "gnp":
        return gnp_generator(C)
    if kind == "mixture":
        return mixture_generator(C)
    if kind == "mobility":
        return mobility_generator(mobility, C if target_dbar is None else target_dbar, pilot_trials, master_seed)
    raise ParameterError(f"unknown sweep generator {kind!r}; choose from {GENERATORS}")
