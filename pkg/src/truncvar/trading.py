"""Long-only trading under a flat proportional commission.

Buying at ``P_t`` and selling at ``P_s`` with commission ratio ``gamma`` on
both legs multiplies wealth by ``(P_s / P_t) (1 - gamma) / (1 + gamma)``.
In log prices that is an increment minus ``c = ln((1 + gamma) / (1 - gamma))``,
so the best schedule is the UTV-maximising partition of the log-price path
and the best achievable return is ``exp(UTV(log P, c)) - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .paths import Path
from .variation import Partition, utv_argmax_partition, utv_linear


def _check_gamma(gamma: float):
    if not 0 <= gamma < 1:
        raise ParameterError(f"commission ratio must lie in [0, 1), got {gamma}")


def commission_threshold(gamma: float) -> float:
    """Log-price threshold ``ln((1 + gamma) / (1 - gamma))``."""
    _check_gamma(gamma)
    return math.log1p(gamma) - math.log1p(-gamma)


@dataclass(frozen=True)
class TradePlan:
    trades: tuple[tuple[int, int], ...]
    gamma: float

    def __post_init__(self):
        _check_gamma(self.gamma)
        # reuses the interleaving validation
        object.__setattr__(self, "trades", Partition(tuple(self.trades)).pairs)

    def __len__(self) -> int:
        return len(self.trades)


def _prices(price_path) -> np.ndarray:
    x = price_path.values if isinstance(price_path, Path) else np.asarray(price_path, dtype=float)
    if x.ndim != 1:
        raise ParameterError("expected a single price path")
    if x.size and not np.all(x > 0):
        bad = int(np.flatnonzero(~(x > 0))[0])
        raise ParameterError(f"prices must be positive; row {bad} holds {x[bad]}")
    return x


def optimal_trades(price_path, gamma: float) -> TradePlan:
    """Return-maximising buy/sell schedule on the sample grid."""
    c = commission_threshold(gamma)
    part = utv_argmax_partition(np.log(_prices(price_path)), c)
    return TradePlan(part.pairs, gamma)


def realized_return(price_path, plan: TradePlan) -> float:
    """Net return of ``plan``: product of per-trade factors, minus one."""
    x = _prices(price_path)
    for t, s in plan.trades:
        if not 0 <= t < s < x.size:
            raise ParameterError(f"trade ({t}, {s}) outside a path of length {x.size}")
    if not plan.trades:
        return 0.0
    log_x = np.log(x)
    c = commission_threshold(plan.gamma)
    # sum in logs, exponentiate once
    log_growth = math.fsum(log_x[s] - log_x[t] - c for t, s in plan.trades)
    return math.expm1(log_growth)


def max_return_bound(price_path, gamma: float) -> float:
    """Least upper bound on the net return: ``exp(UTV(log P, c)) - 1``."""
    c = commission_threshold(gamma)
    return math.expm1(utv_linear(np.log(_prices(price_path)), c))
