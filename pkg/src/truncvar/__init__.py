"""Truncated variation of drifted Brownian paths: exact algorithms, closed forms,
Monte Carlo estimators, a bound-verification harness and a trading application."""

from .errors import (
    ConsistencyError,
    DomainError,
    InfeasibleError,
    ParameterError,
    RegimeError,
    SeriesTruncationError,
)
from .paths import (
    ModelParams,
    Path,
    SimConfig,
    generate_bm_path,
    generate_gbm_price_path,
    negate_path,
    read_path_csv,
    slice_path,
    write_path_csv,
)
from .variation import (
    Partition,
    SegmentStats,
    VariationKind,
    discounted_utv,
    discounted_utv_batch,
    dtv_linear,
    exhaustive_oracle,
    first_drawdown_time,
    quadratic_oracle,
    tv_linear,
    utv_argmax_partition,
    utv_greedy_segments,
    utv_linear,
)
from .trading import TradePlan, commission_threshold, max_return_bound, optimal_trades, realized_return

__version__ = "0.1.0"
