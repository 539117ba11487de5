"""Seeded Monte Carlo estimators for path functionals of drifted Brownian motion.

Each estimator returns an :class:`EstimateCI`. Per-path samples are a pure
function of ``(seed, path_index)`` and are reduced with ``math.fsum``
(correctly rounded, hence order independent), so the result does not depend
on batch size or on how many worker threads were used.

Grid bias: on a grid of step ``dt`` the discrete running maximum misses the
continuous one by about ``BETA * sqrt(dt)``, which lowers sup-type
functionals and delays ``T_c``. Helpers below turn that shift into explicit
allowances instead of hiding it inside a tolerance.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import closed_forms as cf
from .errors import ParameterError
from .paths import ModelParams, SimConfig, path_rng, simulate_bm_batch
from .variation import max_drawup, tv_linear, utv_linear

# overshoot constant of a Gaussian random walk over a level, -zeta(1/2)/sqrt(2 pi)
BETA = 0.5825971579390106

TC_CAP_CHUNKS = 50
UNRELIABLE_CAP_FRACTION = 0.01
_BATCH_ELEMENTS = 2_000_000

WINDOWS = ("fixed_T", "until_Tc", "Tc_and_T")


@dataclass(frozen=True)
class EstimateCI:
    mean: float
    std_error: float
    n_paths: int
    n_steps: int
    seed: int
    cap_fraction: float = 0.0
    unreliable: bool = False
    extra: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        out = {
            "mean": self.mean,
            "std_error": self.std_error,
            "n_paths": self.n_paths,
            "n_steps": self.n_steps,
            "seed": self.seed,
        }
        if self.cap_fraction:
            out["cap_fraction"] = self.cap_fraction
        if self.unreliable:
            out["unreliable"] = True
        out.update(self.extra)
        return out


def summarize(samples, n_steps: int, seed: int, **kwargs) -> EstimateCI:
    """Mean and standard error of per-path samples."""
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise ParameterError(f"need at least 2 samples for a standard error, got {n}")
    mean = math.fsum(x) / n
    var = math.fsum((x - mean) ** 2) / (n - 1)
    return EstimateCI(mean, math.sqrt(var / n), n, n_steps, seed, **kwargs)


def _batches(n_paths: int, n_cols: int, budget: int | None = None):
    size = max(1, (budget or _BATCH_ELEMENTS) // max(n_cols, 1))
    return [range(lo, min(lo + size, n_paths)) for lo in range(0, n_paths, size)]


def _map_paths(fn, n_paths: int, n_cols: int, threads: int = 1, budget: int | None = None) -> np.ndarray:
    """Apply ``fn(range_of_path_indices) -> array`` over batches, concatenated in index order.

    ``budget`` caps the elements per batch (default ``_BATCH_ELEMENTS``).
    """
    batches = _batches(n_paths, n_cols, budget)
    if threads <= 1 or len(batches) == 1:
        parts = [fn(b) for b in batches]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(fn, batches))
    return np.concatenate(parts, axis=0)


def map_fixed_horizon(fn, mu: float, horizon: float, sim: SimConfig, threads: int = 1) -> np.ndarray:
    """Per-path samples ``fn(batch_of_paths)`` over paths on ``[0, horizon]``.

    Row ``k`` of each batch is ``generate_bm_path`` for path index ``k``.
    """

    def run(idx):
        return np.asarray(fn(simulate_bm_batch(mu, horizon, sim.n_steps, sim.seed, idx)))

    return _map_paths(run, sim.n_paths, sim.n_steps + 1, threads)


# --- first-drawdown sampling --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TcSample:
    """Per-path output of :func:`sample_until_tc`."""

    tc: np.ndarray  # first-drawdown time, or the cap for capped paths
    drawup: np.ndarray  # max drawup on [0, tc]
    capped: np.ndarray  # bool
    dt: float
    cap_time: float


def _until_tc_batch(mu: float, c: float, n_steps: int, dt: float, seed: int, idx):
    gens = [path_rng(seed, i) for i in idx]
    m = len(gens)
    level = np.zeros(m)
    run_max = np.zeros(m)
    run_min = np.zeros(m)
    drawup = np.zeros(m)
    tc = np.full(m, np.nan)
    active = np.arange(m)
    sqdt = math.sqrt(dt)
    steps = np.arange(1, n_steps + 1)
    for chunk in range(TC_CAP_CHUNKS):
        if active.size == 0:
            break
        z = np.stack([gens[r].standard_normal(n_steps) for r in active])
        w = np.cumsum(z * sqdt + mu * dt, axis=1) + level[active, None]
        rmax = np.maximum(np.maximum.accumulate(w, axis=1), run_max[active, None])
        rmin = np.minimum(np.minimum.accumulate(w, axis=1), run_min[active, None])
        hit_mask = rmax - w >= c
        hit = hit_mask.any(axis=1)
        first = np.where(hit, hit_mask.argmax(axis=1), n_steps - 1)
        du = np.where(steps[None, :] <= first[:, None] + 1, w - rmin, -np.inf).max(axis=1)
        drawup[active] = np.maximum(drawup[active], du)
        done = active[hit]
        tc[done] = (chunk * n_steps + first[hit] + 1) * dt
        keep = ~hit
        cont = active[keep]
        level[cont] = w[keep, -1]
        run_max[cont] = rmax[keep, -1]
        run_min[cont] = rmin[keep, -1]
        active = cont
    capped = np.isnan(tc)
    tc[capped] = TC_CAP_CHUNKS * n_steps * dt
    return np.column_stack([tc, drawup, capped.astype(float)])


@lru_cache(maxsize=16)
def _sample_until_tc_cached(mu: float, c: float, n_steps: int, n_paths: int, seed: int, threads: int):
    chunk = cf.expected_tc(mu, c)
    dt = chunk / n_steps
    sim = SimConfig(n_steps, n_paths, seed)
    out = _map_paths(
        lambda idx: _until_tc_batch(mu, c, n_steps, dt, seed, idx), sim.n_paths, n_steps, threads
    )
    out.setflags(write=False)
    return TcSample(out[:, 0], out[:, 1], out[:, 2] > 0, dt, TC_CAP_CHUNKS * chunk)


def sample_until_tc(params: ModelParams, sim: SimConfig, threads: int = 1) -> TcSample:
    """Simulate each path until its first drawdown of ``c``.

    Paths advance in chunks of horizon ``expected_tc(mu, c)`` with
    ``sim.n_steps`` steps each (so ``dt = E T_c / n_steps``); a path still
    running after ``TC_CAP_CHUNKS`` chunks is capped. ``params.horizon_T`` is
    not used. Results are cached per configuration.
    """
    return _sample_until_tc_cached(params.mu, params.c, sim.n_steps, sim.n_paths, sim.seed, threads)


def estimate_expected_tc(params: ModelParams, sim: SimConfig, threads: int = 1) -> EstimateCI:
    s = sample_until_tc(params, sim, threads)
    cap_fraction = float(s.capped.mean())
    return summarize(
        s.tc,
        sim.n_steps,
        sim.seed,
        cap_fraction=cap_fraction,
        unreliable=cap_fraction > UNRELIABLE_CAP_FRACTION,
        extra={"dt": s.dt},
    )


def estimate_tc_moments(params: ModelParams, sim: SimConfig) -> tuple[EstimateCI, EstimateCI]:
    """Estimates of ``E T_c`` and ``E T_c^2`` from the same paths."""
    s = sample_until_tc(params, sim)
    return summarize(s.tc, sim.n_steps, sim.seed), summarize(s.tc**2, sim.n_steps, sim.seed)


def estimate_prob_tc_before(
    params: ModelParams, sim: SimConfig, horizon: float, threads: int = 1
) -> EstimateCI:
    """Frequency of ``T_c < horizon`` (a drawdown of ``c`` within ``[0, horizon]``)."""

    def hit(w):
        return ((np.maximum.accumulate(w, axis=1) - w).max(axis=1) >= params.c).astype(float)

    samples = map_fixed_horizon(hit, params.mu, horizon, sim, threads)
    return summarize(samples, sim.n_steps, sim.seed, extra={"horizon": horizon})


# --- fixed-horizon functionals -----------------------------------------------------


def estimate_expected_utv(params: ModelParams, sim: SimConfig, threads: int = 1) -> EstimateCI:
    """Mean of the grid UTV over paths on ``[0, T]``."""
    samples = map_fixed_horizon(
        lambda w: utv_linear(w, params.c), params.mu, params.horizon_T, sim, threads
    )
    return summarize(samples, sim.n_steps, sim.seed)


def _drawup_until_first_drawdown(w: np.ndarray, c: float) -> np.ndarray:
    """Max drawup of each row on ``[0, first drawdown of c]`` (whole row if none)."""
    dd = np.maximum.accumulate(w, axis=1) - w >= c
    n = w.shape[1]
    stop = np.where(dd.any(axis=1), dd.argmax(axis=1), n - 1)
    du = w - np.minimum.accumulate(w, axis=1)
    return np.where(np.arange(n)[None, :] <= stop[:, None], du, -np.inf).max(axis=1)


def estimate_sup_functional(
    params: ModelParams, sim: SimConfig, window: str, threads: int = 1
) -> EstimateCI:
    """Mean of ``(max drawup - c)_+`` over a window.

    ``fixed_T``   drawup over ``[0, T]``;
    ``until_Tc``  drawup over ``[0, T_c]`` (see :func:`sample_until_tc` for the grid);
    ``Tc_and_T``  drawup over ``[0, min(T_c, T)]`` on the ``[0, T]`` grid.
    """
    c = params.c
    if window == "fixed_T":
        samples = map_fixed_horizon(
            lambda w: np.maximum(max_drawup(w, axis=1) - c, 0.0),
            params.mu, params.horizon_T, sim, threads,
        )
        return summarize(samples, sim.n_steps, sim.seed, extra={"window": window})
    if window == "Tc_and_T":
        samples = map_fixed_horizon(
            lambda w: np.maximum(_drawup_until_first_drawdown(w, c) - c, 0.0),
            params.mu, params.horizon_T, sim, threads,
        )
        return summarize(samples, sim.n_steps, sim.seed, extra={"window": window})
    if window == "until_Tc":
        s = sample_until_tc(params, sim, threads)
        cap_fraction = float(s.capped.mean())
        return summarize(
            np.maximum(s.drawup - c, 0.0),
            sim.n_steps,
            sim.seed,
            cap_fraction=cap_fraction,
            unreliable=cap_fraction > UNRELIABLE_CAP_FRACTION,
            extra={"window": window, "dt": s.dt},
        )
    raise ParameterError(f"unknown window {window!r}; expected one of {WINDOWS}")


@dataclass(frozen=True)
class ExpMomentEstimate:
    at_M: EstimateCI
    at_half_M: EstimateCI
    truncation_M: float


def estimate_exp_moment(
    alpha: float, params: ModelParams, sim: SimConfig, truncation_M: float, threads: int = 1
) -> ExpMomentEstimate:
    """``E exp(alpha * min(TV[0, T], M))``, also at ``M/2`` to expose truncation effects."""
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not truncation_M > 0:
        raise ParameterError(f"truncation_M must be positive, got {truncation_M}")
    tv = map_fixed_horizon(
        lambda w: tv_linear(w, params.c), params.mu, params.horizon_T, sim, threads
    )
    at_m = summarize(np.exp(alpha * np.minimum(tv, truncation_M)), sim.n_steps, sim.seed)
    at_half = summarize(np.exp(alpha * np.minimum(tv, truncation_M / 2)), sim.n_steps, sim.seed)
    return ExpMomentEstimate(at_m, at_half, truncation_M)


def estimate_sup_mgf(alpha: float, params: ModelParams, sim: SimConfig) -> EstimateCI:
    """``E exp(alpha * max_{[0,T]} W)`` on the grid."""
    samples = map_fixed_horizon(
        lambda w: np.exp(alpha * w.max(axis=1)), params.mu, params.horizon_T, sim
    )
    return summarize(samples, sim.n_steps, sim.seed)


def sample_max_drawup(mu: float, horizon: float, sim: SimConfig, threads: int = 1) -> np.ndarray:
    return map_fixed_horizon(lambda w: max_drawup(w, axis=1), mu, horizon, sim, threads)


def empirical_ccdf(samples, query) -> np.ndarray:
    """Fraction of ``samples`` that are ``>=`` each query point."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ParameterError("empirical_ccdf needs at least one sample")
    q = np.asarray(query, dtype=float)
    return (x.size - np.searchsorted(x, q, side="left")) / x.size


def binomial_se(p, n: int):
    p = np.asarray(p, dtype=float)
    return np.sqrt(p * (1 - p) / n)


# --- grid bias -----------------------------------------------------------------------


def level_shift(dt: float) -> float:
    """Typical amount by which a grid walk overshoots a level, ``BETA * sqrt(dt)``."""
    return BETA * math.sqrt(dt)


def effective_level(c: float, dt: float) -> float:
    """Level a grid drawdown effectively waits for.

    The grid misses the running maximum by about one overshoot and crosses
    the level with another, so a drawdown of ``c`` fires like ``c + 2 eps``.
    """
    return c + 2.0 * level_shift(dt)


def tc_bias_allowance(mu: float, c: float, dt: float) -> float:
    """Twice the predicted delay of the grid ``T_c`` mean."""
    return 2.0 * abs(cf.expected_tc(mu, effective_level(c, dt)) - cf.expected_tc(mu, c))


def hv_mean_bias_allowance(mu: float, c: float, dt: float) -> float:
    """Twice the predicted grid bias of the drawup-before-``T_c`` mean.

    The later trigger raises the mean like a level ``c + 2 eps``; each observed
    drawup is also short by up to ``2 eps`` (missed maximum and minimum),
    which lowers it by at most ``2 eps P(drawup >= c)``.
    """
    eps = level_shift(dt)
    later = abs(cf.hv_mean(mu, effective_level(c, dt)) - cf.hv_mean(mu, c))
    shorter = 2 * eps * cf.hv_prefactor(mu, c)
    return 2.0 * (later + shorter)


@dataclass(frozen=True)
class Refinement:
    coarse: EstimateCI
    fine: EstimateCI
    extrapolated: float


def grid_refinement(estimator, params: ModelParams, sim: SimConfig, *args, **kwargs) -> Refinement:
    """Run ``estimator`` at ``n_steps`` and ``2 n_steps`` and extrapolate a ``sqrt(dt)`` bias away."""
    coarse = estimator(params, sim, *args, **kwargs)
    fine_sim = SimConfig(sim.n_steps * 2, sim.n_paths, sim.seed)
    fine = estimator(params, fine_sim, *args, **kwargs)
    r = math.sqrt(2.0)
    extrapolated = (r * fine.mean - coarse.mean) / (r - 1.0)
    return Refinement(coarse, fine, extrapolated)
