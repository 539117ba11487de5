"""Executable checks of the expectation bounds, pathwise relations and closed forms.

Every check returns :class:`BoundReport` records. A report compares a left
side against a right side for a claim of the form ``lhs <= rhs``; its
``margin`` is ``rhs - lhs``. Statistical claims pass when the margin is at
least ``-3`` combined standard errors, pathwise claims when no path violates
the relation beyond ``PATHWISE_TOL``. Two-sided closed-form checks store the
slack left after the bias allowance as their margin.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from . import closed_forms as cf
from . import montecarlo as mc
from .errors import InfeasibleError, RegimeError
from .montecarlo import EstimateCI
from .paths import ModelParams, SimConfig, simulate_bm_batch, time_grid
from .variation import discounted_utv_batch, dtv_linear, tv_linear, utv_linear

Z_SLACK = 3.0
PATHWISE_TOL = 1e-9
LOW_POWER_PATHS = 100

LONG_LOWER = 0.3
LONG_UPPER = 27.0
COR_LOWER = 3.0
SHORT_UPPER_PROOF = 4.5
SHORT_UPPER_STATED = 5.0
TC_FRACTION = 1.0 / 3.0
TC_EARLY_PROB = 7.0 / 9.0
N10_FACTOR = math.e
N11_FACTOR = (1.0 - math.exp(-1.0)) / 2.0

N11_QUANTILES = 50
SHIFT_QUANTILES = 20
DISCOUNTED_HORIZON_MULT = 8
DISCOUNTED_BATCH_ELEMENTS = 10_000_000
SPLIT_FRACTIONS = (0.25, 0.5, 0.75)

DEFAULT_GRID = tuple((mu, c) for mu in (-1.0, 0.0, 1.0) for c in (0.5, 1.0))
LONG_T_MULT = 3.0
SHORT_T_MULT = 0.1


def _value(side) -> float:
    return side.mean if isinstance(side, EstimateCI) else float(side)


def _se(side) -> float:
    return side.std_error if isinstance(side, EstimateCI) else 0.0


def _side_dict(side) -> dict:
    if isinstance(side, EstimateCI):
        return side.as_dict()
    return {"value": float(side)}


def scale_estimate(est: EstimateCI, k: float) -> EstimateCI:
    """``k`` times an estimate; the unscaled mean is kept under ``extra``."""
    extra = dict(est.extra)
    extra.update(scale=k, unscaled_mean=est.mean, unscaled_std_error=est.std_error)
    return EstimateCI(
        est.mean * k, est.std_error * abs(k), est.n_paths, est.n_steps, est.seed,
        est.cap_fraction, est.unreliable, extra,
    )


@dataclass
class BoundReport:
    claim_id: str
    lhs: object
    rhs: object
    margin: float
    passed: bool
    kind: str = "statistical"  # statistical | pathwise | two_sided | exact
    config: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    low_power: bool = False
    unreliable: bool = False
    notes: dict = field(default_factory=dict)
    points: list = field(default_factory=list)  # (x, lhs, rhs) rows for plotting

    def __post_init__(self):
        self.margin = float(self.margin)
        self.passed = bool(self.passed)

    @property
    def combined_se(self) -> float:
        return math.hypot(_se(self.lhs), _se(self.rhs))

    @property
    def counts_as_failure(self) -> bool:
        """Low-power statistical reports are advisory; pathwise ones always count."""
        if self.passed:
            return False
        return not (self.low_power and self.kind != "pathwise")

    def as_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "kind": self.kind,
            "passed": self.passed,
            "margin": self.margin,
            "combined_se": self.combined_se,
            "lhs": _side_dict(self.lhs),
            "rhs": _side_dict(self.rhs),
            "constants": self.constants,
            "config": self.config,
            "low_power": self.low_power,
            "unreliable": self.unreliable,
            "notes": self.notes,
            "points": [list(p) for p in self.points],
        }


def _config(params: ModelParams, sim: SimConfig, **extra) -> dict:
    out = {**asdict(params), **asdict(sim)}
    out.update(extra)
    return out


def statistical_report(claim_id, lhs, rhs, params, sim, constants, **extra) -> BoundReport:
    """Report for ``lhs <= rhs`` with the one-sided ``Z_SLACK`` policy."""
    margin = _value(rhs) - _value(lhs)
    se = math.hypot(_se(lhs), _se(rhs))
    unreliable = any(isinstance(s, EstimateCI) and s.unreliable for s in (lhs, rhs))
    notes = extra.pop("notes", {})
    return BoundReport(
        claim_id, lhs, rhs, margin, margin >= -Z_SLACK * se,
        config=_config(params, sim, **extra),
        constants=dict(constants),
        low_power=sim.n_paths < LOW_POWER_PATHS,
        unreliable=unreliable,
        notes=notes,
        points=[(params.horizon_T, _value(lhs), _value(rhs))],
    )


# --- regimes -------------------------------------------------------------------------


def regime_of(params: ModelParams) -> str:
    return "long" if params.horizon_T >= TC_FRACTION * cf.expected_tc(params.mu, params.c) else "short"


@dataclass(frozen=True)
class RegimeParams:
    """Model parameters tagged with the horizon regime they fall in."""

    params: ModelParams
    regime: str

    def __post_init__(self):
        if self.regime not in ("long", "short"):
            raise RegimeError(f"regime must be 'long' or 'short', got {self.regime!r}")
        actual = regime_of(self.params)
        if actual != self.regime:
            etc = cf.expected_tc(self.params.mu, self.params.c)
            raise RegimeError(
                f"T={self.params.horizon_T:g} is in the {actual} regime "
                f"(threshold E T_c / 3 = {etc / 3:g}), not {self.regime}"
            )

    @classmethod
    def of(cls, params: ModelParams) -> "RegimeParams":
        return cls(params, regime_of(params))


def _require(rp: RegimeParams, regime: str):
    if rp.regime != regime:
        raise RegimeError(f"expected a {regime}-regime configuration, got {rp.regime}")
    RegimeParams(rp.params, regime)


def _steps_for(horizon: float, params: ModelParams, sim: SimConfig) -> SimConfig:
    """Same grid step as ``sim`` over ``[0, T]``, applied to ``[0, horizon]``."""
    n = max(1, round(sim.n_steps * horizon / params.horizon_T))
    return SimConfig(n, sim.n_paths, sim.seed)


def _refinement_note(estimator, params, sim, *args, threads=1) -> dict:
    r = mc.grid_refinement(estimator, params, sim, *args, threads=threads)
    return {"coarse": r.coarse.mean, "fine": r.fine.mean, "extrapolated": r.extrapolated}


def verify_long_regime(
    rp: RegimeParams, sim: SimConfig, threads: int = 1, refine: bool = False
) -> list[BoundReport]:
    """Long-horizon two-sided bounds on ``E UTV[0, T]`` (``T >= E T_c / 3``)."""
    _require(rp, "long")
    params = rp.params
    T, etc = params.horizon_T, cf.expected_tc(params.mu, params.c)
    ratio = T / etc
    utv = mc.estimate_expected_utv(params, sim, threads)
    sup_tc = mc.estimate_sup_functional(params, sim, "Tc_and_T", threads)
    h = TC_FRACTION * etc
    short_sim = _steps_for(h, params, sim)
    sup_third = mc.estimate_sup_functional(params.replace(horizon_T=h), short_sim, "fixed_T", threads)
    hv = cf.hv_mean(params.mu, params.c)
    notes = {"expected_tc": etc, "T_over_expected_tc": ratio}
    if refine:
        notes = dict(notes, utv_refinement=_refinement_note(mc.estimate_expected_utv, params, sim, threads=threads))
    return [
        statistical_report(
            "THM_3_4_LOWER", scale_estimate(sup_tc, LONG_LOWER * ratio), utv, params, sim,
            {"lower": LONG_LOWER}, regime="long", window="Tc_and_T", notes=notes,
        ),
        statistical_report(
            "THM_3_4_UPPER", utv, scale_estimate(sup_tc, LONG_UPPER * ratio), params, sim,
            {"upper": LONG_UPPER}, regime="long", window="Tc_and_T", notes=notes,
        ),
        statistical_report(
            "COR_3_5_LOWER", scale_estimate(sup_third, COR_LOWER * ratio), utv, params, sim,
            {"lower": COR_LOWER, "window_fraction": TC_FRACTION}, regime="long",
            window="fixed_T", window_horizon=h, window_steps=short_sim.n_steps, notes=notes,
        ),
        statistical_report(
            "COR_3_5_UPPER", utv, LONG_UPPER * ratio * hv, params, sim,
            {"upper": LONG_UPPER}, regime="long", notes=dict(notes, hv_mean=hv),
        ),
    ]


def verify_short_regime(
    rp: RegimeParams, sim: SimConfig, threads: int = 1, refine: bool = False
) -> list[BoundReport]:
    """Short-horizon bounds: ``E sup <= E UTV <= 9/2 E sup <= 5 E sup``."""
    _require(rp, "short")
    params = rp.params
    utv = mc.estimate_expected_utv(params, sim, threads)
    sup = mc.estimate_sup_functional(params, sim, "fixed_T", threads)
    notes = {"expected_tc": cf.expected_tc(params.mu, params.c)}
    if refine:
        notes = dict(notes, utv_refinement=_refinement_note(mc.estimate_expected_utv, params, sim, threads=threads))
    return [
        statistical_report(
            "THM_3_7_LOWER", sup, utv, params, sim, {"lower": 1.0},
            regime="short", window="fixed_T", notes=notes,
        ),
        statistical_report(
            "THM_3_7_UPPER_9_2", utv, scale_estimate(sup, SHORT_UPPER_PROOF), params, sim,
            {"upper": SHORT_UPPER_PROOF}, regime="short", window="fixed_T", notes=notes,
        ),
        statistical_report(
            "THM_3_7_UPPER_5", utv, scale_estimate(sup, SHORT_UPPER_STATED), params, sim,
            {"upper": SHORT_UPPER_STATED}, regime="short", window="fixed_T", notes=notes,
        ),
    ]


# --- first-drawdown checks ------------------------------------------------------------


def verify_early_drawdown(params: ModelParams, sim: SimConfig, threads: int = 1) -> BoundReport:
    """``P(T_c < E T_c / 3) <= 7/9`` against the simulated frequency."""
    h = TC_FRACTION * cf.expected_tc(params.mu, params.c)
    est = mc.estimate_prob_tc_before(params, sim, h, threads)
    return statistical_report(
        "LEM_3_3", est, TC_EARLY_PROB, params, sim,
        {"fraction": TC_FRACTION, "bound": TC_EARLY_PROB},
        horizon=h, notes={"moment_ratio": cf.tc_moment_ratio(params.mu, params.c)},
    )


def verify_moment_ratio(points: Iterable[tuple[float, float]]) -> BoundReport:
    """``(E T_c)^2 / E T_c^2 >= 1/2`` at every ``(mu, c)``, exactly."""
    points = list(points)
    values = [cf.tc_moment_ratio(mu, c) for mu, c in points]
    worst = int(np.argmin(values))
    margin = values[worst] - 0.5
    return BoundReport(
        "LEM_3_3_RATIO", 0.5, values[worst], margin, margin >= 0, kind="exact",
        config={"points": [list(p) for p in points]},
        constants={"bound": 0.5},
        notes={"worst_point": list(points[worst])},
        points=[(mu * c, 0.5, v) for (mu, c), v in zip(points, values)],
    )


def _ccdf_points(x: np.ndarray, y: np.ndarray, n_points: int, reference: np.ndarray):
    """Query points at evenly spaced quantiles of the positive part of ``reference``."""
    pos = reference[reference > 0]
    if pos.size == 0:
        return np.empty(0), np.empty(0), np.empty(0), np.empty(0)
    levels = (np.arange(n_points) + 0.5) / n_points
    q = np.unique(np.quantile(pos, levels))
    px, py = mc.empirical_ccdf(x, q), mc.empirical_ccdf(y, q)
    se = np.hypot(mc.binomial_se(px, x.size), mc.binomial_se(py, y.size))
    return q, px, py, se


def _domination_report(claim_id, q, p_big, p_small, se, params, sim, constants, two_sided=False, **extra):
    """Report for ``P(X >= q) >= P(Y >= q)`` at every query point (``big`` is X)."""
    if q.size == 0:
        margin, worst, z = 0.0, None, np.empty(0)
    else:
        diff = p_big - p_small
        z_margin = np.abs(diff) if two_sided else -diff
        slack = Z_SLACK * se
        z = slack - z_margin
        worst = int(np.argmin(z))
        margin = float(-z_margin[worst]) if two_sided else float(diff[worst])
    passed = bool(z.size == 0 or np.all(z >= -1e-15))
    lhs = float(p_small[worst]) if worst is not None else 0.0
    rhs = float(p_big[worst]) if worst is not None else 0.0
    notes = extra.pop("notes", {})
    notes.update(
        n_points=int(q.size),
        worst_query=float(q[worst]) if worst is not None else None,
        worst_slack=float(Z_SLACK * se[worst]) if worst is not None else None,
    )
    return BoundReport(
        claim_id,
        lhs,
        rhs,
        margin,
        passed,
        kind="two_sided" if two_sided else "statistical",
        config=_config(params, sim, **extra),
        constants=constants,
        low_power=sim.n_paths < LOW_POWER_PATHS,
        notes=notes,
        points=[(float(a), float(b), float(c)) for a, b, c in zip(q, p_small, p_big)],
    )


def _discounted_samples(params: ModelParams, sim: SimConfig, T: float, threads: int):
    """UTV on ``[0, T]`` and the discounted sum over ``[0, 8T]`` per path."""
    horizon = DISCOUNTED_HORIZON_MULT * T
    n_long = DISCOUNTED_HORIZON_MULT * sim.n_steps
    times = time_grid(horizon, n_long)
    c = params.c

    def run(idx):
        w = simulate_bm_batch(params.mu, horizon, n_long, sim.seed, idx)
        utv = utv_linear(w[:, : sim.n_steps + 1], c)
        return np.column_stack([utv, discounted_utv_batch(times, w, c, T)])

    # the column scan is per-call bound, so wider batches pay off
    out = mc._map_paths(run, sim.n_paths, n_long + 1, threads, budget=DISCOUNTED_BATCH_ELEMENTS)
    return out[:, 0], out[:, 1]


def verify_discounted_sum(
    params: ModelParams, sim: SimConfig, T: float | None = None, threads: int = 1
) -> list[BoundReport]:
    """Sandwich of ``UTV[0, T]`` by the discounted segment sum.

    Paths run on ``[0, 8T]`` with the step of ``sim`` over ``[0, T]``: the
    almost-sure bound needs segments starting before ``T``; the domination
    check needs the discounted tail, which beyond ``8T`` weighs ``< e^-8``.
    """
    T = params.horizon_T if T is None else T
    params = params.replace(horizon_T=T)
    utv, disc = _discounted_samples(params, sim, T, threads)
    excess = utv - N10_FACTOR * disc
    violations = int(np.count_nonzero(excess > PATHWISE_TOL))
    worst = int(np.argmax(excess))
    n10 = BoundReport(
        "LEM_3_2_N10",
        float(utv[worst]),
        float(N10_FACTOR * disc[worst]),
        float(-excess[worst]),
        violations == 0,
        kind="pathwise",
        config=_config(params, sim, window_T=T, horizon=DISCOUNTED_HORIZON_MULT * T),
        constants={"factor": N10_FACTOR},
        notes={"violations": violations, "worst_path": worst, "tolerance": PATHWISE_TOL},
        points=[(T, float(utv[worst]), float(N10_FACTOR * disc[worst]))],
    )
    small = N11_FACTOR * disc
    q, px, py, se = _ccdf_points(utv, small, N11_QUANTILES, small)
    n11 = _domination_report(
        "LEM_3_2_N11", q, px, py, se, params, sim, {"factor": N11_FACTOR},
        window_T=T, horizon=DISCOUNTED_HORIZON_MULT * T,
    )
    # the version in expectation, which is what the long-horizon lower bound uses
    mean = statistical_report(
        "LEM_3_2_N11_MEAN",
        mc.summarize(small, sim.n_steps, sim.seed),
        mc.summarize(utv, sim.n_steps, sim.seed),
        params, sim, {"factor": N11_FACTOR},
        window_T=T, horizon=DISCOUNTED_HORIZON_MULT * T,
    )
    return [n10, n11, mean]


# --- pathwise relations ----------------------------------------------------------------


def _pathwise_report(claim_id, gaps: np.ndarray, lhs, rhs, config, constants=None, **notes):
    """``gaps`` are per-path ``rhs - lhs``; the claim is ``gap >= 0``."""
    gaps = np.atleast_1d(np.asarray(gaps, dtype=float))
    worst = int(np.argmin(gaps))
    violations = int(np.count_nonzero(gaps < -PATHWISE_TOL))
    lhs, rhs = np.atleast_1d(lhs), np.atleast_1d(rhs)
    notes.update(violations=violations, n_paths=int(gaps.size), tolerance=PATHWISE_TOL)
    return BoundReport(
        claim_id,
        float(lhs[worst]),
        float(rhs[worst]),
        float(gaps[worst]),
        violations == 0,
        kind="pathwise",
        config=config,
        constants=constants or {},
        notes=notes,
    )


def _relation_reports(x: np.ndarray, split_idx: list[int], c: float, config: dict) -> list[BoundReport]:
    """Relations between TV, UTV, DTV on rows of ``x``; ``split_idx`` are interior grid indices."""
    tv, utv, dtv = tv_linear(x, c), utv_linear(x, c), dtv_linear(x, c)
    tv, utv, dtv = np.atleast_1d(tv), np.atleast_1d(utv), np.atleast_1d(dtv)
    neg = np.atleast_1d(utv_linear(-x, c))
    cuts = [0, *split_idx, x.shape[-1] - 1]
    parts = {k: np.zeros_like(tv) for k in ("tv", "utv", "dtv")}
    for a, b in zip(cuts, cuts[1:]):
        seg = x[..., a : b + 1]
        parts["tv"] += np.atleast_1d(tv_linear(seg, c))
        parts["utv"] += np.atleast_1d(utv_linear(seg, c))
        parts["dtv"] += np.atleast_1d(dtv_linear(seg, c))
    gap = utv + dtv - tv
    return [
        _pathwise_report("REL_TV_GE_UTV", tv - utv, utv, tv, config),
        _pathwise_report("REL_TV_GE_DTV", tv - dtv, dtv, tv, config),
        _pathwise_report(
            "REL_TV_LE_UTV_PLUS_DTV", gap, tv, utv + dtv, config,
            mean_gap=float(gap.mean()), max_gap=float(gap.max()),
            fraction_strict=float(np.mean(gap > PATHWISE_TOL)),
        ),
        _pathwise_report("REL_NEGATION", -np.abs(neg - dtv), neg, dtv, config),
        _pathwise_report("SUPERADD_TV", tv - parts["tv"], parts["tv"], tv, config, splits=split_idx),
        _pathwise_report("SUPERADD_UTV", utv - parts["utv"], parts["utv"], utv, config, splits=split_idx),
        _pathwise_report("SUPERADD_DTV", dtv - parts["dtv"], parts["dtv"], dtv, config, splits=split_idx),
    ]


def verify_path_relations(p, c: float, split_points: Iterable[float] = ()) -> list[BoundReport]:
    """Exact relation checks on one path; ``split_points`` are times inside its range."""
    times, x = p.times, p.values
    idx = []
    for s in sorted(split_points):
        if times.size and not times[0] <= s <= times[-1]:
            raise RegimeError(f"split point {s} outside [{times[0]}, {times[-1]}]")
        k = int(np.searchsorted(times, s, side="left"))
        if 0 < k < x.size - 1 and (not idx or k > idx[-1]):
            idx.append(k)
    if x.size == 0:
        x = np.zeros(1)
    return _relation_reports(x[np.newaxis, :], idx, c, {"c": c, "split_points": list(split_points)})


def verify_pathwise_batch(
    params: ModelParams, sim: SimConfig, threads: int = 1
) -> list[BoundReport]:
    """Relations and superadditivity on every simulated path of ``[0, T]``."""
    splits = sorted({round(f * sim.n_steps) for f in SPLIT_FRACTIONS} - {0, sim.n_steps})

    def run(idx):
        w = simulate_bm_batch(params.mu, params.horizon_T, sim.n_steps, sim.seed, idx)
        reps = _relation_reports(w, splits, params.c, {})
        # one row per batch: (worst gap, violations) for each relation
        return np.array([[v for r in reps for v in (r.margin, r.notes["violations"])]])

    rows = mc._map_paths(run, sim.n_paths, sim.n_steps + 1, threads)
    config = _config(params, sim, split_indices=splits)
    out = []
    for k, name in enumerate(CLAIM_GROUPS["relations"]):
        worst = float(rows[:, 2 * k].min())
        violations = int(rows[:, 2 * k + 1].sum())
        out.append(
            BoundReport(
                name, 0.0, worst, worst, violations == 0, kind="pathwise", config=config,
                notes={"violations": violations, "tolerance": PATHWISE_TOL},
            )
        )
    return out


def verify_shift_invariance(
    params: ModelParams, sim: SimConfig, shift_fraction: float = 0.5, threads: int = 1
) -> BoundReport:
    """UTV over ``[0, T]`` and over ``[D, T + D]`` from independent paths agree in law."""
    n, T = sim.n_steps, params.horizon_T
    m = max(1, round(shift_fraction * n))
    shift = m * T / n
    c = params.c

    def first(w):
        return utv_linear(w, c)

    x = mc.map_fixed_horizon(first, params.mu, T, sim, threads)

    def run(idx):
        shifted = [i + sim.n_paths for i in idx]
        w = simulate_bm_batch(params.mu, T + shift, n + m, sim.seed, shifted)
        return utv_linear(w[:, m:], c)

    y = mc._map_paths(run, sim.n_paths, n + m + 1, threads)
    q, px, py, se = _ccdf_points(x, y, SHIFT_QUANTILES, np.concatenate([x, y]))
    return _domination_report(
        "SHIFT_INVARIANCE", q, px, py, se, params, sim, {"n_quantiles": SHIFT_QUANTILES},
        two_sided=True, shift=shift,
    )


# --- closed forms against simulation -------------------------------------------------


def _two_sided_report(claim_id, est: EstimateCI, exact: float, allowance: float, params, sim, **extra):
    diff = abs(est.mean - exact)
    margin = allowance - diff
    notes = extra.pop("notes", {})
    notes.update(bias_allowance=allowance, z=diff / est.std_error if est.std_error else math.inf)
    return BoundReport(
        claim_id, est, exact, margin, margin >= -Z_SLACK * est.std_error, kind="two_sided",
        config=_config(params, sim, **extra), constants={"z": Z_SLACK},
        low_power=sim.n_paths < LOW_POWER_PATHS, unreliable=est.unreliable, notes=notes,
        points=[(params.c, est.mean, exact)],
    )


def verify_closed_forms(params: ModelParams, sim: SimConfig, threads: int = 1) -> list[BoundReport]:
    """``E T_c`` and the mean drawup before ``T_c`` against simulation.

    Paths run on steps of ``E T_c / n_steps``; the tolerance is ``3 SE`` plus
    the grid allowances of :mod:`truncvar.montecarlo`.
    """
    mu, c = params.mu, params.c
    tc = mc.estimate_expected_tc(params, sim, threads)
    hv = mc.estimate_sup_functional(params, sim, "until_Tc", threads)
    dt = tc.extra["dt"]
    return [
        _two_sided_report("CF_EXPECTED_TC", tc, cf.expected_tc(mu, c), mc.tc_bias_allowance(mu, c, dt), params, sim, dt=dt),
        _two_sided_report("CF_HV_MEAN", hv, cf.hv_mean(mu, c), mc.hv_mean_bias_allowance(mu, c, dt), params, sim, dt=dt),
    ]


def verify_exp_moment(
    alpha: float, params: ModelParams, sim: SimConfig, truncation_M: float = 20.0, threads: int = 1
) -> list[BoundReport]:
    """Iterated bound on ``E exp(alpha TV)`` and stability of the truncated estimate."""
    try:
        bound = cf.exp_moment_upper_bound(alpha, params)
    except InfeasibleError as exc:
        return [
            BoundReport(
                "EXP_MOMENT_BOUND", math.nan, math.inf, math.nan, False, kind="exact",
                config=_config(params, sim, alpha=alpha), notes={"infeasible": str(exc)},
            )
        ]
    est = mc.estimate_exp_moment(alpha, params, sim, truncation_M, threads)
    rep = statistical_report(
        "EXP_MOMENT_BOUND", est.at_M, bound.value, params, sim, {"alpha": alpha},
        alpha=alpha, truncation_M=truncation_M,
        notes={"delta": bound.delta, "n_factors": bound.n_factors, "denominator": bound.denominator},
    )
    stab = _two_sided_report(
        "EXP_MOMENT_TRUNCATION", est.at_M, est.at_half_M.mean, 0.0, params, sim,
        alpha=alpha, truncation_M=truncation_M,
    )
    return [rep, stab]


# --- orchestration ---------------------------------------------------------------------

CLAIM_GROUPS = {
    "long": ("THM_3_4_LOWER", "THM_3_4_UPPER", "COR_3_5_LOWER", "COR_3_5_UPPER"),
    "short": ("THM_3_7_LOWER", "THM_3_7_UPPER_9_2", "THM_3_7_UPPER_5"),
    "early_drawdown": ("LEM_3_3",),
    "ratio": ("LEM_3_3_RATIO",),
    "discounted_sum": ("LEM_3_2_N10", "LEM_3_2_N11", "LEM_3_2_N11_MEAN"),
    "relations": (
        "REL_TV_GE_UTV", "REL_TV_GE_DTV", "REL_TV_LE_UTV_PLUS_DTV", "REL_NEGATION",
        "SUPERADD_TV", "SUPERADD_UTV", "SUPERADD_DTV",
    ),
    "shift": ("SHIFT_INVARIANCE",),
    "closed_forms": ("CF_EXPECTED_TC", "CF_HV_MEAN"),
    "exp_moment": ("EXP_MOMENT_BOUND", "EXP_MOMENT_TRUNCATION"),
}
ALL_CLAIMS = tuple(c for group in CLAIM_GROUPS.values() for c in group)


def claim_selected(claim_id: str, filters) -> bool:
    """A claim runs if no filter is given or one filter is a prefix of its id."""
    return not filters or any(claim_id.startswith(f.upper()) for f in filters)


def ratio_grid(n: int = 100) -> list[tuple[float, float]]:
    """``n`` points with ``mu c`` spread over ``[-3, 3]`` and ``c`` cycling over a few levels."""
    levels = (0.5, 1.0, 2.0, 3.0)
    return [(x / levels[k % 4], levels[k % 4]) for k, x in enumerate(np.linspace(-3.0, 3.0, n))]


@dataclass(frozen=True)
class VerifyConfig:
    sim: SimConfig = SimConfig(n_steps=1000, n_paths=2000, seed=42)
    grid: tuple = DEFAULT_GRID
    horizon_T: float = 1.0
    alpha: float = 0.5
    truncation_M: float = 20.0
    threads: int = 1
    refine: bool = False
    claims: tuple = ()


def run_verification(cfg: VerifyConfig) -> list[BoundReport]:
    """Every selected claim over the grid, in a fixed order."""

    def want(group):
        return any(claim_selected(c, cfg.claims) for c in CLAIM_GROUPS[group])

    sim, th = cfg.sim, cfg.threads
    reports: list[BoundReport] = []
    if want("ratio"):
        reports.append(verify_moment_ratio(ratio_grid()))
    for mu, c in cfg.grid:
        base = ModelParams(mu=mu, c=c, horizon_T=cfg.horizon_T)
        etc = cf.expected_tc(mu, c)
        if want("long"):
            reports += verify_long_regime(RegimeParams.of(base.replace(horizon_T=LONG_T_MULT * etc)), sim, th, cfg.refine)
        if want("short"):
            reports += verify_short_regime(RegimeParams.of(base.replace(horizon_T=SHORT_T_MULT * etc)), sim, th, cfg.refine)
        if want("early_drawdown"):
            reports.append(verify_early_drawdown(base, sim, th))
        if want("discounted_sum"):
            reports += verify_discounted_sum(base, sim, threads=th)
        if want("relations"):
            reports += verify_pathwise_batch(base, sim, th)
        if want("shift"):
            reports.append(verify_shift_invariance(base, sim, threads=th))
        if want("closed_forms"):
            reports += verify_closed_forms(base, sim, th)
    if want("exp_moment"):
        reports += verify_exp_moment(cfg.alpha, ModelParams(mu=0.0, c=1.0, horizon_T=cfg.horizon_T), sim, cfg.truncation_M, th)
    return [r for r in reports if claim_selected(r.claim_id, cfg.claims)]


# Names used by the published operation list.
verify_lemma32 = verify_discounted_sum
verify_lemma33 = verify_early_drawdown
