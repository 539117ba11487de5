"""Truncated variation of sampled paths.

All suprema run over sample indices. The linear-time dynamic programs accept
either a :class:`~truncvar.paths.Path`, a 1-d array, or a 2-d array whose rows
are independent paths of equal length; in the batched case the loop runs over
time and every step is vectorised across rows.

For UTV the DP is

    f(i) = max(f(i-1), M(i) + x_i - c),   M(i) = max_{j<i} (f(j) - x_j),

and TV adds the mirrored term ``max_{j<i}(f(j) + x_j) - x_i - c``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterError
from .paths import Path

EXHAUSTIVE_MAX_LEN = 14


class VariationKind(str, enum.Enum):
    TV = "tv"
    UTV = "utv"
    DTV = "dtv"


@dataclass(frozen=True)
class Partition:
    """Interleaved ``(buy, sell)`` index pairs, ``t_1 < s_1 < t_2 < s_2 < ...``."""

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple((int(t), int(s)) for t, s in self.pairs)
        flat = [i for pair in pairs for i in pair]
        if any(b <= a for a, b in zip(flat, flat[1:])):
            raise ParameterError(f"pairs are not strictly interleaved: {pairs}")
        if flat and flat[0] < 0:
            raise ParameterError("negative index in partition")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def evaluate(self, values, c: float) -> float:
        x = _as_values(values)
        return math.fsum(max(x[s] - x[t] - c, 0.0) for t, s in self.pairs)


@dataclass(frozen=True)
class SegmentStats:
    """One stretch between consecutive first-drawdown times.

    ``tc_index`` is the first index where the drawdown from the segment's
    running maximum reaches ``c`` (``None`` for the final, unfinished
    segment). ``argmax_index`` is the last index attaining that maximum
    before ``tc_index``; ``argmin_index`` attains the minimum on
    ``[start_index, argmax_index]``.
    """

    start_index: int
    tc_index: int | None
    argmax_index: int
    argmin_index: int
    max_drawup: float


def _as_values(p) -> np.ndarray:
    if isinstance(p, Path):
        return p.values
    return np.asarray(p, dtype=float)


def _check_level(c: float):
    if not c >= 0:
        raise ParameterError(f"truncation level must be >= 0, got {c}")


def _as_batch(p) -> tuple[np.ndarray, bool]:
    x = _as_values(p)
    if x.ndim == 1:
        return x[np.newaxis, :], True
    if x.ndim == 2:
        return x, False
    raise ParameterError(f"expected a path or a 2-d batch of paths, got shape {x.shape}")


def _finish(out: np.ndarray, scalar: bool):
    return float(out[0]) if scalar else out


def _single_finite(x: np.ndarray) -> bool:
    # one path: float arithmetic beats per-step numpy calls on length-1 arrays
    return x.shape[0] == 1 and bool(np.isfinite(x).all())


def _utv_floats(xs: list[float], c: float) -> float:
    f, m_minus = 0.0, -xs[0]
    for xi in xs[1:]:
        v = m_minus + xi - c
        if v > f:
            f = v
        v = f - xi
        if v > m_minus:
            m_minus = v
    return f


def _tv_floats(xs: list[float], c: float) -> float:
    f, m_minus, m_plus = 0.0, -xs[0], xs[0]
    for xi in xs[1:]:
        v = m_minus + xi - c
        if v > f:
            f = v
        v = m_plus - xi - c
        if v > f:
            f = v
        v = f - xi
        if v > m_minus:
            m_minus = v
        v = f + xi
        if v > m_plus:
            m_plus = v
    return f


def utv_linear(p, c: float):
    """Upward truncated variation in O(n)."""
    _check_level(c)
    x, scalar = _as_batch(p)
    f = np.zeros(x.shape[0])
    if x.shape[1] < 2:
        return _finish(f, scalar)
    if _single_finite(x):
        out = _utv_floats(x[0].tolist(), c)
        return out if scalar else np.array([out])
    m_minus = -x[:, 0].copy()
    for i in range(1, x.shape[1]):
        xi = x[:, i]
        np.maximum(f, m_minus + xi - c, out=f)
        np.maximum(m_minus, f - xi, out=m_minus)
    return _finish(f, scalar)


def dtv_linear(p, c: float):
    """Downward truncated variation, i.e. UTV of the negated path."""
    return utv_linear(-_as_values(p), c)


def tv_linear(p, c: float):
    """Truncated variation in O(n)."""
    _check_level(c)
    x, scalar = _as_batch(p)
    f = np.zeros(x.shape[0])
    if x.shape[1] < 2:
        return _finish(f, scalar)
    if _single_finite(x):
        out = _tv_floats(x[0].tolist(), c)
        return out if scalar else np.array([out])
    m_minus = -x[:, 0].copy()
    m_plus = x[:, 0].copy()
    for i in range(1, x.shape[1]):
        xi = x[:, i]
        np.maximum(f, m_minus + xi - c, out=f)
        np.maximum(f, m_plus - xi - c, out=f)
        np.maximum(m_minus, f - xi, out=m_minus)
        np.maximum(m_plus, f + xi, out=m_plus)
    return _finish(f, scalar)


_LINEAR = {
    VariationKind.TV: tv_linear,
    VariationKind.UTV: utv_linear,
    VariationKind.DTV: dtv_linear,
}


def variation(p, c: float, kind: VariationKind | str):
    return _LINEAR[VariationKind(kind)](p, c)


def utv_greedy_batch(p, c: float):
    """UTV as a sum over first-drawdown segments, one forward pass.

    Each segment contributes ``(max drawup - c)_+``; a segment closes at the
    first index where the drawdown from its running maximum reaches ``c``
    and the next one starts at that same index.
    """
    _check_level(c)
    x, scalar = _as_batch(p)
    total = np.zeros(x.shape[0])
    if x.shape[1] == 0:
        return _finish(total, scalar)
    run_min = x[:, 0].copy()
    run_max = x[:, 0].copy()
    drawup = np.zeros(x.shape[0])
    for i in range(1, x.shape[1]):
        xi = x[:, i]
        np.minimum(run_min, xi, out=run_min)
        np.maximum(drawup, xi - run_min, out=drawup)
        np.maximum(run_max, xi, out=run_max)
        hit = run_max - xi >= c
        if hit.any():
            total[hit] += np.maximum(drawup[hit] - c, 0.0)
            run_min[hit] = xi[hit]
            run_max[hit] = xi[hit]
            drawup[hit] = 0.0
    total += np.maximum(drawup - c, 0.0)
    return _finish(total, scalar)


def utv_greedy_segments(p, c: float) -> tuple[float, list[SegmentStats]]:
    """UTV of one path together with the segment decomposition behind it."""
    _check_level(c)
    x = _as_values(p)
    if x.ndim != 1:
        raise ParameterError("utv_greedy_segments takes a single path")
    if x.size == 0:
        return 0.0, []
    xs = x.tolist()
    segments: list[SegmentStats] = []
    total = 0.0

    start = 0
    run_min, run_max, drawup = xs[0], xs[0], 0.0
    i_min = i_max = i_argmin = 0
    for i in range(1, len(xs)):
        xi = xs[i]
        if xi < run_min:
            run_min, i_min = xi, i
        drawup = max(drawup, xi - run_min)
        if xi >= run_max:
            run_max, i_max, i_argmin = xi, i, i_min
        if run_max - xi >= c:
            segments.append(SegmentStats(start, i, i_max, i_argmin, drawup))
            total += max(drawup - c, 0.0)
            start = i
            run_min = run_max = xi
            drawup = 0.0
            i_min = i_max = i_argmin = i
    segments.append(SegmentStats(start, None, i_max, i_argmin, drawup))
    total += max(drawup - c, 0.0)
    return total, segments


def _gain_matrix(x: np.ndarray, c: float, kind: VariationKind) -> np.ndarray:
    """``gain[..., j, i]`` for a pair ``(j, i)`` with ``j < i`` (lower part unused)."""
    diff = x[..., np.newaxis, :] - x[..., :, np.newaxis]
    if kind is VariationKind.TV:
        diff = np.abs(diff)
    elif kind is VariationKind.DTV:
        diff = -diff
    return diff - c


def quadratic_oracle(p, c: float, kind: VariationKind | str):
    """O(n^2) reference DP: ``f(i) = max(f(i-1), max_{j<i} f(j) + gain(j, i))``.

    The pair gain is taken without the positive part; a non-positive pair is
    never better than carrying ``f(i-1)`` forward, so the supremum is the same.
    """
    kind = VariationKind(kind)
    _check_level(c)
    x, scalar = _as_batch(p)
    n = x.shape[1]
    f = np.zeros((x.shape[0], max(n, 1)))
    if n >= 2:
        gain = _gain_matrix(x, c, kind)
        for i in range(1, n):
            best = (f[:, :i] + gain[:, :i, i]).max(axis=1)
            f[:, i] = np.maximum(f[:, i - 1], best)
    return _finish(f[:, -1].copy(), scalar)


@lru_cache(maxsize=2 * EXHAUSTIVE_MAX_LEN)
def _partition_incidence(n: int, chained: bool) -> np.ndarray:
    """Rows enumerate every admissible index set; columns are flattened ``(j, i)`` pairs.

    ``chained`` selects TV chains ``t_1 <= ... <= t_k`` (consecutive pairs);
    otherwise disjoint interleaved pairs ``t_1 < s_1 < t_2 < ...``.
    """
    rows = []
    sizes = range(2, n + 1) if chained else range(2, n + 1, 2)
    for k in sizes:
        for idx in itertools.combinations(range(n), k):
            row = np.zeros(n * n)
            step = 1 if chained else 2
            for a in range(0, k - 1, step):
                row[idx[a] * n + idx[a + 1]] = 1.0
            rows.append(row)
    return np.array(rows)


def exhaustive_oracle(p, c: float, kind: VariationKind | str):
    """Ground truth by enumerating every partition; paths of at most 14 samples."""
    kind = VariationKind(kind)
    _check_level(c)
    x, scalar = _as_batch(p)
    n = x.shape[1]
    if n > EXHAUSTIVE_MAX_LEN:
        raise ParameterError(
            f"exhaustive enumeration refused for {n} samples (limit {EXHAUSTIVE_MAX_LEN})"
        )
    if n < 2:
        return _finish(np.zeros(x.shape[0]), scalar)
    gains = np.maximum(_gain_matrix(x, c, kind), 0.0).reshape(x.shape[0], n * n)
    inc = _partition_incidence(n, kind is VariationKind.TV)
    best = (inc @ gains.T).max(axis=0)
    return _finish(np.maximum(best, 0.0), scalar)


def utv_argmax_partition(p, c: float) -> Partition:
    """Partition attaining the UTV on the sample grid.

    Ties go to the earliest buy index, and a pair is only opened when it
    strictly improves on carrying the previous value forward, so every
    returned pair has a strictly positive gain.
    """
    _check_level(c)
    x = _as_values(p)
    if x.ndim != 1:
        raise ParameterError("utv_argmax_partition takes a single path")
    n = x.size
    if n < 2:
        return Partition()
    xs = x.tolist()
    f = [0.0] * n
    buy_from = [-1] * n
    best_m, best_j = -xs[0], 0
    for i in range(1, n):
        cand = best_m + xs[i] - c
        if cand > f[i - 1]:
            f[i] = cand
            buy_from[i] = best_j
        else:
            f[i] = f[i - 1]
        if f[i] - xs[i] > best_m:
            best_m, best_j = f[i] - xs[i], i

    pairs = []
    i = n - 1
    while i > 0:
        j = buy_from[i]
        if j < 0:
            i -= 1
        else:
            if pairs and pairs[-1][0] == i:
                # selling and rebuying at i; one pair is never worse for c >= 0
                pairs[-1] = (j, pairs[-1][1])
            else:
                pairs.append((j, i))
            i = j
    # rounding can open a pair worth nothing at c = 0
    pairs = [(t, s) for t, s in reversed(pairs) if xs[s] - xs[t] - c > 0]
    return Partition(tuple(pairs))


def first_drawdown_time(p, c: float, from_index: int = 0) -> int | None:
    """First ``i >= from_index`` with ``max(x[from_index..i]) - x[i] >= c``."""
    x = _as_values(p)
    if not 0 <= from_index < max(x.size, 1):
        raise ParameterError(f"from_index {from_index} outside path of length {x.size}")
    if x.size == 0:
        return None
    tail = x[from_index:]
    hits = np.flatnonzero(np.maximum.accumulate(tail) - tail >= c)
    return int(from_index + hits[0]) if hits.size else None


def max_drawup(values, axis: int = -1):
    """``max_{t <= s} (x_s - x_t)`` along ``axis`` (0 for a single sample)."""
    x = np.asarray(values, dtype=float)
    return (x - np.minimum.accumulate(x, axis=axis)).max(axis=axis)


def drawdown_stopping_times(p, c: float) -> list[int]:
    """Indices of the successive first-drawdown times ``T_c^(1), T_c^(2), ...``."""
    if not c > 0:
        raise ParameterError(f"stopping-time sequence needs c > 0, got {c}")
    x = _as_values(p)
    out = []
    start = 0
    while x.size and start < x.size - 1:
        tc = first_drawdown_time(x, c, start)
        if tc is None:
            break
        out.append(tc)
        start = tc
    return out


def discounted_utv(p: Path, c: float, T: float) -> float:
    """Discounted segment sum used to sandwich UTV between two constants.

    Segment ``i`` runs from the ``(i-1)``-th first-drawdown time ``tau`` to
    the next one, cut at ``tau + T``; its ``(max drawup - c)_+`` is weighted
    by ``exp(-tau / T)``. The sum is truncated at the end of the path.
    """
    if not T > 0:
        raise ParameterError(f"T must be positive, got {T}")
    if not c > 0:
        raise ParameterError(f"c must be positive, got {c}")
    times, x = p.times, p.values
    if x.size < 2:
        return 0.0
    starts = [0] + drawdown_stopping_times(x, c)
    terms = []
    for k, start in enumerate(starts):
        t0 = times[start]
        horizon_end = int(np.searchsorted(times, t0 + T * (1.0 + 1e-12), side="right")) - 1
        end = starts[k + 1] if k + 1 < len(starts) else x.size - 1
        end = min(end, horizon_end)
        gain = max_drawup(x[start : end + 1]) - c
        if gain > 0:
            terms.append(math.exp(-t0 / T) * gain)
    return math.fsum(terms)


def discounted_utv_batch(times, values, c: float, T: float) -> np.ndarray:
    """:func:`discounted_utv` for every row of ``values`` on the common grid ``times``.

    One pass over the columns with per-row segment state; agrees with the
    per-path version up to summation order.
    """
    if not T > 0:
        raise ParameterError(f"T must be positive, got {T}")
    if not c > 0:
        raise ParameterError(f"c must be positive, got {c}")
    times = np.asarray(times, dtype=float)
    x = np.atleast_2d(np.asarray(values, dtype=float))
    rows, n = x.shape
    total = np.zeros(rows)
    if n < 2:
        return total
    reach = T * (1.0 + 1e-12)
    t0 = np.full(rows, times[0])
    peak = x[:, 0].copy()
    low = x[:, 0].copy()
    up = np.zeros(rows)

    def close(mask):
        gain = up[mask] - c
        total[mask] += np.where(gain > 0, np.exp(-t0[mask] / T) * gain, 0.0)

    for j in range(1, n):
        xj = x[:, j]
        inside = times[j] <= t0 + reach
        low = np.where(inside, np.minimum(low, xj), low)
        up = np.where(inside, np.maximum(up, xj - low), up)
        np.maximum(peak, xj, out=peak)
        hit = peak - xj >= c
        if hit.any():
            close(hit)
            t0[hit] = times[j]
            peak[hit] = low[hit] = xj[hit]
            up[hit] = 0.0
    close(np.ones(rows, dtype=bool))
    return total
