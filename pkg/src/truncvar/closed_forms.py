"""Closed-form quantities for drifted Brownian motion ``W_t = B_t + mu*t``.

Conventions used throughout:

* ``T_c`` is the first time the drawdown ``max_{s<=t} W_s - W_t`` reaches ``c``.
* "drawup before ``T_c``" is ``sup_{0<=t<=s<=T_c} (W_s - W_t)``.
* ``drawup_cdf_complement(y, mu, T)`` is ``P(sup_{0<=t<=s<=T} (W_s - W_t) >= y)``
  with ``mu`` the drift of ``W`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import DomainError, InfeasibleError, ParameterError, SeriesTruncationError
from .paths import ModelParams

# expected_tc switches to its Taylor series below this |mu*c|
TC_SERIES_SWITCH = 1e-4
# the second-moment ratio cancels to O((mu*c)^4); series below this |mu*c|
RATIO_SERIES_SWITCH = 0.5
_SERIES_TERMS = 40

# Drift sign fed into the eigen-expansion for a drawup of W. Fixed once by
# comparing both signs against simulated drawups (scripts/calibrate_drawup_sign.py).
DRAWUP_DRIFT_SIGN = 1

# Coefficient of the hyperbolic mode in the drawup expansion. The value 1 makes
# the modes sum to one at T = 0 and is continuous with the 3/2 boundary mode.
ETA_MODE_WEIGHT = 1.0


def _check_level(c: float):
    if not c > 0:
        raise ParameterError(f"c must be positive, got {c}")


@lru_cache(maxsize=None)
def _ratio_series_coeffs() -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Taylor coefficients of ``N(x)/x^2`` and ``D(x)/x^4``.

    ``N(x) = e^{2x} - 1 - 2x`` and ``D(x) = e^{4x} - 6x e^{2x} + e^{2x} + 2x^2 - 2``;
    ``D`` vanishes to fourth order at zero.
    """
    fact = [math.factorial(k) for k in range(_SERIES_TERMS + 6)]
    n_coef = [Fraction(2**k, fact[k]) for k in range(2, _SERIES_TERMS + 2)]
    d_coef = []
    for k in range(4, _SERIES_TERMS + 4):
        d = Fraction(4**k + 2**k, fact[k]) - Fraction(6 * 2 ** (k - 1), fact[k - 1])
        d_coef.append(d)
    return tuple(float(v) for v in n_coef), tuple(float(v) for v in d_coef)


def _poly(coefs, x: float) -> float:
    acc = 0.0
    for a in reversed(coefs):
        acc = acc * x + a
    return acc


def _n_over_x2(x: float) -> float:
    """``(e^{2x} - 1 - 2x) / x^2`` without cancellation near zero."""
    if abs(x) < RATIO_SERIES_SWITCH:
        return _poly(_ratio_series_coeffs()[0], x)
    return (math.expm1(2 * x) - 2 * x) / (x * x)


def expected_tc(mu: float, c: float) -> float:
    """``E T_c = (e^{2 mu c} - 1 - 2 mu c) / (2 mu^2)``, equal to ``c^2`` without drift."""
    _check_level(c)
    x = mu * c
    if abs(x) < TC_SERIES_SWITCH:
        return c * c * _poly(_ratio_series_coeffs()[0], x) / 2.0
    if 2 * x > 700:
        log_val = 2 * x + math.log1p(-(1 + 2 * x) * math.exp(-2 * x)) - math.log(2 * mu * mu)
        return math.exp(log_val) if log_val < 709 else math.inf
    return (math.expm1(2 * x) - 2 * x) / (2 * mu * mu)


def expected_tc_direct(mu: float, c: float) -> float:
    """Unguarded evaluation of :func:`expected_tc`, exposed for continuity checks."""
    _check_level(c)
    return (math.expm1(2 * mu * c) - 2 * mu * c) / (2 * mu * mu)


def tc_moment_ratio(mu: float, c: float) -> float:
    """``(E T_c)^2 / E T_c^2``.

    Equals ``1/2 * N(x)^2 / D(x)`` with ``x = mu*c``; tends to 3/5 as
    ``x -> 0``, to 1/2 as ``x -> +inf`` and to 1 as ``x -> -inf``.
    """
    _check_level(c)
    x = mu * c
    if abs(x) < RATIO_SERIES_SWITCH:
        n_coef, d_coef = _ratio_series_coeffs()
        return 0.5 * _poly(n_coef, x) ** 2 / _poly(d_coef, x)
    if x > 0:
        # divide numerator and denominator by e^{4x}
        e2 = math.exp(-2 * x)
        num = (1.0 - (1.0 + 2 * x) * e2) ** 2
        den = 1.0 - 6 * x * e2 + e2 + (2 * x * x - 2) * e2 * e2
        return 0.5 * num / den
    e2 = math.exp(2 * x)
    num = (e2 - 1.0 - 2 * x) ** 2
    den = e2 * e2 - 6 * x * e2 + e2 + 2 * x * x - 2
    return 0.5 * num / den


def tc_second_moment(mu: float, c: float) -> float:
    return expected_tc(mu, c) ** 2 / tc_moment_ratio(mu, c)


def hv_prefactor(mu: float, c: float) -> float:
    """``P(drawup before T_c >= c) = (e^{2x} - 2x - 1) / (e^{2x} + e^{-2x} - 2)``, ``x = mu*c``."""
    _check_level(c)
    x = mu * c
    if abs(x) < RATIO_SERIES_SWITCH:
        shx = math.sinh(x) / x if x != 0 else 1.0
        return _n_over_x2(x) / (4.0 * shx * shx)
    if x > 0:
        e2 = math.exp(-2 * x)
        return (1.0 - (2 * x + 1) * e2) / (1.0 - e2) ** 2
    e2 = math.exp(2 * x)
    return (e2 - 2 * x - 1) * e2 / (1.0 - e2) ** 2


def hv_rate(mu: float, c: float) -> float:
    """Exponential decay rate ``2 mu / (e^{2 mu c} - 1)`` of the drawup tail; ``1/c`` at ``mu = 0``."""
    _check_level(c)
    if mu == 0:
        return 1.0 / c
    return 2 * mu / math.expm1(2 * mu * c)


def hv_tail(mu: float, c: float, y: float) -> float:
    """``P(sup_{0<=t<=s<=T_c} (W_s - W_t) >= y)`` for ``y > c``."""
    _check_level(c)
    if not y > c:
        raise DomainError(f"drawup tail before T_c is only available for y > c (y={y}, c={c})")
    return hv_prefactor(mu, c) * math.exp(-hv_rate(mu, c) * (y - c))


def hv_mean(mu: float, c: float) -> float:
    """``E sup_{0<=t<=s<=T_c} (W_s - W_t - c)_+``, the integral of :func:`hv_tail` over ``(c, inf)``."""
    return hv_prefactor(mu, c) / hv_rate(mu, c)


# --- drawup distribution over a fixed horizon -------------------------------------


@dataclass(frozen=True)
class SeriesConfig:
    max_terms: int = 10_000
    term_tolerance: float = 1e-12

    def __post_init__(self):
        if self.max_terms < 1:
            raise ParameterError("max_terms must be >= 1")
        if not self.term_tolerance > 0:
            raise ParameterError("term_tolerance must be positive")


@dataclass(frozen=True)
class SeriesValue:
    value: float
    n_terms: int
    residual: float
    form: str = "complement"


@dataclass(frozen=True)
class EigenRoots:
    theta: tuple[float, ...]
    eta: float | None
    mu_y: float


def _g_theta(mu_y: float, theta):
    return mu_y * np.sin(theta) + theta * np.cos(theta)


def _bisect(func, lo: np.ndarray, hi: np.ndarray, sign_lo: np.ndarray, max_iter: int = 200):
    """Vectorised bisection to machine precision given the sign of ``func`` at ``lo``."""
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        done = (mid <= lo) | (mid >= hi)
        if done.all():
            break
        val = func(mid)
        same = np.sign(val) == sign_lo
        exact = val == 0
        lo = np.where(same & ~done, mid, lo)
        hi = np.where(~same & ~done, mid, hi)
        lo = np.where(exact, mid, lo)
        hi = np.where(exact, mid, hi)
    return 0.5 * (lo + hi)


def _theta_block(mu_y: float, first: int, stop: int) -> np.ndarray:
    """Roots number ``first .. stop-1`` (0-based) of ``mu_y*sin(t) + t*cos(t)``.

    One root lies in each ``((k-1/2)pi, (k+1/2)pi)``, ``k >= 1``. When
    ``-1 < mu_y < 0`` there is one more, in ``(0, pi/2)``, and it comes first.
    """
    if stop <= first:
        return np.empty(0)
    extra = 1 if -1.0 < mu_y < 0.0 else 0
    idx = np.arange(first, stop)
    k = idx + 1 - extra
    if mu_y == 0:
        return (k - 0.5) * math.pi
    lo = (k - 0.5) * math.pi
    hi = (k + 0.5) * math.pi
    sign_lo = np.where(k % 2 == 1, 1.0, -1.0) * math.copysign(1.0, mu_y)
    if extra and first == 0:
        lo[0], hi[0], sign_lo[0] = 0.0, 0.5 * math.pi, 1.0
    return _bisect(lambda t: _g_theta(mu_y, t), lo, hi, sign_lo)


def eigenroots_theta(mu_y: float, n: int) -> list[float]:
    """First ``n`` positive roots of ``tan(theta) = -theta / mu_y``, increasing."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    return _theta_block(float(mu_y), 0, n).tolist()


def eigenroot_eta(mu_y: float) -> float | None:
    """Positive root of ``tanh(eta) = -eta / mu_y``; exists only for ``mu_y < -1``."""
    if not mu_y < -1.0:
        return None
    a = abs(mu_y)
    root = _bisect(
        lambda e: mu_y * np.tanh(e) + e,
        np.array([0.0]),
        np.array([a]),
        np.array([-1.0]),
    )
    return float(root[0])


def eigenroots(mu_y: float, n: int) -> EigenRoots:
    return EigenRoots(tuple(eigenroots_theta(mu_y, n)), eigenroot_eta(mu_y), mu_y)


def _hyperbolic_mode(y: float, mu: float, T: float, eta_weight: float):
    """``(log-free weight, decay rate)`` of the non-oscillating mode, or ``None``.

    The weight already includes the ``2 e^{mu y}`` prefactor.
    """
    mu_y = mu * y
    rate0 = 0.5 * mu * mu
    if mu_y == -1.0:
        return 2.0 * math.exp(mu_y) * 1.5, rate0
    eta = eigenroot_eta(mu_y)
    if eta is None:
        return None
    # 2 e^{mu y} eta sinh(eta), combined to stay finite for large |mu y|
    num = eta * (math.exp(eta + mu_y) - math.exp(-eta + mu_y))
    den = eta * eta - mu_y * mu_y - mu_y
    rate = rate0 - eta * eta / (2 * y * y)
    return eta_weight * num / den, rate


class _CompensatedSum:
    """Running Neumaier sum; ``value`` is available after every ``add``."""

    __slots__ = ("total", "comp")

    def __init__(self):
        self.total = 0.0
        self.comp = 0.0

    def add(self, v: float):
        t = self.total + v
        if abs(self.total) >= abs(v):
            self.comp += (self.total - t) + v
        else:
            self.comp += (v - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self.comp


def _drawup_series(y: float, mu: float, T: float, cfg: SeriesConfig, form: str, eta_weight: float):
    if form not in ("complement", "direct"):
        raise ParameterError(f"unknown series form {form!r}")
    mu_y = mu * y
    acc = _CompensatedSum()
    hyper = _hyperbolic_mode(y, mu, T, eta_weight)
    if hyper is not None:
        w, rate = hyper
        acc.add(w * math.exp(-rate * T) if form == "complement" else -w * math.expm1(-rate * T))

    block = 64
    n_terms = 0
    residual = math.inf
    small_run = 0
    partial_prev = None
    averaged_prev = None
    while n_terms < cfg.max_terms:
        stop = min(n_terms + block, cfg.max_terms)
        theta = _theta_block(mu_y, n_terms, stop)
        coef = theta * np.sin(theta) / (theta * theta + mu_y * mu_y + mu_y)
        exponent = -(theta * theta) * T / (2 * y * y) - 0.5 * mu * mu * T
        if form == "complement":
            vals = 2.0 * coef * np.exp(exponent + mu_y)
        else:
            vals = -2.0 * coef * np.exp(mu_y) * np.expm1(exponent)
        for v in vals.tolist():
            acc.add(v)
            n_terms += 1
            if form == "complement":
                residual = abs(v)
                small_run = small_run + 1 if residual < cfg.term_tolerance else 0
                if small_run >= 2:
                    return acc.value, n_terms, residual
            else:
                # alternating tail: average consecutive partial sums
                partial = acc.value
                if partial_prev is not None:
                    averaged = 0.5 * (partial + partial_prev)
                    if averaged_prev is not None:
                        residual = abs(averaged - averaged_prev)
                        if residual < cfg.term_tolerance:
                            return averaged, n_terms, residual
                    averaged_prev = averaged
                partial_prev = partial
        block = min(block * 2, 4096)

    partial = acc.value
    if form == "direct" and partial_prev is not None:
        partial = 0.5 * (partial + partial_prev)
    raise SeriesTruncationError(
        f"drawup series did not converge in {cfg.max_terms} terms (residual {residual:.3g})",
        partial_sum=partial,
        n_terms=n_terms,
        residual=residual,
    )


def drawup_cdf_complement(
    y: float,
    mu: float,
    T: float,
    cfg: SeriesConfig | None = None,
    form: str = "complement",
) -> SeriesValue:
    """``P(sup_{0<=t<=s<=T} (W_s - W_t) >= y)`` from the eigenfunction expansion.

    The survival of the drawup process below ``y`` expands over modes
    ``theta_n`` (roots of ``tan(theta) = -theta/(mu y)``) plus, when
    ``mu y <= -1``, one non-oscillating mode. Two summation orders are offered:

    ``"complement"``
        ``1 - 2 e^{mu y} sum a_n exp(-lambda_n T)``; the terms decay like a
        Gaussian in ``theta_n`` so the series converges in a handful of terms
        unless ``T`` is tiny relative to ``y^2``.
    ``"direct"``
        ``2 e^{mu y} sum a_n (1 - exp(-lambda_n T))``; terms decay only like
        ``1/theta_n`` with alternating sign, so the partial sums are averaged
        and convergence is slow. Kept as an independent cross-check.

    Raises :class:`SeriesTruncationError` when ``cfg.max_terms`` is reached
    before two consecutive terms (or the averaged residual) drop below
    ``cfg.term_tolerance``.
    """
    cfg = cfg or SeriesConfig()
    if not y > 0:
        raise DomainError(f"y must be positive, got {y}")
    if not T > 0:
        raise ParameterError(f"T must be positive, got {T}")
    drift = DRAWUP_DRIFT_SIGN * mu
    total, n_terms, residual = _drawup_series(y, drift, T, cfg, form, ETA_MODE_WEIGHT)
    value = 1.0 - total if form == "complement" else total
    return SeriesValue(min(max(value, 0.0), 1.0), n_terms, residual, form)


def drawdown_before(delta: float, mu: float, c: float, cfg: SeriesConfig | None = None) -> float:
    """``P(T_c < delta)``: a drawdown of ``c`` for drift ``mu`` is a drawup for ``-mu``."""
    return drawup_cdf_complement(c, -mu, delta, cfg).value


# --- running maximum and the exponential-moment bound ------------------------------


def sup_bm_tail(x, mu: float, T: float):
    """``P(sup_{0<=t<=T} W_t >= x)`` for ``x >= 0`` (reflection principle)."""
    x = np.asarray(x, dtype=float)
    s = math.sqrt(T)
    first = special.ndtr(-(x - mu * T) / s)
    second = np.exp(2 * mu * x + special.log_ndtr((-x - mu * T) / s))
    return np.where(x <= 0, 1.0, np.minimum(first + second, 1.0))


def sup_bm_mgf(alpha: float, mu: float, T: float) -> float:
    """``E exp(alpha * sup_{0<=t<=T} W_t)`` by quadrature of ``alpha e^{alpha x} P(sup >= x)``."""
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not T > 0:
        raise ParameterError(f"T must be positive, got {T}")
    s = math.sqrt(T)
    peak = max(0.0, (mu + alpha) * T)
    upper = peak + 40.0 * s + 10.0

    def integrand(x):
        tail = float(sup_bm_tail(x, mu, T))
        if tail <= 0:
            return 0.0
        log_val = alpha * x + math.log(tail)
        if log_val > 700:
            raise OverflowError(f"sup mgf integrand exceeds double range at x={x:g}")
        return alpha * math.exp(log_val)

    points = [p for p in (peak, peak + 5 * s) if 0 < p < upper]
    value, abserr = integrate.quad(integrand, 0.0, upper, points=points or None, limit=200)
    if not math.isfinite(value) or abserr > 1e-8 * max(1.0, abs(value)):
        raise ArithmeticError(f"quadrature for sup mgf failed (value={value}, err={abserr})")
    return 1.0 + value


@dataclass(frozen=True)
class ExpMomentBound:
    value: float
    delta: float
    n_factors: int
    factor: float
    denominator: float
    sup_factor: float  # E exp(alpha sup W + alpha c)


def exp_moment_upper_bound(
    alpha: float,
    params: ModelParams,
    min_denominator: float = 0.5,
    delta_min_ratio: float = 1e-6,
    cfg: SeriesConfig | None = None,
) -> ExpMomentBound:
    """Iterated upper bound on ``E exp(alpha * TV[0, T])``.

    With ``A = E exp(alpha sup_{[0,T]} W + alpha c)`` and ``p(d) = P(T_c < d)``
    the bound is ``(A (1 - p) / (1 - A p))^ceil(T/d)``. The step ``d`` is the
    largest one in ``(0, T]`` whose denominator ``1 - A p(d)`` stays at least
    ``min_denominator``, rounded down to ``T/k`` so no factor is wasted.
    """
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not 0 < min_denominator < 1:
        raise ParameterError("min_denominator must lie in (0, 1)")
    T, c, mu = params.horizon_T, params.c, params.mu
    try:
        A = math.exp(alpha * c) * sup_bm_mgf(alpha, mu, T)
    except ArithmeticError as exc:
        raise InfeasibleError(f"E exp(alpha sup W) is not representable: {exc}") from None

    def denominator(d: float) -> float:
        return 1.0 - A * drawdown_before(d, mu, c, cfg)

    d_min = T * delta_min_ratio
    if denominator(T) >= min_denominator:
        best = T
    else:
        if denominator(d_min) < min_denominator:
            raise InfeasibleError(
                f"no step >= {d_min:.3g} keeps 1 - A p(delta) >= {min_denominator} "
                f"(alpha={alpha} is too large for c={c})"
            )
        lo, hi = d_min, T
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if denominator(mid) >= min_denominator:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-10 * T:
                break
        best = lo
    k = math.ceil(T / best * (1 - 1e-12))
    delta = T / k
    p = drawdown_before(delta, mu, c, cfg)
    den = 1.0 - A * p
    factor = A * (1.0 - p) / den
    log_bound = k * math.log(factor)
    if log_bound > 700:
        raise InfeasibleError(f"bound overflows: log value {log_bound:.1f}")
    return ExpMomentBound(math.exp(log_bound), delta, k, factor, den, A)
