"""Model building blocks for bursty production-degradation kinetics.

A model couples three ingredients: a burst-arrival rate law (how often
production events fire as a function of the current copy number or
concentration), a degradation law, and a burst-size law.  The discrete
model lives on counts n = 0, 1, 2, ...; the continuous model lives on
concentrations x > 0 and degrades along the deterministic flow between
jumps.

Every form is a small frozen dataclass that validates its parameters on
construction and evaluates vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ModelError
from .numerics import draw_geometric, draw_unit_exponential, trapezoid

__all__ = [
    "ConstantRate", "LinearRate", "QuadraticRate", "HillRate",
    "TruncatedLinearRate", "TabulatedRate",
    "LinearDecay", "TabulatedDecay",
    "GeometricBurst", "TabulatedBurst",
    "PowerTailNu", "GaussianExpNu", "FiniteSupportNu",
    "ExponentialBurstKernel", "SeparableBurstKernel", "TabulatedBurstKernel",
    "DiscreteBurstModel", "ContinuousBurstModel",
    "burst_tail", "burst_mean", "eval_rates_discrete",
]


def _ret(x, out):
    """Return a float for scalar input, an ndarray otherwise."""
    if np.ndim(x) == 0:
        return float(out)
    return out


def _check_finite(name: str, *vals: float) -> None:
    for v in vals:
        if not math.isfinite(v):
            raise ModelError(f"{name}: parameters must be finite, got {v!r}")


# ---------------------------------------------------------------------------
# burst-arrival rate laws (shared by the discrete and continuous models)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantRate:
    """Rate law that ignores the state entirely."""

    level: float

    def __post_init__(self):
        _check_finite("ConstantRate", self.level)
        if self.level < 0:
            raise ModelError(f"ConstantRate: level must be >= 0, got {self.level}")

    def value(self, x):
        out = np.full(np.shape(x), float(self.level))
        return _ret(x, out)

    def derivative(self, x):
        return _ret(x, np.zeros(np.shape(x)))

    __call__ = value


@dataclass(frozen=True)
class LinearRate:
    """base + slope * x with nonnegative coefficients."""

    base: float
    slope: float

    def __post_init__(self):
        _check_finite("LinearRate", self.base, self.slope)
        if self.base < 0 or self.slope < 0:
            raise ModelError("LinearRate: base and slope must be >= 0 "
                             "(use TruncatedLinearRate for a decreasing law)")

    def value(self, x):
        return _ret(x, self.base + self.slope * np.asarray(x, dtype=float))

    def derivative(self, x):
        return _ret(x, np.full(np.shape(x), float(self.slope)))

    __call__ = value


@dataclass(frozen=True)
class QuadraticRate:
    """base + slope * x + quad * x**2 (continuous model only)."""

    base: float
    slope: float
    quad: float

    def __post_init__(self):
        _check_finite("QuadraticRate", self.base, self.slope, self.quad)
        if self.base < 0 or self.slope < 0 or self.quad < 0:
            raise ModelError("QuadraticRate: coefficients must be >= 0")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return _ret(x, self.base + self.slope * x + self.quad * x * x)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return _ret(x, self.slope + 2.0 * self.quad * x)

    __call__ = value


@dataclass(frozen=True)
class HillRate:
    """Saturating feedback law scale * (1 + numer_coeff x^e) / (denom_const + denom_coeff x^e).

    Increasing (positive feedback) when numer_coeff * denom_const >
    denom_coeff, decreasing otherwise, constant at the balance point.
    """

    scale: float
    numer_coeff: float
    denom_const: float
    denom_coeff: float
    exponent: float

    def __post_init__(self):
        _check_finite("HillRate", self.scale, self.numer_coeff, self.denom_const,
                      self.denom_coeff, self.exponent)
        if self.scale <= 0:
            raise ModelError("HillRate: scale must be > 0")
        if self.numer_coeff < 0:
            raise ModelError("HillRate: numer_coeff must be >= 0")
        if self.denom_const <= 0 or self.denom_coeff <= 0:
            raise ModelError("HillRate: denominator coefficients must be > 0")
        if self.exponent <= 0:
            raise ModelError("HillRate: exponent must be > 0")

    def value(self, x):
        z = np.asarray(x, dtype=float) ** self.exponent
        out = self.scale * (1.0 + self.numer_coeff * z) / (self.denom_const + self.denom_coeff * z)
        return _ret(x, out)

    def derivative(self, x):
        x_arr = np.asarray(x, dtype=float)
        z = x_arr ** self.exponent
        num = self.scale * (self.numer_coeff * self.denom_const - self.denom_coeff)
        with np.errstate(divide="ignore", invalid="ignore"):
            dz = self.exponent * x_arr ** (self.exponent - 1.0)
        out = num * dz / (self.denom_const + self.denom_coeff * z) ** 2
        return _ret(x, out)

    __call__ = value


@dataclass(frozen=True)
class TruncatedLinearRate:
    """base + slope * n clamped at zero from the cutoff index onward."""

    base: float
    slope: float
    cutoff: float | None = None

    def __post_init__(self):
        _check_finite("TruncatedLinearRate", self.base, self.slope)
        if self.base <= 0:
            raise ModelError("TruncatedLinearRate: base must be > 0")
        if self.cutoff is None:
            if self.slope >= 0:
                raise ModelError("TruncatedLinearRate: slope must be < 0 "
                                 "when no explicit cutoff is given")
            object.__setattr__(self, "cutoff", -self.base / self.slope)
        elif self.cutoff < 0:
            raise ModelError("TruncatedLinearRate: cutoff must be >= 0")

    def value(self, x):
        x_arr = np.asarray(x, dtype=float)
        raw = self.base + self.slope * x_arr
        out = np.where(x_arr <= self.cutoff, np.maximum(raw, 0.0), 0.0)
        return _ret(x, out)

    def derivative(self, x):
        x_arr = np.asarray(x, dtype=float)
        live = (x_arr <= self.cutoff) & (self.base + self.slope * x_arr > 0)
        return _ret(x, np.where(live, self.slope, 0.0))

    __call__ = value


@dataclass(frozen=True)
class TabulatedRate:
    """Explicit rate table for n = 0 .. len-1; zero beyond the table."""

    table: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.table)
        if len(vals) == 0:
            raise ModelError("TabulatedRate: empty table")
        for v in vals:
            if not math.isfinite(v) or v < 0:
                raise ModelError(f"TabulatedRate: entries must be finite and >= 0, got {v}")
        object.__setattr__(self, "table", vals)

    def value(self, n):
        n_arr = np.asarray(n)
        idx = np.rint(n_arr).astype(int)
        if not np.all(np.abs(n_arr - idx) < 1e-9):
            raise ModelError("TabulatedRate: defined on integer states only")
        padded = np.asarray(self.table + (0.0,), dtype=float)
        out = padded[np.clip(idx, 0, len(self.table))]
        return _ret(n, out)

    def derivative(self, n):
        raise ModelError("TabulatedRate has no derivative")

    __call__ = value


RateSeq = Union[ConstantRate, LinearRate, HillRate, TruncatedLinearRate, TabulatedRate]
RateFn = Union[ConstantRate, LinearRate, QuadraticRate, HillRate]


# ---------------------------------------------------------------------------
# degradation laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearDecay:
    """First-order decay: rate * state.  Vanishes at zero automatically."""

    rate: float

    def __post_init__(self):
        _check_finite("LinearDecay", self.rate)
        if self.rate <= 0:
            raise ModelError(f"LinearDecay: rate must be > 0, got {self.rate}")

    def value(self, x):
        return _ret(x, self.rate * np.asarray(x, dtype=float))

    def derivative(self, x):
        return _ret(x, np.full(np.shape(x), float(self.rate)))

    __call__ = value


@dataclass(frozen=True)
class TabulatedDecay:
    """Explicit per-state decay table; entry 0 must vanish, the rest be positive."""

    table: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.table)
        if len(vals) < 2:
            raise ModelError("TabulatedDecay: need at least states 0 and 1")
        if vals[0] != 0.0:
            raise ModelError("TabulatedDecay: decay out of state 0 must be 0")
        for v in vals[1:]:
            if not math.isfinite(v) or v <= 0:
                raise ModelError("TabulatedDecay: entries beyond 0 must be finite and > 0")
        object.__setattr__(self, "table", vals)

    def value(self, n):
        n_arr = np.asarray(n)
        idx = np.rint(n_arr).astype(int)
        if not np.all(np.abs(n_arr - idx) < 1e-9):
            raise ModelError("TabulatedDecay: defined on integer states only")
        if np.any(idx >= len(self.table)) or np.any(idx < 0):
            raise ModelError(f"TabulatedDecay: state outside table of length {len(self.table)}")
        out = np.asarray(self.table, dtype=float)[idx]
        return _ret(n, out)

    __call__ = value


DegradationSeq = Union[LinearDecay, TabulatedDecay]


# ---------------------------------------------------------------------------
# burst-size laws, discrete
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeometricBurst:
    """P(k) = (1-b) b^(k-1) on k = 1, 2, ...; mean 1/(1-b)."""

    b: float

    def __post_init__(self):
        _check_finite("GeometricBurst", self.b)
        if not (0.0 < self.b < 1.0):
            raise ModelError(f"GeometricBurst: b must lie in (0, 1), got {self.b}")

    def pmf(self, k):
        k_arr = np.asarray(k, dtype=float)
        out = np.where(k_arr >= 1, (1.0 - self.b) * self.b ** (k_arr - 1.0), 0.0)
        return _ret(k, out)

    def tail(self, ell):
        """P(K > ell) = b**ell for ell >= 0."""
        ell_arr = np.asarray(ell, dtype=float)
        out = np.where(ell_arr >= 0, self.b ** np.maximum(ell_arr, 0.0), 1.0)
        return _ret(ell, out)

    def mean(self) -> float:
        return 1.0 / (1.0 - self.b)

    def sample(self, rng) -> int:
        return draw_geometric(rng, self.b)


@dataclass(frozen=True)
class TabulatedBurst:
    """Burst-size table h_1 .. h_K; must sum to 1 within 1e-9 (then renormalized)."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.size == 0:
            raise ModelError("TabulatedBurst: empty table")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ModelError("TabulatedBurst: weights must be finite and >= 0")
        s = float(math.fsum(w.tolist()))
        if abs(s - 1.0) > 1e-9:
            raise ModelError(f"TabulatedBurst: weights sum to {s!r}, outside 1 +/- 1e-9")
        object.__setattr__(self, "weights", tuple(float(v) / s for v in w))

    def pmf(self, k):
        k_arr = np.asarray(k)
        idx = np.rint(k_arr).astype(int)
        padded = np.asarray((0.0,) + self.weights + (0.0,), dtype=float)
        out = padded[np.clip(idx, 0, len(self.weights) + 1)]
        return _ret(k, out)

    def tail(self, ell):
        """P(K > ell); exact suffix sums."""
        w = self.weights
        suffix = [0.0] * (len(w) + 1)
        for i in range(len(w) - 1, -1, -1):
            suffix[i] = suffix[i + 1] + w[i]
        ell_arr = np.asarray(ell, dtype=int)
        out = np.asarray(suffix + [0.0], dtype=float)[np.clip(ell_arr, 0, len(w))]
        out = np.where(ell_arr < 0, 1.0, out)
        return _ret(ell, out)

    def mean(self) -> float:
        return float(math.fsum((k + 1) * w for k, w in enumerate(self.weights)))

    def sample(self, rng) -> int:
        u = rng.random()
        cum = np.cumsum(self.weights)
        return int(np.searchsorted(cum, u, side="right")) + 1


BurstPmf = Union[GeometricBurst, TabulatedBurst]


def burst_tail(h: BurstPmf, ell):
    """Tail mass P(K > ell) of a burst-size law."""
    return h.tail(ell)


def burst_mean(h: BurstPmf) -> float:
    """Mean burst size; 1/(1-b) in the geometric case."""
    return h.mean()


# ---------------------------------------------------------------------------
# burst-size laws, continuous
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerTailNu:
    """nu(x) = (offset + x)**(-exponent); heavy polynomial burst tails."""

    offset: float
    exponent: float

    def __post_init__(self):
        _check_finite("PowerTailNu", self.offset, self.exponent)
        if self.offset <= 0 or self.exponent <= 0:
            raise ModelError("PowerTailNu: offset and exponent must be > 0")

    def value(self, x):
        return _ret(x, (self.offset + np.asarray(x, dtype=float)) ** (-self.exponent))

    def derivative(self, x):
        a, b = self.offset, self.exponent
        return _ret(x, -b * (a + np.asarray(x, dtype=float)) ** (-b - 1.0))

    def log_slope(self, x):
        """-nu'/nu, the conditional hazard of the burst overshoot."""
        return _ret(x, self.exponent / (self.offset + np.asarray(x, dtype=float)))

    def log_value(self, x):
        """ln nu(x), safe far into the tail."""
        return _ret(x, -self.exponent * np.log(self.offset + np.asarray(x, dtype=float)))

    def inverse(self, v: float) -> float:
        return v ** (-1.0 / self.exponent) - self.offset

    def integral_from(self, y):
        """Closed form of the upper tail integral of nu."""
        a, b = self.offset, self.exponent
        if b <= 1.0:
            return _ret(y, np.full(np.shape(y), np.inf))
        return _ret(y, (a + np.asarray(y, dtype=float)) ** (1.0 - b) / (b - 1.0))

    @property
    def support_cap(self) -> float:
        return math.inf


@dataclass(frozen=True)
class GaussianExpNu:
    """nu(x) = exp(-(lin x + quad x^2)); exponential or Gaussian burst tails."""

    lin: float
    quad: float

    def __post_init__(self):
        _check_finite("GaussianExpNu", self.lin, self.quad)
        if self.lin <= 0 or self.quad < 0:
            raise ModelError("GaussianExpNu: lin must be > 0 and quad >= 0")

    def value(self, x):
        x_arr = np.asarray(x, dtype=float)
        return _ret(x, np.exp(-(self.lin * x_arr + self.quad * x_arr * x_arr)))

    def derivative(self, x):
        x_arr = np.asarray(x, dtype=float)
        return _ret(x, -(self.lin + 2.0 * self.quad * x_arr)
                    * np.exp(-(self.lin * x_arr + self.quad * x_arr * x_arr)))

    def log_slope(self, x):
        return _ret(x, self.lin + 2.0 * self.quad * np.asarray(x, dtype=float))

    def log_value(self, x):
        x_arr = np.asarray(x, dtype=float)
        return _ret(x, -(self.lin * x_arr + self.quad * x_arr * x_arr))

    def inverse(self, v: float) -> float:
        t = -math.log(v)
        if self.quad == 0.0:
            return t / self.lin
        return (-self.lin + math.sqrt(self.lin ** 2 + 4.0 * self.quad * t)) / (2.0 * self.quad)

    def integral_from(self, y):
        a, b = self.lin, self.quad
        y_arr = np.asarray(y, dtype=float)
        if b == 0.0:
            out = np.exp(-a * y_arr) / a
        else:
            erfc = np.vectorize(math.erfc)
            out = (math.exp(a * a / (4.0 * b)) * math.sqrt(math.pi / (4.0 * b))
                   * erfc((a + 2.0 * b * y_arr) / (2.0 * math.sqrt(b))))
        return _ret(y, out)

    @property
    def support_cap(self) -> float:
        return math.inf


@dataclass(frozen=True)
class FiniteSupportNu:
    """nu(x) = (cap - x)**exponent on [0, cap); states never exceed cap."""

    cap: float
    exponent: float

    def __post_init__(self):
        _check_finite("FiniteSupportNu", self.cap, self.exponent)
        if self.cap <= 0 or self.exponent <= 0:
            raise ModelError("FiniteSupportNu: cap and exponent must be > 0")

    def value(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.where(x_arr < self.cap,
                       np.maximum(self.cap - x_arr, 0.0) ** self.exponent, 0.0)
        return _ret(x, out)

    def derivative(self, x):
        x_arr = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore"):
            out = np.where(x_arr < self.cap,
                           -self.exponent * np.maximum(self.cap - x_arr, 0.0)
                           ** (self.exponent - 1.0), 0.0)
        return _ret(x, out)

    def log_slope(self, x):
        return _ret(x, self.exponent / (self.cap - np.asarray(x, dtype=float)))

    def log_value(self, x):
        x_arr = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(x_arr < self.cap,
                           self.exponent * np.log(np.maximum(self.cap - x_arr, 0.0)),
                           -np.inf)
        return _ret(x, out)

    def inverse(self, v: float) -> float:
        return self.cap - v ** (1.0 / self.exponent)

    def integral_from(self, y):
        y_arr = np.asarray(y, dtype=float)
        out = np.where(y_arr < self.cap,
                       np.maximum(self.cap - y_arr, 0.0) ** (self.exponent + 1.0)
                       / (self.exponent + 1.0), 0.0)
        return _ret(y, out)

    @property
    def support_cap(self) -> float:
        return self.cap


NuFn = Union[PowerTailNu, GaussianExpNu, FiniteSupportNu]


@dataclass(frozen=True)
class ExponentialBurstKernel:
    """Memoryless burst sizes: density exp(-x/b)/b independent of the pre-jump state."""

    b: float

    def __post_init__(self):
        _check_finite("ExponentialBurstKernel", self.b)
        if self.b <= 0:
            raise ModelError(f"ExponentialBurstKernel: b must be > 0, got {self.b}")

    def density(self, x, y=None):
        x_arr = np.asarray(x, dtype=float)
        out = np.where(x_arr >= 0, np.exp(-x_arr / self.b) / self.b, 0.0)
        return _ret(x, out)

    def tail(self, x, y=None):
        x_arr = np.asarray(x, dtype=float)
        return _ret(x, np.where(x_arr >= 0, np.exp(-x_arr / self.b), 1.0))

    def mean_burst(self, y):
        return _ret(y, np.full(np.shape(y), float(self.b)))

    def sample(self, rng, y: float) -> float:
        # -b ln U with U in (0, 1]
        return self.b * draw_unit_exponential(rng)

    @property
    def support_cap(self) -> float:
        return math.inf


@dataclass(frozen=True)
class SeparableBurstKernel:
    """State-dependent bursts h(x, y) = -nu'(x + y) / nu(y).

    The post-jump state y + burst has the law of nu's hazard restarted
    at y, so the conditional tail is nu(x + y)/nu(y).
    """

    nu: NuFn

    def density(self, x, y):
        x_arr = np.asarray(x, dtype=float)
        out = -self.nu.derivative(x_arr + y) / self.nu.value(y)
        return _ret(x, np.where(x_arr >= 0, out, 0.0))

    def tail(self, x, y):
        x_arr = np.asarray(x, dtype=float)
        out = self.nu.value(x_arr + y) / self.nu.value(y)
        return _ret(x, np.where(x_arr >= 0, out, 1.0))

    def mean_burst(self, y):
        return self.nu.integral_from(y) / self.nu.value(y)

    def sample(self, rng, y: float) -> float:
        ny = self.nu.value(y)
        if ny <= 0.0:
            raise ModelError(f"SeparableBurstKernel: no burst law at state {y!r}")
        u = 1.0 - rng.random()  # in (0, 1]
        return max(self.nu.inverse(u * ny) - y, 0.0)

    @property
    def support_cap(self) -> float:
        return self.nu.support_cap


@dataclass(frozen=True)
class TabulatedBurstKernel:
    """Burst densities tabulated row-wise: row j is h(., y_j) on a common x grid."""

    y_values: tuple[float, ...]
    x_grid: tuple[float, ...]
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        ys = tuple(float(v) for v in self.y_values)
        xs = np.asarray(self.x_grid, dtype=float)
        if len(ys) != len(self.rows):
            raise ModelError("TabulatedBurstKernel: one row per y value required")
        if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
            raise ModelError("TabulatedBurstKernel: x_grid must be increasing")
        rows = []
        for j, row in enumerate(self.rows):
            r = np.asarray(row, dtype=float)
            if r.shape != xs.shape or np.any(r < 0) or np.any(~np.isfinite(r)):
                raise ModelError(f"TabulatedBurstKernel: bad row {j}")
            mass = trapezoid(r, xs)
            if abs(mass - 1.0) > 1e-6:
                raise ModelError(
                    f"TabulatedBurstKernel: row {j} integrates to {mass!r}, "
                    "outside 1 +/- 1e-6")
            rows.append(tuple(float(v) for v in r))
        object.__setattr__(self, "y_values", ys)
        object.__setattr__(self, "x_grid", tuple(float(v) for v in xs))
        object.__setattr__(self, "rows", tuple(rows))

    def _row(self, y: float) -> np.ndarray:
        ys = np.asarray(self.y_values)
        j = int(np.argmin(np.abs(ys - y)))
        if abs(ys[j] - y) > 1e-9 * max(1.0, abs(y)):
            raise ModelError(f"TabulatedBurstKernel: no row tabulated at y={y!r}")
        return np.asarray(self.rows[j], dtype=float)

    def density(self, x, y):
        row = self._row(float(y))
        out = np.interp(np.asarray(x, dtype=float), np.asarray(self.x_grid), row,
                        left=0.0, right=0.0)
        return _ret(x, out)

    def mean_burst(self, y):
        xs = np.asarray(self.x_grid)
        row = self._row(float(y))
        return trapezoid(xs * row, xs)

    def sample(self, rng, y: float) -> float:
        xs = np.asarray(self.x_grid)
        row = self._row(float(y))
        widths = np.diff(xs)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (row[1:] + row[:-1]) * widths)])
        cum /= cum[-1]
        u = rng.random()
        j = int(np.searchsorted(cum, u, side="right")) - 1
        j = min(max(j, 0), len(widths) - 1)
        span = cum[j + 1] - cum[j]
        frac = (u - cum[j]) / span if span > 0 else 0.5
        return float(xs[j] + frac * widths[j])

    @property
    def support_cap(self) -> float:
        return math.inf


BurstKernel = Union[ExponentialBurstKernel, SeparableBurstKernel, TabulatedBurstKernel]


# ---------------------------------------------------------------------------
# assembled models
# ---------------------------------------------------------------------------

_DISCRETE_RATE_FORMS = (ConstantRate, LinearRate, HillRate, TruncatedLinearRate, TabulatedRate)
_CONTINUOUS_RATE_FORMS = (ConstantRate, LinearRate, QuadraticRate, HillRate)


@dataclass(frozen=True)
class DiscreteBurstModel:
    """Copy-number model: bursts of size >= 1 arrive at rate burst_rate(n),
    single units degrade at rate decay(n)."""

    burst_rate: RateSeq
    decay: DegradationSeq
    burst_size: BurstPmf

    def __post_init__(self):
        if not isinstance(self.burst_rate, _DISCRETE_RATE_FORMS):
            raise ModelError(f"DiscreteBurstModel: unsupported rate form "
                             f"{type(self.burst_rate).__name__}")
        if not isinstance(self.decay, (LinearDecay, TabulatedDecay)):
            raise ModelError("DiscreteBurstModel: unsupported decay form")
        if not isinstance(self.burst_size, (GeometricBurst, TabulatedBurst)):
            raise ModelError("DiscreteBurstModel: unsupported burst-size form")
        lam0 = float(self.burst_rate.value(0))
        if lam0 <= 0:
            raise ModelError("DiscreteBurstModel: burst rate at n=0 must be > 0, "
                             "otherwise 0 is absorbing")


@dataclass(frozen=True)
class ContinuousBurstModel:
    """Concentration model: deterministic decay along the flow of -decay(x),
    interrupted by upward jumps with kernel burst_size."""

    burst_rate: RateFn
    decay: LinearDecay
    burst_size: BurstKernel

    def __post_init__(self):
        if not isinstance(self.burst_rate, _CONTINUOUS_RATE_FORMS):
            raise ModelError(f"ContinuousBurstModel: unsupported rate form "
                             f"{type(self.burst_rate).__name__}")
        if not isinstance(self.decay, LinearDecay):
            raise ModelError("ContinuousBurstModel: decay must be LinearDecay")
        if not isinstance(self.burst_size,
                          (ExponentialBurstKernel, SeparableBurstKernel, TabulatedBurstKernel)):
            raise ModelError("ContinuousBurstModel: unsupported burst kernel")
        # The origin must be inaccessible: burst_rate(x)/decay(x) has to be
        # non-integrable at 0+, which for first-order decay means a strictly
        # positive rate at x = 0.
        if float(self.burst_rate.value(0.0)) <= 0.0:
            raise ModelError("ContinuousBurstModel: burst rate at x=0 must be > 0 "
                             "so the origin stays inaccessible")


def eval_rates_discrete(model: DiscreteBurstModel, n) -> tuple:
    """(burst rate, decay rate) at state n; decay at 0 is exactly 0."""
    return model.burst_rate.value(n), model.decay.value(n)
