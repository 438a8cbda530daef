"""Control input signals with closed-form panel moments.

The convolution engine integrates a tabulated resolvent against the input
by product integration: for a uniform grid of step h it needs the moments

    M_m(d) = h * int_0^1 sigma^m u((d - sigma) h) dsigma,   d = 1, 2, ...

of the input at every displacement d.  Every signal form here supplies
those moments exactly, so the only discretization error left in a
convolution is the polynomial interpolation of the resolvent samples.

All signals live on [0, inf); evaluation at negative times returns 0.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

__all__ = [
    "BoxcarSignal",
    "ExponentialSignal",
    "FrameSignal",
    "PolyExpSignal",
    "SampledSignal",
    "ScalarSignal",
]


def _exp_unit_moments(a: complex, mmax: int) -> np.ndarray:
    """Moments I_m = int_0^1 sigma^m exp(a sigma) dsigma for m = 0..mmax.

    Upward recursion is stable only when |a| dominates m; otherwise the
    subtraction cancels and the series in a is used instead.
    """
    out = np.empty(mmax + 1, dtype=complex)
    if abs(a) >= max(8.0, 2.0 * mmax):
        ea = np.exp(a)
        out[0] = (ea - 1.0) / a
        for m in range(1, mmax + 1):
            out[m] = (ea - m * out[m - 1]) / a
        return out
    for m in range(mmax + 1):
        term = 1.0 / (m + 1.0)
        total = term
        for k in range(1, 200):
            term *= a / k * (m + k) / (m + k + 1.0)
            total += term
            if abs(term) <= 1e-20 * max(1.0, abs(total)):
                break
        out[m] = total
    return out


class ScalarSignal(abc.ABC):
    """One control input u on [0, inf)."""

    @abc.abstractmethod
    def __call__(self, t):
        """Evaluate pointwise; vectorized over t, zero for t < 0."""

    @property
    @abc.abstractmethod
    def l2_norm(self) -> float:
        """Exact L2(0, inf) norm."""

    @property
    def support(self) -> float | None:
        """End of the support for compactly supported forms, else None."""
        return None

    @abc.abstractmethod
    def l1_tail(self, t0: float) -> float:
        """Upper bound on the integral of |u| over [t0, inf)."""

    @abc.abstractmethod
    def scaled(self, factor: complex) -> "ScalarSignal":
        """The signal factor * u."""

    @abc.abstractmethod
    def panel_moments(self, h: float, count: int, order: int) -> np.ndarray:
        """Array of M_m(d), shape (order+1, count), d = 1..count."""

    def normalized(self) -> "ScalarSignal":
        n = self.l2_norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero signal")
        return self.scaled(1.0 / n)


@dataclass(frozen=True)
class ExponentialSignal(ScalarSignal):
    """u(t) = amplitude * exp(-rate * t), Re rate > 0."""

    rate: complex
    amplitude: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rate", complex(self.rate))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if not self.rate.real > 0.0:
            raise ValueError("exponential signal needs Re rate > 0")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(under="ignore"):
            out = self.amplitude * np.exp(-self.rate * t)
        return np.where(t >= 0.0, out, 0.0)

    @property
    def l2_norm(self) -> float:
        return abs(self.amplitude) / math.sqrt(2.0 * self.rate.real)

    def l1_tail(self, t0: float) -> float:
        return abs(self.amplitude) * math.exp(-self.rate.real * t0) / self.rate.real

    def scaled(self, factor):
        return ExponentialSignal(self.rate, self.amplitude * factor)

    def panel_moments(self, h, count, order):
        moments = _exp_unit_moments(self.rate * h, order)
        d = np.arange(1, count + 1)
        with np.errstate(under="ignore"):
            decay = np.exp(-self.rate * h * d)
        return h * self.amplitude * moments[:, None] * decay[None, :]


@dataclass(frozen=True)
class FrameSignal(ScalarSignal):
    """u(t) = amplitude * 2 (Re lam)^(3/2) t exp(-lam t); unit L2 norm.

    The base form (amplitude 1) is exactly normalized for every lam in the
    open right half-plane.
    """

    lam: complex
    amplitude: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if not self.lam.real > 0.0:
            raise ValueError("frame signal needs Re lam > 0")

    @property
    def _front(self) -> float:
        return 2.0 * self.lam.real**1.5

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(under="ignore"):
            out = self.amplitude * self._front * t * np.exp(-self.lam * t)
        return np.where(t >= 0.0, out, 0.0)

    @property
    def l2_norm(self) -> float:
        return abs(self.amplitude)

    def l1_tail(self, t0: float) -> float:
        x = self.lam.real
        return (
            abs(self.amplitude)
            * self._front
            * math.exp(-x * t0)
            * (t0 / x + 1.0 / x**2)
        )

    def scaled(self, factor):
        return FrameSignal(self.lam, self.amplitude * factor)

    def panel_moments(self, h, count, order):
        moments = _exp_unit_moments(self.lam * h, order + 1)
        d = np.arange(1, count + 1)
        with np.errstate(under="ignore"):
            decay = np.exp(-self.lam * h * d)
        # t = (d - sigma) h splits into d*I_m - I_{m+1}
        core = d[None, :] * moments[:-1, None] - moments[1:, None]
        return self.amplitude * self._front * h**2 * decay[None, :] * core


@dataclass(frozen=True)
class PolyExpSignal(ScalarSignal):
    """u(t) = (sum_k coefficients[k] t^k) * exp(-rate t), Re rate > 0."""

    coefficients: tuple[complex, ...]
    rate: complex

    def __post_init__(self):
        coef = tuple(complex(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "rate", complex(self.rate))
        if not coef:
            raise ValueError("need at least one polynomial coefficient")
        if not self.rate.real > 0.0:
            raise ValueError("polynomial-exponential signal needs Re rate > 0")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        poly = np.zeros(t.shape, dtype=complex)
        for c in reversed(self.coefficients):
            poly = poly * t + c
        with np.errstate(under="ignore"):
            out = poly * np.exp(-self.rate * t)
        return np.where(t >= 0.0, out, 0.0)

    @property
    def l2_norm(self) -> float:
        c = np.array(self.coefficients)
        # |p|^2 coefficients: q_j = sum_k c_k conj(c_{j-k}) is Hermitian
        q = np.convolve(c, np.conj(c))
        x2 = 2.0 * self.rate.real
        total = 0.0
        for j, qj in enumerate(q):
            total += qj.real * math.factorial(j) / x2 ** (j + 1)
        return math.sqrt(max(total, 0.0))

    def l1_tail(self, t0: float) -> float:
        x = self.rate.real
        total = 0.0
        for k, c in enumerate(self.coefficients):
            # int_t0^inf t^k e^(-x t) dt = k! Q(k+1, x t0) / x^(k+1)
            total += (
                abs(c)
                * math.factorial(k)
                * float(gammaincc(k + 1, x * t0))
                / x ** (k + 1)
            )
        return total

    def scaled(self, factor):
        return PolyExpSignal(
            tuple(c * factor for c in self.coefficients), self.rate
        )

    def panel_moments(self, h, count, order):
        deg = len(self.coefficients) - 1
        moments = _exp_unit_moments(self.rate * h, order + deg)
        d = np.arange(1, count + 1, dtype=float)
        with np.errstate(under="ignore"):
            decay = np.exp(-self.rate * h * d)
        out = np.zeros((order + 1, count), dtype=complex)
        for m in range(order + 1):
            acc = np.zeros(count, dtype=complex)
            for k, c in enumerate(self.coefficients):
                for j in range(k + 1):
                    acc += (
                        c
                        * h**k
                        * math.comb(k, j)
                        * (-1.0) ** j
                        * d ** (k - j)
                        * moments[m + j]
                    )
            out[m] = h * decay * acc
        return out


@dataclass(frozen=True)
class BoxcarSignal(ScalarSignal):
    """u = height on [start, end], zero elsewhere."""

    start: float
    end: float
    height: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "end", float(self.end))
        object.__setattr__(self, "height", complex(self.height))
        if not 0.0 <= self.start < self.end:
            raise ValueError("boxcar needs 0 <= start < end")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.start) & (t <= self.end)
        return np.where(inside, self.height, 0.0 + 0.0j)

    @property
    def l2_norm(self) -> float:
        return abs(self.height) * math.sqrt(self.end - self.start)

    @property
    def support(self) -> float:
        return self.end

    def l1_tail(self, t0: float) -> float:
        return abs(self.height) * max(0.0, self.end - max(t0, self.start))

    def scaled(self, factor):
        return BoxcarSignal(self.start, self.end, self.height * factor)

    def panel_moments(self, h, count, order):
        d = np.arange(1, count + 1, dtype=float)
        lo = np.clip(d - self.end / h, 0.0, 1.0)
        hi = np.clip(d - self.start / h, 0.0, 1.0)
        hi = np.maximum(hi, lo)
        out = np.empty((order + 1, count), dtype=complex)
        for m in range(order + 1):
            out[m] = (
                h * self.height * (hi ** (m + 1) - lo ** (m + 1)) / (m + 1.0)
            )
        return out


@dataclass(frozen=True)
class SampledSignal(ScalarSignal):
    """Piecewise-linear interpolant of samples on [0, grid[-1]], 0 beyond.

    The grid must increase strictly from 0.
    """

    grid: tuple[float, ...]
    values: tuple[complex, ...]

    def __post_init__(self):
        grid = tuple(float(g) for g in self.grid)
        values = tuple(complex(v) for v in self.values)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if len(grid) < 2 or len(grid) != len(values):
            raise ValueError("need matching grid and values with length >= 2")
        if grid[0] != 0.0:
            raise ValueError("sampled grid must start at 0")
        if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
            raise ValueError("sampled grid must increase strictly")
        if not all(
            math.isfinite(v.real) and math.isfinite(v.imag) for v in values
        ):
            raise ValueError("sampled values must be finite")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        g = np.array(self.grid)
        vr = np.interp(t, g, np.array([v.real for v in self.values]))
        vi = np.interp(t, g, np.array([v.imag for v in self.values]))
        out = vr + 1j * vi
        inside = (t >= 0.0) & (t <= self.grid[-1])
        return np.where(inside, out, 0.0 + 0.0j)

    @property
    def l2_norm(self) -> float:
        total = 0.0
        for (g0, g1), (a, b) in zip(
            zip(self.grid[:-1], self.grid[1:]), zip(self.values[:-1], self.values[1:])
        ):
            # exact integral of |linear|^2 over one segment
            total += (
                (g1 - g0)
                * (abs(a) ** 2 + (a.conjugate() * b).real + abs(b) ** 2)
                / 3.0
            )
        return math.sqrt(max(total, 0.0))

    @property
    def support(self) -> float:
        return self.grid[-1]

    def l1_tail(self, t0: float) -> float:
        total = 0.0
        for (g0, g1), (a, b) in zip(
            zip(self.grid[:-1], self.grid[1:]), zip(self.values[:-1], self.values[1:])
        ):
            if g1 <= t0:
                continue
            lo = max(g0, t0)
            # |u| is below the chord through |a|, |b| on the segment
            fa = abs(a) + (abs(b) - abs(a)) * (lo - g0) / (g1 - g0)
            total += 0.5 * (fa + abs(b)) * (g1 - lo)
        return total

    def scaled(self, factor):
        return SampledSignal(self.grid, tuple(v * factor for v in self.values))

    def panel_moments(self, h, count, order):
        out = np.zeros((order + 1, count), dtype=complex)
        for i in range(len(self.grid) - 1):
            g0, g1 = self.grid[i], self.grid[i + 1]
            v0, v1 = self.values[i], self.values[i + 1]
            slope = (v1 - v0) / (g1 - g0)
            d_lo = max(1, int(math.floor(g0 / h)) + 1)
            d_hi = min(count, int(math.ceil(g1 / h)))
            if d_hi < d_lo:
                continue
            d = np.arange(d_lo, d_hi + 1, dtype=float)
            lo_t = np.maximum((d - 1.0) * h, g0)
            hi_t = np.minimum(d * h, g1)
            s_lo = d - hi_t / h
            s_hi = np.maximum(d - lo_t / h, s_lo)
            alpha = v0 + slope * (d * h - g0)
            gamma = -slope * h
            sel = slice(d_lo - 1, d_hi)
            for m in range(order + 1):
                seg = alpha * (s_hi ** (m + 1) - s_lo ** (m + 1)) / (m + 1.0)
                seg = seg + gamma * (s_hi ** (m + 2) - s_lo ** (m + 2)) / (m + 2.0)
                out[m, sel] += h * seg
        return out
