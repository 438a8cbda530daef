"""Memory kernels for Volterra control systems, given by their Laplace transforms.

A kernel ``a`` enters the state equation through the convolution
``(a * Ax)(t)``; all frequency-domain analysis only ever touches its Laplace
transform ``ahat`` on the cut plane ``C \\ (-inf, 0]``.  Each kernel class
therefore implements :meth:`Kernel.laplace` / :meth:`Kernel.laplace_derivative`
as the primary interface, and a time-domain ``density`` where one exists.

The module also hosts the sampled hypothesis checks used by the
admissibility machinery: sectoriality of ``ahat``, 1-regularity, and
two-sided power-law growth bounds.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.special import gamma as _gamma

from .reports import HypothesisCheck

__all__ = [
    "Kernel",
    "KernelDomainError",
    "UnsupportedKernelError",
    "PowerKernel",
    "ExponentialKernel",
    "ExponentialMixtureKernel",
    "LogKernel",
    "ShiftedKernel",
    "laplace_transform",
    "laplace_derivative",
    "default_lattice",
    "check_sectorial",
    "check_one_regular",
    "check_growth",
]


class KernelDomainError(ValueError):
    """Raised when a transform is evaluated on the branch cut or at a pole."""


class UnsupportedKernelError(TypeError):
    """Raised when an operation needs structure this kernel does not have."""


def _ensure_offcut(lam: np.ndarray) -> None:
    on_cut = (lam.imag == 0.0) & (lam.real <= 0.0)
    if np.any(on_cut):
        bad = lam[on_cut].flat[0]
        raise KernelDomainError(
            f"Laplace transform evaluated on the cut (-inf, 0]: lam={bad}"
        )


def _dispatch(lam: Any, fn) -> Any:
    """Validate the argument, evaluate vectorized, return scalar for scalar."""
    arr = np.asarray(lam, dtype=np.complex128)
    _ensure_offcut(arr)
    out = fn(arr)
    if np.ndim(lam) == 0:
        return complex(out)
    return out


class Kernel(abc.ABC):
    """A scalar memory kernel, identified with its Laplace transform."""

    #: True when a pointwise time density a(t) is available for t > 0.
    has_density: bool = False

    #: Exponent b such that a(t) ~ t**(b-1) * (smooth) near t = 0, if the
    #: density has that form.  None means the density is smooth at 0 (or absent).
    singular_exponent: float | None = None

    #: Suggested exponent for power-law growth bounds on |ahat|, if the kernel
    #: has a natural one.
    growth_exponent_hint: float | None = None

    #: Human-readable caveat about where the transform formulas are meaningful.
    validity_note: str | None = None

    @abc.abstractmethod
    def _transform(self, lam: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def _transform_derivative(self, lam: np.ndarray) -> np.ndarray: ...

    def laplace(self, lam):
        """Evaluate ahat(lam) on the cut plane (scalar or array)."""
        return _dispatch(lam, self._transform)

    def laplace_derivative(self, lam):
        """Evaluate d/dlam ahat(lam) on the cut plane (scalar or array)."""
        return _dispatch(lam, self._transform_derivative)

    def density(self, t):
        """Time density a(t) for t > 0; only for kernels with has_density."""
        raise UnsupportedKernelError(
            f"{type(self).__name__} has no pointwise time density"
        )

    def valid_mask(self, lam: np.ndarray) -> np.ndarray:
        """Boolean mask of grid points inside the kernel's annotated region."""
        return np.ones(np.shape(lam), dtype=bool)

    def shifted(self, shift: float) -> "ShiftedKernel":
        """Resolvent-style shift: the kernel r with 1/rhat = 1/ahat + shift."""
        return ShiftedKernel(self, shift)

    def describe(self) -> dict[str, Any]:
        out: dict[str, Any] = {"type": type(self).__name__}
        if self.validity_note:
            out["validity"] = self.validity_note
        return out


@dataclass(frozen=True)
class PowerKernel(Kernel):
    """Power-law kernel a(t) = amplitude * t**(exponent-1) / Gamma(exponent).

    Its transform is ahat(lam) = amplitude * lam**(-exponent) on the principal
    branch.  ``exponent`` must lie in (0, 2); amplitude must be positive.
    The choice exponent=1, amplitude=1 gives a == 1, i.e. the memoryless
    (Cauchy/semigroup) problem.
    """

    exponent: float
    amplitude: float = 1.0

    has_density = True

    def __post_init__(self) -> None:
        if not 0.0 < self.exponent < 2.0:
            raise ValueError(f"exponent must be in (0, 2), got {self.exponent}")
        if self.amplitude <= 0.0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")

    @property
    def singular_exponent(self) -> float:  # type: ignore[override]
        return self.exponent

    @property
    def growth_exponent_hint(self) -> float:  # type: ignore[override]
        return self.exponent

    def _transform(self, lam: np.ndarray) -> np.ndarray:
        return self.amplitude * np.exp(-self.exponent * np.log(lam))

    def _transform_derivative(self, lam: np.ndarray) -> np.ndarray:
        b = self.exponent
        return -b * self.amplitude * np.exp(-(b + 1.0) * np.log(lam))

    def density(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0.0):
            raise KernelDomainError("density defined for t > 0 only")
        out = self.amplitude * t ** (self.exponent - 1.0) / _gamma(self.exponent)
        return out if out.ndim else float(out)

    def smooth_factor(self, t):
        """The density with its t**(exponent-1) singular factor removed."""
        shape = np.shape(t)
        val = self.amplitude / _gamma(self.exponent)
        return np.full(shape, val) if shape else val

    def describe(self) -> dict[str, Any]:
        out = super().describe()
        out.update(exponent=self.exponent, amplitude=self.amplitude)
        return out


@dataclass(frozen=True)
class ExponentialKernel(Kernel):
    """Decaying exponential kernel a(t) = amplitude * exp(-rate * t).

    Transform: ahat(lam) = amplitude / (lam + rate).  ``rate`` may be zero
    (then a is the constant ``amplitude``).  This is the kernel family for
    which moment/controllability computations admit closed forms.
    """

    amplitude: float
    rate: float = 0.0

    has_density = True
    growth_exponent_hint = 1.0

    def __post_init__(self) -> None:
        if self.amplitude <= 0.0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if self.rate < 0.0:
            raise ValueError(f"rate must be nonnegative, got {self.rate}")

    def _transform(self, lam: np.ndarray) -> np.ndarray:
        return self.amplitude / (lam + self.rate)

    def _transform_derivative(self, lam: np.ndarray) -> np.ndarray:
        return -self.amplitude / (lam + self.rate) ** 2

    def density(self, t):
        t = np.asarray(t, dtype=float)
        out = self.amplitude * np.exp(-self.rate * t)
        return out if out.ndim else float(out)

    def resolvent_scalar(self, lam: complex, eig: complex) -> complex:
        """Closed-form c(t=...) transform factor is handled elsewhere; this
        returns 1 / (lam * (1 - ahat(lam) * eig)) without cancellation."""
        s, xi = self.rate, self.amplitude
        return (lam + s) / (lam * (lam + s - xi * eig))

    def describe(self) -> dict[str, Any]:
        out = super().describe()
        out.update(amplitude=self.amplitude, rate=self.rate)
        return out


@dataclass(frozen=True)
class ExponentialMixtureKernel(Kernel):
    """Finite mixture of decaying exponentials.

    a(t) = sum_j weights[j] * exp(-rates[j] * t), with positive weights and
    distinct nonnegative rates; ahat(lam) = sum_j weights[j] / (lam + rates[j]).
    """

    weights: tuple[float, ...]
    rates: tuple[float, ...]

    has_density = True
    growth_exponent_hint = 1.0

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.weights)
        r = tuple(float(x) for x in self.rates)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "rates", r)
        if len(w) != len(r) or not w:
            raise ValueError("weights and rates must be nonempty, equal length")
        if any(x <= 0.0 for x in w):
            raise ValueError("weights must be positive")
        if any(x < 0.0 for x in r):
            raise ValueError("rates must be nonnegative")
        if len(set(r)) != len(r):
            raise ValueError("rates must be distinct")

    def _transform(self, lam: np.ndarray) -> np.ndarray:
        out = np.zeros_like(lam)
        for w, s in zip(self.weights, self.rates):
            out += w / (lam + s)
        return out

    def _transform_derivative(self, lam: np.ndarray) -> np.ndarray:
        out = np.zeros_like(lam)
        for w, s in zip(self.weights, self.rates):
            out -= w / (lam + s) ** 2
        return out

    def density(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for w, s in zip(self.weights, self.rates):
            out = out + w * np.exp(-s * t)
        return out if out.ndim else float(out)

    def describe(self) -> dict[str, Any]:
        out = super().describe()
        out.update(weights=list(self.weights), rates=list(self.rates))
        return out


@dataclass(frozen=True)
class LogKernel(Kernel):
    """Kernel defined in the frequency domain by ahat(lam) = 1 / log(lam).

    No pointwise time density is exposed.  The transform formulas degrade
    near lam = 1 (a pole of ahat); the annotated validity region used by the
    sampled hypothesis checks is Re(lam) >= 2, where ahat is positive,
    bounded, and slowly varying.
    """

    validity_note = "transform checks restricted to Re(lam) >= 2"

    @staticmethod
    def _checked_log(lam: np.ndarray) -> np.ndarray:
        # real lam in (0, 1] hits log lam <= 0, through the pole at lam = 1
        bad = (lam.imag == 0.0) & (lam.real > 0.0) & (lam.real <= 1.0)
        if np.any(bad):
            raise KernelDomainError(
                "LogKernel transform undefined for real lam in (0, 1]"
            )
        return np.log(lam)

    def _transform(self, lam: np.ndarray) -> np.ndarray:
        return 1.0 / self._checked_log(lam)

    def _transform_derivative(self, lam: np.ndarray) -> np.ndarray:
        lg = self._checked_log(lam)
        return -1.0 / (lam * lg**2)

    def valid_mask(self, lam: np.ndarray) -> np.ndarray:
        return np.asarray(lam).real >= 2.0


@dataclass(frozen=True)
class ShiftedKernel(Kernel):
    """Kernel r defined from a base kernel a by 1/rhat = 1/ahat + shift.

    This is the transform-level shift that turns stability analysis at growth
    bound w into analysis at 0.  No time density is exposed: r solves a
    Volterra equation in terms of a and is not needed pointwise.
    """

    base: Kernel
    shift: float

    def __post_init__(self) -> None:
        if self.shift < 0.0:
            raise ValueError(f"shift must be nonnegative, got {self.shift}")

    def _transform(self, lam: np.ndarray) -> np.ndarray:
        a = self.base._transform(lam)
        return a / (1.0 + self.shift * a)

    def _transform_derivative(self, lam: np.ndarray) -> np.ndarray:
        a = self.base._transform(lam)
        da = self.base._transform_derivative(lam)
        return da / (1.0 + self.shift * a) ** 2

    def valid_mask(self, lam: np.ndarray) -> np.ndarray:
        return self.base.valid_mask(lam)

    @property
    def growth_exponent_hint(self) -> float | None:  # type: ignore[override]
        return self.base.growth_exponent_hint

    def describe(self) -> dict[str, Any]:
        out = super().describe()
        out.update(shift=self.shift, base=self.base.describe())
        return out


def laplace_transform(kernel: Kernel, lam):
    """Functional form of :meth:`Kernel.laplace`."""
    return kernel.laplace(lam)


def laplace_derivative(kernel: Kernel, lam):
    """Functional form of :meth:`Kernel.laplace_derivative`."""
    return kernel.laplace_derivative(lam)


# --- sampled hypothesis checks ------------------------------------------------

#: Largest sampled angle, kept strictly inside +-pi/2 so the grid stays in
#: the open right half-plane.
_THETA_MAX = 0.5 * math.pi * (1.0 - 2.0**-12)


def default_lattice(
    decades: tuple[int, int] = (-3, 6),
    n_angles: int = 64,
    theta_max: float = _THETA_MAX,
) -> np.ndarray:
    """Log-polar sample of the right half-plane: radii 10**k, symmetric angles."""
    radii = 10.0 ** np.arange(decades[0], decades[1] + 1)
    angles = np.linspace(-theta_max, theta_max, n_angles)
    lam = radii[:, None] * np.exp(1j * angles[None, :])
    return lam.ravel()


def _restrict(kernel: Kernel, grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.complex128).ravel()
    mask = kernel.valid_mask(grid)
    out = grid[mask]
    if out.size == 0:
        raise KernelDomainError("no grid points inside the kernel's valid region")
    return out


def check_sectorial(
    kernel: Kernel, angle: float | None = None, grid: np.ndarray | None = None
) -> HypothesisCheck:
    """Measure sup |arg ahat(lam)| over a right half-plane sample.

    ``passed`` compares against ``angle`` when given (None otherwise).  The
    returned data includes whether the sampled transform stays within the
    strict half-angle pi/2.
    """
    lam = _restrict(kernel, default_lattice() if grid is None else grid)
    vals = kernel.laplace(lam)
    args = np.abs(np.angle(vals))
    i = int(np.argmax(args))
    const = float(args[i])
    passed = None if angle is None else bool(const <= angle + 1e-12)
    return HypothesisCheck(
        name="sectorial_transform",
        passed=passed,
        constant=const,
        witness=complex(lam[i]),
        notes=[f"sampled over {lam.size} points"],
        data={"strict_half_angle": bool(const < 0.5 * math.pi)},
    )


def check_one_regular(
    kernel: Kernel, grid: np.ndarray | None = None
) -> HypothesisCheck:
    """Measure the regularity constant sup |lam * ahat'(lam) / ahat(lam)|."""
    lam = _restrict(kernel, default_lattice() if grid is None else grid)
    a = kernel.laplace(lam)
    da = kernel.laplace_derivative(lam)
    tiny = np.abs(a) < 1e-30
    if np.any(tiny):
        return HypothesisCheck(
            name="one_regular",
            passed=False,
            constant=math.inf,
            witness=complex(lam[np.argmax(tiny)]),
            notes=["|ahat| below 1e-30 at a sample point; ratio undefined there"],
        )
    ratio = np.abs(lam * da / a)
    if not np.all(np.isfinite(ratio)):
        return HypothesisCheck(
            name="one_regular",
            passed=False,
            constant=math.inf,
            witness=complex(lam[int(np.argmin(np.isfinite(ratio)))]),
            notes=["transform ratio not finite at some sample"],
        )
    i = int(np.argmax(ratio))
    return HypothesisCheck(
        name="one_regular",
        passed=True,
        constant=float(ratio[i]),
        witness=complex(lam[i]),
        notes=[f"sampled over {lam.size} points"],
    )


def _decade_slope(x: np.ndarray, g: np.ndarray, lo: float, hi: float) -> float:
    """Least squares slope of log g against log x over x in [lo, hi]."""
    sel = (x >= lo) & (x <= hi) & (g > 0)
    if np.count_nonzero(sel) < 2:
        return math.nan
    lx, lg = np.log10(x[sel]), np.log10(g[sel])
    return float(np.polyfit(lx, lg, 1)[0])


def check_growth(
    kernel: Kernel,
    exponent: float | None = None,
    direction: str = "upper",
    lam_range: tuple[float, float] = (1e-3, 1e6),
    constant: float | None = None,
    points_per_decade: int = 16,
) -> HypothesisCheck:
    """Power-law growth bound: compare |ahat(lam)| against lam**-exponent.

    Samples real lam in ``lam_range`` (clipped to the kernel's valid region)
    and forms g(lam) = |ahat(lam)| * lam**exponent.  direction "upper" reports
    sup g (best constant C with |ahat| <= C lam**-exponent on the sample),
    "lower" reports inf g.  ``passed`` compares the best constant against a
    supplied one; None when no constant is given.  The data payload carries
    the overall log-log slope of |ahat| and the endpoint decade slopes of g,
    which diagnose bounds failing structurally off the sampled window.
    """
    if exponent is None:
        exponent = kernel.growth_exponent_hint
    if exponent is None:
        raise ValueError("kernel has no natural growth exponent; pass one")
    if direction not in ("upper", "lower"):
        raise ValueError(f"direction must be 'upper' or 'lower', got {direction!r}")
    lo, hi = lam_range
    n = max(8, int(round(points_per_decade * math.log10(hi / lo))))
    lam = np.geomspace(lo, hi, n)
    lam = lam[kernel.valid_mask(lam + 0j)]
    if lam.size < 4:
        raise KernelDomainError("growth range outside the kernel's valid region")
    absa = np.abs(kernel.laplace(lam + 0j))
    g = absa * lam**exponent
    iu, il = int(np.argmax(g)), int(np.argmin(g))
    ibest = iu if direction == "upper" else il
    best = float(g[ibest])
    if constant is None:
        passed = None
    elif direction == "upper":
        passed = bool(best <= constant * (1.0 + 1e-12))
    else:
        passed = bool(best >= constant * (1.0 - 1e-12))
    slope_transform = _decade_slope(lam, absa, lam[0], lam[-1])
    slope_low = _decade_slope(lam, g, lam[0], lam[0] * 10.0)
    slope_high = _decade_slope(lam, g, lam[-1] / 10.0, lam[-1])
    return HypothesisCheck(
        name=f"power_growth_{direction}",
        passed=passed,
        constant=best,
        witness=float(lam[ibest]),
        notes=[
            f"exponent {exponent:g}; sampled lam in [{lam[0]:.3g}, {lam[-1]:.3g}]",
            f"log-log slope of |ahat|: {slope_transform:+.3f}",
        ],
        data={
            "upper_constant": float(g[iu]),
            "upper_witness": float(lam[iu]),
            "lower_constant": float(g[il]),
            "lower_witness": float(lam[il]),
            "transform_slope": slope_transform,
            "slope_low": slope_low,
            "slope_high": slope_high,
            "exponent": float(exponent),
        },
    )
