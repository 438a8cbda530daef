"""Time-domain evolution of truncated diagonal systems.

Per mode, the state is c_n(t) x0_n + b_n (c_n * u)(t) with c_n the scalar
resolvent.  The convolution is product integration on a uniform grid: the
resolvent samples are interpolated cubically panel by panel and integrated
against the input's exact panel moments, so the input contributes no
quadrature error of its own.  The module also evaluates the improper
control-to-state integral (the reachability functional) by certified
panel quadrature, and the closed form of its action on exponentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .kernels import Kernel, PowerKernel
from .resolvent import ScalarResolvent, TransformPoleError
from .signals import BoxcarSignal, SampledSignal, ScalarSignal
from .systems import DiagonalSystem

__all__ = [
    "SimulationResult",
    "action_on_exponential",
    "b_infinity_numeric",
    "reflect",
    "simulate_state",
]


def _validate_uniform_grid(t_grid) -> tuple[np.ndarray, float]:
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size < 2:
        raise ValueError("time grid needs at least two points")
    if abs(t[0]) > 1e-15:
        raise ValueError("time grid must start at 0")
    h = float(t[1] - t[0])
    if h <= 0.0 or np.max(np.abs(np.diff(t) - h)) > 1e-8 * h:
        raise ValueError("time grid must be uniform and increasing")
    return t, h


def _stencil_matrix(offset: int) -> np.ndarray:
    # monomial coefficients on sigma in [0,1] from 4 samples at
    # sigma = offset..offset+3
    nodes = np.arange(offset, offset + 4, dtype=float)
    return np.linalg.inv(np.vander(nodes, 4, increasing=True)).astype(float)


_INTERIOR = _stencil_matrix(-1)
_LEFT = _stencil_matrix(0)
_RIGHT = _stencil_matrix(-2)


def _cubic_panel_coefficients(c: np.ndarray) -> np.ndarray:
    """Per-panel cubic coefficients (4, n-1) from samples c on n grid points."""
    n = c.size
    if n < 4:
        raise ValueError("cubic panel interpolation needs at least 4 samples")
    coef = np.empty((4, n - 1), dtype=c.dtype)
    stack = np.stack([c[0 : n - 3], c[1 : n - 2], c[2 : n - 1], c[3:n]])
    coef[:, 1 : n - 2] = _INTERIOR @ stack
    coef[:, 0] = _LEFT @ c[0:4]
    coef[:, n - 2] = _RIGHT @ c[n - 4 : n]
    return coef


def _convolve_resolvent(c: np.ndarray, moments: np.ndarray) -> np.ndarray:
    """(c * u) on the grid from resolvent samples and input panel moments."""
    n = c.size
    coef = _cubic_panel_coefficients(c)
    out = np.zeros(n, dtype=complex)
    acc = np.zeros(2 * (n - 1) - 1, dtype=complex)
    for m in range(4):
        acc += np.convolve(coef[m], moments[m])
    out[1:] = acc[: n - 1]
    return out


@dataclass(frozen=True)
class SimulationResult:
    """Trajectories of one simulation run.

    ``error_estimate`` is the largest mode-coefficient difference against a
    half-resolution rerun (NaN when the grid cannot be halved).
    """

    t_grid: np.ndarray
    mode_trajectories: np.ndarray
    forced_trajectories: np.ndarray
    state_norm: np.ndarray
    forced_running_max: np.ndarray
    error_estimate: float

    @property
    def sup_forced(self) -> float:
        return float(self.forced_running_max[-1]) if self.t_grid.size else 0.0


def simulate_state(
    sys: DiagonalSystem,
    kernel: Kernel,
    x0,
    u: ScalarSignal | None,
    t_grid,
    error_estimate: bool = True,
) -> SimulationResult:
    """Evolve x(t) = semigroup part + control convolution on a uniform grid."""
    t, h = _validate_uniform_grid(t_grid)
    n = t.size
    nm = sys.n_modes
    if x0 is None:
        x0 = np.zeros(nm, dtype=complex)
    else:
        x0 = np.asarray(x0, dtype=complex).ravel()
        if x0.size != nm:
            raise ValueError("x0 length must match the number of modes")
    b = sys.b
    modes = np.zeros((nm, n), dtype=complex)
    forced = np.zeros((nm, n), dtype=complex)
    need_conv = u is not None and bool(np.any(b != 0.0))
    if need_conv and n < 4:
        raise ValueError("forced simulation needs at least 4 grid points")
    moments = u.panel_moments(h, n - 1, 3) if need_conv else None
    for k, lam in enumerate(sys.eigenvalues):
        if x0[k] == 0.0 and (not need_conv or b[k] == 0.0):
            continue
        c = ScalarResolvent(kernel, lam)(t)
        if need_conv and b[k] != 0.0:
            forced[k] = b[k] * _convolve_resolvent(c, moments)
        modes[k] = c * x0[k] + forced[k]
    state_norm = np.sqrt(np.sum(np.abs(modes) ** 2, axis=0))
    forced_norm = np.sqrt(np.sum(np.abs(forced) ** 2, axis=0))
    running = np.maximum.accumulate(forced_norm)
    est = math.nan
    if error_estimate and n >= 7 and (n - 1) % 2 == 0:
        coarse = simulate_state(sys, kernel, x0, u, t[::2], error_estimate=False)
        est = float(
            np.max(np.abs(modes[:, ::2] - coarse.mode_trajectories))
        ) if nm else 0.0
    return SimulationResult(
        t_grid=t,
        mode_trajectories=modes,
        forced_trajectories=forced,
        state_norm=state_norm,
        forced_running_max=running,
        error_estimate=est,
    )


def _quadrature_edges(kernel: Kernel, u: ScalarSignal, horizon: float) -> np.ndarray:
    edges = {0.0, horizon}
    if isinstance(u, BoxcarSignal):
        edges.update(e for e in (u.start, u.end) if 0.0 < e < horizon)
    if isinstance(u, SampledSignal):
        edges.update(g for g in u.grid if 0.0 < g < horizon)
    smooth_resolvent = isinstance(kernel, PowerKernel) and kernel.exponent == 1.0
    if not smooth_resolvent:
        # resolvent derivatives can blow up at 0; grade the head
        edges.update(horizon * 2.0**-k for k in range(1, 31))
    out = np.array(sorted(edges))
    # cap panel width so the certificate pair has headroom
    cap = horizon / 32.0
    refined = [out[0]]
    for right in out[1:]:
        left = refined[-1]
        extra = int(math.ceil((right - left) / cap))
        for j in range(1, extra):
            refined.append(left + (right - left) * j / extra)
        refined.append(right)
    return np.array(refined)


def b_infinity_numeric(
    sys: DiagonalSystem,
    kernel: Kernel,
    u: ScalarSignal,
    horizon: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Mode coefficients b_n * int_0^inf c_n(s) u(s) ds, truncated at horizon.

    Returns (coefficients, error_bounds); each bound is the interlocking
    quadrature difference plus a tail term from the input's integrable
    envelope and the observed size of the resolvent on [horizon/2, horizon].
    Inputs without a decaying tail bound are rejected.
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    tail_mass = u.l1_tail(horizon)
    if not math.isfinite(tail_mass):
        raise ValueError("input has no integrable tail bound beyond the horizon")
    nm = sys.n_modes
    if nm == 0:
        return np.zeros(0, dtype=complex), np.zeros(0)
    edges = _quadrature_edges(kernel, u, horizon)
    x16, w16 = roots_legendre(16)
    x8, w8 = roots_legendre(8)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    t16 = (mid[:, None] + half[:, None] * x16[None, :]).ravel()
    t8 = (mid[:, None] + half[:, None] * x8[None, :]).ravel()
    wt16 = (half[:, None] * w16[None, :]).ravel()
    wt8 = (half[:, None] * w8[None, :]).ravel()
    u16 = u(t16)
    u8 = u(t8)
    t_env = np.linspace(0.5 * horizon, horizon, 33)
    coeffs = np.zeros(nm, dtype=complex)
    errors = np.zeros(nm)
    b = sys.b
    for k, lam in enumerate(sys.eigenvalues):
        if b[k] == 0.0:
            continue
        c = ScalarResolvent(kernel, lam)
        i16 = complex(np.sum(wt16 * c(t16) * u16))
        i8 = complex(np.sum(wt8 * c(t8) * u8))
        envelope = float(np.max(np.abs(c(t_env))))
        coeffs[k] = b[k] * i16
        errors[k] = abs(b[k]) * (abs(i16 - i8) + envelope * tail_mass)
    return coeffs, errors


def action_on_exponential(
    sys: DiagonalSystem, kernel: Kernel, lam: complex
) -> tuple[np.ndarray, float]:
    """Closed form of the reachability functional on u(t) = exp(-lam t).

    Returns the mode coefficients b_n / (lam (1 - ahat(lam) lam_n)) and
    their squared Euclidean norm.
    """
    lam = complex(lam)
    if not lam.real > 0.0:
        raise ValueError("need Re lam > 0")
    if sys.n_modes == 0:
        return np.zeros(0, dtype=complex), 0.0
    ahat = kernel.laplace(lam)
    denom = 1.0 - ahat * sys.lam
    if np.any(np.abs(denom) < 1e-14):
        raise TransformPoleError("1 - ahat(lam) lambda_n vanishes for some mode")
    coeffs = sys.b / (lam * denom)
    return coeffs, float(np.sum(np.abs(coeffs) ** 2))


def reflect(u: ScalarSignal, endpoint: float) -> ScalarSignal:
    """Time reflection t -> endpoint - t of a compactly supported signal.

    Defined for signals supported in [0, endpoint]; the result is again a
    signal on [0, endpoint].
    """
    sup = u.support
    if sup is None:
        raise TypeError("reflection needs a compactly supported signal")
    if sup > endpoint * (1.0 + 1e-12):
        raise ValueError("signal support exceeds the reflection endpoint")
    if isinstance(u, BoxcarSignal):
        return BoxcarSignal(
            max(endpoint - u.end, 0.0), endpoint - u.start, u.height
        )
    if isinstance(u, SampledSignal):
        grid = [endpoint - g for g in reversed(u.grid)]
        values = list(reversed(u.values))
        if grid[0] > 0.0:
            if values[0] != 0.0:
                raise ValueError(
                    "cannot reflect a sampled signal with a jump at its"
                    " support end past the endpoint"
                )
            grid.insert(0, 0.0)
            values.insert(0, 0.0)
        else:
            grid[0] = 0.0
        return SampledSignal(tuple(grid), tuple(values))
    raise TypeError(f"reflection not implemented for {type(u).__name__}")
