"""Evaluation of the Mittag-Leffler function E_b(z) for b in (0, 2).

E_b is the scalar resolvent of the power-law kernel, so it must be accurate
deep into the left half-line where float64 Taylor summation cancels
catastrophically.  The evaluator dispatches each point to the cheapest
representation whose *a posteriori* accuracy certificate meets the requested
tolerance:

  exp        b == 1, E_1 = exp (exact reduction).
  taylor     float64 power series with a cancellation certificate built from
             the largest intermediate term.
  spectral   for real z < 0 and b away from 1: the wrapped-contour integral
             along the negative axis (the completely monotone spectral
             representation when b < 1; for b > 1 the pair of principal-sheet
             poles adds an explicit oscillatory exponential term).
  asymptotic expansion at infinity: exponential terms on permitted branches
             plus the algebraic series, truncated at its smallest term.
  mpmath     arbitrary-precision Taylor summation with enough guard digits
             to absorb the cancellation; last resort, always certified.

Every path records the certificate it achieved; if even the fallback cannot
certify, :class:`MittagLefflerAccuracyError` reports the achieved bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gammaln, rgamma, roots_legendre

__all__ = ["mittag_leffler", "MittagLefflerAccuracyError", "MittagLefflerInfo"]

_EPS = float(np.finfo(float).eps)

# Zone parameters: float64 Taylor is never attempted when the peak term
# overflows this log bound; the spectral route needs the denominator pole
# a bounded angle off the integration ray, which excludes a band around
# b = 1 (the band is mirrored: usable for b <= MAX or b >= 2 - MAX).
_TAYLOR_LOG_CAP = 600.0
_TAYLOR_MAX_TERMS = 1400
_SPECTRAL_MAX_BETA = 0.96
_SPECTRAL_MIN_ABS = 2.0
# The expansion at infinity self-certifies: for small b its optimal
# truncation error ~exp(-|z|^(1/b)) is negligible already at |z| of a few,
# so the gate only needs to exclude the unit disk where the series is
# meaningless.  Points whose certificate misses fall through to mpmath.
_ASYMPTOTIC_MIN_ABS = 2.0
_ASYMPTOTIC_SAFETY = 10.0
_MP_MAX_DPS = 350
_MP_MAX_TERMS = 10000


class MittagLefflerAccuracyError(ArithmeticError):
    """Accuracy target not met; carries the best achieved error bound."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error bound {achieved:.3e})")
        self.achieved = achieved


@dataclass
class MittagLefflerInfo:
    """Per-point evaluation diagnostics."""

    paths: np.ndarray  # array of path-name strings
    certificates: np.ndarray  # per-point achieved relative error bounds


def _taylor_log_peak(beta: float, r: float) -> float:
    """log of the largest Taylor term |z|**k / Gamma(beta k + 1) at |z| = r."""
    if r <= 0.0:
        return 0.0
    # peak index near r**(1/b)/b; scan a generous window around it
    k_peak = (r ** (1.0 / beta)) / beta
    k_hi = int(min(3.0 * k_peak + 50.0, 5.0e5))
    k = np.arange(0, k_hi + 1, max(1, k_hi // 4096))
    vals = k * math.log(r) - gammaln(beta * k + 1.0)
    return float(np.max(vals))


def _taylor_batch(beta: float, z: np.ndarray, tol: float):
    """Vectorized float64 Taylor summation with cancellation certificates.

    Returns (values, certificates); a certificate above tol means the point
    must be re-dispatched elsewhere.
    """
    n = z.size
    total = np.ones(n, dtype=np.complex128)
    term = np.ones(n, dtype=np.complex128)
    max_abs = np.ones(n)
    k_done = np.full(n, _TAYLOR_MAX_TERMS)
    active = np.ones(n, dtype=bool)
    lg_prev = 0.0
    for k in range(_TAYLOR_MAX_TERMS):
        lg_next = gammaln(beta * (k + 1) + 1.0)
        ratio = math.exp(lg_prev - lg_next)
        lg_prev = lg_next
        term[active] = term[active] * z[active] * ratio
        total[active] += term[active]
        np.maximum(max_abs, np.abs(term), out=max_abs, where=active)
        done = active & (
            np.abs(term) <= 1e-17 * np.abs(total) + 1e-300
        )
        k_done[done] = k + 1
        active &= ~done
        if not active.any():
            break
    # Rounding accumulates like a random walk over the summed terms.  The
    # per-step error floor is not machine eps alone: each Gamma-ratio comes
    # from a gammaln difference whose ABSOLUTE error scales with the log-
    # gamma magnitude reached, so large-|z| points carry a bigger ulp.
    lg_done = gammaln(beta * np.minimum(k_done, _TAYLOR_MAX_TERMS) + 1.0)
    eps_eff = _EPS + 1e-16 * np.abs(lg_done)
    cert = (
        2.0
        * np.sqrt(np.maximum(k_done, 1.0))
        * eps_eff
        * max_abs
        / np.maximum(np.abs(total), 1e-300)
    )
    cert[active] = np.inf  # never converged
    return total, cert


_SPECTRAL_TAIL_END = 49.0  # e^{-r} cutoff; remainder bounded analytically


@lru_cache(maxsize=64)
def _spectral_mesh(beta: float):
    """Composite quadrature mesh for the wrapped-contour integral at this b.

    Returns r-space nodes and weights for an interlocking Gauss-Legendre
    12/8 pair such that  integral ~= sum W * r^(b-1) e^(-r) / D(r),  plus
    the head truncation point eps whose contribution is added analytically.

    The mesh depends on b only, so one build serves a whole batch of x:

    * head (0, 1]: for small b the integrand varies over e^(1/b) decades,
      so panels live in y = log r where it is analytic in a strip of
      half-width pi(1-b)/b; for b > 0.6 a ratio-2 graded mesh resolves the
      r^(b-1) endpoint singularity directly.
    * tail [1, 49]: geometric steps sized to the distance of the nearest
      denominator pole r0 e^(i pi(1-b)/b) from the ray, capped so e^(-r)
      stays resolved; the e^(-49) remainder is bounded in the certificate.
    """
    x12, w12 = roots_legendre(12)
    x8, w8 = roots_legendre(8)
    nodes: dict[int, list[np.ndarray]] = {12: [], 8: []}
    wts: dict[int, list[np.ndarray]] = {12: [], 8: []}

    def add_r_panel(lo: float, hi: float) -> None:
        half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
        for n, (xg, wg) in ((12, (x12, w12)), (8, (x8, w8))):
            nodes[n].append(mid + half * xg)
            wts[n].append(half * wg)

    def add_y_panel(lo: float, hi: float) -> None:
        half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
        for n, (xg, wg) in ((12, (x12, w12)), (8, (x8, w8))):
            r = np.exp(mid + half * xg)
            nodes[n].append(r)
            wts[n].append(half * wg * r)  # dr = r dy

    if beta <= 0.6:
        y_lo = -27.631 / beta  # e^(b y_lo) ~ 1e-12
        count = max(2, math.ceil(-y_lo / 1.8))
        edges = np.linspace(y_lo, 0.0, count + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            add_y_panel(float(lo), float(hi))
        eps = math.exp(y_lo)
    else:
        levels = math.ceil(40.0 / beta)  # 2^(-levels*b) ~ 1e-12
        edges = 2.0 ** -np.arange(levels, -1, -1, dtype=float)
        for lo, hi in zip(edges[:-1], edges[1:]):
            add_r_panel(float(lo), float(hi))
        eps = float(edges[0])

    angle = min(math.pi * abs(1.0 - beta) / beta, 0.5 * math.pi)
    step = 0.8 * math.sin(angle)
    r = 1.0
    while r < _SPECTRAL_TAIL_END:
        nxt = min(_SPECTRAL_TAIL_END, r * math.exp(min(step, 3.0 / r)))
        add_r_panel(r, nxt)
        r = nxt
    return (
        np.concatenate(nodes[12]),
        np.concatenate(wts[12]),
        np.concatenate(nodes[8]),
        np.concatenate(wts[8]),
        eps,
    )


def _spectral_batch(beta: float, x: np.ndarray, tol: float):
    """E_b(-x) for a batch of real x >= 2 via the wrapped Bromwich contour.

    E_b(-x) = P(x) + (x sin(pi b)/pi) * I(x),
    I(x) = int_0^inf r^(b-1) e^(-r) / (r^(2b) + 2 r^b x cos(pi b) + x^2) dr,

    where P = 0 for b < 1 (completely monotone case) and
    P = (2/b) e^(v cos(pi/b)) cos(v sin(pi/b)), v = x^(1/b), for b in (1,2)
    (residues of the conjugate pole pair on the principal sheet).

    The integrand is positive and cancellation-free; the certificate pairs
    a Gauss-Legendre 12-point composite against an 8-point one on the same
    panels and adds the analytic head/tail truncation bounds.
    """
    r12, w12, r8, w8, eps = _spectral_mesh(beta)
    cb, sb = math.cos(math.pi * beta), math.sin(math.pi * beta)
    base12 = w12 * r12 ** (beta - 1.0) * np.exp(-r12)
    base8 = w8 * r8 ** (beta - 1.0) * np.exp(-r8)
    u12, u8 = r12**beta, r8**beta
    uu12, uu8 = u12 * u12, u8 * u8

    n = x.size
    i12 = np.empty(n)
    i8 = np.empty(n)
    chunk = max(1, int(2**22 // max(r12.size, 1)))
    for s in range(0, n, chunk):
        xs = x[s : s + chunk, None]
        i12[s : s + chunk] = (1.0 / (uu12 + (2.0 * cb) * xs * u12 + xs * xs)) @ base12
        i8[s : s + chunk] = (1.0 / (uu8 + (2.0 * cb) * xs * u8 + xs * xs)) @ base8

    pref = x * (sb / math.pi)
    stub = eps**beta / (beta * x * x)  # exact leading head term below eps
    value = pref * (i12 + stub)
    exp_round = np.zeros(n)
    if beta > 1.0:
        v = x ** (1.0 / beta)
        ca, sa = math.cos(math.pi / beta), math.sin(math.pi / beta)
        with np.errstate(under="ignore"):
            grow = (2.0 / beta) * np.exp(v * ca)
        expt = grow * np.cos(v * sa)
        value = value + expt
        exp_round = _EPS * grow * (1.0 + v)  # argument rounding near cos zeros
    else:
        expt = np.zeros(n)

    absval = np.maximum(np.abs(value), 1e-300)
    tail_cut = (
        2.0
        * _SPECTRAL_TAIL_END ** (beta - 1.0)
        * math.exp(-_SPECTRAL_TAIL_END)
        / (x * x * sb * sb)
    )
    quad_err = np.abs(i12 - i8) + stub * 1e-11 + tail_cut
    magnitude = np.abs(pref) * (i12 + stub) + np.abs(expt)
    cert = (
        np.abs(pref) * quad_err / absval
        + 8.0 * _EPS * magnitude / absval
        + exp_round / absval
        + 8.0 * _EPS
    )
    return value, cert


def _asymptotic_batch(beta: float, z: np.ndarray, tol: float, jmax: int = 80):
    """Expansion at infinity, vectorized; truncated at the minimum of the
    smooth term envelope, certified by that envelope plus the largest
    dropped exponential branch.

    The truncation index must come from the envelope |z|^(-j) Gamma(b j)/pi
    (the reflection bound on 1/|Gamma(1 - b j)|), not from the terms
    themselves: where b j passes near an integer the computed term is a
    rounding-sized spurious minimum, and truncating there would certify a
    sum whose true remainder is the envelope, orders of magnitude larger.
    """
    n = z.size
    j = np.arange(1, jmax + 1)
    rg = rgamma(1.0 - beta * j)  # zeros at the poles drop those terms
    with np.errstate(divide="ignore", under="ignore"):
        zinv = 1.0 / z
        powers = zinv[:, None] ** j[None, :]
    terms = powers * rg[None, :]
    absA = np.abs(terms)
    log_env = (
        -np.outer(np.log(np.abs(z)), j)
        + (gammaln(beta * j) - math.log(math.pi))[None, :]
    )
    jstar = np.argmin(log_env, axis=1)
    with np.errstate(over="ignore"):
        min_term = np.exp(log_env[np.arange(n), jstar])
    csum = np.cumsum(terms, axis=1)
    # truncate just before the envelope minimum
    alg = np.where(jstar > 0, csum[np.arange(n), np.maximum(jstar - 1, 0)], 0.0)

    arg = np.angle(z)
    absz = np.abs(z)
    expo = np.zeros(n, dtype=np.complex128)
    dropped = np.zeros(n)
    for k in (-1, 0, 1):
        theta = (arg + 2.0 * math.pi * k) / beta
        s = absz ** (1.0 / beta) * np.exp(1j * theta)
        keep = np.abs(theta) <= math.pi
        with np.errstate(over="ignore"):
            es = np.exp(s[keep])
        expo[keep] += es / beta
        # bound for branches just outside the kept sector
        out = (~keep) & (np.abs(theta) <= math.pi * 1.5)
        if out.any():
            dropped[out] += np.exp(np.real(s[out])) / beta
    value = expo - alg
    # rounding floor: the summed prefix accumulates ~jstar ulps scaled by
    # its largest summand, which can exceed |value| when terms cancel
    cm = np.maximum.accumulate(absA, axis=1)
    max_pref = np.where(jstar > 0, cm[np.arange(n), np.maximum(jstar - 1, 0)], 0.0)
    summand_peak = np.maximum(max_pref, np.abs(expo))
    rounding = _EPS * (16.0 + 4.0 * jstar) * np.maximum(
        1.0, summand_peak / np.maximum(np.abs(value), 1e-300)
    )
    cert = (_ASYMPTOTIC_SAFETY * min_term + dropped) / np.maximum(
        np.abs(value), 1e-300
    ) + rounding
    return value, cert


def _mpmath_single(beta: float, z: complex, tol: float):
    """Arbitrary-precision Taylor summation, tried at increasing precision."""
    log_peak = _taylor_log_peak(beta, abs(z))
    lost_digits = max(0.0, log_peak / math.log(10.0))
    dps = int(min(_MP_MAX_DPS, 25 + lost_digits))
    prev = None
    achieved = math.inf
    for _ in range(4):
        with mpmath.workdps(dps):
            zz = mpmath.mpc(z)
            # form gamma arguments in mp arithmetic: float-rounded beta*k
            # perturbs Gamma at ~1e-13 relative independently of dps
            bb = mpmath.mpf(beta)
            total = mpmath.mpf(1)
            term = mpmath.mpc(1)
            stop = mpmath.mpf(10) ** (-dps - 5)
            for k in range(1, _MP_MAX_TERMS):
                term = term * zz * mpmath.gamma(bb * (k - 1) + 1) / mpmath.gamma(
                    bb * k + 1
                )
                total += term
                if abs(term) <= stop * (abs(total) + stop):
                    break
            val = complex(total)
        if prev is not None:
            achieved = abs(val - prev) / max(abs(val), 1e-300)
            if achieved <= tol:
                return val, achieved
        prev = val
        if dps >= _MP_MAX_DPS:
            break
        dps = min(_MP_MAX_DPS, dps + max(15, dps // 3))
    if prev is not None and achieved <= tol:
        return prev, achieved
    raise MittagLefflerAccuracyError(
        f"mittag_leffler(beta={beta}, z={z}) did not reach tol={tol}", achieved
    )


def mittag_leffler(beta: float, z, tol: float = 1e-8, return_info: bool = False):
    """Evaluate E_beta(z) = sum z^k / Gamma(beta k + 1) for beta in (0, 2).

    Accepts scalar or array ``z``; relative accuracy target ``tol``.  With
    ``return_info=True`` also returns a :class:`MittagLefflerInfo` with the
    evaluation path and achieved certificate per point.

    Raises :class:`MittagLefflerAccuracyError` when no representation can
    certify the target (the error carries the achieved bound).
    """
    if not 0.0 < beta < 2.0:
        raise ValueError(f"beta must be in (0, 2), got {beta}")
    if not 0.0 < tol:
        raise ValueError("tol must be positive")
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=np.complex128)).ravel()
    out = np.empty(zz.shape, dtype=np.complex128)
    paths = np.full(zz.shape, "", dtype=object)
    certs = np.full(zz.shape, np.inf)

    if abs(beta - 1.0) < 1e-12:
        out[:] = np.exp(zz)
        paths[:] = "exp"
        certs[:] = 4.0 * _EPS
    else:
        pending = np.ones(zz.shape, dtype=bool)

        # 1. float64 Taylor wherever the peak term cannot drown the result
        peak_ok = np.array(
            [_taylor_log_peak(beta, r) < _TAYLOR_LOG_CAP for r in np.abs(zz)]
        )
        idx = np.flatnonzero(pending & peak_ok)
        if idx.size:
            vals, cert = _taylor_batch(beta, zz[idx], tol)
            good = cert <= tol
            sel = idx[good]
            out[sel] = vals[good]
            certs[sel] = cert[good]
            paths[sel] = "taylor"
            pending[sel] = False

        # 2. spectral integral: real negative arguments, beta away from 1
        if beta <= _SPECTRAL_MAX_BETA or beta >= 2.0 - _SPECTRAL_MAX_BETA:
            idx = np.flatnonzero(
                pending
                & (zz.imag == 0.0)
                & (zz.real < 0.0)
                & (np.abs(zz) >= _SPECTRAL_MIN_ABS)
            )
            if idx.size:
                vals, cert = _spectral_batch(beta, -zz[idx].real, tol)
                good = cert <= tol
                sel = idx[good]
                out[sel] = vals[good]
                certs[sel] = cert[good]
                paths[sel] = "spectral"
                pending[sel] = False

        # 3. asymptotic expansion for the rest of the far field
        idx = np.flatnonzero(pending & (np.abs(zz) >= _ASYMPTOTIC_MIN_ABS))
        if idx.size:
            vals, cert = _asymptotic_batch(beta, zz[idx], tol)
            good = cert <= tol
            sel = idx[good]
            out[sel] = vals[good]
            certs[sel] = cert[good]
            paths[sel] = "asymptotic"
            pending[sel] = False

        # 4. arbitrary precision for whatever remains
        for i in np.flatnonzero(pending):
            val, cert = _mpmath_single(beta, complex(zz[i]), tol)
            out[i] = val
            certs[i] = cert
            paths[i] = "mpmath"
            pending[i] = False

    if return_info:
        info = MittagLefflerInfo(paths=paths, certificates=certs)
        return (complex(out[0]) if scalar else out), info
    return complex(out[0]) if scalar else out
