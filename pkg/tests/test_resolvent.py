"""Scalar resolvent functions: closed forms, numeric inversion, residual."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import erfc_reference, forward_laplace
from volterra_control.kernels import (
    ExponentialKernel,
    ExponentialMixtureKernel,
    LogKernel,
    PowerKernel,
    UnsupportedKernelError,
)
from volterra_control.resolvent import (
    DegenerateModeError,
    ScalarResolvent,
    TransformPoleError,
    c_exponential,
    c_power,
    resolvent_residual,
    sigma,
)


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------------------
# sigma


def test_sigma_cauchy_reduction():
    # ahat = 1/lam, so sigma collapses to 1/(lam + mu)
    assert sigma(2.0, 3.0, PowerKernel(1.0)) == pytest.approx(0.2, abs=1e-15)


def test_sigma_zero_mu_is_reciprocal():
    for kernel in (PowerKernel(0.5), ExponentialKernel(1.0, 1.0), LogKernel()):
        assert sigma(3.0, 0.0, kernel) == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_sigma_exponential_kernel_hand_value():
    # ahat(1) = 1/2, sigma = 1/(1 * (1 + 1/2)) = 2/3
    val = sigma(1.0, 1.0, ExponentialKernel(1.0, 1.0))
    assert val == pytest.approx(2.0 / 3.0, abs=1e-15)


def test_sigma_pole_raises():
    # ahat(2) = 1/2 for the Cauchy kernel, so mu = -2 zeroes the denominator
    with pytest.raises(TransformPoleError):
        sigma(2.0, -2.0, PowerKernel(1.0))


def test_sigma_near_zero_lambda_raises():
    with pytest.raises(TransformPoleError):
        sigma(1e-16, 1.0, ExponentialKernel(1.0, 1.0))


def test_sigma_vectorized():
    lam = np.array([1.0 + 0.0j, 2.0 + 0.0j])
    out = sigma(lam, 3.0, PowerKernel(1.0))
    assert out.shape == (2,)
    assert np.allclose(out, [0.25, 0.2], atol=1e-15)


# ---------------------------------------------------------------------------
# closed forms


def test_c_exponential_cauchy_limit():
    # s = 0 reduces to the Cauchy kernel semigroup e^(lam t)
    assert c_exponential(-1.0, 1.0, 0.0, 1.0) == pytest.approx(
        math.exp(-1.0), abs=1e-14
    )


def test_c_exponential_at_zero():
    assert c_exponential(-3.0 + 1.0j, 0.7, 2.0, 0.0) == pytest.approx(
        1.0, abs=1e-14
    )


def test_c_exponential_long_time_plateau():
    # t -> inf limit is s/(s - lam*xi); the numeric inversion of the same
    # transform at t = 50 is the independent oracle
    from volterra_control.resolvent import invert_laplace

    val = c_exponential(-1.0, 1.0, 1.0, 50.0)
    assert val == pytest.approx(0.5, abs=1e-12)
    c = ScalarResolvent(ExponentialKernel(1.0, 1.0), -1.0)
    res = invert_laplace(c.transform, 50.0, tol=1e-9)
    assert rel_err(val, res.value) < 1e-8


def test_c_exponential_degenerate_raises():
    with pytest.raises(DegenerateModeError):
        c_exponential(1.0, 1.0, 1.0, 2.0)


def test_c_exponential_vectorized():
    t = np.linspace(0.0, 4.0, 9)
    out = c_exponential(-2.0, 1.0, 1.0, t)
    assert out.shape == t.shape
    assert out[0] == pytest.approx(1.0, abs=1e-14)


def test_c_power_cauchy():
    assert c_power(-1.0, 1.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-12)


def test_c_power_at_zero_exact():
    assert c_power(-4.0, 0.7, 0.0) == 1.0


def test_c_power_half_vs_erfc_oracle():
    # E_(1/2)(-1) = e * erfc(1)
    ref = math.e * erfc_reference(1.0)
    assert rel_err(c_power(-1.0, 0.5, 1.0), ref) < 1e-10
    assert c_power(-1.0, 0.5, 1.0) == pytest.approx(0.427584, abs=1e-5)


def test_c_power_negative_time_raises():
    with pytest.raises(ValueError):
        c_power(-1.0, 0.5, -0.5)


def test_c_power_matches_numeric_inversion():
    from volterra_control.resolvent import invert_laplace

    c = ScalarResolvent(PowerKernel(0.5), -1.0)
    for t in (0.5, 2.0):
        res = invert_laplace(c.transform, t, tol=1e-9)
        assert rel_err(c_power(-1.0, 0.5, t), res.value) < 1e-6


# ---------------------------------------------------------------------------
# ScalarResolvent


def test_auto_method_selection():
    assert ScalarResolvent(ExponentialKernel(1.0, 1.0), -1.0).method == "closed_form"
    assert ScalarResolvent(PowerKernel(0.5), -1.0).method == "mittag_leffler"
    mix = ExponentialMixtureKernel((1.0,), (1.0,))
    assert ScalarResolvent(mix, -1.0).method == "numeric_inversion"
    assert ScalarResolvent(LogKernel(), -1.0).method == "numeric_inversion"


def test_method_kernel_pairing_errors():
    with pytest.raises(UnsupportedKernelError):
        ScalarResolvent(PowerKernel(0.5), -1.0, method="closed_form")
    with pytest.raises(UnsupportedKernelError):
        ScalarResolvent(ExponentialKernel(1.0, 1.0), -1.0, method="mittag_leffler")
    with pytest.raises(ValueError):
        ScalarResolvent(PowerKernel(0.5), -1.0, method="magic")


def test_eigenvalue_sign_validation():
    with pytest.raises(ValueError):
        ScalarResolvent(PowerKernel(0.5), 1.0)
    with pytest.raises(ValueError):
        ScalarResolvent(PowerKernel(0.5), 1.0j)


def test_time_validation():
    c = ScalarResolvent(PowerKernel(0.5), -1.0)
    with pytest.raises(ValueError):
        c(-0.1)


def test_c_at_zero_is_one_on_every_route():
    cases = [
        ScalarResolvent(ExponentialKernel(1.0, 1.0), -1.0),
        ScalarResolvent(PowerKernel(0.5), -2.0),
        ScalarResolvent(ExponentialMixtureKernel((1.0,), (1.0,)), -1.0),
        ScalarResolvent(LogKernel(), -1.0),
    ]
    for c in cases:
        assert c(0.0) == 1.0 + 0.0j


def test_scalar_and_array_shapes():
    c = ScalarResolvent(PowerKernel(0.5), -1.0)
    v = c(1.0)
    assert isinstance(v, complex)
    arr = c(np.array([0.0, 0.5, 1.0]))
    assert arr.shape == (3,)
    assert arr[2] == pytest.approx(v)


def test_transform_matches_sigma():
    c = ScalarResolvent(PowerKernel(0.5), -2.0)
    lam = 1.3 + 0.4j
    assert c.transform(lam) == sigma(lam, 2.0, PowerKernel(0.5))


def _mixture_closed_form(weights, rates, eigenvalue):
    """Partial-fraction resolvent of a finite exponential mixture.

    sigma(lam) = prod(lam+s_j) / (lam * [prod(lam+s_j) + mu * sum_j w_j
    prod_{k!=j}(lam+s_k)]) with mu = -eigenvalue; poles are simple for
    generic parameters, so c(t) = sum residues * exp(root * t).
    """
    mu = -eigenvalue
    num = np.poly1d([1.0])
    for s in rates:
        num *= np.poly1d([1.0, s])
    bracket = np.poly1d(num)
    for w, s in zip(weights, rates):
        term = np.poly1d([w])
        for s2 in rates:
            if s2 != s:
                term *= np.poly1d([1.0, s2])
        bracket += mu * term
    den = np.poly1d([1.0, 0.0]) * bracket
    roots = den.roots
    dden = den.deriv()

    def c(t):
        t = np.asarray(t, dtype=float)
        acc = np.zeros(t.shape, dtype=complex)
        for r in roots:
            acc += num(r) / dden(r) * np.exp(r * t)
        return acc

    return c


def test_numeric_inversion_matches_mixture_partial_fractions():
    weights, rates = (0.6, 0.4), (1.0, 3.0)
    kern = ExponentialMixtureKernel(weights, rates)
    c = ScalarResolvent(kern, -2.0)
    assert c.method == "numeric_inversion"
    oracle = _mixture_closed_form(weights, rates, -2.0)
    ts = np.linspace(0.25, 5.0, 12)
    got = c(ts)
    want = oracle(ts)
    assert np.max(np.abs(got - want) / np.abs(want)) < 1e-7


def test_numeric_inversion_matches_exponential_closed_form():
    kern = ExponentialMixtureKernel((1.3,), (0.8,))
    c = ScalarResolvent(kern, -1.5)
    ts = np.linspace(0.2, 5.0, 10)
    want = c_exponential(-1.5, 1.3, 0.8, ts)
    got = c(ts)
    assert np.max(np.abs(got - want) / np.abs(want)) < 1e-8


def test_numeric_inversion_matches_mittag_leffler_route():
    direct = ScalarResolvent(PowerKernel(0.5), -1.0)
    inverted = ScalarResolvent(PowerKernel(0.5), -1.0, method="numeric_inversion")
    for t in (0.3, 1.0, 3.0):
        assert rel_err(inverted(t), direct(t)) < 1e-6


def test_log_kernel_inversion_smoke():
    # transform only available on a right half-plane: Bromwich route; the
    # mode grows (denominator zero at lam = 1/e), so just pin sanity here
    c = ScalarResolvent(LogKernel(), -1.0)
    val = c(0.5)
    assert abs(val.imag) < 1e-6
    assert 0.2 < val.real < 5.0


def test_complete_monotonicity_of_power_resolvent():
    t = np.linspace(0.0, 10.0, 201)
    for beta in (0.5, 0.8, 1.0):
        vals = ScalarResolvent(PowerKernel(beta), -2.0)(t)
        assert np.max(np.abs(vals.imag)) < 1e-12
        v = vals.real
        assert np.all(v > 0.0)
        assert np.all(v <= 1.0 + 1e-12)
        assert np.all(np.diff(v) < 0.0)


@settings(max_examples=30, deadline=None)
@given(
    xi=st.floats(0.2, 3.0),
    s=st.floats(0.0, 3.0),
    lam=st.floats(-5.0, -0.2),
)
def test_exponential_resolvent_stays_in_unit_interval(xi, s, lam):
    t = np.linspace(0.0, 5.0, 41)
    vals = ScalarResolvent(ExponentialKernel(xi, s), lam)(t)
    assert np.max(np.abs(vals.imag)) < 1e-13
    v = vals.real
    assert np.all(v > 0.0)
    assert np.all(v <= 1.0 + 1e-12)
    assert np.all(np.diff(v) <= 1e-12)


# ---------------------------------------------------------------------------
# Laplace round trip: forward-transforming c_n recovers sigma


@pytest.mark.parametrize(
    "kernel,eig",
    [
        (ExponentialKernel(1.2, 0.7), -1.8),
        (PowerKernel(1.0), -2.0),
        (PowerKernel(0.5), -1.0),
    ],
    ids=["exponential", "cauchy", "sqrt"],
)
def test_forward_laplace_round_trip(kernel, eig):
    c = ScalarResolvent(kernel, eig)
    rng = np.random.default_rng(20240811)
    lams = rng.uniform(0.5, 5.0, 10) + 1j * rng.uniform(-3.0, 3.0, 10)
    for lam in lams:
        want = sigma(complex(lam), -eig, kernel)
        got = forward_laplace(lambda tt: c(tt), complex(lam), horizon=60.0)
        assert rel_err(got, want) < 1e-5, f"lam={lam}"


# ---------------------------------------------------------------------------
# residual engine


def test_residual_cauchy_identity():
    grid = np.linspace(0.0, 5.0, 5001)
    c = ScalarResolvent(PowerKernel(1.0), -1.0)
    assert resolvent_residual(PowerKernel(1.0), -1.0, c, grid) < 1e-8


def test_residual_exponential_closed_form():
    grid = np.linspace(0.0, 5.0, 5001)
    kern = ExponentialKernel(1.0, 1.0)

    def c(t):
        return c_exponential(-1.0, 1.0, 1.0, t)

    assert resolvent_residual(kern, -1.0, c, grid) < 1e-6


def test_residual_flags_wrong_candidate_exactly():
    # c == 1 gives residual |t| on the Cauchy kernel: exactly 1 at t = 1
    grid = np.array([0.0, 0.5, 1.0])

    def ones(t):
        return np.ones_like(np.asarray(t, dtype=float))

    assert resolvent_residual(PowerKernel(1.0), -1.0, ones, grid) == 1.0


@pytest.mark.parametrize(
    "beta,eig", [(0.5, -1.0), (1.5, -math.pi**2)], ids=["sub", "super"]
)
def test_residual_power_kernels(beta, eig):
    grid = np.linspace(0.0, 5.0, 5001)
    kern = PowerKernel(beta)
    c = ScalarResolvent(kern, eig)
    assert resolvent_residual(kern, eig, c, grid) < 1e-6


def test_residual_mixture_kernel():
    grid = np.linspace(0.0, 2.0, 2001)
    kern = ExponentialMixtureKernel((0.6, 0.4), (1.0, 3.0))
    c = _mixture_closed_form((0.6, 0.4), (1.0, 3.0), -2.0)
    assert resolvent_residual(kern, -2.0, c, grid) < 1e-6


def test_residual_rejects_log_kernel():
    with pytest.raises(UnsupportedKernelError):
        resolvent_residual(LogKernel(), -1.0, lambda t: t, np.linspace(0, 1, 11))


def test_residual_grid_validation():
    c = ScalarResolvent(PowerKernel(1.0), -1.0)
    with pytest.raises(ValueError):
        resolvent_residual(PowerKernel(1.0), -1.0, c, np.array([0.0, 0.1, 0.3]))
    with pytest.raises(ValueError):
        resolvent_residual(PowerKernel(1.0), -1.0, c, np.array([0.5, 1.0, 1.5]))
    with pytest.raises(ValueError):
        resolvent_residual(PowerKernel(1.0), -1.0, c, np.zeros((2, 2)))


def test_residual_single_point_grid():
    c = ScalarResolvent(PowerKernel(1.0), -1.0)
    assert resolvent_residual(PowerKernel(1.0), -1.0, c, np.array([0.0])) == 0.0
