import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volterra_control.laplace import (
    InversionResult,
    LaplaceInversionError,
    invert_laplace,
    _residue,
)

from oracles import forward_laplace


def test_heaviside():
    res = invert_laplace(lambda z: 1.0 / z, 1.0)
    assert isinstance(res, InversionResult)
    assert res.method == "talbot"
    assert abs(res.value - 1.0) < 1e-9
    assert abs(res.value.imag) < 1e-10


@pytest.mark.parametrize("t", [0.1, 0.5, 2.0, 10.0])
def test_exponential_pair(t):
    res = invert_laplace(lambda z: 1.0 / (z + 1.0), t)
    assert abs(res.value - math.exp(-t)) < 1e-10 * math.exp(-t) + 1e-13


@pytest.mark.parametrize("t", [1.0, 4.0])
def test_sqrt_branch(t):
    # L[t^{-1/2}/sqrt(pi)] = lambda^{-1/2}; the cut lies inside the wrap
    res = invert_laplace(lambda z: z ** -0.5, t)
    truth = 1.0 / math.sqrt(math.pi * t)
    assert abs(res.value - truth) < 1e-9 * truth


def test_error_estimate_is_honest():
    cases = [
        (lambda z: 1.0 / z, 1.0, 1.0),
        (lambda z: 1.0 / (z + 1.0), 2.0, math.exp(-2.0)),
        (lambda z: z ** -0.5, 1.0, 1.0 / math.sqrt(math.pi)),
    ]
    for transform, t, truth in cases:
        res = invert_laplace(transform, t)
        actual = abs(res.value - truth)
        assert actual <= 10.0 * res.error_estimate + 1e-12


def test_smooth_pair_round_trip():
    # F = 1/(z+1)^2 pairs with t e^{-t}; check both directions through
    # independent code paths (forward quadrature vs contour inversion)
    transform = lambda z: 1.0 / (z + 1.0) ** 2
    for lam in (0.7, 1.3, 2.0):
        fwd = forward_laplace(lambda s: s * np.exp(-s), lam, horizon=40.0)
        assert abs(fwd - transform(lam)) < 1e-8
    for t in (0.5, 1.0, 3.0):
        res = invert_laplace(transform, t)
        assert abs(res.value - t * math.exp(-t)) < 1e-10


def test_pole_subtraction_pure_imaginary():
    res = invert_laplace(lambda z: 1.0 / (z * z + 1.0), 2.0, poles=(1j, -1j))
    assert abs(res.value - math.sin(2.0)) < 1e-10


def test_pole_subtraction_damped_oscillation():
    transform = lambda z: (z + 0.2) / ((z + 0.2) ** 2 + 4.0)
    res = invert_laplace(transform, 1.5, poles=(-0.2 + 2j, -0.2 - 2j))
    truth = math.exp(-0.3) * math.cos(3.0)
    assert abs(res.value - truth) < 1e-10


def test_unsubtracted_imaginary_poles_raise():
    # without subtraction the contour sweeps past +-i and refinements
    # cannot agree on the lost oscillatory part
    with pytest.raises(LaplaceInversionError):
        invert_laplace(lambda z: 1.0 / (z * z + 1.0), 8.0)


def test_residue_circle_quadrature():
    transform = lambda z: (z + 0.2) / ((z + 0.2) ** 2 + 4.0)
    assert abs(_residue(transform, -0.2 + 2j, 0.5) - 0.5) < 1e-12
    assert abs(_residue(lambda z: 1.0 / (z * z + 1.0), 1j, 0.25) - 1.0 / 2j) < 1e-12


def test_poles_on_cut_are_skipped():
    # the negative real axis is enclosed by the contour; listing a pole
    # there must not trigger subtraction (whose circle would cross the cut)
    res = invert_laplace(lambda z: 1.0 / (z + 1.0), 1.0, poles=(-1.0,))
    assert abs(res.value - math.exp(-1.0)) < 1e-10
    res = invert_laplace(lambda z: 1.0 / z, 1.0, poles=(0.0,))
    assert abs(res.value - 1.0) < 1e-9


def test_bromwich_euler_decay():
    res = invert_laplace(lambda z: 1.0 / (z + 1.0), 1.0, analytic_off_cut=False)
    assert res.method == "bromwich_euler"
    assert abs(res.value - math.exp(-1.0)) < 1e-7


def test_bromwich_euler_shifted_abscissa():
    # e^t has abscissa of convergence 1; the line must sit to its right
    res = invert_laplace(
        lambda z: 1.0 / (z - 1.0), 2.0, analytic_off_cut=False, sigma0=1.5
    )
    assert abs(res.value - math.exp(2.0)) < 1e-6 * math.exp(2.0)


def test_no_convergence_raises():
    with pytest.raises(LaplaceInversionError):
        invert_laplace(lambda z: np.exp(z * z), 1.0)


def test_unreachable_tolerance_raises_with_achieved_bound():
    with pytest.raises(LaplaceInversionError) as exc:
        invert_laplace(lambda z: 1.0 / (z + 1.0), 1.0, tol=1e-15)
    assert exc.value.achieved < 1e-9


def test_argument_validation():
    with pytest.raises(ValueError):
        invert_laplace(lambda z: 1.0 / z, 0.0)
    with pytest.raises(ValueError):
        invert_laplace(lambda z: 1.0 / z, 1.0, tol=-1.0)
    with pytest.raises(ValueError):
        invert_laplace(lambda z: 1.0 / z, 1.0, analytic_off_cut=False, sigma0=-0.5)


@settings(max_examples=30, deadline=None)
@given(
    rate=st.floats(min_value=0.1, max_value=5.0),
    t=st.floats(min_value=0.1, max_value=5.0),
)
def test_exponential_family_property(rate, t):
    # the tolerance is relative: exponentially small targets sit below the
    # contour rounding floor, where refusing is the only honest outcome
    truth = math.exp(-rate * t)
    try:
        res = invert_laplace(lambda z: 1.0 / (z + rate), t)
    except LaplaceInversionError:
        assert truth < 1e-3
        return
    assert abs(res.value - truth) < 1e-8 * truth + 1e-11
