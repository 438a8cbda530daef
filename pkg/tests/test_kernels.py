import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volterra_control.kernels import (
    ExponentialKernel,
    ExponentialMixtureKernel,
    KernelDomainError,
    LogKernel,
    PowerKernel,
    ShiftedKernel,
    UnsupportedKernelError,
    check_growth,
    check_one_regular,
    check_sectorial,
    default_lattice,
    laplace_derivative,
    laplace_transform,
)


def test_power_kernel_transform_values():
    k = PowerKernel(exponent=0.5, amplitude=3.0)
    assert k.laplace(4.0) == pytest.approx(1.5)
    # principal branch on the imaginary axis: i**-0.5 = exp(-i pi/4)
    val = k.laplace(1j)
    assert val == pytest.approx(3.0 * np.exp(-1j * math.pi / 4))
    # Cauchy case through the functional interface
    cauchy = PowerKernel(exponent=1.0)
    assert laplace_transform(cauchy, 2.0) == pytest.approx(0.5)
    assert laplace_derivative(cauchy, 2.0) == pytest.approx(-0.25)
    assert laplace_derivative(ExponentialKernel(2.0, 0.0), 1.0) == pytest.approx(-2.0)


def test_power_kernel_density_matches_transform_convention():
    # a(t) = amp * t**(b-1)/Gamma(b) integrates to amp/Gamma(b+1) on [0,1]
    k = PowerKernel(exponent=0.5, amplitude=2.0)
    t = np.linspace(1e-8, 1.0, 5)
    vals = k.density(t)
    assert vals.shape == t.shape
    assert k.density(1.0) == pytest.approx(2.0 / math.gamma(0.5))
    assert k.smooth_factor(0.3) == pytest.approx(2.0 / math.gamma(0.5))


def test_transform_rejects_branch_cut():
    k = PowerKernel(exponent=0.5)
    with pytest.raises(KernelDomainError):
        k.laplace(-1.0)
    with pytest.raises(KernelDomainError):
        k.laplace(0.0)
    with pytest.raises(KernelDomainError):
        k.laplace(np.array([1.0, -2.0 + 0j]))


def test_parameter_validation():
    with pytest.raises(ValueError):
        PowerKernel(exponent=2.0)
    with pytest.raises(ValueError):
        PowerKernel(exponent=0.5, amplitude=0.0)
    with pytest.raises(ValueError):
        ExponentialKernel(amplitude=1.0, rate=-1.0)
    with pytest.raises(ValueError):
        ExponentialMixtureKernel(weights=(1.0, 1.0), rates=(2.0, 2.0))
    with pytest.raises(ValueError):
        ShiftedKernel(PowerKernel(0.5), shift=-0.1)


def test_exponential_kernel_transform():
    k = ExponentialKernel(amplitude=2.0, rate=3.0)
    assert k.laplace(1.0) == pytest.approx(0.5)
    assert k.density(0.0) == pytest.approx(2.0)
    assert k.laplace_derivative(1.0) == pytest.approx(-0.125)


def test_shift_of_exponential_is_exponential_with_moved_rate():
    # 1/rhat = (lam + s)/xi + w  =>  rhat = xi / (lam + s + w*xi)
    base = ExponentialKernel(amplitude=2.0, rate=1.0)
    shifted = base.shifted(3.0)
    target = ExponentialKernel(amplitude=2.0, rate=1.0 + 3.0 * 2.0)
    lam = default_lattice(decades=(-2, 3), n_angles=17)
    np.testing.assert_allclose(shifted.laplace(lam), target.laplace(lam), rtol=1e-13)
    np.testing.assert_allclose(
        shifted.laplace_derivative(lam), target.laplace_derivative(lam), rtol=1e-12
    )


def test_mixture_matches_sum_of_exponentials():
    mix = ExponentialMixtureKernel(weights=(1.0, 0.5), rates=(0.0, 2.0))
    e0 = ExponentialKernel(1.0, 0.0)
    e1 = ExponentialKernel(0.5, 2.0)
    lam = np.array([0.3 + 1j, 2.0, 5.0 - 3j])
    np.testing.assert_allclose(
        mix.laplace(lam), e0.laplace(lam) + e1.laplace(lam), rtol=1e-14
    )
    assert mix.density(0.7) == pytest.approx(
        e0.density(0.7) + e1.density(0.7), rel=1e-14
    )


def test_log_kernel_pole_and_mask():
    k = LogKernel()
    assert k.laplace(math.e) == pytest.approx(1.0)
    with pytest.raises(KernelDomainError):
        k.laplace(1.0)
    with pytest.raises(KernelDomainError):
        k.laplace(0.5)  # real (0,1] excluded with the pole
    grid = np.array([0.5 + 1j, 3.0, 10.0 + 5j])
    np.testing.assert_array_equal(k.valid_mask(grid), [False, True, True])
    with pytest.raises(UnsupportedKernelError):
        k.density(1.0)


def test_shift_zero_is_identity():
    base = PowerKernel(0.7, amplitude=2.0)
    sk = base.shifted(0.0)
    lam = default_lattice(decades=(-2, 3), n_angles=9)
    np.testing.assert_allclose(sk.laplace(lam), base.laplace(lam), rtol=1e-15)


def test_shifted_kernel_has_no_density():
    sk = PowerKernel(0.5).shifted(1.0)
    with pytest.raises(UnsupportedKernelError):
        sk.density(1.0)
    assert sk.growth_exponent_hint == pytest.approx(0.5)


def test_sectorial_power_kernel_angles():
    # |arg lam**-b| peaks at b*pi/2 on the half-plane boundary
    chk = check_sectorial(PowerKernel(1.5), angle=math.pi / 3)
    assert chk.passed is False
    assert chk.constant == pytest.approx(0.75 * math.pi, abs=1e-3)
    assert chk.data["strict_half_angle"] is False

    chk2 = check_sectorial(PowerKernel(0.5), angle=math.pi / 3)
    assert chk2.passed is True
    assert chk2.constant == pytest.approx(0.25 * math.pi, abs=1e-3)
    assert chk2.data["strict_half_angle"] is True

    # ahat = xi/(lam+s) maps the right half-plane into itself
    chk3 = check_sectorial(ExponentialKernel(2.0, 1.5), angle=math.pi / 2)
    assert chk3.passed is True


def test_sectorial_uses_valid_mask():
    chk = check_sectorial(LogKernel())
    assert chk.passed is None
    assert complex(chk.witness).real >= 2.0


def test_one_regular_constants():
    chk = check_one_regular(PowerKernel(0.7))
    assert chk.passed is True
    assert chk.constant == pytest.approx(0.7, abs=1e-10)

    chk = check_one_regular(ExponentialKernel(1.0, 2.0))
    assert chk.passed is True
    assert chk.constant <= 1.0 + 1e-9

    # lam*ahat'/ahat = -1/log(lam) for the log kernel; sup on Re >= 2 region
    chk = check_one_regular(LogKernel())
    assert chk.passed is True
    assert chk.constant <= 1.0 / math.log(2.0) + 1e-9


def test_growth_power_kernel_is_tight():
    chk = check_growth(PowerKernel(0.7, amplitude=2.0), constant=2.0)
    assert chk.passed is True
    assert chk.constant == pytest.approx(2.0, rel=1e-12)
    assert chk.data["lower_constant"] == pytest.approx(2.0, rel=1e-12)
    assert chk.data["transform_slope"] == pytest.approx(-0.7, abs=1e-6)


def test_growth_lower_bound_examples():
    # ahat = 1/lam: |ahat|*lam is identically 1
    chk = check_growth(ExponentialKernel(1.0, 0.0), 1.0, direction="lower")
    assert chk.constant == pytest.approx(1.0, rel=1e-12)
    # ahat = 1/(lam+1): infimum of lam/(lam+1) on [1, 1e4] sits at lam = 1
    chk = check_growth(
        ExponentialKernel(1.0, 1.0), 1.0, direction="lower", lam_range=(1.0, 1e4)
    )
    assert chk.constant == pytest.approx(0.5, rel=1e-12)
    assert chk.witness == pytest.approx(1.0)


def test_growth_exponential_kernel_drifts_near_zero():
    # |ahat| * lam ~ lam as lam -> 0 when rate > 0: no positive lower bound
    chk = check_growth(ExponentialKernel(1.0, 1.0), direction="lower")
    assert chk.data["slope_low"] == pytest.approx(1.0, abs=0.05)
    assert chk.data["lower_constant"] < 1e-2


def test_growth_requires_exponent_when_no_hint():
    with pytest.raises(ValueError):
        check_growth(LogKernel())
    with pytest.raises(ValueError):
        check_growth(PowerKernel(0.5), direction="sideways")


@st.composite
def right_half_plane_points(draw):
    r = draw(st.floats(min_value=-2.0, max_value=3.0))
    th = draw(st.floats(min_value=-1.5, max_value=1.5))
    return 10.0**r * complex(math.cos(th), math.sin(th))


@st.composite
def any_kernel(draw):
    which = draw(st.sampled_from(["power", "exp", "mix", "log", "shifted"]))
    if which == "power":
        return PowerKernel(
            exponent=draw(st.floats(0.1, 1.9)),
            amplitude=draw(st.floats(0.1, 5.0)),
        )
    if which == "exp":
        return ExponentialKernel(
            amplitude=draw(st.floats(0.1, 5.0)), rate=draw(st.floats(0.0, 5.0))
        )
    if which == "mix":
        return ExponentialMixtureKernel(
            weights=(draw(st.floats(0.1, 2.0)), draw(st.floats(0.1, 2.0))),
            rates=(draw(st.floats(0.0, 1.0)), draw(st.floats(1.5, 4.0))),
        )
    if which == "log":
        return LogKernel()
    return ShiftedKernel(PowerKernel(draw(st.floats(0.1, 1.9))), draw(st.floats(0.0, 3.0)))


@given(kernel=any_kernel(), lam=right_half_plane_points())
@settings(max_examples=120, deadline=None)
def test_transform_derivative_matches_finite_difference(kernel, lam):
    # central complex-step-free difference; h scaled to the point
    if isinstance(kernel, LogKernel) and abs(lam - 1.0) < 1e-2:
        return
    h = 1e-5 * max(abs(lam), 1e-3)
    fd = (kernel.laplace(lam + h) - kernel.laplace(lam - h)) / (2 * h)
    exact = kernel.laplace_derivative(lam)
    scale = max(abs(exact), abs(fd), 1e-12)
    assert abs(fd - exact) / scale < 5e-4
