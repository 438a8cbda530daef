"""Box constants, kernel norms, and balayage for discrete measures."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from oracles import carleson_constant_bruteforce
from volterra_control.carleson import (
    CarlesonSquare,
    DiscreteMeasure,
    NearAtomWarning,
    balayage,
    embedding_gamma_carleson,
    geometric_carleson_constant,
    hp_kernel_norm,
    kernel_embedding_test,
    measure_of_square,
)


def random_measure(rng, n=None):
    n = n if n is not None else int(rng.integers(1, 9))
    x = rng.uniform(0.05, 3.0, n)
    y = rng.uniform(-3.0, 3.0, n)
    m = rng.uniform(0.1, 2.0, n)
    return DiscreteMeasure.from_arrays(x + 1j * y, m)


# ---------------------------------------------------------------------------
# types


def test_measure_validation():
    with pytest.raises(ValueError):
        DiscreteMeasure(((1 + 0j, -1.0),))
    with pytest.raises(ValueError):
        DiscreteMeasure(((1 + 0j, 0.0),))
    with pytest.raises(ValueError):
        DiscreteMeasure(((-0.5 + 0j, 1.0),))
    with pytest.raises(ValueError):
        DiscreteMeasure(((1 + 0j, 1.0), (1 + 0j, 2.0)))
    mu = DiscreteMeasure(((1 + 2j, 1.0), (3 + 0j, 0.5)))
    assert mu.total_mass == pytest.approx(1.5)
    assert len(mu) == 2


def test_square_validation_and_containment():
    with pytest.raises(ValueError):
        CarlesonSquare(0.0, 0.0)
    with pytest.raises(ValueError):
        CarlesonSquare(0.0, -1.0)
    q = CarlesonSquare(0.0, 1.0)
    assert q.contains(1 + 0j)
    assert q.contains(0.5 + 0.5j)
    assert not q.contains(0 + 0j)  # open left edge
    assert not q.contains(1.0 + 0.51j)


# ---------------------------------------------------------------------------
# measure_of_square


def test_measure_of_square_containment():
    mu = DiscreteMeasure(((1 + 0j, 2.0),))
    assert measure_of_square(mu, CarlesonSquare(0.0, 1.0)) == 2.0
    assert measure_of_square(mu, CarlesonSquare(0.0, 0.5)) == 0.0


def test_measure_of_square_dyadic_count():
    mu = DiscreteMeasure(tuple((2.0**-j + 0j, 1.0) for j in range(4)))
    assert measure_of_square(mu, CarlesonSquare(0.0, 0.5)) == 3.0


def test_axis_atoms_never_counted():
    mu = DiscreteMeasure(((0 + 0j, 5.0), (0.25 + 0j, 1.0)))
    assert measure_of_square(mu, CarlesonSquare(0.0, 1.0)) == 1.0
    const, _ = geometric_carleson_constant(mu, 1.0)
    assert const == pytest.approx(4.0)  # only the off-axis atom contributes


# ---------------------------------------------------------------------------
# geometric constant


def test_single_atom_constant_and_witness():
    mu = DiscreteMeasure(((1 + 0j, 1.0),))
    const, witness = geometric_carleson_constant(mu, 1.0, 10.0)
    assert const == 1.0
    assert witness.side == 1.0
    assert abs(witness.center) < 1e-15


def test_empty_measure_constant():
    const, witness = geometric_carleson_constant(DiscreteMeasure(()), 1.0, 10.0)
    assert const == 0.0
    assert witness is None


def test_dyadic_ladder_constant():
    mu = DiscreteMeasure(tuple((2.0**-j + 0j, 1.0) for j in range(4)))
    const, witness = geometric_carleson_constant(mu, 1.0, 10.0)
    assert const == 8.0
    assert witness.side in (0.125, 0.25)
    # the witness square reproduces the supremum when re-measured
    back = measure_of_square(mu, witness) ** 1.0 / witness.side
    assert back == pytest.approx(const, rel=1e-12)


def test_h_max_cap_excludes_large_squares():
    mu = DiscreteMeasure(((2 + 0j, 1.0),))
    const, witness = geometric_carleson_constant(mu, 1.0, 1.0)
    assert const == 0.0
    assert witness is None


@pytest.mark.parametrize("gamma", [0.5, 1.0, 1.7])
def test_matches_bruteforce_subset_oracle(gamma):
    rng = np.random.default_rng(hash(("carleson", gamma)) % 2**32)
    for _ in range(25):
        mu = random_measure(rng)
        got, witness = geometric_carleson_constant(mu, gamma, 100.0)
        want = carleson_constant_bruteforce(mu.atoms, gamma, 100.0)
        assert got == pytest.approx(want, rel=1e-12)
        back = measure_of_square(mu, witness) ** gamma / witness.side
        assert back == pytest.approx(got, rel=1e-12)


def test_dilation_covariance():
    rng = np.random.default_rng(7)
    mu = random_measure(rng, 6)
    base, _ = geometric_carleson_constant(mu, 1.3)
    for c in (0.5, 2.0, 10.0):
        scaled, _ = geometric_carleson_constant(mu.dilated(c), 1.3)
        assert scaled == pytest.approx(base / c, rel=1e-13)


def test_mass_homogeneity_machine_precision():
    rng = np.random.default_rng(11)
    for _ in range(50):
        mu = random_measure(rng)
        gamma = float(rng.uniform(0.3, 2.5))
        factor = float(rng.uniform(0.2, 9.0))
        base, _ = geometric_carleson_constant(mu, gamma)
        scaled, _ = geometric_carleson_constant(mu.scaled(factor), gamma)
        assert scaled == pytest.approx(factor**gamma * base, rel=1e-12)


def test_adding_atom_never_decreases_constant():
    rng = np.random.default_rng(13)
    for _ in range(20):
        mu = random_measure(rng)
        z = complex(rng.uniform(0.05, 3.0), rng.uniform(-3.0, 3.0))
        if any(z == p for p, _ in mu.atoms):
            continue
        bigger = mu.with_atom(z, float(rng.uniform(0.1, 2.0)))
        a, _ = geometric_carleson_constant(mu, 1.0)
        b, _ = geometric_carleson_constant(bigger, 1.0)
        assert b >= a - 1e-15


def test_gamma_validation():
    mu = DiscreteMeasure(((1 + 0j, 1.0),))
    with pytest.raises(ValueError):
        geometric_carleson_constant(mu, 0.0)
    with pytest.raises(ValueError):
        geometric_carleson_constant(mu, 1.0, h_max=0.0)


# ---------------------------------------------------------------------------
# kernel norms


def test_hp_norm_hand_values():
    assert hp_kernel_norm(1.0, 2.0) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert hp_kernel_norm(4.0, 2.0) == pytest.approx(
        0.5 * math.sqrt(math.pi), rel=1e-14
    )


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 7.0])
def test_hp_norm_quadrature_oracle(p):
    integral, err = quad(
        lambda t: (1.0 + t * t) ** (-0.5 * p),
        -np.inf,
        np.inf,
        epsabs=1e-13,
        epsrel=1e-13,
    )
    assert err < 1e-11
    want = integral ** (1.0 / p)
    assert hp_kernel_norm(1.0, p) == pytest.approx(want, rel=1e-10)


def test_hp_norm_homogeneity():
    for p in (1.3, 2.0, 4.0):
        lam = 0.7 + 2.0j
        ratio = hp_kernel_norm(2 * lam, p) / hp_kernel_norm(lam, p)
        assert ratio == pytest.approx(2.0 ** (-(p - 1.0) / p), rel=1e-14)


def test_hp_norm_validation():
    with pytest.raises(ValueError):
        hp_kernel_norm(1.0, 1.0)
    with pytest.raises(ValueError):
        hp_kernel_norm(-1.0, 2.0)
    with pytest.raises(ValueError):
        hp_kernel_norm(1j, 2.0)


# ---------------------------------------------------------------------------
# embedding test


def test_embedding_single_atom_hand_value():
    mu = DiscreteMeasure(((1 + 0j, 1.0),))
    const, witness = kernel_embedding_test(mu, 2.0, 2.0, [1.0 + 0j])
    assert const == pytest.approx(0.5 / math.sqrt(math.pi), rel=1e-14)
    assert witness == 1.0 + 0j


def test_embedding_empty_measure():
    const, witness = kernel_embedding_test(DiscreteMeasure(()), 2.0, 2.0, [1.0])
    assert const == 0.0
    assert witness is None


def test_embedding_mass_scaling_is_sqrt():
    rng = np.random.default_rng(3)
    mu = random_measure(rng, 5)
    pts = [complex(p) for p in mu.positions]
    base, _ = kernel_embedding_test(mu, 2.0, 2.0, pts)
    quad_mass, _ = kernel_embedding_test(mu.scaled(4.0), 2.0, 2.0, pts)
    assert quad_mass == 2.0 * base  # exact: sqrt(4 m) = 2 sqrt(m)


def test_embedding_validation():
    mu = DiscreteMeasure(((1 + 0j, 1.0),))
    with pytest.raises(ValueError):
        kernel_embedding_test(mu, 2.0, 2.0, [0.0 + 1j])
    with pytest.raises(ValueError):
        kernel_embedding_test(mu, 2.0, 1.0, [1.0])


def test_embedding_vs_geometric_within_lemma_factor():
    # p = q means exponent one; the two constants track each other within
    # a universal factor (recorded loosely, the proof constant is ~40)
    rng = np.random.default_rng(17)
    ratios = []
    for _ in range(50):
        mu = random_measure(rng)
        geo, _ = geometric_carleson_constant(mu, 1.0)
        pts = [complex(p) for p in mu.positions]
        emb, _ = kernel_embedding_test(mu, 2.0, 2.0, pts)
        ratios.append(geo / emb**2)
    assert 1.0 / 40.0 < min(ratios) and max(ratios) < 40.0


# ---------------------------------------------------------------------------
# balayage


def test_balayage_poisson_hand_value():
    mu = DiscreteMeasure(((1 + 0j, 1.0),))
    assert balayage(mu, 0.0) == pytest.approx(1.0 / math.pi, rel=1e-14)


def test_balayage_decay():
    mu = DiscreteMeasure(((1 + 0j, 1.0),))
    assert balayage(mu, 1e9) < 1e-15


def test_balayage_total_integral_is_total_mass():
    # compactify the line with w = tan(theta) so the quadrature sees the
    # whole tail; each Poisson bump carries exactly its atom's mass
    mu = DiscreteMeasure(((1 + 0.3j, 0.6), (0.2 - 1j, 0.4)))
    val, _ = quad(
        lambda th: balayage(mu, math.tan(th)) / math.cos(th) ** 2,
        -0.5 * math.pi + 1e-12,
        0.5 * math.pi - 1e-12,
        points=[math.atan(-1.0), math.atan(0.3)],
        limit=200,
    )
    assert val == pytest.approx(mu.total_mass, abs=1e-4)


def test_balayage_near_atom_warning_and_error():
    mu = DiscreteMeasure(((1e-8 + 0j, 1.0),))
    with pytest.warns(NearAtomWarning):
        balayage(mu, 0.0)
    on_axis = DiscreteMeasure(((0 + 2j, 1.0),))
    with pytest.raises(ValueError):
        balayage(on_axis, 2.0)


# ---------------------------------------------------------------------------
# embedding verdict


def test_embedding_gamma_certifies_sectorial_measure():
    mu = DiscreteMeasure(((1 + 0.2j, 1.0), (2 - 0.5j, 0.5)))
    v = embedding_gamma_carleson(mu, 1.5, (1.0, 2.0))
    assert v.certified
    assert v.window_constants is not None
    assert all(c > 0 for c in v.window_constants)
    assert all(w is not None for w in v.witnesses)


def test_embedding_gamma_rejects_nonsectorial_support():
    angle = 0.5 * math.pi - 1e-9
    z = complex(math.cos(angle), math.sin(angle))
    mu = DiscreteMeasure(((z, 1.0), (1 + 0j, 1.0)))
    v = embedding_gamma_carleson(mu, 1.5, (1.0, 2.0), sector=0.25 * math.pi)
    assert not v.certified
    assert v.note == "inconclusive: support not sectorial"
    assert v.window_constants is None


def test_embedding_gamma_window_validation():
    mu = DiscreteMeasure(((1 + 0j, 1.0),))
    with pytest.raises(ValueError):
        embedding_gamma_carleson(mu, 1.5, (1.6, 2.0))
    with pytest.raises(ValueError):
        embedding_gamma_carleson(mu, 1.5, (1.0, 1.4))
    with pytest.raises(ValueError):
        embedding_gamma_carleson(mu, 1.5, (1.0, 2.0), sector=1.6)


def test_embedding_gamma_with_diagnostic():
    mu = DiscreteMeasure(((1 + 0j, 1.0),))
    v = embedding_gamma_carleson(mu, 2.0, (1.5, 3.0), diagnostics=True)
    # single Poisson bump: integral of S^2 = 1/(2 pi x) at x = 1
    assert v.balayage_diagnostic == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-6)
