import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from expdelay import (
    PhiCombo,
    phi_combo_eval,
    phi_dde_weight,
    phi_matrix_action,
    phi_re_weight,
    phi_scalar,
)

E = math.e


@pytest.mark.parametrize("k", range(5))
def test_phi_at_zero_is_inverse_factorial(k):
    assert phi_scalar(k, 0.0) == pytest.approx(1.0 / math.factorial(k), abs=1e-16)


def test_phi_closed_forms_at_one():
    # phi_1(z) = (e^z - 1)/z and the recursion phi_2 = (phi_1 - 1)/z
    assert phi_scalar(1, 1.0) == pytest.approx(E - 1.0, abs=1e-14)
    assert phi_scalar(2, 1.0) == pytest.approx(E - 2.0, abs=1e-14)
    assert phi_scalar(3, 1.0) == pytest.approx(E - 2.5, abs=1e-14)


def test_phi_zero_order_is_exp():
    for z in (-30.0, -1.0, 0.0, 2.5, 20.0):
        assert phi_scalar(0, z) == pytest.approx(math.exp(z), rel=1e-15)


def test_phi_negative_order_rejected():
    with pytest.raises(ValueError):
        phi_scalar(-1, 1.0)


@settings(deadline=None, max_examples=200)
@given(st.floats(min_value=-100.0, max_value=30.0), st.integers(0, 3))
def test_phi_recursion_identity(z, k):
    lhs = phi_scalar(k, z)
    rhs = z * phi_scalar(k + 1, z) + 1.0 / math.factorial(k)
    assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(lhs))


def test_phi_recursion_identity_on_fixed_grid():
    zs = np.linspace(-100.0, 30.0, 200)
    for k in range(4):
        for z in zs:
            lhs = phi_scalar(k, z)
            rhs = z * phi_scalar(k + 1, z) + 1.0 / math.factorial(k)
            assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(lhs))


@pytest.mark.parametrize("z", [-10.0, -1.0, 0.0, 1.0, 10.0])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_phi_matches_integral_oracle(k, z):
    # phi_k(z) = int_0^1 e^{z(1-s)} s^{k-1}/(k-1)! ds
    val, _ = quad(
        lambda s: math.exp(z * (1.0 - s)) * s ** (k - 1) / math.factorial(k - 1),
        0.0,
        1.0,
        epsabs=1e-13,
        epsrel=1e-13,
        limit=200,
    )
    assert phi_scalar(k, z) == pytest.approx(val, abs=1e-10)


def test_combo_examples():
    combo = PhiCombo(((1, 1.0, 1.0), (2, 1.0, -1.0)))
    assert phi_combo_eval(combo, 0.0) == pytest.approx(0.5, abs=1e-15)
    # Heun's first weight phi_1 - phi_2 at z = 1 collapses to 1
    assert phi_combo_eval(combo, 1.0) == pytest.approx(1.0, abs=1e-14)
    assert phi_combo_eval(PhiCombo(), 123.4) == 0.0


def test_combo_validation():
    with pytest.raises(ValueError):
        PhiCombo(((0, 1.0, 1.0),))
    with pytest.raises(ValueError):
        PhiCombo(((1, 1.5, 1.0),))


def test_dde_weight_examples():
    for k in (1, 2, 3):
        assert phi_dde_weight(k, 0.3, 0.0) == pytest.approx(
            1.0 / math.factorial(k), abs=1e-15
        )
        assert phi_dde_weight(k, 0.3, -0.3) == 0.0
        assert phi_dde_weight(k, 0.3, -1.0) == 0.0
    assert phi_dde_weight(2, 0.1, -0.05) == pytest.approx(0.125, abs=1e-15)


def test_re_weight_examples():
    for k in (1, 2, 3):
        assert phi_re_weight(k, 0.3, 0.0) == 0.0
        assert phi_re_weight(k, 0.3, -0.3) == pytest.approx(
            1.0 / math.factorial(k), abs=1e-15
        )
    # h * phi_1 weight reproduces the -theta ramp of the Euler update
    h = 0.3
    for theta in (-0.3, -0.12, -0.05, 0.0):
        assert h * phi_re_weight(1, h, theta) == pytest.approx(-theta, abs=1e-15)


@settings(deadline=None, max_examples=200)
@given(
    st.integers(1, 4),
    st.floats(min_value=1e-3, max_value=10.0),
    st.floats(min_value=-20.0, max_value=0.0),
)
def test_weights_are_complementary(k, gh, theta):
    scale = gh**k * math.factorial(k)
    total = phi_dde_weight(k, gh, theta) * scale + phi_re_weight(k, gh, theta) * scale
    assert total == pytest.approx(gh**k, rel=1e-12)


def test_matrix_action_zero_matrix():
    v = np.array([1.0, -2.0, 3.5])
    for k in (1, 2, 3, 4):
        np.testing.assert_allclose(
            phi_matrix_action(k, np.zeros((3, 3)), v), v / math.factorial(k), atol=0
        )


def test_matrix_action_diagonal():
    lams = np.array([-3.0, 0.5, 2.0])
    v = np.array([1.0, 2.0, -1.0])
    got = phi_matrix_action(1, np.diag(lams), v)
    want = (np.exp(lams) - 1.0) / lams * v
    np.testing.assert_allclose(got, want, rtol=1e-13)


@pytest.mark.parametrize("z", [-50.0, -1.0, 0.5, 20.0])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_matrix_action_matches_scalar(k, z):
    v = np.array([0.7])
    got = phi_matrix_action(k, np.array([[z]]), v)[0]
    want = phi_scalar(k, z) * 0.7
    assert abs(got - want) <= 1e-12 * (1.0 + abs(want))


def test_matrix_action_linear_in_v(rng):
    M = rng.standard_normal((5, 5))
    u = rng.standard_normal(5)
    v = rng.standard_normal(5)
    a, b = 1.7, -0.4
    for k in (1, 2, 3):
        lhs = phi_matrix_action(k, M, a * u + b * v)
        rhs = a * phi_matrix_action(k, M, u) + b * phi_matrix_action(k, M, v)
        assert np.max(np.abs(lhs - rhs)) <= 1e-13 * (1.0 + np.max(np.abs(lhs)))


def test_matrix_action_contract_violations():
    with pytest.raises(ValueError):
        phi_matrix_action(1, np.zeros((2, 3)), np.zeros(2))
    with pytest.raises(ValueError):
        phi_matrix_action(1, np.zeros((2, 2)), np.zeros(3))
    with pytest.raises(ValueError):
        phi_matrix_action(5, np.zeros((2, 2)), np.zeros(2))
