"""Tests for the reference element."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss
from scipy.integrate import newton_cotes

from dgwave.errors import InvalidDegreeError, InvalidExponentError, InvalidMeshError
from dgwave.reference_element import (
    MAX_DEGREE,
    basis_derivatives,
    basis_values,
    build_reference_element,
    compute_lambda,
    expansion_values,
    mass_matrix_scaling,
    newton_cotes_alpha,
)

ALL_DEGREES = list(range(MAX_DEGREE + 1))


class TestLowDegreeMatrices:
    """Closed-form matrices for k = 0 and k = 1."""

    def test_degree_zero(self) -> None:
        elem = build_reference_element(0)
        np.testing.assert_allclose(elem.alpha, [2.0], atol=1e-12)
        np.testing.assert_allclose(elem.M, [[1.0]], atol=1e-12)
        np.testing.assert_allclose(elem.R, [[0.0]], atol=1e-12)
        np.testing.assert_allclose(elem.A, [[1.0]], atol=1e-12)
        np.testing.assert_allclose(elem.B, [[1.0]], atol=1e-12)
        np.testing.assert_allclose(elem.E, [[1.0]], atol=1e-12)
        np.testing.assert_allclose(elem.F, [[-1.0]], atol=1e-12)
        assert elem.rho_min == pytest.approx(1.0)
        assert elem.rho_max == pytest.approx(1.0)

    def test_degree_one(self) -> None:
        elem = build_reference_element(1)
        np.testing.assert_allclose(elem.alpha, [1.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(elem.M, [[1 / 3, 1 / 6], [1 / 6, 1 / 3]], atol=1e-12)
        np.testing.assert_allclose(elem.R, [[-0.5, 0.5], [-0.5, 0.5]], atol=1e-12)
        np.testing.assert_allclose(elem.A, [[1.0, 0.0], [0.0, 0.0]], atol=1e-12)
        np.testing.assert_allclose(elem.B, [[0.0, 1.0], [0.0, 0.0]], atol=1e-12)
        np.testing.assert_allclose(elem.E, [[3.0, 1.0], [-3.0, 1.0]], atol=1e-12)
        np.testing.assert_allclose(elem.F, [[0.0, -4.0], [0.0, 2.0]], atol=1e-12)
        assert elem.rho_min == pytest.approx(3.0)
        assert elem.rho_max == pytest.approx(4.0)

    def test_degree_seven_alpha(self) -> None:
        expected = np.array([751, 3577, 1323, 2989, 2989, 1323, 3577, 751]) / 8640
        np.testing.assert_allclose(build_reference_element(7).alpha, expected, atol=1e-12)


class TestIdentities:
    """Row-sum identities and basis properties for every degree."""

    @pytest.mark.parametrize("k", ALL_DEGREES)
    def test_row_sums_vanish(self, k: int) -> None:
        elem = build_reference_element(k)
        assert np.abs((elem.R + elem.A - elem.B).sum(axis=1)).max() <= 1e-12
        assert np.abs((elem.E + elem.F).sum(axis=1)).max() <= 1e-12

    @pytest.mark.parametrize("k", ALL_DEGREES)
    def test_mass_matrix_spd_and_inverse(self, k: int) -> None:
        elem = build_reference_element(k)
        np.testing.assert_allclose(elem.M, elem.M.T, atol=1e-15)
        assert np.linalg.eigvalsh(elem.M).min() > 0
        np.testing.assert_allclose(elem.M @ elem.M_inv, np.eye(k + 1), atol=1e-12)

    @pytest.mark.parametrize("k", ALL_DEGREES)
    def test_partition_of_unity(self, k: int) -> None:
        elem = build_reference_element(k)
        xq, _ = leggauss(k + 3)
        np.testing.assert_allclose(basis_values(elem, xq).sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(basis_derivatives(elem, xq).sum(axis=1), 0.0, atol=1e-11)

    @pytest.mark.parametrize("k", ALL_DEGREES)
    def test_rho_ordering(self, k: int) -> None:
        elem = build_reference_element(k)
        assert elem.rho_min <= elem.rho_max

    @pytest.mark.parametrize("k", range(1, MAX_DEGREE + 1))
    def test_node_reversal_symmetry(self, k: int) -> None:
        elem = build_reference_element(k)
        P = np.eye(k + 1)[::-1]
        np.testing.assert_allclose(P @ elem.M @ P, elem.M, atol=1e-12)
        np.testing.assert_allclose(P @ elem.R @ P, -elem.R, atol=1e-11)
        np.testing.assert_allclose(P @ elem.A @ P, elem.D, atol=1e-12)
        np.testing.assert_allclose(P @ elem.B @ P, elem.C, atol=1e-12)


class TestAlphaWeights:
    """alpha against the exact Newton-Cotes rationals and an independent oracle."""

    @pytest.mark.parametrize("k", ALL_DEGREES)
    def test_matches_exact_rationals(self, k: int) -> None:
        exact = newton_cotes_alpha(k)
        assert sum(exact) == Fraction(2)
        assert all(w > 0 for w in exact)
        np.testing.assert_allclose(
            build_reference_element(k).alpha, [float(w) for w in exact], atol=1e-12
        )

    @pytest.mark.parametrize("k", range(1, MAX_DEGREE + 1))
    def test_matches_scipy_newton_cotes(self, k: int) -> None:
        weights, _ = newton_cotes(k, 1)
        np.testing.assert_allclose(build_reference_element(k).alpha, weights * 2.0 / k, atol=1e-12)

    @pytest.mark.parametrize("k", ALL_DEGREES)
    def test_matches_gauss_quadrature(self, k: int) -> None:
        elem = build_reference_element(k)
        xq, wq = leggauss(20)
        np.testing.assert_allclose(basis_values(elem, xq).T @ wq, elem.alpha, atol=1e-12)


class TestPolynomialReproduction:
    """Interpolating a degree <= k polynomial reproduces it exactly."""

    @settings(max_examples=50, deadline=None)
    @given(
        k=st.integers(min_value=0, max_value=MAX_DEGREE),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_reproduces_polynomials(self, k: int, seed: int) -> None:
        rng = np.random.default_rng(seed)
        poly = Polynomial(rng.uniform(-1.0, 1.0, size=k + 1))
        elem = build_reference_element(k)
        xi = rng.uniform(-1.0, 1.0, size=100)
        values = expansion_values(elem, poly(elem.nodes)[None, :], xi)[0]
        np.testing.assert_allclose(values, poly(xi), atol=1e-12)


class TestMassMatrixScaling:
    """Physical cell matrices."""

    def test_degree_zero_half_width(self) -> None:
        cell = mass_matrix_scaling(build_reference_element(0), 0.5)
        np.testing.assert_allclose(cell.M, [[0.5]])

    def test_unit_width_is_identity_scaling(self, p1) -> None:
        cell = mass_matrix_scaling(p1, 1.0)
        np.testing.assert_allclose(cell.M, p1.M)
        np.testing.assert_allclose(cell.R, p1.R)

    def test_against_physical_quadrature(self, p1) -> None:
        h = 1.0 / 32
        cell = mass_matrix_scaling(p1, h)
        # direct quadrature over [0, h] of the mapped basis
        xq, wq = leggauss(6)
        V = basis_values(p1, xq)
        physical = (h / 2) * V.T @ (wq[:, None] * V)
        np.testing.assert_allclose(cell.M, physical, atol=1e-15)
        np.testing.assert_allclose(cell.M, p1.M / 32, atol=1e-15)

    @pytest.mark.parametrize("h", [0.0, -1.0])
    def test_rejects_nonpositive_width(self, p1, h: float) -> None:
        with pytest.raises(InvalidMeshError):
            mass_matrix_scaling(p1, h)


class TestLambda:
    """Mean-value power constant."""

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 7.0])
    def test_degree_zero_is_one(self, p: float) -> None:
        assert compute_lambda(build_reference_element(0), p) == pytest.approx(1.0)

    def test_degree_one_quadratic(self) -> None:
        assert compute_lambda(build_reference_element(1), 2.0) == pytest.approx(1.0)

    def test_degree_two_cubic(self) -> None:
        assert compute_lambda(build_reference_element(2), 3.0) == pytest.approx(0.25)

    @pytest.mark.parametrize("p", [1.0, 0.5, -2.0])
    def test_rejects_small_exponent(self, p1, p: float) -> None:
        with pytest.raises(InvalidExponentError):
            compute_lambda(p1, p)


class TestDegreeValidation:
    """Degrees outside 0..7 are rejected."""

    @pytest.mark.parametrize("k", [-1, 8, 9, True, 1.5])
    def test_rejects(self, k) -> None:
        with pytest.raises(InvalidDegreeError, match="0..7"):
            build_reference_element(k)

    def test_to_dict_is_json_ready(self, p1) -> None:
        data = p1.to_dict()
        assert data["k"] == 1
        assert data["E"] == pytest.approx([[3.0, 1.0], [-3.0, 1.0]])
        assert set(data) >= {"M", "M_inv", "R", "A", "B", "C", "D", "F", "alpha", "rho_min", "rho_max"}

    def test_arrays_are_read_only(self, p1) -> None:
        with pytest.raises(ValueError):
            p1.M[0, 0] = 2.0
