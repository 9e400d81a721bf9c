"""Tests for harmonic cubics as an SO(4)-module."""

import math

import numpy as np
import pytest

from umbilic4.cubics import (
    INDEX,
    MONOMIALS,
    HarmonicCubic,
    SymmetricCubic,
    act,
    check_lemma_stabilizers,
    classify_continuous_orbit,
    coordinates,
    doublestar_cubic,
    fixed_subspace,
    from_coordinates,
    group_residuals,
    harmonic_project,
    inner,
    laplacian,
    monomials,
    orthonormal_basis,
    rep_matrix,
    skew_basis,
    stabilizer_algebra,
    star_cubic,
)
from umbilic4.errors import ClassificationError, ValidationError
from umbilic4.quat4 import SO4Matrix, build_so4_subgroup
from umbilic4.suite import exactly_proportional, icosahedral_cubic
from umbilic4.utils import rng_for

SO3_CUBIC = "x1*(x1**2 - x2**2 - x3**2 - x4**2)"


def cubic(expr: str) -> SymmetricCubic:
    return SymmetricCubic.from_expr(expr)


def random_rotation(seed: int) -> np.ndarray:
    q, r = np.linalg.qr(rng_for(seed).standard_normal((4, 4)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


class TestMonomials:
    """Tests for the coefficient layout."""

    def test_order(self):
        assert len(MONOMIALS) == 20
        assert monomials()[0] == "x1^3"
        assert monomials()[-1] == "x4^3"
        assert "x2*x3*x4" in monomials()

    def test_expression_round_trip(self):
        p = cubic("x1**3 - 3*x1*x2**2 + 2*x2*x3*x4")
        assert SymmetricCubic.from_expr(p.to_expr()) == p

    def test_rejects_non_cubic(self):
        with pytest.raises(ValidationError):
            cubic("x1**2")

    def test_json_round_trip_keeps_sqrt5(self):
        p = icosahedral_cubic()
        assert SymmetricCubic.from_json(p.to_json()) == p


class TestHarmonicity:
    """Tests for the Laplacian and harmonic projection."""

    def test_so3_cubic_is_harmonic(self):
        assert laplacian(cubic(SO3_CUBIC)).is_zero()
        HarmonicCubic(cubic(SO3_CUBIC).coeffs)

    def test_rejects_non_harmonic(self):
        with pytest.raises(ValidationError):
            HarmonicCubic(cubic("x1**3").coeffs)

    def test_projection_removes_trace(self):
        """x1^3 - x1 |x|^2 / 2 is the harmonic part of x1^3."""
        expected = cubic("x1**3 - x1*(x1**2 + x2**2 + x3**2 + x4**2)/2")
        assert harmonic_project(cubic("x1**3")).coeffs == expected.coeffs

    def test_tensor_is_traceless(self):
        h = cubic(SO3_CUBIC).tensor()
        np.testing.assert_allclose(np.einsum("iik->k", h), 0.0, atol=1e-15)


class TestInnerProduct:
    """Tests for the apolar inner product and the orthonormal basis."""

    def test_basis_is_orthonormal(self):
        basis = orthonormal_basis()
        gram = np.array([[inner(a, b) for b in basis] for a in basis])
        scale = gram[0, 0]
        np.testing.assert_allclose(gram / scale, np.eye(16), atol=1e-12)

    def test_invariance(self):
        """The inner product is SO(4)-invariant."""
        a = random_rotation(1)
        p = from_coordinates(rng_for(2).standard_normal(16))
        q = from_coordinates(rng_for(3).standard_normal(16))
        assert inner(act(a, p), act(a, q)) == pytest.approx(inner(p, q), rel=1e-10)

    def test_coordinates_round_trip(self):
        v = rng_for(4).standard_normal(16)
        np.testing.assert_allclose(coordinates(from_coordinates(v)), v, atol=1e-12)


class TestAction:
    """Tests for (A.P)(x) = P(xA)."""

    def test_action_matches_evaluation(self):
        a = random_rotation(5)
        p = cubic("x1**3 - 3*x1*x2**2 + x3*x4**2")
        x = rng_for(6).standard_normal(4)
        assert act(a, p).evaluate(x) == pytest.approx(p.evaluate(x @ a), rel=1e-10)

    def test_reflection_pair_fixes_case_four(self):
        """diag(1, -1, -1, 1) fixes x1^3 - 3 x1 x2^2."""
        p = cubic("x1**3 - 3*x1*x2**2")
        m = SO4Matrix.from_rows([[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]])
        assert act(m, p).coeffs == p.coeffs

    def test_rep_is_orthogonal(self):
        rep = rep_matrix(random_rotation(7))
        np.testing.assert_allclose(rep @ rep.T, np.eye(16), atol=1e-10)

    def test_rep_is_homomorphism(self):
        a, b = random_rotation(8), random_rotation(9)
        np.testing.assert_allclose(rep_matrix(a @ b), rep_matrix(a) @ rep_matrix(b), atol=1e-10)


class TestFixedSubspace:
    """Tests for cubics fixed by polyhedral groups."""

    @pytest.mark.parametrize(("label", "dim"), [("T", 2), ("O", 1), ("O+", 1), ("I", 1), ("I+", 1)])
    def test_exact_dimensions(self, label, dim):
        basis = fixed_subspace(list(build_so4_subgroup(label).generators))
        assert len(basis) == dim
        assert all(b.is_exact for b in basis)

    def test_icosahedral_cubic(self):
        """I+ fixes x1(x1^2 - x2^2 - x3^2 - x4^2) + 2 sqrt5 x2 x3 x4 exactly."""
        (basis,) = fixed_subspace(list(build_so4_subgroup("I+").generators))
        assert exactly_proportional(basis, icosahedral_cubic())

    def test_numeric_path_agrees(self):
        gens = list(build_so4_subgroup("T").generators)
        assert len(fixed_subspace(gens, exact=False)) == 2

    def test_group_residuals_vanish(self):
        group = build_so4_subgroup("I+")
        assert max(group_residuals(icosahedral_cubic().to_float(), group.elements)) < 1e-12

    def test_needs_generators(self):
        with pytest.raises(ValidationError):
            fixed_subspace([])


class TestStabilizer:
    """Tests for the stabilizer Lie algebra."""

    @pytest.mark.parametrize(("expr", "dim"), [
        (SO3_CUBIC, 3),
        ("(x1**2 - x2**2)*x3 + 2*x1*x2*x4", 1),
        ("x1**3 - 3*x1*x2**2", 1),
        ("x1**3 - 3*x1*x2**2 + 3*x1*(x1**2 + x2**2 - 2*x3**2 - 2*x4**2)", 1),
    ])
    def test_normal_forms(self, expr, dim):
        assert stabilizer_algebra(cubic(expr).to_float()).algebra_dim == dim

    def test_zero_cubic(self):
        assert stabilizer_algebra(SymmetricCubic.zero(exact=False)).algebra_dim == 6

    def test_generic_cubic_is_discrete(self):
        for seed in range(5):
            p = from_coordinates(rng_for(seed).standard_normal(16))
            assert stabilizer_algebra(p).algebra_dim == 0

    def test_orbit_invariance(self):
        p = cubic("x1**3 - 3*x1*x2**2").to_float()
        moved = act(random_rotation(10), p)
        assert stabilizer_algebra(moved).algebra_dim == 1

    def test_group_check(self):
        report = stabilizer_algebra(icosahedral_cubic().to_float(), groups=[build_so4_subgroup("I+")])
        assert report.checked_groups == {"I+": True}

    @pytest.mark.parametrize(("s", "icosahedral"), [
        (2 * math.sqrt(5), True),
        (1.0, False),
        (3.0, False),
    ])
    def test_tetrahedral_pencil(self, s, icosahedral):
        """x1(x1^2 - |x'|^2) + s x2x3x4 is discrete, and I+-fixed only at s = 2 sqrt5."""
        coeffs = [0.0] * 20
        coeffs[INDEX[(0, 0, 0)]] = 1.0
        for k in (1, 2, 3):
            coeffs[INDEX[(0, k, k)]] = -1.0
        coeffs[INDEX[(1, 2, 3)]] = s
        p = SymmetricCubic(tuple(coeffs))
        report = stabilizer_algebra(p, groups=[build_so4_subgroup("T"), build_so4_subgroup("I+")])
        assert report.algebra_dim == 0
        assert report.checked_groups == {"T": True, "I+": icosahedral}

    def test_skew_basis(self):
        basis = skew_basis()
        assert len(basis) == 6
        assert all(np.allclose(x, -x.T) for x in basis)


class TestClassification:
    """Tests for continuous-stabilizer orbit names."""

    @pytest.mark.parametrize(("expr", "label"), [
        (SO3_CUBIC, "SO(3)"),
        ("(x1**2 - x2**2)*x3 + 2*x1*x2*x4", "O(2)-speed-(1,2)"),
        ("x1**3 - 3*x1*x2**2", "SO(2)⋉S3"),
        ("x1**3 - 3*x1*x2**2 + 3*x1*(x1**2 + x2**2 - 2*x3**2 - 2*x4**2)", "O(2)-reducible"),
        ("x1**3 - 3*x1*x2**2 + 3*x1**2*x2 - x2**3 + 3*x1*(x1**2 + x2**2 - 2*x3**2 - 2*x4**2)", "SO(2)"),
        ("6*x1*(x1**2 - x2**2 - x3**2 - x4**2)", "SO(3)"),
    ])
    def test_normal_forms(self, expr, label):
        assert classify_continuous_orbit(cubic(expr).to_float()) == label

    def test_zero(self):
        assert classify_continuous_orbit(SymmetricCubic.zero(exact=False)) == "SO(4)"

    def test_moved_normal_form(self):
        p = act(random_rotation(11), cubic("x1**3 - 3*x1*x2**2").to_float())
        assert classify_continuous_orbit(p, check_tol=1e-8) == "SO(2)⋉S3"

    def test_discrete_stabilizer_rejected(self):
        with pytest.raises(ClassificationError, match="not on a continuous-stabilizer orbit"):
            classify_continuous_orbit(from_coordinates(rng_for(12).standard_normal(16)))


class TestLemmaFamilies:
    """Tests for the (*) and (**) stabilizer labels."""

    @pytest.mark.parametrize(("params", "label"), [
        ({"r": 1, "s": 1, "u": 1, "v": 1}, "Z3"),
        ({"r": 1, "s": 1, "u": 1, "v": 0}, "D3"),
        ({"r": 1, "s": 0, "u": 1, "v": 1}, "order-18"),
        ({"r": 0, "s": 1, "u": 1, "v": 1}, "continuous"),
    ])
    def test_star(self, params, label):
        verdict = check_lemma_stabilizers("star", params)
        assert verdict.label == label
        assert verdict.verified

    def test_star_orders(self):
        assert check_lemma_stabilizers("star", {"r": 1, "s": 1, "u": 1, "v": 1}).group_order == 3
        assert check_lemma_stabilizers("star", {"r": 1, "s": 1, "u": 1, "v": 0}).group_order == 6
        assert check_lemma_stabilizers("star", {"r": 1, "s": 0, "u": 1, "v": 1}).group_order == 18

    def test_generic_star_excludes_flip(self):
        verdict = check_lemma_stabilizers("*", {"r": 1, "s": 1, "u": 1, "v": 1})
        assert verdict.residuals["excluded-flip"] > 1e-3

    @pytest.mark.parametrize(("params", "label", "order"), [
        ({"r": 0, "s": 1, "u": 1, "v": 0.5}, "D6", 12),
        ({"r": 1, "s": 0, "u": 1, "v": 0.5}, "D3", 6),
        ({"r": 1, "s": 1, "u": 1, "v": 0.5}, "Z3", 3),
    ])
    def test_doublestar(self, params, label, order):
        verdict = check_lemma_stabilizers("doublestar", params)
        assert verdict.label == label
        assert verdict.verified
        assert verdict.group_order == order

    def test_builders_are_harmonic(self):
        assert isinstance(star_cubic(1, 2, 3, 4), HarmonicCubic)
        assert isinstance(doublestar_cubic(1, 2, 3, 4), HarmonicCubic)

    def test_unknown_family(self):
        with pytest.raises(ValidationError):
            check_lemma_stabilizers("triple", {"r": 1, "s": 1, "u": 1, "v": 1})

    def test_missing_parameter(self):
        with pytest.raises(ValidationError):
            check_lemma_stabilizers("star", {"r": 1})

