"""Tests for quaternions and finite subgroups of SO(4)."""

import numpy as np
import pytest

from umbilic4.errors import ClosureError, ValidationError
from umbilic4.quat4 import (
    ADVERTISED_ORDERS,
    Quaternion,
    RotationPair,
    SO4Matrix,
    build_binary_subgroup,
    build_so4_subgroup,
    closure,
    group_closure_order,
    group_to_json,
    icosa_generator,
    is_rotation,
    is_unit,
    minus_identity,
    normalize_label,
    plus_automorphism,
    rotation_from_pair,
)

I = Quaternion.exact(0, 1)
J = Quaternion.exact(0, 0, 1)
K = Quaternion.exact(0, 0, 0, 1)


class TestQuaternion:
    """Tests for the Hamilton product."""

    def test_basis_products(self):
        assert I * J == K
        assert J * K == I
        assert K * I == J
        assert I * I == Quaternion.exact(-1)

    def test_icosahedral_generator_is_unit(self):
        assert is_unit(icosa_generator())

    def test_plus_automorphism_is_involution(self):
        g = icosa_generator()
        assert plus_automorphism(plus_automorphism(g)) == g
        assert plus_automorphism(g) != g

    def test_plus_automorphism_needs_exact(self):
        with pytest.raises(ValidationError):
            plus_automorphism(Quaternion.numeric(1.0))


class TestRotationPair:
    """Tests for the double cover S3 x S3 -> SO(4)."""

    def test_pair_and_negated_pair_agree(self):
        """(l, r) and (-l, -r) give the same pair and the same matrix."""
        p = RotationPair(-I, -J)
        q = RotationPair(I, J)
        assert p == q
        assert rotation_from_pair(p).key() == rotation_from_pair(q).key()

    def test_diagonal_pair_fixes_real_axis(self):
        """x -> i x conj(i) is diag(1, 1, -1, -1)."""
        m = rotation_from_pair(RotationPair(I, I))
        np.testing.assert_array_equal(m.to_numpy(), np.diag([1.0, 1.0, -1.0, -1.0]))

    def test_matrix_is_rotation(self):
        g = icosa_generator()
        assert is_rotation(rotation_from_pair(RotationPair(plus_automorphism(g), g)))

    def test_rejects_non_unit(self):
        with pytest.raises(ValidationError):
            rotation_from_pair(RotationPair(Quaternion.exact(1, 1), Quaternion.exact(1)))

    def test_matrix_needs_sixteen_entries(self):
        with pytest.raises(ValidationError):
            SO4Matrix((1.0,) * 15)


class TestBinaryGroups:
    """Tests for finite subgroups of the unit quaternions."""

    @pytest.mark.parametrize(("label", "n", "order"), [
        ("T", None, 24), ("O", None, 48), ("I", None, 120), ("C", 5, 5), ("D", 3, 12),
    ])
    def test_orders(self, label, n, order):
        assert len(build_binary_subgroup(label, n)) == order

    def test_cyclic_needs_n(self):
        with pytest.raises(ValidationError):
            build_binary_subgroup("C")

    def test_unknown_label(self):
        with pytest.raises(ValidationError):
            build_binary_subgroup("X")


class TestSO4Subgroups:
    """Tests for the polyhedral subgroups without -I."""

    @pytest.mark.parametrize("label", sorted(ADVERTISED_ORDERS))
    def test_advertised_orders(self, label):
        group = build_so4_subgroup(label)
        assert group.exact
        assert group.order == ADVERTISED_ORDERS[label]
        assert group_closure_order(list(group.generators)) == ADVERTISED_ORDERS[label]
        assert not group.contains(minus_identity())

    def test_elements_are_rotations(self):
        group = build_so4_subgroup("O+")
        assert all(is_rotation(m) for m in group.elements)

    def test_aliases(self):
        assert normalize_label("𝕆⁺") == "O+"
        assert normalize_label("𝕀+") == "I+"

    def test_unknown_label(self):
        with pytest.raises(ValidationError):
            build_so4_subgroup("Q")

    def test_polyhedral_takes_no_params(self):
        with pytest.raises(ValidationError):
            build_so4_subgroup("T", {"m": 1})

    def test_json(self):
        data = group_to_json(build_so4_subgroup("T"))
        assert data["order"] == 12
        assert len(data["elements"]) == 12
        assert all(len(e) == 16 and all(isinstance(x, str) for x in e) for e in data["elements"])


class TestFamilies:
    """Tests for the cyclic and dihedral families."""

    def test_family_closes_without_minus_identity(self):
        group = build_so4_subgroup("cyclic", {"m": 3, "n": 5, "r": 1, "s": 1})
        assert not group.exact
        assert not group.contains(minus_identity(exact=False))
        assert all(is_rotation(m) for m in group.elements)

    def test_dihedral_doubles_cyclic(self):
        params = {"m": 3, "n": 3, "r": 1, "s": 1}
        cyclic = build_so4_subgroup("cyclic", params)
        dihedral = build_so4_subgroup("dihedral", params)
        assert dihedral.order == 2 * cyclic.order

    @pytest.mark.parametrize("params", [
        {"m": 2, "n": 3, "r": 1, "s": 1},
        {"m": 3, "n": 3, "r": 1, "s": 2},
        {"m": 3, "n": 3, "r": 3, "s": 3},
        {"m": 3, "n": 3, "r": 0, "s": 1},
    ])
    def test_invalid_parameters(self, params):
        with pytest.raises(ValidationError):
            build_so4_subgroup("cyclic", params)

    def test_missing_parameter(self):
        with pytest.raises(ValidationError):
            build_so4_subgroup("cyclic", {"m": 3})


class TestClosure:
    """Tests for closure under multiplication."""

    def test_cap(self):
        gens = list(build_so4_subgroup("I").generators)
        with pytest.raises(ClosureError, match="not closed at cap 10"):
            closure(gens, cap=10)

    def test_empty(self):
        with pytest.raises(ValidationError):
            closure([])
