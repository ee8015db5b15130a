"""
Tests for bases_tools.sp_group.
Focus: group orders, transitivity on lax vectors, rotations and the level quotient.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from bases_tools.bases_complex import BasesSpec, build_bases, enumerate_lax_vertices
from bases_tools.config import settings
from bases_tools.errors import InvalidInputError
from bases_tools.sp_group import (
    GroupTooLargeError,
    SpElement,
    act,
    brute_force_group,
    check_without_rotations,
    enumerate_group,
    equivariant_premises,
    group_order,
    identity,
    inverse,
    is_symplectic,
    level_kernel,
    level_quotient,
    orbit,
    reduction_map,
    transvection,
    transvection_generators,
    transvection_matrix,
)
from bases_tools.zl_linalg import ZLVector, basis_vector, canonical_lax


class TestElements:
    """Symplectic matrices and transvections."""

    def test_invalid_matrix(self):
        with pytest.raises(ValidationError):
            SpElement(g=1, L=3, matrix=((1, 1), (0, 2)))

    def test_unreduced_entries(self):
        with pytest.raises(ValidationError):
            SpElement(g=1, L=3, matrix=((4, 0), (0, 1)))

    def test_transvection_is_symplectic_over_the_integers(self):
        assert is_symplectic(transvection_matrix([1, 2, -3, 5]), 0)
        assert is_symplectic(transvection_matrix([1, 2, -3, 5], power=4), 0)

    def test_transvection_action(self):
        a1, b1 = basis_vector("a_1", 1, 5), basis_vector("b_1", 1, 5)
        t = transvection(a1)
        # x -> x + i(x, a_1) a_1 sends b_1 to b_1 - a_1
        assert act(t, b1).coords == (4, 1)
        assert act(t, a1) == a1

    def test_inverse(self):
        for m in enumerate_group(1, 3):
            assert (m @ inverse(m)).is_identity()

    def test_mixed_groups(self):
        with pytest.raises(InvalidInputError):
            identity(1, 3) @ identity(1, 5)

    def test_act_on_simplex(self):
        a1, a2 = canonical_lax(basis_vector("a_1", 2, 3)), canonical_lax(basis_vector("a_2", 2, 3))
        swap = SpElement(g=2, L=3, matrix=((0, 0, 1, 0), (0, 0, 0, 1), (1, 0, 0, 0), (0, 1, 0, 0)))
        simplex = tuple(sorted([a1, a2]))
        assert act(swap, simplex) == simplex
        assert act(swap, a1) == a2


class TestOrder:
    """Enumeration against the order formula and an exhaustive search."""

    @pytest.mark.parametrize(
        "g, modulus, expected",
        [(1, 2, 6), (1, 3, 24), (1, 4, 48), (2, 2, 720), (2, 3, 51840), (1, 6, 144)],
    )
    def test_formula(self, g, modulus, expected):
        assert group_order(g, modulus) == expected

    @pytest.mark.parametrize("g, modulus", [(1, 2), (1, 3), (1, 4), (2, 2)])
    def test_enumeration(self, g, modulus):
        elements = enumerate_group(g, modulus)
        assert len(elements) == group_order(g, modulus)
        assert elements[0].is_identity()
        assert len({m.matrix for m in elements}) == len(elements)

    def test_brute_force_agrees(self):
        brute = {m.matrix for m in brute_force_group(1, 3)}
        assert brute == {m.matrix for m in enumerate_group(1, 3)}

    def test_order_guard(self, monkeypatch):
        monkeypatch.setattr(settings.group, "max_order", 100)
        with pytest.raises(GroupTooLargeError):
            enumerate_group(2, 2)

    def test_exhaustive_guard(self, monkeypatch):
        monkeypatch.setattr(settings.group, "exhaustive_limit", 10)
        with pytest.raises(GroupTooLargeError):
            brute_force_group(1, 2)

    def test_generators_are_distinct(self):
        gens = transvection_generators(1, 3)
        assert len({t.matrix for t in gens}) == len(gens)
        assert not any(t.is_identity() for t in gens)


class TestOrbit:
    """Transitivity on lax vertices, with replayable witness words."""

    @pytest.mark.parametrize("g, modulus", [(1, 2), (1, 3), (2, 2), (2, 3)])
    def test_orbit_of_a1_is_every_vertex(self, g, modulus):
        gens = transvection_generators(g, modulus)
        certificate = orbit(canonical_lax(basis_vector("a_1", g, modulus)), gens)
        assert sorted(certificate.elements) == enumerate_lax_vertices(BasesSpec(g=g, L=modulus))
        assert certificate.verify(gens)

    def test_no_generators(self):
        a1 = canonical_lax(basis_vector("a_1", 2, 2))
        certificate = orbit(a1, [])
        assert certificate.elements == [a1]
        assert certificate.words == [[]]

    def test_tampered_certificate(self):
        gens = transvection_generators(1, 3)
        certificate = orbit(canonical_lax(basis_vector("a_1", 1, 3)), gens)
        certificate.words[-1] = []
        assert not certificate.verify(gens)


class TestRotations:
    """Stabilizers fixing simplices pointwise."""

    def test_full_group_swaps_a1_and_a2(self, bases_2_2):
        result = check_without_rotations(bases_2_2, enumerate_group(2, 2))
        assert not result.holds
        assert result.exhaustive
        simplex = result.witness_simplex
        image = [result.witness_element[v] for v in simplex]
        assert image != simplex
        assert sorted(image) == simplex

    def test_permutations_are_accepted(self, bases_2_2):
        result = check_without_rotations(bases_2_2, [{v: v for v in bases_2_2.vertices}])
        assert result.holds

    def test_level_kernel(self):
        kernel = level_kernel(1, 2, 2)
        assert len(kernel) == 8
        assert all(reduction_map(m, 2).is_identity() for m in kernel)

    def test_premises_on_level_kernel(self):
        X = build_bases(BasesSpec(g=1, L=4))
        premises = equivariant_premises(X, level_kernel(1, 2, 2))
        assert premises.rotations.holds
        assert premises.quotient_betti == [2]
        assert premises.edge_stabilizer_orders == []

    def test_level_kernel_genus_two(self):
        kernel = level_kernel(2, 2, 2)
        assert len(kernel) == group_order(2, 4) // group_order(2, 2) == 1024
        assert kernel[0].is_identity()
        assert all(reduction_map(m, 2).is_identity() for m in kernel)
        assert all(is_symplectic(m.matrix, 4) for m in kernel)

    def test_level_kernel_guard(self, monkeypatch):
        monkeypatch.setattr(settings.group, "exhaustive_limit", 100)
        with pytest.raises(GroupTooLargeError):
            level_kernel(2, 2, 2)

    def test_premises_on_genus_two_kernel(self):
        X = build_bases(BasesSpec(g=2, L=4))
        kernel = level_kernel(2, 2, 2)
        premises = equivariant_premises(X, kernel)
        assert premises.rotations.holds
        assert premises.rotations.exhaustive
        assert premises.rotations.checked == len(X.simplices(1)) * len(kernel)
        assert premises.quotient_betti[0] == 0
        # orbit sizes |G| / |G_e| add up to the edge count
        assert sum(len(kernel) // order for order in premises.edge_stabilizer_orders) == len(X.simplices(1))

    def test_premises_stop_at_a_rotation(self, bases_2_2):
        premises = equivariant_premises(bases_2_2, enumerate_group(2, 2))
        assert not premises.rotations.holds
        assert premises.quotient_betti is None


class TestReduction:
    """Reduction of levels and the quotient comparison."""

    def test_homomorphism(self, rng):
        gens = transvection_generators(1, 4)
        for _ in range(50):
            a, b = rng.choice(gens), rng.choice(gens)
            assert reduction_map(a @ b, 2) == reduction_map(a, 2) @ reduction_map(b, 2)

    def test_non_divisor(self):
        with pytest.raises(InvalidInputError):
            reduction_map(identity(1, 4), 3)

    def test_reduces_vectors(self):
        m = SpElement.from_array(np.array([[1, 2], [0, 1]]), 4)
        v = ZLVector.of([1, 1], 4)
        assert ZLVector.of(act(m, v).coords, 2) == act(reduction_map(m, 2), ZLVector.of(v.coords, 2))

    @pytest.mark.parametrize(
        "modulus, factor, kernel_order, orbits",
        [(2, 2, 8, 3), (3, 2, 6, 4), (2, 3, 24, 3)],
    )
    def test_level_quotient(self, modulus, factor, kernel_order, orbits):
        report = level_quotient(1, modulus, factor)
        assert report.isomorphic, report.witness
        assert report.kernel_order == kernel_order
        assert report.orbits == orbits
        assert report.target_vertices == orbits
