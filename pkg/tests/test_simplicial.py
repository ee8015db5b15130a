"""
Tests for bases_tools.simplicial.
Focus: exact homology on complexes with known Betti numbers, low-dimensional recognition and quotients.
"""

from collections import defaultdict

import pytest

from bases_tools.errors import BudgetExceededError, InvalidInputError
from bases_tools.simplicial import (
    GroupAction,
    IncompleteSkeletonError,
    NonSimplicialQuotientError,
    NotDownwardClosedError,
    RotationViolationError,
    SimplicialComplex,
    UnsupportedDimensionError,
    boundary_of_simplex,
    combinatorial_boundary,
    cone,
    connected_components,
    cycle,
    disjoint_union,
    find_rotation,
    generating_subset,
    group_closure,
    is_combinatorial_ball,
    is_combinatorial_manifold,
    is_combinatorial_sphere,
    link,
    modular_rank,
    quotient_without_rotations,
    rational_rank,
    reduced_betti,
    seven_vertex_torus,
    star,
)
from bases_tools.zl_linalg import invariant_factors


def random_complex(rng, max_vertices=12):
    n = rng.randint(3, max_vertices)
    facets = [rng.sample(range(n), rng.randint(1, min(n, 4))) for _ in range(rng.randint(2, 10))]
    return SimplicialComplex(facets, close=True)


def integer_rank(X, d):
    """Rank of the d-th boundary map, counted from its integer invariant factors."""
    rows, cols = X.simplices(d - 1), X.simplices(d)
    if not rows or not cols:
        return 0
    index = {s: i for i, s in enumerate(rows)}
    dense = [[0] * len(cols) for _ in rows]
    for j, s in enumerate(cols):
        for i in range(len(s)):
            dense[index[s[:i] + s[i + 1 :]]][j] = (-1) ** i
    return sum(1 for factor in invariant_factors(dense) if factor)


class TestSimplicialComplex:
    """Construction, closure and basic counts."""

    def test_closure(self):
        X = SimplicialComplex([(0, 1, 2)], close=True)
        assert X.f_vector == [3, 3, 1]
        assert X.dimension == 2
        assert (2, 0) in X
        assert (0, 3) not in X

    def test_not_downward_closed(self):
        with pytest.raises(NotDownwardClosedError):
            SimplicialComplex([(0,), (0, 1)])

    def test_empty(self):
        X = SimplicialComplex([])
        assert X.is_empty()
        assert X.dimension == -1
        assert X.f_vector == []
        assert reduced_betti(X, 0).reduced_betti == [0]

    def test_labels(self):
        X = SimplicialComplex([(0, 1)], labels={0: "x", 1: "y"}, close=True)
        assert X.label(1) == "y"
        assert X.vertex_for("x") == 0
        with pytest.raises(InvalidInputError):
            X.vertex_for("z")

    def test_skeleton(self):
        X = boundary_of_simplex(2)
        one = X.skeleton(1)
        assert one.f_vector == [4, 6]
        assert one.skeleton_cap == 1

    def test_boundary_squares_to_zero(self):
        X = SimplicialComplex([(0, 1, 2, 3)], close=True)
        d2, (rows2, cols2) = X.boundary_matrix(2)
        d1, (rows1, _) = X.boundary_matrix(1)
        for col in range(cols2):
            composed = defaultdict(int)
            for mid, entries in d2.items():
                if col in entries:
                    for row, entries1 in d1.items():
                        composed[row] += entries1.get(mid, 0) * entries[col]
            assert not any(composed.values())
        assert rows2 == len(X.simplices(1))
        assert rows1 == len(X.simplices(0))

    def test_euler_characteristic(self):
        assert boundary_of_simplex(2).euler_characteristic() == 2
        assert seven_vertex_torus().euler_characteristic() == 0


class TestStarLink:
    """Stars and links of simplices."""

    def test_link_of_vertex_in_sphere(self):
        lk = link(boundary_of_simplex(2), (0,))
        assert lk.f_vector == [3, 3]
        assert is_combinatorial_sphere(lk, 1)

    def test_star_of_vertex(self):
        st = star(boundary_of_simplex(2), (0,))
        assert st.f_vector == [4, 6, 3]

    def test_empty_simplex(self):
        X = cycle(5)
        assert star(X) is X
        assert link(X) is X

    def test_not_a_simplex(self):
        with pytest.raises(InvalidInputError):
            link(cycle(5), (0, 2))

    def test_link_cap(self):
        X = SimplicialComplex([(0, 1, 2)], skeleton_cap=2, close=True)
        assert link(X, (0,)).skeleton_cap == 1

    def test_link_inside_star(self, rng):
        for _ in range(20):
            X = random_complex(rng)
            for delta in X:
                lk, st = set(link(X, delta)), set(star(X, delta))
                assert lk <= st
                assert not any(set(delta) & set(s) for s in lk)


class TestHomology:
    """Exact reduced Betti numbers against known values."""

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_spheres(self, n):
        assert reduced_betti(boundary_of_simplex(n), n).reduced_betti == [0] * n + [1]

    def test_disjoint_union(self):
        X = disjoint_union(boundary_of_simplex(1), boundary_of_simplex(1, offset=3))
        assert reduced_betti(X, 1).reduced_betti == [1, 2]
        assert len(connected_components(X)) == 2

    def test_torus(self):
        assert reduced_betti(seven_vertex_torus(), 2).reduced_betti == [0, 2, 1]

    def test_contractible(self):
        assert reduced_betti(cone(cycle(6), 6), 2).reduced_betti == [0, 0, 0]

    def test_random_complexes_against_integer_ranks(self, rng):
        for _ in range(30):
            X = random_complex(rng)
            up_to = X.dimension
            ranks = [1] + [integer_rank(X, d) for d in range(1, up_to + 2)]
            f = X.f_vector
            expected = [f[i] - ranks[i] - ranks[i + 1] for i in range(up_to + 1)]
            assert reduced_betti(X, up_to).reduced_betti == expected, f

    def test_incomplete_skeleton(self):
        X = boundary_of_simplex(2).skeleton(1)
        assert reduced_betti(X, 0).reduced_betti == [0]
        with pytest.raises(IncompleteSkeletonError):
            reduced_betti(X, 1)

    def test_negative_degree(self):
        with pytest.raises(InvalidInputError):
            reduced_betti(cycle(4), -1)

    def test_modular_rank_bounds_rational_rank(self):
        matrix, shape = seven_vertex_torus().boundary_matrix(2)
        rank = rational_rank(matrix, shape)
        assert modular_rank(matrix, shape, 2) <= rank
        assert modular_rank(matrix, shape, 32003) == rank

    def test_betti_agrees_with_components(self):
        X = disjoint_union(cycle(3), SimplicialComplex([(3, 4), (4, 5)], close=True))
        assert reduced_betti(X, 0).reduced_betti[0] + 1 == len(connected_components(X))


class TestRecognition:
    """Combinatorial spheres, balls and manifolds up to dimension 2."""

    def test_spheres(self):
        assert is_combinatorial_sphere(boundary_of_simplex(0), 0)
        assert is_combinatorial_sphere(cycle(5), 1)
        assert is_combinatorial_sphere(boundary_of_simplex(2), 2)
        assert is_combinatorial_sphere(SimplicialComplex([]), -1)

    def test_not_spheres(self):
        assert not is_combinatorial_sphere(seven_vertex_torus(), 2)
        assert not is_combinatorial_sphere(disjoint_union(cycle(3), boundary_of_simplex(1, offset=3)), 1)
        assert not is_combinatorial_sphere(SimplicialComplex([(0, 1), (1, 2)], close=True), 1)

    def test_balls(self):
        assert is_combinatorial_ball(SimplicialComplex([(0,)]), 0)
        assert is_combinatorial_ball(SimplicialComplex([(0, 1), (1, 2)], close=True), 1)
        assert is_combinatorial_ball(cone(cycle(6), 6), 2)
        assert not is_combinatorial_ball(cycle(4), 1)
        assert not is_combinatorial_ball(boundary_of_simplex(2), 2)

    def test_boundary_of_disk(self):
        disk = cone(cycle(6), 6)
        boundary = combinatorial_boundary(disk, 2)
        assert boundary.f_vector == [6, 6]
        assert is_combinatorial_sphere(boundary, 1)

    def test_manifolds(self):
        assert is_combinatorial_manifold(seven_vertex_torus(), 2)
        assert is_combinatorial_manifold(cone(cycle(6), 6), 2)
        bowtie = SimplicialComplex([(0, 1, 2), (0, 3, 4)], close=True)
        assert not is_combinatorial_manifold(bowtie, 2)

    def test_unsupported_dimension(self):
        with pytest.raises(UnsupportedDimensionError):
            is_combinatorial_sphere(boundary_of_simplex(3), 3)


class TestQuotient:
    """Quotients by finite actions without rotations."""

    def test_free_action_on_two_edges(self):
        X = SimplicialComplex([(0, 1), (2, 3)], close=True)
        Q = quotient_without_rotations(X, GroupAction(generators=[{0: 2, 1: 3, 2: 0, 3: 1}]))
        assert Q.f_vector == [2, 1]
        assert sorted(Q.labels.values()) == [(0, 2), (1, 3)]

    def test_hexagon_half_turn(self):
        half_turn = {i: (i + 3) % 6 for i in range(6)}
        Q = quotient_without_rotations(cycle(6), GroupAction(generators=[half_turn]))
        assert Q.f_vector == [3, 3]
        assert is_combinatorial_sphere(Q, 1)

    def test_trivial_action(self):
        X = boundary_of_simplex(2)
        Q = quotient_without_rotations(X, GroupAction(generators=[]))
        assert Q.f_vector == X.f_vector

    def test_edge_flip_is_a_rotation(self):
        X = SimplicialComplex([(1, 2)], close=True)
        with pytest.raises(RotationViolationError) as info:
            quotient_without_rotations(X, GroupAction(generators=[{1: 2, 2: 1}]))
        assert info.value.simplex == (1, 2)

    def test_square_reflection_is_a_rotation(self):
        reflection = {0: 1, 1: 0, 2: 3, 3: 2}
        assert find_rotation(cycle(4), [reflection]) is not None
        with pytest.raises(RotationViolationError):
            quotient_without_rotations(cycle(4), GroupAction(generators=[reflection]))

    def test_collapsing_edge(self):
        quarter_turn = {i: (i + 1) % 4 for i in range(4)}
        with pytest.raises(NonSimplicialQuotientError):
            quotient_without_rotations(cycle(4), GroupAction(generators=[quarter_turn]))

    def test_distinct_orbits_share_an_image(self):
        third_turn = {i: (i + 2) % 6 for i in range(6)}
        with pytest.raises(NonSimplicialQuotientError):
            quotient_without_rotations(cycle(6), GroupAction(generators=[third_turn]))

    def test_group_closure(self):
        turn = {i: (i + 1) % 6 for i in range(6)}
        elements = group_closure([turn], range(6))
        assert len(elements) == 6
        assert elements[0] == {i: i for i in range(6)}

    def test_generating_subset(self):
        turn = {i: (i + 1) % 6 for i in range(6)}
        elements = group_closure([turn], range(6))
        gens = generating_subset(elements[1:], range(6))
        assert len(gens) == 1
        assert len(group_closure(gens, range(6))) == 6

    def test_group_closure_limit(self):
        turn = {i: (i + 1) % 6 for i in range(6)}
        with pytest.raises(BudgetExceededError):
            group_closure([turn], range(6), limit=3)

    def test_not_a_permutation(self):
        with pytest.raises(ValueError):
            GroupAction(generators=[{0: 1, 1: 1}])

    def test_not_simplicial(self):
        with pytest.raises(InvalidInputError):
            GroupAction(generators=[{0: 0, 1: 2, 2: 1, 3: 3}]).check_simplicial(cycle(4))
