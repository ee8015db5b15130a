"""
Tests for bases_tools.bases_complex.
Focus: vertex counts, the simplex predicate, rank reduction and the connectivity certificates.
"""

import pytest
from pydantic import ValidationError

from bases_tools.bases_complex import (
    BasesComplex,
    BasesSpec,
    RhoChoice,
    SphereMap,
    StepBudgetExceededError,
    build_bases,
    canonical_rho,
    certify_move,
    check_nonempty,
    connect_vertices,
    connectivity_range,
    enumerate_lax_vertices,
    fill_loop,
    random_cycle,
    rank_reduction_coefficient,
    reduce_complex_level,
    reduce_vertex,
    rho_rank,
)
from bases_tools.errors import InvalidInputError
from bases_tools.simplicial import connected_components, reduced_betti
from bases_tools.zl_linalg import ZLVector, basis_vector, canonical_lax, lax_from_coords


def lax(symbol, g, modulus):
    return canonical_lax(basis_vector(symbol, g, modulus))


class TestBasesSpec:
    """Parameters of the complex."""

    def test_aliases(self):
        spec = BasesSpec(g=3, L=5, delta_k=1, restrict_W=True)
        assert spec.modulus == 5
        assert spec.restrict_w
        assert spec.top_dim == 1
        assert spec.is_complete

    def test_max_dim(self):
        spec = BasesSpec(g=3, L=2, max_dim=1)
        assert spec.top_dim == 1
        assert not spec.is_complete

    @pytest.mark.parametrize("fields", [{"g": 2, "L": 3, "delta_k": 3}, {"g": 2, "L": 0}, {"g": 0, "L": 2}])
    def test_invalid(self, fields):
        with pytest.raises(ValidationError):
            BasesSpec(**fields)

    def test_context(self):
        spec = BasesSpec(g=3, L=4, delta_k=2)
        assert [v.coords for v in spec.context] == [(1, 0, 0, 0, 0, 0), (0, 0, 1, 0, 0, 0)]

    def test_connectivity_range(self):
        assert list(connectivity_range(BasesSpec(g=3, L=2))) == [-1, 0, 1]
        assert list(connectivity_range(BasesSpec(g=3, L=2, delta_k=2))) == [-1]

    def test_rho_choice(self):
        assert canonical_rho(BasesSpec(g=3, L=2)).rho == "b_3"
        assert canonical_rho(BasesSpec(g=3, L=2, restrict_W=True)).rho == "a_3"
        assert RhoChoice(rho="b_2").index(3) == 3
        with pytest.raises(ValidationError):
            RhoChoice(rho="c_1")


class TestVertices:
    """Lax vertices against closed-form counts."""

    @pytest.mark.parametrize(
        "g, modulus, expected",
        [(1, 2, 3), (1, 3, 4), (1, 4, 6), (2, 2, 15), (2, 3, 40), (3, 2, 63)],
    )
    def test_counts(self, g, modulus, expected):
        assert len(enumerate_lax_vertices(BasesSpec(g=g, L=modulus))) == expected

    def test_sorted_and_canonical(self):
        vertices = enumerate_lax_vertices(BasesSpec(g=2, L=3))
        assert vertices == sorted(vertices)
        assert len(set(vertices)) == len(vertices)

    def test_link_of_a1(self):
        # v = (x, 0, y, z) with (y, z) != 0
        assert len(enumerate_lax_vertices(BasesSpec(g=2, L=2, delta_k=1))) == 6

    def test_restricted_to_w(self):
        vertices = enumerate_lax_vertices(BasesSpec(g=2, L=2, restrict_W=True))
        assert len(vertices) == 7
        assert all(v.coords[3] == 0 for v in vertices)

    def test_nonempty(self):
        assert check_nonempty(BasesSpec(g=2, L=2, delta_k=1))
        assert check_nonempty(BasesSpec(g=3, L=2, delta_k=1, restrict_W=True))
        assert not check_nonempty(BasesSpec(g=2, L=2, delta_k=2))


class TestSimplexPredicate:
    """Isotropic, free-summand simplices."""

    def test_isotropic_pair(self):
        complex_ = BasesComplex(BasesSpec(g=2, L=3))
        assert complex_.is_simplex([lax("a_1", 2, 3), lax("a_2", 2, 3)])
        assert complex_.is_simplex([lax("a_1", 2, 3), lax("b_2", 2, 3)])

    def test_symplectic_pair_is_not_isotropic(self):
        complex_ = BasesComplex(BasesSpec(g=2, L=3))
        assert not complex_.is_simplex([lax("a_1", 2, 3), lax("b_1", 2, 3)])

    def test_repeated_and_oversized(self):
        complex_ = BasesComplex(BasesSpec(g=2, L=3))
        a1, a2 = lax("a_1", 2, 3), lax("a_2", 2, 3)
        assert not complex_.is_simplex([a1, a1])
        assert not complex_.is_simplex([])
        assert not complex_.is_simplex([a1, a2, lax_from_coords([1, 0, 1, 0], 3)])

    def test_isotropic_but_not_a_summand(self):
        complex_ = BasesComplex(BasesSpec(g=2, L=4))
        assert not complex_.is_simplex([lax("a_1", 2, 4), lax_from_coords([1, 0, 2, 0], 4)])

    def test_image_simplex_allows_repeats(self):
        complex_ = BasesComplex(BasesSpec(g=2, L=3))
        a1, a2 = lax("a_1", 2, 3), lax("a_2", 2, 3)
        assert complex_.is_image_simplex([a1, a2, a1])

    def test_context_excludes_its_own_vertices(self):
        complex_ = BasesComplex(BasesSpec(g=2, L=3, delta_k=1))
        assert not complex_.is_vertex(lax("a_1", 2, 3))
        assert not complex_.is_vertex(lax("b_1", 2, 3))
        assert complex_.is_vertex(lax("a_2", 2, 3))

    def test_invalid_context(self):
        spec = BasesSpec(g=2, L=3)
        with pytest.raises(InvalidInputError):
            BasesComplex(spec, context=[basis_vector("a_1", 2, 3), basis_vector("b_1", 2, 3)])

    def test_negation_invariance(self, rng):
        spec = BasesSpec(g=2, L=5)
        complex_ = BasesComplex(spec)
        vertices = complex_.vertices
        for _ in range(300):
            x, y = rng.choice(vertices), rng.choice(vertices)
            expected = complex_.is_simplex([x, y])
            for a in x.representatives():
                for b in y.representatives():
                    assert complex_.is_simplex([canonical_lax(a), canonical_lax(b)]) == expected


class TestBuild:
    """Skeleton construction by clique extension."""

    def test_bases_2_2(self, bases_2_2):
        assert bases_2_2.f_vector == [15, 45]
        assert bases_2_2.skeleton_cap is None

    def test_bases_3_2(self, bases_3_2):
        assert bases_3_2.f_vector == [63, 945, 3780]

    def test_every_simplex_revalidates(self, bases_2_2, spec_2_2):
        complex_ = BasesComplex(spec_2_2)
        for s in bases_2_2:
            assert complex_.is_simplex(bases_2_2.label(v) for v in s)

    def test_capped_build(self):
        X = build_bases(BasesSpec(g=3, L=2, max_dim=1))
        assert X.f_vector == [63, 945]
        assert X.skeleton_cap == 1

    def test_link_complex(self):
        X = build_bases(BasesSpec(g=3, L=2, delta_k=1))
        assert X.dimension == 1
        assert len(connected_components(X)) == 1

    def test_link_complex_in_w(self):
        X = build_bases(BasesSpec(g=3, L=2, delta_k=1, restrict_W=True))
        assert not X.is_empty()
        assert len(connected_components(X)) == 1

    @pytest.mark.parametrize("g, modulus", [(2, 2), (2, 3)])
    def test_connected(self, g, modulus):
        X = build_bases(BasesSpec(g=g, L=modulus))
        assert reduced_betti(X, 0).reduced_betti == [0]

    @pytest.mark.slow
    def test_simply_connected_homologically(self, bases_3_2):
        assert reduced_betti(bases_3_2, 1).reduced_betti == [0, 0]

    def test_parallel_build_matches(self, spec_3_2, bases_3_2):
        assert build_bases(spec_3_2, workers=2) == bases_3_2


class TestRankReduction:
    """Euclidean division step on the rho-coordinate."""

    rho = RhoChoice(rho="b_1")

    @pytest.mark.parametrize(
        "modulus, big_r, c, expected",
        [(7, 3, 5, 6), (6, 2, 3, 5), (7, 3, 0, 0), (9, 4, 8, 7)],
    )
    def test_coefficient(self, modulus, big_r, c, expected):
        pivot = ZLVector(g=1, L=modulus, coords=(1, big_r))
        moved = ZLVector(g=1, L=modulus, coords=(0, c))
        q = rank_reduction_coefficient(moved, pivot, self.rho)
        assert q == expected
        assert rho_rank(moved + q * pivot, self.rho) < big_r

    def test_keep_reduced(self):
        pivot = ZLVector(g=1, L=7, coords=(1, 3))
        moved = ZLVector(g=1, L=7, coords=(0, 1))
        assert rank_reduction_coefficient(moved, pivot, self.rho, keep_reduced=True) == 0

    def test_zero_rank_pivot(self):
        pivot = ZLVector(g=1, L=7, coords=(1, 0))
        with pytest.raises(InvalidInputError):
            rank_reduction_coefficient(ZLVector(g=1, L=7, coords=(0, 1)), pivot, self.rho)

    def test_unnormalized_pivot(self):
        pivot = ZLVector(g=1, L=7, coords=(1, 4))
        with pytest.raises(InvalidInputError):
            rank_reduction_coefficient(ZLVector(g=1, L=7, coords=(0, 1)), pivot, self.rho)

    def test_rho_rank(self):
        assert rho_rank(ZLVector(g=1, L=7, coords=(0, 5)), self.rho) == 2
        assert rho_rank(ZLVector(g=1, L=8, coords=(0, 4)), self.rho) == 4

    @pytest.mark.parametrize("modulus", [2, 3, 4, 5, 6, 7, 8, 9])
    def test_random_edges(self, modulus, rng):
        spec = BasesSpec(g=2, L=modulus)
        complex_ = BasesComplex(spec)
        rho = canonical_rho(spec)
        candidates = [v for v in complex_.vertices if rho_rank(v, rho) > 0]
        checked = 0
        for _ in range(20):
            pivot = rng.choice(candidates)
            neighbors = complex_.neighbors(pivot)
            if not neighbors:
                continue
            result = reduce_vertex([pivot], rng.choice(neighbors), pivot, rho, complex_)
            assert rho_rank(result, rho) < rho_rank(pivot, rho)
            assert complex_.is_simplex([pivot, result])
            checked += 1
        assert checked > 0

    def test_pivot_outside_context(self):
        spec = BasesSpec(g=2, L=3)
        complex_ = BasesComplex(spec)
        with pytest.raises(InvalidInputError):
            reduce_vertex([lax("a_1", 2, 3)], lax("a_2", 2, 3), lax("b_2", 2, 3), canonical_rho(spec), complex_)

    def test_pivot_of_rank_two_over_z5(self):
        complex_ = BasesComplex(BasesSpec(g=2, L=5))
        rho = RhoChoice(rho="b_2")
        pivot = lax_from_coords([0, 0, 0, 3], 5)
        assert pivot.coords == (0, 0, 0, 2)
        assert rho_rank(pivot, rho) == 2
        # (1, 0, 0, 3) is normalized to (4, 0, 0, 2) and q = -1 takes it to -a_1
        assert reduce_vertex([pivot], lax_from_coords([1, 0, 0, 3], 5), pivot, rho, complex_) == lax("a_1", 2, 5)
        assert reduce_vertex([pivot], lax_from_coords([1, 0, 0, 2], 5), pivot, rho, complex_) == lax("a_1", 2, 5)
        for v_x in complex_.neighbors(pivot):
            result = reduce_vertex([pivot], v_x, pivot, rho, complex_)
            assert rho_rank(result, rho) < 2
            assert complex_.is_simplex([pivot, result])
            assert canonical_lax(result.rep) == result

    def test_rank_zero_vertex_is_unchanged(self):
        complex_ = BasesComplex(BasesSpec(g=2, L=5))
        pivot = lax_from_coords([0, 0, 0, 2], 5)
        a1 = lax("a_1", 2, 5)
        assert reduce_vertex([pivot], a1, pivot, RhoChoice(rho="b_2"), complex_) == a1


class TestConnect:
    """Edge paths between vertices by rank descent."""

    @pytest.mark.parametrize("g, modulus", [(2, 2), (2, 3)])
    def test_all_pairs(self, g, modulus):
        spec = BasesSpec(g=g, L=modulus)
        complex_ = BasesComplex(spec)
        vertices = complex_.vertices
        for i, u in enumerate(vertices):
            for w in vertices[i + 1 :]:
                path = connect_vertices(u, w, spec, complex_=complex_)
                assert path[0] == u
                assert path[-1] == w
                assert len(set(path)) == len(path)
                for x, y in zip(path, path[1:]):
                    assert complex_.is_simplex([x, y])

    def test_sampled_pairs_in_bases_3_2(self, spec_3_2, complex_3_2, rng):
        vertices = complex_3_2.vertices
        for _ in range(200):
            u, w = rng.sample(vertices, 2)
            path = connect_vertices(u, w, spec_3_2, complex_=complex_3_2)
            assert (path[0], path[-1]) == (u, w)

    def test_same_vertex(self):
        spec = BasesSpec(g=2, L=3)
        a1 = lax("a_1", 2, 3)
        assert connect_vertices(a1, a1, spec) == [a1]

    def test_link_in_w(self):
        spec = BasesSpec(g=3, L=2, delta_k=1, restrict_W=True)
        complex_ = BasesComplex(spec)
        u, w = complex_.vertices[0], complex_.vertices[-1]
        path = connect_vertices(u, w, spec, complex_=complex_)
        assert all(complex_.is_simplex([x, y]) for x, y in zip(path, path[1:]))

    def test_requires_codimension_two(self):
        spec = BasesSpec(g=2, L=3, delta_k=1)
        with pytest.raises(InvalidInputError):
            connect_vertices(lax("a_2", 2, 3), lax("b_2", 2, 3), spec)

    def test_not_a_vertex(self):
        spec = BasesSpec(g=3, L=3, delta_k=1)
        with pytest.raises(InvalidInputError):
            connect_vertices(lax("b_1", 3, 3), lax("a_2", 3, 3), spec)

    def test_budget(self):
        spec = BasesSpec(g=2, L=3)
        b2 = lax("b_2", 2, 3)
        other = lax_from_coords([0, 1, 0, 1], 3)
        with pytest.raises(StepBudgetExceededError):
            connect_vertices(b2, other, spec, budget=1)


class TestFill:
    """Contracting loops by certified moves."""

    def test_triangle_is_filled_at_once(self, spec_3_2, complex_3_2):
        loop = [lax("a_1", 3, 2), lax("a_2", 3, 2), lax("a_3", 3, 2)]
        result = fill_loop(SphereMap.cycle(loop), spec_3_2, complex_=complex_3_2)
        assert [m.kind for m in result.moves] == ["fill_simplex"]
        assert result.final == loop[0]

    def test_constant_loop_needs_no_moves(self, spec_3_2, complex_3_2):
        a1 = lax("a_1", 3, 2)
        result = fill_loop(SphereMap.cycle([a1, a1, a1]), spec_3_2, complex_=complex_3_2)
        assert result.moves == []
        assert result.final == a1
        assert result.steps == 0

    def test_random_cycles(self, spec_3_2, complex_3_2, rng):
        for _ in range(20):
            loop = random_cycle(spec_3_2, rng.randint(3, 8), rng, complex_=complex_3_2)
            result = fill_loop(SphereMap.cycle(loop), spec_3_2, complex_=complex_3_2)
            assert complex_3_2.is_vertex(result.final)
            for move in result.moves:
                certify_move(move, complex_3_2)

    @pytest.mark.slow
    def test_hundred_cycles(self, spec_3_2, complex_3_2, rng):
        for _ in range(100):
            loop = random_cycle(spec_3_2, rng.randint(3, 8), rng, complex_=complex_3_2)
            fill_loop(SphereMap.cycle(loop), spec_3_2, complex_=complex_3_2)

    def test_random_cycle_is_closed_walk(self, spec_3_2, complex_3_2, rng):
        loop = random_cycle(spec_3_2, 6, rng, complex_=complex_3_2)
        assert len(loop) == 6
        for x, y in zip(loop, loop[1:] + loop[:1]):
            assert complex_3_2.is_simplex([x, y])

    def test_requires_codimension_three(self):
        spec = BasesSpec(g=2, L=2)
        loop = [lax("a_1", 2, 2), lax("a_2", 2, 2), lax_from_coords([1, 0, 1, 0], 2)]
        with pytest.raises(InvalidInputError):
            fill_loop(SphereMap.cycle(loop), spec)

    def test_short_loop(self):
        with pytest.raises(InvalidInputError):
            SphereMap.cycle([lax("a_1", 3, 2), lax("a_2", 3, 2)])

    def test_non_simplicial_loop(self, spec_3_2):
        loop = [lax("a_1", 3, 2), lax("b_1", 3, 2), lax("a_2", 3, 2)]
        with pytest.raises(InvalidInputError):
            fill_loop(SphereMap.cycle(loop), spec_3_2)

    def test_loop_read_back(self):
        loop = [lax("a_1", 3, 2), lax("a_2", 3, 2), lax("a_3", 3, 2), lax("b_3", 3, 2)]
        assert SphereMap.cycle(loop).as_loop() == loop


class TestLevelReduction:
    """Coordinate reduction from a higher level onto Bases(g, L)."""

    def test_bases_2_4_onto_bases_2_2(self, bases_2_2):
        source = build_bases(BasesSpec(g=2, L=4))
        reduction = reduce_complex_level(source, bases_2_2, 2)
        assert reduction.injective_on_simplices
        assert reduction.surjective
        assert len(source.vertices) == 120
