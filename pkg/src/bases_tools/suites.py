"""
Verification suites. Every check names the oracle that backs its claim, and failures carry a witness.
"""

import random
import time
from collections.abc import Callable, Sequence
from itertools import combinations, product
from math import gcd, prod
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel
from sympy import factorint

from bases_tools.bases_complex import (
    BasesComplex,
    BasesSpec,
    SphereMap,
    canonical_rho,
    check_nonempty,
    connect_vertices,
    enumerate_lax_vertices,
    fill_loop,
    random_cycle,
    reduce_vertex,
    rho_rank,
)
from bases_tools.config import settings
from bases_tools.errors import CertificationError, InternalInvariantError
from bases_tools.heisenberg import (
    KContext,
    KElement,
    abelianization_image,
    coinvariants,
    k_commutator,
    k_embedding,
    k_identity,
    k_inverse,
    k_multiply,
)
from bases_tools.io import ComplexCache
from bases_tools.models import CheckOutcome, JobSpec
from bases_tools.simplicial import (
    GroupAction,
    boundary_of_simplex,
    cone,
    connected_components,
    cycle,
    disjoint_union,
    is_combinatorial_ball,
    is_combinatorial_sphere,
    quotient_without_rotations,
    reduced_betti,
    seven_vertex_torus,
)
from bases_tools.sp_group import (
    act,
    brute_force_group,
    enumerate_group,
    equivariant_premises,
    group_order,
    is_symplectic,
    level_kernel,
    orbit,
    reduction_map,
    transvection_generators,
)
from bases_tools.zl_linalg import (
    IntMatrix,
    ZLVector,
    basis_vector,
    canonical_lax,
    invariant_factors,
    is_primitive,
    minors_gcd,
    pairing,
    smith_normal_form,
    summand_rows,
)

log = structlog.get_logger()


class Verdict(BaseModel):
    ok: bool
    value: Any = None
    expected: Any = None
    witness: Any = None


class SkipCheck(Exception):
    """The check does not apply to this instance."""


def timed(name: str, oracle: str, fn: Callable[[], Verdict], dim: int | None = None) -> CheckOutcome:
    start = time.perf_counter()
    try:
        verdict = fn()
        status = "pass" if verdict.ok else "fail"
        fields = verdict.model_dump()
        fields.pop("ok")
    except SkipCheck as e:
        status, fields = "skip", {"witness": str(e)}
    except (CertificationError, InternalInvariantError) as e:
        status, fields = "fail", {"witness": str(e)}
    elapsed = (time.perf_counter() - start) * 1000
    outcome = CheckOutcome(check=name, status=status, oracle=oracle, dim=dim, elapsed_ms=elapsed, **fields)
    log.info("Check finished", check=name, status=status, elapsed_ms=round(elapsed, 1))
    return outcome


def primitive_count(g: int, modulus: int) -> int:
    """Number of primitive vectors of (Z_L)^{2g}."""
    count = 1
    for p, e in factorint(modulus).items():
        count *= p ** (2 * g * (e - 1)) * (p ** (2 * g) - 1)
    return count


def lax_vertex_count(g: int, modulus: int) -> int:
    # v = -v only happens for primitive v when L = 2
    count = primitive_count(g, modulus)
    return count if modulus == 2 else count // 2


def _random_vector(g: int, modulus: int, rng: random.Random) -> ZLVector:
    return ZLVector(g=g, modulus=modulus, coords=tuple(rng.randrange(modulus) for _ in range(2 * g)))


def _random_primitive(g: int, modulus: int, rng: random.Random) -> ZLVector:
    while True:
        v = _random_vector(g, modulus, rng)
        if is_primitive(v):
            return v


# linalg


def form_laws(g: int, modulus: int, rng: random.Random) -> Verdict:
    for _ in range(settings.verify.form_trials):
        x, y, z = (_random_vector(g, modulus, rng) for _ in range(3))
        c = rng.randrange(modulus)
        xy = pairing(x.coords, y.coords, modulus)
        laws = [
            xy == (-pairing(y.coords, x.coords, modulus)) % modulus,
            pairing(x.coords, x.coords, modulus) == 0,
            pairing((x + y).coords, z.coords, modulus)
            == (pairing(x.coords, z.coords, modulus) + pairing(y.coords, z.coords, modulus)) % modulus,
            pairing((c * x).coords, y.coords, modulus) == (c * xy) % modulus,
        ]
        if not all(laws):
            return Verdict(ok=False, witness={"x": x.coords, "y": y.coords, "z": z.coords, "c": c})
    return Verdict(ok=True, value=settings.verify.form_trials)


def non_unit_multiples(g: int, modulus: int) -> set[tuple[int, ...]]:
    """Every c * w in (Z_L)^{2g} with c a non-unit of Z_L."""
    module = list(product(range(modulus), repeat=2 * g))
    return {
        tuple(c * x % modulus for x in w) for c in range(modulus) if gcd(c, modulus) != 1 for w in module
    }


def primitive_oracle(g: int, modulus: int) -> Verdict:
    """A vector is primitive iff it is nonzero and no factorization v = c w has c a non-unit."""
    if modulus ** (2 * g + 1) > 10**6:
        raise SkipCheck(f"exhaustive search over {modulus ** (2 * g + 1)} factorizations is too large")
    multiples = non_unit_multiples(g, modulus)
    vectors = list(product(range(modulus), repeat=2 * g))
    for v in vectors:
        by_definition = any(v) and v not in multiples
        if by_definition != is_primitive(ZLVector(g=g, modulus=modulus, coords=v)):
            return Verdict(ok=False, witness=list(v))
    return Verdict(ok=True, value=len(vectors))


def _dot(x: Sequence[int], y: Sequence[int], modulus: int) -> int:
    return sum(a * b for a, b in zip(x, y)) % modulus


def complement_summand(rows: Sequence[Sequence[int]], modulus: int) -> bool:
    """
    Search (Z_L)^{2g} for a complement C with span(rows) + C = everything, span(rows) & C = 0
    and span(rows) free of rank k. Each complement is the kernel of a retraction r onto the
    span with r(rows[i]) = e_i, so the search runs over retractions one coordinate at a time.
    """
    k, n = len(rows), len(rows[0])
    module = list(product(range(modulus), repeat=n))
    retraction = []
    for i in range(k):
        target = [int(i == j) for j in range(k)]
        found = next((y for y in module if all(_dot(v, y, modulus) == t for v, t in zip(rows, target))), None)
        if found is None:
            return False
        retraction.append(found)
    span = {
        tuple(sum(c * v[j] for c, v in zip(cs, rows)) % modulus for j in range(n))
        for cs in product(range(modulus), repeat=k)
    }
    complement = [x for x in module if all(_dot(x, r, modulus) == 0 for r in retraction)]
    sums = {tuple((s + c) % modulus for s, c in zip(a, b)) for a in span for b in complement}
    return len(span) == modulus**k and len(span) * len(complement) == len(module) and len(sums) == len(module)


def summand_oracle(g: int, modulus: int, rng: random.Random) -> Verdict:
    """Summand test from the Smith form against an exhaustive complement search, on single vectors and pairs."""
    if modulus ** (2 * g) > 10**4:
        raise SkipCheck(f"complement search over {modulus ** (2 * g)} vectors is too large")
    vectors = list(product(range(modulus), repeat=2 * g))
    if len(vectors) ** 2 <= settings.verify.pair_sample:
        pairs = list(product(vectors, repeat=2))
    else:
        pairs = [(rng.choice(vectors), rng.choice(vectors)) for _ in range(settings.verify.pair_sample)]
    families = [[v] for v in vectors] + [list(pair) for pair in pairs]
    for rows in families:
        if summand_rows(rows, modulus) != complement_summand(rows, modulus):
            return Verdict(ok=False, witness=[list(v) for v in rows])
    return Verdict(ok=True, value=len(families))


def _divides_chain(diagonal: list[int]) -> bool:
    for a, b in zip(diagonal, diagonal[1:]):
        if a == 0 and b != 0 or a != 0 and b % a:
            return False
    return all(d >= 0 for d in diagonal)


def snf_invariants(rng: random.Random) -> Verdict:
    for _ in range(settings.verify.snf_trials):
        m, n = rng.randint(1, 6), rng.randint(1, 6)
        a = IntMatrix.from_rows([[rng.randint(-50, 50) for _ in range(n)] for _ in range(m)])
        u, d, v = smith_normal_form(a)
        diagonal = d.diagonal()
        r = min(m, n)
        ks = range(1, r + 1) if r <= 3 else (1, r)
        ok = (
            u @ a @ v == d
            and d.is_diagonal()
            and _divides_chain(diagonal)
            and abs(u.determinant()) == 1
            and abs(v.determinant()) == 1
            and all(prod(diagonal[:k]) == minors_gcd(a.entries, k) for k in ks)
            and diagonal == invariant_factors(a.entries)
        )
        if not ok:
            return Verdict(ok=False, witness=[list(row) for row in a.entries])
    return Verdict(ok=True, value=settings.verify.snf_trials)


def lax_negation(g: int, modulus: int, rng: random.Random) -> Verdict:
    for _ in range(settings.verify.form_trials):
        v = _random_primitive(g, modulus, rng)
        if canonical_lax(v) != canonical_lax(-v):
            return Verdict(ok=False, witness=list(v.coords))
    return Verdict(ok=True, value=settings.verify.form_trials)


def linalg_suite(job: JobSpec, rng: random.Random, cache: ComplexCache) -> list[CheckOutcome]:
    g, modulus = job.g, job.modulus
    return [
        timed("form_laws", "randomized alternation and bilinearity", lambda: form_laws(g, modulus, rng)),
        timed("primitive_oracle", "exhaustive factorization search", lambda: primitive_oracle(g, modulus)),
        timed("summand_oracle", "exhaustive complement search", lambda: summand_oracle(g, modulus, rng)),
        timed("snf_invariants", "minor gcds and sympy invariant factors", lambda: snf_invariants(rng)),
        timed("lax_negation", "canonical representative of v and -v", lambda: lax_negation(g, modulus, rng)),
    ]


# simplicial


def _betti_matches(X, up_to: int, expected: list[int]) -> Verdict:
    betti = reduced_betti(X, up_to).reduced_betti
    return Verdict(ok=betti == expected, value=betti, expected=expected)


def simplicial_suite(job: JobSpec, rng: random.Random, cache: ComplexCache) -> list[CheckOutcome]:
    checks = []
    for n in (1, 2, 3):
        checks.append(
            timed(
                "sphere_betti",
                "known homology of the boundary of a simplex",
                lambda n=n: _betti_matches(boundary_of_simplex(n), n, [0] * n + [1]),
                dim=n,
            )
        )
    two_circles = disjoint_union(boundary_of_simplex(1), boundary_of_simplex(1, offset=3))
    checks.append(timed("disjoint_union_betti", "known homology", lambda: _betti_matches(two_circles, 1, [1, 2])))
    torus = seven_vertex_torus()
    checks.append(timed("torus_betti", "known homology of the torus", lambda: _betti_matches(torus, 2, [0, 2, 1])))

    def euler() -> Verdict:
        betti = reduced_betti(torus, 2).reduced_betti
        alternating = sum((-1) ** i * b for i, b in enumerate(betti))
        return Verdict(ok=torus.euler_characteristic() - 1 == alternating, value=torus.euler_characteristic())

    checks.append(timed("euler_characteristic", "Euler-Poincare formula", euler))

    def recognition() -> Verdict:
        results = {
            "tetrahedron_boundary_is_sphere": is_combinatorial_sphere(boundary_of_simplex(2), 2),
            "hexagon_cone_is_ball": is_combinatorial_ball(cone(cycle(6), 6), 2),
            "torus_is_not_sphere": not is_combinatorial_sphere(torus, 2),
        }
        return Verdict(ok=all(results.values()), value=results)

    checks.append(timed("sphere_recognition", "link conditions and Euler characteristic", recognition))

    def quotient() -> Verdict:
        rotation = {i: (i + 3) % 6 for i in range(6)}
        Q = quotient_without_rotations(cycle(6), GroupAction(generators=[rotation]))
        return Verdict(ok=is_combinatorial_sphere(Q, 1) and len(Q.vertices) == 3, value=Q.f_vector, expected=[3, 3])

    checks.append(timed("hexagon_quotient", "orbit map of a free action", quotient))
    return checks


# bases


def vertex_count(spec: BasesSpec) -> Verdict:
    count = len(enumerate_lax_vertices(spec))
    if spec.delta_k or spec.restrict_w:
        return Verdict(ok=True, value=count)
    expected = lax_vertex_count(spec.g, spec.modulus)
    return Verdict(ok=count == expected, value=count, expected=expected)


def revalidate(X, spec: BasesSpec) -> Verdict:
    complex_ = BasesComplex(spec)
    X.validate()
    for s in X:
        if not complex_.is_simplex(X.label(v) for v in s):
            return Verdict(ok=False, witness=[str(X.label(v)) for v in s])
    return Verdict(ok=True, value=X.f_vector)


def negation_invariance(spec: BasesSpec, rng: random.Random) -> Verdict:
    vertices = enumerate_lax_vertices(spec)
    if not vertices:
        raise SkipCheck("complex has no vertices")
    rho = canonical_rho(spec)
    modulus = spec.modulus
    for _ in range(min(settings.verify.form_trials, 2000)):
        x, y = rng.choice(vertices), rng.choice(vertices)
        results = set()
        for a, b in product(x.representatives(), y.representatives()):
            results.add((pairing(a.coords, b.coords, modulus) == 0, summand_rows([a.coords, b.coords], modulus)))
        if len(results) != 1 or rho_rank(x.rep, rho) != rho_rank(-x.rep, rho):
            return Verdict(ok=False, witness=[str(x), str(y)])
    return Verdict(ok=True)


def betti_checks(X, spec: BasesSpec) -> list[CheckOutcome]:
    claimed = spec.g - spec.delta_k - 2
    cap = X.skeleton_cap if X.skeleton_cap is not None else X.dimension + 1
    up_to = min(claimed, cap - 1)
    if up_to < 0:
        return [timed("reduced_betti", "exact rational rank", lambda: _skip("no vanishing claimed below dimension 0"))]
    betti = reduced_betti(X, up_to).reduced_betti
    checks = [
        timed(
            "reduced_betti",
            "exact rational rank",
            lambda i=i: Verdict(ok=betti[i] == 0, value=betti[i], expected=0),
            dim=i,
        )
        for i in range(up_to + 1)
    ]
    components = len(connected_components(X))
    checks.append(
        timed(
            "components",
            "union-find",
            lambda: Verdict(ok=components - 1 == betti[0], value=components, expected=betti[0] + 1),
        )
    )
    return checks


def _skip(reason: str) -> Verdict:
    raise SkipCheck(reason)


def rank_reduction(spec: BasesSpec, X, rng: random.Random) -> Verdict:
    edges = X.simplices(1)
    if not edges:
        raise SkipCheck("complex has no edges")
    complex_ = BasesComplex(spec)
    rho = canonical_rho(spec)
    done = 0
    for _ in range(10 * settings.verify.reduction_trials):
        if done == settings.verify.reduction_trials:
            break
        ids = list(rng.choice(edges))
        rng.shuffle(ids)
        pivot, moved = X.label(ids[0]), X.label(ids[1])
        big_r = rho_rank(pivot, rho)
        if big_r == 0:
            continue
        done += 1
        result = reduce_vertex([pivot], moved, pivot, rho, complex_)
        if rho_rank(result, rho) >= big_r or not complex_.is_simplex([pivot, result]):
            return Verdict(ok=False, witness={"pivot": str(pivot), "moved": str(moved), "result": str(result)})
    if done == 0:
        raise SkipCheck("no edge has a pivot of positive rank")
    return Verdict(ok=True, value=done)


def connect_pairs(spec: BasesSpec, X, rng: random.Random, budget: int | None = None) -> Verdict:
    if spec.g - spec.delta_k < 2:
        raise SkipCheck("0-connectivity is only claimed for g - k >= 2")
    complex_ = BasesComplex(spec)
    vertices = complex_.vertices
    pairs = list(combinations(vertices, 2))
    if len(pairs) > settings.verify.pair_sample:
        pairs = [tuple(rng.sample(vertices, 2)) for _ in range(settings.verify.pair_sample)]
    for u, w in pairs:
        path = connect_vertices(u, w, spec, budget=budget, complex_=complex_)
        if path[0] != u or path[-1] != w:
            return Verdict(ok=False, witness=[str(u), str(w)])
    single = len(connected_components(X)) == 1
    return Verdict(ok=single, value=len(pairs), expected=len(pairs), witness=None if single else "BFS disagrees")


def fill_cycles(spec: BasesSpec, rng: random.Random, budget: int | None = None) -> Verdict:
    if spec.g - spec.delta_k < 3:
        raise SkipCheck("1-connectivity is only claimed for g - k >= 3")
    complex_ = BasesComplex(spec)
    moves = 0
    for _ in range(settings.verify.fill_cycles):
        length = rng.randint(3, settings.verify.max_cycle_length)
        loop = random_cycle(spec, length, rng, complex_=complex_)
        result = fill_loop(SphereMap.cycle(loop), spec, budget=budget, complex_=complex_)
        moves += len(result.moves)
    return Verdict(ok=True, value=moves)


def bases_suite(job: JobSpec, rng: random.Random, cache: ComplexCache) -> list[CheckOutcome]:
    spec = job.bases_spec()
    X = cache.get_or_build(spec)
    checks = [
        timed("vertex_count", "closed-form count of primitive vectors", lambda: vertex_count(spec)),
        timed("revalidate", "simplex predicate on every simplex", lambda: revalidate(X, spec)),
        timed(
            "nonempty",
            "vertex enumeration",
            lambda: Verdict(ok=check_nonempty(spec) == (spec.delta_k < spec.g), value=len(X.vertices)),
        ),
        timed("negation_invariance", "both representatives of each pair", lambda: negation_invariance(spec, rng)),
    ]
    checks += betti_checks(X, spec)
    checks += [
        timed("rank_reduction", "rank recomputation and simplex predicate", lambda: rank_reduction(spec, X, rng)),
        timed(
            "connect",
            "edge-by-edge simplex predicate and BFS components",
            lambda: connect_pairs(spec, X, rng, job.budget),
        ),
        timed("fill", "certified moves ending at a constant loop", lambda: fill_cycles(spec, rng, job.budget)),
    ]
    return checks


# sp


def _group_or_skip(g: int, modulus: int):
    if group_order(g, modulus) > settings.group.max_order:
        raise SkipCheck(f"|Sp| = {group_order(g, modulus)} exceeds the order guard")
    return enumerate_group(g, modulus)


def order_check(g: int, modulus: int) -> Verdict:
    elements = _group_or_skip(g, modulus)
    expected = group_order(g, modulus)
    value = {"closure": len(elements)}
    ok = len(elements) == expected
    if modulus ** (4 * g * g) <= settings.group.exhaustive_limit:
        brute = brute_force_group(g, modulus)
        value["brute_force"] = len(brute)
        ok = ok and {m.matrix for m in brute} == {m.matrix for m in elements}
    return Verdict(ok=ok, value=value, expected=expected)


def symplectic_check(g: int, modulus: int) -> Verdict:
    elements = _group_or_skip(g, modulus)
    bad = next((m for m in elements if not is_symplectic(m.matrix, modulus)), None)
    return Verdict(ok=bad is None, value=len(elements), witness=None if bad is None else bad.matrix)


def form_preservation(g: int, modulus: int, rng: random.Random) -> Verdict:
    gens = transvection_generators(g, modulus)
    if not gens:
        raise SkipCheck("no transvections")
    for _ in range(min(settings.verify.form_trials, 2000)):
        m = rng.choice(gens)
        for _ in range(rng.randint(0, 3)):
            m = m @ rng.choice(gens)
        x, y = _random_vector(g, modulus, rng), _random_vector(g, modulus, rng)
        if pairing(act(m, x).coords, act(m, y).coords, modulus) != pairing(x.coords, y.coords, modulus):
            return Verdict(ok=False, witness={"matrix": m.matrix, "x": x.coords, "y": y.coords})
    return Verdict(ok=True)


def transitivity(g: int, modulus: int) -> Verdict:
    gens = transvection_generators(g, modulus)
    base = canonical_lax(basis_vector("a_1", g, modulus))
    certificate = orbit(base, gens)
    expected = enumerate_lax_vertices(BasesSpec(g=g, modulus=modulus))
    ok = set(certificate.elements) == set(expected) and certificate.verify(gens)
    missing = sorted(set(expected) - set(certificate.elements))
    return Verdict(
        ok=ok,
        value=len(certificate.elements),
        expected=len(expected),
        witness=str(missing[0]) if missing else None,
    )


def rotation_check(g: int, modulus: int, factor: int, cache: ComplexCache, seed: int) -> Verdict:
    """
    The level-L kernel of Sp(Z_{L m}) -> Sp(Z_L) acting on Bases(g, L m). The full group is not
    checked: for g >= 2 it swaps a_1 and a_2 and so reverses the edge between them.
    """
    level = modulus * factor
    kernel_order = group_order(g, level) // group_order(g, modulus)
    if kernel_order > settings.group.action_limit or factor ** (4 * g * g) > settings.group.exhaustive_limit:
        raise SkipCheck(f"the level kernel of order {kernel_order} at level {level} exceeds the action limits")
    elements = level_kernel(g, modulus, factor)
    X = cache.get_or_build(BasesSpec(g=g, modulus=level))
    premises = equivariant_premises(X, elements, seed=seed)
    result = premises.rotations
    if not result.holds:
        return Verdict(ok=False, witness={"simplex": result.witness_simplex, "element": result.witness_element})
    value = {
        "checked": result.checked,
        "exhaustive": result.exhaustive,
        "quotient_betti": premises.quotient_betti,
        "edge_stabilizer_orders": premises.edge_stabilizer_orders,
    }
    return Verdict(ok=True, value=value)


def reduction_homomorphism(g: int, modulus: int, rng: random.Random) -> Verdict:
    primes = sorted(factorint(modulus))
    if primes == [modulus]:
        raise SkipCheck("L is prime, there is no intermediate level")
    target = primes[0]
    gens = transvection_generators(g, modulus)
    for _ in range(min(settings.verify.snf_trials, 1000)):
        a, b = rng.choice(gens) @ rng.choice(gens), rng.choice(gens)
        if reduction_map(a @ b, target) != reduction_map(a, target) @ reduction_map(b, target):
            return Verdict(ok=False, witness={"a": a.matrix, "b": b.matrix})
    return Verdict(ok=True, value=target)


def sp_suite(job: JobSpec, rng: random.Random, cache: ComplexCache) -> list[CheckOutcome]:
    g, modulus = job.g, job.modulus
    return [
        timed("group_order", "order formula and brute-force enumeration", lambda: order_check(g, modulus)),
        timed("symplectic", "M^T J M = J on every element", lambda: symplectic_check(g, modulus)),
        timed("form_preservation", "randomized pairing comparison", lambda: form_preservation(g, modulus, rng)),
        timed("transitivity", "orbit BFS with replayed witness words", lambda: transitivity(g, modulus)),
        timed(
            "without_rotations",
            "stabilizer check under the level kernel",
            lambda: rotation_check(g, modulus, job.factor, cache, job.seed),
        ),
        timed("reduction_homomorphism", "randomized products", lambda: reduction_homomorphism(g, modulus, rng)),
    ]


# heisenberg


def _random_k(ctx: KContext, rng: random.Random, bound: int = 5) -> KElement:
    return KElement(n=rng.randint(-20, 20), w=tuple(rng.randint(-bound, bound) for _ in range(ctx.dimension)))


def group_laws(ctx: KContext, rng: random.Random) -> Verdict:
    e = k_identity(ctx)
    for _ in range(settings.verify.commutator_trials):
        x, y, z = (_random_k(ctx, rng) for _ in range(3))
        laws = [
            k_multiply(k_multiply(x, y, ctx), z, ctx) == k_multiply(x, k_multiply(y, z, ctx), ctx),
            k_multiply(x, e, ctx) == x == k_multiply(e, x, ctx),
            k_multiply(x, k_inverse(x, ctx), ctx) == e == k_multiply(k_inverse(x, ctx), x, ctx),
        ]
        if not all(laws):
            return Verdict(ok=False, witness={"x": x.model_dump(), "y": y.model_dump(), "z": z.model_dump()})
    return Verdict(ok=True, value=settings.verify.commutator_trials)


def commutator_identity(ctx: KContext, rng: random.Random) -> Verdict:
    for _ in range(settings.verify.commutator_trials):
        x, y = (KElement(n=0, w=_random_k(ctx, rng).w) for _ in range(2))
        expected = KElement(n=2 * ctx.form(x.w, y.w), w=(0,) * ctx.dimension)
        if k_commutator(x, y, ctx) != expected:
            return Verdict(ok=False, witness={"w1": x.w, "w2": y.w})
    return Verdict(ok=True, value=settings.verify.commutator_trials)


def abelianization_laws(ctx: KContext, rng: random.Random) -> Verdict:
    for _ in range(min(settings.verify.commutator_trials, 2000)):
        x, y = _random_k(ctx, rng), _random_k(ctx, rng)
        image = abelianization_image(k_multiply(x, y, ctx), ctx)
        summed = tuple(a + b for a, b in zip(abelianization_image(x, ctx), abelianization_image(y, ctx)))
        conjugate = k_multiply(k_multiply(y, x, ctx), k_inverse(y, ctx), ctx)
        if image != summed or abelianization_image(conjugate, ctx) != abelianization_image(x, ctx):
            return Verdict(ok=False, witness={"x": x.model_dump(), "y": y.model_dump()})
    return Verdict(ok=True)


def embedding_homomorphism(ctx: KContext, rng: random.Random) -> Verdict:
    for _ in range(200):
        x, y = _random_k(ctx, rng, bound=3), _random_k(ctx, rng, bound=3)
        product_matrix = k_embedding(k_multiply(x, y, ctx), ctx)
        if not np.array_equal(product_matrix, k_embedding(x, ctx) @ k_embedding(y, ctx)) or not is_symplectic(
            product_matrix, 0
        ):
            return Verdict(ok=False, witness={"x": x.model_dump(), "y": y.model_dump()})
    return Verdict(ok=True)


def coinvariant_check(ctx: KContext, modulus: int) -> Verdict:
    report = coinvariants(ctx, modulus)
    return Verdict(
        ok=report.status == "proved_zero",
        value=report.dimension,
        expected=0,
        witness=None if report.dimension == 0 else f"not reached with {report.generators} generators",
    )


def heisenberg_suite(job: JobSpec, rng: random.Random, cache: ComplexCache) -> list[CheckOutcome]:
    k = max(job.delta_k, 1)
    if k >= job.g:
        return [timed("heisenberg", "context check", lambda: _skip(f"k = {k} leaves no symplectic part in V''"))]
    ctx = KContext(g=job.g, k=k)
    return [
        timed("group_laws", "randomized associativity, identity and inverse", lambda: group_laws(ctx, rng)),
        timed("commutator_identity", "[(0,w1),(0,w2)] = (2 i(w1,w2), 0)", lambda: commutator_identity(ctx, rng)),
        timed("abelianization", "homomorphism and conjugation invariance", lambda: abelianization_laws(ctx, rng)),
        timed("embedding", "matrix products of psi_v", lambda: embedding_homomorphism(ctx, rng)),
        timed(
            "coinvariants",
            "exact rational rank of displacement vectors",
            lambda: coinvariant_check(ctx, job.modulus),
        ),
    ]


SUITES: dict[str, Callable[[JobSpec, random.Random, ComplexCache], list[CheckOutcome]]] = {
    "linalg": linalg_suite,
    "simplicial": simplicial_suite,
    "bases": bases_suite,
    "sp": sp_suite,
    "heisenberg": heisenberg_suite,
}


def run_suite(job: JobSpec, rng: random.Random, cache: ComplexCache) -> list[CheckOutcome]:
    names = list(SUITES) if job.suite == "all" else [job.suite]
    checks = []
    for name in names:
        log.info("Running suite", suite=name, g=job.g, L=job.modulus)
        checks += SUITES[name](job, rng, cache)
    return checks
