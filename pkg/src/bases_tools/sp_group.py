"""
Sp_{2g}(Z_L) acting on column vectors from the left, generated by transvections.
"""

import random
from collections import deque
from collections.abc import Mapping, Sequence
from itertools import product
from typing import Self

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator
from sympy import factorint

from bases_tools.bases_complex import BasesSpec, build_bases
from bases_tools.config import settings
from bases_tools.errors import BudgetExceededError, CertificationError, InvalidInputError
from bases_tools.simplicial import (
    GroupAction,
    Simplex,
    SimplicialComplex,
    find_rotation,
    generating_subset,
    quotient_without_rotations,
    reduced_betti,
)
from bases_tools.zl_linalg import LaxVector, Modulus, ZLVector, canonical_lax, form_matrix

log = structlog.get_logger()

Point = LaxVector | tuple[LaxVector, ...]


class GroupTooLargeError(BudgetExceededError):
    """
    Raised when an enumeration would exceed the configured order guard.
    """


def _as_array(matrix: Sequence[Sequence[int]] | np.ndarray) -> np.ndarray:
    array = np.asarray(matrix, dtype=np.int64)
    if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] % 2:
        raise InvalidInputError(f"expected a square 2g x 2g matrix, got shape {array.shape}")
    return array


def is_symplectic(matrix: Sequence[Sequence[int]] | np.ndarray, modulus: int) -> bool:
    """
    True iff M^T J M = J mod L (exactly, over the integers, when L = 0).

    Raises:
        InvalidInputError: when the matrix is not square of even size
    """
    m = _as_array(matrix)
    j = np.array(form_matrix(m.shape[0] // 2), dtype=np.int64)
    lhs = m.T @ j @ m
    if modulus:
        return bool(np.array_equal(lhs % modulus, j % modulus))
    return bool(np.array_equal(lhs, j))


class SpElement(BaseModel):
    """A symplectic matrix over Z_L, entries reduced into [0, L)."""

    model_config = ConfigDict(frozen=True, validate_by_name=True, validate_by_alias=True)

    g: int = Field(gt=0)
    modulus: Modulus = Field(alias="L")
    matrix: tuple[tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_matrix(self) -> Self:
        if self.modulus == 0:
            raise ValueError("only finite levels are enumerated, pick L >= 2")
        n = 2 * self.g
        if len(self.matrix) != n or any(len(row) != n for row in self.matrix):
            raise ValueError(f"expected a {n} x {n} matrix")
        if any(not 0 <= x < self.modulus for row in self.matrix for x in row):
            raise ValueError(f"entries must lie in [0, {self.modulus})")
        if not is_symplectic(self.matrix, self.modulus):
            raise ValueError("matrix does not preserve the intersection form")
        return self

    @classmethod
    def from_array(cls, array: np.ndarray, modulus: int) -> "SpElement":
        reduced = np.asarray(array, dtype=np.int64) % modulus
        return cls(g=reduced.shape[0] // 2, modulus=modulus, matrix=tuple(map(tuple, reduced.tolist())))

    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64)

    def __matmul__(self, other: "SpElement") -> "SpElement":
        return multiply(self, other)

    def is_identity(self) -> bool:
        return all(x == int(i == j) for i, row in enumerate(self.matrix) for j, x in enumerate(row))


def identity(g: int, modulus: int) -> SpElement:
    return SpElement.from_array(np.eye(2 * g, dtype=np.int64), modulus)


def _check_same_group(*elements: SpElement) -> None:
    first = elements[0]
    for other in elements[1:]:
        if (other.g, other.modulus) != (first.g, first.modulus):
            raise InvalidInputError("elements belong to different groups")


def multiply(a: SpElement, b: SpElement) -> SpElement:
    _check_same_group(a, b)
    return SpElement.from_array(a.array() @ b.array(), a.modulus)


def inverse(a: SpElement) -> SpElement:
    """M^{-1} = -J M^T J for symplectic M."""
    j = np.array(form_matrix(a.g), dtype=np.int64)
    return SpElement.from_array(-j @ a.array().T @ j, a.modulus)


def transvection_matrix(coords: Sequence[int], power: int = 1) -> np.ndarray:
    """Integer matrix of x -> x + power * i(x, v) v, that is I - power * v v^T J."""
    v = np.array(coords, dtype=np.int64).reshape(-1, 1)
    j = np.array(form_matrix(len(coords) // 2), dtype=np.int64)
    return np.eye(len(coords), dtype=np.int64) - power * (v @ v.T @ j)


def transvection(v: ZLVector) -> SpElement:
    """The symplectic map x -> x + i(x, v) v."""
    if v.modulus == 0:
        raise InvalidInputError("transvections are built over Z_L with L >= 2")
    return SpElement.from_array(transvection_matrix(v.coords), v.modulus)


def act(m: SpElement, x: ZLVector | Point) -> ZLVector | Point:
    """M x on vectors, M (±v) = ±(M v) on lax vectors, and vertexwise on simplices."""
    if isinstance(x, tuple):
        return tuple(sorted(act(m, v) for v in x))
    vector = x.rep if isinstance(x, LaxVector) else x
    if (vector.g, vector.modulus) != (m.g, m.modulus):
        raise InvalidInputError("vector and group element live over different modules")
    coords = tuple(sum(a * c for a, c in zip(row, vector.coords)) for row in m.matrix)
    image = ZLVector.of(coords, m.modulus)
    return canonical_lax(image) if isinstance(x, LaxVector) else image


def group_order(g: int, modulus: int) -> int:
    """|Sp_{2g}(Z_L)| = L^{2g^2+g} prod_{p | L} prod_{i<=g} (1 - p^{-2i})."""
    if modulus < 2:
        raise InvalidInputError("the order formula needs L >= 2")
    order = 1
    for p, e in factorint(modulus).items():
        field_order = p ** (g * g)
        for i in range(1, g + 1):
            field_order *= p ** (2 * i) - 1
        order *= p ** ((e - 1) * (2 * g * g + g)) * field_order
    return order


def transvection_generators(g: int, modulus: int) -> list[SpElement]:
    """Distinct non-identity transvections T_v over all v in (Z_L)^{2g}, sorted by matrix."""
    seen = {}
    for coords in product(range(modulus), repeat=2 * g):
        t = transvection(ZLVector(g=g, modulus=modulus, coords=coords))
        if not t.is_identity():
            seen.setdefault(t.matrix, t)
    return [seen[key] for key in sorted(seen)]


def enumerate_group(g: int, modulus: int) -> list[SpElement]:
    """
    Closure of the transvections under multiplication, identity first.

    Raises:
        GroupTooLargeError: when the group order exceeds the configured guard
        CertificationError: when the closure falls short of the order formula
    """
    expected = group_order(g, modulus)
    if expected > settings.group.max_order:
        raise GroupTooLargeError(f"|Sp_{2 * g}(Z_{modulus})| = {expected} exceeds {settings.group.max_order}")
    generators = [t.array() for t in transvection_generators(g, modulus)]
    start = np.eye(2 * g, dtype=np.int64)
    seen = {start.tobytes()}
    found = [start]
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for gen in generators:
            nxt = (gen @ current) % modulus
            key = nxt.tobytes()
            if key not in seen:
                seen.add(key)
                found.append(nxt)
                queue.append(nxt)
    if len(found) != expected:
        raise CertificationError(f"transvections generate {len(found)} elements, expected {expected}")
    log.debug("Enumerated group", g=g, L=modulus, order=len(found))
    return [SpElement.from_array(m, modulus) for m in found]


def brute_force_group(g: int, modulus: int) -> list[SpElement]:
    """
    Every form-preserving matrix over Z_L, by exhaustive search; an oracle independent of transvections.

    Raises:
        GroupTooLargeError: when L^{4g^2} exceeds the exhaustive limit
    """
    n = 2 * g
    total = modulus ** (n * n)
    if total > settings.group.exhaustive_limit:
        raise GroupTooLargeError(f"{total} candidate matrices exceed {settings.group.exhaustive_limit}")
    candidates = np.array(list(product(range(modulus), repeat=n * n)), dtype=np.int64).reshape(-1, n, n)
    j = np.array(form_matrix(g), dtype=np.int64)
    lhs = np.einsum("kji,jl,klm->kim", candidates, j, candidates) % modulus
    mask = (lhs == j % modulus).all(axis=(1, 2))
    return [SpElement.from_array(m, modulus) for m in candidates[mask]]


class OrbitCertificate(BaseModel):
    """An orbit together with a generator word reaching each element from the base point."""

    base: Point
    elements: list[Point]
    words: list[list[int]]

    def verify(self, gens: Sequence[SpElement]) -> bool:
        """Replay every word from the base point."""
        for element, word in zip(self.elements, self.words, strict=True):
            x = self.base
            for i in word:
                x = act(gens[i], x)
            if x != element:
                return False
        return True


def orbit(x: Point, gens: Sequence[SpElement]) -> OrbitCertificate:
    """Breadth-first orbit of a lax vector or simplex, with witness words."""
    if gens:
        _check_same_group(*gens)
    words = {x: []}
    queue = deque([x])
    while queue:
        current = queue.popleft()
        for i, gen in enumerate(gens):
            image = act(gen, current)
            if image not in words:
                words[image] = [*words[current], i]
                queue.append(image)
    return OrbitCertificate(base=x, elements=list(words), words=list(words.values()))


def action_permutations(X: SimplicialComplex, elements: Sequence[SpElement]) -> list[dict[int, int]]:
    """
    Vertex permutations of a complex labelled by lax vectors.

    Raises:
        InvalidInputError: when an element moves a vertex outside the complex
    """
    return [{v: X.vertex_for(act(m, label)) for v, label in X.labels.items()} for m in elements]


class RotationCheck(BaseModel):
    holds: bool
    exhaustive: bool
    checked: int
    seed: int | None = None
    witness_simplex: list[int] | None = None
    witness_element: dict[int, int] | None = None
    oracle: str = "stabilizer fixes simplex pointwise"


def check_without_rotations(
    X: SimplicialComplex,
    group: Sequence[SpElement | Mapping[int, int]],
    seed: int = 0,
) -> RotationCheck:
    """
    Verify that every element fixing a simplex setwise fixes it pointwise. Exhaustive when
    (simplices x elements) stays under the configured limit, otherwise sampled with the given seed.
    """
    perms = [dict(el) if isinstance(el, Mapping) else action_permutations(X, [el])[0] for el in group]
    GroupAction(generators=perms).check_simplicial(X)
    candidates = [s for s in X if len(s) > 1]
    total = len(candidates) * len(perms)
    if total <= settings.group.exhaustive_limit:
        witness = find_rotation(X, perms)
        if witness is None:
            return RotationCheck(holds=True, exhaustive=True, checked=total)
        return _failed(witness, exhaustive=True, checked=total)

    rng = random.Random(seed)
    for checked in range(1, settings.group.sample_size + 1):
        s, p = rng.choice(candidates), rng.choice(perms)
        image = [p[v] for v in s]
        if image != list(s) and sorted(image) == list(s):
            return _failed((s, p), exhaustive=False, checked=checked, seed=seed)
    return RotationCheck(holds=True, exhaustive=False, checked=settings.group.sample_size, seed=seed)


def _failed(
    witness: tuple[Simplex, dict[int, int]], exhaustive: bool, checked: int, seed: int | None = None
) -> RotationCheck:
    simplex, element = witness
    log.warning("Rotation found", simplex=simplex)
    return RotationCheck(
        holds=False,
        exhaustive=exhaustive,
        checked=checked,
        seed=seed,
        witness_simplex=list(simplex),
        witness_element=element,
    )


def reduction_map(m: SpElement, modulus: int) -> SpElement:
    """
    Entrywise reduction Sp(Z_{L m}) -> Sp(Z_L).

    Raises:
        InvalidInputError: when the target modulus does not divide the source one
    """
    if modulus < 2 or m.modulus % modulus:
        raise InvalidInputError(f"cannot reduce from L = {m.modulus} to L = {modulus}")
    return SpElement.from_array(m.array(), modulus)


def level_kernel(g: int, modulus: int, factor: int) -> list[SpElement]:
    """
    Kernel of Sp_{2g}(Z_{L m}) -> Sp_{2g}(Z_L), the finite shadow of the level-L subgroup: every
    I + L X with X over Z_m that preserves the form, identity first.

    Raises:
        GroupTooLargeError: when m^{4g^2} exceeds the exhaustive limit
        CertificationError: when the kernel order is not |Sp(Z_{L m})| / |Sp(Z_L)|
    """
    n, level = 2 * g, modulus * factor
    total = factor ** (n * n)
    if total > settings.group.exhaustive_limit:
        raise GroupTooLargeError(f"{total} kernel candidates exceed {settings.group.exhaustive_limit}")
    offsets = np.array(list(product(range(factor), repeat=n * n)), dtype=np.int64).reshape(-1, n, n)
    candidates = (np.eye(n, dtype=np.int64) + modulus * offsets) % level
    j = np.array(form_matrix(g), dtype=np.int64)
    lhs = np.einsum("kji,jl,klm->kim", candidates, j, candidates) % level
    kernel = candidates[(lhs == j % level).all(axis=(1, 2))]
    expected = group_order(g, level) // group_order(g, modulus)
    if len(kernel) != expected:
        raise CertificationError(f"level kernel has {len(kernel)} elements, expected {expected}")
    log.debug("Enumerated level kernel", g=g, L=modulus, factor=factor, order=len(kernel))
    return [SpElement.from_array(m, level) for m in kernel]


class QuotientReport(BaseModel):
    g: int
    modulus: int
    factor: int
    kernel_order: int
    orbits: int
    target_vertices: int
    isomorphic: bool
    witness: str | None = None
    oracle: str = "vertex and simplex sets compared under reduction mod L"


def level_quotient(g: int, modulus: int, factor: int, max_dim: int | None = None) -> QuotientReport:
    """
    Build Bases(g, L m), divide by the level-L kernel and compare with Bases(g, L).

    Raises:
        RotationViolationError: when the kernel rotates a simplex
        NonSimplicialQuotientError: when the orbit map is not simplicial
    """
    source = build_bases(BasesSpec(g=g, modulus=modulus * factor, max_dim=max_dim))
    target = build_bases(BasesSpec(g=g, modulus=modulus, max_dim=max_dim))
    kernel = level_kernel(g, modulus, factor)
    perms = action_permutations(source, kernel)
    quotient = quotient_without_rotations(source, GroupAction(generators=generating_subset(perms, source.vertices)))
    report = dict(
        g=g,
        modulus=modulus,
        factor=factor,
        kernel_order=len(kernel),
        orbits=len(quotient.vertices),
        target_vertices=len(target.vertices),
    )

    mapping = {}
    for q, members in quotient.labels.items():
        images = {target.vertex_for(_reduce_lax(source.label(v), modulus)) for v in members}
        if len(images) != 1:
            return QuotientReport(**report, isomorphic=False, witness=f"orbit {members} reduces to {sorted(images)}")
        mapping[q] = images.pop()
    if len(set(mapping.values())) != len(target.vertices):
        return QuotientReport(**report, isomorphic=False, witness="orbit map is not a bijection onto vertices")
    image = {tuple(sorted(mapping[v] for v in s)) for s in quotient}
    if image != set(target):
        missing = sorted(set(target) - image) or sorted(image - set(target))
        return QuotientReport(**report, isomorphic=False, witness=f"simplex sets differ at {missing[0]}")
    return QuotientReport(**report, isomorphic=True)


def _reduce_lax(v: LaxVector, modulus: int) -> LaxVector:
    return canonical_lax(ZLVector.of(v.coords, modulus))


class PremiseReport(BaseModel):
    rotations: RotationCheck
    quotient_betti: list[int] | None = None
    edge_stabilizer_orders: list[int] = []
    stabilizer_oracle: str = "finite stabilizers have H_1(G_e; Q) = 0"


def equivariant_premises(X: SimplicialComplex, elements: Sequence[SpElement], seed: int = 0) -> PremiseReport:
    """
    The premises of the quotient argument on a finite complex: no rotations, the homology of the
    quotient through degree 2, and the order of each edge-orbit stabilizer.
    """
    perms = action_permutations(X, elements)
    rotations = check_without_rotations(X, perms, seed=seed)
    if not rotations.holds:
        return PremiseReport(rotations=rotations)
    quotient = quotient_without_rotations(X, GroupAction(generators=generating_subset(perms, X.vertices)))
    limit = X.dimension if X.skeleton_cap is None else X.skeleton_cap - 1
    betti = reduced_betti(quotient, min(2, max(limit, 0))).reduced_betti
    orders = []
    covered: set[Simplex] = set()
    for edge in X.simplices(1):
        if edge in covered:
            continue
        covered.update(tuple(sorted(p[v] for v in edge)) for p in perms)
        orders.append(sum(1 for p in perms if sorted(p[v] for v in edge) == list(edge)))
    return PremiseReport(rotations=rotations, quotient_betti=betti, edge_stabilizer_orders=orders)
