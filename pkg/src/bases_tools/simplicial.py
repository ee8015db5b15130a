"""
Finite abstract simplicial complexes.

Conventions follow the usual ones for combinatorial manifolds: Star_X(empty) = Link_X(empty) = X,
and the empty complex is both a (-1)-sphere and a closed (-1)-ball.
"""

from collections import defaultdict, deque
from collections.abc import Hashable, Iterable, Iterator, Mapping
from itertools import combinations
from typing import Self

import structlog
from pydantic import BaseModel, Field, model_validator
from sympy.polys.domains import GF, ZZ
from sympy.polys.matrices import DomainMatrix

from bases_tools.config import settings
from bases_tools.errors import BudgetExceededError, CertificationError, InvalidInputError
from bases_tools.utils import UnionFind

log = structlog.get_logger()

Simplex = tuple[int, ...]
Permutation = Mapping[int, int]


class NotDownwardClosedError(InvalidInputError):
    """
    Raised when a set of simplices is missing some face of one of its members.
    """


class IncompleteSkeletonError(InvalidInputError):
    """
    Raised when homology is requested above the materialized skeleton.
    """


class UnsupportedDimensionError(InvalidInputError):
    """
    Raised for sphere or ball recognition above dimension 2.
    """


class RotationViolationError(CertificationError):
    """
    Raised when a group element fixes a simplex setwise but not pointwise.
    """

    def __init__(self, simplex: Simplex, element: Permutation) -> None:
        self.simplex = simplex
        self.element = dict(element)
        moved = {v: self.element[v] for v in simplex if self.element[v] != v}
        super().__init__(f"simplex {simplex} is rotated by a group element (moves {moved})")


class NonSimplicialQuotientError(CertificationError):
    """
    Raised when the orbit map does not induce a simplicial quotient.
    """


def simplex(vertices: Iterable[int]) -> Simplex:
    """Canonical sorted form of a vertex set."""
    return tuple(sorted(set(vertices)))


class SimplicialComplex:
    """
    A downward-closed finite set of simplices on integer vertex identifiers.
    Each vertex carries an opaque, hashable label.
    """

    def __init__(
        self,
        simplices: Iterable[Iterable[int]],
        labels: Mapping[int, Hashable] | None = None,
        skeleton_cap: int | None = None,
        close: bool = False,
    ) -> None:
        """
        Args:
            simplices: the simplices, or only the facets when close is set
            labels: vertex labels, defaults to the identifiers themselves
            skeleton_cap: highest materialized dimension when the intended complex is larger
            close: add every face of the given simplices

        Raises:
            NotDownwardClosedError: when close is not set and a face is missing
        """
        faces: dict[int, set[Simplex]] = defaultdict(set)
        for raw in simplices:
            s = simplex(raw)
            if not s:
                raise InvalidInputError("simplices are nonempty")
            if close:
                for size in range(1, len(s) + 1):
                    faces[size - 1].update(combinations(s, size))
            else:
                faces[len(s) - 1].add(s)
        self._faces: dict[int, frozenset[Simplex]] = {d: frozenset(fs) for d, fs in sorted(faces.items()) if fs}
        vertices = [s[0] for s in self._faces.get(0, ())]
        self.labels: dict[int, Hashable] = {v: (labels[v] if labels is not None else v) for v in sorted(vertices)}
        self.skeleton_cap = skeleton_cap
        self._adjacency: dict[int, frozenset[int]] | None = None
        self.validate()

    def validate(self) -> None:
        """Re-check downward closure."""
        for d, simplices in self._faces.items():
            if d == 0:
                continue
            below = self._faces.get(d - 1, frozenset())
            for s in simplices:
                for face in combinations(s, d):
                    if face not in below:
                        raise NotDownwardClosedError(f"face {face} of {s} is missing")

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(self.labels)

    @property
    def dimension(self) -> int:
        return max(self._faces, default=-1)

    def is_empty(self) -> bool:
        return not self._faces

    def simplices(self, d: int) -> list[Simplex]:
        return sorted(self._faces.get(d, ()))

    def __iter__(self) -> Iterator[Simplex]:
        for d in self._faces:
            yield from self.simplices(d)

    def __contains__(self, s: Iterable[int]) -> bool:
        t = simplex(s)
        return bool(t) and t in self._faces.get(len(t) - 1, ())

    def __len__(self) -> int:
        return sum(len(fs) for fs in self._faces.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return self._faces == other._faces and self.labels == other.labels

    def __repr__(self) -> str:
        return f"SimplicialComplex(f_vector={self.f_vector}, skeleton_cap={self.skeleton_cap})"

    @property
    def f_vector(self) -> list[int]:
        return [len(self._faces.get(d, ())) for d in range(self.dimension + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * count for d, count in enumerate(self.f_vector))

    def label(self, v: int) -> Hashable:
        return self.labels[v]

    def vertex_for(self, label: Hashable) -> int:
        """Inverse of the label table."""
        if not hasattr(self, "_by_label"):
            self._by_label = {lab: v for v, lab in self.labels.items()}
        try:
            return self._by_label[label]
        except KeyError:
            raise InvalidInputError(f"no vertex labelled {label}") from None

    def neighbors(self, v: int) -> frozenset[int]:
        if self._adjacency is None:
            adjacency: dict[int, set[int]] = {u: set() for u in self.vertices}
            for a, b in self._faces.get(1, ()):
                adjacency[a].add(b)
                adjacency[b].add(a)
            self._adjacency = {u: frozenset(ns) for u, ns in adjacency.items()}
        return self._adjacency[v]

    def skeleton(self, k: int) -> "SimplicialComplex":
        kept = [s for d, fs in self._faces.items() if d <= k for s in fs]
        return SimplicialComplex(kept, self.labels_for(kept), skeleton_cap=self._cap_after(k))

    def _cap_after(self, k: int) -> int | None:
        if self.skeleton_cap is not None:
            return min(k, self.skeleton_cap)
        return k if k < self.dimension else None

    def subcomplex(self, simplices: Iterable[Iterable[int]]) -> "SimplicialComplex":
        """The subcomplex generated by the given simplices of this complex."""
        kept = [simplex(s) for s in simplices]
        for s in kept:
            if s not in self:
                raise InvalidInputError(f"{s} is not a simplex of the complex")
        return SimplicialComplex(kept, self.labels_for(kept), close=True)

    def labels_for(self, simplices: Iterable[Simplex]) -> dict[int, Hashable]:
        return {v: self.labels[v] for s in simplices for v in s}

    def boundary_matrix(self, d: int) -> tuple[dict[int, dict[int, int]], tuple[int, int]]:
        """
        Sparse matrix of the boundary map C_d -> C_{d-1}, rows indexed by the sorted (d-1)-simplices
        and columns by the sorted d-simplices. The face omitting the i-th vertex carries sign (-1)^i.
        """
        rows = self.simplices(d - 1)
        cols = self.simplices(d)
        index = {s: i for i, s in enumerate(rows)}
        matrix: dict[int, dict[int, int]] = defaultdict(dict)
        for j, s in enumerate(cols):
            for i in range(len(s)):
                face = s[:i] + s[i + 1 :]
                matrix[index[face]][j] = (-1) ** i
        return dict(matrix), (len(rows), len(cols))


def _check_member(X: SimplicialComplex, delta: Iterable[int]) -> Simplex:
    s = simplex(delta)
    if s and s not in X:
        raise InvalidInputError(f"{s} is not a simplex of the complex")
    return s


def star(X: SimplicialComplex, delta: Iterable[int] = ()) -> SimplicialComplex:
    """
    All simplices lying in a common simplex with delta. Star of the empty simplex is X.

    Raises:
        InvalidInputError: when delta is not a simplex of X
    """
    s = _check_member(X, delta)
    if not s:
        return X
    cofaces = [t for t in X if set(s) <= set(t)]
    return SimplicialComplex(cofaces, X.labels_for(cofaces), skeleton_cap=X.skeleton_cap, close=True)


def link(X: SimplicialComplex, delta: Iterable[int] = ()) -> SimplicialComplex:
    """
    Simplices of the star of delta that are disjoint from delta. Link of the empty simplex is X.

    Raises:
        InvalidInputError: when delta is not a simplex of X
    """
    s = _check_member(X, delta)
    if not s:
        return X
    kept = [t for t in star(X, s) if not set(s) & set(t)]
    cap = None if X.skeleton_cap is None else X.skeleton_cap - len(s)
    return SimplicialComplex(kept, X.labels_for(kept), skeleton_cap=cap)


class BettiReport(BaseModel):
    reduced_betti: list[int] = Field(description="exact reduced Betti numbers over Q, by dimension")
    computed_up_to: int
    oracle: str = "exact rational rank of boundary matrices"

    @model_validator(mode="after")
    def _check_length(self) -> Self:
        if len(self.reduced_betti) != self.computed_up_to + 1:
            raise ValueError("one Betti number per dimension up to computed_up_to")
        return self


def rational_rank(matrix: Mapping[int, Mapping[int, int]], shape: tuple[int, int]) -> int:
    """Exact rank over Q of a sparse integer matrix."""
    if not matrix or 0 in shape:
        return 0
    rows = {i: {j: ZZ(x) for j, x in row.items() if x} for i, row in matrix.items()}
    return DomainMatrix(rows, shape, ZZ).to_field().rank()


def modular_rank(matrix: Mapping[int, Mapping[int, int]], shape: tuple[int, int], prime: int) -> int:
    """Rank over GF(p); a lower bound for the rational rank, only used to pre-screen."""
    if not matrix or 0 in shape:
        return 0
    rows = {i: {j: ZZ(x) for j, x in row.items() if x} for i, row in matrix.items()}
    return DomainMatrix(rows, shape, ZZ).convert_to(GF(prime)).rank()


def reduced_betti(X: SimplicialComplex, up_to: int) -> BettiReport:
    """
    Exact reduced Betti numbers b~_0 ... b~_{up_to} over Q.

    Raises:
        IncompleteSkeletonError: when simplices of dimension up_to + 1 are not all materialized
    """
    if up_to < 0:
        raise InvalidInputError("up_to must be non-negative")
    if X.skeleton_cap is not None and X.skeleton_cap < up_to + 1:
        raise IncompleteSkeletonError(
            f"b~_{up_to} needs the {up_to + 1}-skeleton, only dimension {X.skeleton_cap} is materialized"
        )
    if X.is_empty():
        return BettiReport(reduced_betti=[0] * (up_to + 1), computed_up_to=up_to)
    # rank of the augmentation C_0 -> Q is 1 on a nonempty complex
    ranks = {0: 1}
    for d in range(1, up_to + 2):
        matrix, shape = X.boundary_matrix(d)
        ranks[d] = rational_rank(matrix, shape)
        if settings.homology.prescreen:
            screens = [modular_rank(matrix, shape, p) for p in settings.homology.prescreen_primes]
            log.debug("Modular pre-screen", dim=d, rational=ranks[d], modular=screens)
    f = X.f_vector
    betti = [(f[i] if i < len(f) else 0) - ranks[i] - ranks[i + 1] for i in range(up_to + 1)]
    log.debug("Reduced Betti numbers", betti=betti, f_vector=f)
    return BettiReport(reduced_betti=betti, computed_up_to=up_to)


def connected_components(X: SimplicialComplex) -> list[list[int]]:
    """Partition of the vertices into connected components, by union-find over the edges."""
    uf = UnionFind(X.vertices)
    for a, b in X.simplices(1):
        uf.union(a, b)
    return uf.groups()


def _check_recognition_dimension(n: int) -> None:
    if n > 2:
        raise UnsupportedDimensionError(f"sphere and ball recognition is only available up to dimension 2, got {n}")


def _is_connected(X: SimplicialComplex) -> bool:
    return len(connected_components(X)) == 1


def is_combinatorial_sphere(X: SimplicialComplex, n: int) -> bool:
    """
    Combinatorial n-sphere recognition for n <= 2.

    Raises:
        UnsupportedDimensionError: when n > 2
    """
    _check_recognition_dimension(n)
    if n <= -1:
        return X.is_empty()
    if X.is_empty() or X.dimension != n:
        return False
    if n == 0:
        return len(X.vertices) == 2
    if not _is_connected(X):
        return False
    if n == 1:
        return all(len(X.neighbors(v)) == 2 for v in X.vertices)
    return all(is_combinatorial_sphere(link(X, (v,)), 1) for v in X.vertices) and X.euler_characteristic() == 2


def is_combinatorial_ball(X: SimplicialComplex, n: int) -> bool:
    """
    Combinatorial n-ball recognition for n <= 2.

    Raises:
        UnsupportedDimensionError: when n > 2
    """
    _check_recognition_dimension(n)
    if n <= -1:
        return X.is_empty()
    if X.is_empty() or X.dimension != n:
        return False
    if n == 0:
        return len(X.vertices) == 1
    if not _is_connected(X):
        return False
    if n == 1:
        degrees = sorted(len(X.neighbors(v)) for v in X.vertices)
        return (
            len(X.simplices(1)) == len(X.vertices) - 1
            and all(d <= 2 for d in degrees)
            and degrees.count(1) == 2
        )
    links_ok = all(
        is_combinatorial_sphere(link(X, (v,)), 1) or is_combinatorial_ball(link(X, (v,)), 1) for v in X.vertices
    )
    return links_ok and X.euler_characteristic() == 1 and is_combinatorial_sphere(combinatorial_boundary(X, 2), 1)


def combinatorial_boundary(X: SimplicialComplex, n: int) -> SimplicialComplex:
    """Simplices of dimension < n whose link is a closed ball of the complementary dimension."""
    _check_recognition_dimension(n)
    kept = [s for s in X if len(s) - 1 < n and is_combinatorial_ball(link(X, s), n - len(s))]
    return SimplicialComplex(kept, X.labels_for(kept), close=True)


def is_combinatorial_manifold(X: SimplicialComplex, n: int) -> bool:
    """Every link of a simplex of dimension d <= n is an (n-d-1)-sphere or ball."""
    _check_recognition_dimension(n)
    if X.is_empty() or X.dimension > n:
        return False
    for s in X:
        k = n - (len(s) - 1) - 1
        if k >= 0:
            lk = link(X, s)
            if not (is_combinatorial_sphere(lk, k) or is_combinatorial_ball(lk, k)):
                return False
    return True


def boundary_of_simplex(n: int, offset: int = 0) -> SimplicialComplex:
    """The n-sphere as the boundary of an (n+1)-simplex on vertices offset, ..., offset + n + 1."""
    vertices = range(offset, offset + n + 2)
    return SimplicialComplex(combinations(vertices, n + 1), close=True)


def cycle(m: int) -> SimplicialComplex:
    """The m-gon, m >= 3."""
    return SimplicialComplex([(i, (i + 1) % m) for i in range(m)], close=True)


def cone(X: SimplicialComplex, apex: int) -> SimplicialComplex:
    if apex in X.labels:
        raise InvalidInputError(f"apex {apex} is already a vertex")
    return SimplicialComplex([(*s, apex) for s in X] + [(apex,)], close=True)


def disjoint_union(X: SimplicialComplex, Y: SimplicialComplex) -> SimplicialComplex:
    if set(X.vertices) & set(Y.vertices):
        raise InvalidInputError("vertex sets overlap")
    return SimplicialComplex([*X, *Y], X.labels | Y.labels)


def seven_vertex_torus() -> SimplicialComplex:
    """The minimal triangulation of the torus: triangles {i, i+1, i+3} and {i, i+2, i+3} mod 7."""
    facets = [(i, (i + 1) % 7, (i + 3) % 7) for i in range(7)] + [(i, (i + 2) % 7, (i + 3) % 7) for i in range(7)]
    return SimplicialComplex(facets, close=True)


class GroupAction(BaseModel):
    """Generators of a finite group acting on vertex identifiers by permutations."""

    generators: list[dict[int, int]] = []

    @model_validator(mode="after")
    def _check_bijections(self) -> Self:
        for gen in self.generators:
            if sorted(gen.values()) != sorted(gen):
                raise ValueError(f"generator {gen} is not a permutation")
        return self

    def check_simplicial(self, X: SimplicialComplex) -> None:
        """
        Raises:
            InvalidInputError: when a generator does not act on X by a simplicial automorphism
        """
        for gen in self.generators:
            if set(gen) != set(X.vertices):
                raise InvalidInputError("generator domain differs from the vertex set")
            for s in X:
                if tuple(gen[v] for v in s) not in X:
                    raise InvalidInputError(f"generator maps simplex {s} outside the complex")


def _compose(p: Mapping[int, int], q: Mapping[int, int]) -> dict[int, int]:
    """p after q."""
    return {v: p[q[v]] for v in q}


def group_closure(
    generators: Iterable[Permutation], vertices: Iterable[int], limit: int | None = None
) -> list[dict[int, int]]:
    """
    All elements of the group generated by the permutations, identity first, in BFS order.

    Raises:
        BudgetExceededError: when the group outgrows the limit
    """
    vertices = tuple(sorted(vertices))
    limit = limit or settings.group.max_order
    identity = {v: v for v in vertices}
    gens = [dict(gen) for gen in generators]
    seen = {tuple(identity[v] for v in vertices)}
    elements = [identity]
    queue = deque([identity])
    while queue:
        current = queue.popleft()
        for gen in gens:
            product = _compose(gen, current)
            key = tuple(product[v] for v in vertices)
            if key not in seen:
                seen.add(key)
                elements.append(product)
                queue.append(product)
                if len(elements) > limit:
                    raise BudgetExceededError(f"generated group exceeds {limit} elements")
    return elements


def generating_subset(elements: Iterable[Permutation], vertices: Iterable[int]) -> list[dict[int, int]]:
    """A subset of the elements generating the same group, picked greedily in order."""
    vertices = tuple(sorted(vertices))
    reached = {vertices}
    gens: list[dict[int, int]] = []
    for element in elements:
        if tuple(element[v] for v in vertices) in reached:
            continue
        gens.append(dict(element))
        reached = {tuple(e[v] for v in vertices) for e in group_closure(gens, vertices)}
    return gens


def find_rotation(X: SimplicialComplex, elements: Iterable[Permutation]) -> tuple[Simplex, dict[int, int]] | None:
    """First (simplex, element) where the element fixes the simplex setwise but not pointwise, if any."""
    candidates = [s for d in range(1, X.dimension + 1) for s in X.simplices(d)]
    for element in elements:
        for s in candidates:
            image = [element[v] for v in s]
            if image != list(s) and simplex(image) == s:
                return s, dict(element)
    return None


def quotient_without_rotations(X: SimplicialComplex, action: GroupAction) -> SimplicialComplex:
    """
    Quotient of X by a finite group acting without rotations, on orbit-labelled vertices.

    Raises:
        RotationViolationError: when a simplex stabilizer does not fix its simplex pointwise
        NonSimplicialQuotientError: when a simplex collapses under the orbit map, or when two
            simplices in different orbits have the same image
    """
    action.check_simplicial(X)
    elements = group_closure(action.generators, X.vertices)
    witness = find_rotation(X, elements)
    if witness is not None:
        raise RotationViolationError(*witness)

    uf = UnionFind(X.vertices)
    for gen in action.generators:
        for v, image in gen.items():
            uf.union(v, image)
    orbits = uf.groups()
    orbit_of = {v: i for i, members in enumerate(orbits) for v in members}

    images: dict[Simplex, Simplex] = {}
    for s in X:
        image = simplex(orbit_of[v] for v in s)
        if len(image) < len(s):
            raise NonSimplicialQuotientError(f"simplex {s} collapses to {image} under the orbit map")
        representative = min(simplex(element[v] for v in s) for element in elements)
        previous = images.setdefault(image, representative)
        if previous != representative:
            raise NonSimplicialQuotientError(
                f"simplices in distinct orbits ({previous} and {representative}) share the image {image}"
            )
    labels = {i: tuple(members) for i, members in enumerate(orbits)}
    log.debug("Quotient built", orbits=len(orbits), group_order=len(elements))
    return SimplicialComplex(images, labels, skeleton_cap=X.skeleton_cap)
