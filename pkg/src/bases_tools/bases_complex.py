"""
The complexes of lax isotropic bases Bases(g, L), their links Bases^{Δk}(g, L) over the first k
vectors a_1, ..., a_k, the restriction to W = span(a_1, b_1, ..., a_{g-1}, b_{g-1}, a_g), and the
constructive connectivity algorithms driven by the rho-rank.
"""

import random
from collections import deque
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from typing import Literal, Self

import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from bases_tools.config import settings
from bases_tools.errors import BudgetExceededError, CertificationError, InternalInvariantError, InvalidInputError
from bases_tools.simplicial import SimplicialComplex, is_combinatorial_sphere
from bases_tools.zl_linalg import (
    LaxVector,
    Modulus,
    ZLVector,
    basis_index,
    basis_vector,
    canonical_coords,
    canonical_lax,
    is_primitive,
    pairing,
    reduce_vector,
    summand_rows,
)

log = structlog.get_logger()


class StepBudgetExceededError(BudgetExceededError):
    """
    Raised when a constructive algorithm runs past its step budget.
    """


class BasesSpec(BaseModel):
    """Parameters selecting Bases^{Δk}(g, L), optionally restricted to W."""

    model_config = ConfigDict(frozen=True, validate_by_name=True, validate_by_alias=True)

    g: int = Field(gt=0)
    modulus: Modulus = Field(alias="L")
    delta_k: int = Field(default=0, ge=0)
    restrict_w: bool = Field(default=False, alias="restrict_W")
    max_dim: int | None = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _check_ranges(self) -> Self:
        if self.modulus == 0:
            raise ValueError("the complex over the integers is infinite, pick L >= 2")
        if self.delta_k > self.g:
            raise ValueError(f"delta_k = {self.delta_k} exceeds g = {self.g}")
        return self

    @property
    def top_dim(self) -> int:
        """Highest dimension materialized: isotropic summands have rank at most g."""
        full = self.g - self.delta_k - 1
        return full if self.max_dim is None else min(self.max_dim, full)

    @property
    def is_complete(self) -> bool:
        return self.top_dim == self.g - self.delta_k - 1

    @property
    def context(self) -> list[ZLVector]:
        return [basis_vector(f"a_{j}", self.g, self.modulus) for j in range(1, self.delta_k + 1)]


class RhoChoice(BaseModel):
    """The coordinate whose rank drives the reduction."""

    model_config = ConfigDict(frozen=True)

    rho: str = "b_1"

    @field_validator("rho")
    @classmethod
    def _check_symbol(cls, value: str) -> str:
        # range is only known once g is, basis_index re-checks at use
        basis_index(value, 10**9)
        return value

    def index(self, g: int) -> int:
        return basis_index(self.rho, g)


def canonical_rho(spec: BasesSpec) -> RhoChoice:
    return RhoChoice(rho=f"a_{spec.g}" if spec.restrict_w else f"b_{spec.g}")


class BasesComplex:
    """
    Membership predicates for the lax isotropic bases complex over a base simplex.

    The base simplex defaults to Δ^k = {a_1, ..., a_k}; any isotropic summand basis is accepted, so the
    link of a simplex of Bases(g, L) is again a complex of this kind.
    """

    def __init__(self, spec: BasesSpec, context: Sequence[ZLVector] | None = None) -> None:
        self.spec = spec
        self.g = spec.g
        self.modulus = spec.modulus
        self.context = list(spec.context if context is None else context)
        rows = [c.coords for c in self.context]
        for i, c in enumerate(self.context):
            if c.g != self.g or c.modulus != self.modulus:
                raise InvalidInputError("base simplex lives in a different module")
            if any(pairing(c.coords, d, self.modulus) for d in rows[i + 1 :]):
                raise InvalidInputError("base simplex is not isotropic")
        if rows and not summand_rows(rows, self.modulus):
            raise InvalidInputError("base simplex does not span a free summand")
        self.context_rows = rows
        self._excluded = {canonical_coords(r, self.modulus) for r in rows}
        self._vertices: list[LaxVector] | None = None
        self._neighbors: dict[tuple[LaxVector, bool], list[LaxVector]] = {}

    def admits(self, coords: Sequence[int]) -> bool:
        """Vertex predicate on a canonical representative."""
        if self.spec.restrict_w and coords[2 * self.g - 1] != 0:
            return False
        if tuple(coords) in self._excluded:
            return False
        if any(pairing(coords, c, self.modulus) for c in self.context_rows):
            return False
        return summand_rows([*self.context_rows, coords], self.modulus)

    def is_vertex(self, v: LaxVector) -> bool:
        return v.g == self.g and v.modulus == self.modulus and self.admits(v.coords)

    def is_simplex(self, vs: Iterable[LaxVector]) -> bool:
        """
        Pairwise isotropic, distinct vertices whose span, together with the base simplex,
        is a free summand.
        """
        vs = list(vs)
        if not vs or len(set(vs)) != len(vs) or len(vs) + len(self.context) > self.g:
            return False
        if not all(self.is_vertex(v) for v in vs):
            return False
        for i, v in enumerate(vs):
            if any(pairing(v.coords, w.coords, self.modulus) for w in vs[i + 1 :]):
                return False
        return summand_rows([*self.context_rows, *(v.coords for v in vs)], self.modulus)

    def is_image_simplex(self, vs: Iterable[LaxVector]) -> bool:
        """Image of a domain simplex under a possibly non-injective simplicial map."""
        return self.is_simplex(set(vs))

    @property
    def vertices(self) -> list[LaxVector]:
        if self._vertices is None:
            found = set()
            for coords in product(range(self.modulus), repeat=2 * self.g):
                if canonical_coords(coords, self.modulus) != coords:
                    continue
                if any(coords) and self._is_primitive(coords) and self.admits(coords):
                    found.add(coords)
            self._vertices = [LaxVector(rep=ZLVector(g=self.g, modulus=self.modulus, coords=c)) for c in sorted(found)]
        return self._vertices

    def _is_primitive(self, coords: tuple[int, ...]) -> bool:
        return is_primitive(ZLVector(g=self.g, modulus=self.modulus, coords=coords))

    def neighbors(self, v: LaxVector, within_w: bool = False) -> list[LaxVector]:
        """Vertices joined to v by an edge, optionally only those in W."""
        key = (v, within_w)
        if key not in self._neighbors:
            self._neighbors[key] = [
                u
                for u in self.vertices
                if not (within_w and u.coords[2 * self.g - 1] != 0) and u != v and self.is_simplex([v, u])
            ]
        return self._neighbors[key]

    def link_neighbors(self, apex: LaxVector, v: LaxVector, within_w: bool = False) -> list[LaxVector]:
        """Neighbors of v inside the link of apex."""
        return [u for u in self.neighbors(apex, within_w) if u != v and self.is_simplex([apex, v, u])]


def enumerate_lax_vertices(spec: BasesSpec) -> list[LaxVector]:
    """All vertices of the complex, sorted by canonical representative."""
    return list(BasesComplex(spec).vertices)


def _extend_chunk(
    args: tuple[list[tuple[int, ...]], list[tuple[int, ...]], list[frozenset[int]], list[tuple[int, ...]], int],
) -> list[tuple[int, ...]]:
    simplices, coords, adjacency, context_rows, modulus = args
    extended = []
    for s in simplices:
        common = set.intersection(*(set(adjacency[i]) for i in s))
        for j in sorted(common):
            if j > s[-1] and summand_rows([*context_rows, *(coords[i] for i in s), coords[j]], modulus):
                extended.append((*s, j))
    return extended


def build_bases(spec: BasesSpec, workers: int | None = None) -> SimplicialComplex:
    """
    Build the complex up to spec.top_dim by clique extension over the vertex order.
    Vertex ids are the positions in enumerate_lax_vertices(spec), labels are the lax vectors.
    """
    complex_ = BasesComplex(spec)
    vertices = complex_.vertices
    coords = [v.coords for v in vertices]
    rows = complex_.context_rows
    workers = workers or settings.bases.workers
    log.info("Building complex", g=spec.g, L=spec.modulus, delta_k=spec.delta_k, vertices=len(vertices))

    adjacency: list[set[int]] = [set() for _ in vertices]
    edges = []
    if spec.top_dim >= 1:
        for i, j in ((i, j) for i in range(len(coords)) for j in range(i + 1, len(coords))):
            if pairing(coords[i], coords[j], spec.modulus) == 0 and summand_rows(
                [*rows, coords[i], coords[j]], spec.modulus
            ):
                adjacency[i].add(j)
                adjacency[j].add(i)
                edges.append((i, j))
    frozen = [frozenset(a) for a in adjacency]

    levels = [[(i,) for i in range(len(vertices))], edges]
    for _ in range(2, spec.top_dim + 1):
        previous = levels[-1]
        if not previous:
            break
        if workers > 1:
            size = max(1, len(previous) // (4 * workers))
            chunks = [
                (previous[i : i + size], coords, frozen, rows, spec.modulus) for i in range(0, len(previous), size)
            ]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_extend_chunk, chunks))
            levels.append(sorted(s for part in parts for s in part))
        else:
            levels.append(_extend_chunk((previous, coords, frozen, rows, spec.modulus)))
        log.debug("Extended skeleton", dim=len(levels) - 1, simplices=len(levels[-1]))

    simplices = [s for level in levels[: spec.top_dim + 1] for s in level]
    cap = None if spec.is_complete else spec.top_dim
    labels = dict(enumerate(vertices))
    X = SimplicialComplex(simplices, labels, skeleton_cap=cap)
    log.info("Built complex", f_vector=X.f_vector, skeleton_cap=cap)
    return X


def connectivity_range(spec: BasesSpec) -> range:
    """Dimensions n with -1 <= n <= g - k - 2 for which the complex is claimed n-connected."""
    return range(-1, spec.g - spec.delta_k - 1)


def check_nonempty(spec: BasesSpec) -> bool:
    """The (-1)-connectivity claim: nonempty whenever k < g."""
    if spec.delta_k >= spec.g:
        return False
    return bool(BasesComplex(spec).vertices)


def rho_rank(v: LaxVector | ZLVector, rho: RhoChoice) -> int:
    """min(|c|, |-c|) for the rho-coordinate c; the same on both representatives."""
    c = v.coords[rho.index(v.g)] % v.modulus
    return min(c, (-c) % v.modulus)


def normalize(v: LaxVector | ZLVector, rho: RhoChoice) -> ZLVector:
    """The representative of ±v whose rho-coordinate equals its rank; for a tie at L/2 the canonical one."""
    rep = v.rep if isinstance(v, LaxVector) else v
    if rep.coords[rho.index(rep.g)] == rho_rank(rep, rho):
        return rep
    return -rep


def rank_reduction_coefficient(v_x: ZLVector, v: ZLVector, rho: RhoChoice, keep_reduced: bool = False) -> int:
    """
    q in Z_L with rank(v_x + q v) < rank(v) = R, by Euclidean division of the rho-coordinate of v_x
    by R, quotient negated.

    Args:
        v_x: the vector to move
        v: the pivot, normalized so its rho-coordinate is exactly R
        rho: the rank coordinate
        keep_reduced: return 0 whenever v_x already has rank below R

    Raises:
        InvalidInputError: when R = 0 or the pivot is not normalized
    """
    idx = rho.index(v.g)
    big_r = rho_rank(v, rho)
    if big_r == 0:
        raise InvalidInputError("pivot has rank 0, nothing to divide by")
    if v.coords[idx] != big_r:
        raise InvalidInputError(f"pivot rho-coordinate {v.coords[idx]} is not normalized to its rank {big_r}")
    if keep_reduced and rho_rank(v_x, rho) < big_r:
        return 0
    t, _ = divmod(v_x.coords[idx], big_r)
    return (-t) % v.modulus


def reduce_vertex(
    context: Sequence[LaxVector],
    v_x: LaxVector,
    pivot: LaxVector,
    rho: RhoChoice,
    complex_: BasesComplex,
) -> LaxVector:
    """
    Replace v_x by ±(v_x + q pivot), which lies in the same simplices with the context and has
    rank below that of the pivot.

    Raises:
        InvalidInputError: when the context with v_x is not a simplex, the pivot is outside the context
            or has rank 0
        InternalInvariantError: when the result fails re-verification
    """
    if pivot not in context:
        raise InvalidInputError(f"pivot {pivot} is not part of the context")
    if not complex_.is_simplex([*context, v_x]):
        raise InvalidInputError("context together with the moved vertex is not a simplex")
    big_r = rho_rank(pivot, rho)
    if big_r == 0:
        raise InvalidInputError("pivot has rank 0")
    p, x = normalize(pivot, rho), normalize(v_x, rho)
    q = rank_reduction_coefficient(x, p, rho)
    result = canonical_lax(x + q * p)
    if rho_rank(result, rho) >= big_r:
        raise InternalInvariantError(f"rank of {result} did not drop below {big_r}")
    if not complex_.is_simplex([*context, result]):
        raise InternalInvariantError(f"{result} left the simplex spanned with the context")
    return result


def step_budget(spec: BasesSpec, domain_vertices: int) -> int:
    return settings.bases.budget_factor * domain_vertices * spec.modulus


class _Descent:
    """Shared state for the two-phase rank descent: b_g in the full complex, then a_g inside W."""

    def __init__(self, spec: BasesSpec, budget: int, complex_: BasesComplex | None = None) -> None:
        if spec.g < 2:
            raise InvalidInputError("the rank descent needs g >= 2")
        self.spec = spec
        self.complex = complex_ or BasesComplex(spec)
        self.budget = budget
        self.steps = 0
        self.a_g = canonical_lax(basis_vector(f"a_{spec.g}", spec.g, spec.modulus))
        self.full_rho = RhoChoice(rho=f"b_{spec.g}")
        self.w_rho = RhoChoice(rho=f"a_{spec.g}")
        self._flagged = False

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise StepBudgetExceededError(f"step budget of {self.budget} exhausted")

    def in_w(self, v: LaxVector) -> bool:
        return v.coords[2 * self.spec.g - 1] == 0

    def enter_w_phase(self) -> None:
        if not self._flagged and self.spec.delta_k == self.spec.g - 2 and not self.spec.restrict_w:
            log.warning("Entering W phase with k at its maximum", g=self.spec.g, delta_k=self.spec.delta_k)
            self._flagged = True

    def descend(self, x: LaxVector) -> list[LaxVector]:
        """Path from x into the star of ±a_g."""
        path = [x]
        if not self.spec.restrict_w:
            while rho_rank(x, self.full_rho) > 0:
                x = self._step(x, self.full_rho, within_w=False)
                path.append(x)
        self.enter_w_phase()
        while rho_rank(x, self.w_rho) > 0:
            x = self._step(x, self.w_rho, within_w=True)
            path.append(x)
        path.append(self.a_g)
        return path

    def _step(self, x: LaxVector, rho: RhoChoice, within_w: bool) -> LaxVector:
        self.tick()
        neighbors = self.complex.neighbors(x, within_w=within_w)
        if not neighbors:
            raise CertificationError(f"vertex {x} has no neighbor to reduce against")
        return reduce_vertex([x], neighbors[0], x, rho, self.complex)


def _shortcut(path: list[LaxVector]) -> list[LaxVector]:
    """Drop closed sub-walks so that no vertex repeats."""
    out: list[LaxVector] = []
    position: dict[LaxVector, int] = {}
    for v in path:
        if v in position:
            del out[position[v] + 1 :]
            position = {u: i for i, u in enumerate(out)}
            continue
        position[v] = len(out)
        out.append(v)
    return out


def connect_vertices(
    u: LaxVector,
    w: LaxVector,
    spec: BasesSpec,
    budget: int | None = None,
    complex_: BasesComplex | None = None,
) -> list[LaxVector]:
    """
    Edge path from u to w obtained by reducing both ends into the star of ±a_g.

    Raises:
        InvalidInputError: when g - k < 2 or an endpoint is not a vertex
        StepBudgetExceededError: when the reduction does not finish within the budget
        CertificationError: when a returned edge fails the simplex predicate
    """
    if spec.g - spec.delta_k < 2:
        raise InvalidInputError(f"0-connectivity needs g - k >= 2, got g = {spec.g}, k = {spec.delta_k}")
    complex_ = complex_ or BasesComplex(spec)
    for end in (u, w):
        if not complex_.is_vertex(end):
            raise InvalidInputError(f"{end} is not a vertex of the complex")
    if u == w:
        return [u]
    descent = _Descent(spec, budget or step_budget(spec, 2), complex_)
    path = _shortcut(descent.descend(u) + descent.descend(w)[::-1])
    for x, y in zip(path, path[1:]):
        if not complex_.is_simplex([x, y]):
            raise CertificationError(f"path step {x} -> {y} is not an edge")
    log.debug("Connected vertices", length=len(path) - 1, steps=descent.steps)
    return path


class SphereMap(BaseModel):
    """A simplicial map from a combinatorial n-sphere (n <= 1) to lax vectors."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    domain: SimplicialComplex
    assignment: dict[int, LaxVector]
    n: int = Field(ge=0, le=1)

    @model_validator(mode="after")
    def _check_domain(self) -> Self:
        if not is_combinatorial_sphere(self.domain, self.n):
            raise ValueError(f"domain is not a combinatorial {self.n}-sphere")
        if set(self.assignment) != set(self.domain.vertices):
            raise ValueError("assignment must cover exactly the domain vertices")
        return self

    @classmethod
    def cycle(cls, loop: Sequence[LaxVector]) -> "SphereMap":
        """The loop as a map from an m-gon, m >= 3."""
        m = len(loop)
        if m < 3:
            raise InvalidInputError("a simplicial circle needs at least three vertices")
        edges = [(i, (i + 1) % m) for i in range(m)]
        return cls(domain=SimplicialComplex(edges, close=True), assignment=dict(enumerate(loop)), n=1)

    def check_simplicial(self, complex_: BasesComplex) -> None:
        for s in self.domain:
            if not complex_.is_image_simplex(self.assignment[v] for v in s):
                raise InvalidInputError(f"domain simplex {s} does not map to a simplex")

    def as_loop(self) -> list[LaxVector]:
        """The image of a circle, read along the cycle starting at the smallest vertex."""
        if self.n != 1:
            raise InvalidInputError("only circles are read as loops")
        start = self.domain.vertices[0]
        order, previous, current = [start], None, start
        while True:
            step = min(v for v in self.domain.neighbors(current) if v != previous)
            if step == start:
                break
            order.append(step)
            previous, current = current, step
        return [self.assignment[v] for v in order]


class Move(BaseModel):
    """One elementary homotopy of the loop, certified by the simplices it sweeps across."""

    kind: Literal["collapse", "fill_simplex", "subdivide_edge", "replace_vertex", "cone"]
    before: list[LaxVector]
    after: list[LaxVector]
    witnesses: list[list[LaxVector]]


class FillLog(BaseModel):
    moves: list[Move] = []
    final: LaxVector
    steps: int = 0


def certify_move(move: Move, complex_: BasesComplex) -> None:
    """
    Every witness is a simplex, and every edge of the old and new segments is a face of one.

    Raises:
        CertificationError: otherwise
    """
    witnesses = [set(w) for w in move.witnesses]
    for w in witnesses:
        if not complex_.is_simplex(w):
            raise CertificationError(f"{move.kind} witness {sorted(w)} is not a simplex")
    for segment in (move.before, move.after):
        for x, y in zip(segment, segment[1:]):
            if x != y and not any({x, y} <= w for w in witnesses):
                raise CertificationError(f"{move.kind} edge {x} - {y} is not covered by a witness")


class _LoopFiller(_Descent):
    def __init__(self, spec: BasesSpec, budget: int, complex_: BasesComplex | None = None) -> None:
        super().__init__(spec, budget, complex_)
        self.moves: list[Move] = []

    def record(self, move: Move) -> None:
        certify_move(move, self.complex)
        self.moves.append(move)

    def collapse(self, loop: list[LaxVector]) -> list[LaxVector] | None:
        m = len(loop)
        if m == 1:
            return None
        for t in range(m):
            x, y = loop[t], loop[(t + 1) % m]
            if x == y:
                self.record(Move(kind="collapse", before=[x, x], after=[x], witnesses=[[x]]))
                return loop[:t] + loop[t + 1 :]
        if m == 2:
            x, y = loop
            self.record(Move(kind="collapse", before=[x, y, x], after=[x], witnesses=[[x, y]]))
            return [x]
        for t in range(m):
            p, x, n = loop[t - 1], loop[t], loop[(t + 1) % m]
            if p == n:
                self.record(Move(kind="collapse", before=[p, x, p], after=[p], witnesses=[[p, x]]))
                drop = {t, (t + 1) % m}
                return [v for i, v in enumerate(loop) if i not in drop]
        return None

    def fill_simplex(self, loop: list[LaxVector]) -> list[LaxVector] | None:
        vertices = set(loop)
        if 1 < len(vertices) <= 3 and self.complex.is_simplex(vertices):
            self.record(
                Move(kind="fill_simplex", before=[*loop, loop[0]], after=[loop[0]], witnesses=[sorted(vertices)])
            )
            return [loop[0]]
        return None

    def reduce_level(self, loop: list[LaxVector], rho: RhoChoice, within_w: bool) -> list[LaxVector]:
        """Lower the maximal rank on the loop until every vertex has rank 0."""
        while True:
            loop = self.tidy(loop)
            if len(loop) == 1:
                return loop
            big_r = max(rho_rank(v, rho) for v in loop)
            if big_r == 0:
                return loop
            m = len(loop)
            t = next(i for i in range(m) if rho_rank(loop[i], rho) == big_r)
            n = loop[(t + 1) % m]
            self.tick()
            if rho_rank(n, rho) == big_r:
                loop = self.subdivide_edge(loop, t, rho, within_w)
            elif rho_rank(loop[t - 1], rho) == big_r:
                loop = self.subdivide_edge(loop, (t - 1) % m, rho, within_w)
            else:
                loop = self.replace_vertex(loop, t, rho, within_w)

    def tidy(self, loop: list[LaxVector]) -> list[LaxVector]:
        while len(loop) > 1:
            shorter = self.fill_simplex(loop) or self.collapse(loop)
            if shorter is None:
                break
            loop = shorter
        return loop

    def subdivide_edge(self, loop: list[LaxVector], t: int, rho: RhoChoice, within_w: bool) -> list[LaxVector]:
        x, y = loop[t], loop[(t + 1) % len(loop)]
        common = self.complex.link_neighbors(x, y, within_w)
        if not common:
            raise CertificationError(f"edge {x} - {y} has an empty link")
        c = reduce_vertex([x, y], common[0], x, rho, self.complex)
        self.record(Move(kind="subdivide_edge", before=[x, y], after=[x, c, y], witnesses=[[x, c, y]]))
        return loop[: t + 1] + [c] + loop[t + 1 :]

    def replace_vertex(self, loop: list[LaxVector], t: int, rho: RhoChoice, within_w: bool) -> list[LaxVector]:
        m = len(loop)
        p, x, n = loop[t - 1], loop[t], loop[(t + 1) % m]
        inner = self.link_path(x, p, n, within_w)
        moved = [reduce_vertex([x], y, x, rho, self.complex) for y in inner]
        segment = [p, *moved, n]
        witnesses = [[x, s, s2] if s != s2 else [x, s] for s, s2 in zip(segment, segment[1:])]
        self.record(Move(kind="replace_vertex", before=[p, x, n], after=segment, witnesses=witnesses))
        if t == 0:
            return moved + loop[1:]
        return loop[:t] + moved + loop[t + 1 :]

    def link_path(self, apex: LaxVector, start: LaxVector, end: LaxVector, within_w: bool) -> list[LaxVector]:
        """Interior vertices of a shortest path from start to end in the link of apex."""
        if start == end:
            return []
        parents: dict[LaxVector, LaxVector | None] = {start: None}
        queue = deque([start])
        while queue:
            current = queue.popleft()
            for nxt in self.complex.link_neighbors(apex, current, within_w):
                if nxt in parents:
                    continue
                parents[nxt] = current
                if nxt == end:
                    path = []
                    node = parents[end]
                    while node is not None and node != start:
                        path.append(node)
                        node = parents[node]
                    return path[::-1]
                queue.append(nxt)
        raise CertificationError(f"no path from {start} to {end} in the link of {apex}")

    def cone(self, loop: list[LaxVector]) -> list[LaxVector]:
        closed = [*loop, loop[0]]
        witnesses = [[x, y, self.a_g] if x != y else [x, self.a_g] for x, y in zip(closed, closed[1:])]
        self.record(Move(kind="cone", before=closed, after=[self.a_g], witnesses=witnesses))
        return [self.a_g]


def fill_loop(
    loop: SphereMap,
    spec: BasesSpec,
    budget: int | None = None,
    complex_: BasesComplex | None = None,
) -> FillLog:
    """
    Contract a simplicial loop to a point by certified elementary moves: rank reductions of
    b_g in the full complex, of a_g inside W, and finally a cone over ±a_g.

    Raises:
        InvalidInputError: when g - k < 3 or the loop is not simplicial in the complex
        StepBudgetExceededError: when the reduction does not finish within the budget
        CertificationError: when a move cannot be produced or fails its certificate
    """
    if spec.g - spec.delta_k < 3:
        raise InvalidInputError(f"1-connectivity needs g - k >= 3, got g = {spec.g}, k = {spec.delta_k}")
    cycle = loop.as_loop()
    filler = _LoopFiller(spec, budget or step_budget(spec, len(cycle)), complex_)
    loop.check_simplicial(filler.complex)

    if len(set(cycle)) == 1:
        return FillLog(final=cycle[0])
    current = filler.tidy(cycle)
    if len(current) > 1 and not spec.restrict_w:
        current = filler.reduce_level(current, filler.full_rho, within_w=False)
    if len(current) > 1:
        filler.enter_w_phase()
        current = filler.reduce_level(current, filler.w_rho, within_w=True)
    if len(current) > 1:
        current = filler.cone(current)
    log.debug("Filled loop", length=len(cycle), moves=len(filler.moves), steps=filler.steps)
    return FillLog(moves=filler.moves, final=current[0], steps=filler.steps)


def random_cycle(
    spec: BasesSpec,
    length: int,
    rng: random.Random,
    attempts: int | None = None,
    complex_: BasesComplex | None = None,
) -> list[LaxVector]:
    """
    A closed edge walk of the given length, consecutive vertices distinct.

    Raises:
        BudgetExceededError: when no closing walk is found within the attempt limit
    """
    complex_ = complex_ or BasesComplex(spec)
    vertices = complex_.vertices
    adjacency = {v: complex_.neighbors(v) for v in vertices}
    for _ in range(attempts or settings.bases.cycle_attempts):
        walk = [rng.choice(vertices)]
        while len(walk) < length and adjacency[walk[-1]]:
            walk.append(rng.choice(adjacency[walk[-1]]))
        if len(walk) == length and walk[-1] != walk[0] and walk[0] in adjacency[walk[-1]]:
            return walk
    raise BudgetExceededError(f"no closed walk of length {length} found")


class LevelReduction(BaseModel):
    """Coordinate reduction from Bases(g, L m) to Bases(g, L)."""

    vertex_map: dict[int, int]
    injective_on_simplices: bool
    surjective: bool
    witness: list[int] | None = None


def reduce_complex_level(source: SimplicialComplex, target: SimplicialComplex, modulus: int) -> LevelReduction:
    """
    Map every vertex of the higher-level complex to its reduction and check that simplices map
    injectively onto simplices and that the map is onto.
    """
    vertex_map = {}
    for v, label in source.labels.items():
        vertex_map[v] = target.vertex_for(canonical_lax(reduce_vector(label.rep, modulus)))
    for s in source:
        image = [vertex_map[v] for v in s]
        if len(set(image)) < len(s) or image not in target:
            return LevelReduction(
                vertex_map=vertex_map, injective_on_simplices=False, surjective=False, witness=list(s)
            )
    covered = {tuple(sorted(vertex_map[v] for v in s)) for s in source}
    surjective = all(s in covered for s in target)
    return LevelReduction(vertex_map=vertex_map, injective_on_simplices=True, surjective=surjective)
