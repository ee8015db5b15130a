"""
The Heisenberg-type group K of pairs (n, w), n an integer and w in
V'' = span(a_1, ..., a_k, a_{k+1}, b_{k+1}, ..., a_g, b_g), with product
(n1, w1) (n2, w2) = (n1 + n2 + i(w1, w2), w1 + w2), and the rational coinvariants of its
abelianization under level-L transvection powers.
"""

from collections.abc import Sequence
from itertools import combinations
from typing import Literal, Self

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator
from sympy import Rational

from bases_tools.config import settings
from bases_tools.errors import InvalidInputError
from bases_tools.simplicial import rational_rank
from bases_tools.sp_group import is_symplectic, transvection_matrix
from bases_tools.zl_linalg import pairing

log = structlog.get_logger()


class UnsupportedContextError(InvalidInputError):
    """
    Raised for k = g, where the form on V'' vanishes and K is abelian.
    """


class InvalidGeneratorError(InvalidInputError):
    """
    Raised when a generator is not symplectic, moves some a_j or leaves V''.
    """


class KContext(BaseModel):
    model_config = ConfigDict(frozen=True)

    g: int = Field(gt=0)
    k: int = Field(ge=1)

    @model_validator(mode="after")
    def _check_k(self) -> Self:
        if self.k > self.g:
            raise ValueError(f"k = {self.k} exceeds g = {self.g}")
        return self

    @property
    def indices(self) -> tuple[int, ...]:
        """Ambient coordinate index of each basis vector of V''."""
        fixed = [2 * j for j in range(self.k)]
        free = [i for j in range(self.k, self.g) for i in (2 * j, 2 * j + 1)]
        return tuple(fixed + free)

    @property
    def dimension(self) -> int:
        return 2 * self.g - self.k

    @property
    def basis_labels(self) -> list[str]:
        return [f"{'ab'[i % 2]}_{i // 2 + 1}" for i in self.indices]

    def embed(self, w: Sequence[int]) -> list[int]:
        coords = [0] * (2 * self.g)
        for i, c in zip(self.indices, w, strict=True):
            coords[i] = c
        return coords

    def restrict(self, coords: Sequence[int]) -> tuple[int, ...]:
        if any(coords[2 * j + 1] for j in range(self.k)):
            raise InvalidInputError(f"{tuple(coords)} does not lie in V''")
        return tuple(coords[i] for i in self.indices)

    def form(self, x: Sequence[int], y: Sequence[int]) -> int:
        return pairing(self.embed(x), self.embed(y), 0)


class KElement(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = 0
    w: tuple[int, ...]


def _check(ctx: KContext, *xs: KElement) -> None:
    for x in xs:
        if len(x.w) != ctx.dimension:
            raise InvalidInputError(f"element has {len(x.w)} coordinates, V'' has dimension {ctx.dimension}")


def k_identity(ctx: KContext) -> KElement:
    return KElement(n=0, w=(0,) * ctx.dimension)


def k_multiply(x: KElement, y: KElement, ctx: KContext) -> KElement:
    _check(ctx, x, y)
    return KElement(n=x.n + y.n + ctx.form(x.w, y.w), w=tuple(a + b for a, b in zip(x.w, y.w)))


def k_inverse(x: KElement, ctx: KContext) -> KElement:
    _check(ctx, x)
    return KElement(n=-x.n, w=tuple(-a for a in x.w))


def k_commutator(x: KElement, y: KElement, ctx: KContext) -> KElement:
    """x y x^-1 y^-1; for x = (0, w1), y = (0, w2) this is (2 i(w1, w2), 0)."""
    xy = k_multiply(x, y, ctx)
    return k_multiply(k_multiply(xy, k_inverse(x, ctx), ctx), k_inverse(y, ctx), ctx)


def abelianization_image(x: KElement, ctx: KContext) -> tuple[Rational, ...]:
    """
    Image in H_1(K; Q) = V'' (x) Q. The center dies rationally since (1, 0) is half a commutator.

    Raises:
        UnsupportedContextError: when k = g
    """
    _check(ctx, x)
    if ctx.k == ctx.g:
        raise UnsupportedContextError("the form on V'' vanishes for k = g")
    return tuple(Rational(c) for c in x.w)


def k_embedding(x: KElement, ctx: KContext) -> np.ndarray:
    """
    The symplectic integer matrix psi_v for v = w + n a_1: a_1 -> a_1, b_1 -> b_1 + v and
    s -> s + i(v, s) a_1 on the remaining basis vectors. A homomorphism K -> Sp_{2g}(Z) fixing a_1, ..., a_k.
    """
    _check(ctx, x)
    v = ctx.embed(x.w)
    v[0] += x.n
    size = 2 * ctx.g
    psi = np.eye(size, dtype=np.int64)
    psi[:, 1] += np.array(v, dtype=np.int64)
    for s in range(2, size):
        e = [0] * size
        e[s] = 1
        psi[0, s] += pairing(v, e, 0)
    return psi


def check_generator(matrix: np.ndarray | Sequence[Sequence[int]], ctx: KContext) -> np.ndarray:
    """
    Raises:
        InvalidGeneratorError: when the matrix is not symplectic over Z, moves some a_j with j <= k,
            or does not preserve V''
    """
    a = np.asarray(matrix, dtype=np.int64)
    if a.shape != (2 * ctx.g, 2 * ctx.g) or not is_symplectic(a, 0):
        raise InvalidGeneratorError("generator is not a symplectic integer matrix")
    for j in range(ctx.k):
        e = np.zeros(2 * ctx.g, dtype=np.int64)
        e[2 * j] = 1
        if not np.array_equal(a[:, 2 * j], e):
            raise InvalidGeneratorError(f"generator moves a_{j + 1}")
    for i in ctx.indices:
        if any(a[2 * j + 1, i] for j in range(ctx.k)):
            raise InvalidGeneratorError("generator does not preserve V''")
    return a


def coinvariant_dimension(ctx: KContext, action_gens: Sequence[np.ndarray | Sequence[Sequence[int]]]) -> int:
    """
    dim of (V'' (x) Q) / span{A w - w}, by the exact rational rank of the displacement vectors.
    Displacements of the generators span those of the whole generated group.

    Raises:
        InvalidGeneratorError: when a generator fails check_generator
    """
    rows: dict[int, dict[int, int]] = {}
    for a in (check_generator(gen, ctx) for gen in action_gens):
        for i in ctx.indices:
            column = a[:, i].copy()
            column[i] -= 1
            row = {c: int(column[idx]) for c, idx in enumerate(ctx.indices) if column[idx]}
            if row:
                rows[len(rows)] = row
    return ctx.dimension - rational_rank(rows, (len(rows), ctx.dimension))


def transvection_power(w: Sequence[int], modulus: int, ctx: KContext) -> np.ndarray:
    """T_v^L for v in V'': x -> x + L i(x, v) v, which lies in the level-L stabilizer of a_1, ..., a_k."""
    return transvection_matrix(ctx.embed(w), power=modulus)


def default_generators(ctx: KContext, modulus: int, level: int = 1) -> list[np.ndarray]:
    """
    L-th transvection powers along basis vectors of V'' and their pairwise sums; level 2 adds
    pairwise differences and triple sums.
    """
    basis = [tuple(int(i == j) for j in range(ctx.dimension)) for i in range(ctx.dimension)]
    directions = list(basis)
    directions += [tuple(x + y for x, y in zip(u, v)) for u, v in combinations(basis, 2)]
    if level >= 2:
        directions += [tuple(x - y for x, y in zip(u, v)) for u, v in combinations(basis, 2)]
        directions += [tuple(x + y + z for x, y, z in zip(u, v, t)) for u, v, t in combinations(basis, 3)]
    return [transvection_power(w, modulus, ctx) for w in directions]


class CoinvariantReport(BaseModel):
    g: int
    k: int
    modulus: int
    dimension: int
    ambient_dimension: int
    generators: int
    level: int
    status: Literal["proved_zero", "not_reached"]
    oracle: str = "exact rational rank of displacement vectors"


def coinvariants(ctx: KContext, modulus: int, max_level: int | None = None) -> CoinvariantReport:
    """
    Try the default generator sets of increasing level until the coinvariants vanish.

    Raises:
        UnsupportedContextError: when k = g
    """
    if ctx.k == ctx.g:
        raise UnsupportedContextError("the form on V'' vanishes for k = g")
    max_level = max_level or settings.heisenberg.max_generator_level
    for level in range(1, max_level + 1):
        gens = default_generators(ctx, modulus, level)
        dimension = coinvariant_dimension(ctx, gens)
        report = CoinvariantReport(
            g=ctx.g,
            k=ctx.k,
            modulus=modulus,
            dimension=dimension,
            ambient_dimension=ctx.dimension,
            generators=len(gens),
            level=level,
            status="proved_zero" if dimension == 0 else "not_reached",
        )
        if dimension == 0:
            return report
        log.info("Coinvariants not yet zero, enlarging generator set", level=level, dimension=dimension)
    return report
