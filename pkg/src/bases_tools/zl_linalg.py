"""
Exact arithmetic over Z_L in a fixed symplectic basis.

Vectors are written in the coordinate order (a_1, b_1, ..., a_g, b_g), so the standard
form is block diagonal. The modulus L = 0 stands for the integers; L = 1 (the zero ring)
is rejected everywhere.
"""

import re
from collections.abc import Iterable, Sequence
from functools import reduce
from itertools import combinations
from math import gcd, lcm
from typing import Annotated, Self

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, model_validator
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors as sympy_invariant_factors

from bases_tools.errors import InvalidInputError


class DimensionMismatchError(InvalidInputError):
    """
    Raised when vectors of different genus or modulus are combined.
    """


def _check_modulus(value: int) -> int:
    if value == 1:
        raise ValueError("L = 1 (the zero ring) is not supported")
    return value


Modulus = Annotated[int, Field(ge=0), AfterValidator(_check_modulus)]


def reduce_mod(value: int, modulus: int) -> int:
    """Representative of value in [0, L), or value itself over the integers."""
    return value % modulus if modulus else value


class ZLVector(BaseModel):
    """An element of (Z_L)^{2g}, coordinates ordered (a_1, b_1, ..., a_g, b_g)."""

    model_config = ConfigDict(frozen=True, validate_by_name=True, validate_by_alias=True)

    g: int = Field(gt=0)
    modulus: Modulus = Field(alias="L")
    coords: tuple[int, ...]

    @model_validator(mode="after")
    def _check_coords(self) -> Self:
        if len(self.coords) != 2 * self.g:
            raise ValueError(f"expected {2 * self.g} coordinates, got {len(self.coords)}")
        if self.modulus and any(not 0 <= c < self.modulus for c in self.coords):
            raise ValueError(f"coordinates must lie in [0, {self.modulus})")
        return self

    @classmethod
    def of(cls, coords: Iterable[int], modulus: int) -> "ZLVector":
        """Build a vector from arbitrary integers, reducing them modulo L."""
        values = tuple(reduce_mod(c, modulus) for c in coords)
        if not values or len(values) % 2:
            raise InvalidInputError(f"a vector needs an even, positive number of coordinates, got {len(values)}")
        return cls(g=len(values) // 2, modulus=modulus, coords=values)

    def __neg__(self) -> "ZLVector":
        return ZLVector.of((-c for c in self.coords), self.modulus)

    def __add__(self, other: "ZLVector") -> "ZLVector":
        _check_compatible(self, other)
        return ZLVector.of((x + y for x, y in zip(self.coords, other.coords)), self.modulus)

    def __rmul__(self, scalar: int) -> "ZLVector":
        return ZLVector.of((scalar * c for c in self.coords), self.modulus)

    def is_zero(self) -> bool:
        return not any(self.coords)


def _check_compatible(*vectors: ZLVector) -> None:
    first = vectors[0]
    for other in vectors[1:]:
        if other.g != first.g or other.modulus != first.modulus:
            raise DimensionMismatchError(
                f"vectors live in different modules: (g={first.g}, L={first.modulus}) "
                f"vs (g={other.g}, L={other.modulus})"
            )


def negate(v: ZLVector) -> ZLVector:
    return -v


def add(x: ZLVector, y: ZLVector) -> ZLVector:
    return x + y


def scale(v: ZLVector, scalar: int) -> ZLVector:
    return scalar * v


_SYMBOL = re.compile(r"^([ab])_?(\d+)$")


def basis_index(symbol: str, g: int) -> int:
    """Coordinate index of a basis symbol such as 'a_1' or 'b3'."""
    match = _SYMBOL.match(symbol)
    if match is None:
        raise InvalidInputError(f"not a basis symbol: {symbol!r}")
    letter, number = match.group(1), int(match.group(2))
    if not 1 <= number <= g:
        raise InvalidInputError(f"basis symbol {symbol!r} out of range for g = {g}")
    return 2 * (number - 1) + (0 if letter == "a" else 1)


def basis_vector(symbol: str, g: int, modulus: int) -> ZLVector:
    coords = [0] * (2 * g)
    coords[basis_index(symbol, g)] = 1
    return ZLVector(g=g, modulus=modulus, coords=tuple(coords))


def form_matrix(g: int) -> tuple[tuple[int, ...], ...]:
    """The matrix J with i(x, y) = x^T J y, block diagonal in the (a_i, b_i) order."""
    rows = [[0] * (2 * g) for _ in range(2 * g)]
    for i in range(g):
        rows[2 * i][2 * i + 1] = 1
        rows[2 * i + 1][2 * i] = -1
    return tuple(tuple(row) for row in rows)


def pairing(x: Sequence[int], y: Sequence[int], modulus: int) -> int:
    """Intersection form on raw coordinate sequences."""
    total = 0
    for i in range(0, len(x), 2):
        total += x[i] * y[i + 1] - x[i + 1] * y[i]
    return reduce_mod(total, modulus)


def intersection_form(x: ZLVector, y: ZLVector) -> int:
    """
    Algebraic intersection number i(x, y) = sum_i (x_{a_i} y_{b_i} - x_{b_i} y_{a_i}) mod L.

    Raises:
        DimensionMismatchError: when x and y do not share g and L
    """
    _check_compatible(x, y)
    return pairing(x.coords, y.coords, x.modulus)


def _content(values: Iterable[int], modulus: int) -> int:
    return reduce(gcd, values, modulus)


def is_primitive(v: ZLVector) -> bool:
    """
    A nonzero vector divisible only by units. Over Z_L this is gcd(coords, L) = 1,
    over the integers gcd(coords) = 1.
    """
    if v.is_zero():
        return False
    return _content(v.coords, v.modulus) == 1


class IntMatrix(BaseModel):
    """Dense integer matrix, used for lifts of Z_L matrices."""

    model_config = ConfigDict(frozen=True)

    entries: tuple[tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_shape(self) -> Self:
        if not self.entries or not self.entries[0]:
            raise ValueError("matrix must have at least one row and one column")
        width = len(self.entries[0])
        if any(len(row) != width for row in self.entries):
            raise ValueError("ragged matrix rows")
        return self

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "IntMatrix":
        return cls(entries=tuple(tuple(int(x) for x in row) for row in rows))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(entries=tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionMismatchError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        columns = list(zip(*other.entries))
        entries = tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in columns) for row in self.entries)
        return IntMatrix(entries=entries)

    def transpose(self) -> "IntMatrix":
        return IntMatrix(entries=tuple(zip(*self.entries)))

    def determinant(self) -> int:
        if self.rows != self.cols:
            raise DimensionMismatchError("determinant of a non-square matrix")
        return determinant(self.entries)

    def is_diagonal(self) -> bool:
        return all(x == 0 for i, row in enumerate(self.entries) for j, x in enumerate(row) if i != j)

    def diagonal(self) -> list[int]:
        return [self.entries[i][i] for i in range(min(self.rows, self.cols))]


def _domain_matrix(rows: Sequence[Sequence[int]]) -> DomainMatrix:
    return DomainMatrix([[ZZ(int(x)) for x in row] for row in rows], (len(rows), len(rows[0])), ZZ)


def determinant(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant over the integers."""
    if not rows:
        return 1
    return int(_domain_matrix(rows).det())


def minors_gcd(rows: Sequence[Sequence[int]], k: int) -> int:
    """gcd of all k x k minors of an integer matrix."""
    result = 0
    for row_set in combinations(range(len(rows)), k):
        for col_set in combinations(range(len(rows[0])), k):
            result = gcd(result, determinant([[rows[i][j] for j in col_set] for i in row_set]))
            if result == 1:
                return 1
    return result


def _smith(matrix: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """
    Diagonalise by unimodular row and column operations.
    Returns (D, U, V) with U A V = D.
    """
    a = [list(row) for row in matrix]
    m, n = len(a), len(a[0])
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i: int, j: int) -> None:
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src: int, dst: int, q: int) -> None:
        # row_dst += q * row_src
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(src: int, dst: int, q: int) -> None:
        for row in a:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    for t in range(min(m, n)):
        finished = False
        while True:
            pivot = None
            for i in range(t, m):
                for j in range(t, n):
                    if a[i][j] and (pivot is None or abs(a[i][j]) < abs(a[pivot[0]][pivot[1]])):
                        pivot = (i, j)
            if pivot is None:
                # the remaining block is zero
                finished = True
                break
            if pivot[0] != t:
                swap_rows(t, pivot[0])
            if pivot[1] != t:
                swap_cols(t, pivot[1])
            p = a[t][t]
            clean = True
            for i in range(t + 1, m):
                if a[i][t]:
                    add_row(t, i, -(a[i][t] // p))
                    clean = clean and a[i][t] == 0
            for j in range(t + 1, n):
                if a[t][j]:
                    add_col(t, j, -(a[t][j] // p))
                    clean = clean and a[t][j] == 0
            if not clean:
                continue
            offender = next((i for i in range(t + 1, m) for j in range(t + 1, n) if a[i][j] % p), None)
            if offender is None:
                break
            add_row(offender, t, 1)
        if finished:
            break
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return a, u, v


def smith_normal_form(a: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """
    Smith normal form over the integers.

    Returns:
        (U, D, V) with U A V = D, U and V unimodular, D diagonal with d_1 | d_2 | ... and d_i >= 0
    """
    d, u, v = _smith(a.entries)
    return IntMatrix.from_rows(u), IntMatrix.from_rows(d), IntMatrix.from_rows(v)


def invariant_factors(rows: Sequence[Sequence[int]]) -> list[int]:
    """Diagonal of the Smith normal form: nonnegative, d_1 | d_2 | ..., zeros last."""
    factors = [abs(int(d)) for d in sympy_invariant_factors(_domain_matrix(rows))]
    factors += [0] * (min(len(rows), len(rows[0])) - len(factors))
    # gcd/lcm passes turn any diagonal into the divisibility chain of the same module
    for i in range(len(factors)):
        for j in range(i + 1, len(factors)):
            factors[i], factors[j] = gcd(factors[i], factors[j]), lcm(factors[i], factors[j])
    return factors


def summand_rows(rows: Sequence[Sequence[int]], modulus: int) -> bool:
    """
    Free rank-k summand test on raw rows: the gcd m of the k x k minors of the integer
    lift (the product of the first k invariant factors) must be a unit mod L.
    """
    m = 1
    for factor in invariant_factors(rows):
        m *= factor
    if modulus == 0:
        return m == 1
    return gcd(m, modulus) == 1


def is_free_summand(vs: Sequence[ZLVector]) -> bool:
    """
    True iff span(vs) is a free direct summand of rank |vs|.

    Raises:
        InvalidInputError: when vs is empty or longer than 2g
        DimensionMismatchError: when the vectors do not share g and L
    """
    if not vs:
        raise InvalidInputError("summand test needs at least one vector")
    _check_compatible(*vs)
    if len(vs) > 2 * vs[0].g:
        raise InvalidInputError(f"{len(vs)} vectors cannot span a free summand of rank > 2g = {2 * vs[0].g}")
    return summand_rows([v.coords for v in vs], vs[0].modulus)


def canonical_coords(coords: Sequence[int], modulus: int) -> tuple[int, ...]:
    """Lexicographically least of v and -v, coordinates reduced into [0, L)."""
    positive = tuple(reduce_mod(c, modulus) for c in coords)
    negative = tuple(reduce_mod(-c, modulus) for c in coords)
    return min(positive, negative)


class LaxVector(BaseModel):
    """The pair {v, -v} of a primitive vector, stored by its canonical representative."""

    model_config = ConfigDict(frozen=True)

    rep: ZLVector

    @model_validator(mode="after")
    def _check_rep(self) -> Self:
        if not is_primitive(self.rep):
            raise ValueError(f"lax vectors need a primitive representative, got {self.rep.coords}")
        if canonical_coords(self.rep.coords, self.rep.modulus) != self.rep.coords:
            raise ValueError(f"representative {self.rep.coords} is not canonical")
        return self

    @property
    def g(self) -> int:
        return self.rep.g

    @property
    def modulus(self) -> int:
        return self.rep.modulus

    @property
    def coords(self) -> tuple[int, ...]:
        return self.rep.coords

    def representatives(self) -> tuple[ZLVector, ZLVector]:
        return self.rep, -self.rep

    def __lt__(self, other: "LaxVector") -> bool:
        return self.coords < other.coords

    def __str__(self) -> str:
        return f"±{self.coords}"


def canonical_lax(v: ZLVector) -> LaxVector:
    """
    The lax vector ±v, represented by min(v, -v).

    Raises:
        InvalidInputError: when v is not primitive
    """
    if not is_primitive(v):
        raise InvalidInputError(f"{v.coords} is not primitive mod {v.modulus}")
    coords = canonical_coords(v.coords, v.modulus)
    return LaxVector(rep=ZLVector(g=v.g, modulus=v.modulus, coords=coords))


def lax_from_coords(coords: Sequence[int], modulus: int) -> LaxVector:
    return canonical_lax(ZLVector.of(coords, modulus))


def reduce_vector(v: ZLVector, modulus: int) -> ZLVector:
    """Reduce v to a smaller level; the target modulus must divide the source one."""
    if modulus < 2 or (v.modulus and v.modulus % modulus):
        raise InvalidInputError(f"cannot reduce from L = {v.modulus} to L = {modulus}")
    return ZLVector.of(v.coords, modulus)
