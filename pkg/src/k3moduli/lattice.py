"""Exact arithmetic on integer lattices given by a symmetric Gram matrix.

Vectors are plain tuples of Python ints in the lattice's distinguished basis.
Everything here is exact; numpy is only used to vectorize box scans, and only
when the values provably fit in int64.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

LatVec = tuple[int, ...]

_INT64_SAFE = 1 << 62


class LatticeError(ValueError):
    """Raised for malformed lattices or vectors (bad shape, zero vector, ...)."""


def as_vec(x: Iterable[int]) -> LatVec:
    out = []
    for c in x:
        if isinstance(c, bool) or int(c) != c:
            raise LatticeError(f"non-integer coordinate {c!r}")
        out.append(int(c))
    return tuple(out)


def add(x: Sequence[int], y: Sequence[int]) -> LatVec:
    return tuple(a + b for a, b in zip(x, y, strict=True))


def sub(x: Sequence[int], y: Sequence[int]) -> LatVec:
    return tuple(a - b for a, b in zip(x, y, strict=True))


def scale(c: int, x: Sequence[int]) -> LatVec:
    return tuple(c * a for a in x)


def neg(x: Sequence[int]) -> LatVec:
    return tuple(-a for a in x)


def content(x: Sequence[int]) -> int:
    """gcd of the coordinates (0 for the zero vector)."""
    g = 0
    for a in x:
        g = gcd(g, a)
    return g


def det(matrix: Sequence[Sequence[int]]) -> int:
    """Exact determinant of a square integer matrix (Bareiss elimination)."""
    m = [list(row) for row in matrix]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class Invariants:
    det: int
    signature: tuple[int, int, int]
    even: bool
    hyperbolic: bool


@dataclass(frozen=True)
class IntegerLattice:
    """A free Z-module with a symmetric integer bilinear form.

    The Gram matrix is stored as a tuple of tuples, so instances are hashable
    and can be shared freely between threads.
    """

    gram: tuple[tuple[int, ...], ...]

    def __init__(self, gram: Sequence[Sequence[int]]):
        rows = tuple(as_vec(row) for row in gram)
        n = len(rows)
        if n == 0:
            raise LatticeError("lattice must have positive rank")
        if any(len(row) != n for row in rows):
            raise LatticeError("Gram matrix must be square")
        for i in range(n):
            for j in range(i + 1, n):
                if rows[i][j] != rows[j][i]:
                    raise LatticeError(
                        f"Gram matrix not symmetric at ({i},{j}): {rows[i][j]} != {rows[j][i]}"
                    )
        object.__setattr__(self, "gram", rows)

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def _check(self, x: Sequence[int]) -> None:
        if len(x) != self.rank:
            raise LatticeError(f"vector {tuple(x)} has length {len(x)}, lattice rank is {self.rank}")

    def apply(self, x: Sequence[int]) -> LatVec:
        """gram * x, i.e. the linear form y -> pair(x, y) in coordinates."""
        self._check(x)
        return tuple(sum(g * c for g, c in zip(row, x)) for row in self.gram)

    def __repr__(self) -> str:
        return f"IntegerLattice({[list(r) for r in self.gram]})"


def pair(L: IntegerLattice, x: Sequence[int], y: Sequence[int]) -> int:
    L._check(y)
    return sum(a * b for a, b in zip(L.apply(x), y))


def norm(L: IntegerLattice, x: Sequence[int]) -> int:
    return pair(L, x, x)


def signature(gram: Sequence[Sequence[int]]) -> tuple[int, int, int]:
    """(positive, negative, zero) inertia counts by congruence diagonalization over Q."""
    a = [[Fraction(v) for v in row] for row in gram]
    n = len(a)
    pos = negc = 0
    k = 0
    while k < n:
        if a[k][k] == 0:
            # bring a nonzero diagonal entry to position k
            j = next((j for j in range(k + 1, n) if a[j][j] != 0), None)
            if j is not None:
                a[k], a[j] = a[j], a[k]
                for row in a:
                    row[k], row[j] = row[j], row[k]
            else:
                # all remaining diagonals vanish: use an off-diagonal entry
                j = next((j for j in range(k + 1, n) if a[k][j] != 0), None)
                if j is None:
                    k += 1
                    continue
                # e_k <- e_k + e_j turns a_kk into 2 a_kj != 0
                for i in range(n):
                    a[k][i] += a[j][i]
                for i in range(n):
                    a[i][k] += a[i][j]
        p = a[k][k]
        for i in range(k + 1, n):
            if a[i][k] != 0:
                f = a[i][k] / p
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
                for j in range(k, n):
                    a[j][i] = a[i][j]
        if p > 0:
            pos += 1
        else:
            negc += 1
        k += 1
    return pos, negc, n - pos - negc


def invariants(L: IntegerLattice) -> Invariants:
    sig = signature(L.gram)
    return Invariants(
        det=det(L.gram),
        signature=sig,
        even=L.is_even,
        hyperbolic=sig == (1, L.rank - 1, 0),
    )


def divisibility(L: IntegerLattice, x: Sequence[int]) -> int:
    """Positive generator of the ideal x . L in Z."""
    if not any(x):
        raise LatticeError("divisibility of the zero vector is undefined")
    return content(L.apply(x))


def is_primitive(L: IntegerLattice, x: Sequence[int]) -> bool:
    L._check(x)
    if not any(x):
        raise LatticeError("primitivity of the zero vector is undefined")
    return content(x) == 1


# ---------------------------------------------------------------------------
# saturation


def _diagonalize(rows: list[list[int]], ncols: int) -> tuple[list[int], list[list[int]]]:
    """Reduce ``rows`` to diagonal form P*A*Q = diag(d).

    Returns the nonzero diagonal entries and Q^{-1}; row i of Q^{-1} is a basis
    vector of Z^n, and span(A) = span(d_i * Qinv[i]).
    """
    a = [list(r) for r in rows]
    m = len(a)
    qinv = [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    diag: list[int] = []
    t = 0
    while t < min(m, ncols):
        piv = None
        for i in range(t, m):
            for j in range(t, ncols):
                if a[i][j] != 0 and (piv is None or abs(a[i][j]) < abs(a[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        i, j = piv
        a[t], a[i] = a[i], a[t]
        if j != t:
            for row in a:
                row[t], row[j] = row[j], row[t]
            qinv[t], qinv[j] = qinv[j], qinv[t]
        while True:
            p = a[t][t]
            dirty = False
            for i in range(t + 1, m):
                q = a[i][t] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                dirty |= a[i][t] != 0
            for j in range(t + 1, ncols):
                q = a[t][j] // p
                if q:
                    # col_j -= q col_t  <=>  Qinv row_t += q row_j
                    for row in a:
                        row[j] -= q * row[t]
                    qinv[t] = [x + q * y for x, y in zip(qinv[t], qinv[j])]
                dirty |= a[t][j] != 0
            if not dirty:
                break
            # a remainder smaller than the pivot exists; move it to (t, t)
            best = None
            for i in range(t + 1, m):
                if a[i][t] != 0 and (best is None or abs(a[i][t]) < abs(best[2])):
                    best = (i, t, a[i][t])
            for j in range(t + 1, ncols):
                if a[t][j] != 0 and (best is None or abs(a[t][j]) < abs(best[2])):
                    best = (t, j, a[t][j])
            i, j, _ = best
            if i != t:
                a[t], a[i] = a[i], a[t]
            else:
                for row in a:
                    row[t], row[j] = row[j], row[t]
                qinv[t], qinv[j] = qinv[j], qinv[t]
        diag.append(a[t][t])
        t += 1
    return diag, qinv


def hermite_form(rows: Sequence[Sequence[int]]) -> list[LatVec]:
    """Row Hermite normal form (positive pivots, reduced above) of independent rows."""
    a = [list(r) for r in rows]
    if not a:
        return []
    n = len(a[0])
    r = 0
    for col in range(n):
        if r == len(a):
            break
        while True:
            nz = [i for i in range(r, len(a)) if a[i][col] != 0]
            if not nz:
                break
            i = min(nz, key=lambda i: abs(a[i][col]))
            a[r], a[i] = a[i], a[r]
            done = True
            for i in range(r + 1, len(a)):
                q = a[i][col] // a[r][col]
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                if a[i][col] != 0:
                    done = False
            if done:
                break
        if a[r][col] == 0:
            continue
        if a[r][col] < 0:
            a[r] = [-x for x in a[r]]
        for i in range(r):
            q = a[i][col] // a[r][col]
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
    return [tuple(row) for row in a[:r]]


@dataclass(frozen=True)
class Sublattice:
    """Primitive sublattice: a saturated basis plus data about the generators."""

    basis: tuple[LatVec, ...]
    gram_restricted: tuple[tuple[int, ...], ...]
    det: int
    index: int

    @property
    def rank(self) -> int:
        return len(self.basis)


def saturate(L: IntegerLattice, gens: Sequence[Sequence[int]]) -> Sublattice:
    """Primitive closure of the span of ``gens`` inside L.

    ``index`` is [closure : span of gens].
    """
    gens = [as_vec(g) for g in gens]
    if not gens:
        raise LatticeError("saturate needs at least one generator")
    for g in gens:
        L._check(g)
    if all(not any(g) for g in gens):
        raise LatticeError("all generators are zero")
    diag, qinv = _diagonalize([list(g) for g in gens], L.rank)
    index = 1
    for d in diag:
        index *= abs(d)
    basis = tuple(hermite_form(qinv[: len(diag)]))
    gram = tuple(tuple(pair(L, u, v) for v in basis) for u in basis)
    return Sublattice(basis=basis, gram_restricted=gram, det=det(gram), index=index)


def divisibility_in(L: IntegerLattice, x: Sequence[int], sub: Sublattice) -> int:
    """Generator of x . S for a sublattice S (0 if x is orthogonal to S)."""
    return content(pair(L, x, b) for b in sub.basis)


# ---------------------------------------------------------------------------
# enumeration


def _fits_int64(L: IntegerLattice, bound: int, extra: int = 0) -> bool:
    g = max(abs(v) for row in L.gram for v in row)
    n = L.rank
    return n * n * (g + 1) * bound * max(bound, abs(extra), 1) < _INT64_SAFE


def scan_box(
    L: IntegerLattice,
    bound: int,
    keep: Callable[[np.ndarray, np.ndarray], np.ndarray],
    *,
    extra: int = 0,
) -> list[LatVec]:
    """Vectors of the box |x_i| <= bound selected by ``keep``, in lexicographic order.

    ``keep(X, G)`` receives a chunk of candidate rows and the Gram matrix as
    numpy arrays and returns a boolean mask. ``extra`` bounds the size of any
    additional linear coefficients the predicate uses, for the overflow check.
    Arrays are int64 when that is provably safe and object (Python ints)
    otherwise.
    """
    if bound < 0:
        raise LatticeError("bound must be nonnegative")
    n = L.rank
    dtype = np.int64 if _fits_int64(L, bound, extra) else object
    G = np.array(L.gram, dtype=dtype)
    side = np.arange(-bound, bound + 1, dtype=np.int64)
    out: list[LatVec] = []
    if n == 1:
        chunks: Iterator[np.ndarray] = iter([side.reshape(-1, 1)])
    else:
        tail = np.stack(np.meshgrid(*([side] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1)

        def gen() -> Iterator[np.ndarray]:
            for first in side:
                yield np.concatenate([np.full((len(tail), 1), first, dtype=np.int64), tail], axis=1)

        chunks = gen()
    for X in chunks:
        X = X.astype(dtype)
        mask = keep(X, G)
        out.extend(tuple(int(c) for c in row) for row in X[mask])
    return out


def quadratic_values(X: np.ndarray, G: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", X @ G, X) if X.dtype != object else ((X @ G) * X).sum(axis=1)


def enumerate_box(L: IntegerLattice, bound: int, norm_target: int | None = None) -> list[LatVec]:
    """All vectors with every |coordinate| <= bound (lexicographic order),
    optionally restricted to those of norm ``norm_target``."""
    if norm_target is None:
        if bound < 0:
            raise LatticeError("bound must be nonnegative")
        return [tuple(v) for v in itertools.product(range(-bound, bound + 1), repeat=L.rank)]
    return scan_box(L, bound, lambda X, G: quadratic_values(X, G) == norm_target)


def reflect(L: IntegerLattice, x: Sequence[int], root: Sequence[int]) -> LatVec:
    """Reflection in a (-2)-vector: x -> x + (x.root) root."""
    if norm(L, root) != -2:
        raise LatticeError(f"reflection needs a root of norm -2, got {norm(L, root)}")
    c = pair(L, x, root)
    return tuple(a + c * d for a, d in zip(x, root))
