"""(-2)-roots, nef certificates and the non-pseudo-effectivity test for h1^2 = -4.

All certificates are relative to a finite set of roots (those inside a
coordinate box); a ``True`` from :func:`is_nef_certified` means "no enumerated
wall separates x from the reference chamber", nothing more.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Sequence

from .lattice import (
    IntegerLattice,
    LatVec,
    LatticeError,
    as_vec,
    content,
    enumerate_box,
    neg,
    norm,
    pair,
    reflect,
    saturate,
)

NOT_PSEUDO_EFFECTIVE_PAIR = "NotPseudoEffectivePair"
WALL_INSIDE_NEF = "WallInsideNef"
INCONCLUSIVE = "Inconclusive"

DEFAULT_DEPTH = 8
MAX_WITNESS_BOUND = 6
MAX_ORBIT_VISITS = 10_000


class AmbiguousOrientation(LatticeError):
    """The reference class lies on the wall of the root."""


@dataclass(frozen=True)
class WallSet:
    bound: int
    roots: tuple[LatVec, ...]
    ambiguous: frozenset[LatVec] = frozenset()
    complete_within_bound: bool = False


@dataclass(frozen=True)
class EffectivityCert:
    subject: LatVec
    status: str
    root_bound: int
    H1: LatVec | None = None
    H2: LatVec | None = None
    wall: LatVec | None = None

    @property
    def conclusive(self) -> bool:
        return self.status != INCONCLUSIVE

    def to_dict(self) -> dict:
        d: dict = {"subject": list(self.subject), "status": self.status, "root_bound": self.root_bound}
        if self.status == WALL_INSIDE_NEF:
            d["wall"] = list(self.wall)
        elif self.status == NOT_PSEUDO_EFFECTIVE_PAIR:
            d["H1"] = list(self.H1)
            d["H2"] = list(self.H2)
        return d


def orient_effective(L: IntegerLattice, H: Sequence[int], root: Sequence[int]) -> LatVec:
    """The sign of ``root`` that pairs positively with H (effective for ample H)."""
    root = as_vec(root)
    if norm(L, root) != -2:
        raise LatticeError(f"{root} is not a (-2)-class")
    hd = pair(L, H, root)
    if hd == 0:
        raise AmbiguousOrientation(f"H is orthogonal to the root {root}")
    return root if hd > 0 else neg(root)


def _lex_positive(v: LatVec) -> LatVec:
    for c in v:
        if c:
            return v if c > 0 else neg(v)
    return v


def minus_two_classes(L: IntegerLattice, bound: int, reference: Sequence[int]) -> WallSet:
    """Roots in the box, one per ± pair, oriented by the reference class.

    Roots orthogonal to the reference get the lexicographic sign and are
    marked ambiguous.
    """
    roots: set[LatVec] = set()
    ambiguous: set[LatVec] = set()
    for d in enumerate_box(L, bound, -2):
        try:
            roots.add(orient_effective(L, reference, d))
        except AmbiguousOrientation:
            r = _lex_positive(d)
            roots.add(r)
            ambiguous.add(r)
    return WallSet(bound=bound, roots=tuple(sorted(roots)), ambiguous=frozenset(ambiguous))


def is_nef_certified(L: IntegerLattice, x: Sequence[int], walls: WallSet) -> bool:
    if norm(L, x) < 0:
        raise LatticeError(f"nef test needs a class of nonnegative square, got {norm(L, x)}")
    for d in walls.roots:
        p = pair(L, x, d)
        if p < 0 or (p != 0 and d in walls.ambiguous):
            return False
    return True


def wall_generator(L: IntegerLattice, H: Sequence[int], h1: Sequence[int]) -> LatVec:
    """Primitive generator of h1^⊥ in a rank-2 lattice, oriented so H.w > 0."""
    if L.rank != 2:
        raise NotImplementedError("wall generator is only defined in rank 2")
    if norm(L, h1) >= 0:
        raise LatticeError(f"wall generator needs h1^2 < 0, got {norm(L, h1)}")
    a, b = L.apply(h1)
    g = content((a, b))
    w = (b // g, -a // g)
    hw = pair(L, H, w)
    if hw == 0:
        raise LatticeError("H is orthogonal to the wall generator")
    return w if hw > 0 else neg(w)


def _kernel_basis(L: IntegerLattice, h1: LatVec) -> tuple[LatVec, ...]:
    """Integral basis of h1^⊥, independent of the sign of h1."""
    a = _lex_positive(L.apply(h1))
    j = next(i for i, c in enumerate(a) if c)
    gens = []
    for i in range(L.rank):
        if i != j:
            v = [0] * L.rank
            v[j], v[i] = -a[i], a[j]
            gens.append(tuple(v))
    return saturate(L, gens).basis


def _wall_points(L: IntegerLattice, H: LatVec, h1: LatVec, walls: WallSet, bound: int) -> Iterator[LatVec]:
    """Classes x on the wall h1^⊥ with x^2 > 0, H.x > 0, strictly positive on
    every oriented root and orthogonal to every ambiguous one.

    The projection of H to the wall comes first, then a box over a basis of
    h1^⊥, ordered by shell and lexicographically.
    """
    proj = tuple(4 * a + pair(L, H, h1) * b for a, b in zip(H, h1))
    g = content(proj)
    points = [tuple(c // g for c in proj)]
    basis = _kernel_basis(L, h1)
    coeffs = sorted(
        itertools.product(range(-bound, bound + 1), repeat=len(basis)),
        key=lambda c: (max(abs(t) for t in c), c),
    )
    for c in coeffs:
        if any(c):
            points.append(tuple(sum(t * b[i] for t, b in zip(c, basis)) for i in range(L.rank)))
    for x in points:
        if norm(L, x) <= 0 or pair(L, H, x) <= 0:
            continue
        if all(
            (pair(L, x, d) == 0) if d in walls.ambiguous else (pair(L, x, d) > 0)
            for d in walls.roots
        ):
            yield x


def _nef_pair(L: IntegerLattice, H: LatVec, h1: LatVec, walls: WallSet, bound: int):
    """Nef classes H1, H2 = k x ± h1 around a wall point x, or None."""
    for x in _wall_points(L, H, h1, walls, bound):
        k = 2
        for d in walls.roots:
            xd, hd = pair(L, x, d), pair(L, h1, d)
            if d in walls.ambiguous:
                if hd != 0:
                    break
                continue
            k = max(k, -(-abs(hd) // xd))
        else:
            H1 = tuple(k * a + b for a, b in zip(x, h1))
            H2 = tuple(k * a - b for a, b in zip(x, h1))
            if is_nef_certified(L, H1, walls) and is_nef_certified(L, H2, walls):
                return H1, H2
    return None


def is_not_pseudo_effective(
    L: IntegerLattice,
    H: Sequence[int],
    h1: Sequence[int],
    bound: int,
    walls: WallSet | None = None,
    witness_bound: int | None = None,
) -> EffectivityCert:
    """Certify that neither h1 nor -h1 is pseudo-effective (h1^2 = -4).

    Rank 2: the wall h1^⊥ is spanned by a positive class w; if w is nef then
    the wall cuts the nef cone and both signs of h1 are negative somewhere on it.
    Any rank: find a class x on h1^⊥ pairing strictly positively with every
    root; then H1 = k x + h1 and H2 = k x - h1 are nef for k large, with
    H1.h1 = -4 < 0 < 4 = H2.h1.
    """
    h1 = as_vec(h1)
    if norm(L, h1) != -4:
        raise LatticeError(f"non-pseudo-effectivity test needs h1^2 = -4, got {norm(L, h1)}")
    if walls is None:
        walls = minus_two_classes(L, bound, H)
    if L.rank == 2:
        w = wall_generator(L, H, h1)
        if is_nef_certified(L, w, walls):
            return EffectivityCert(h1, WALL_INSIDE_NEF, walls.bound, wall=w)
        return EffectivityCert(h1, INCONCLUSIVE, walls.bound)
    wb = min(bound, MAX_WITNESS_BOUND) if witness_bound is None else witness_bound
    found = _nef_pair(L, as_vec(H), h1, walls, wb)
    if found is not None:
        return EffectivityCert(h1, NOT_PSEUDO_EFFECTIVE_PAIR, walls.bound, H1=found[0], H2=found[1])
    return EffectivityCert(h1, INCONCLUSIVE, walls.bound)


@dataclass(frozen=True)
class OrbitVisit:
    h1: LatVec
    depth: int
    norm: int
    conditions_hold: bool
    certificate: EffectivityCert | None


@dataclass(frozen=True)
class OrbitResult:
    h1: LatVec | None
    certificate: EffectivityCert | None
    visits: tuple[OrbitVisit, ...]

    @property
    def found(self) -> bool:
        return self.h1 is not None


def orbit_search(
    L: IntegerLattice,
    H: Sequence[int],
    h1_seed: Sequence[int],
    bound: int,
    depth: int = DEFAULT_DEPTH,
    walls: WallSet | None = None,
    box: int | None = None,
) -> OrbitResult:
    """Breadth-first walk of the W^(-2)-orbit of h1_seed looking for a certified image.

    Every visited image is re-checked: its norm, and the full h1 condition set
    (the reflections fix the form but move H, so H.h1 parity and the closure
    condition can fail on an image). Only images satisfying the conditions are
    tested for non-pseudo-effectivity. Images leaving the coordinate box
    ``box`` (default 2*bound + max|H|) are not expanded.
    """
    from .criterion import check_h1  # circular at import time

    seed = as_vec(h1_seed)
    if norm(L, seed) != -4:
        raise LatticeError(f"orbit seed must have norm -4, got {norm(L, seed)}")
    if walls is None:
        walls = minus_two_classes(L, bound, H)
    if box is None:
        box = 2 * bound + max(abs(c) for c in H)
    visits: list[OrbitVisit] = []
    seen = {seed}
    queue = deque([(seed, 0)])
    while queue and len(visits) < MAX_ORBIT_VISITS:
        x, k = queue.popleft()
        n = norm(L, x)
        ok = n == -4 and check_h1(L, H, x).passes
        cert = is_not_pseudo_effective(L, H, x, bound, walls=walls) if ok else None
        visits.append(OrbitVisit(x, k, n, ok, cert))
        if cert is not None and cert.conclusive:
            return OrbitResult(x, cert, tuple(visits))
        if k == depth:
            continue
        for d in walls.roots:
            y = reflect(L, x, d)
            if y not in seen and max(abs(c) for c in y) <= box:
                seen.add(y)
                queue.append((y, k + 1))
    return OrbitResult(None, None, tuple(visits))
