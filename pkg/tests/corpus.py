"""Seeded random corpus of even hyperbolic lattices with a primitive H of norm 8."""
from __future__ import annotations

import random
from dataclasses import dataclass

from k3moduli.lattice import IntegerLattice, LatVec, content, enumerate_box, invariants

SEED = 20240917
MAX_ENTRY = 12


@dataclass(frozen=True)
class Member:
    L: IntegerLattice
    H: LatVec


def random_member(rng: random.Random, rank: int) -> Member | None:
    g = [[0] * rank for _ in range(rank)]
    for i in range(rank):
        g[i][i] = 2 * rng.randint(-MAX_ENTRY // 2, MAX_ENTRY // 2)
        for j in range(i + 1, rank):
            g[i][j] = g[j][i] = rng.randint(-MAX_ENTRY, MAX_ENTRY)
    if rng.random() < 0.5:
        g[0][0] = 8
    L = IntegerLattice(g)
    inv = invariants(L)
    if inv.det == 0 or not inv.hyperbolic:
        return None
    hs = [v for v in enumerate_box(L, 2, 8) if content(v) == 1]
    if not hs:
        return None
    return Member(L, rng.choice(hs))


def corpus(size: int, seed: int = SEED, ranks: tuple[int, ...] = (2, 3)) -> list[Member]:
    rng = random.Random(seed)
    out: list[Member] = []
    while len(out) < size:
        m = random_member(rng, rng.choice(ranks))
        if m is not None:
            out.append(m)
    return out


FIXTURES = [
    Member(IntegerLattice([[8, 1], [1, -2]]), (1, 0)),
    Member(IntegerLattice([[8, 1], [1, -4]]), (1, 0)),
    Member(IntegerLattice([[8]]), (1,)),
    Member(IntegerLattice([[8, -5], [-5, 2]]), (1, 0)),
]
