"""Naive brute-force witness search, independent of the optimized search path.

No numpy, no Smith/Hermite reduction and no pre-filters: every box vector is
checked against every condition from scratch. The closure [H,h1]_pr is
described through its classes modulo span(H, h1): each class contains a
unique (a H + b h1)/M with 0 <= a, b < M, where M is the largest integer
whose square divides det Gram(H, h1) (the index of the span divides M).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd, isqrt
from typing import Sequence


def _form(gram: Sequence[Sequence[int]], x: Sequence[int], y: Sequence[int]) -> int:
    n = len(gram)
    return sum(x[i] * gram[i][j] * y[j] for i in range(n) for j in range(n))


@dataclass(frozen=True)
class ClosureData:
    index: int
    det: int
    divisibility: int


def closure_data(gram: Sequence[Sequence[int]], H: Sequence[int], h1: Sequence[int]) -> ClosureData:
    hh = _form(gram, H, H)
    hx = _form(gram, H, h1)
    xx = _form(gram, h1, h1)
    span_det = hh * xx - hx * hx
    if span_det == 0:
        raise ValueError("H and h1 are dependent")
    m = max(k for k in range(1, isqrt(abs(span_det)) + 1) if span_det % (k * k) == 0)
    index = 0
    div = gcd(hh, hx)
    for a in range(m):
        for b in range(m):
            v = [a * p + b * q for p, q in zip(H, h1)]
            if all(c % m == 0 for c in v):
                index += 1
                div = gcd(div, _form(gram, H, [c // m for c in v]))
    return ClosureData(index=index, det=span_det // (index * index), divisibility=div)


def _passes(gram, H, h1) -> bool:
    if _form(gram, h1, h1) not in (4, -4):
        return False
    if _form(gram, H, h1) % 2:
        return False
    data = closure_data(gram, H, h1)
    return data.divisibility == 1 and data.det % 2 == 1


def brute_h1(gram: Sequence[Sequence[int]], H: Sequence[int], bound: int) -> list[tuple[int, ...]]:
    n = len(gram)
    return [
        h1
        for h1 in itertools.product(range(-bound, bound + 1), repeat=n)
        if _passes(gram, H, h1)
    ]


def brute_D(gram: Sequence[Sequence[int]], H: Sequence[int], bound: int) -> list[tuple[int, ...]]:
    n = len(gram)
    out = []
    for D in itertools.product(range(-bound, bound + 1), repeat=n):
        h1 = [p + 2 * d for p, d in zip(H, D)]
        if _form(gram, h1, h1) in (4, -4):
            data = closure_data(gram, H, h1)
            if data.divisibility == 1:
                out.append(D)
    return out
