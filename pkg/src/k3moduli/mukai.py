"""Mukai vectors over a Picard lattice and symbolic chains of moduli identifications."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .lattice import IntegerLattice, LatVec, LatticeError, add, as_vec, norm, pair, scale


class ChainError(ValueError):
    """A chain builder precondition or certificate failed."""


@dataclass(frozen=True)
class MukaiVec:
    """(rank, first Chern class, s) with s = chi - rank.

    Negative ranks are allowed here so that swap_rank is closed; the chain
    builders are where geometric validity is enforced.
    """

    r: int
    c1: LatVec
    s: int

    def __post_init__(self):
        object.__setattr__(self, "c1", as_vec(self.c1))

    def as_list(self) -> list:
        return [self.r, list(self.c1), self.s]

    def __str__(self) -> str:
        return f"({self.r},{_fmt(self.c1)},{self.s})"


def _fmt(v: Sequence[int]) -> str:
    return "(" + ",".join(str(c) for c in v) + ")"


def mukai_pair(L: IntegerLattice, v: MukaiVec, w: MukaiVec) -> int:
    return pair(L, v.c1, w.c1) - v.r * w.s - w.r * v.s


def is_isotropic(L: IntegerLattice, v: MukaiVec) -> bool:
    return mukai_pair(L, v, v) == 0


def euler_characteristic(v: MukaiVec) -> int:
    return v.r + v.s


def twist(L: IntegerLattice, v: MukaiVec, D: Sequence[int]) -> MukaiVec:
    """Mukai vector of E(D): the product of v with (1, D, D^2/2)."""
    d2 = norm(L, D)
    if d2 % 2:
        raise LatticeError(f"twist needs an even class, D^2 = {d2}")
    return MukaiVec(v.r, add(v.c1, scale(v.r, D)), v.s + pair(L, v.c1, D) + v.r * d2 // 2)


def swap_rank(v: MukaiVec) -> MukaiVec:
    return MukaiVec(v.s, v.c1, v.r)


def chi_line_bundle(L: IntegerLattice, h: Sequence[int]) -> int:
    """Euler characteristic of O_X(h) on a K3 surface: 2 + h^2/2."""
    h2 = norm(L, h)
    if h2 % 2:
        raise LatticeError(f"odd self-intersection {h2}; the lattice must be even")
    return 2 + h2 // 2


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class Start:
    vector: MukaiVec


@dataclass(frozen=True)
class Twist:
    D: LatVec
    vector: MukaiVec


@dataclass(frozen=True)
class RankSwap:
    vector: MukaiVec


@dataclass(frozen=True)
class MinusCertificates:
    """Lattice-level hypotheses behind the extension construction in the h1^2 = -4 case."""

    h_dot_d: int | None = None
    normalized: bool | None = None
    chi: int | None = None
    effectivity: object | None = None  # chambers.EffectivityCert


@dataclass(frozen=True)
class ExtensionConstruction:
    D: LatVec
    certificates: MinusCertificates


@dataclass(frozen=True)
class EndX:
    pass


Step = Union[Start, Twist, RankSwap, ExtensionConstruction, EndX]


@dataclass(frozen=True)
class IsoChain:
    steps: tuple[Step, ...]

    def vectors(self) -> list[MukaiVec]:
        return [s.vector for s in self.steps if hasattr(s, "vector")]

    def endpoint(self) -> MukaiVec:
        return self.vectors()[-1]

    def render(self, H: Sequence[int] | None = None, h1: Sequence[int] | None = None) -> str:
        """One-line arrow form, e.g. ``(2,H,2) → twist(0,1) → (2,h1,1) → swap → (1,h1,2) → X``."""

        def cls(c: LatVec) -> str:
            if H is not None and c == tuple(H):
                return "H"
            if h1 is not None and c == tuple(h1):
                return "h1"
            return _fmt(c)

        def vec(v: MukaiVec) -> str:
            return f"({v.r},{cls(v.c1)},{v.s})"

        parts = []
        for step in self.steps:
            if isinstance(step, Start):
                parts.append(vec(step.vector))
            elif isinstance(step, Twist):
                parts += [f"twist{_fmt(step.D)}", vec(step.vector)]
            elif isinstance(step, RankSwap):
                parts += ["swap", vec(step.vector)]
            elif isinstance(step, ExtensionConstruction):
                parts.append(f"extension(D={_fmt(step.D)})")
            else:
                parts.append("X")
        return " → ".join(parts)


def build_chain_plus(L: IntegerLattice, H: Sequence[int], D: Sequence[int]) -> IsoChain:
    """M(2,H,2) ≅ M(2,H+2D,1) ≅ M(1,H+2D,2) ≅ X, for (H+2D)^2 = 4."""
    H, D = as_vec(H), as_vec(D)
    h1 = add(H, scale(2, D))
    if norm(L, h1) != 4:
        raise ChainError(f"(H+2D)^2 = {norm(L, h1)}, expected 4")
    start = MukaiVec(2, H, 2)
    twisted = twist(L, start, D)
    if twisted != MukaiVec(2, h1, 1) or not is_isotropic(L, twisted):
        raise ChainError(f"twist produced {twisted}, expected isotropic (2,h1,1)")
    swapped = swap_rank(twisted)
    for v in (start, twisted, swapped):
        if not is_isotropic(L, v):
            raise ChainError(f"{v} is not isotropic")
    return IsoChain((Start(start), Twist(D, twisted), RankSwap(swapped), EndX()))


def build_chain_minus(
    L: IntegerLattice, H: Sequence[int], D: Sequence[int], certificates: MinusCertificates
) -> IsoChain:
    """X → M(2,H,2) via the extension 0 → O(-D) → E → I_p(H+D) → 0, for (H+2D)^2 = -4.

    Only the lattice-level hypotheses are checked; every certificate is recomputed
    and must match the supplied one.
    """
    from .chambers import EffectivityCert  # circular at import time

    H, D = as_vec(H), as_vec(D)
    h1 = add(H, scale(2, D))
    if norm(L, h1) != -4:
        raise ChainError(f"(H+2D)^2 = {norm(L, h1)}, expected -4")
    start = MukaiVec(2, H, 2)
    if not is_isotropic(L, start):
        raise ChainError(f"{start} is not isotropic")
    c = certificates
    hd = pair(L, H, D)
    if c.h_dot_d is None:
        raise ChainError("missing certificate: H.D")
    if c.h_dot_d != hd or hd % 2 == 0:
        raise ChainError(f"parity certificate failed: H.D = {hd} must be odd")
    if c.normalized is None:
        raise ChainError("missing certificate: normalization")
    if not c.normalized or hd <= -4:
        raise ChainError(f"normalization certificate failed: H.D = {hd} must exceed -4")
    if c.chi is None:
        raise ChainError("missing certificate: chi")
    if c.chi != chi_line_bundle(L, h1) or c.chi != 0:
        raise ChainError(f"chi certificate failed: chi(O(h1)) = {chi_line_bundle(L, h1)}")
    eff = c.effectivity
    if eff is None:
        raise ChainError("missing certificate: non-pseudo-effectivity of ±h1")
    if not isinstance(eff, EffectivityCert) or not eff.conclusive:
        raise ChainError("non-pseudo-effectivity certificate is inconclusive")
    if eff.subject not in (h1, tuple(-a for a in h1)):
        raise ChainError(f"effectivity certificate is for {eff.subject}, not ±{h1}")
    return IsoChain((Start(start), ExtensionConstruction(D, c), EndX()))
