"""When is the moduli space M_X(2,H,2) isomorphic to X?

Given the Picard lattice N(X) and a primitive polarization H with H^2 = 8,
look for h1 with

    h1^2 = ±4,   H.h1 even,   H.[H,h1]_pr = Z,

or, equivalently, for D with (H + 2D)^2 = ±4 (then h1 = H + 2D). A witness with
h1^2 = 4 gives the chain M(2,H,2) ≅ M(2,h1,1) ≅ M(1,h1,2) ≅ X; a witness with
h1^2 = -4 additionally needs both ±h1 to be non-effective, which is certified
at lattice level by showing ±h1 are not pseudo-effective.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import chambers
from .chambers import EffectivityCert, WallSet
from .lattice import (
    IntegerLattice,
    LatVec,
    Sublattice,
    add,
    as_vec,
    det,
    divisibility,
    divisibility_in,
    invariants,
    is_primitive,
    neg,
    norm,
    pair,
    quadratic_values,
    saturate,
    scale,
    scan_box,
    sub,
)
from .mukai import IsoChain, MinusCertificates, build_chain_minus, build_chain_plus, chi_line_bundle

DEFAULT_BOUND = 64

PLUS4 = "Plus4"
MINUS4 = "Minus4"

SUFFICIENT_HOLDS = "SufficientHolds"
NOT_FOUND_WITHIN_BOUND = "NotFoundWithinBound"
NECESSARY_FAILS = "NecessaryFails"

GENERICITY_CAVEAT = (
    "necessity assumes X is general for its Picard lattice (transcendental period "
    "automorphisms are ±1); this cannot be checked from the Gram matrix"
)


class CriterionError(ValueError):
    """A precondition of a criterion-level operation is violated."""


class InvalidInput(CriterionError):
    def __init__(self, report: "ValidationReport"):
        super().__init__("failed check(s): " + "; ".join(report.failures))
        self.report = report


class LemmaViolation(RuntimeError):
    """A computation contradicted a proven lattice identity.

    Never expected; raised instead of silently returning a wrong answer.
    """


# ---------------------------------------------------------------------------
# input validation


@dataclass(frozen=True)
class ValidationReport:
    checks: dict[str, bool]
    roots_orthogonal_to_H: tuple[LatVec, ...] = ()
    nef_obstructions: tuple[LatVec, ...] = ()
    root_bound: int = 0
    assert_nef: bool = True

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [name for name, good in self.checks.items() if not good]

    @property
    def nef_certified(self) -> bool:
        """Bounded nefness certificate: no enumerated root pairs negatively with H."""
        return not self.nef_obstructions


def validate_input(L: IntegerLattice, H: Sequence[int], root_bound: int = 8, assert_nef: bool = True) -> ValidationReport:
    H = as_vec(H)
    checks: dict[str, bool] = {"H length matches rank": len(H) == L.rank}
    if not checks["H length matches rank"]:
        return ValidationReport(checks, assert_nef=assert_nef)
    inv = invariants(L)
    checks["lattice even"] = inv.even
    checks["lattice nondegenerate"] = inv.det != 0
    checks["lattice hyperbolic"] = inv.hyperbolic
    checks["H nonzero"] = any(H)
    checks["H primitive"] = any(H) and is_primitive(L, H)
    checks["H^2 = 8"] = norm(L, H) == 8
    if not all(checks.values()):
        return ValidationReport(checks, assert_nef=assert_nef)
    # Roots are oriented by H itself, so none pairs negatively with it after
    # orientation; the ones on H's wall are what stops H from being ample.
    walls = chambers.minus_two_classes(L, root_bound, H)
    on_wall = tuple(d for d in walls.roots if d in walls.ambiguous)
    obstructions = tuple(d for d in walls.roots if pair(L, H, d) < 0)
    return ValidationReport(checks, on_wall, obstructions, root_bound, assert_nef)


def require_valid(L: IntegerLattice, H: Sequence[int], root_bound: int = 8) -> ValidationReport:
    report = validate_input(L, H, root_bound)
    if not report.ok:
        raise InvalidInput(report)
    return report


def mukai_condition(L: IntegerLattice, H: Sequence[int]) -> bool:
    """H . N(X) = Z."""
    return divisibility(L, H) == 1


# ---------------------------------------------------------------------------
# conditions on h1


@dataclass(frozen=True)
class ConditionReport:
    h1: LatVec
    norm: int
    h_dot_h1: int
    closure: Sublattice
    divisibility: int

    @property
    def norm_ok(self) -> bool:
        return self.norm in (4, -4)

    @property
    def parity_ok(self) -> bool:
        return self.h_dot_h1 % 2 == 0

    @property
    def closure_det(self) -> int:
        return self.closure.det

    @property
    def det_odd(self) -> bool:
        return self.closure.det % 2 == 1

    @property
    def divisibility_ok(self) -> bool:
        return self.divisibility == 1

    @property
    def closure_conditions_agree(self) -> bool:
        return self.det_odd == self.divisibility_ok

    @property
    def passes(self) -> bool:
        return self.norm_ok and self.parity_ok and self.divisibility_ok and self.det_odd


def check_h1(L: IntegerLattice, H: Sequence[int], h1: Sequence[int]) -> ConditionReport:
    h1 = as_vec(h1)
    L._check(h1)
    if not any(h1):
        raise CriterionError("h1 must be nonzero")
    closure = saturate(L, [H, h1])
    return ConditionReport(
        h1=h1,
        norm=norm(L, h1),
        h_dot_h1=pair(L, H, h1),
        closure=closure,
        divisibility=divisibility_in(L, H, closure),
    )


def _closure_ok(L: IntegerLattice, H: LatVec, h1: LatVec) -> ConditionReport:
    rep = check_h1(L, H, h1)
    if not rep.closure_conditions_agree:
        raise LemmaViolation(
            f"closure det {rep.closure_det} and divisibility {rep.divisibility} disagree for h1={h1}"
        )
    return rep


def det_identity_check(L: IntegerLattice, H: Sequence[int], h1: Sequence[int]) -> bool:
    """det Gram(H, h1) == 8 h1^2 - (H.h1)^2 != 0."""
    if norm(L, H) != 8:
        raise CriterionError(f"H^2 = {norm(L, H)}, expected 8")
    hh = pair(L, H, h1)
    gram_det = det([[norm(L, H), hh], [hh, norm(L, h1)]])
    return gram_det == 8 * norm(L, h1) - hh * hh and gram_det != 0


# ---------------------------------------------------------------------------
# searches


def search_D(L: IntegerLattice, H: Sequence[int], bound: int) -> list[LatVec]:
    """All D in the box with (H+2D)^2 = ±4, i.e. D^2 + H.D in {-1, -3}, whose
    h1 = H + 2D passes the closure condition. Lexicographic order."""
    H = as_vec(H)
    if bound < 1:
        raise CriterionError("bound must be at least 1")
    GH = np.array(L.apply(H), dtype=object)

    def keep(X, G):
        q = quadratic_values(X, G) + X @ GH.astype(X.dtype)
        return (q == -1) | (q == -3)

    found = scan_box(L, bound, keep, extra=max(abs(c) for c in L.apply(H)))
    out = []
    for D in found:
        rep = _closure_ok(L, H, add(H, scale(2, D)))
        if rep.divisibility_ok:
            out.append(D)
    return out


def search_h1(L: IntegerLattice, H: Sequence[int], bound: int, *, faults: frozenset[str] = frozenset()) -> list[LatVec]:
    """All h1 in the box satisfying the full condition set. Lexicographic order.

    ``faults`` is a test hook: ``{"parity"}`` drops the H.h1 parity filter.
    """
    H = as_vec(H)
    if bound < 1:
        raise CriterionError("bound must be at least 1")
    GH = np.array(L.apply(H), dtype=object)
    skip_parity = "parity" in faults

    def keep(X, G):
        q = quadratic_values(X, G)
        mask = (q == 4) | (q == -4)
        if not skip_parity:
            mask &= (X @ GH.astype(X.dtype)) % 2 == 0
        return mask

    found = scan_box(L, bound, keep, extra=max(abs(c) for c in L.apply(H)))
    out = []
    for h1 in found:
        rep = _closure_ok(L, H, h1)
        if rep.divisibility_ok and (skip_parity or rep.parity_ok):
            out.append(h1)
    return out


def lemma_bridge_to_D(L: IntegerLattice, H: Sequence[int], h1: Sequence[int]) -> LatVec:
    """D = (h1 - H)/2 for an h1 satisfying the conditions."""
    H, h1 = as_vec(H), as_vec(h1)
    if not check_h1(L, H, h1).passes:
        raise CriterionError(f"h1={h1} does not satisfy the conditions")
    diff = sub(h1, H)
    if any(c % 2 for c in diff):
        raise LemmaViolation(f"h1 - H = {diff} is not divisible by 2 although h1={h1} passes")
    return tuple(c // 2 for c in diff)


def case_of(L: IntegerLattice, H: Sequence[int], D: Sequence[int]) -> str:
    q = norm(L, D) + pair(L, H, D)
    if q == -1:
        return PLUS4
    if q == -3:
        return MINUS4
    raise CriterionError(f"D^2 + H.D = {q}, expected -1 or -3")


def flip_D(H: Sequence[int], D: Sequence[int]) -> LatVec:
    """D -> -H - D, which replaces h1 by -h1."""
    return neg(add(H, D))


def normalize_D(L: IntegerLattice, H: Sequence[int], D: Sequence[int]) -> LatVec:
    """Choose the sign of h1 so that H.D > -4 (h1^2 = -4 case)."""
    D = as_vec(D)
    if norm(L, D) + pair(L, H, D) != -3:
        raise CriterionError("normalize_D applies only to D with D^2 + H.D = -3")
    return D if pair(L, H, D) > -4 else flip_D(H, D)


# ---------------------------------------------------------------------------
# verdict


@dataclass(frozen=True)
class Witness:
    h1: LatVec
    D: LatVec
    case: str
    closure_det: int
    divisibility_certificate: int
    parity_certificate: int
    normalized: bool
    chi: int | None = None
    effectivity: EffectivityCert | None = None

    def certificates(self) -> dict:
        d = {
            "closure_det": self.closure_det,
            "divisibility": self.divisibility_certificate,
            "H.D": self.parity_certificate,
            "normalized": self.normalized,
        }
        if self.chi is not None:
            d["chi"] = self.chi
        if self.effectivity is not None:
            d["effectivity"] = self.effectivity.to_dict()
        return d


def make_witness(L: IntegerLattice, H: Sequence[int], D: Sequence[int], effectivity: EffectivityCert | None = None) -> Witness:
    H, D = as_vec(H), as_vec(D)
    h1 = add(H, scale(2, D))
    case = case_of(L, H, D)
    rep = _closure_ok(L, H, h1)
    if not rep.passes:
        raise CriterionError(f"h1={h1} does not satisfy the conditions")
    hd = pair(L, H, D)
    if hd % 2 == 0 or pair(L, h1, D) % 2 == 0:
        raise LemmaViolation(f"H.D = {hd} and h1.D = {pair(L, h1, D)} must both be odd")
    return Witness(
        h1=h1,
        D=D,
        case=case,
        closure_det=rep.closure_det,
        divisibility_certificate=rep.divisibility,
        parity_certificate=hd,
        normalized=hd > -4,
        chi=chi_line_bundle(L, h1) if case == MINUS4 else None,
        effectivity=effectivity,
    )


@dataclass(frozen=True)
class NecessaryReport:
    mukai_condition: bool
    rank: int
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"mukai_condition": self.mukai_condition, "rank": self.rank, "notes": list(self.notes)}


@dataclass(frozen=True)
class Verdict:
    status: str
    necessary_report: NecessaryReport
    bound: int
    witness: Witness | None = None
    chain: IsoChain | None = None
    reason: str | None = None
    diagnostics: tuple[str, ...] = field(default=())


def necessary_report(L: IntegerLattice, H: Sequence[int]) -> NecessaryReport:
    mukai = mukai_condition(L, H)
    notes = []
    if L.rank == 1:
        notes.append("rank 1: Y ≅ X cannot hold, a witness h1 would span a rank-2 sublattice with H")
    elif L.rank == 2:
        notes.append("rank 2: for general X the conditions are necessary as well as sufficient")
    else:
        notes.append(f"rank {L.rank}: the conditions are sufficient only")
    if not mukai:
        notes.append(f"H.N(X) = {divisibility(L, H)}Z: no witness exists at any bound")
    notes.append(GENERICITY_CAVEAT)
    return NecessaryReport(mukai, L.rank, tuple(notes))


def canonical_candidates(L: IntegerLattice, H: Sequence[int], Ds: Sequence[LatVec], case: str) -> list[LatVec]:
    """One D per ±h1 pair, with H.D > -4, ordered by box shell then lexicographically."""
    H = as_vec(H)
    picked = set()
    for D in Ds:
        if case_of(L, H, D) != case:
            continue
        picked.add(D if pair(L, H, D) > -4 else flip_D(H, D))
    return sorted(picked, key=lambda v: (max(abs(c) for c in v), v))


def _minus_chain(L, H, D, cert) -> tuple[Witness, IsoChain]:
    w = make_witness(L, H, D, effectivity=cert)
    certs = MinusCertificates(h_dot_d=w.parity_certificate, normalized=w.normalized, chi=w.chi, effectivity=cert)
    return w, build_chain_minus(L, H, D, certs)


def verdict(
    L: IntegerLattice,
    H: Sequence[int],
    bound: int = DEFAULT_BOUND,
    depth: int = chambers.DEFAULT_DEPTH,
    assert_nef: bool = True,
) -> Verdict:
    H = as_vec(H)
    report = require_valid(L, H, root_bound=bound)
    nec = necessary_report(L, H)
    diags = []
    if not assert_nef:
        diags.append("H is not asserted nef; certificates assume it is")
    if report.roots_orthogonal_to_H:
        diags.append(f"H lies on {len(report.roots_orthogonal_to_H)} root wall(s): nef but not ample")
    if L.rank == 2 and not nec.mukai_condition:
        return Verdict(
            NECESSARY_FAILS, nec, bound,
            reason=f"Mukai condition fails: H.N(X) = {divisibility(L, H)}Z",
            diagnostics=tuple(diags),
        )

    Ds = search_D(L, H, bound)
    plus = canonical_candidates(L, H, Ds, PLUS4)
    if plus:
        D = plus[0]
        return Verdict(SUFFICIENT_HOLDS, nec, bound, make_witness(L, H, D), build_chain_plus(L, H, D), diagnostics=tuple(diags))

    minus = canonical_candidates(L, H, Ds, MINUS4)
    if minus:
        walls = chambers.minus_two_classes(L, bound, H)
        for D in minus:
            h1 = add(H, scale(2, D))
            cert = chambers.is_not_pseudo_effective(L, H, h1, bound, walls=walls)
            if cert.conclusive:
                w, chain = _minus_chain(L, H, D, cert)
                return Verdict(SUFFICIENT_HOLDS, nec, bound, w, chain, diagnostics=tuple(diags))
        found = _orbit_witness(L, H, minus, bound, depth, walls)
        if found is not None:
            D, cert = found
            w, chain = _minus_chain(L, H, D, cert)
            diags.append("witness reached by (-2)-reflections from a search candidate")
            return Verdict(SUFFICIENT_HOLDS, nec, bound, w, chain, diagnostics=tuple(diags))
        diags.append(
            f"{len(minus)} candidate(s) with h1^2 = -4 satisfy the lattice conditions, "
            "but no non-pseudo-effectivity certificate was found within the bound"
        )
    return Verdict(NOT_FOUND_WITHIN_BOUND, nec, bound, diagnostics=tuple(diags))


def _orbit_witness(L, H, minus: list[LatVec], bound: int, depth: int, walls: WallSet):
    for D in minus:
        res = chambers.orbit_search(L, H, add(H, scale(2, D)), bound, depth, walls=walls)
        if res.found:
            D2 = normalize_D(L, H, lemma_bridge_to_D(L, H, res.h1))
            h1 = add(H, scale(2, D2))
            cert = chambers.is_not_pseudo_effective(L, H, h1, bound, walls=walls)
            if cert.conclusive:
                return D2, cert
    return None
