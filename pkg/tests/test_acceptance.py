"""Acceptance suite: one test per criterion, summarized at the end of the run."""
import json
import random
import time
from math import gcd
from pathlib import Path

import pytest

from corpus import FIXTURES, SEED, corpus
from k3moduli.chambers import minus_two_classes, orbit_search, wall_generator
from k3moduli.cli import EXIT_ORACLE_MISMATCH, InputDocument, cmd_oracle, run
from k3moduli.criterion import (
    MINUS4,
    PLUS4,
    case_of,
    check_h1,
    det_identity_check,
    normalize_D,
    search_D,
    search_h1,
)
from k3moduli.lattice import IntegerLattice, add, det, enumerate_box, norm, pair, reflect, scale
from k3moduli.mukai import MukaiVec, build_chain_plus, chi_line_bundle, is_isotropic, mukai_pair, twist

CORPUS_SIZE = 1000
BOUND = 8
TIME_LIMIT = 60.0
RANDOM_TRIALS = 10_000
FIX = Path(__file__).resolve().parent / "fixtures"


def h1_box(H):
    return 2 * BOUND + max(abs(c) for c in H)


@pytest.fixture(scope="module")
def searched():
    """Corpus with both searches run at matching bounds, and the wall time."""
    members = corpus(CORPUS_SIZE)
    print(f"\ncorpus seed {SEED}, size {len(members)}, bound {BOUND}")
    t0 = time.perf_counter()
    rows = [(m, search_D(m.L, m.H, BOUND), search_h1(m.L, m.H, h1_box(m.H))) for m in members]
    return rows, time.perf_counter() - t0


def _in_D_box(H, h1):
    return all(abs(a - b) <= 2 * BOUND for a, b in zip(h1, H))


@pytest.mark.acceptance(1, "h1-search and D-search agree on the corpus within 60 s")
def test_criterion_1_search_equivalence(searched):
    rows, elapsed = searched
    mismatches = 0
    for m, Ds, h1s in rows:
        from_D = {add(m.H, scale(2, D)) for D in Ds}
        assert all(all((a - b) % 2 == 0 for a, b in zip(h, m.H)) for h in h1s)
        from_h1 = {h for h in h1s if _in_D_box(m.H, h)}
        mismatches += from_D != from_h1
    witnesses = sum(len(Ds) for _, Ds, _ in rows)
    print(f"lattices {len(rows)}, witnesses {witnesses}, mismatches {mismatches}, {elapsed:.1f} s")
    assert len(rows) >= 1000
    assert mismatches == 0
    assert elapsed < TIME_LIMIT


@pytest.mark.acceptance(2, "det identity, H.h1 = 2 mod 4 and H.D odd on every witness")
def test_criterion_2_witness_identities(searched):
    rows, _ = searched
    n = 0
    for m, Ds, _ in rows:
        for D in Ds:
            h1 = add(m.H, scale(2, D))
            hh = pair(m.L, m.H, h1)
            gram_det = det([[norm(m.L, m.H), hh], [hh, norm(m.L, h1)]])
            assert gram_det == 8 * norm(m.L, h1) - hh * hh != 0
            assert det_identity_check(m.L, m.H, h1)
            assert hh % 4 == 2
            assert pair(m.L, m.H, D) % 2 == 1
            assert pair(m.L, h1, D) % 2 == 1
            n += 1
    print(f"witnesses checked: {n}")
    assert n > 0


@pytest.mark.acceptance(3, "odd closure det iff divisibility 1 on every corpus candidate")
def test_criterion_3_closure_equivalence(searched):
    rows, _ = searched
    n = bad = 0
    for m, _, _ in rows:
        for target in (4, -4):
            for h1 in enumerate_box(m.L, BOUND, target):
                rep = check_h1(m.L, m.H, h1)
                bad += not rep.closure_conditions_agree
                n += 1
    print(f"candidates checked: {n}, disagreements: {bad}")
    assert n > 0 and bad == 0


def _random_lattice(rng, n):
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        g[i][i] = 2 * rng.randint(-5, 5)
        for j in range(i + 1, n):
            g[i][j] = g[j][i] = rng.randint(-10, 10)
    return IntegerLattice(g)


def _rvec(rng, n, k=10):
    return tuple(rng.randint(-k, k) for _ in range(n))


@pytest.mark.acceptance(4, "twist isometry and composition, (2,H,2) isotropic, Plus4 chain endpoint")
def test_criterion_4_mukai_algebra(searched):
    rng = random.Random(SEED)
    for _ in range(RANDOM_TRIALS):
        n = rng.randint(1, 3)
        L = _random_lattice(rng, n)
        v = MukaiVec(rng.randint(-10, 10), _rvec(rng, n), rng.randint(-10, 10))
        w = MukaiVec(rng.randint(-10, 10), _rvec(rng, n), rng.randint(-10, 10))
        D, E = _rvec(rng, n), _rvec(rng, n)
        assert mukai_pair(L, twist(L, v, D), twist(L, w, D)) == mukai_pair(L, v, w)
        assert twist(L, twist(L, v, D), E) == twist(L, v, add(D, E))
    rows, _ = searched
    chains = 0
    for m, Ds, _ in rows:
        assert is_isotropic(m.L, MukaiVec(2, m.H, 2))
        for D in Ds:
            if case_of(m.L, m.H, D) == PLUS4:
                chain = build_chain_plus(m.L, m.H, D)
                assert all(is_isotropic(m.L, x) for x in chain.vectors())
                assert chain.endpoint() == MukaiVec(1, add(m.H, scale(2, D)), 2)
                chains += 1
    print(f"random triples: {RANDOM_TRIALS}, Plus4 chains: {chains}")
    assert chains > 0


@pytest.mark.acceptance(5, "chi of O(h1) is 0 at h1^2 = -4, 4 at h1^2 = 4, 2 at h = 0")
def test_criterion_5_chi(searched):
    rows, _ = searched
    seen = {4: 0, -4: 0}
    for m, _, _ in rows:
        assert chi_line_bundle(m.L, (0,) * m.L.rank) == 2
        for h in enumerate_box(m.L, 3):
            q = norm(m.L, h)
            assert (chi_line_bundle(m.L, h) == 0) == (q == -4)
            if q in seen:
                assert chi_line_bundle(m.L, h) == (4 if q == 4 else 0)
                seen[q] += 1
    print(f"classes with h^2 = 4: {seen[4]}, h^2 = -4: {seen[-4]}")
    assert seen[4] and seen[-4]


GOLDEN = {
    "plus4": (0, "SufficientHolds", "Plus4", [0, 1]),
    "minus4": (0, "SufficientHolds", "Minus4", [0, 1]),
    "rank1": (2, "NotFoundWithinBound", None, None),
    "definite": (3, "InputInvalid", None, None),
}


@pytest.mark.acceptance(6, "worked fixtures reproduce byte-stable outputs")
def test_criterion_6_fixtures():
    for name, (code, status, case, D) in GOLDEN.items():
        path = str(FIX / f"{name}.input.json")
        first, c1 = run(["check", path])
        second, c2 = run(["check", path])
        assert first == second == (FIX / f"{name}.check.json").read_text(encoding="utf-8")
        assert c1 == c2 == code
        doc = json.loads(first)
        assert doc["verdict"] == status
        if case:
            assert doc["witness"]["case"] == case and doc["witness"]["D"] == D
    minus = json.loads((FIX / "minus4.check.json").read_text())
    assert minus["witness"]["certificates"]["effectivity"]["wall"] == [7, 10]
    rank1 = json.loads((FIX / "rank1.check.json").read_text())["necessary_report"]
    assert rank1["rank"] == 1 and any(n.startswith("rank 1") for n in rank1["notes"])
    definite = json.loads((FIX / "definite.check.json").read_text())["necessary_report"]
    assert definite["mukai_condition"] is False


ORACLE_CORPUS = 150
ORACLE_BOUND = 2


@pytest.mark.acceptance(7, "oracle agrees on the fixture corpus; an injected fault exits 4")
def test_criterion_7_oracle():
    members = list(FIXTURES) + corpus(ORACLE_CORPUS, seed=SEED + 1)
    failures = 0
    for m in members:
        d = InputDocument.from_dict({"gram": [list(r) for r in m.L.gram], "H": list(m.H), "bound": ORACLE_BOUND})
        _, code = cmd_oracle(d)
        failures += code != 0
    d = InputDocument.from_dict({"gram": [[8, 1], [1, -2]], "H": [1, 0], "bound": 3})
    _, fault_code = cmd_oracle(d, frozenset({"parity"}))
    print(f"oracle runs: {len(members)}, failures: {failures}, fault exit: {fault_code}")
    assert failures == 0
    assert fault_code == EXIT_ORACLE_MISMATCH


@pytest.mark.acceptance(8, "reflections preserve the form; wall generator and orbit checks on the corpus")
def test_criterion_8_chambers(searched):
    rng = random.Random(SEED)
    rows, _ = searched
    with_roots = [(m, minus_two_classes(m.L, 3, m.H).roots) for m, _, _ in rows[:200]]
    with_roots = [(m, r) for m, r in with_roots if r]
    for _ in range(RANDOM_TRIALS):
        m, roots = rng.choice(with_roots)
        d = rng.choice(roots)
        x, y = _rvec(rng, m.L.rank, 20), _rvec(rng, m.L.rank, 20)
        rx, ry = reflect(m.L, x, d), reflect(m.L, y, d)
        assert norm(m.L, rx) == norm(m.L, x) and pair(m.L, rx, ry) == pair(m.L, x, y)

    walls_checked = visits = 0
    for m, Ds, _ in rows:
        minus = [add(m.H, scale(2, D)) for D in Ds if case_of(m.L, m.H, D) == MINUS4]
        if not minus:
            continue
        if m.L.rank == 2:
            for h1 in minus:
                w = wall_generator(m.L, m.H, h1)
                assert pair(m.L, h1, w) == 0 and norm(m.L, w) > 0
                assert gcd(*w) == 1 and pair(m.L, m.H, w) > 0
                walls_checked += 1
        res = orbit_search(m.L, m.H, minus[0], 4, depth=3, box=h1_box(m.H))
        for v in res.visits:
            assert v.norm == norm(m.L, v.h1) == -4
            assert v.conditions_hold == check_h1(m.L, m.H, v.h1).passes
        visits += len(res.visits)
    print(f"reflection pairs: {RANDOM_TRIALS}, wall generators: {walls_checked}, orbit visits: {visits}")
    assert walls_checked > 0 and visits > 0


@pytest.mark.acceptance(9, "normalize_D gives H.D' > -4 and is idempotent on Minus4 witnesses")
def test_criterion_9_normalize(searched):
    rows, _ = searched
    n = 0
    for m, Ds, _ in rows:
        for D in Ds:
            if case_of(m.L, m.H, D) != MINUS4:
                continue
            D1 = normalize_D(m.L, m.H, D)
            assert pair(m.L, m.H, D1) > -4 and pair(m.L, m.H, D1) % 2 == 1
            assert normalize_D(m.L, m.H, D1) == D1
            assert case_of(m.L, m.H, D1) == MINUS4
            n += 1
    print(f"Minus4 witnesses normalized: {n}")
    assert n > 0
