"""Command-line front end.

Input is one JSON document (file argument or stdin)::

    {"gram": [[8, 1], [1, -2]], "H": [1, 0], "bound": 64, "orbit_depth": 8, "assert_nef": true}

Exit codes: 0 success / sufficient condition holds, 2 nothing found within
the bound, 3 invalid input, 4 oracle mismatch, 5 a necessary condition fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import chambers, oracle
from .chambers import WallSet
from .criterion import (
    DEFAULT_BOUND,
    NECESSARY_FAILS,
    NOT_FOUND_WITHIN_BOUND,
    SUFFICIENT_HOLDS,
    CriterionError,
    InvalidInput,
    Verdict,
    necessary_report,
    search_D,
    search_h1,
    validate_input,
    verdict,
)
from .lattice import IntegerLattice, LatticeError, as_vec, invariants, norm
from .mukai import ExtensionConstruction, IsoChain, RankSwap, Start, Twist

EXIT_OK = 0
EXIT_NOT_FOUND = 2
EXIT_INVALID = 3
EXIT_ORACLE_MISMATCH = 4
EXIT_NECESSARY_FAILS = 5

INPUT_INVALID = "InputInvalid"
ORACLE_AGREES = "OracleAgrees"
ORACLE_MISMATCH = "OracleMismatch"

SAFE_INT = 2**53 - 1
_INT_STR = re.compile(r"-?\d+")


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# documents


@dataclass(frozen=True)
class InputDocument:
    gram: tuple[tuple[int, ...], ...]
    H: tuple[int, ...]
    bound: int = DEFAULT_BOUND
    orbit_depth: int = chambers.DEFAULT_DEPTH
    assert_nef: bool = True

    @classmethod
    def from_dict(cls, d: Any) -> "InputDocument":
        if not isinstance(d, dict):
            raise InputError("input must be a JSON object")
        unknown = set(d) - {"gram", "H", "bound", "orbit_depth", "assert_nef"}
        if unknown:
            raise InputError(f"unknown field(s): {', '.join(sorted(unknown))}")
        for key in ("gram", "H"):
            if key not in d:
                raise InputError(f"missing field: {key}")
        gram = d["gram"]
        if not isinstance(gram, list) or not gram or not all(isinstance(r, list) for r in gram):
            raise InputError("gram must be a nonempty list of rows")
        gram = tuple(tuple(_int(v, "gram entry") for v in row) for row in gram)
        if not isinstance(d["H"], list):
            raise InputError("H must be a list of integers")
        H = tuple(_int(v, "H entry") for v in d["H"])
        bound = _int(d.get("bound", DEFAULT_BOUND), "bound")
        depth = _int(d.get("orbit_depth", chambers.DEFAULT_DEPTH), "orbit_depth")
        if bound < 1:
            raise InputError("bound must be positive")
        if depth < 0:
            raise InputError("orbit_depth must be nonnegative")
        nef = d.get("assert_nef", True)
        if not isinstance(nef, bool):
            raise InputError("assert_nef must be a boolean")
        return cls(gram, H, bound, depth, nef)


def _int(v: Any, what: str) -> int:
    if isinstance(v, bool):
        raise InputError(f"{what} must be an integer, got {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, str) and _INT_STR.fullmatch(v):
        return int(v)
    raise InputError(f"{what} must be an integer, got {v!r}")


@dataclass(frozen=True)
class OutputDocument:
    command: str
    verdict: str
    bound: int | None = None
    witness: dict | None = None
    chain: list | None = None
    chain_text: str | None = None
    necessary_report: dict | None = None
    diagnostics: list = field(default_factory=list)
    results: Any = None

    def to_dict(self) -> dict:
        d = {
            "command": self.command,
            "verdict": self.verdict,
            "bound": self.bound,
            "witness": self.witness,
            "chain": self.chain,
            "chain_text": self.chain_text,
            "necessary_report": self.necessary_report,
            "diagnostics": list(self.diagnostics),
        }
        if self.results is not None:
            d["results"] = self.results
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "OutputDocument":
        return cls(**{k: d.get(k) for k in ("command", "verdict", "bound", "witness", "chain",
                                             "chain_text", "necessary_report", "results")},
                   diagnostics=d.get("diagnostics", []))


def encode(obj: Any) -> Any:
    """Integers beyond the 53-bit safe range become decimal strings."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, int):
        return str(obj) if abs(obj) > SAFE_INT else obj
    if isinstance(obj, dict):
        return {k: encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    return obj


_TEXT_KEYS = {"command", "verdict", "chain_text", "diagnostics", "notes", "status", "case", "target", "step"}


def decode(obj: Any) -> Any:
    """Inverse of :func:`encode`; free-text fields are left alone."""
    if isinstance(obj, str) and _INT_STR.fullmatch(obj) and abs(int(obj)) > SAFE_INT:
        return int(obj)
    if isinstance(obj, dict):
        return {k: v if k in _TEXT_KEYS else decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [decode(v) for v in obj]
    return obj


def emit_json(doc: OutputDocument) -> str:
    return json.dumps(encode(doc.to_dict()), indent=2, ensure_ascii=False) + "\n"


def parse_json(text: str) -> OutputDocument:
    return OutputDocument.from_dict(decode(json.loads(text)))


# ---------------------------------------------------------------------------
# conversions


def chain_to_list(chain: IsoChain) -> list:
    out = []
    for step in chain.steps:
        if isinstance(step, Start):
            out.append({"step": "Start", "vector": step.vector.as_list()})
        elif isinstance(step, Twist):
            out.append({"step": "Twist", "D": list(step.D), "vector": step.vector.as_list()})
        elif isinstance(step, RankSwap):
            out.append({"step": "RankSwap", "vector": step.vector.as_list()})
        elif isinstance(step, ExtensionConstruction):
            c = step.certificates
            out.append({
                "step": "ExtensionConstruction",
                "D": list(step.D),
                "certificates": {
                    "H.D": c.h_dot_d,
                    "normalized": c.normalized,
                    "chi": c.chi,
                    "effectivity": c.effectivity.to_dict(),
                },
            })
        else:
            out.append({"step": "EndX"})
    return out


def verdict_document(v: Verdict, H: Sequence[int]) -> OutputDocument:
    diags = list(v.diagnostics)
    if v.reason:
        diags.insert(0, v.reason)
    witness = chain = text = None
    if v.witness is not None:
        w = v.witness
        witness = {"h1": list(w.h1), "D": list(w.D), "case": w.case, "certificates": w.certificates()}
        chain = chain_to_list(v.chain)
        text = v.chain.render(H, w.h1)
    return OutputDocument(
        command="check",
        verdict=v.status,
        bound=v.bound,
        witness=witness,
        chain=chain,
        chain_text=text,
        necessary_report=v.necessary_report.to_dict(),
        diagnostics=diags,
    )


def _lattice(doc: InputDocument) -> IntegerLattice:
    try:
        return IntegerLattice(doc.gram)
    except LatticeError as e:
        raise InputError(str(e)) from e


def _invalid_document(command: str, doc: InputDocument | None, messages: list[str]) -> OutputDocument:
    nec = None
    if doc is not None:
        try:
            L = IntegerLattice(doc.gram)
            if len(doc.H) == L.rank and any(doc.H):
                nec = necessary_report(L, doc.H).to_dict()
        except LatticeError:
            pass
    return OutputDocument(command=command, verdict=INPUT_INVALID, bound=doc.bound if doc else None,
                          necessary_report=nec, diagnostics=messages)


def _require_valid(doc: InputDocument) -> IntegerLattice:
    L = _lattice(doc)
    report = validate_input(L, doc.H, root_bound=1)
    if not report.ok:
        raise InvalidInput(report)
    return L


# ---------------------------------------------------------------------------
# commands: each returns (document, exit code)


def cmd_check(doc: InputDocument) -> tuple[OutputDocument, int]:
    try:
        L = _lattice(doc)
        v = verdict(L, doc.H, doc.bound, doc.orbit_depth, doc.assert_nef)
    except (InputError, CriterionError, LatticeError) as e:
        return _invalid_document("check", doc, [f"invalid input: {e}"]), EXIT_INVALID
    code = {SUFFICIENT_HOLDS: EXIT_OK, NOT_FOUND_WITHIN_BOUND: EXIT_NOT_FOUND,
            NECESSARY_FAILS: EXIT_NECESSARY_FAILS}[v.status]
    return verdict_document(v, doc.H), code


def cmd_search(doc: InputDocument, target: str) -> tuple[OutputDocument, int]:
    try:
        L = _require_valid(doc)
    except (InputError, CriterionError, LatticeError) as e:
        return _invalid_document("search", doc, [f"invalid input: {e}"]), EXIT_INVALID
    found = search_h1(L, doc.H, doc.bound) if target == "h1" else search_D(L, doc.H, doc.bound)
    return OutputDocument(
        command="search",
        verdict=f"{len(found)} {target} found",
        bound=doc.bound,
        necessary_report=necessary_report(L, doc.H).to_dict(),
        results={"target": target, "vectors": [list(v) for v in found]},
    ), EXIT_OK


def h1_bound(doc: InputDocument) -> int:
    """h1-box matching a D-box: h1 = H + 2D has |h1_i| <= 2 bound + |H_i|."""
    return 2 * doc.bound + max(abs(c) for c in doc.H)


def cmd_oracle(doc: InputDocument, faults: frozenset[str] = frozenset()) -> tuple[OutputDocument, int]:
    try:
        L = _require_valid(doc)
    except (InputError, CriterionError, LatticeError) as e:
        return _invalid_document("oracle", doc, [f"invalid input: {e}"]), EXIT_INVALID
    hb = h1_bound(doc)
    pairs = {
        "h1": (search_h1(L, doc.H, hb, faults=faults), oracle.brute_h1(L.gram, doc.H, hb), hb),
        "D": (search_D(L, doc.H, doc.bound), oracle.brute_D(L.gram, doc.H, doc.bound), doc.bound),
    }
    results = {}
    diags = []
    ok = True
    for name, (fast, slow, b) in pairs.items():
        only_fast = sorted(set(fast) - set(slow))
        only_slow = sorted(set(slow) - set(fast))
        results[name] = {
            "bound": b,
            "count": len(slow),
            "only_search": [list(v) for v in only_fast],
            "only_oracle": [list(v) for v in only_slow],
        }
        if fast != slow:
            ok = False
            diags.append(f"{name}: {len(only_fast)} only in search, {len(only_slow)} only in oracle")
    if faults:
        diags.append(f"fault injection active: {', '.join(sorted(faults))}")
    return OutputDocument(
        command="oracle",
        verdict=ORACLE_AGREES if ok else ORACLE_MISMATCH,
        bound=doc.bound,
        diagnostics=diags,
        results=results,
    ), EXIT_OK if ok else EXIT_ORACLE_MISMATCH


SWEEP_FIELDS = ["e", "f", "hyperbolic", "mukai_condition", "verdict", "case", "D"]


def sweep_row(e: int, f: int, bound: int, depth: int) -> dict:
    L = IntegerLattice([[8, e], [e, 2 * f]])
    H = (1, 0)
    inv = invariants(L)
    row = {"e": e, "f": f, "hyperbolic": inv.hyperbolic and inv.det != 0,
           "mukai_condition": necessary_report(L, H).mukai_condition,
           "verdict": INPUT_INVALID, "case": None, "D": None}
    if row["hyperbolic"]:
        v = verdict(L, H, bound, depth)
        row["verdict"] = v.status
        if v.witness is not None:
            row["case"] = v.witness.case
            row["D"] = list(v.witness.D)
    return row


def _sweep_cell(args: tuple[int, int, int, int]) -> dict:
    return sweep_row(*args)


def cmd_sweep(e_range: tuple[int, int], f_range: tuple[int, int], bound: int, depth: int,
              jobs: int = 1) -> tuple[OutputDocument, int]:
    cells = [(e, f, bound, depth)
             for e in range(e_range[0], e_range[1] + 1)
             for f in range(f_range[0], f_range[1] + 1)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            rows = list(ex.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    return OutputDocument(command="sweep", verdict=f"{len(rows)} cells", bound=bound, results=rows), EXIT_OK


def walls_summary(walls: WallSet) -> dict:
    return {
        "bound": walls.bound,
        "count": len(walls.roots),
        "empty": not walls.roots,
        "roots": [list(r) for r in walls.roots],
        "ambiguous": [list(r) for r in sorted(walls.ambiguous)],
        "complete_within_bound": walls.complete_within_bound,
    }


def cmd_walls(doc: InputDocument, h1: Sequence[int]) -> tuple[OutputDocument, int]:
    try:
        L = _require_valid(doc)
        h1 = as_vec(h1)
        if len(h1) != L.rank:
            raise InputError(f"h1 has length {len(h1)}, lattice rank is {L.rank}")
        if norm(L, h1) != -4:
            raise InputError(f"h1^2 = {norm(L, h1)}, the test needs h1^2 = -4")
    except (InputError, CriterionError, LatticeError) as e:
        return _invalid_document("walls", doc, [f"invalid input: {e}"]), EXIT_INVALID
    walls = chambers.minus_two_classes(L, doc.bound, doc.H)
    cert = chambers.is_not_pseudo_effective(L, doc.H, h1, doc.bound, walls=walls)
    diags = ["no (-2)-classes within the bound"] if not walls.roots else []
    return OutputDocument(
        command="walls",
        verdict=cert.status,
        bound=doc.bound,
        diagnostics=diags,
        results={"walls": walls_summary(walls), "certificate": cert.to_dict()},
    ), EXIT_OK


# ---------------------------------------------------------------------------
# rendering


def _color(text: str, code: str, stream) -> str:
    if os.environ.get("NO_COLOR") or not getattr(stream, "isatty", lambda: False)():
        return text
    return f"\x1b[{code}m{text}\x1b[0m"


def _vec(v) -> str:
    return "(" + ",".join(str(c) for c in v) + ")"


def render_text(doc: OutputDocument, stream=None) -> str:
    stream = stream or sys.stdout
    good = doc.verdict in (SUFFICIENT_HOLDS, ORACLE_AGREES, chambers.WALL_INSIDE_NEF,
                           chambers.NOT_PSEUDO_EFFECTIVE_PAIR)
    lines = [f"{doc.command}: " + _color(doc.verdict, "32" if good else "33", stream)]
    if doc.bound is not None:
        lines.append(f"bound: {doc.bound}")
    if doc.witness:
        w = doc.witness
        lines.append(f"case: {w['case']}  h1: {_vec(w['h1'])}  D: {_vec(w['D'])}")
    if doc.chain_text:
        lines.append(f"chain: {doc.chain_text}")
    if doc.necessary_report:
        nr = doc.necessary_report
        lines.append(f"mukai condition: {str(nr['mukai_condition']).lower()}  rank: {nr['rank']}")
        lines += [f"note: {n}" for n in nr["notes"]]
    if doc.command == "search" and doc.results:
        lines += [_vec(v) for v in doc.results["vectors"]]
    elif doc.command == "sweep" and doc.results:
        for r in doc.results:
            case = r["case"] or "-"
            lines.append(f"e={r['e']:>3} f={r['f']:>3}  {r['verdict']:<20} {case}")
    elif doc.command == "walls" and doc.results:
        ws = doc.results["walls"]
        lines.append(f"roots ({ws['count']}): " + " ".join(_vec(r) for r in ws["roots"]))
        cert = doc.results["certificate"]
        if "wall" in cert:
            lines.append(f"wall: {_vec(cert['wall'])}")
        if "H1" in cert:
            lines.append(f"H1: {_vec(cert['H1'])}  H2: {_vec(cert['H2'])}")
    lines += [f"diagnostic: {d}" for d in doc.diagnostics]
    return "\n".join(lines) + "\n"


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, list):
        return " ".join(str(c) for c in v)
    return str(v)


def render_csv(doc: OutputDocument) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if doc.command == "sweep":
        w.writerow(SWEEP_FIELDS)
        for r in doc.results:
            w.writerow([_csv_value(r[k]) for k in SWEEP_FIELDS])
    elif doc.command == "search":
        w.writerow([doc.results["target"]])
        for v in doc.results["vectors"]:
            w.writerow([_csv_value(v)])
    elif doc.command == "walls" and doc.verdict != INPUT_INVALID:
        w.writerow(["root"])
        for r in doc.results["walls"]["roots"]:
            w.writerow([_csv_value(r)])
    else:
        wit = doc.witness or {}
        w.writerow(["command", "verdict", "case", "h1", "D"])
        w.writerow([doc.command, doc.verdict, wit.get("case", ""), _csv_value(wit.get("h1")),
                    _csv_value(wit.get("D"))])
    return buf.getvalue()


def render(doc: OutputDocument, fmt: str) -> str:
    if fmt == "text":
        return render_text(doc)
    if fmt == "csv":
        return render_csv(doc)
    return emit_json(doc)


# ---------------------------------------------------------------------------
# argument parsing


def _csv_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bound", type=int, default=argparse.SUPPRESS, help="coordinate box bound (default 64)")
    common.add_argument("--depth", type=int, default=argparse.SUPPRESS, help="orbit search depth (default 8)")
    common.add_argument("--format", choices=["json", "text", "csv"], default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="k3moduli", parents=[common],
                                description="Decide when M_X(2,H,2) is isomorphic to X from the Picard lattice.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        if name != "sweep":
            sp.add_argument("input", nargs="?", default="-", help="JSON input document (default: stdin)")
        return sp

    add("check", "run the full criterion")
    sp = add("search", "list all witnesses in the box")
    sp.add_argument("--target", choices=["h1", "D"], default="h1")
    sp = add("oracle", "compare the search against a naive brute force")
    sp.add_argument("--inject-fault", action="append", default=[], help=argparse.SUPPRESS)
    sp = add("sweep", "run the criterion over the family [[8,e],[e,2f]] with H=(1,0)")
    for name in ("--e-min", "--e-max", "--f-min", "--f-max"):
        sp.add_argument(name, type=int, required=True)
    sp.add_argument("--jobs", type=int, default=1)
    sp = add("walls", "(-2)-walls and the non-pseudo-effectivity certificate for h1")
    sp.add_argument("--h1", type=_csv_ints, required=True)
    return p


def _read_input(path: str, args) -> InputDocument:
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON: {e}") from e
    doc = InputDocument.from_dict(raw)
    if hasattr(args, "bound"):
        doc = InputDocument(doc.gram, doc.H, args.bound, doc.orbit_depth, doc.assert_nef)
    if hasattr(args, "depth"):
        doc = InputDocument(doc.gram, doc.H, doc.bound, args.depth, doc.assert_nef)
    if doc.bound < 1 or doc.orbit_depth < 0:
        raise InputError("bound must be positive and depth nonnegative")
    return doc


def run(argv: Sequence[str] | None = None) -> tuple[str, int]:
    args = build_parser().parse_args(argv)
    fmt = getattr(args, "format", "json")
    if args.command == "sweep":
        bound = getattr(args, "bound", DEFAULT_BOUND)
        depth = getattr(args, "depth", chambers.DEFAULT_DEPTH)
        doc, code = cmd_sweep((args.e_min, args.e_max), (args.f_min, args.f_max), bound, depth, args.jobs)
        return render(doc, fmt), code
    try:
        inp = _read_input(args.input, args)
    except (InputError, OSError) as e:
        return render(_invalid_document(args.command, None, [f"invalid input: {e}"]), fmt), EXIT_INVALID
    if args.command == "check":
        doc, code = cmd_check(inp)
    elif args.command == "search":
        doc, code = cmd_search(inp, args.target)
    elif args.command == "oracle":
        doc, code = cmd_oracle(inp, frozenset(args.inject_fault))
    else:
        doc, code = cmd_walls(inp, args.h1)
    return render(doc, fmt), code


def main(argv: Sequence[str] | None = None) -> int:
    out, code = run(argv)
    sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
