"""Command-line entry point.

Exit codes: 0 every requested verdict is affirmative, 1 at least one is
negative, 2 the input is unusable, 3 a resource budget ran out.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from typing import Sequence

from . import __version__
from .errors import (
    DegenerateStructureError,
    InconsistencyError,
    MalformedInputError,
    PreconditionError,
    ResourceExhaustedError,
    WellPosednessError,
)
from .groebner import DEFAULT_STEP_BUDGET
from .identifiability import (
    build_F,
    identifiability_verdict,
    parse_knowns,
    resample_check,
    build_identifiability_ideal,
    dim_Vc,
)
from .informativity import Method, groebner_rank_case, informativity_from_M
from .netmodel import (
    NetworkSpec,
    apply_knowns,
    assemble_informativity_M,
    subnetwork_transform,
    validate_spec,
)
from .oracle import ProbeConfig

log = logging.getLogger("netalg")

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


def _split(text: str | None) -> list[str]:
    if not text:
        return []
    return [x.strip() for x in text.split(",") if x.strip()]


def _columns(text: str | None, labels: Sequence[str]) -> list[int] | None:
    """Column indices from labels or 0-based integers."""
    items = _split(text)
    if not items:
        return None
    out = []
    for item in items:
        if item.isdigit():
            out.append(int(item))
        elif item in labels:
            out.append(list(labels).index(item))
        else:
            raise PreconditionError(f"unknown column {item!r}; expected one of {list(labels)} or an index")
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", help="network description (JSON)")
    p.add_argument("--method", choices=[m.value for m in Method], default="all", help="generic-rank method")
    p.add_argument("--drop-inputs", default="", help="comma list of input columns to leave unexcited")
    p.add_argument("--drop-predictor", default="", help="comma list of measured rows to leave out of the predictor")
    p.add_argument("--known", action="append", default=[], metavar="NAME=VALUE", help="treat a free entry as known")
    p.add_argument("--constraint", action="append", default=[], metavar="POLY", help="extra relation among the free entries")
    p.add_argument("--gc-columns", default="", help="closed-loop columns kept for identifiability")
    p.add_argument("--resample-knowns", type=int, default=0, metavar="N", help="re-run with N fresh samples of known values")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=5, help="numeric probe trials")
    p.add_argument("--budget", type=int, default=DEFAULT_STEP_BUDGET, help="reduction step budget per basis")
    p.add_argument("--order", choices=["block", "lex"], default="block", help="elimination order for identifiability")
    p.add_argument("--output", help="write the machine report here")
    p.add_argument("--dump-basis", metavar="PATH", help="write the Groebner basis used as evidence")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    p.add_argument("--no-assume-spectrum", action="store_true", help="withdraw the positive-definite spectrum assumption")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netalg", description="Informativity and identifiability of structured dynamic networks.")
    parser.add_argument("--version", action="version", version=f"netalg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="run informativity and/or identifiability")
    _common(check)
    check.add_argument("--informativity", action="store_true")
    check.add_argument("--identifiability", action="store_true")

    subnet = sub.add_parser("subnet", help="analyse a sub-network A of the nodes")
    _common(subnet)
    subnet.add_argument("--a-nodes", required=True, help="comma list of A-part nodes")
    subnet.add_argument("--mode", choices=["nodes", "combinations", "mixed"], default="nodes")
    subnet.add_argument("--assign", default="", help="mixed mode: comma list node=nodes|combinations")
    subnet.add_argument("--check", choices=["informativity", "identifiability", "all"], default="all")

    rank = sub.add_parser("rank", help="generic rank, or the case for one k")
    _common(rank)
    rank.add_argument("--k", type=int, help="classify rank >= k instead of searching")

    dump = sub.add_parser("dump", help="print an intermediate object")
    _common(dump)
    dump.add_argument("what", choices=["basis", "pi", "F", "M"])
    return parser


def _load(path: str) -> tuple[dict, str]:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedInputError(f"{path}: invalid JSON ({exc})") from exc
    return raw, hashlib.sha256(data).hexdigest()


def _prepare(args) -> tuple[NetworkSpec, dict]:
    raw, digest = _load(args.file)
    if args.constraint and isinstance(raw, dict):
        raw = {**raw, "constraints": list(raw.get("constraints", [])) + list(args.constraint)}
    spec = validate_spec(raw)
    if args.no_assume_spectrum:
        spec.spectrum_positive_definite = False
    knowns = parse_knowns(args.known)
    spec = apply_knowns(spec, knowns)
    options = {
        "command": args.command,
        "method": args.method,
        "drop_inputs": _split(args.drop_inputs),
        "drop_predictor": _split(args.drop_predictor),
        "known": {k: str(v) for k, v in knowns.items()},
        "constraints": list(spec.constraints),
        "gc_columns": _split(args.gc_columns),
        "resample_knowns": args.resample_knowns,
        "seed": args.seed,
        "trials": args.trials,
        "budget": args.budget,
        "order": args.order,
    }
    return spec, {"input_sha256": digest, "options": options}


class _Run:
    """Collects sections of the machine report and the overall outcome."""

    def __init__(self, args, header: dict):
        self.args = args
        self.report = {"tool": f"netalg {__version__}", **header}
        self.negative = False
        self.timings: dict[str, float] = {}
        self.lines: list[str] = []
        self.probe = ProbeConfig(trials=args.trials, seed=args.seed)
        self.report["probe"] = self.probe.describe()
        self.basis_text: str | None = None

    def timed(self, name, fn, *a, **kw):
        t0 = time.perf_counter()
        try:
            return fn(*a, **kw)
        finally:
            self.timings[name] = round(time.perf_counter() - t0, 3)

    def informativity(self, M, spec: NetworkSpec, label: str = "informativity") -> None:
        rep = self.timed(label, informativity_from_M, M, spec.spectrum_positive_definite, self.args.method,
                         self.args.budget, self.probe, spec.constraints)
        self.report[label] = {**rep.to_json(), "M_rows": M.row_labels, "M_cols": M.col_labels}
        self.negative |= not rep.informative
        ranks = ", ".join(f"{k} {v}" for k, v in rep.ranks.items())
        self.lines.append(f"{label}: {rep.verdict} (generic rank {rep.generic_rank}/{rep.required_rank}; {ranks})")
        for c in rep.caveats:
            self.lines.append(f"  caveat: {c}")
        if rep.basis is not None and self.basis_text is None:
            self.basis_text = rep.basis.dump()

    def identifiability(self, spec: NetworkSpec, label: str = "identifiability") -> None:
        F, _ = build_F(spec)
        keep = _columns(self.args.gc_columns, spec.r_names)
        rep = self.timed(label, identifiability_verdict, spec, keep, self.args.order, self.args.budget)
        body = rep.to_json()
        body["F_shape"] = [F.rows, F.cols]
        body["F_columns"] = list(spec.r_names)
        if self.args.resample_knowns:
            def verdict_of(s):
                return identifiability_verdict(s, keep, self.args.order, self.args.budget).verdict

            warnings = resample_check(spec, self.args.resample_knowns, self.args.seed, verdict_of)
            body["resample_warnings"] = warnings
            rep.caveats.extend(warnings)
        self.report[label] = body
        self.negative |= not rep.identifiable
        self.lines.append(f"{label}: {rep.verdict} (dim V_o {rep.dim_Vo}, dim V_c {rep.dim_Vc}, fiber {rep.fiber_dim})")
        for c in rep.caveats:
            self.lines.append(f"  caveat: {c}")
        if rep.basis is not None:
            self.basis_text = rep.basis.dump()

    def finish(self) -> int:
        if self.args.timings:
            self.report["timings"] = self.timings
        text = json.dumps(self.report, indent=1, sort_keys=True, default=str) + "\n"
        if self.args.output:
            with open(self.args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        if self.args.dump_basis:
            with open(self.args.dump_basis, "w", encoding="utf-8") as fh:
                fh.write(self.basis_text or "# no basis computed\n")
        for line in self.lines:
            print(line)
        return EXIT_NEGATIVE if self.negative else EXIT_OK


def _identifiability_target(spec: NetworkSpec, run: _Run) -> NetworkSpec:
    """Apply the file's default sub-network view, if any."""
    view = spec.identifiability
    if not view or not view.get("a_nodes"):
        return spec
    res = subnetwork_transform(spec, view["a_nodes"], view.get("mode", "nodes"), view.get("assign"))
    run.report["identifiability_view"] = {"index_map": res.index_map, "notes": res.notes}
    return res.ident_spec


def cmd_check(args) -> int:
    spec, header = _prepare(args)
    run = _Run(args, header)
    both = not args.informativity and not args.identifiability
    if args.informativity or both:
        M = assemble_informativity_M(spec, _split(args.drop_inputs), _split(args.drop_predictor))
        run.informativity(M, spec)
    if args.identifiability or both:
        run.identifiability(_identifiability_target(spec, run))
    return run.finish()


def cmd_subnet(args) -> int:
    spec, header = _prepare(args)
    run = _Run(args, header)
    assign = dict(item.split("=", 1) for item in _split(args.assign)) if args.assign else None
    res = subnetwork_transform(spec, _split(args.a_nodes), args.mode, assign,
                               _split(args.drop_inputs), _split(args.drop_predictor))
    run.report["subnetwork"] = {"mode": args.mode, "index_map": res.index_map, "notes": res.notes}
    if args.check in ("informativity", "all"):
        run.informativity(res.info_M, spec)
    if args.check in ("identifiability", "all"):
        run.identifiability(res.ident_spec)
    return run.finish()


def cmd_rank(args) -> int:
    spec, header = _prepare(args)
    run = _Run(args, header)
    M = assemble_informativity_M(spec, _split(args.drop_inputs), _split(args.drop_predictor))
    if args.k is None:
        run.informativity(M, spec, "rank")
        run.negative = False
        return run.finish()
    case = run.timed("rank", groebner_rank_case, M.pi(), args.k, args.budget, spec.constraints)
    run.report["rank_case"] = case.to_json()
    run.lines.append(f"rank >= {args.k}: {case.verdict.value}")
    for p in case.to_json()["degenerate_locus"]:
        run.lines.append(f"  locus: {p}")
    if case.basis is not None:
        run.basis_text = case.basis.dump()
    run.negative = not case.at_least_k
    return run.finish()


def cmd_dump(args) -> int:
    spec, _ = _prepare(args)
    if args.what == "M":
        M = assemble_informativity_M(spec, _split(args.drop_inputs), _split(args.drop_predictor))
        print("\t".join([""] + M.col_labels))
        for label, row in zip(M.row_labels, M.text()):
            print("\t".join([label] + row))
    elif args.what == "pi":
        M = assemble_informativity_M(spec, _split(args.drop_inputs), _split(args.drop_predictor))
        for row in M.pi().to_text():
            print("\t".join(row))
    elif args.what == "F":
        F, names = build_F(spec)
        print("# unknowns: " + ", ".join(names))
        for row in F.to_text():
            print("\t".join(row))
    else:
        F, _ = build_F(spec)
        keep = _columns(args.gc_columns, spec.r_names)
        ideal = build_identifiability_ideal(F, None, spec.constraints, keep, args.order)
        sys.stdout.write(dim_Vc(ideal, args.budget).basis.dump())
    return EXIT_OK


COMMANDS = {"check": cmd_check, "subnet": cmd_subnet, "rank": cmd_rank, "dump": cmd_dump}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.dump_basis and args.method == "graph":
        print("error: --dump-basis needs a Groebner computation; --method graph has none", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except ResourceExhaustedError as exc:
        print(f"error: {exc}; partial state {json.dumps(exc.state, sort_keys=True)}", file=sys.stderr)
        return EXIT_BUDGET
    except (MalformedInputError, PreconditionError, WellPosednessError, DegenerateStructureError, InconsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
