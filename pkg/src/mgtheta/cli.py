"""Command-line front end: ``mgtheta {ingest,bounds,verify}``.

Exit codes: 0 success, 2 input error, 3 solver failure, 4 verification
failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .classical import alpha
from .graphs import (
    ExclusivityMultigraph,
    GraphError,
    flatten,
    load_multigraph,
    multigraph_to_document,
)
from .hierarchy import BoundOptions, HierarchyError, label_consistency_check, mtheta_bound
from .ingest import (
    BUNDLED_INSTANCES,
    ExpressionError,
    build_multigraph,
    bundled_multigraph,
    format_event_table,
    load_expression,
)
from .moments import UnsupportedConstraintFamily
from .sdp import SdpError
from .theta import ThetaError, gls_theta, moment_theta
from .words import LevelTooLarge

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4

DEFAULT_SEED = 42

log = logging.getLogger("mgtheta")


class InputError(Exception):
    pass


# -- shared helpers ------------------------------------------------------------


def resolve_multigraph(source: str) -> tuple[str, ExclusivityMultigraph]:
    """A multigraph file, an expression file, or a bundled instance name."""
    path = Path(source)
    if path.is_file():
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{source}: line {exc.lineno}: {exc.msg}") from exc
        if isinstance(doc, dict) and "terms" in doc:
            return path.stem, build_multigraph(load_expression(path))[0]
        return path.stem, load_multigraph(path)
    if source in BUNDLED_INSTANCES:
        return source, bundled_multigraph(source)
    raise InputError(
        f"{source!r} is neither a readable file nor a bundled instance "
        f"({', '.join(BUNDLED_INSTANCES)})"
    )


def bound_options(level: str, x: int | None, trials: int, seed: int, mode: str, k: int | None = None) -> BoundOptions:
    if level == "1.x" and x is None:
        raise InputError("--level 1.x needs --x")
    if level == "k" and k is None:
        raise InputError("--level k needs --k")
    return BoundOptions(level=level, x=x, k=k, trials=trials, seed=seed, mode=mode)


def compute(quantity: str, name: str, mg: ExclusivityMultigraph, opts: BoundOptions | None) -> dict:
    """Scalar document for alpha/theta, a BoundReport document for mtheta."""
    flat = flatten(mg)
    if quantity == "alpha":
        res = alpha(flat)
        return {"instance": name, "quantity": "alpha", "value": res.value, "witness": list(res.witness)}
    if quantity == "theta":
        mom = moment_theta(flat)
        gls = gls_theta(flat)
        return {
            "instance": name, "quantity": "theta", "value": mom.value,
            "gls_value": gls.value, "formulation": mom.formulation,
        }
    report = mtheta_bound(mg, opts, instance=name)
    doc = report.to_document()
    doc["quantity"] = "mtheta"
    doc["label_pairs_flagged"] = sum(p.flagged for p in label_consistency_check(report, mg))
    return doc


def render_text(doc: dict) -> str:
    if doc["quantity"] in ("alpha", "theta"):
        lines = [f"{doc['quantity']}({doc['instance']}) = {doc['value']:.10g}"]
        if "gls_value" in doc:
            lines.append(f"  gls cross-check = {doc['gls_value']:.10g}")
        if "witness" in doc:
            lines.append(f"  witness (1-based) = {[v + 1 for v in doc['witness']]}")
        return "\n".join(lines) + "\n"
    lines = [
        f"mtheta({doc['instance']}, level {doc['level']}, mode {doc['mode']}) = {doc['bound']:.10g}",
        f"  alpha(flat) = {doc['alpha']:.10g}   theta(flat) = {doc['theta_flatten']:.10g}",
        f"  trials = {doc['trials']}   seed = {doc['seed']}",
    ]
    for t in doc["per_trial"]:
        lines.append(
            f"  trial {t['trial']:>3}: {t['value']:.10g}  [{t['status']}, {t['backend']}, "
            f"{t['wall_ms'] / 1000:.1f} s]"
        )
    return "\n".join(lines) + "\n"


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- verification suites ---------------------------------------------------------


@dataclass(frozen=True)
class VerifySuiteEntry:
    instance: str
    quantity: str
    options: dict
    expected: float | None = None
    tolerance: float | None = None
    band: tuple[float, float] | None = None
    slow: bool = False

    def __post_init__(self):
        if self.quantity not in ("alpha", "theta", "mtheta"):
            raise InputError(f"unknown quantity {self.quantity!r}")
        if self.band is not None:
            if self.band[0] > self.band[1]:
                raise InputError(f"band {self.band} has lower edge above upper edge")
        elif self.expected is None or self.tolerance is None or not self.tolerance > 0:
            raise InputError("entry needs either a band or an expected value with tolerance > 0")

    @property
    def comparison(self) -> str:
        return "within-band" if self.band is not None else "equals"

    def check(self, value: float) -> bool:
        if not math.isfinite(value):
            return False
        if self.band is not None:
            return self.band[0] <= value <= self.band[1]
        return abs(value - self.expected) <= self.tolerance

    def describe(self) -> str:
        if self.band is not None:
            return f"[{self.band[0]}, {self.band[1]}]"
        return f"{self.expected} +/- {self.tolerance:g}"

    @classmethod
    def from_document(cls, doc: dict) -> VerifySuiteEntry:
        band = tuple(doc["band"]) if doc.get("band") is not None else None
        return cls(
            instance=doc["instance"], quantity=doc["quantity"], options=dict(doc.get("options", {})),
            expected=doc.get("expected"), tolerance=doc.get("tolerance"), band=band,
            slow=bool(doc.get("slow", False)),
        )


def load_suite(suite: str) -> list[VerifySuiteEntry]:
    path = Path(suite)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    else:
        ref = resources.files("mgtheta") / "data" / "suites" / f"{suite}.json"
        if not ref.is_file():
            raise InputError(f"unknown suite {suite!r}")
        text = ref.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
        return [VerifySuiteEntry.from_document(e) for e in doc["entries"]]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"suite {suite!r} is malformed: {exc}") from exc


def run_suite(entries: Sequence[VerifySuiteEntry], skip_slow: bool = False) -> tuple[list[dict], bool]:
    rows, all_ok = [], True
    for e in entries:
        if skip_slow and e.slow:
            rows.append({"instance": e.instance, "quantity": e.quantity, "status": "skipped"})
            continue
        name, mg = resolve_multigraph(e.instance)
        opts = None
        if e.quantity == "mtheta":
            o = {"level": "1+AB", "trials": 20, "seed": DEFAULT_SEED, "mode": "sub", **e.options}
            opts = bound_options(o["level"], o.get("x"), o["trials"], o["seed"], o["mode"], o.get("k"))
        try:
            doc = compute(e.quantity, name, mg, opts)
            value = doc["bound"] if e.quantity == "mtheta" else doc["value"]
            error = None
        except (ThetaError, HierarchyError, SdpError) as exc:
            value, error = float("nan"), str(exc)
        ok = error is None and e.check(value)
        all_ok &= ok
        row = {
            "instance": e.instance, "quantity": e.quantity,
            "level": opts.descriptor if opts else None, "expected": e.describe(),
            "computed": value, "status": "pass" if ok else "fail",
        }
        if e.band is None and math.isfinite(value):
            row["delta"] = value - e.expected
        if error:
            row["error"] = error
        rows.append(row)
    return rows, all_ok


# -- commands ----------------------------------------------------------------------


def cmd_ingest(args) -> int:
    path = Path(args.expression)
    if path.is_file():
        expr = load_expression(path)
    elif args.expression in BUNDLED_INSTANCES:
        from .ingest import bundled_expression

        expr = bundled_expression(args.expression)
    else:
        raise InputError(f"cannot read expression file {args.expression!r}")
    mg, table = build_multigraph(expr)
    doc = multigraph_to_document(mg)
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    if args.format == "json":
        sys.stdout.write(json.dumps({"multigraph": doc, "table": table}, indent=2) + "\n")
    else:
        sys.stdout.write(format_event_table(table, mg.weights))
    return EXIT_OK


def cmd_bounds(args) -> int:
    name, mg = resolve_multigraph(args.graph)
    opts = None
    if args.quantity == "mtheta":
        opts = bound_options(args.level, args.x, args.trials, args.seed, args.mode, args.k)
    doc = compute(args.quantity, name, mg, opts)
    text = json.dumps(doc, indent=2) + "\n" if args.format == "json" else render_text(doc)
    emit(text, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    rows, ok = run_suite(load_suite(args.suite), skip_slow=args.skip_slow)
    if args.format == "json":
        text = json.dumps({"suite": args.suite, "passed": ok, "entries": rows}, indent=2) + "\n"
    else:
        lines = []
        for r in rows:
            if r["status"] == "skipped":
                lines.append(f"SKIP  {r['quantity']:<6} {r['instance']}")
                continue
            level = f" ({r['level']})" if r["level"] else ""
            delta = f"  delta {r['delta']:+.2e}" if "delta" in r else ""
            lines.append(
                f"{r['status'].upper():<5} {r['quantity']:<6} {r['instance']}{level}: "
                f"computed {r['computed']:.8g}, expected {r['expected']}{delta}"
            )
        lines.append("all entries passed" if ok else "some entries FAILED")
        text = "\n".join(lines) + "\n"
    emit(text, args.out)
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mgtheta", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="expression file -> multigraph file and event table")
    p.add_argument("expression", help="expression file or bundled instance name")
    p.add_argument("--out", help="write the multigraph document here")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("bounds", help="alpha, theta or multigraph-hierarchy bound")
    p.add_argument("quantity", choices=("alpha", "theta", "mtheta"))
    p.add_argument("graph", help="multigraph file, expression file or bundled instance name")
    p.add_argument("--level", choices=("1", "1.x", "1+AB", "k"), default="1+AB")
    p.add_argument("--x", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--mode", choices=("sub", "strict"), default="sub")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run a golden suite (bundled id or suite file)")
    p.add_argument("suite")
    p.add_argument("--skip-slow", action="store_true", help="skip entries marked slow (randomized levels, first-order solves)")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ThetaError, HierarchyError, SdpError, LevelTooLarge, UnsupportedConstraintFamily) as exc:
        print(f"mgtheta: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InputError, ExpressionError, GraphError, ValueError, OSError) as exc:
        print(f"mgtheta: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
