"""Positive-form correlation expressions and their exclusivity multigraphs.

An expression is ``S = sum_i w_i P(e_i)`` with every ``w_i > 0``. Each event
``e_i`` carries, per party, either a ``(setting, outcome)`` pair or nothing
(the party does not measure). Settings and outcomes are opaque tokens.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .graphs import ExclusivityMultigraph, validate_multigraph

Part = tuple[str, str] | None

BUNDLED_INSTANCES = ("chsh", "pent1", "pent2", "pent3", "i3csw", "i3322csw")


class ExpressionError(ValueError):
    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}" if detail else kind)


@dataclass(frozen=True)
class BellTerm:
    weight: float
    parts: tuple[Part, ...]


@dataclass(frozen=True)
class BellExpression:
    parties: tuple[str, ...]
    terms: tuple[BellTerm, ...]


def parse_expression(doc: Mapping) -> BellExpression:
    """Validate an expression document (see README for the schema)."""
    if not isinstance(doc, Mapping):
        raise ExpressionError("malformed", "expression document must be an object")
    try:
        parties = tuple(str(p) for p in doc["parties"])
        raw_terms = list(doc["terms"])
    except (KeyError, TypeError) as exc:
        raise ExpressionError("malformed", f"missing field {exc}") from exc
    if not parties or len(set(parties)) != len(parties):
        raise ExpressionError("malformed", "parties must be non-empty and duplicate-free")

    terms = []
    seen: dict[tuple[Part, ...], int] = {}
    for k, raw in enumerate(raw_terms):
        try:
            weight = float(raw["weight"])
            raw_parts = raw["parts"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ExpressionError("malformed", f"term {k}: {exc}") from exc
        if not math.isfinite(weight) or weight <= 0:
            raise ExpressionError(
                "positive form",
                f"term {k} has weight {weight}; expression must be in positive form "
                "(rewrite negative terms via normalization first)",
            )
        for name in raw_parts:
            if name not in parties:
                raise ExpressionError("unknown party", f"term {k} references party {name!r}")
        parts: list[Part] = []
        for name in parties:
            p = raw_parts.get(name)
            if p is None:
                parts.append(None)
            else:
                try:
                    parts.append((str(p["setting"]), str(p["outcome"])))
                except (KeyError, TypeError) as exc:
                    raise ExpressionError("malformed", f"term {k}, party {name}: {exc}") from exc
        if all(p is None for p in parts):
            raise ExpressionError("malformed", f"term {k} has no party measuring")
        key = tuple(parts)
        if key in seen:
            raise ExpressionError(
                "duplicate event", f"terms {seen[key]} and {k} describe the same event"
            )
        seen[key] = k
        terms.append(BellTerm(weight, key))
    if not terms:
        raise ExpressionError("malformed", "expression has no terms")
    return BellExpression(parties, tuple(terms))


def expression_to_document(expr: BellExpression) -> dict:
    terms = []
    for t in expr.terms:
        parts = {
            name: (None if p is None else {"setting": p[0], "outcome": p[1]})
            for name, p in zip(expr.parties, t.parts)
        }
        terms.append({"weight": t.weight, "parts": parts})
    return {"parties": list(expr.parties), "terms": terms}


def event_string(parts: Sequence[Part]) -> str:
    """Render parts in ``ab|xy`` notation, ``_`` marking an absent party."""
    outs = ["_" if p is None else p[1] for p in parts]
    sets = ["_" if p is None else p[0] for p in parts]
    sep = "" if all(len(t) == 1 for t in outs + sets) else ","
    return f"{sep.join(outs)}|{sep.join(sets)}"


def parse_event(text: str, n_parties: int) -> tuple[Part, ...]:
    """Inverse of :func:`event_string`."""
    try:
        outs, sets = text.split("|")
    except ValueError:
        raise ExpressionError("malformed", f"event {text!r} needs exactly one '|'") from None
    outs_t = outs.split(",") if "," in outs else list(outs)
    sets_t = sets.split(",") if "," in sets else list(sets)
    if len(outs_t) != n_parties or len(sets_t) != n_parties:
        raise ExpressionError("malformed", f"event {text!r} does not have {n_parties} parts")
    parts: list[Part] = []
    for o, s in zip(outs_t, sets_t):
        if (o == "_") != (s == "_"):
            raise ExpressionError("malformed", f"event {text!r} mixes '_' with a token")
        parts.append(None if o == "_" else (s, o))
    return tuple(parts)


def expression_from_events(
    events: Sequence[tuple[float, str]], parties: Sequence[str] = ("A", "B")
) -> BellExpression:
    """Build an expression from ``(weight, "ab|xy")`` pairs."""
    doc = {"parties": list(parties), "terms": []}
    for w, text in events:
        parts = parse_event(text, len(parties))
        doc["terms"].append({
            "weight": w,
            "parts": {
                name: (None if p is None else {"setting": p[0], "outcome": p[1]})
                for name, p in zip(parties, parts)
            },
        })
    return parse_expression(doc)


def build_multigraph(expr: BellExpression) -> tuple[ExclusivityMultigraph, list[str]]:
    """Exclusivity multigraph of ``expr`` plus the vertex -> event table.

    In factor J two vertices are adjacent iff both events have a J-part with
    the same setting and different outcomes.
    """
    n = len(expr.terms)
    factors = []
    for k in range(len(expr.parties)):
        edges = []
        for i in range(n):
            pi = expr.terms[i].parts[k]
            if pi is None:
                continue
            for j in range(i + 1, n):
                pj = expr.terms[j].parts[k]
                if pj is not None and pi[0] == pj[0] and pi[1] != pj[1]:
                    edges.append((i, j))
        factors.append(edges)
    table = [event_string(t.parts) for t in expr.terms]
    mg = validate_multigraph([t.weight for t in expr.terms], expr.parties, factors, table)
    return mg, table


def format_event_table(table: Sequence[str], weights: Sequence[float] | None = None) -> str:
    """Human-readable ``Vertex / Event`` listing with 1-based vertex numbers."""
    lines = ["Vertex  Event" + ("  Weight" if weights is not None else "")]
    for i, ev in enumerate(table):
        row = f"{i + 1:>6}  {ev}"
        if weights is not None:
            row = f"{row:<14}  {weights[i]:g}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def load_expression(path: str | Path) -> BellExpression:
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise ExpressionError("malformed", f"{path}: empty file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ExpressionError("malformed", f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return parse_expression(doc)


def bundled_expression(name: str) -> BellExpression:
    if name not in BUNDLED_INSTANCES:
        raise KeyError(f"unknown instance {name!r}; choose from {', '.join(BUNDLED_INSTANCES)}")
    ref = resources.files("mgtheta") / "data" / "instances" / f"{name}.json"
    return parse_expression(json.loads(ref.read_text(encoding="utf-8")))


def bundled_multigraph(name: str) -> ExclusivityMultigraph:
    return build_multigraph(bundled_expression(name))[0]
