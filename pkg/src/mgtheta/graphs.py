"""Vertex-weighted graphs and edge-coloured exclusivity multigraphs.

Both types are immutable once validated. Vertices are the integers
``0..n-1``; edges are stored as sorted ``(i, j)`` tuples with ``i < j``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

Edge = tuple[int, int]


class GraphError(ValueError):
    """Raised when a graph description violates a structural invariant.

    ``kind`` is one of ``"nonpositive weight"``, ``"self-loop"``,
    ``"out-of-range endpoint"``, ``"duplicate edge"``, ``"bad parties"`` or
    ``"malformed"``.
    """

    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}" if detail else kind)


def _check_weights(weights: Sequence[float]) -> tuple[float, ...]:
    out = []
    for i, w in enumerate(weights):
        w = float(w)
        if not math.isfinite(w) or w <= 0:
            raise GraphError("nonpositive weight", f"vertex {i} has weight {w!r}")
        out.append(w)
    return tuple(out)


def _check_edges(n: int, edges: Iterable[Sequence[int]]) -> frozenset[Edge]:
    seen: set[Edge] = set()
    for e in edges:
        if len(e) != 2:
            raise GraphError("malformed", f"edge {e!r} does not have two endpoints")
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise GraphError("self-loop", f"edge ({i}, {j})")
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError("out-of-range endpoint", f"edge ({i}, {j}) with {n} vertices")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GraphError("duplicate edge", f"edge ({i}, {j})")
        seen.add(key)
    return frozenset(seen)


@dataclass(frozen=True)
class VertexWeightedGraph:
    """Simple graph with strictly positive vertex weights."""

    weights: tuple[float, ...]
    edges: frozenset[Edge]
    labels: tuple[str, ...] | None = None

    @property
    def vertex_count(self) -> int:
        return len(self.weights)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.vertex_count)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges


@dataclass(frozen=True)
class ExclusivityMultigraph:
    """Common vertex set with one simple factor (edge colour) per party."""

    weights: tuple[float, ...]
    parties: tuple[str, ...]
    factors: tuple[frozenset[Edge], ...]
    labels: tuple[str, ...] | None = None
    _adjacency: tuple[tuple[frozenset[int], ...], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        adj = []
        for edges in self.factors:
            rows: list[set[int]] = [set() for _ in range(len(self.weights))]
            for i, j in edges:
                rows[i].add(j)
                rows[j].add(i)
            adj.append(tuple(frozenset(r) for r in rows))
        object.__setattr__(self, "_adjacency", tuple(adj))

    @property
    def vertex_count(self) -> int:
        return len(self.weights)

    @property
    def party_count(self) -> int:
        return len(self.parties)

    def factor(self, party: int | str) -> VertexWeightedGraph:
        """The factor of one party as a standalone simple graph."""
        k = self.parties.index(party) if isinstance(party, str) else party
        return VertexWeightedGraph(self.weights, self.factors[k], self.labels)

    def adjacent(self, party: int, i: int, j: int) -> bool:
        return j in self._adjacency[party][i]

    def neighbours(self, party: int, i: int) -> frozenset[int]:
        return self._adjacency[party][i]


def validate_graph(
    weights: Sequence[float],
    edges: Iterable[Sequence[int]],
    labels: Sequence[str] | None = None,
) -> VertexWeightedGraph:
    """Validate a raw description and return a :class:`VertexWeightedGraph`."""
    w = _check_weights(weights)
    e = _check_edges(len(w), edges)
    if labels is not None and len(labels) != len(w):
        raise GraphError("malformed", "label count does not match vertex count")
    return VertexWeightedGraph(w, e, tuple(labels) if labels is not None else None)


def validate_multigraph(
    weights: Sequence[float],
    parties: Sequence[str],
    factors: Sequence[Iterable[Sequence[int]]],
    labels: Sequence[str] | None = None,
) -> ExclusivityMultigraph:
    w = _check_weights(weights)
    parties = tuple(str(p) for p in parties)
    if not parties or len(set(parties)) != len(parties):
        raise GraphError("bad parties", f"party list {list(parties)!r} must be non-empty and duplicate-free")
    if len(factors) != len(parties):
        raise GraphError("malformed", "need exactly one factor per party")
    # Factors are colour classes of a multigraph: the same vertex pair may
    # carry one edge in several factors (parallel edges of distinct colours).
    checked = tuple(_check_edges(len(w), f) for f in factors)
    if labels is not None and len(labels) != len(w):
        raise GraphError("malformed", "label count does not match vertex count")
    return ExclusivityMultigraph(w, parties, checked, tuple(labels) if labels is not None else None)


def flatten(mg: ExclusivityMultigraph) -> VertexWeightedGraph:
    """Merge parallel edges of all factors into one simple graph."""
    edges: set[Edge] = set()
    for f in mg.factors:
        edges |= f
    return VertexWeightedGraph(mg.weights, frozenset(edges), mg.labels)


def complement(g: VertexWeightedGraph) -> VertexWeightedGraph:
    n = g.vertex_count
    edges = frozenset(
        (i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in g.edges
    )
    return VertexWeightedGraph(g.weights, edges, g.labels)


def connected_components(g: VertexWeightedGraph) -> list[list[int]]:
    """Vertex blocks of ``g``, each sorted, ordered by smallest member."""
    adj = g.adjacency()
    seen = [False] * g.vertex_count
    blocks = []
    for root in range(g.vertex_count):
        if seen[root]:
            continue
        seen[root] = True
        stack, block = [root], []
        while stack:
            v = stack.pop()
            block.append(v)
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        blocks.append(sorted(block))
    return blocks


def maximal_cliques(g: VertexWeightedGraph) -> list[tuple[int, ...]]:
    """All inclusion-maximal cliques, each sorted, in lexicographic order.

    Bron-Kerbosch with Tomita pivoting. Isolated vertices come back as
    singleton cliques.
    """
    if g.vertex_count == 0:
        return []
    adj = g.adjacency()
    out: list[tuple[int, ...]] = []

    def expand(r: list[int], p: set[int], x: set[int]) -> None:
        if not p and not x:
            out.append(tuple(sorted(r)))
            return
        pivot = max(p | x, key=lambda u: (len(adj[u] & p), -u))
        for v in sorted(p - adj[pivot]):
            expand(r + [v], p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    expand([], set(range(g.vertex_count)), set())
    return sorted(out)


def clique_number(g: VertexWeightedGraph, vertices: Iterable[int] | None = None) -> int:
    """Size of the largest clique, optionally restricted to ``vertices``."""
    if vertices is not None:
        g = induced_subgraph(g, vertices)
    if g.vertex_count == 0:
        return 0
    return max(len(c) for c in maximal_cliques(g))


def induced_subgraph(g: VertexWeightedGraph, vertices: Iterable[int]) -> VertexWeightedGraph:
    """Subgraph on ``vertices`` relabelled to ``0..k-1`` in ascending order."""
    keep = sorted(set(vertices))
    index = {v: k for k, v in enumerate(keep)}
    edges = frozenset(
        (index[i], index[j]) for i, j in g.edges if i in index and j in index
    )
    labels = tuple(g.labels[v] for v in keep) if g.labels is not None else None
    return VertexWeightedGraph(tuple(g.weights[v] for v in keep), edges, labels)


# -- file format ---------------------------------------------------------------


def multigraph_to_document(mg: ExclusivityMultigraph) -> dict:
    vertices = []
    for i, w in enumerate(mg.weights):
        entry: dict = {"id": i, "weight": w}
        if mg.labels is not None:
            entry["label"] = mg.labels[i]
        vertices.append(entry)
    return {
        "vertices": vertices,
        "parties": list(mg.parties),
        "factors": [
            {"party": p, "edges": [list(e) for e in sorted(f)]}
            for p, f in zip(mg.parties, mg.factors)
        ],
    }


def multigraph_from_document(doc: Mapping) -> ExclusivityMultigraph:
    """Parse the JSON multigraph document; a simple graph is the one-factor case."""
    try:
        verts = sorted(doc["vertices"], key=lambda v: int(v["id"]))
        ids = [int(v["id"]) for v in verts]
        if ids != list(range(len(ids))):
            raise GraphError("malformed", "vertex ids must be exactly 0..n-1")
        weights = [v["weight"] for v in verts]
        has_labels = any("label" in v for v in verts)
        labels = [str(v.get("label", "")) for v in verts] if has_labels else None
        parties = list(doc["parties"])
        by_party: dict[str, list] = {}
        for f in doc["factors"]:
            if f["party"] not in parties:
                raise GraphError("malformed", f"factor for unknown party {f['party']!r}")
            if f["party"] in by_party:
                raise GraphError("malformed", f"two factors for party {f['party']!r}")
            by_party[f["party"]] = f["edges"]
    except (KeyError, TypeError) as exc:
        raise GraphError("malformed", f"missing or invalid field: {exc}") from exc
    factors = [by_party.get(p, []) for p in parties]
    return validate_multigraph(weights, parties, factors, labels)


def graph_to_multigraph(g: VertexWeightedGraph, party: str = "A") -> ExclusivityMultigraph:
    return ExclusivityMultigraph(g.weights, (party,), (g.edges,), g.labels)


def load_multigraph(path: str | Path) -> ExclusivityMultigraph:
    with open(path, encoding="utf-8") as fh:
        return multigraph_from_document(json.load(fh))


def save_multigraph(mg: ExclusivityMultigraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(multigraph_to_document(mg), indent=2) + "\n", encoding="utf-8")
