"""Weighted independence number of a vertex-weighted graph.

On the bundled instances this is the classical (local / non-contextual)
bound of the corresponding expression.
"""
from __future__ import annotations

from dataclasses import dataclass

from .graphs import VertexWeightedGraph

EXHAUSTIVE_LIMIT = 20


@dataclass(frozen=True)
class AlphaResult:
    value: float
    witness: tuple[int, ...]


def _better(value: float, witness: tuple[int, ...], best: AlphaResult, eps: float) -> bool:
    if value > best.value + eps:
        return True
    return abs(value - best.value) <= eps and witness < best.witness


def _clique_cover_bound(cands: list[int], adj: list[set[int]], w: tuple[float, ...]) -> float:
    """Greedy weighted clique cover: sum of the heaviest vertex of each clique."""
    cliques: list[list[int]] = []
    bound = 0.0
    for v in sorted(cands, key=lambda u: (-w[u], u)):
        for K in cliques:
            if all(u in adj[v] for u in K):
                K.append(v)
                break
        else:
            cliques.append([v])
            bound += w[v]
    return bound


def alpha(g: VertexWeightedGraph) -> AlphaResult:
    """Exact maximum-weight independent set by branch and bound.

    Among optimal sets the lexicographically smallest sorted tuple is
    returned.
    """
    n = g.vertex_count
    w = g.weights
    adj = g.adjacency()
    eps = 1e-12 * max(1.0, sum(w))
    best = AlphaResult(0.0, ())

    def search(chosen: list[int], weight: float, cands: list[int]) -> None:
        nonlocal best
        if not cands:
            witness = tuple(chosen)
            if _better(weight, witness, best, eps):
                best = AlphaResult(weight, witness)
            return
        if weight + _clique_cover_bound(cands, adj, w) < best.value - eps:
            return
        v, rest = cands[0], cands[1:]
        chosen.append(v)
        search(chosen, weight + w[v], [u for u in rest if u not in adj[v]])
        chosen.pop()
        search(chosen, weight, rest)

    search([], 0.0, list(range(n)))
    return AlphaResult(float(sum(w[v] for v in best.witness)), best.witness)


def alpha_exhaustive(g: VertexWeightedGraph) -> AlphaResult:
    """Reference value by enumerating every independent set (at most 20 vertices)."""
    n = g.vertex_count
    if n > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive search is limited to {EXHAUSTIVE_LIMIT} vertices, got {n}")
    adj = g.adjacency()
    w = g.weights
    eps = 1e-12 * max(1.0, sum(w))
    best = AlphaResult(0.0, ())

    # every independent set is visited once, in lexicographic order
    def visit(members: tuple[int, ...], weight: float, start: int) -> None:
        nonlocal best
        if _better(weight, members, best, eps):
            best = AlphaResult(weight, members)
        for v in range(start, n):
            if not any(u in adj[v] for u in members):
                visit(members + (v,), weight + w[v], v + 1)

    visit((), 0.0, 0)
    return AlphaResult(float(sum(w[v] for v in best.witness)), best.witness)
