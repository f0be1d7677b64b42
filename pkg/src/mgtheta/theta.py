"""Vertex-weighted Lovasz number, computed by two independent programs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import VertexWeightedGraph
from .sdp import SdpProblem, SdpSolution, Tolerances, solve


class ThetaError(RuntimeError):
    def __init__(self, solution: SdpSolution):
        self.solution = solution
        super().__init__(f"theta program ended with status {solution.status}: {solution.message}")


@dataclass(frozen=True)
class ThetaResult:
    value: float
    formulation: str
    solution: SdpSolution


def _finish(prob: SdpProblem, formulation: str, tol: Tolerances | None) -> ThetaResult:
    sol = solve(prob, tol, backend="ipm")
    if not sol.ok:
        raise ThetaError(sol)
    return ThetaResult(sol.objective, formulation, sol)


def moment_problem(g: VertexWeightedGraph) -> SdpProblem:
    """Single-party level-1 moment program.

    Index 0 is the handle. Variable ``i`` (0-based) is ``p_i`` and sits on
    ``(0, i+1)`` and ``(i+1, i+1)``; every non-edge gets its own free entry.
    """
    n = g.vertex_count
    vidx, rows, cols = [], [], []
    for i in range(n):
        vidx += [i, i]
        rows += [0, i + 1]
        cols += [i + 1, i + 1]
    m = n
    for i in range(n):
        for j in range(i + 1, n):
            if not g.has_edge(i, j):
                vidx.append(m)
                rows.append(i + 1)
                cols.append(j + 1)
                m += 1
    c = np.zeros(m)
    c[:n] = g.weights
    return SdpProblem.from_triplets(
        size=n + 1, n_vars=m, a0=([0], [0], [1.0]),
        coeffs=(vidx, rows, cols, np.ones(len(vidx))), c=c,
    )


def gls_problem(g: VertexWeightedGraph) -> SdpProblem:
    """``max <W, X>`` with ``W_ij = sqrt(w_i w_j)``, ``tr X = 1`` and zeros on edges."""
    n = g.vertex_count
    sw = np.sqrt(np.asarray(g.weights))
    vidx, rows, cols, c = [], [], [], []
    for i in range(n):
        for j in range(i, n):
            if i == j or not g.has_edge(i, j):
                vidx.append(len(c))
                rows.append(i)
                cols.append(j)
                c.append(sw[i] * sw[j] * (1.0 if i == j else 2.0))
    trace = {vidx[k]: 1.0 for k in range(len(vidx)) if rows[k] == cols[k]}
    return SdpProblem.from_triplets(
        size=n, n_vars=len(c), a0=([], [], []),
        coeffs=(vidx, rows, cols, np.ones(len(vidx))), c=c, eq=([trace], [1.0]),
    )


def moment_theta(g: VertexWeightedGraph, tol: Tolerances | None = None) -> ThetaResult:
    return _finish(moment_problem(g), "moment", tol)


def gls_theta(g: VertexWeightedGraph, tol: Tolerances | None = None) -> ThetaResult:
    return _finish(gls_problem(g), "gls", tol)
