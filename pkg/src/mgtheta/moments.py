"""Moment-matrix skeletons and their semidefinite programs.

Entry ``(i, j)`` of the moment matrix holds the moment of
``adjoint(seq_i) * seq_j``. Entries whose words agree up to adjoint share one
real variable, so the matrix is real symmetric.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .graphs import ExclusivityMultigraph, maximal_cliques
from .sdp import SdpProblem
from .words import ProjectorWord, adjoint, moment_key, multiply

ONE = -2
ZERO = -1


class NormalizationMode(str, Enum):
    SUBNORMALIZED = "sub"
    STRICT = "strict"


class UnsupportedConstraintFamily(NotImplementedError):
    pass


@dataclass(frozen=True)
class One:
    def __str__(self) -> str:
        return "1"


@dataclass(frozen=True)
class Zero:
    def __str__(self) -> str:
        return "0"


@dataclass(frozen=True)
class Joint:
    """Product of singletons from two or more parties; ``None`` = party absent."""

    parts: tuple[int | None, ...]

    @property
    def a(self) -> int | None:
        return self.parts[0]

    @property
    def b(self) -> int | None:
        return self.parts[1]

    def __str__(self) -> str:
        return "P(" + ",".join("_" if v is None else str(v) for v in self.parts) + ")"


@dataclass(frozen=True)
class Marginal:
    party: int
    vertex: int

    def __str__(self) -> str:
        return f"{chr(ord('A') + self.party)}({self.vertex})"


@dataclass(frozen=True)
class Free:
    var: int

    def __str__(self) -> str:
        return f"x{self.var}"


EntryKind = One | Zero | Joint | Marginal | Free


def classify(word: ProjectorWord) -> str:
    """``"one"``, ``"zero"``, ``"marginal"``, ``"joint"`` or ``"free"``."""
    if word.is_null:
        return "zero"
    if word.is_identity:
        return "one"
    lengths = [len(s) for s in word.seqs]
    if max(lengths) == 1:
        return "marginal" if sum(lengths) == 1 else "joint"
    return "free"


@dataclass(frozen=True)
class MomentSkeleton:
    """Classified entry map of the moment matrix.

    ``var_of`` is an ``s x s`` integer matrix holding a variable index, or
    ``ONE`` / ``ZERO`` for constant entries. ``var_words[m]`` is the canonical
    word of variable ``m`` and ``var_kinds[m]`` its classification.
    """

    sequences: tuple[ProjectorWord, ...]
    var_of: np.ndarray
    var_words: tuple[ProjectorWord, ...]
    var_kinds: tuple[str, ...]
    index: dict

    @property
    def size(self) -> int:
        return len(self.sequences)

    @property
    def n_vars(self) -> int:
        return len(self.var_words)

    def kind(self, i: int, j: int) -> EntryKind:
        m = int(self.var_of[i, j])
        if m == ONE:
            return One()
        if m == ZERO:
            return Zero()
        word = self.var_words[m]
        kind = self.var_kinds[m]
        if kind == "marginal":
            party = next(p for p, s in enumerate(word.seqs) if s)
            return Marginal(party, word.seqs[party][0])
        if kind == "joint":
            return Joint(tuple(s[0] if s else None for s in word.seqs))
        return Free(m)

    def var_for(self, word: ProjectorWord) -> int | None:
        return self.index.get(moment_key(word))

    def marginal_var(self, party: int, vertex: int) -> int | None:
        n_parties = len(self.sequences[0].seqs)
        seqs = [()] * n_parties
        seqs[party] = (vertex,)
        return self.var_for(ProjectorWord(tuple(seqs)))

    def joint_var(self, *parts: int | None) -> int | None:
        return self.var_for(ProjectorWord(tuple(() if v is None else (v,) for v in parts)))

    def dump(self) -> str:
        """Text rendering of entry kinds by position (0-based vertices)."""
        labels = [str(w) for w in self.sequences]
        lines = [f"# moment skeleton: {self.size} x {self.size}, {self.n_vars} variables"]
        for i in range(self.size):
            cells = [str(self.kind(i, j)) for j in range(self.size)]
            lines.append(f"[{labels[i]}] " + " ".join(cells))
        return "\n".join(lines) + "\n"


def build_skeleton(seqs: Sequence[ProjectorWord], mg: ExclusivityMultigraph) -> MomentSkeleton:
    s = len(seqs)
    var_of = np.empty((s, s), dtype=np.int64)
    index: dict[ProjectorWord, int] = {}
    words: list[ProjectorWord] = []
    kinds: list[str] = []
    adj = [adjoint(w) for w in seqs]
    for i in range(s):
        for j in range(i, s):
            w = multiply(adj[i], seqs[j], mg)
            kind = classify(w)
            if kind == "zero":
                m = ZERO
            elif kind == "one":
                m = ONE
            else:
                key = moment_key(w)
                m = index.get(key)
                if m is None:
                    m = index[key] = len(words)
                    words.append(key)
                    kinds.append(kind)
            var_of[i, j] = var_of[j, i] = m
    return MomentSkeleton(tuple(seqs), var_of, tuple(words), tuple(kinds), index)


def pencil(skel: MomentSkeleton) -> tuple[sp.coo_matrix, list[tuple[np.ndarray, np.ndarray, np.ndarray]]]:
    """Constant matrix and per-variable coefficient matrices (upper triangles)."""
    iu, ju = np.triu_indices(skel.size)
    m = skel.var_of[iu, ju]
    one = m == ONE
    a0 = (iu[one], ju[one], np.ones(int(one.sum())))
    keep = m >= 0
    return a0, (m[keep], iu[keep], ju[keep])


def assemble_sdp(
    skel: MomentSkeleton,
    mg: ExclusivityMultigraph,
    mode: NormalizationMode | str = NormalizationMode.SUBNORMALIZED,
    weights: Sequence[float] | None = None,
    constraints: bool = True,
) -> SdpProblem:
    """Semidefinite program ``max sum_i w_i P(i,...,i)`` over the skeleton.

    With ``constraints`` the program also carries non-negativity of every
    probability-typed variable, the clique/marginal inequalities for each
    maximal clique of each factor, and the clique normalization (``<= 1`` or
    ``= 1`` depending on ``mode``).
    """
    mode = NormalizationMode(mode)
    n, N = mg.vertex_count, mg.party_count
    w = np.asarray(mg.weights if weights is None else weights, dtype=float)
    M = skel.n_vars
    if constraints and N > 2:
        raise UnsupportedConstraintFamily(
            "clique/marginal constraints are only defined for one or two parties"
        )

    c = np.zeros(M)
    for i in range(n):
        m = skel.joint_var(*([i] * N)) if N > 1 else skel.marginal_var(0, i)
        if m is None:
            raise ValueError(f"diagonal event of vertex {i} is missing from the sequence set")
        c[m] += w[i]

    a0, (vidx, rows, cols) = pencil(skel)
    ineq_rows: list[dict[int, float]] = []
    ineq_rhs: list[float] = []
    eq_rows: list[dict[int, float]] = []
    eq_rhs: list[float] = []

    if constraints:
        for m, kind in enumerate(skel.var_kinds):
            if kind in ("marginal", "joint"):
                ineq_rows.append({m: -1.0})
                ineq_rhs.append(0.0)
        cliques = [maximal_cliques(mg.factor(p)) for p in range(N)]
        if N == 2:
            for p in range(2):
                other = 1 - p
                for K in cliques[p]:
                    for j in range(n):
                        row: dict[int, float] = {}
                        for i in K:
                            parts = [None, None]
                            parts[p], parts[other] = i, j
                            m = skel.joint_var(*parts)
                            row[m] = row.get(m, 0.0) + 1.0
                        mj = skel.marginal_var(other, j)
                        row[mj] = row.get(mj, 0.0) - 1.0
                        ineq_rows.append(row)
                        ineq_rhs.append(0.0)
        for p in range(N):
            for K in cliques[p]:
                row = {}
                for i in K:
                    m = skel.marginal_var(p, i)
                    row[m] = row.get(m, 0.0) + 1.0
                if mode is NormalizationMode.STRICT:
                    eq_rows.append(row)
                    eq_rhs.append(1.0)
                else:
                    ineq_rows.append(row)
                    ineq_rhs.append(1.0)

    return SdpProblem.from_triplets(
        size=skel.size,
        n_vars=M,
        a0=a0,
        coeffs=(vidx, rows, cols, np.ones(len(vidx))),
        c=c,
        ineq=(ineq_rows, ineq_rhs),
        eq=(eq_rows, eq_rhs),
    )
