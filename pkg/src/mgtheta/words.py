"""Products of projector symbols and the sequence sets of the moment hierarchy.

A word is stored as one symbol sequence per party, in the multigraph's party
order; symbols of different parties commute, symbols of one party do not.
Within a party, equal neighbours collapse (idempotence) and neighbours that
are adjacent in that party's factor annihilate the whole word.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .graphs import ExclusivityMultigraph

DEFAULT_WORD_CEILING = 2000


class ProjectorSymbol(NamedTuple):
    party: int
    vertex: int


class ProjectorWord(NamedTuple):
    """Canonical word; ``seqs == ()`` is the distinguished Null word."""

    seqs: tuple[tuple[int, ...], ...]

    @property
    def is_null(self) -> bool:
        return not self.seqs

    @property
    def is_identity(self) -> bool:
        return bool(self.seqs) and not any(self.seqs)

    @property
    def length(self) -> int:
        return sum(len(s) for s in self.seqs)

    def __str__(self) -> str:
        if self.is_null:
            return "0"
        if self.is_identity:
            return "1"
        return " ".join(
            f"{chr(ord('A') + p)}{v}" for p, seq in enumerate(self.seqs) for v in seq
        )


NULL = ProjectorWord(())


class LevelTooLarge(RuntimeError):
    pass


def identity(n_parties: int) -> ProjectorWord:
    return ProjectorWord(((),) * n_parties)


def singleton(party: int, vertex: int, n_parties: int) -> ProjectorWord:
    seqs = [()] * n_parties
    seqs[party] = (vertex,)
    return ProjectorWord(tuple(seqs))


def _reduce(seq: Iterable[int], mg: ExclusivityMultigraph, party: int) -> tuple[int, ...] | None:
    out: list[int] = []
    for v in seq:
        if out:
            if out[-1] == v:
                continue
            if mg.adjacent(party, out[-1], v):
                return None
        out.append(v)
    return tuple(out)


def canonicalize(symbols: Iterable[ProjectorSymbol], mg: ExclusivityMultigraph) -> ProjectorWord:
    """Canonical word for the product of ``symbols`` taken left to right."""
    per_party: list[list[int]] = [[] for _ in mg.parties]
    for party, vertex in symbols:
        if not (0 <= party < mg.party_count and 0 <= vertex < mg.vertex_count):
            raise ValueError(f"symbol ({party}, {vertex}) is not valid for this multigraph")
        per_party[party].append(vertex)
    seqs = []
    for k, seq in enumerate(per_party):
        red = _reduce(seq, mg, k)
        if red is None:
            return NULL
        seqs.append(red)
    return ProjectorWord(tuple(seqs))


def recanonicalize(word: ProjectorWord, mg: ExclusivityMultigraph) -> ProjectorWord:
    if word.is_null:
        return NULL
    return canonicalize(
        (ProjectorSymbol(p, v) for p, seq in enumerate(word.seqs) for v in seq), mg
    )


def adjoint(word: ProjectorWord) -> ProjectorWord:
    """Reverse every party's sequence; canonical form is preserved."""
    if word.is_null:
        return NULL
    return ProjectorWord(tuple(seq[::-1] for seq in word.seqs))


def multiply(u: ProjectorWord, v: ProjectorWord, mg: ExclusivityMultigraph) -> ProjectorWord:
    """Product ``u v`` of two canonical words."""
    if u.is_null or v.is_null:
        return NULL
    seqs = []
    for k, (a, b) in enumerate(zip(u.seqs, v.seqs)):
        if not a:
            seqs.append(b)
        elif not b:
            seqs.append(a)
        elif a[-1] == b[0]:
            seqs.append(a + b[1:])
        elif mg.adjacent(k, a[-1], b[0]):
            return NULL
        else:
            seqs.append(a + b)
    return ProjectorWord(tuple(seqs))


def moment_key(word: ProjectorWord) -> ProjectorWord:
    """Representative of ``word`` up to adjoint (real symmetric moments)."""
    return min(word, adjoint(word))


@dataclass(frozen=True)
class LevelSpec:
    """Which sequence set to build.

    ``family`` is ``"1"``, ``"1.x"``, ``"1+AB"`` or ``"k"``. For ``"1.x"``,
    ``subsets`` holds one vertex subset per party; for ``"k"``, ``k`` is the
    word-length bound.
    """

    family: str
    k: int | None = None
    subsets: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.family not in ("1", "1.x", "1+AB", "k"):
            raise ValueError(f"unknown level family {self.family!r}")
        if self.family == "1.x":
            if self.subsets is None:
                raise ValueError("level 1.x needs one vertex subset per party")
            sizes = {len(s) for s in self.subsets}
            if len(sizes) > 1:
                raise ValueError("level 1.x subsets must all have x elements")
            for s in self.subsets:
                if len(set(s)) != len(s):
                    raise ValueError("level 1.x subsets must have distinct vertices")
            object.__setattr__(self, "subsets", tuple(tuple(sorted(s)) for s in self.subsets))
        if self.family == "k" and (self.k is None or self.k < 1):
            raise ValueError("level k needs k >= 1")

    @classmethod
    def one(cls) -> LevelSpec:
        return cls("1")

    @classmethod
    def one_plus_ab(cls) -> LevelSpec:
        return cls("1+AB")

    @classmethod
    def one_x(cls, subsets: Sequence[Sequence[int]]) -> LevelSpec:
        return cls("1.x", subsets=tuple(tuple(s) for s in subsets))

    @classmethod
    def level(cls, k: int) -> LevelSpec:
        return cls("k", k=k)

    @property
    def x(self) -> int | None:
        if self.family != "1.x":
            return None
        return len(self.subsets[0]) if self.subsets else 0

    @property
    def descriptor(self) -> str:
        if self.family == "1.x":
            return f"1.{self.x}"
        if self.family == "k":
            return str(self.k)
        return self.family


def _word_order(w: ProjectorWord) -> tuple:
    return (w.length, w.seqs)


def build_sequences(
    mg: ExclusivityMultigraph, level: LevelSpec, ceiling: int = DEFAULT_WORD_CEILING
) -> list[ProjectorWord]:
    """Ordered, duplicate-free, non-null sequence set for ``level``.

    Position 0 is the identity, followed by each party's singletons in vertex
    order (party blocks in party order). Longer words follow sorted by
    ``(length, sequences)``.
    """
    n, N = mg.vertex_count, mg.party_count
    base = [identity(N)] + [singleton(p, v, N) for p in range(N) for v in range(n)]
    if level.family == "1":
        return base

    if level.family in ("1+AB", "1.x"):
        if level.family == "1+AB":
            pools = [range(n)] * N
        else:
            if len(level.subsets) != N:
                raise ValueError("level 1.x needs exactly one subset per party")
            for s in level.subsets:
                if any(not 0 <= v < n for v in s):
                    raise ValueError("level 1.x subset has an out-of-range vertex")
            pools = level.subsets
        extra = set()
        for p, q in itertools.combinations(range(N), 2):
            for a in pools[p]:
                for b in pools[q]:
                    seqs = [()] * N
                    seqs[p], seqs[q] = (a,), (b,)
                    extra.add(ProjectorWord(tuple(seqs)))
        out = base + sorted(extra, key=_word_order)
        if len(out) > ceiling:
            raise LevelTooLarge(f"{len(out)} words exceeds the ceiling of {ceiling}")
        return out

    seen = set(base)
    layer = list(base)
    singles = base[1:]
    extra: list[ProjectorWord] = []
    for _ in range(level.k - 1):
        new = []
        for s in singles:
            for w in layer:
                prod = multiply(s, w, mg)
                if not prod.is_null and prod not in seen:
                    seen.add(prod)
                    new.append(prod)
                    if len(seen) > ceiling:
                        raise LevelTooLarge(
                            f"level {level.k} needs more than {ceiling} words"
                        )
        extra.extend(new)
        layer = new
    return base + sorted(extra, key=_word_order)
