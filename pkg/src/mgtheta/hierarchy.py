"""Upper bounds on the multigraph Lovasz number from the moment hierarchy.

Randomized levels ``1.x`` draw fresh vertex subsets per party and per trial
from ``numpy.random.default_rng([seed, trial])`` (PCG64 seeded through a
SeedSequence), so a report can be replayed trial by trial.
"""
from __future__ import annotations

import json
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .classical import alpha
from .graphs import ExclusivityMultigraph, flatten, maximal_cliques
from .ingest import parse_event
from .moments import MomentSkeleton, NormalizationMode, assemble_sdp, build_skeleton
from .sdp import OPTIMAL, SdpSolution, Tolerances, solve
from .theta import moment_theta
from .words import LevelSpec, build_sequences

DEFAULT_TRIALS = 20
LABEL_TOLERANCE = 1e-4

# Tolerances for first-order solves of large moment matrices; the interior
# point defaults are out of reach there in the time budget. A deterministic
# level is a single solve and gets the tighter setting; randomized levels run
# many trials and only need to rank them.
FIRST_ORDER_TOLERANCES = Tolerances(gap=1e-4, feasibility=1e-4, first_order_eps=1e-5)
FIRST_ORDER_TRIAL_TOLERANCES = Tolerances(gap=1e-3, feasibility=2e-3, first_order_eps=3e-5)


class HierarchyError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoundOptions:
    """``level`` is ``"1"``, ``"1.x"``, ``"1+AB"`` or ``"k"``."""

    level: str = "1+AB"
    x: int | None = None
    k: int | None = None
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    mode: NormalizationMode = NormalizationMode.SUBNORMALIZED
    equal_subsets: bool = False
    backend: str = "auto"
    tolerances: Tolerances | None = None

    def __post_init__(self):
        if self.level not in ("1", "1.x", "1+AB", "k"):
            raise ValueError(f"unknown level {self.level!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.level == "1.x" and (self.x is None or self.x < 0):
            raise ValueError("level 1.x needs x >= 0")
        if self.level == "k" and (self.k is None or self.k < 1):
            raise ValueError("level k needs k >= 1")
        object.__setattr__(self, "mode", NormalizationMode(self.mode))

    @property
    def randomized(self) -> bool:
        return self.level == "1.x"

    @property
    def descriptor(self) -> str:
        if self.level == "1.x":
            return f"1.{self.x}"
        if self.level == "k":
            return str(self.k)
        return self.level


@dataclass
class TrialRecord:
    trial: int
    subsets: list[list[int]] | None
    value: float
    status: str
    wall_ms: float
    backend: str
    min_eigenvalue: float
    max_violation: float
    relative_gap: float
    iterations: int
    size: int
    marginals: list[list[float]] | None = field(default=None, repr=False)
    joints: list[list[float]] | None = field(default=None, repr=False)
    # per party, 1 - sum of marginals over each maximal clique of its factor
    clique_slack: list[list[float]] | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class BoundReport:
    instance: str
    level: str
    x: int | None
    trials: int
    seed: int
    mode: str
    bound: float
    alpha: float
    theta_flatten: float
    per_trial: list[TrialRecord]
    tool_version: str = __version__

    @property
    def best_trial(self) -> TrialRecord:
        return min((t for t in self.per_trial if t.ok), key=lambda t: (t.value, t.trial))

    def context(self) -> dict:
        """Mean and median of successful trial values (context only)."""
        vals = [t.value for t in self.per_trial if t.ok]
        return {"mean": statistics.fmean(vals), "median": statistics.median(vals)}

    def to_document(self, timings: bool = True, behaviour: bool = False) -> dict:
        trials = []
        for t in self.per_trial:
            rec = asdict(t)
            if not behaviour:
                rec.pop("marginals")
                rec.pop("joints")
                rec.pop("clique_slack")
            if not timings:
                rec.pop("wall_ms")
            trials.append(rec)
        doc = {
            "instance": self.instance,
            "level": self.level,
            "trials": self.trials,
            "seed": self.seed,
            "mode": self.mode,
            "bound": self.bound,
            "alpha": self.alpha,
            "theta_flatten": self.theta_flatten,
            "per_trial": trials,
            "tool_version": self.tool_version,
        }
        if self.x is not None:
            doc["x"] = self.x
        return doc

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_document(**kwargs), indent=2, allow_nan=True)

    @classmethod
    def from_document(cls, doc: dict) -> BoundReport:
        per_trial = [
            TrialRecord(**{"wall_ms": float("nan"), "marginals": None, "joints": None,
                           "clique_slack": None, **t})
            for t in doc["per_trial"]
        ]
        return cls(
            instance=doc["instance"], level=doc["level"], x=doc.get("x"),
            trials=doc["trials"], seed=doc["seed"], mode=doc["mode"], bound=doc["bound"],
            alpha=doc["alpha"], theta_flatten=doc["theta_flatten"], per_trial=per_trial,
            tool_version=doc.get("tool_version", __version__),
        )

    def save(self, path: str | Path, **kwargs) -> None:
        Path(path).write_text(self.to_json(**kwargs) + "\n", encoding="utf-8")


def draw_subsets(n: int, x: int, seed: int, trial: int, parties: int = 2, equal: bool = False) -> list[list[int]]:
    """Per-party uniform ``x``-subsets of ``range(n)`` for one trial."""
    if x > n:
        raise ValueError(f"x = {x} exceeds the vertex count {n}")
    rng = np.random.default_rng([seed, trial])
    first = sorted(int(v) for v in rng.choice(n, size=x, replace=False))
    if equal:
        return [first] * parties
    out = [first]
    for _ in range(parties - 1):
        out.append(sorted(int(v) for v in rng.choice(n, size=x, replace=False)))
    return out


def level_spec(opts: BoundOptions, subsets: Sequence[Sequence[int]] | None = None) -> LevelSpec:
    if opts.level == "1":
        return LevelSpec.one()
    if opts.level == "1+AB":
        return LevelSpec.one_plus_ab()
    if opts.level == "k":
        return LevelSpec.level(opts.k)
    return LevelSpec.one_x(subsets)


def _behaviour(skel: MomentSkeleton, sol: SdpSolution, mg: ExclusivityMultigraph):
    """Marginals, the joint table (two parties) and clique slacks from ``sol``."""
    v = sol.v
    n, parties = mg.vertex_count, mg.party_count

    def value(m):
        return float(v[m]) if m is not None else float("nan")

    marg = [[value(skel.marginal_var(p, i)) for i in range(n)] for p in range(parties)]
    joints = None
    if parties == 2:
        joints = [[value(skel.joint_var(i, k)) for k in range(n)] for i in range(n)]
    slack = [
        [1.0 - sum(marg[p][i] for i in K) for K in maximal_cliques(mg.factor(p))]
        for p in range(parties)
    ]
    return marg, joints, slack


def solve_level(
    mg: ExclusivityMultigraph,
    level: LevelSpec,
    mode: NormalizationMode | str = NormalizationMode.SUBNORMALIZED,
    backend: str = "auto",
    tolerances: Tolerances | None = None,
) -> tuple[MomentSkeleton, SdpSolution]:
    """Build and solve one moment program."""
    skel = build_skeleton(build_sequences(mg, level), mg)
    prob = assemble_sdp(skel, mg, mode)
    if tolerances is None:
        from .sdp import choose_backend

        if backend == "scs" or (backend == "auto" and choose_backend(prob) == "scs"):
            randomized = level.family == "1.x"
            tolerances = FIRST_ORDER_TRIAL_TOLERANCES if randomized else FIRST_ORDER_TOLERANCES
    return skel, solve(prob, tolerances, backend=backend)


def mtheta_bound(
    mg: ExclusivityMultigraph, opts: BoundOptions, instance: str = "", context: bool = True
) -> BoundReport:
    """Minimum over trials of the level's upper bound.

    Deterministic levels run exactly one trial. With ``context`` the report
    also carries alpha and theta of the flattened graph.
    """
    n = mg.vertex_count
    n_trials = opts.trials if opts.randomized else 1
    records = []
    for trial in range(n_trials):
        subsets = None
        if opts.randomized:
            subsets = draw_subsets(n, opts.x, opts.seed, trial, mg.party_count, opts.equal_subsets)
        t0 = time.perf_counter()
        skel, sol = solve_level(mg, level_spec(opts, subsets), opts.mode, opts.backend, opts.tolerances)
        wall = (time.perf_counter() - t0) * 1000
        marg, joints, slack = _behaviour(skel, sol, mg)
        records.append(TrialRecord(
            trial=trial, subsets=subsets, value=sol.objective, status=sol.status,
            wall_ms=wall, backend=sol.backend, min_eigenvalue=sol.min_eigenvalue,
            max_violation=sol.max_violation, relative_gap=sol.relative_gap,
            iterations=sol.iterations, size=skel.size, marginals=marg, joints=joints, clique_slack=slack,
        ))
    good = [r.value for r in records if r.ok]
    if not good:
        raise HierarchyError(
            f"no trial succeeded at level {opts.descriptor}: "
            + "; ".join(f"trial {r.trial}: {r.status}" for r in records)
        )
    flat = flatten(mg)
    return BoundReport(
        instance=instance,
        level=opts.descriptor,
        x=opts.x if opts.randomized else None,
        trials=n_trials,
        seed=opts.seed,
        mode=opts.mode.value,
        bound=min(good),
        alpha=alpha(flat).value if context else float("nan"),
        theta_flatten=moment_theta(flat).value if context else float("nan"),
        per_trial=records,
    )


@dataclass(frozen=True)
class LabelPair:
    party: int
    i: int
    j: int
    marginal_diff: float
    joint_diff: float

    @property
    def flagged(self) -> bool:
        return max(self.marginal_diff, self.joint_diff) > LABEL_TOLERANCE


def label_consistency_check(report: BoundReport, mg: ExclusivityMultigraph) -> list[LabelPair]:
    """Compare vertices that carry the same local event and neighbourhood.

    For each party J and vertex pair (i, j) whose J-parts coincide and whose
    J-factor neighbourhoods are equal, report the marginal difference and the
    largest joint-probability difference at the best trial.
    """
    if mg.labels is None or mg.party_count != 2:
        return []
    try:
        best = report.best_trial
    except ValueError:
        return []
    if best.marginals is None or best.joints is None:
        return []
    parts = [parse_event(label, mg.party_count) for label in mg.labels]
    P = np.asarray(best.joints)
    n = mg.vertex_count
    out = []
    for J in range(2):
        table = P if J == 0 else P.T
        for i in range(n):
            for j in range(i + 1, n):
                if parts[i][J] is None or parts[i][J] != parts[j][J]:
                    continue
                if mg.neighbours(J, i) != mg.neighbours(J, j):
                    continue
                out.append(LabelPair(
                    party=J, i=i, j=j,
                    marginal_diff=abs(best.marginals[J][i] - best.marginals[J][j]),
                    joint_diff=float(np.max(np.abs(table[i] - table[j]))),
                ))
    return out
