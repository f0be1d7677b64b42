"""Acceptance criteria, one test per criterion.

Each test runs every check of its criterion, records a single PASS/FAIL line
(shown in the terminal summary) and then asserts. Randomized-level runs are
shared between criteria 4 and 5 through a module cache.
"""
import math
import time
from pathlib import Path

import numpy as np
import pytest

from mgtheta.classical import alpha, alpha_exhaustive
from mgtheta.graphs import flatten, validate_multigraph
from mgtheta.hierarchy import BoundOptions, draw_subsets, mtheta_bound, solve_level
from mgtheta.moments import build_skeleton
from mgtheta.theta import gls_theta, moment_theta
from mgtheta.words import (
    NULL,
    LevelSpec,
    ProjectorSymbol,
    adjoint,
    build_sequences,
    canonicalize,
    multiply,
    recanonicalize,
)

from conftest import cycle, random_graph, record_criterion

SEED = 42
TRIALS = 20
GOLDEN = Path(__file__).parent / "data" / "chsh_level1_skeleton.txt"

_cache: dict = {}


def randomized_report(instances, name, x, mode="strict"):
    key = (name, x, mode)
    if key not in _cache:
        t0 = time.perf_counter()
        opts = BoundOptions(level="1.x", x=x, trials=TRIALS, seed=SEED, mode=mode)
        rep = mtheta_bound(instances[name], opts, name)
        _cache[key] = (rep, time.perf_counter() - t0)
    return _cache[key]


def deterministic_report(instances, name, level="1+AB"):
    key = (name, level)
    if key not in _cache:
        t0 = time.perf_counter()
        rep = mtheta_bound(instances[name], BoundOptions(level=level), name)
        _cache[key] = (rep, time.perf_counter() - t0)
    return _cache[key]


def finish(number, title, checks):
    """``checks`` is a list of (ok, detail) pairs."""
    ok = all(c for c, _ in checks)
    record_criterion(number, title, ok, [d for _, d in checks])
    assert ok, [d for c, d in checks if not c]


def test_criterion_1_lovasz_numbers(instances):
    cases = [
        ("C5", cycle(5), math.sqrt(5), 1e-5),
        ("chsh", flatten(instances["chsh"]), 2 + math.sqrt(2), 1e-4),
        ("i3csw", flatten(instances["i3csw"]), 4 * math.sqrt(3), 1e-3),
        ("i3322csw", flatten(instances["i3322csw"]), 6.588412879, 1e-4),
    ]
    checks = []
    for label, g, want, tol in cases:
        t0 = time.perf_counter()
        val = moment_theta(g).value
        dt = time.perf_counter() - t0
        checks.append((abs(val - want) <= tol, f"{label} {val:.7f} ({dt:.1f} s)"))
    finish(1, "Lovasz numbers of the flattened graphs", checks)


def test_criterion_2_classical_bounds(instances):
    expected = {"chsh": 3, "pent1": 2, "pent2": 2, "pent3": 2, "i3csw": 6, "i3322csw": 6}
    checks = []
    for name, want in expected.items():
        t0 = time.perf_counter()
        val = alpha(flatten(instances[name])).value
        dt = time.perf_counter() - t0
        checks.append((val == want and dt < 1.0, f"{name} {val:g} ({dt * 1e3:.0f} ms)"))
    finish(2, "exact weighted independence numbers under 1 s", checks)


def test_criterion_3_deterministic_levels(instances):
    expected = {"chsh": 3.4142, "pent1": 2.178, "pent2": 2.2071, "pent3": 2.2071}
    checks = []
    for name, want in expected.items():
        rep, dt = deterministic_report(instances, name)
        checks.append((abs(rep.bound - want) <= 1e-3 and dt < 60, f"{name} {rep.bound:.6f} ({dt:.1f} s)"))
    finish(3, "hierarchy at level 1+AB", checks)


RANDOMIZED = (("i3csw", 11, (6.9139, 6.9180)), ("i3322csw", 13, (6.2508, 6.2535)))


@pytest.mark.slow
def test_criterion_4_randomized_levels(instances):
    # evaluated with clique sums fixed to one; the subnormalised relaxation is
    # looser at these levels and its minima are listed for comparison
    checks = []
    total = 0.0
    for name, x, band in RANDOMIZED:
        rep, dt = randomized_report(instances, name, x)
        total += dt
        ok = band[0] <= rep.bound <= band[1] and len(rep.per_trial) >= 20
        checks.append((ok, f"{name} 1.{x} strict min over {rep.trials} trials {rep.bound:.5f} "
                           f"in [{band[0]}, {band[1]}] ({dt / 60:.1f} min)"))
    checks.append((total <= 15 * 60, f"randomized total {total / 60:.1f} min"))
    for name, x, _ in RANDOMIZED:
        rep, dt = randomized_report(instances, name, x, "sub")
        checks.append((True, f"info: {name} 1.{x} sub min {rep.bound:.5f} ({dt / 60:.1f} min)"))
    # optional part: the larger deterministic level, when the size ceiling allows it
    rep, dt = deterministic_report(instances, "i3322csw")
    checks.append((abs(rep.bound - 6.2515) <= 1e-3, f"i3322csw 1+AB {rep.bound:.5f} ({dt:.0f} s)"))
    finish(4, "hierarchy at randomized levels", checks)


@pytest.mark.slow
def test_criterion_5_gaps(instances):
    checks = []
    for name in ("pent1", "pent2", "pent3"):
        rep, _ = deterministic_report(instances, name)
        gap = rep.theta_flatten - rep.bound
        checks.append((gap >= 0.01, f"{name} gap {gap:.4f}"))
    for name, x, _ in RANDOMIZED:
        rep, _ = randomized_report(instances, name, x)
        gap = rep.theta_flatten - rep.bound
        checks.append((gap >= 0.01, f"{name} 1.{x} strict gap {gap:.4f}"))
    rep, _ = deterministic_report(instances, "chsh")
    diff = abs(rep.theta_flatten - rep.bound)
    checks.append((diff <= 2e-3, f"chsh |theta - bound| {diff:.2e}"))
    finish(5, "hierarchy bound below the Lovasz number", checks)


def _word_laws(rng):
    for _ in range(30):
        n = int(rng.integers(2, 7))
        factors = [[(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.35] for _ in range(2)]
        mg = validate_multigraph([1.0] * n, ["A", "B"], factors)
        for _ in range(20):
            syms = [ProjectorSymbol(int(rng.integers(2)), int(rng.integers(n))) for _ in range(int(rng.integers(0, 6)))]
            w = canonicalize(syms, mg)
            if recanonicalize(w, mg) != w:
                return False
            if adjoint(adjoint(w)) != w:
                return False
            if multiply(w, NULL, mg) != NULL or multiply(NULL, w, mg) != NULL:
                return False
            # swapping neighbouring symbols of different parties changes nothing
            for k in range(len(syms) - 1):
                if syms[k].party != syms[k + 1].party:
                    swapped = syms[:k] + [syms[k + 1], syms[k]] + syms[k + 2:]
                    if canonicalize(swapped, mg) != w:
                        return False
    return True


@pytest.mark.slow
def test_criterion_6_property_suites(instances):
    rng = np.random.default_rng(SEED)
    checks = []

    worst = 0.0
    for _ in range(30):
        g = random_graph(rng, int(rng.integers(2, 13)), p=float(rng.uniform(0.2, 0.8)))
        worst = max(worst, abs(moment_theta(g).value - gls_theta(g).value))
    checks.append((worst <= 1e-6, f"theta formulations max diff {worst:.1e}"))

    bad = 0
    for _ in range(40):
        g = random_graph(rng, int(rng.integers(1, 19)), p=float(rng.uniform(0.1, 0.9)))
        bad += alpha(g).value != pytest.approx(alpha_exhaustive(g).value, abs=1e-12)
    checks.append((bad == 0, f"alpha vs exhaustive mismatches {bad}/40"))

    mono = True
    for name in ("pent1", "pent2", "chsh"):
        mg = instances[name]
        subsets = draw_subsets(mg.vertex_count, 2, seed=SEED, trial=0)
        levels = [LevelSpec.one(), LevelSpec.one_x(subsets), LevelSpec.one_plus_ab()]
        vals = [solve_level(mg, lv)[1].objective for lv in levels]
        mono &= all(b <= a + 1e-6 for a, b in zip(vals, vals[1:]))
    mg = instances["pent1"]
    order = [rng.permutation(mg.vertex_count).tolist() for _ in range(2)]
    vals = [solve_level(mg, LevelSpec.one_x([order[0][:x], order[1][:x]]))[1].objective for x in range(0, 6)]
    mono &= all(b <= a + 1e-6 for a, b in zip(vals, vals[1:]))
    checks.append((mono, "level and subset monotonicity"))

    worst = 0.0
    for name in ("chsh", "pent1", "pent2", "pent3"):
        sub = solve_level(instances[name], LevelSpec.one_plus_ab(), "sub")[1]
        strict = solve_level(instances[name], LevelSpec.one_plus_ab(), "strict")[1]
        worst = max(worst, abs(sub.objective - strict.objective))
    checks.append((worst <= 1e-5, f"mode equivalence at 1+AB max diff {worst:.1e}"))
    for name, x, _ in RANDOMIZED:
        diff = abs(randomized_report(instances, name, x, "sub")[0].bound
                   - randomized_report(instances, name, x)[0].bound)
        checks.append((diff <= 1e-5, f"mode equivalence {name} 1.{x} diff {diff:.1e}"))

    checks.append((_word_laws(rng), "word-algebra laws"))

    skel = build_skeleton(build_sequences(instances["chsh"], LevelSpec.one()), instances["chsh"])
    checks.append((skel.dump() == GOLDEN.read_text(), "chsh skeleton golden file"))

    same = True
    for name, opts in (("pent2", BoundOptions(level="1.x", x=2, trials=3, seed=SEED)),
                       ("chsh", BoundOptions(level="1"))):
        a = mtheta_bound(instances[name], opts, name)
        b = mtheta_bound(instances[name], opts, name)
        same &= a.to_json(timings=False) == b.to_json(timings=False)
    checks.append((same, "report replay"))
    finish(6, "property suites", checks)


def test_criterion_7_bounds_not_exact_values(instances):
    # only upper bounds are computed; check they bracket correctly where cheap
    checks = []
    for name in ("chsh", "pent1", "pent2", "pent3"):
        rep, _ = deterministic_report(instances, name)
        ok = rep.alpha - 1e-6 <= rep.bound <= rep.theta_flatten + 1e-6
        checks.append((ok, f"{name} {rep.alpha:g} <= {rep.bound:.5f} <= {rep.theta_flatten:.5f}"))
    finish(7, "reported values are hierarchy upper bounds", checks)
