import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgtheta.graphs import validate_multigraph
from mgtheta.words import (
    NULL,
    LevelSpec,
    LevelTooLarge,
    ProjectorSymbol,
    ProjectorWord,
    adjoint,
    build_sequences,
    canonicalize,
    identity,
    moment_key,
    multiply,
    recanonicalize,
    singleton,
)

A, B = 0, 1


@pytest.fixture
def toy():
    # factor A: 0-1 edge; factor B: 1-2 edge
    return validate_multigraph([1, 1, 1], ["A", "B"], [[(0, 1)], [(1, 2)]])


def word(mg, *symbols):
    return canonicalize([ProjectorSymbol(p, v) for p, v in symbols], mg)


def random_multigraph(rng, n, p=0.35):
    factors = [
        [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p] for _ in range(2)
    ]
    return validate_multigraph([1.0] * n, ["A", "B"], factors)


def random_word(rng, mg, max_len=5):
    length = int(rng.integers(0, max_len + 1))
    return [ProjectorSymbol(int(rng.integers(0, 2)), int(rng.integers(0, mg.vertex_count))) for _ in range(length)]


def test_idempotence(toy):
    assert word(toy, (A, 2), (A, 2)) == singleton(A, 2, 2)


def test_factor_adjacent_pair_is_null(toy):
    assert word(toy, (A, 0), (A, 1)).is_null
    assert word(toy, (B, 2), (B, 1)).is_null


def test_cross_party_commutation(toy):
    w = word(toy, (B, 1), (A, 0))
    assert w.seqs == ((0,), (1,))
    assert w == word(toy, (A, 0), (B, 1))


def test_same_party_edge_of_other_factor_is_not_null(toy):
    # (1, 2) is an edge of factor B only
    assert word(toy, (A, 1), (A, 2)).seqs == ((1, 2), ())


def test_irreducible_length_three(toy):
    w = word(toy, (A, 0), (A, 2), (A, 0))
    assert w.seqs == ((0, 2, 0), ())
    assert w.length == 3


def test_collapse_runs_to_fixed_point(toy):
    assert word(toy, (A, 2), (A, 2), (A, 2), (A, 0), (A, 0)).seqs == ((2, 0), ())


def test_invalid_symbol(toy):
    with pytest.raises(ValueError):
        word(toy, (A, 3))
    with pytest.raises(ValueError):
        word(toy, (2, 0))


def test_adjoint_examples(toy):
    assert adjoint(identity(2)) == identity(2)
    assert adjoint(word(toy, (A, 0), (A, 2))) == word(toy, (A, 2), (A, 0))
    assert adjoint(NULL) == NULL


def test_multiply_examples(toy):
    one = identity(2)
    a0, b2 = singleton(A, 0, 2), singleton(B, 2, 2)
    assert multiply(one, b2, toy) == b2
    assert multiply(a0, b2, toy).seqs == ((0,), (2,))
    assert multiply(a0, a0, toy) == a0
    assert multiply(a0, singleton(A, 1, 2), toy).is_null


def test_word_string(toy):
    assert str(NULL) == "0"
    assert str(identity(2)) == "1"
    assert str(word(toy, (B, 1), (A, 0), (A, 2))) == "A0 A2 B1"


def test_moment_key_is_class_minimum(toy):
    w = word(toy, (A, 2), (A, 0))
    assert moment_key(w) == moment_key(adjoint(w)) == word(toy, (A, 0), (A, 2))


# algebraic laws on random multigraphs with n <= 8

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_canonicalize_idempotent_and_adjoint_involution(seed):
    rng = np.random.default_rng(seed)
    mg = random_multigraph(rng, int(rng.integers(2, 9)))
    w = canonicalize(random_word(rng, mg, 7), mg)
    assert recanonicalize(w, mg) == w
    assert adjoint(adjoint(w)) == w
    assert recanonicalize(adjoint(w), mg) == adjoint(w)


def test_adjoint_involution_100_words(rng):
    mg = random_multigraph(rng, 8)
    for _ in range(100):
        w = canonicalize(random_word(rng, mg, 8), mg)
        assert adjoint(adjoint(w)) == w


def test_multiply_associative_200_triples(rng):
    count = 0
    while count < 200:
        mg = random_multigraph(rng, int(rng.integers(2, 9)))
        for _ in range(20):
            u, v, w = (canonicalize(random_word(rng, mg), mg) for _ in range(3))
            assert multiply(multiply(u, v, mg), w, mg) == multiply(u, multiply(v, w, mg), mg)
            count += 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_multiply_matches_concatenation(seed):
    rng = np.random.default_rng(seed)
    mg = random_multigraph(rng, int(rng.integers(2, 9)))
    raw_u, raw_v = random_word(rng, mg), random_word(rng, mg)
    u, v = canonicalize(raw_u, mg), canonicalize(raw_v, mg)
    assert multiply(u, v, mg) == canonicalize(raw_u + raw_v, mg)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_unit_and_null_absorption(seed):
    rng = np.random.default_rng(seed)
    mg = random_multigraph(rng, int(rng.integers(2, 9)))
    w = canonicalize(random_word(rng, mg), mg)
    one = identity(2)
    assert multiply(one, w, mg) == w == multiply(w, one, mg)
    assert multiply(NULL, w, mg).is_null and multiply(w, NULL, mg).is_null


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_interleavings_commute(seed):
    rng = np.random.default_rng(seed)
    mg = random_multigraph(rng, int(rng.integers(2, 9)))
    raw = random_word(rng, mg, 6)
    a_part = [s for s in raw if s.party == A]
    b_part = [s for s in raw if s.party == B]
    expected = canonicalize(a_part + b_part, mg)
    # random interleaving that keeps each party's internal order
    for _ in range(5):
        slots = rng.permutation([A] * len(a_part) + [B] * len(b_part))
        ia, ib = iter(a_part), iter(b_part)
        shuffled = [next(ia) if p == A else next(ib) for p in slots]
        assert canonicalize(shuffled, mg) == expected


# sequence sets

def test_level_one_chsh(instances):
    seqs = build_sequences(instances["chsh"], LevelSpec.one())
    assert len(seqs) == 17
    assert seqs[0].is_identity
    assert seqs[1:9] == [singleton(A, v, 2) for v in range(8)]
    assert seqs[9:17] == [singleton(B, v, 2) for v in range(8)]


def test_level_one_plus_ab_chsh(instances):
    seqs = build_sequences(instances["chsh"], LevelSpec.one_plus_ab())
    assert len(seqs) == 81
    assert seqs[17:] == [ProjectorWord(((a,), (b,))) for a in range(8) for b in range(8)]


def test_level_one_x_zero_is_level_one(instances):
    mg = instances["chsh"]
    assert build_sequences(mg, LevelSpec.one_x([[], []])) == build_sequences(mg, LevelSpec.one())


def test_level_one_x_pairs(instances):
    mg = instances["chsh"]
    seqs = build_sequences(mg, LevelSpec.one_x([[5, 1], [0, 7]]))
    assert LevelSpec.one_x([[5, 1], [0, 7]]).x == 2
    assert seqs[17:] == [ProjectorWord(((a,), (b,))) for a in (1, 5) for b in (0, 7)]


def test_level_spec_errors():
    with pytest.raises(ValueError):
        LevelSpec.one_x([[0, 1], [2]])
    with pytest.raises(ValueError):
        LevelSpec.one_x([[0, 0], [1, 2]])
    with pytest.raises(ValueError):
        LevelSpec.level(0)
    with pytest.raises(ValueError):
        LevelSpec("2+")


def test_level_one_x_out_of_range(instances):
    with pytest.raises(ValueError):
        build_sequences(instances["chsh"], LevelSpec.one_x([[8], [0]]))


def test_level_k_ceiling(instances):
    with pytest.raises(LevelTooLarge):
        build_sequences(instances["i3322csw"], LevelSpec.level(4), ceiling=500)


def _level_k_oracle(mg, k):
    """All canonical non-null products of at most k singleton symbols."""
    symbols = [ProjectorSymbol(p, v) for p in range(mg.party_count) for v in range(mg.vertex_count)]
    out = set()
    for length in range(k + 1):
        for raw in itertools.product(symbols, repeat=length):
            w = canonicalize(raw, mg)
            if not w.is_null:
                out.add(w)
    return out


@pytest.mark.parametrize("k", [1, 2, 3])
def test_level_k_matches_product_oracle(instances, k):
    mg = instances["pent1"]
    seqs = build_sequences(mg, LevelSpec.level(k))
    assert set(seqs) == _level_k_oracle(mg, k)
    assert len(seqs) == len(set(seqs))


@pytest.mark.parametrize(
    "level",
    [LevelSpec.one(), LevelSpec.one_plus_ab(), LevelSpec.level(2), LevelSpec.one_x([[0, 3, 4], [1, 2, 4]])],
    ids=lambda lv: lv.descriptor,
)
def test_sequences_non_null_and_unique(instances, level):
    for mg in instances.values():
        if level.family == "k" and mg.vertex_count > 10:
            continue
        seqs = build_sequences(mg, level)
        assert not any(w.is_null for w in seqs)
        assert len(set(seqs)) == len(seqs)
        assert all(recanonicalize(w, mg) == w for w in seqs)
