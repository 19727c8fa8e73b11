import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference as ref
from fedsubmax.errors import InputError, SizeError
from fedsubmax.matroid import (
    OracleMatroid,
    PartitionMatroid,
    UniformMatroid,
    check_axioms,
    is_independent,
    linear_maximize,
    matroid_from_config,
    polytope_membership,
    rank_of_subset,
)

P = PartitionMatroid([[0, 1], [2]], [1, 1])


def test_independence():
    U = UniformMatroid(3, 2)
    assert is_independent(U, {0, 1})
    assert not is_independent(U, {0, 1, 2})
    assert not is_independent(P, {0, 1})
    assert is_independent(U, set()) and is_independent(P, set())


def test_linear_maximize_examples():
    assert linear_maximize(UniformMatroid(3, 2), [3, 1, 2]).tolist() == [1, 0, 1]
    assert linear_maximize(P, [3, 1, 2]).tolist() == [1, 0, 1]
    assert linear_maximize(UniformMatroid(2, 1), [1, 1]).tolist() == [1, 0]
    with pytest.raises(InputError):
        linear_maximize(UniformMatroid(2, 1), [1, -1])
    with pytest.raises(InputError):
        linear_maximize(UniformMatroid(2, 1), [1, np.nan])


def test_polytope():
    assert polytope_membership(UniformMatroid(3, 2), [0.5, 0.5, 0.9])
    assert not polytope_membership(UniformMatroid(2, 1), [0.7, 0.7])
    assert not polytope_membership(UniformMatroid(2, 2), [1.2, 0.0])
    for B in P.bases():
        x = np.zeros(3)
        x[list(B)] = 1
        assert polytope_membership(P, x)


def test_rank():
    assert rank_of_subset(UniformMatroid(6, 2), range(5)) == 2
    assert rank_of_subset(P, {0, 1}) == 1
    assert rank_of_subset(P, set()) == 0


def test_config_and_axioms():
    M = matroid_from_config({"kind": "partition", "blocks": [[0, 1], [2, 3]], "caps": [1, 2]}, 4)
    assert M.rank == 3 and check_axioms(M)
    assert check_axioms(UniformMatroid(5, 3))
    # "at most one of {0,1} and at most one of {1,2}" is not a matroid
    bad = OracleMatroid(3, lambda S: len(S & {0, 1}) <= 1 and len(S & {1, 2}) <= 1)
    assert not check_axioms(bad)
    with pytest.raises(SizeError):
        check_axioms(UniformMatroid(11, 2))
    with pytest.raises(InputError):
        matroid_from_config({"kind": "graphic"}, 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.booleans())
def test_linear_maximize_is_optimal(seed, n, uniform):
    rng = np.random.default_rng(seed)
    if uniform:
        M = UniformMatroid(n, int(rng.integers(1, n + 1)))
    else:
        cut = sorted(rng.choice(np.arange(1, n), size=min(1, n - 1), replace=False).tolist()) if n > 1 else []
        blocks = [list(range(0, cut[0])), list(range(cut[0], n))] if cut else [list(range(n))]
        M = PartitionMatroid(blocks, [int(rng.integers(1, len(b) + 1)) for b in blocks])
    w = np.round(rng.random(n), 2)
    v = linear_maximize(M, w)
    best = max(sum(w[e] for e in B) for B in ref.bases(n, M.is_independent))
    assert v @ w == pytest.approx(best, abs=1e-12)
    assert M.is_base(np.flatnonzero(v))
    assert polytope_membership(M, v)
