import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference as ref
from conftest import COV3_GROUPS, random_facility
from fedsubmax.errors import InputError, SizeError
from fedsubmax.objectives import (
    ClientPopulation,
    CoverageObjective,
    FacilityLocationObjective,
    FunctionObjective,
    ModularObjective,
    check_monotone,
    check_submodular,
    coverage_population,
    decomposable_eval,
    eval_set,
    marginal_gain,
    max_singleton,
    max_singleton_global,
    read_coverage_groups,
    read_facility_csv,
)


def test_facility_row_max():
    f = FacilityLocationObjective([[3, 1], [0, 2]], 0)
    assert eval_set(f, {0, 1}) == 3
    assert eval_set(f, set()) == 0


def test_coverage_membership():
    f = CoverageObjective(COV3_GROUPS, 0)
    assert eval_set(f, {0}) == 1
    assert eval_set(f, {1, 2}) == 0


def test_out_of_range_element():
    with pytest.raises(InputError):
        eval_set(ModularObjective([1.0, 1.0]), {2})


def test_marginals():
    f = FacilityLocationObjective([[3, 1]], 0)
    assert marginal_gain(f, {1}, 0) == 2
    assert marginal_gain(ModularObjective(np.ones(4)), {0, 3}, 1) == 1
    # client 1 is already covered by G1
    assert marginal_gain(CoverageObjective(COV3_GROUPS, 1), {0}, 1) == 0
    with pytest.raises(InputError):
        marginal_gain(f, {0}, 0)


def test_decomposable_eval(cov3):
    const = [FunctionObjective(lambda S: 1.0, 2), FunctionObjective(lambda S: 3.0, 2)]
    pop = ClientPopulation(const, [0.5, 0.5])
    # the constants are not normalised, so evaluate a nonempty set
    assert decomposable_eval(pop, {0}) == 2
    assert decomposable_eval(cov3, set()) == 0
    assert decomposable_eval(cov3, {0, 1}) == 0.75
    assert decomposable_eval(cov3, {0, 1}, weighted=False) == 3


def test_max_singleton(cov3):
    assert max_singleton(FacilityLocationObjective([[3, 1]], 0)) == 3
    assert max_singleton(CoverageObjective(COV3_GROUPS, 3)) == 1
    assert max_singleton(ModularObjective(np.ones(3))) == 1
    bounds = max_singleton_global(cov3)
    assert bounds.m_F == 0.5
    assert bounds.gamma_bound == 2.0


def test_population_validation():
    f = ModularObjective(np.ones(2))
    with pytest.raises(InputError):
        ClientPopulation([])
    with pytest.raises(InputError):
        ClientPopulation([f, f], [0.7, 0.7])
    with pytest.raises(InputError):
        ClientPopulation([f, f], [1.5, -0.5])
    with pytest.raises(InputError):
        ClientPopulation([f, ModularObjective(np.ones(3))])


def test_submodularity_checks():
    assert check_submodular(CoverageObjective(COV3_GROUPS, 1))
    assert not check_submodular(FunctionObjective(lambda S: len(S) ** 2, 2))
    assert check_monotone(FunctionObjective(lambda S: len(S) ** 2, 2))
    assert not check_monotone(FunctionObjective(lambda S: float(len(S) == 1), 2))
    f = FacilityLocationObjective(np.random.default_rng(0).random((1, 4)), 0)
    assert check_submodular(f) and check_monotone(f)
    with pytest.raises(SizeError):
        check_submodular(ModularObjective(np.ones(13)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 5))
def test_tables_match_definition(seed, n, N):
    rng = np.random.default_rng(seed)
    member = rng.random((N, n)) < 0.4
    groups = [set(np.flatnonzero(member[:, a]).tolist()) for a in range(n)]
    cov, fac = coverage_population(groups, N), random_facility(rng, n, N)
    for S in ref.subsets(n):
        for i in range(N):
            assert cov.oracles[i].eval(S) == ref.coverage_value(groups, i, S)
            assert fac.oracles[i].eval(S) == ref.facility_value(fac.oracles[i].row, S)
    assert check_submodular(cov.F()) and check_monotone(fac.F())


def test_readers(tmp_path):
    csv = tmp_path / "s.csv"
    csv.write_text("client_id,facility_id,score\n0,0,3\n0,1,1\n1,1,2\n")
    assert read_facility_csv(csv).tolist() == [[3, 1], [0, 2]]
    txt = tmp_path / "g.txt"
    txt.write_text("# comment\n0: 0 1\n1: 1 2\n2: 3\n")
    groups, N = read_coverage_groups(txt)
    assert groups == [[0, 1], [1, 2], [3]] and N == 4
    csv.write_text("a,b,c\n")
    with pytest.raises(InputError):
        read_facility_csv(csv)
    txt.write_text("0 1 2\n")
    with pytest.raises(InputError):
        read_coverage_groups(txt)
