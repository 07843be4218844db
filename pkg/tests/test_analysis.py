import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codedpir.analysis import (
    CostReport,
    LinearPIR,
    brute_errorfree,
    brute_privacy,
    certify,
    check_privacy,
    check_prop1,
    check_prop2,
    check_retrievability,
    cost_report,
    tradeoff_bound,
)
from codedpir.errors import EnumerationBudgetError, InfeasibleRegionError, ParameterError
from codedpir.field import FieldMatrix
from codedpir.retrieval import RetrievalMatrix, cyclic_v, decode_system, random_v
from codedpir.scheme import CollusionPattern, Scheme
from codedpir.storage import ParityCheck, SystemParams, make_mds_parity

from conftest import tiny_scheme


def privacy_by_span_enumeration(V, phi, params) -> bool:
    """Some nonzero combination of an alpha-block with zero v-part means a leak."""
    q, L = params.q, params.L
    for alpha in phi:
        G = V.block(alpha)
        for coeffs in itertools.product(range(q), repeat=G.cols):
            y = G.dot_vector(coeffs)
            if any(y[:L]) and not any(y[L:]):
                return False
    return True


def retrievable_by_kernel_enumeration(parity, V, params) -> bool:
    A = decode_system(parity, V, params)
    for x in itertools.product(range(params.q), repeat=A.cols):
        if any(x) and not any(A.dot_vector(x)):
            return False
    return True


@st.composite
def tiny_instances(draw):
    q = draw(st.sampled_from([2, 3]))
    R = draw(st.integers(1, 2))
    params = SystemParams(q=q, N=2, K=3, S=1, L=1, T=2, R=R)
    last = draw(st.integers(1, q - 1))
    P = ParityCheck(FieldMatrix([[draw(st.integers(0, q - 1))], [draw(st.integers(0, q - 1))], [last]], q))
    seed = draw(st.integers(0, 2**32 - 1))
    return Scheme(params, P, random_v(params, np.random.default_rng(seed)))


@settings(max_examples=40, deadline=None)
@given(tiny_instances())
def test_privacy_matches_span_enumeration(scheme):
    verdict = check_privacy(scheme.V, scheme.phi, scheme.params)
    assert verdict.private == privacy_by_span_enumeration(scheme.V, scheme.phi, scheme.params)


@settings(max_examples=15, deadline=None)
@given(tiny_instances())
def test_retrievability_matches_kernel_enumeration(scheme):
    expected = retrievable_by_kernel_enumeration(scheme.parity, scheme.V, scheme.params)
    assert check_retrievability(scheme.parity, scheme.V, scheme.params) == expected


@settings(max_examples=15, deadline=None)
@given(tiny_instances())
def test_algebraic_pass_implies_oracle_pass(scheme):
    if check_privacy(scheme.V, scheme.phi, scheme.params).private:
        assert brute_privacy(scheme, scheme.phi)
    if check_retrievability(scheme.parity, scheme.V, scheme.params):
        assert brute_errorfree(scheme)


def test_tiny_certified_scheme_is_verified_by_oracles():
    scheme = tiny_scheme(26)
    report = certify(scheme, oracle=True)
    assert report.certified
    assert report.oracle_errorfree and report.oracle_private
    assert report.verdict == "certified"


def test_cyclic_v_fails_singleton_privacy():
    params = SystemParams.optimal(5, 3, 1)
    V = cyclic_v(3, 1, 5)
    verdict = check_privacy(V, CollusionPattern.singletons(3), params)
    assert not verdict.private and verdict.failing is not None
    assert check_retrievability(make_mds_parity(3, 1, 5), V, params)


def test_zero_v_not_retrievable():
    params = SystemParams.optimal(5, 3, 1)
    V = RetrievalMatrix(FieldMatrix.zeros(3, 6, 5), L=1, T=2, R=2)
    assert not check_retrievability(make_mds_parity(3, 1, 5), V, params)


def test_prop1_detects_too_many_queries():
    # R = 1 with T + L = 3: the count (T+L-R)K exceeds rank(P)(T+L).
    params = SystemParams(q=5, N=1, K=3, S=1, L=1, T=2, R=1)
    verdict = check_prop1(make_mds_parity(3, 1, 5), params)
    assert not verdict.ok


def test_prop1_tightest_beta_for_optimal():
    params = SystemParams.optimal(11, 4, 2)
    verdict = check_prop1(make_mds_parity(4, 2, 11), params)
    assert verdict.ok


def test_prop1_refuses_large_sweep():
    params = SystemParams.optimal(23, 21, 1)
    P = make_mds_parity(21, 1, 23)
    with pytest.raises(ParameterError):
        check_prop1(P, params)
    assert check_prop1(P, params, betas=[()]).ok


def test_prop2():
    assert check_prop2(SystemParams(q=5, N=1, K=3, S=1, L=1, T=2, R=2))
    assert not check_prop2(SystemParams(q=5, N=1, K=3, S=1, L=1, T=1, R=2))


def test_tradeoff_bound():
    assert tradeoff_bound(Fraction(1, 2), 3) == 1
    assert tradeoff_bound(Fraction(1, 2), 4) == Fraction(1, 2)
    assert tradeoff_bound(Fraction(1), 2) == 1
    for sc, K in [(Fraction(1, 3), 3), (Fraction(1, 4), 3)]:
        with pytest.raises(InfeasibleRegionError):
            tradeoff_bound(sc, K)


@pytest.mark.parametrize("K,S", [(K, S) for K in range(2, 11) for S in range(1, K)])
def test_optimal_parameters_are_tight(K, S):
    report = cost_report(SystemParams.optimal(11, K, S))
    assert report.tight and report.rc == Fraction(1, S)


def test_cost_report_infeasible_region():
    report = CostReport.from_costs(Fraction(1, 4), Fraction(1), 3)
    assert report.bound is None and not report.tight
    assert report.to_dict() == {"sc": "1/4", "rc": "1", "bound": None, "tight": False}


def test_oracle_budget():
    params = SystemParams.optimal(65537, 4, 2)
    scheme = Scheme(params, make_mds_parity(4, 2, 65537), cyclic_v(4, 2, 65537))
    with pytest.raises(EnumerationBudgetError):
        brute_privacy(scheme, scheme.phi)
    with pytest.raises(EnumerationBudgetError):
        brute_errorfree(LinearPIR(scheme))
    report = certify(scheme, oracle=True)
    assert report.oracle_private is None


def test_collusion_pattern_canonical():
    phi = CollusionPattern([[3, 1], [1], [2]], K=3)
    assert phi.tolist() == [[1, 3], [2]]
    with pytest.raises(ParameterError):
        CollusionPattern([[4]], K=3)
    with pytest.raises(ParameterError):
        CollusionPattern([[]])


def test_full_collusion_leaks_for_retrievable_scheme():
    scheme = tiny_scheme(26)
    everyone = CollusionPattern([[1, 2, 3]], K=3)
    assert not check_privacy(scheme.V, everyone, scheme.params).private
    assert not brute_privacy(scheme, everyone)
