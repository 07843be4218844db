from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codedpir.errors import DecodeError, ParameterError, ProtocolError, RequestError
from codedpir.field import FieldMatrix, solve_unique
from codedpir.retrieval import (
    AnswerBundle,
    Decoder,
    QueryBundle,
    RetrievalMatrix,
    cyclic_v,
    decode,
    decode_system,
    gen_queries,
    queries_from_mask,
    random_mask,
    random_v,
    respond,
    retrieval_cost,
)
from codedpir.scheme import Scheme
from codedpir.storage import NodeContent, SystemParams, encode_record, make_mds_parity, store

from conftest import certified_random_scheme


def test_cyclic_v_small():
    V = cyclic_v(3, 1, 5)
    assert V.matrix.tolist() == [[0, 0, 1, 0, 0, 1], [0, 1, 0, 0, 1, 0], [1, 0, 0, 1, 0, 0]]
    assert (V.L, V.T, V.R, V.K) == (1, 2, 2, 3)


@pytest.mark.parametrize("K,S", [(5, 2), (6, 1), (7, 4)])
def test_cyclic_v_has_one_entry_per_column(K, S):
    V = cyclic_v(K, S, 11)
    for j in range(V.matrix.cols):
        assert sum(1 for x in V.matrix.col(j) if x) == 1


def test_column_layout():
    params = SystemParams(q=7, N=1, K=3, S=1, L=1, T=2, R=2)
    V = random_v(params, np.random.default_rng(0))
    for k in range(1, 4):
        for r in range(1, 3):
            j = (k - 1) * 2 + (r - 1)
            assert V.offset(r, k) == j
            assert V.column(r, k) == V.matrix.col(j)
    assert V.block([2]).tolist() == [list(V.matrix.row(i)[2:4]) for i in range(3)]


def _queries_by_matrices(V, M, U, params):
    """Q_{r,k} = U v_{r,k} + E_M vstar_{r,k}, built with matrix products."""
    q, L, N = params.q, params.L, params.N
    E = FieldMatrix(
        [[int(i == L * (M - 1) + l) for l in range(L)] for i in range(L * N)], q, L
    )
    out = []
    for k in range(1, params.K + 1):
        vecs = []
        for r in range(1, params.R + 1):
            col = V.column(r, k)
            vstar = FieldMatrix.column(col[:L], q)
            v = FieldMatrix.column(col[L:], q)
            vecs.append((U @ v + E @ vstar).col(0))
        out.append(QueryBundle(k, tuple(vecs)))
    return tuple(out)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_queries_match_matrix_form(seed, M):
    params = SystemParams(q=13, N=3, K=4, S=2, L=2, T=2, R=2)
    rng = np.random.default_rng(seed)
    V = random_v(params, rng)
    mask = random_mask(params, rng)
    assert queries_from_mask(V, M, mask, params) == _queries_by_matrices(V, M, mask.matrix, params)


def test_bad_request_index(scheme42):
    p = scheme42.params
    for M in (0, p.N + 1):
        with pytest.raises(RequestError):
            gen_queries(scheme42.V, M, p, np.random.default_rng(0))


def test_respond_length_mismatch():
    with pytest.raises(ProtocolError):
        respond(NodeContent(1, (1, 2)), QueryBundle(1, ((1, 2, 3),)), 5)


def test_decode_system_shape(scheme42):
    p = scheme42.params
    A = decode_system(scheme42.parity, scheme42.V, p)
    assert A.shape == (p.S * (p.T + p.L) + p.K * p.R, p.K * (p.T + p.L))


def _session(scheme, M, seed):
    p = scheme.params
    rng = np.random.default_rng(seed)
    infos = rng.integers(0, p.q, (p.N, p.info_len)).tolist()
    recs = [encode_record(i, scheme.parity, p.L) for i in infos]
    nodes = store(recs, scheme.parity)
    _, queries = gen_queries(scheme.V, M, p, rng)
    answers = [respond(n, b, p.q) for n, b in zip(nodes, queries)]
    return recs, answers


@pytest.mark.parametrize("K,S", [(3, 1), (4, 2), (5, 3)])
def test_roundtrip(K, S):
    scheme = certified_random_scheme(65537, K, S)
    for M in (1, 2):
        recs, answers = _session(scheme, M, seed=M)
        assert decode(scheme.V, scheme.parity, answers, M, scheme.params) == recs[M - 1]


def test_decoder_agrees_with_direct_solve(scheme42):
    p = scheme42.params
    dec = Decoder(scheme42.parity, scheme42.V, p)
    assert dec.unique
    _, answers = _session(scheme42, 1, seed=9)
    rhs = [0] * (p.S * (p.T + p.L)) + [x for a in answers for x in a.values]
    A = decode_system(scheme42.parity, scheme42.V, p)
    assert dec.solve(answers) == solve_unique(A, rhs)


def test_zero_v_is_underdetermined():
    params = SystemParams.optimal(7, 3, 1)
    V = RetrievalMatrix(FieldMatrix.zeros(3, 6, 7), L=1, T=2, R=2)
    dec = Decoder(make_mds_parity(3, 1, 7), V, params)
    assert not dec.unique
    with pytest.raises(DecodeError):
        dec.solve([AnswerBundle(k, (0, 0)) for k in (1, 2, 3)])


def test_corrupted_answer_in_overdetermined_system():
    # More equations than unknowns, so a corrupted symbol leaves the system
    # inconsistent.
    params = SystemParams(q=65537, N=2, K=3, S=2, L=1, T=2, R=2)
    parity = make_mds_parity(3, 2, params.q)
    scheme = Scheme(params, parity, random_v(params, np.random.default_rng(3)))
    dec = Decoder(parity, scheme.V, params)
    assert dec.unique
    recs, answers = _session(scheme, 1, seed=4)
    bad = list(answers)
    bad[1] = AnswerBundle(2, ((answers[1].values[0] + 1) % params.q, answers[1].values[1]))
    with pytest.raises(DecodeError):
        dec.decode(bad)


def test_corrupted_answer_in_square_system_is_undetectable(scheme42):
    # The optimal parameters give a square invertible system: any answer
    # vector is consistent, so corruption shows up only as a different solution.
    dec = Decoder(scheme42.parity, scheme42.V, scheme42.params)
    recs, answers = _session(scheme42, 2, seed=5)
    bad = list(answers)
    bad[0] = AnswerBundle(1, ((answers[0].values[0] + 1) % scheme42.params.q,) + answers[0].values[1:])
    assert dec.system.rows == dec.system.cols == dec.rank
    dec.decode(bad)  # no error: every right-hand side is consistent
    assert dec.solve(bad) != dec.solve(answers)


def test_decoder_rejects_wrong_answer_count(scheme42):
    dec = Decoder(scheme42.parity, scheme42.V, scheme42.params)
    with pytest.raises(DecodeError):
        dec.solve([AnswerBundle(1, (0, 0))])


def test_decoder_param_mismatch(scheme42):
    with pytest.raises(ParameterError):
        Decoder(make_mds_parity(3, 1, 65537), scheme42.V, scheme42.params)


@pytest.mark.parametrize("K,S", [(K, S) for K in range(2, 11) for S in range(1, K)])
def test_retrieval_cost_matches_downloaded_symbols(K, S):
    q = 11
    params = SystemParams.optimal(q, K, S, N=1)
    V = cyclic_v(K, S, q)
    P = make_mds_parity(K, S, q)
    rng = np.random.default_rng(K + S)
    rec = encode_record(rng.integers(0, q, params.info_len).tolist(), P, params.L)
    nodes = store([rec], P)
    _, queries = gen_queries(V, 1, params, rng)
    per_node = len(respond(nodes[0], queries[0], q).values)
    assert retrieval_cost(params) == Fraction(per_node, params.info_len) == Fraction(1, S)
