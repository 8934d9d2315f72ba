import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from codedmir.combinatorics import (SystemParams, build_set_M, circular_predecessor,
                                    circular_successor, enumerate_stages, q_index, stage_rank,
                                    user_set)
from oracles import factorial_binom, supersets_rank, ul_terms


def test_circular_successor_examples():
    assert circular_successor(1, (1, 2, 3)) == 2
    assert circular_successor(3, (1, 2, 3)) == 1
    assert circular_successor(7, (7,)) == 7


def test_circular_successor_rejects_outsider():
    with pytest.raises(ValueError):
        circular_successor(4, (1, 2, 3))


@given(st.sets(st.integers(1, 30), min_size=1, max_size=8), st.data())
def test_successor_cycle_and_inverse(T, data):
    T = tuple(sorted(T))
    l = data.draw(st.sampled_from(T))
    x = l
    for _ in range(len(T)):
        x = circular_successor(x, T)
    assert x == l
    assert circular_predecessor(circular_successor(l, T), T) == l


def test_build_set_M_examples():
    assert build_set_M((1, 2, 3), 1) == [(1, 2), (1, 3)]
    assert build_set_M(range(1, 6), 2) == [(1, 2, 3), (1, 2, 4), (1, 2, 5),
                                           (1, 3, 4), (1, 3, 5), (1, 4, 5)]
    assert build_set_M((1, 2), 1) == [(1, 2)]


@pytest.mark.parametrize("t,L", [(1, 1), (1, 2), (2, 3), (3, 3), (2, 5)])
def test_build_set_M_size(t, L):
    assert len(build_set_M(range(1, t + L + 1), t)) == factorial_binom(t + L - 1, t)


def test_params_validation_message():
    with pytest.raises(ValueError, match=r"K ≥ t\+L violated \(3 < 4\)"):
        SystemParams(K=3, L=3, t=1)
    with pytest.raises(ValueError, match="t ≥ 1"):
        SystemParams(K=3, L=1, t=0)
    with pytest.raises(ValueError, match="divisible"):
        SystemParams(K=3, L=2, t=1, f=6, bits_per_symbol=4)


def test_params_counts():
    p = SystemParams(K=5, L=3, t=2, f=8)
    assert p.gamma == Fraction(2, 5)
    assert (p.n_packets, p.n_sub, p.n_stages, p.n_transmissions) == (10, 1, 1, 6)
    assert p.F == 80
    q = SystemParams(K=6, L=3, t=2, f=4)
    assert q.n_sub == 3 and q.F == 4 * 15 * 3


def test_enumerate_stages_examples():
    s = enumerate_stages(SystemParams(K=5, L=3, t=2))
    assert [x.users for x in s] == [(1, 2, 3, 4, 5)]
    assert enumerate_stages(SystemParams(K=3, L=2, t=1))[0].users == (1, 2, 3)
    assert len(enumerate_stages(SystemParams(K=10, L=4, t=2))) == factorial_binom(10, 6) == 210


def test_stage_structure():
    for st_ in enumerate_stages(SystemParams(K=7, L=3, t=2)):
        assert st_.lone_user == min(st_.users)
        assert len(st_.transmissions) == 6
        assert all(st_.lone_user in S and set(S) <= set(st_.users) for S in st_.transmissions)


def test_q_index_examples():
    p = SystemParams(K=5, L=3, t=2)
    (stage,) = enumerate_stages(p)
    assert {q_index(Q, stage, p) for Q in itertools.combinations(stage.users, 3)} == {1}

    p = SystemParams(K=4, L=2, t=1)
    by_users = {s.users: s for s in enumerate_stages(p)}
    assert q_index((1, 2), by_users[(1, 2, 3)], p) == 1
    assert q_index((1, 2), by_users[(1, 2, 4)], p) == 2


def test_q_index_bijection_k6():
    p = SystemParams(K=6, L=3, t=2)
    stages = [s for s in enumerate_stages(p) if {1, 2, 3} <= set(s.users)]
    assert len(stages) == 3
    assert sorted(q_index((1, 2, 3), s, p) for s in stages) == [1, 2, 3]


def test_q_index_rejects_foreign_set():
    p = SystemParams(K=4, L=2, t=1)
    stage = enumerate_stages(p)[0]
    assert stage.users == (1, 2, 3)
    with pytest.raises(ValueError):
        q_index((1, 4), stage, p)


@pytest.mark.parametrize("K,t,L", [(3, 1, 2), (4, 1, 2), (5, 2, 3), (6, 2, 3), (6, 1, 3),
                                   (7, 3, 3), (7, 2, 2), (8, 2, 3)])
def test_q_assignment_matches_rank_oracle(K, t, L):
    p = SystemParams(K=K, L=L, t=t)
    for s in enumerate_stages(p):
        for Q, q in s.q_assignment.items():
            assert q == supersets_rank(Q, s.users, K) == stage_rank(Q, s.users, K)
            assert 1 <= q <= p.n_sub


@pytest.mark.parametrize("K,t,L", [(3, 1, 2), (4, 1, 2), (5, 2, 3), (6, 2, 3), (6, 1, 3),
                                   (7, 3, 3), (7, 2, 2), (8, 2, 3), (8, 1, 4)])
def test_in_set_roles_are_never_repeated(K, t, L):
    # subpackets a user sends for its own transmission set S never recur
    p = SystemParams(K=K, L=L, t=t)
    sent = []
    for s in enumerate_stages(p):
        for S in s.transmissions:
            for k in s.users:
                if k in S:
                    sent += list(ul_terms(k, S, s.users, K))
    expected_total = p.n_stages * factorial_binom(t + L - 1, t) * (t + 1)
    assert len(sent) == expected_total == len(set(sent))


@pytest.mark.parametrize("K,t,L", [(3, 1, 2), (5, 2, 3), (6, 2, 3), (7, 2, 2), (8, 2, 3)])
def test_every_subpacket_delivered_once(K, t, L):
    # each (t+1)-set Q of each stage carries one subpacket per member, and
    # together these cover every subpacket not cached by its requester once
    p = SystemParams(K=K, L=L, t=t)
    seen = []
    for s in enumerate_stages(p):
        for Q in itertools.combinations(s.users, t + 1):
            for k in Q:
                n = circular_successor(k, Q)
                seen.append((n, tuple(u for u in Q if u != n), s.q_assignment[Q]))
    universe = [(n, P, q) for n in range(1, K + 1)
                for P in itertools.combinations(range(1, K + 1), t) if n not in P
                for q in range(1, p.n_sub + 1)]
    assert sorted(seen) == sorted(universe)


def test_user_set_canonical():
    assert user_set([3, 1, 2]) == (1, 2, 3)
    with pytest.raises(ValueError):
        user_set([1, 1])
