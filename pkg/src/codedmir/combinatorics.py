"""Subset enumeration, stage planning and subpacket indexing.

User sets are plain tuples of 1-based user indices kept in strictly
ascending order.  Every ordering produced here is lexicographic, so stage
and transmission indices are reproducible across runs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable

UserSet = tuple[int, ...]


def user_set(members: Iterable[int]) -> UserSet:
    """Return `members` as a canonical (sorted, duplicate-free) user set."""
    out = tuple(sorted(members))
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate users in {members!r}")
    return out


@dataclass(frozen=True)
class SystemParams:
    """Static system configuration.

    Parameters
    ----------
    K : int
        Number of users (and files, N = K).
    L : int
        Number of BS antennas.
    t : int
        Caching parameter, each packet is held by exactly `t` users.
    f : int
        Subpacket size in bits.
    P_ul : float
        UL reference power of the lone user (linear scale).
    P_bs : float
        DL total transmit power per transmission (linear scale).
    bits_per_symbol : int
        2 for QPSK, 4 for 16-QAM.
    """

    K: int
    L: int
    t: int
    f: int = 8
    P_ul: float = 1.0
    P_bs: float = 1.0
    bits_per_symbol: int = 2

    def __post_init__(self):
        problems = []
        if self.t < 1:
            problems.append("t ≥ 1 violated")
        if self.L < 1:
            problems.append("L ≥ 1 violated")
        if self.K < self.t + self.L:
            problems.append(f"K ≥ t+L violated ({self.K} < {self.t + self.L})")
        if self.bits_per_symbol not in (2, 4):
            problems.append("bits_per_symbol must be 2 (QPSK) or 4 (16-QAM)")
        elif self.f < 1 or self.f % self.bits_per_symbol:
            problems.append(
                f"f divisible by bits_per_symbol violated (f={self.f}, b={self.bits_per_symbol})")
        if self.P_ul < 0 or self.P_bs < 0:
            problems.append("powers must be non-negative")
        if problems:
            raise ValueError("invalid SystemParams: " + "; ".join(problems))

    @property
    def gamma(self) -> Fraction:
        return Fraction(self.t, self.K)

    @property
    def n_packets(self) -> int:
        """Packets per file, C(K, t)."""
        return comb(self.K, self.t)

    @property
    def n_sub(self) -> int:
        """Subpackets per packet, C(K-t-1, L-1)."""
        return comb(self.K - self.t - 1, self.L - 1)

    @property
    def F(self) -> int:
        """File size in bits."""
        return self.f * self.n_packets * self.n_sub

    @property
    def n_stages(self) -> int:
        return comb(self.K, self.t + self.L)

    @property
    def n_transmissions(self) -> int:
        """Transmissions per stage, C(t+L-1, t)."""
        return comb(self.t + self.L - 1, self.t)

    @property
    def stages_per_user(self) -> int:
        return comb(self.K - 1, self.t + self.L - 1)

    @property
    def symbols_per_subpacket(self) -> int:
        return self.f // self.bits_per_symbol


def circular_successor(l: int, T: Iterable[int]) -> int:
    """Element of `T` following `l` under cyclic ascending order."""
    members = sorted(T)
    if l not in members:
        raise ValueError(f"{l} is not a member of {tuple(members)}")
    bigger = [i for i in members if i > l]
    return bigger[0] if bigger else members[0]


def circular_predecessor(k: int, T: Iterable[int]) -> int:
    """The unique `l` in `T` with ``circular_successor(l, T) == k``."""
    members = sorted(T)
    if k not in members:
        raise ValueError(f"{k} is not a member of {tuple(members)}")
    smaller = [i for i in members if i < k]
    return smaller[-1] if smaller else members[-1]


@dataclass(frozen=True)
class StagePlan:
    """One UL/DL stage: its users, lone user, transmissions and q map."""

    stage_index: int
    users: UserSet
    t: int
    lone_user: int
    transmissions: tuple[UserSet, ...]
    q_assignment: dict[UserSet, int] = field(compare=False, hash=False)

    @property
    def codeword_sets(self) -> list[UserSet]:
        """All (t+1)-subsets of the stage users, lexicographic."""
        return [tuple(c) for c in itertools.combinations(self.users, self.t + 1)]

    @property
    def set_a(self) -> list[UserSet]:
        return [Q for Q in self.codeword_sets if self.lone_user in Q]

    @property
    def set_b(self) -> list[UserSet]:
        return [Q for Q in self.codeword_sets if self.lone_user not in Q]

    def sets_containing(self, k: int) -> list[UserSet]:
        return [Q for Q in self.codeword_sets if k in Q]


def build_set_M(users: Iterable[int], t: int) -> list[UserSet]:
    """(t+1)-subsets of `users` containing the smallest user, lexicographic."""
    users = user_set(users)
    lone = users[0]
    rest = users[1:]
    return [(lone,) + c for c in itertools.combinations(rest, t)]


def stage_rank(Q: Iterable[int], users: Iterable[int], K: int) -> int:
    """1-based rank of `users` among the same-size supersets of `Q` in [1..K]."""
    Q = user_set(Q)
    users = user_set(users)
    if not set(Q) <= set(users):
        raise ValueError(f"{Q} is not a subset of stage users {users}")
    free = [i for i in range(1, K + 1) if i not in Q]
    supersets = sorted(
        user_set(Q + extra) for extra in itertools.combinations(free, len(users) - len(Q)))
    return supersets.index(users) + 1


def q_index(Q: Iterable[int], stage: StagePlan, params: SystemParams) -> int:
    """Subpacket index used by codeword `Q` during `stage`."""
    return stage_rank(Q, stage.users, params.K)


def enumerate_stages(params: SystemParams) -> list[StagePlan]:
    """All stages, one per (t+L)-subset of users, in lexicographic order."""
    t = params.t
    seen: dict[UserSet, int] = {}
    stages = []
    for idx, users in enumerate(itertools.combinations(range(1, params.K + 1), t + params.L), 1):
        qmap = {}
        # lexicographic stage order means a running count per Q is its rank
        for Q in itertools.combinations(users, t + 1):
            seen[Q] = seen.get(Q, 0) + 1
            qmap[Q] = seen[Q]
        stages.append(StagePlan(
            stage_index=idx,
            users=users,
            t=t,
            lone_user=users[0],
            transmissions=tuple(build_set_M(users, t)),
            q_assignment=qmap,
        ))
    return stages
