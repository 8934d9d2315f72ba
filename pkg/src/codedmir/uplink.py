"""UL signal construction, BS reception and codeword extraction.

Within a stage every subpacket is addressed by a *role* ``(k, Q)``: user
``k`` in the (t+1)-set ``Q`` carries the subpacket of file ``<k>_Q``
cached by ``Q \\ {<k>_Q}``.  Transmission ``S`` of the stage has each
``k in S`` sending its role in ``S`` and each ``k not in S`` sending the
negated sum of its roles in ``S + {k} - {j}`` for ``j in S``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, sqrt
from typing import Any

from .backend import lin_sum
from .channel import ChannelState, StageBeamformers
from .combinatorics import StagePlan, SystemParams, UserSet, circular_successor, user_set
from .placement import CacheContents, PlacementError, SubpacketId

LONE, MEMBER, OUTSIDER = "lone", "member", "outsider"


class StageIncompleteError(RuntimeError):
    pass


def power_fraction(role: str, t: int, L: int) -> Fraction:
    """Per-subpacket power as an exact multiple of ``P_ul``."""
    if role == LONE:
        return Fraction(1)
    if role in (MEMBER, OUTSIDER):
        n_t = comb(t + L - 1, t)
        return Fraction(n_t, comb(t + L - 2, t - 1) + (t + 1) * comb(t + L - 2, t))
    raise ValueError(f"unknown role {role!r}")


def apply_power_allocation(role: str, params: SystemParams) -> float:
    """Amplitude applied to a unit-power block for the given role."""
    return sqrt(params.P_ul * power_fraction(role, params.t, params.L))


def amplitude(k: int, stage: StagePlan, params: SystemParams) -> float:
    return apply_power_allocation(LONE if k == stage.lone_user else MEMBER, params)


def role_subpacket(k: int, Q: UserSet, stage: StagePlan) -> SubpacketId:
    """Subpacket that user `k` contributes to codeword `Q`."""
    n = circular_successor(k, Q)
    return SubpacketId(n, tuple(u for u in Q if u != n), stage.q_assignment[tuple(Q)])


def transmit_roles(k: int, S: UserSet, stage: StagePlan) -> list[tuple[UserSet, int]]:
    """(codeword set, sign) pairs making up user `k`'s signal in transmission `S`."""
    if k in S:
        return [(tuple(S), 1)]
    return [(user_set((set(S) | {k}) - {j}), -1) for j in S]


def ul_transmit_signal(k: int, S: UserSet, stage: StagePlan, cache: CacheContents,
                       params: SystemParams, backend):
    if k not in stage.users:
        raise ValueError(f"user {k} is not in stage {stage.users}")
    if tuple(S) not in stage.transmissions:
        raise ValueError(f"{S} is not a transmission of stage {stage.stage_index}")
    amp = amplitude(k, stage, params)
    parts = []
    for Q, sign in transmit_roles(k, S, stage):
        sid = role_subpacket(k, Q, stage)
        if sid not in cache:
            raise PlacementError(f"user {k} must send {sid} but does not cache it")
        parts.append((sign * amp) * backend.symbol(sid, cache.bits(sid)))
    return lin_sum(parts, backend.zero())


@dataclass
class UlTransmission:
    stage_index: int
    S: UserSet
    per_user_signal: dict[int, Any]


@dataclass
class UlReception:
    """BS observation, `y` and `noise` hold one signal per antenna."""

    stage_index: int
    S: UserSet
    y: list
    noise: list


@dataclass
class Codeword:
    """Extracted size-(t+1) combination.

    `coefficients[k]` is ``v_Q h_k`` times user k's power amplitude, and
    the payload's signal part equals ``sign * sum_k coefficients[k] c(role)``.
    """

    stage_index: int
    Q: UserSet
    sign: int
    payload: Any
    coefficients: dict[int, complex]
    noise_record: Any
    sources: tuple[UserSet, ...]


def ul_transmission(S: UserSet, stage: StagePlan, caches, params, backend) -> UlTransmission:
    return UlTransmission(stage.stage_index, tuple(S), {
        k: ul_transmit_signal(k, S, stage, caches[k], params, backend) for k in stage.users})


def bs_receive(tx: UlTransmission, channels: ChannelState, backend) -> UlReception:
    noise = backend.bs_noise(tx.stage_index, tx.S)
    y = []
    for i in range(channels.L):
        acc = lin_sum((complex(channels.vec(k)[i]) * x for k, x in tx.per_user_signal.items()),
                      backend.zero())
        y.append(acc + noise[i])
    return UlReception(tx.stage_index, tx.S, y, noise)


def _combine(v, rows, zero):
    return lin_sum((complex(vi) * r for vi, r in zip(v, rows)), zero)


def _receptions_for(stage, receptions):
    missing = [S for S in stage.transmissions if S not in receptions]
    if missing:
        raise StageIncompleteError(f"stage {stage.stage_index} lacks receptions {missing}")
    return receptions


def _coefficients(Q, stage, channels, bf, params):
    v = bf.v[Q]
    return {k: v.gain(channels, k) * amplitude(k, stage, params) for k in Q}


def extract_codewords_A(stage: StagePlan, receptions: dict, channels: ChannelState,
                        beamformers: StageBeamformers, params: SystemParams, backend) -> list[Codeword]:
    """Codewords of sets containing the lone user: ``v_S y(S)``."""
    receptions = _receptions_for(stage, receptions)
    out = []
    for S in stage.transmissions:
        v = beamformers.v[S].v
        rx = receptions[S]
        out.append(Codeword(
            stage.stage_index, S, 1,
            payload=_combine(v, rx.y, backend.zero()),
            coefficients=_coefficients(S, stage, channels, beamformers, params),
            noise_record=_combine(v, rx.noise, backend.zero()),
            sources=(S,),
        ))
    return out


def extract_codewords_B(stage: StagePlan, receptions: dict, channels: ChannelState,
                        beamformers: StageBeamformers, params: SystemParams, backend) -> list[Codeword]:
    """Codewords of sets R without the lone user: ``sum_j v_R y(R + lone - j)``."""
    receptions = _receptions_for(stage, receptions)
    out = []
    for R in stage.set_b:
        v = beamformers.v[R].v
        sources = tuple(user_set((set(R) | {stage.lone_user}) - {j}) for j in R)
        out.append(Codeword(
            stage.stage_index, R, -1,
            payload=lin_sum((_combine(v, receptions[S].y, backend.zero()) for S in sources),
                            backend.zero()),
            coefficients=_coefficients(R, stage, channels, beamformers, params),
            noise_record=lin_sum((_combine(v, receptions[S].noise, backend.zero())
                                  for S in sources), backend.zero()),
            sources=sources,
        ))
    return out


def run_uplink_stage(stage, caches, channels, beamformers, params, backend):
    """All receptions of a stage followed by both extraction passes."""
    receptions = {S: bs_receive(ul_transmission(S, stage, caches, params, backend), channels, backend)
                  for S in stage.transmissions}
    cws = (extract_codewords_A(stage, receptions, channels, beamformers, params, backend)
           + extract_codewords_B(stage, receptions, channels, beamformers, params, backend))
    return receptions, {cw.Q: cw for cw in cws}


def stage_energy_fraction(k: int, stage: StagePlan) -> Fraction:
    """Exact expected UL energy of user `k` over one stage, in units of P_ul."""
    t, L = stage.t, len(stage.users) - stage.t
    role = LONE if k == stage.lone_user else MEMBER
    per = power_fraction(role, t, L)
    return sum((per * len(transmit_roles(k, S, stage)) for S in stage.transmissions), Fraction(0))


def measured_stage_energy(k: int, stage: StagePlan, caches, params, backend) -> float:
    """Sum over the stage's transmissions of user `k`'s (expected or sample) power."""
    return sum(backend.power(ul_transmit_signal(k, S, stage, caches[k], params, backend))
               for S in stage.transmissions)
