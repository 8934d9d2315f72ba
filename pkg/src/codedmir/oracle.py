"""Closed-form expected signals, written independently of the pipeline.

These build what the extracted codewords and the per-user solved scalars
*should* be straight from their defining formulas, so the pipeline (in
symbolic or numeric mode) can be checked against them.  Subpacket
addressing here goes through `q_index` (rank by enumeration) rather than
the stage's precomputed q map.
"""
from __future__ import annotations

from .channel import ChannelState, StageBeamformers
from .coding import FormalSignal
from .combinatorics import StagePlan, SystemParams, UserSet, circular_successor, q_index, user_set
from .placement import SubpacketId
from .uplink import apply_power_allocation


def _sid(n, Q, stage, params):
    return SubpacketId(n, tuple(u for u in Q if u != n), q_index(Q, stage, params))


def _amp(k, stage, params):
    return apply_power_allocation("lone" if k == min(stage.users) else "member", params)


def expected_codeword(Q: UserSet, stage: StagePlan, channels: ChannelState,
                      beamformers: StageBeamformers, params: SystemParams) -> FormalSignal:
    """Signal part of the codeword for `Q` (set A when it holds the lone user, else set B)."""
    sign = 1 if min(stage.users) in Q else -1
    v = beamformers.v[Q].v
    out = FormalSignal()
    for k in Q:
        coeff = sign * complex(v @ channels.vec(k)) * _amp(k, stage, params)
        out = out + FormalSignal.symbol(_sid(circular_successor(k, Q), Q, stage, params), coeff)
    return out


def expected_noise_sources(Q: UserSet, stage: StagePlan) -> set[UserSet]:
    """UL receptions whose BS noise ends up in the codeword for `Q`."""
    lone = min(stage.users)
    if lone in Q:
        return {tuple(Q)}
    return {user_set((set(Q) | {lone}) - {j}) for j in Q}


def expected_solved_scalar(k: int, Q: UserSet, stage: StagePlan, channels: ChannelState,
                           beamformers: StageBeamformers, params: SystemParams) -> FormalSignal:
    """Noiseless value of user `k`'s solved observation for codeword `Q`."""
    (l_star,) = [l for l in Q if circular_successor(l, Q) == k]
    sign = 1 if min(stage.users) in Q else -1
    gain = (sign * complex(channels.vec(k).conj() @ beamformers.w[Q].w)
            * complex(beamformers.v[Q].v @ channels.vec(l_star)) * _amp(l_star, stage, params))
    return FormalSignal.symbol(_sid(k, Q, stage, params), gain)
