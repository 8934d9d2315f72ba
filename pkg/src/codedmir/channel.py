"""Channel draws, zero-forcing receive/transmit vectors and AWGN."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .combinatorics import StagePlan, SystemParams, UserSet

EPS_NULL = 1e-9
EPS_SIG = 1e-6
MAX_CHANNEL_RETRIES = 16
# smallest singular value / largest, below which a set is treated as dependent
_GENERIC_TOL = 1e-8


class ChannelDegeneracyError(RuntimeError):
    pass


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def randn_c(rng: np.random.Generator, *shape) -> np.ndarray:
    """Unit-variance circularly-symmetric complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@dataclass(frozen=True)
class ChannelState:
    """Channel vectors, row ``k-1`` of `h` is user k's vector."""

    h: np.ndarray

    def __post_init__(self):
        self.h.setflags(write=False)

    @property
    def K(self) -> int:
        return self.h.shape[0]

    @property
    def L(self) -> int:
        return self.h.shape[1]

    def vec(self, k: int) -> np.ndarray:
        return self.h[k - 1]


def degenerate_subsets(h: np.ndarray, L: int) -> list[UserSet]:
    """User subsets of size min(L, K) whose channel vectors are dependent.

    Every stage's ZF design needs each L-subset of its users independent,
    and every L-subset of [K] lies in some stage.
    """
    K = h.shape[0]
    bad = []
    for users in itertools.combinations(range(1, K + 1), min(L, K)):
        s = np.linalg.svd(h[[u - 1 for u in users]], compute_uv=False)
        if s[0] == 0 or s[-1] / s[0] < _GENERIC_TOL:
            bad.append(users)
    return bad


def channel_state_from_array(h, params: SystemParams) -> ChannelState:
    h = np.array(h, dtype=complex)
    if h.shape != (params.K, params.L):
        raise ValueError(f"channel array must be {(params.K, params.L)}, got {h.shape}")
    bad = degenerate_subsets(h, params.L)
    if bad:
        raise ChannelDegeneracyError(f"linearly dependent channel vectors for users {bad[0]}")
    return ChannelState(h)


def generate_channels(params: SystemParams, seed, max_retries: int = MAX_CHANNEL_RETRIES,
                      sampler=None) -> ChannelState:
    """Draw i.i.d. CN(0, 1) channels, redrawing until in generic position.

    `sampler(rng, K, L)` replaces the Gaussian draw, mostly useful for
    injecting pathological channels in tests.
    """
    rng = as_generator(seed)
    sampler = sampler or (lambda g, K, L: randn_c(g, K, L))
    for _ in range(max_retries + 1):
        h = np.asarray(sampler(rng, params.K, params.L), dtype=complex)
        if not degenerate_subsets(h, params.L):
            return ChannelState(h)
    raise ChannelDegeneracyError(
        f"no generic-position channel after {max_retries} resamples")


def canonical_phase(x: np.ndarray) -> np.ndarray:
    """Unit norm, first non-negligible entry real and positive."""
    x = x / np.linalg.norm(x)
    lead = x[np.flatnonzero(np.abs(x) > 1e-12)[0]]
    return x * (abs(lead) / lead)


def _null_vector(M: np.ndarray, L: int) -> np.ndarray:
    if M.shape[0] == 0:
        if L != 1:
            raise ChannelDegeneracyError(f"no nulling constraints but L={L} > 1")
        return np.ones(1, dtype=complex)
    N = scipy.linalg.null_space(M)
    if N.shape[1] != 1:
        raise ChannelDegeneracyError(f"null space has dimension {N.shape[1]}, expected 1")
    return canonical_phase(N[:, 0])


@dataclass(frozen=True)
class ReceiveBeamformer:
    Q: UserSet
    stage_index: int
    v: np.ndarray

    def gain(self, channels: ChannelState, k: int) -> complex:
        """Plain (non-conjugated) product ``v h_k``."""
        return complex(self.v @ channels.vec(k))


@dataclass(frozen=True)
class Precoder:
    Q: UserSet
    stage_index: int
    w: np.ndarray

    def gain(self, channels: ChannelState, k: int) -> complex:
        """``h_k^H w``."""
        return complex(channels.vec(k).conj() @ self.w)


def _check(Q, stage, gains, what):
    for j, g in gains.items():
        if j in Q and abs(g) <= EPS_SIG:
            raise ChannelDegeneracyError(f"{what} for {Q}: |gain| at user {j} is {abs(g):.2e}")
        if j not in Q and abs(g) > EPS_NULL:
            raise ChannelDegeneracyError(f"{what} for {Q}: leakage {abs(g):.2e} at user {j}")


def zf_receive_vector(Q: UserSet, stage: StagePlan, channels: ChannelState) -> ReceiveBeamformer:
    """Row vector `v` with ``v h_j = 0`` for stage users outside `Q`."""
    if not set(Q) <= set(stage.users):
        raise ValueError(f"{Q} not within stage users {stage.users}")
    nulled = [j for j in stage.users if j not in Q]
    H = channels.h[[j - 1 for j in nulled]]          # (L-1) x L, rows h_j^T
    v = _null_vector(H, channels.L)
    _check(Q, stage, {j: v @ channels.vec(j) for j in stage.users}, "receive vector")
    return ReceiveBeamformer(tuple(Q), stage.stage_index, v)


def zf_precoder(Q: UserSet, stage: StagePlan, channels: ChannelState) -> Precoder:
    """Column vector `w` with ``h_j^H w = 0`` for stage users outside `Q`."""
    if not set(Q) <= set(stage.users):
        raise ValueError(f"{Q} not within stage users {stage.users}")
    nulled = [j for j in stage.users if j not in Q]
    H = channels.h[[j - 1 for j in nulled]].conj()   # rows h_j^H
    w = _null_vector(H, channels.L)
    _check(Q, stage, {j: channels.vec(j).conj() @ w for j in stage.users}, "precoder")
    return Precoder(tuple(Q), stage.stage_index, w)


@dataclass(frozen=True)
class StageBeamformers:
    v: dict[UserSet, ReceiveBeamformer]
    w: dict[UserSet, Precoder]


def stage_beamformers(stage: StagePlan, channels: ChannelState) -> StageBeamformers:
    sets = stage.codeword_sets
    return StageBeamformers(
        v={Q: zf_receive_vector(Q, stage, channels) for Q in sets},
        w={Q: zf_precoder(Q, stage, channels) for Q in sets},
    )


def sample_noise(shape, variance: float, seed=None) -> np.ndarray:
    """CN(0, variance) samples; exact zeros when `variance` is 0."""
    if variance < 0:
        raise ValueError("noise variance must be non-negative")
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    if variance == 0:
        return np.zeros(shape, dtype=complex)
    return np.sqrt(variance) * randn_c(as_generator(seed), *shape)
