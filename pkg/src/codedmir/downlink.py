"""BS broadcast of codeword superpositions and per-user decoding."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any

import numpy as np

from .backend import lin_sum
from .channel import EPS_SIG, ChannelState, StageBeamformers, as_generator
from .combinatorics import StagePlan, SystemParams, UserSet, circular_predecessor
from .placement import (CacheContents, IncompleteRecoveryError, PlacementError, SubpacketId,
                        subpacket_ids)
from .uplink import StageIncompleteError, amplitude, role_subpacket

KAPPA_MAX = 1e6
MAX_CODEBOOK_RETRIES = 16


class CodebookError(RuntimeError):
    pass


class UnequalizableError(RuntimeError):
    pass


@dataclass(frozen=True)
class CoefficientCodebook:
    """Real mixing vectors ``a_Q`` of length N_T, one per codeword set.

    `row_gain[j]` is the common power-normalization factor applied to every
    stream of DL transmission ``j`` (all ones until `normalize_power`).
    """

    stage_index: int
    a: dict[UserSet, np.ndarray]
    row_gain: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.row_gain is None:
            n_t = len(next(iter(self.a.values())))
            object.__setattr__(self, "row_gain", np.ones(n_t))

    @property
    def n_t(self) -> int:
        return len(self.row_gain)

    def user_matrix(self, k: int, stage: StagePlan) -> np.ndarray:
        """Row j = transmission, column i = i-th codeword set containing `k`."""
        return np.column_stack([self.a[Q] for Q in stage.sets_containing(k)])

    def effective_matrix(self, k: int, stage: StagePlan) -> np.ndarray:
        return self.row_gain[:, None] * self.user_matrix(k, stage)


def _worst_condition(a, stage):
    cb = CoefficientCodebook(stage.stage_index, a)
    return max(np.linalg.cond(cb.user_matrix(k, stage)) for k in stage.users)


def codebook_from_vectors(stage: StagePlan, a: dict, kappa_max: float = KAPPA_MAX) -> CoefficientCodebook:
    """Wrap a predetermined codebook after checking every user's matrix."""
    n_t = len(stage.transmissions)
    a = {tuple(Q): np.asarray(v, dtype=float).reshape(n_t) for Q, v in a.items()}
    if set(a) != set(stage.codeword_sets):
        raise CodebookError("codebook must cover exactly the stage's codeword sets")
    cond = _worst_condition(a, stage)
    if not cond <= kappa_max:
        raise CodebookError(f"per-user matrix condition number {cond:.3g} exceeds {kappa_max:g}")
    return CoefficientCodebook(stage.stage_index, a)


def generate_codebook(stage: StagePlan, params: SystemParams, seed,
                      kappa_max: float = KAPPA_MAX,
                      max_retries: int = MAX_CODEBOOK_RETRIES) -> CoefficientCodebook:
    """Standard-normal real codebook, redrawn until every user can invert it."""
    rng = as_generator(seed)
    n_t = params.n_transmissions
    for _ in range(max_retries + 1):
        a = {Q: rng.standard_normal(n_t) for Q in stage.codeword_sets}
        if _worst_condition(a, stage) <= kappa_max:
            return CoefficientCodebook(stage.stage_index, a)
    raise CodebookError(f"no codebook with condition <= {kappa_max:g} after {max_retries} redraws")


@lru_cache(maxsize=None)
def _predefined_columns(n_t: int, n_cw: int, user_columns: tuple, n_candidates: int, seed: int):
    rng = np.random.default_rng([seed, n_t, n_cw])
    best, best_cond = None, np.inf
    for _ in range(n_candidates):
        a = rng.standard_normal((n_cw, n_t))
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        cond = max(np.linalg.cond(a[list(cols)].T) for cols in user_columns)
        if cond < best_cond:
            best, best_cond = a, cond
    best.setflags(write=False)
    return best


def predefined_codebook(stage: StagePlan, n_candidates: int = 256, seed: int = 0,
                        kappa_max: float = KAPPA_MAX) -> CoefficientCodebook:
    """Fixed codebook known in advance, identical in every stage.

    Picks, among `n_candidates` seeded unit-norm draws, the one whose worst
    per-user matrix is best conditioned.  The relative position of each
    user's codeword sets is the same in every stage, so one search serves
    all of them.
    """
    sets = stage.codeword_sets
    pos = {Q: i for i, Q in enumerate(sets)}
    user_columns = tuple(tuple(pos[Q] for Q in stage.sets_containing(k)) for k in stage.users)
    a = _predefined_columns(len(stage.transmissions), len(sets), user_columns, n_candidates, seed)
    return codebook_from_vectors(stage, {Q: a[i] for i, Q in enumerate(sets)}, kappa_max)


def normalize_power(codebook: CoefficientCodebook, codewords: dict, beamformers: StageBeamformers,
                    params: SystemParams, backend) -> CoefficientCodebook:
    """Scale each DL transmission so its expected total power is ``P_bs``.

    Payload powers are those of the extracted codewords (sample mean in
    numeric mode, coefficient energy in symbolic mode).
    """
    pw = {Q: backend.power(cw.payload) * float(np.linalg.norm(beamformers.w[Q].w)) ** 2
          for Q, cw in codewords.items()}
    gains = np.ones(codebook.n_t)
    for j in range(codebook.n_t):
        total = sum(codebook.a[Q][j] ** 2 * pw[Q] for Q in codewords)
        if total > 0:
            gains[j] = np.sqrt(params.P_bs / total)
    return replace(codebook, row_gain=gains)


def bs_dl_transmit(j: int, stage: StagePlan, codewords: dict, codebook: CoefficientCodebook,
                   beamformers: StageBeamformers, backend) -> list:
    """Antenna signals of DL transmission `j` (1-based)."""
    missing = [Q for Q in stage.codeword_sets if Q not in codewords]
    if missing:
        raise StageIncompleteError(f"stage {stage.stage_index} is missing codewords {missing}")
    if not 1 <= j <= codebook.n_t:
        raise ValueError(f"transmission index {j} outside [1..{codebook.n_t}]")
    g = codebook.row_gain[j - 1]
    streams = [(g * codebook.a[Q][j - 1], codewords[Q].payload, beamformers.w[Q].w)
               for Q in stage.codeword_sets]
    L = len(streams[0][2])
    return [lin_sum((complex(c * w[i]) * f for c, f, w in streams), backend.zero())
            for i in range(L)]


@dataclass
class DlObservation:
    user: int
    transmission: int
    y: Any


def user_receive(k: int, j: int, x_bs: list, channels: ChannelState, backend,
                 stage_index: int = 1) -> DlObservation:
    h = channels.vec(k).conj()
    y = lin_sum((complex(h[i]) * x for i, x in enumerate(x_bs)), backend.zero())
    return DlObservation(k, j, y + backend.user_noise(stage_index, k, j))


def _theta(Q, stage):
    return 1 if stage.lone_user in Q else -1


def cancel_cached_interference(k: int, obs: DlObservation, cache: CacheContents, stage: StagePlan,
                               channels: ChannelState, beamformers: StageBeamformers,
                               codebook: CoefficientCodebook, params: SystemParams, backend):
    """Regenerate and subtract every cached term from ``y_k(j)``."""
    j = obs.transmission
    g = codebook.row_gain[j - 1]
    parts = []
    for Q in stage.sets_containing(k):
        l_star = circular_predecessor(k, Q)
        outer = g * codebook.a[Q][j - 1] * beamformers.w[Q].gain(channels, k) * _theta(Q, stage)
        v = beamformers.v[Q]
        for l in Q:
            if l == l_star:
                continue
            sid = role_subpacket(l, Q, stage)
            if sid not in cache:
                raise PlacementError(f"user {k} needs {sid} to cancel interference")
            coeff = outer * v.gain(channels, l) * amplitude(l, stage, params)
            parts.append(complex(coeff) * backend.symbol(sid, cache.bits(sid)))
    return obs.y - lin_sum(parts, backend.zero())


def solve_user_system(k: int, cleaned: list, stage: StagePlan, codebook: CoefficientCodebook,
                      kappa_max: float = KAPPA_MAX) -> dict:
    """Undo the codebook mixing, one scalar signal per codeword set containing `k`.

    `cleaned[j-1]` is the interference-free observation of transmission j.
    """
    M = codebook.effective_matrix(k, stage)
    cond = np.linalg.cond(codebook.user_matrix(k, stage))
    if not cond <= kappa_max:
        raise CodebookError(f"user {k}: condition number {cond:.3g} exceeds {kappa_max:g}")
    Minv = np.linalg.inv(M)
    sets = stage.sets_containing(k)
    out = {}
    for i, Q in enumerate(sets):
        acc = 0
        for jj, y in enumerate(cleaned):
            acc = acc + complex(Minv[i, jj]) * y
        out[Q] = acc
    return out


def desired_subpacket(k: int, Q: UserSet, stage: StagePlan) -> SubpacketId:
    return role_subpacket(circular_predecessor(k, Q), Q, stage)


def equalizer_gain(k: int, Q: UserSet, stage: StagePlan, channels: ChannelState,
                   beamformers: StageBeamformers, params: SystemParams) -> complex:
    """Known gain on user `k`'s desired symbol after solving for codeword `Q`."""
    l_star = circular_predecessor(k, Q)
    link = beamformers.w[Q].gain(channels, k) * beamformers.v[Q].gain(channels, l_star)
    if abs(link) < EPS_SIG:
        raise UnequalizableError(f"user {k}, codeword {Q}: gain {abs(link):.2e} below {EPS_SIG}")
    amp = amplitude(l_star, stage, params)
    if amp == 0:
        raise UnequalizableError(f"user {k}, codeword {Q}: zero transmit power")
    return _theta(Q, stage) * link * amp


def equalize_and_demap(k: int, scalars: dict, stage: StagePlan, channels: ChannelState,
                       beamformers: StageBeamformers, params: SystemParams, backend) -> dict:
    """Map of decoded subpacket id to bits (or equalized formal signal)."""
    out = {}
    for Q, z in scalars.items():
        gain = equalizer_gain(k, Q, stage, channels, beamformers, params)
        out[desired_subpacket(k, Q, stage)] = backend.demap(z * (1 / gain))
    return out


@dataclass
class RecoveredFile:
    user: int
    bits: np.ndarray
    provenance: dict[SubpacketId, str]

    @property
    def n_decoded(self) -> int:
        return sum(1 for p in self.provenance.values() if p == "decoded")

    @property
    def n_cached(self) -> int:
        return sum(1 for p in self.provenance.values() if p == "cached")


def reassemble_file(k: int, cache: CacheContents, decoded: dict, params: SystemParams) -> RecoveredFile:
    ids = list(subpacket_ids(params, k))
    missing = [sid for sid in ids if sid not in cache and sid not in decoded]
    if missing:
        raise IncompleteRecoveryError(k, missing)
    chunks, prov = [], {}
    for sid in ids:
        if sid in cache:
            chunks.append(cache.bits(sid))
            prov[sid] = "cached"
        else:
            chunks.append(np.asarray(decoded[sid], dtype=np.uint8))
            prov[sid] = "decoded"
    return RecoveredFile(k, np.concatenate(chunks), prov)
