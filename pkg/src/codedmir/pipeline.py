"""End-to-end execution of the UL/DL exchange for one library/channel draw."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelState, stage_beamformers
from .combinatorics import StagePlan, SystemParams, enumerate_stages
from .downlink import (RecoveredFile, bs_dl_transmit, cancel_cached_interference,
                       equalize_and_demap, generate_codebook, normalize_power,
                       predefined_codebook, reassemble_file, solve_user_system, user_receive)
from .placement import FileLibrary, build_cache
from .uplink import measured_stage_energy, run_uplink_stage, stage_energy_fraction

log = logging.getLogger(__name__)

CODEBOOK_KINDS = ("random", "predefined")


@dataclass
class StageOutcome:
    stage: StagePlan
    beamformers: object
    receptions: dict
    codewords: dict
    codebook: object
    cleaned: dict = field(default_factory=dict)     # k -> [signal per DL transmission]
    scalars: dict = field(default_factory=dict)     # k -> {Q: pre-demap scalar}
    decoded: dict = field(default_factory=dict)     # k -> {sid: bits or signal}


@dataclass
class SchemeOutcome:
    params: SystemParams
    stages: list[StageOutcome]
    caches: dict
    decoded: dict
    recovered: dict[int, RecoveredFile]
    ul_energy_expected: dict
    ul_energy_measured: dict

    @property
    def n_ul(self) -> int:
        return sum(len(s.stage.transmissions) for s in self.stages)

    @property
    def n_dl(self) -> int:
        return sum(s.codebook.n_t for s in self.stages)


def run_stage(stage: StagePlan, caches, channels: ChannelState, params: SystemParams, backend,
              codebook_seed=0, codebook=None) -> StageOutcome:
    bf = stage_beamformers(stage, channels)
    receptions, codewords = run_uplink_stage(stage, caches, channels, bf, params, backend)
    if codebook is None:
        codebook = generate_codebook(stage, params, np.random.default_rng([codebook_seed, stage.stage_index]))
    codebook = normalize_power(codebook, codewords, bf, params, backend)
    out = StageOutcome(stage, bf, receptions, codewords, codebook)
    x_bs = [bs_dl_transmit(j, stage, codewords, codebook, bf, backend)
            for j in range(1, codebook.n_t + 1)]
    for k in stage.users:
        cleaned = []
        for j, x in enumerate(x_bs, 1):
            obs = user_receive(k, j, x, channels, backend, stage.stage_index)
            cleaned.append(cancel_cached_interference(k, obs, caches[k], stage, channels, bf,
                                                      codebook, params, backend))
        out.cleaned[k] = cleaned
        out.scalars[k] = solve_user_system(k, cleaned, stage, codebook)
        out.decoded[k] = equalize_and_demap(k, out.scalars[k], stage, channels, bf, params, backend)
    return out


def run_scheme(params: SystemParams, library: FileLibrary, channels: ChannelState, backend,
               codebook_seed=0, codebooks=None, codebook_kind: str = "random") -> SchemeOutcome:
    """Run every stage; numeric backends also reassemble each user's file.

    `codebook_kind` is ``"random"`` (fresh seeded draw per stage) or
    ``"predefined"``.  `codebooks` optionally maps stage index to a fixed
    codebook and takes precedence.
    """
    if codebook_kind not in CODEBOOK_KINDS:
        raise ValueError(f"codebook_kind must be one of {CODEBOOK_KINDS}, got {codebook_kind!r}")
    caches = {k: build_cache(library, k) for k in range(1, params.K + 1)}
    outcomes = []
    decoded = {k: {} for k in caches}
    measured = {k: 0.0 for k in caches}
    expected = {k: 0.0 for k in caches}
    for stage in enumerate_stages(params):
        fixed = (codebooks or {}).get(stage.stage_index)
        if fixed is None and codebook_kind == "predefined":
            fixed = predefined_codebook(stage)
        so = run_stage(stage, caches, channels, params, backend, codebook_seed, fixed)
        outcomes.append(so)
        for k in stage.users:
            decoded[k].update(so.decoded[k])
            expected[k] += float(stage_energy_fraction(k, stage)) * params.P_ul
            measured[k] += measured_stage_energy(k, stage, caches, params, backend)
    recovered = {}
    if not backend.symbolic:
        recovered = {k: reassemble_file(k, caches[k], decoded[k], params) for k in caches}
    log.debug("ran %d stages for K=%d t=%d L=%d", len(outcomes), params.K, params.t, params.L)
    return SchemeOutcome(params, outcomes, caches, decoded, recovered, expected, measured)
