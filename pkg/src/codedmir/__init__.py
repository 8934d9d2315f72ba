"""Coded-caching two-step UL/DL information retrieval with an L-antenna BS.

Users each cache a fraction of every file, send coded combinations of
cached subpackets on the uplink, and the base station zero-forces,
extracts size-(t+1) codewords and multicasts them back on the downlink.
Every stage runs either numerically or symbolically on formal linear
combinations, and the symbolic run doubles as an exact oracle.
"""
from .backend import NumericBackend, SymbolicBackend, make_backend
from .channel import ChannelState, generate_channels, stage_beamformers
from .coding import FormalSignal, constellation, decode_block, encode_subpacket
from .combinatorics import (StagePlan, SystemParams, build_set_M, circular_predecessor,
                            circular_successor, enumerate_stages, q_index)
from .ndt import NdtReport, ndt_proposed, ndt_strategy_a, ndt_strategy_b, sweep_gamma
from .pipeline import run_scheme, run_stage
from .placement import FileLibrary, SubpacketId, build_cache, generate_library
from .sim import SimConfig, SimResult, emit_results, run_experiment

__all__ = [
    "ChannelState", "FileLibrary", "FormalSignal", "NdtReport", "NumericBackend", "SimConfig",
    "SimResult", "StagePlan", "SubpacketId", "SymbolicBackend", "SystemParams", "build_cache",
    "build_set_M", "circular_predecessor", "circular_successor", "constellation", "decode_block",
    "emit_results", "encode_subpacket", "enumerate_stages", "generate_channels",
    "generate_library", "make_backend", "ndt_proposed", "ndt_strategy_a", "ndt_strategy_b",
    "q_index", "run_experiment", "run_scheme", "run_stage", "stage_beamformers", "sweep_gamma",
]
__version__ = "0.1.0"
