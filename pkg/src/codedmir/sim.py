"""Experiment configuration, orchestration and result files.

A run is fully determined by its `SimConfig`.  The master seed is fanned
out into labeled sub-seeds, one stream each for the library, channels,
noise and codebooks of every trial, so outputs are reproducible byte for
byte and independent of the worker count.

Output files (written into ``output_path``, a directory):

``result.json``
    Per-run detail, see `result_to_dict` for the schema.
``ber.csv``
    ``snr_db,user,bit_errors,bits_total`` (noisy mode only).
``ndt_sweep.csv``
    ``gamma,t,strategy,T_ul,T_dl`` (only when a gamma sweep is requested).
"""
from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
from math import comb
from pathlib import Path

import numpy as np

from . import ndt as ndt_mod
from . import oracle
from .backend import MODES, make_backend
from .channel import generate_channels
from .combinatorics import SystemParams
from .placement import generate_library
from .pipeline import CODEBOOK_KINDS, run_scheme

log = logging.getLogger(__name__)

SCHEMA = "codedmir-result/1"
BER_HEADER = ("snr_db", "user", "bit_errors", "bits_total")
SYMBOLIC_TOL = 1e-9

# stream labels for seed fan-out
LIBRARY, CHANNELS, NOISE, CODEBOOK = 0, 1, 2, 3

DEFAULT_GAMMA_GRID = tuple(Fraction(i, 20) for i in range(21))


def sub_seed(master: int, label: int, *index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, label, *index])


def _seed_int(master, label, *index) -> int:
    return int(sub_seed(master, label, *index).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SimConfig:
    params: SystemParams = field(default_factory=lambda: SystemParams(K=5, L=3, t=2))
    mode: str = "noiseless"
    snr_grid_db: tuple[float, ...] = (0.0, 10.0, 20.0, 30.0)
    trials: int = 1
    seed: int = 0
    output_path: str = "results"
    workers: int = 1
    gamma_grid: tuple[Fraction, ...] | None = None
    codebook: str = "random"

    def __post_init__(self):
        problems = []
        if self.mode not in MODES:
            problems.append(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.trials < 1:
            problems.append(f"trials ≥ 1 violated ({self.trials})")
        if self.mode == "noisy" and not self.snr_grid_db:
            problems.append("snr_grid_db must be nonempty in noisy mode")
        if self.codebook not in CODEBOOK_KINDS:
            problems.append(f"codebook must be one of {CODEBOOK_KINDS}, got {self.codebook!r}")
        if self.workers < 1:
            problems.append(f"workers ≥ 1 violated ({self.workers})")
        if problems:
            raise ValueError("invalid SimConfig: " + "; ".join(problems))


@dataclass
class SimResult:
    config: SimConfig
    recovery: dict[int, str]
    bit_errors: dict[tuple[float, int], tuple[int, int]]
    ul_energy_expected: dict[int, Fraction]
    ul_energy_measured: dict[int, float]
    ndt: ndt_mod.NdtReport
    sweep: list = field(default_factory=list)
    elapsed_s: float = 0.0  # kept out of output files


def balanced_ul_energy(params: SystemParams) -> Fraction:
    """UL energy every user spends over the whole UL step, ``P_ul N_T C(K-1, t+L-1)``."""
    return (Fraction(params.P_ul) * params.n_transmissions
            * comb(params.K - 1, params.t + params.L - 1))


def _expected_energy(out) -> dict[int, Fraction]:
    from .uplink import stage_energy_fraction
    acc = {k: Fraction(0) for k in out.caches}
    for so in out.stages:
        for k in so.stage.users:
            acc[k] += stage_energy_fraction(k, so.stage) * Fraction(out.params.P_ul)
    return acc


def _check_energy(expected, params):
    target = balanced_ul_energy(params)
    bad = {k: e for k, e in expected.items() if e != target}
    if bad:
        raise AssertionError(f"UL energy differs from {target}: {bad}")


def _check_symbolic(out, channels, params) -> dict[int, str]:
    """Compare every codeword and decoded symbol with the closed forms."""
    from .downlink import desired_subpacket
    from .coding import FormalSignal
    status = {k: "verified" for k in out.caches}
    for so in out.stages:
        st, bf = so.stage, so.beamformers
        for Q, cw in so.codewords.items():
            d = cw.payload.signal_part().max_abs_diff(oracle.expected_codeword(Q, st, channels, bf, params))
            if d > SYMBOLIC_TOL:
                raise AssertionError(f"stage {st.stage_index} codeword {Q}: residual {d:.3g}")
        for k, dec in so.decoded.items():
            for Q in st.sets_containing(k):
                sid = desired_subpacket(k, Q, st)
                if dec[sid].signal_part().max_abs_diff(FormalSignal.symbol(sid)) > SYMBOLIC_TOL:
                    status[k] = f"mismatch at stage {st.stage_index}, codeword {Q}"
    return status


def _single_run(config: SimConfig):
    p, s = config.params, config.seed
    library = generate_library(p, _seed_int(s, LIBRARY))
    channels = generate_channels(p, sub_seed(s, CHANNELS))
    backend = make_backend(config.mode, p, seed=sub_seed(s, NOISE))
    out = run_scheme(p, library, channels, backend, codebook_seed=_seed_int(s, CODEBOOK),
                     codebook_kind=config.codebook)
    if config.mode == "symbolic":
        recovery = _check_symbolic(out, channels, p)
    else:
        recovery = {k: "bit-exact" if np.array_equal(r.bits, library.file_bits(k)) else "bit errors"
                    for k, r in out.recovered.items()}
    return out, recovery


def ber_trial(params: SystemParams, snr_db: float, seed: int, trial: int,
              codebook: str = "random") -> dict[int, tuple[int, int]]:
    """Bit errors over decoded subpackets of one noisy run, per user."""
    p_lin = 10.0 ** (snr_db / 10.0)
    p = replace(params, P_ul=p_lin, P_bs=p_lin)
    library = generate_library(p, _seed_int(seed, LIBRARY, trial))
    channels = generate_channels(p, sub_seed(seed, CHANNELS, trial))
    backend = make_backend("noisy", p, noise_variance=1.0,
                           seed=sub_seed(seed, NOISE, trial, int(round(snr_db * 1000))))
    out = run_scheme(p, library, channels, backend, codebook_seed=_seed_int(seed, CODEBOOK, trial),
                     codebook_kind=codebook)
    counts = {}
    for k, dec in out.decoded.items():
        errs = total = 0
        for sid, bits in dec.items():
            errs += int(np.count_nonzero(np.asarray(bits) != library.bits[sid]))
            total += len(bits)
        counts[k] = (errs, total)
    return counts


def _ber_task(args):
    return args[1], ber_trial(*args)


def run_ber(config: SimConfig) -> dict[tuple[float, int], tuple[int, int]]:
    tasks = [(config.params, float(snr), config.seed, i, config.codebook)
             for snr in config.snr_grid_db for i in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            results = list(ex.map(_ber_task, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))
    else:
        results = [_ber_task(t) for t in tasks]
    totals = {(float(snr), k): (0, 0) for snr in config.snr_grid_db for k in range(1, config.params.K + 1)}
    for snr, counts in results:
        for k, (e, n) in counts.items():
            e0, n0 = totals[(snr, k)]
            totals[(snr, k)] = (e0 + e, n0 + n)
    return totals


def run_experiment(config: SimConfig) -> SimResult:
    t0 = time.perf_counter()
    p = config.params
    bit_errors = {}
    if config.mode == "noisy":
        bit_errors = run_ber(config)
        expected = {k: balanced_ul_energy(p) for k in range(1, p.K + 1)}
        measured = {}
        recovery = {k: "not checked" for k in range(1, p.K + 1)}
    else:
        out, recovery = _single_run(config)
        expected = _expected_energy(out)
        _check_energy(expected, p)
        measured = {k: float(v) for k, v in out.ul_energy_measured.items()}
    for k in sorted(measured):
        log.info("user %d UL energy %.6g (expected %s)", k, measured[k], expected[k])
    sweep = ndt_mod.sweep_gamma(p.K, p.L, config.gamma_grid) if config.gamma_grid else []
    return SimResult(config, recovery, bit_errors, expected, measured,
                     ndt_mod.ndt_proposed(p.K, p.t, p.L), sweep, time.perf_counter() - t0)


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def config_to_dict(config: SimConfig) -> dict:
    d = {f.name: getattr(config, f.name) for f in fields(config) if f.name != "params"}
    d["params"] = asdict(config.params)
    d["snr_grid_db"] = list(config.snr_grid_db)
    d["gamma_grid"] = None if config.gamma_grid is None else [_frac(g) for g in config.gamma_grid]
    return d


def result_to_dict(result: SimResult) -> dict:
    """JSON schema of ``result.json``.

    Rationals are written as ``"num/den"`` strings, user ids as string keys.
    ``elapsed_s`` is deliberately left out so reruns are byte-identical.
    """
    r = result.ndt
    p = result.config.params
    n_ul = p.n_transmissions * comb(p.K - 1, p.t + p.L - 1)
    return {
        "schema": SCHEMA,
        "config": config_to_dict(result.config),
        "recovery": {str(k): v for k, v in sorted(result.recovery.items())},
        "ul_energy": {
            "expected": {str(k): _frac(v) for k, v in sorted(result.ul_energy_expected.items())},
            "measured": {str(k): v for k, v in sorted(result.ul_energy_measured.items())},
            # average power per UL transmission slot the user takes part in
            "avg_power": {str(k): _frac(v / n_ul) for k, v in sorted(result.ul_energy_expected.items())},
        },
        "ndt": {"strategy": r.strategy, "K": r.K, "L": r.L, "t": _frac(r.t),
                "T_ul": _frac(r.T_ul), "T_dl": _frac(r.T_dl)},
        "ber": [{"snr_db": snr, "user": k, "bit_errors": e, "bits_total": n}
                for (snr, k), (e, n) in sorted(result.bit_errors.items())],
        "sweep_rows": len(result.sweep),
    }


def ber_csv(result: SimResult) -> str:
    lines = [",".join(BER_HEADER)]
    for (snr, k), (e, n) in sorted(result.bit_errors.items()):
        lines.append(f"{snr:g},{k},{e},{n}")
    return "\n".join(lines) + "\n"


def emit_results(result: SimResult, path=None) -> list[Path]:
    """Write the result files and return their paths."""
    out = Path(path if path is not None else result.config.output_path)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "result.json"]
    written[0].write_text(json.dumps(result_to_dict(result), indent=2, sort_keys=True) + "\n")
    if result.bit_errors:
        written.append(out / "ber.csv")
        written[-1].write_text(ber_csv(result))
    if result.sweep:
        written.append(out / "ndt_sweep.csv")
        written[-1].write_text(ndt_mod.sweep_csv(result.config.params.K, result.config.params.L,
                                                 result.sweep))
    return written


def load_result(path) -> dict:
    d = json.loads(Path(path).read_text())
    if d.get("schema") != SCHEMA:
        raise ValueError(f"unexpected schema {d.get('schema')!r}")
    return d


def default_workers() -> int:
    return max(1, min(4, os.cpu_count() or 1))
