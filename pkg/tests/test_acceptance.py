"""Acceptance suite, one check per criterion.

Each check returns ``(passed, detail)`` and prints a single
``[PASS]``/``[FAIL]`` line.  Under pytest the lines are repeated in the
terminal summary; ``python tests/test_acceptance.py`` gives the bare report.
"""
import sys
import time
from fractions import Fraction
from math import comb
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from codedmir import oracle
from codedmir.backend import NumericBackend, SymbolicBackend, make_backend
from codedmir.channel import generate_channels, stage_beamformers
from codedmir.coding import encode_subpacket
from codedmir.combinatorics import SystemParams, enumerate_stages
from codedmir.ndt import ndt_proposed, sweep_gamma
from codedmir.pipeline import run_scheme
from codedmir.placement import build_cache, generate_library
from codedmir.sim import SimConfig, run_experiment
from codedmir.uplink import (extract_codewords_A, extract_codewords_B, bs_receive,
                             measured_stage_energy, stage_energy_fraction, ul_transmission,
                             ul_transmit_signal)
from conftest import K3_UL_SIGNALS, K5_UL_SIGNALS, parse_cell

CONFIGS = [(3, 1, 2), (4, 1, 2), (5, 2, 3), (6, 2, 3), (7, 3, 3)]

# lines echoed again in pytest's terminal summary, since fd-level capture hides them
REPORT_LINES: list = []


def _emit(line):
    REPORT_LINES.append(line)
    print(line, file=sys.__stdout__, flush=True)


def report(n, title, ok, detail):
    _emit(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} ({detail})")
    return ok, detail


def _setup(K, t, L, seed=0, backend="symbolic"):
    p = SystemParams(K=K, L=L, t=t)
    lib = generate_library(p, seed)
    caches = {k: build_cache(lib, k) for k in range(1, K + 1)}
    return p, lib, caches, generate_channels(p, seed), make_backend(backend, p)


def criterion_1():
    t0 = time.perf_counter()
    bad = []
    for table, (K, t, L) in ((K3_UL_SIGNALS, (3, 1, 2)), (K5_UL_SIGNALS, (5, 2, 3))):
        p, _, caches, _, be = _setup(K, t, L)
        (stage,) = enumerate_stages(p)
        for S, row in table.items():
            for k, cell in enumerate(row, 1):
                x = ul_transmit_signal(k, S, stage, caches[k], p, be)
                got = {sid: int(np.sign(c.real)) for sid, c in x.terms.items()}
                if got != parse_cell(cell):
                    bad.append((K, S, k))
    dt = time.perf_counter() - t0
    cells = 3 * len(K3_UL_SIGNALS) + 5 * len(K5_UL_SIGNALS)
    return report(1, "worked-example UL coefficient patterns", not bad and dt < 1.0,
                  f"{cells - len(bad)}/{cells} cells sign-exact, {dt:.3f} s")


def criterion_2():
    t0 = time.perf_counter()
    worst, count_ok = 0.0, True
    for K, t, L in CONFIGS:
        p, _, caches, ch, be = _setup(K, t, L)
        for stage in enumerate_stages(p):
            bf = stage_beamformers(stage, ch)
            rx = {S: bs_receive(ul_transmission(S, stage, caches, p, be), ch, be)
                  for S in stage.transmissions}
            A = extract_codewords_A(stage, rx, ch, bf, p, be)
            B = extract_codewords_B(stage, rx, ch, bf, p, be)
            count_ok &= (len(A) == comb(t + L - 1, t) and len(B) == comb(t + L - 1, t + 1)
                         and len(A) + len(B) == comb(t + L, t + 1))
            for cw in A + B:
                want = oracle.expected_codeword(cw.Q, stage, ch, bf, p)
                count_ok &= cw.payload.support == want.support
                worst = max(worst, cw.payload.signal_part().max_abs_diff(want))
    dt = time.perf_counter() - t0
    return report(2, "codeword extraction counts and coefficients",
                  count_ok and worst <= 1e-12 and dt < 30,
                  f"counts {'ok' if count_ok else 'WRONG'}, max residual {worst:.2e}, {dt:.2f} s")


def criterion_3(n_libraries=10_000):
    analytic_ok = True
    for K, t, L in CONFIGS:
        p = SystemParams(K=K, L=L, t=t)
        total = {k: Fraction(0) for k in range(1, K + 1)}
        for stage in enumerate_stages(p):
            for k in stage.users:
                e = stage_energy_fraction(k, stage)
                analytic_ok &= e == p.n_transmissions
                total[k] += e
        analytic_ok &= all(v == p.n_transmissions * comb(K - 1, t + L - 1) for v in total.values())
    p = SystemParams(K=5, L=3, t=2)
    (stage,) = enumerate_stages(p)
    k5_ok = all(stage_energy_fraction(k, stage) * p.P_ul == 6 for k in stage.users)
    acc = np.zeros(p.K)
    for seed in range(n_libraries):
        lib = generate_library(p, seed)
        be = NumericBackend(p)
        caches = {k: build_cache(lib, k) for k in stage.users}
        acc += [measured_stage_energy(k, stage, caches, p, be) for k in stage.users]
    mc = acc / n_libraries
    rel = float(np.max(np.abs(mc - 6.0) / 6.0))
    return report(3, "balanced per-user UL energy", analytic_ok and k5_ok and rel <= 0.02,
                  f"analytic exact {analytic_ok and k5_ok}, E_k=6 at (5,2,3); "
                  f"Monte-Carlo over {n_libraries} libraries max rel. dev. {rel:.3%}")


def criterion_4():
    t0 = time.perf_counter()
    failures = []
    for K, t, L in CONFIGS:
        p, lib, _, ch, be = _setup(K, t, L, seed=3, backend="noiseless")
        out = run_scheme(p, lib, ch, be)
        n_dec = p.n_transmissions * comb(K - 1, t + L - 1)
        n_cached = p.gamma * p.n_packets * p.n_sub
        for k, r in out.recovered.items():
            if not (np.array_equal(r.bits, lib.file_bits(k)) and r.bits.size == p.F
                    and r.n_decoded == n_dec and r.n_cached == n_cached):
                failures.append((K, t, L, k))
    dt = time.perf_counter() - t0
    return report(4, "noiseless end-to-end recovery", not failures and dt < 120,
                  f"{len(failures)} user failures over {len(CONFIGS)} configs, {dt:.2f} s")


def criterion_5():
    t0 = time.perf_counter()
    ok = all(ndt_proposed(K, t, L).T_ul == ndt_proposed(K, t, L).T_dl == Fraction(K - t, t + L)
             for K, t, L in CONFIGS)
    ok &= ndt_proposed(3, 1, 2).T_ul == Fraction(2, 3) and ndt_proposed(5, 2, 3).T_ul == Fraction(3, 5)
    (r,) = sweep_gamma(10, 4, [0.2])
    vals = (float(r.T_A), float(r.T_B), float(r.T_proposed))
    ok &= all(abs(a - b) <= 1e-6 for a, b in zip(vals, (2.0, 2.666667, 1.333333)))
    grid = sweep_gamma(10, 4, [Fraction(i, 100) for i in range(101)])
    mono = all(all(getattr(a, n) > getattr(b, n) for a, b in zip(grid, grid[1:]))
               for n in ("T_A", "T_B", "T_proposed"))
    dt = time.perf_counter() - t0
    return report(5, "NDT reproduction", ok and mono and dt < 1.0,
                  f"A={vals[0]:.6f} B={vals[1]:.6f} proposed={vals[2]:.6f} at gamma=0.2, "
                  f"monotone {mono}, {dt:.3f} s")


def criterion_6(draws=100):
    p = SystemParams(K=5, L=3, t=2)
    (stage,) = enumerate_stages(p)
    worst = 0.0
    for seed in range(draws):
        ch = generate_channels(p, [6, seed])
        bf = stage_beamformers(stage, ch)
        for Q in stage.codeword_sets:
            for j in stage.users:
                if j not in Q:
                    worst = max(worst, abs(bf.v[Q].v @ ch.vec(j)), abs(ch.vec(j).conj() @ bf.w[Q].w))
    return report(6, "ZF nulling residuals", worst <= 1e-9,
                  f"max residual {worst:.2e} over {draws} draws")


def criterion_7():
    worst = 0.0
    for K, t, L in ((3, 1, 2), (5, 2, 3)):
        p, lib, _, ch, be = _setup(K, t, L, seed=7, backend="noiseless")
        out = run_scheme(p, lib, ch, be, codebook_seed=11)
        blocks = {sid: encode_subpacket(b, p) for sid, b in lib.bits.items()}
        for so in out.stages:
            for k, z in so.scalars.items():
                for Q, s in z.items():
                    want = oracle.expected_solved_scalar(k, Q, so.stage, ch, so.beamformers, p)
                    ref = want.evaluate(blocks)
                    worst = max(worst, float(np.linalg.norm(s - ref) / np.linalg.norm(ref)))
    return report(7, "numeric pipeline vs symbolic oracle", worst <= 1e-9,
                  f"max relative error {worst:.2e}")


def _ber_curve(codebook, trials, f=32, seed=2024):
    cfg = SimConfig(params=SystemParams(K=3, L=2, t=1, f=f), mode="noisy",
                    snr_grid_db=(0.0, 10.0, 20.0, 30.0), trials=trials, seed=seed, codebook=codebook)
    res = run_experiment(cfg)
    curve = []
    for snr in cfg.snr_grid_db:
        e = sum(res.bit_errors[(snr, k)][0] for k in range(1, 4))
        n = sum(res.bit_errors[(snr, k)][1] for k in range(1, 4))
        curve.append(e / n)
    return curve


def criterion_8(trials=200):
    t0 = time.perf_counter()
    curve = _ber_curve("predefined", trials)
    dt = time.perf_counter() - t0
    mono = all(a >= b for a, b in zip(curve, curve[1:]))
    shown = ", ".join(f"{b:.2e}" for b in curve)
    ok, detail = report(8, "BER sanity at (3,1,2), QPSK, predefined DL codebook",
                        mono and curve[-1] < 1e-2 and dt < 300,
                        f"BER at 0/10/20/30 dB = {shown}, {trials} trials/point, {dt:.1f} s")
    rnd = _ber_curve("random", 100)
    _emit("[INFO] criterion 8 with the random DL codebook: BER at 0/10/20/30 dB = "
          + ", ".join(f"{b:.2e}" for b in rnd))
    return ok, detail


def test_criterion_1_worked_example_patterns():
    ok, detail = criterion_1()
    assert ok, detail


def test_criterion_2_codeword_extraction():
    ok, detail = criterion_2()
    assert ok, detail


def test_criterion_3_ul_energy():
    ok, detail = criterion_3()
    assert ok, detail


def test_criterion_4_noiseless_recovery():
    ok, detail = criterion_4()
    assert ok, detail


def test_criterion_5_ndt():
    ok, detail = criterion_5()
    assert ok, detail


def test_criterion_6_zf_nulling():
    ok, detail = criterion_6()
    assert ok, detail


def test_criterion_7_oracle_equivalence():
    ok, detail = criterion_7()
    assert ok, detail


def test_criterion_8_ber_sanity():
    ok, detail = criterion_8()
    assert ok, detail


if __name__ == "__main__":
    results = [c() for c in (criterion_1, criterion_2, criterion_3, criterion_4,
                             criterion_5, criterion_6, criterion_7, criterion_8)]
    sys.exit(0 if all(ok for ok, _ in results) else 1)
