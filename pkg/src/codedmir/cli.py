"""Command-line entry point, ``python -m codedmir``.

Config files are flat ``key = value`` text, one setting per line, ``#``
starts a comment.  Keys are the long flag names with dashes replaced by
underscores (``K``, ``snr_db``, ``gamma_sweep`` ...).  Command-line flags
override file values.
"""
from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .combinatorics import SystemParams
from .sim import DEFAULT_GAMMA_GRID, SimConfig, emit_results, run_experiment

log = logging.getLogger(__name__)

KEYS = ("K", "L", "t", "f", "bits_per_symbol", "mode", "snr_db", "trials", "seed", "out",
        "workers", "gamma_sweep", "codebook")


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(x) for x in s.split(",") if x.strip())


def parse_gamma_grid(s: str) -> tuple[Fraction, ...]:
    """``"default"``, a comma list (``0,0.2,1``) or ``start:stop:step``."""
    s = s.strip()
    if s in ("", "default"):
        return DEFAULT_GAMMA_GRID
    if ":" in s:
        a, b, step = (Fraction(x) for x in s.split(":"))
        if step <= 0:
            raise ValueError("gamma sweep step must be positive")
        n = int((b - a) / step)
        return tuple(a + i * step for i in range(n + 1))
    return tuple(Fraction(x) for x in s.split(","))


def read_config(path) -> dict:
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in KEYS:
            raise ValueError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def config_items(config: SimConfig) -> dict[str, str]:
    p = config.params
    items = {"K": p.K, "L": p.L, "t": p.t, "f": p.f, "bits_per_symbol": p.bits_per_symbol,
             "mode": config.mode, "snr_db": ",".join(f"{x:g}" for x in config.snr_grid_db),
             "trials": config.trials, "seed": config.seed, "out": config.output_path,
             "workers": config.workers, "codebook": config.codebook}
    if config.gamma_grid is not None:
        items["gamma_sweep"] = ",".join(str(g) for g in config.gamma_grid)
    return {k: str(v) for k, v in items.items()}


def write_config(config: SimConfig, path) -> None:
    Path(path).write_text("".join(f"{k} = {v}\n" for k, v in config_items(config).items()))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="codedmir",
        description="Simulate two-step UL/DL coded-caching information retrieval.")
    ap.add_argument("--config", help="flat key = value config file")
    ap.add_argument("--K", type=int, help="number of users (default 5)")
    ap.add_argument("--L", type=int, help="BS antennas (default 3)")
    ap.add_argument("--t", type=int, help="caching parameter (default 2)")
    ap.add_argument("--f", type=int, help="subpacket size in bits (default 8)")
    ap.add_argument("--bits-per-symbol", type=int, choices=(2, 4), help="2 = QPSK, 4 = 16-QAM")
    ap.add_argument("--mode", choices=("symbolic", "noiseless", "noisy"))
    ap.add_argument("--snr-db", help="comma-separated SNR grid for noisy mode")
    ap.add_argument("--trials", type=int, help="Monte-Carlo trials per SNR point")
    ap.add_argument("--seed", type=int, help="master seed")
    ap.add_argument("--out", help="output directory (default ./results)")
    ap.add_argument("--workers", type=int, help="worker processes for BER trials")
    ap.add_argument("--codebook", choices=("random", "predefined"),
                    help="DL mixing codebook (default random)")
    ap.add_argument("--gamma-sweep", nargs="?", const="default",
                    help="also write the NDT sweep CSV; optional grid 'a:b:step' or comma list")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _from_items(items: dict) -> SimConfig:
    defaults = SimConfig.__dataclass_fields__
    params = SystemParams(
        K=int(items.get("K", 5)), L=int(items.get("L", 3)), t=int(items.get("t", 2)),
        f=int(items.get("f", 8)), bits_per_symbol=int(items.get("bits_per_symbol", 2)))
    kw = {}
    if "mode" in items:
        kw["mode"] = items["mode"]
    if "snr_db" in items:
        kw["snr_grid_db"] = _floats(items["snr_db"])
    for key, name in (("trials", "trials"), ("seed", "seed"), ("workers", "workers")):
        if key in items:
            kw[name] = int(items[key])
    if "codebook" in items:
        kw["codebook"] = items["codebook"]
    if "out" in items:
        kw["output_path"] = items["out"]
    if items.get("gamma_sweep") is not None:
        kw["gamma_grid"] = parse_gamma_grid(items["gamma_sweep"])
    assert set(kw) <= set(defaults)
    return SimConfig(params=params, **kw)


def parse_config(argv=None) -> SimConfig:
    """Build a validated config from flags and an optional config file.

    Invalid parameter combinations raise `ValueError` naming the violated
    invariant.
    """
    args = build_parser().parse_args(argv)
    items = read_config(args.config) if args.config else {}
    for key in KEYS:
        value = getattr(args, key)
        if value is not None:
            items[key] = str(value)
    return _from_items(items)


def main(argv=None) -> int:
    verbose = "-v" in (argv or sys.argv[1:]) or "--verbose" in (argv or sys.argv[1:])
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = parse_config(argv)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result = run_experiment(config)
    for path in emit_results(result):
        print(path)
    bad = [k for k, s in result.recovery.items() if s not in ("bit-exact", "verified", "not checked")]
    print(f"T_UL = T_DL = {result.ndt.T_ul} ({float(result.ndt.T_ul):.6f}); "
          f"{len(bad)} user(s) failed recovery; {result.elapsed_s:.2f} s")
    return 1 if bad else 0
