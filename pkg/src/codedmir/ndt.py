"""Normalized delivery time of the proposed scheme and the two baselines.

All values are exact `Fraction` objects.  Decimal conversion happens only
when rows are written out as CSV.
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb

log = logging.getLogger(__name__)

STRATEGIES = ("A", "B", "proposed")
SWEEP_HEADER = ("gamma", "t", "strategy", "T_ul", "T_dl")


@dataclass(frozen=True)
class NdtReport:
    strategy: str
    K: int
    L: int
    t: Fraction
    T_ul: Fraction
    T_dl: Fraction


def _check(K, t, L):
    if L < 1 or t < 0 or K < t + L:
        raise ValueError(f"invalid parameters K={K}, t={t}, L={L} (need L ≥ 1, t ≥ 0, K ≥ t+L)")
    return Fraction(t)


def ndt_proposed(K: int, t, L: int) -> NdtReport:
    t = _check(K, t, L)
    T = (K - t) / (t + L)
    return NdtReport("proposed", K, L, t, T, T)


def ndt_strategy_a(K: int, t, L: int) -> NdtReport:
    t = _check(K, t, L)
    return NdtReport("A", K, L, t, (K - t) / L, (K - t) / (t + L))


def ndt_strategy_b(K: int, t, L: int) -> NdtReport:
    t = _check(K, t, L)
    return NdtReport("B", K, L, t, (K - t) / (t + 1), (K - t) / (t + L))


_BY_NAME = {"A": ndt_strategy_a, "B": ndt_strategy_b, "proposed": ndt_proposed}


def ndt(strategy: str, K: int, t, L: int) -> NdtReport:
    return _BY_NAME[strategy](K, t, L)


def ndt_from_counts(n_transmissions: int, K: int, t: int, L: int) -> Fraction:
    """Transmission count times the per-subpacket load ``1 / (C(K,t) C(K-t-1,L-1))``."""
    return Fraction(n_transmissions, comb(K, t) * comb(K - t - 1, L - 1))


@dataclass(frozen=True)
class SweepRow:
    gamma: Fraction
    t: Fraction
    T_A: Fraction
    T_B: Fraction
    T_proposed: Fraction
    integral: bool
    feasible: bool


def sweep_gamma(K: int, L: int, gamma_grid) -> list[SweepRow]:
    """UL NDT of the three strategies along a grid of cache ratios.

    ``t = gamma K`` is used as a real number where it is not an integer
    (continuous curves); such rows have ``integral=False``.  Rows with
    ``K < t + L`` are still evaluated from the formulas and marked
    ``feasible=False``.
    """
    rows = []
    for g in gamma_grid:
        gamma = Fraction(str(g)) if isinstance(g, float) else Fraction(g)
        if not 0 <= gamma <= 1:
            raise ValueError(f"gamma {g} outside [0, 1]")
        t = gamma * K
        # formulas are evaluated even where the scheme itself is undefined
        T_A = (K - t) / L
        T_B = (K - t) / (t + 1)
        T_P = (K - t) / (t + L)
        rows.append(SweepRow(gamma, t, T_A, T_B, T_P, t.denominator == 1, K >= t + L))
    n_flag = sum(not r.integral for r in rows)
    if n_flag:
        log.info("%d of %d sweep points have non-integer t = gamma*K", n_flag, len(rows))
    return rows


def sweep_csv(K: int, L: int, rows) -> str:
    """Long-format CSV, one line per (gamma, strategy), 6 fixed decimals."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        T_dl = (K - r.t) / (r.t + L)
        for name, T_ul in (("A", r.T_A), ("B", r.T_B), ("proposed", r.T_proposed)):
            w.writerow([f"{float(r.gamma):.6f}", f"{float(r.t):.6f}", name,
                        f"{float(T_ul):.6f}", f"{float(T_dl):.6f}"])
    return buf.getvalue()
