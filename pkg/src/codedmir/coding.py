"""Bit-to-symbol mapping and the formal linear-combination algebra.

Subpackets of `f` bits are mapped blockwise to ``f / b`` Gray-coded
square-QAM symbols with unit average energy.  Bit groups are read MSB
first, and symbol ``i`` of the table is the image of the group whose
binary value is ``i``:

QPSK (b=2), ``(b0, b1) -> ((1-2 b0) + 1j (1-2 b1)) / sqrt(2)``

16-QAM (b=4), ``(b0, b1, b2, b3) ->
((1-2 b0)(2-(1-2 b2)) + 1j (1-2 b1)(2-(1-2 b3))) / sqrt(10)``
"""
from __future__ import annotations

from functools import lru_cache
from numbers import Number

import numpy as np

from .combinatorics import SystemParams

COEFF_TOL = 1e-12


@lru_cache(maxsize=None)
def constellation(bits_per_symbol: int) -> np.ndarray:
    """Table of constellation points indexed by the MSB-first bit value."""
    idx = np.arange(2 ** bits_per_symbol)
    b = (idx[:, None] >> np.arange(bits_per_symbol - 1, -1, -1)) & 1
    s = 1 - 2 * b
    if bits_per_symbol == 2:
        pts = (s[:, 0] + 1j * s[:, 1]) / np.sqrt(2)
    elif bits_per_symbol == 4:
        pts = (s[:, 0] * (2 - s[:, 2]) + 1j * s[:, 1] * (2 - s[:, 3])) / np.sqrt(10)
    else:
        raise ValueError(f"unsupported bits_per_symbol {bits_per_symbol}")
    pts.setflags(write=False)
    return pts


def encode_bits(bits, bits_per_symbol: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 1 or bits.size % bits_per_symbol:
        raise ValueError(f"bit length {bits.size} not a multiple of {bits_per_symbol}")
    groups = bits.reshape(-1, bits_per_symbol)
    weights = 1 << np.arange(bits_per_symbol - 1, -1, -1)
    return constellation(bits_per_symbol)[groups @ weights]


def decode_symbols(symbols, bits_per_symbol: int) -> np.ndarray:
    """Minimum-distance hard decisions; ties go to the lowest table index."""
    pts = constellation(bits_per_symbol)
    symbols = np.asarray(symbols, dtype=complex).reshape(-1)
    idx = np.argmin(np.abs(symbols[:, None] - pts[None, :]), axis=1)
    b = (idx[:, None] >> np.arange(bits_per_symbol - 1, -1, -1)) & 1
    return b.astype(np.uint8).reshape(-1)


def encode_subpacket(bits, params: SystemParams) -> np.ndarray:
    """Encoded block of one subpacket, length ``f / b``."""
    bits = np.asarray(bits)
    if bits.size != params.f:
        raise ValueError(f"expected {params.f} bits, got {bits.size}")
    return encode_bits(bits, params.bits_per_symbol)


def decode_block(symbols, params: SystemParams) -> np.ndarray:
    symbols = np.asarray(symbols)
    if symbols.size != params.symbols_per_subpacket:
        raise ValueError(f"expected {params.symbols_per_subpacket} symbols, got {symbols.size}")
    return decode_symbols(symbols, params.bits_per_symbol)


class FormalSignal:
    """Sparse linear combination of subpacket symbols and noise labels.

    `terms` maps subpacket ids to complex coefficients, `noise` maps noise
    labels to complex coefficients.  Entries with magnitude at or below
    ``COEFF_TOL`` are dropped after every operation.
    """

    __slots__ = ("terms", "noise")

    def __init__(self, terms=None, noise=None):
        self.terms = _canon(terms or {})
        self.noise = _canon(noise or {})

    @classmethod
    def symbol(cls, sid, coeff=1.0):
        return cls({sid: coeff})

    @classmethod
    def noise_label(cls, label, coeff=1.0):
        return cls(noise={label: coeff})

    def __add__(self, other):
        if isinstance(other, Number) and other == 0:
            return self
        if not isinstance(other, FormalSignal):
            return NotImplemented
        return FormalSignal(_merge(self.terms, other.terms), _merge(self.noise, other.noise))

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        return FormalSignal({k: c * v for k, v in self.terms.items()},
                            {k: c * v for k, v in self.noise.items()})

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / c)

    def __bool__(self):
        return bool(self.terms or self.noise)

    def __repr__(self):
        parts = [f"{complex(v):.4g}*{k}" for k, v in self.terms.items()]
        parts += [f"{complex(v):.4g}*n{k}" for k, v in self.noise.items()]
        return "FormalSignal(" + " + ".join(parts) + ")"

    @property
    def support(self) -> frozenset:
        return frozenset(self.terms)

    def signal_part(self):
        return FormalSignal(self.terms)

    def noise_part(self):
        return FormalSignal(noise=self.noise)

    def energy(self, noise_variance: float = 0.0) -> float:
        """Expected power for unit-power independent symbols and noise."""
        e = sum(abs(c) ** 2 for c in self.terms.values())
        return float(e + noise_variance * sum(abs(c) ** 2 for c in self.noise.values()))

    def max_abs_diff(self, other) -> float:
        d = self - other
        vals = [abs(c) for c in (*d.terms.values(), *d.noise.values())]
        return max(vals, default=0.0)

    def evaluate(self, symbols, noise=None):
        """Numeric value given symbol blocks and (optionally) noise samples."""
        out = 0
        for sid, c in self.terms.items():
            out = out + c * symbols[sid]
        if noise is not None:
            for lab, c in self.noise.items():
                out = out + c * noise[lab]
        return out


def _canon(d):
    return {k: complex(v) for k, v in d.items() if abs(v) > COEFF_TOL}


def _merge(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return out


def formal_add(a: FormalSignal, b: FormalSignal) -> FormalSignal:
    return a + b


def formal_scale(s: FormalSignal, coeff) -> FormalSignal:
    return s * coeff
