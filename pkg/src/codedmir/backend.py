"""Signal backends, so one UL/DL implementation runs in every mode.

The scheme only needs addition, scaling by complex numbers, fresh symbols
and fresh noise.  `SymbolicBackend` provides those as `FormalSignal`
values, `NumericBackend` as complex numpy blocks.
"""
from __future__ import annotations

import numpy as np

from .channel import as_generator, sample_noise
from .coding import FormalSignal, decode_block, encode_subpacket
from .combinatorics import SystemParams

MODES = ("symbolic", "noiseless", "noisy")


class SymbolicBackend:
    symbolic = True

    def __init__(self, params: SystemParams, noise_variance: float = 1.0):
        self.params = params
        # only used for expected-power bookkeeping, labels are always tracked
        self.noise_variance = noise_variance

    def zero(self):
        return FormalSignal()

    def symbol(self, sid, bits=None):
        return FormalSignal.symbol(sid)

    def bs_noise(self, stage_index, S):
        return [FormalSignal.noise_label(("bs", stage_index, S, i)) for i in range(self.params.L)]

    def user_noise(self, stage_index, k, j):
        return FormalSignal.noise_label(("user", stage_index, k, j))

    def power(self, x) -> float:
        return x.energy(self.noise_variance)

    def demap(self, x):
        return x


class NumericBackend:
    symbolic = False

    def __init__(self, params: SystemParams, noise_variance: float = 0.0, seed=None):
        self.params = params
        self.noise_variance = noise_variance
        self.rng = as_generator(seed)
        self._encoded = {}

    def zero(self):
        return np.zeros(self.params.symbols_per_subpacket, dtype=complex)

    def symbol(self, sid, bits):
        try:
            return self._encoded[sid]
        except KeyError:
            x = self._encoded[sid] = encode_subpacket(bits, self.params)
            return x

    def bs_noise(self, stage_index, S):
        n = sample_noise((self.params.L, self.params.symbols_per_subpacket),
                         self.noise_variance, self.rng)
        return list(n)

    def user_noise(self, stage_index, k, j):
        return sample_noise(self.params.symbols_per_subpacket, self.noise_variance, self.rng)

    def power(self, x) -> float:
        return float(np.mean(np.abs(x) ** 2))

    def demap(self, x):
        return decode_block(x, self.params)


def make_backend(mode: str, params: SystemParams, noise_variance: float = 1.0, seed=None):
    if mode == "symbolic":
        return SymbolicBackend(params, noise_variance)
    if mode == "noiseless":
        return NumericBackend(params, 0.0, seed)
    if mode == "noisy":
        return NumericBackend(params, noise_variance, seed)
    raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")


def lin_sum(items, zero):
    out = zero
    for x in items:
        out = out + x
    return out
