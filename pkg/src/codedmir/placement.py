"""File library generation, packet/subpacket split and cache placement."""
from __future__ import annotations

import itertools
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .combinatorics import SystemParams, UserSet


class PlacementError(KeyError):
    """A subpacket expected in a cache is not there."""


class IncompleteRecoveryError(RuntimeError):
    """Decoded plus cached subpackets do not cover a whole file."""

    def __init__(self, user: int, missing):
        self.user = user
        self.missing = sorted(missing)
        shown = ", ".join(map(str, self.missing[:8]))
        more = "" if len(self.missing) <= 8 else f" (+{len(self.missing) - 8} more)"
        super().__init__(f"user {user} is missing {len(self.missing)} subpacket(s): {shown}{more}")


class SubpacketId(NamedTuple):
    """Address of subpacket ``W^n_{P,q}``."""

    n: int
    P: UserSet
    q: int

    def __str__(self):
        return f"W{self.n}_{''.join(map(str, self.P)) if max(self.P) < 10 else self.P}_{self.q}"


def packet_sets(params: SystemParams) -> list[UserSet]:
    return list(itertools.combinations(range(1, params.K + 1), params.t))


def subpacket_ids(params: SystemParams, n: int | None = None) -> Iterator[SubpacketId]:
    """All subpacket ids in lexicographic (n, P, q) order."""
    files = range(1, params.K + 1) if n is None else (n,)
    sets = packet_sets(params)
    for nn in files:
        for P in sets:
            for q in range(1, params.n_sub + 1):
                yield SubpacketId(nn, P, q)


@dataclass(frozen=True)
class FileLibrary:
    params: SystemParams
    seed: int
    bits: dict[SubpacketId, np.ndarray]

    def file_bits(self, n: int) -> np.ndarray:
        """File `n` as its F bits, subpackets concatenated in (P, q) order."""
        return np.concatenate([self.bits[sid] for sid in subpacket_ids(self.params, n)])

    def __len__(self):
        return len(self.bits)


def generate_library(params: SystemParams, seed: int) -> FileLibrary:
    """Uniform i.i.d. bits for every subpacket.

    Each subpacket draws from its own generator keyed by
    ``(seed, n, packet rank, q)`` so contents do not depend on iteration
    order.
    """
    rank = {P: i for i, P in enumerate(packet_sets(params))}
    bits = {}
    for sid in subpacket_ids(params):
        rng = np.random.default_rng([seed, sid.n, rank[sid.P], sid.q])
        b = rng.integers(0, 2, size=params.f, dtype=np.uint8)
        b.setflags(write=False)
        bits[sid] = b
    return FileLibrary(params, seed, bits)


@dataclass(frozen=True)
class CacheContents:
    user: int
    entries: frozenset
    library: FileLibrary

    def __contains__(self, sid) -> bool:
        return sid in self.entries

    def __len__(self):
        return len(self.entries)

    def bits(self, sid: SubpacketId) -> np.ndarray:
        if sid not in self.entries:
            raise PlacementError(f"user {self.user} does not cache {sid}")
        return self.library.bits[sid]

    def own_file_entries(self) -> list[SubpacketId]:
        return sorted(sid for sid in self.entries if sid.n == self.user)


def build_cache(library: FileLibrary, k: int) -> CacheContents:
    """Cache of user `k`: every subpacket whose packet set contains `k`."""
    if not 1 <= k <= library.params.K:
        raise ValueError(f"user {k} outside [1..{library.params.K}]")
    return CacheContents(k, frozenset(sid for sid in library.bits if k in sid.P), library)


# binary layout: magic, then K, L, t, f, seed as little-endian int64, then
# all subpacket bits in (n, P, q) order packed MSB-first
_MAGIC = b"CMIRLIB1"
_HEADER = struct.Struct("<8s5q")


def dump_library(library: FileLibrary, path) -> None:
    p = library.params
    stream = np.concatenate([library.bits[sid] for sid in subpacket_ids(p)])
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, p.K, p.L, p.t, p.f, library.seed))
        fh.write(np.packbits(stream).tobytes())


def load_library(path, **param_overrides) -> FileLibrary:
    """Read a library written by `dump_library`.

    Powers and modulation are not stored, pass them as keyword overrides.
    """
    raw = Path(path).read_bytes()
    magic, K, L, t, f, seed = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise ValueError(f"{path}: not a library file")
    params = SystemParams(K=K, L=L, t=t, f=f, **param_overrides)
    ids = list(subpacket_ids(params))
    stream = np.unpackbits(np.frombuffer(raw[_HEADER.size:], dtype=np.uint8))
    if stream.size < len(ids) * f:
        raise ValueError(f"{path}: truncated payload")
    bits = {}
    for i, sid in enumerate(ids):
        b = stream[i * f:(i + 1) * f].copy()
        b.setflags(write=False)
        bits[sid] = b
    return FileLibrary(params, seed, bits)
