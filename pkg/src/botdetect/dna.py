"""Digital DNA encoding of timelines and compression-statistic features."""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .ingest import Timeline

FEATURE_SETS = {
    "A": ("original_size", "compressed_size"),
    "B": ("original_size", "ratio"),
    "C": ("compressed_size", "ratio"),
    "D": ("original_size", "compressed_size", "ratio"),
}

# raw RFC 1951 stream: negative wbits drops the zlib header and checksum
DEFLATE_LEVEL = 9
DEFLATE_WBITS = -15
DEFLATE_MEMLEVEL = 9


@dataclass(frozen=True)
class Alphabet:
    mapping: tuple  # ((kind, base), ...)

    def __post_init__(self):
        bases = [b for _, b in self.mapping]
        if len(set(bases)) != len(bases):
            raise ValueError("alphabet bases must be pairwise distinct")
        if any(len(b) != 1 for b in bases):
            raise ValueError("bases must be single characters")

    @property
    def bases(self) -> str:
        return "".join(b for _, b in self.mapping)

    def base(self, kind: str) -> str:
        for k, b in self.mapping:
            if k == kind:
                return b
        raise KeyError(f"no base for interaction kind {kind!r}")


TYPE3 = Alphabet((("tweet", "A"), ("reply", "C"), ("retweet", "T")))


@dataclass(frozen=True)
class DnaSequence:
    account_id: str
    sequence: str

    def __len__(self):
        return len(self.sequence)


@dataclass(frozen=True)
class CompressionStats:
    original_size: int
    compressed_size: int

    @property
    def ratio(self) -> float:
        return self.original_size / self.compressed_size


def encode_kinds(kinds, alphabet: Alphabet = TYPE3) -> str:
    table = dict(alphabet.mapping)
    return "".join(table[k] for k in kinds)


def encode_timeline(timeline: Timeline, alphabet: Alphabet = TYPE3) -> DnaSequence:
    if not timeline.tweets:
        raise ValueError(f"account {timeline.account_id}: empty timeline cannot be encoded")
    return DnaSequence(timeline.account_id, encode_kinds((t.kind for t in timeline.tweets), alphabet))


def deflate_size(data: bytes) -> int:
    c = zlib.compressobj(DEFLATE_LEVEL, zlib.DEFLATED, DEFLATE_WBITS, DEFLATE_MEMLEVEL, zlib.Z_DEFAULT_STRATEGY)
    return len(c.compress(data) + c.flush())


def compress_stats(dna) -> CompressionStats:
    seq = dna.sequence if isinstance(dna, DnaSequence) else str(dna)
    if not seq:
        raise ValueError("empty DNA sequence")
    raw = seq.encode("ascii")
    return CompressionStats(original_size=len(raw), compressed_size=deflate_size(raw))


def dna_feature_vector(stats: CompressionStats, set_id: str) -> np.ndarray:
    try:
        names = FEATURE_SETS[set_id]
    except KeyError:
        raise ValueError(f"unknown DNA feature set {set_id!r}") from None
    return np.array([float(getattr(stats, n)) for n in names])
