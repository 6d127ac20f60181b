"""Segmented sieves for mu^2 and mu, squarefree counting and the segment cache.

A :class:`SqfreeSegment` is the packed indicator of squarefree integers in a
half-open range ``[lo, hi)``. Bit ``i`` of word ``w`` of ``bits`` encodes
``lo + 64*w + i``; trailing bits of the last word are zero. The same layout
is written to disk by :class:`SegmentCache`.
"""

from __future__ import annotations

import logging
import math
import os
import struct
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arith import primes_up_to
from .errors import CapacityError, DomainError

log = logging.getLogger(__name__)

DEFAULT_SEGMENT = 1 << 22
MAX_HI = 10**12
MAX_SPAN = 1 << 32
MAX_COUNT_X = 10**10

CACHE_MAGIC = b"SQF1"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sBQQ")


def _pack(mask: np.ndarray) -> np.ndarray:
    packed = np.packbits(mask.astype(bool, copy=False), bitorder="little")
    pad = (-packed.size) % 8
    if pad:
        packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
    return packed.view("<u8").copy()


@dataclass(frozen=True, eq=False)
class SqfreeSegment:
    """Packed squarefree indicator on ``[lo, hi)``."""

    lo: int
    hi: int
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.lo < 0 or self.hi <= self.lo:
            raise DomainError(f"bad segment bounds [{self.lo}, {self.hi})")
        if self.hi - self.lo > MAX_SPAN:
            raise CapacityError("segment longer than 2**32")
        words = -(-(self.hi - self.lo) // 64)
        if self.bits.dtype != np.dtype("<u8") or self.bits.shape != (words,):
            raise DomainError("bit array has the wrong shape or dtype")
        self.bits.flags.writeable = False

    @classmethod
    def from_mask(cls, lo: int, mask: np.ndarray) -> "SqfreeSegment":
        return cls(int(lo), int(lo) + int(mask.size), _pack(mask))

    def __len__(self) -> int:
        return self.hi - self.lo

    def __contains__(self, n: int) -> bool:
        return self.lo <= n < self.hi

    def __getitem__(self, n: int) -> bool:
        if not self.lo <= n < self.hi:
            raise IndexError(f"{n} outside [{self.lo}, {self.hi})")
        i = n - self.lo
        return bool((int(self.bits[i >> 6]) >> (i & 63)) & 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SqfreeSegment):
            return NotImplemented
        return (self.lo, self.hi) == (other.lo, other.hi) and np.array_equal(self.bits, other.bits)

    def to_mask(self) -> np.ndarray:
        """Unpacked boolean array, ``mask[i]`` for the integer ``lo + i``."""
        raw = np.unpackbits(self.bits.view(np.uint8), bitorder="little", count=len(self))
        return raw.view(bool)

    def popcount(self) -> int:
        return int(np.unpackbits(self.bits.view(np.uint8)).sum(dtype=np.int64))

    def values(self) -> np.ndarray:
        """The squarefree integers in the segment."""
        return np.flatnonzero(self.to_mask()).astype(np.int64) + self.lo

    def join(self, other: "SqfreeSegment") -> "SqfreeSegment":
        """Concatenate with the segment that starts where this one ends."""
        if other.lo != self.hi:
            raise DomainError("segments are not adjacent")
        return SqfreeSegment.from_mask(self.lo, np.concatenate([self.to_mask(), other.to_mask()]))


def _check_range(lo: int, hi: int) -> tuple[int, int]:
    lo, hi = int(lo), int(hi)
    if lo < 1 or hi <= lo:
        raise DomainError(f"need 1 <= lo < hi, got [{lo}, {hi})")
    if hi > MAX_HI:
        raise CapacityError(f"hi={hi} exceeds 10**12")
    if hi - lo > MAX_SPAN:
        raise CapacityError(f"range length {hi - lo} exceeds 2**32")
    return lo, hi


def _base_primes(hi: int) -> np.ndarray:
    return primes_up_to(math.isqrt(hi - 1))


def _clear_square_multiples(mask: np.ndarray, lo: int, primes: np.ndarray) -> None:
    hi = lo + mask.size
    n = mask.size
    squares = primes * primes
    squares = squares[squares < hi]
    small = squares[squares <= n]
    for sq in small.tolist():
        start = -(-lo // sq) * sq
        mask[start - lo :: sq] = False
    big = squares[squares > n]
    if big.size:
        # each big square hits the block at most once
        starts = -(-lo // big) * big
        hits = starts[starts < hi] - lo
        mask[hits] = False


def squarefree_block(lo: int, hi: int, primes: np.ndarray | None = None) -> np.ndarray:
    """Boolean mu^2 indicator for ``[lo, hi)`` (unpacked, one block)."""
    if primes is None:
        primes = _base_primes(hi)
    mask = np.ones(hi - lo, dtype=bool)
    _clear_square_multiples(mask, lo, primes)
    return mask


def _blocks(lo: int, hi: int, size: int) -> list[tuple[int, int]]:
    return [(a, min(a + size, hi)) for a in range(lo, hi, size)]


def _map_blocks(fn, blocks, workers: int):
    if workers <= 1 or len(blocks) <= 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, blocks))


def squarefree_mask(lo: int, hi: int, *, segment_size: int = DEFAULT_SEGMENT,
                    workers: int = 1, cache: "SegmentCache | None" = None) -> np.ndarray:
    """Unpacked mu^2 indicator on ``[lo, hi)``; see :func:`sieve_squarefree`."""
    return sieve_squarefree(lo, hi, segment_size=segment_size, workers=workers, cache=cache).to_mask()


def sieve_squarefree(lo: int, hi: int, *, segment_size: int = DEFAULT_SEGMENT,
                     workers: int = 1, cache: "SegmentCache | None" = None) -> SqfreeSegment:
    """Sieve mu^2 on ``[lo, hi)`` by crossing off multiples of p^2."""
    lo, hi = _check_range(lo, hi)
    if cache is not None:
        hit = cache.get(lo, hi)
        if hit is not None:
            return hit
    primes = _base_primes(hi)
    blocks = _blocks(lo, hi, max(1, int(segment_size)))
    masks = _map_blocks(lambda b: squarefree_block(b[0], b[1], primes), blocks, workers)
    seg = SqfreeSegment.from_mask(lo, np.concatenate(masks) if len(masks) > 1 else masks[0])
    if cache is not None:
        cache.put(seg)
    return seg


def mobius_block(lo: int, hi: int, primes: np.ndarray | None = None) -> np.ndarray:
    """int8 array of mu(n) for n in ``[lo, hi)``."""
    if primes is None:
        primes = _base_primes(hi)
    n = hi - lo
    mu = np.ones(n, dtype=np.int8)
    rest = np.arange(lo, hi, dtype=np.int64)
    for p in primes.tolist():
        if p * p >= hi:
            break
        start = -(-lo // p) * p - lo
        mu[start::p] *= -1
        rest[start::p] //= p
        sq = p * p
        start2 = -(-lo // sq) * sq - lo
        mu[start2::sq] = 0
    # what is left after removing every p <= sqrt(hi) is 1 or a single large prime
    mu[rest > 1] *= -1
    return mu


def sieve_mobius(lo: int, hi: int, *, segment_size: int = DEFAULT_SEGMENT,
                 workers: int = 1) -> np.ndarray:
    """mu(n) for n in ``[lo, hi)`` as an int8 array."""
    lo, hi = _check_range(lo, hi)
    primes = _base_primes(hi)
    blocks = _blocks(lo, hi, max(1, int(segment_size)))
    parts = _map_blocks(lambda b: mobius_block(b[0], b[1], primes), blocks, workers)
    return np.concatenate(parts) if len(parts) > 1 else parts[0]


def count_squarefree(X: int, *, segment_size: int = DEFAULT_SEGMENT, workers: int = 1) -> int:
    """Q(X), the number of squarefree n <= X, summed segment by segment."""
    X = int(X)
    if X < 1:
        raise DomainError(f"count_squarefree needs X >= 1, got {X}")
    if X > MAX_COUNT_X:
        raise CapacityError(f"X={X} exceeds 10**10")
    primes = _base_primes(X + 1)
    blocks = _blocks(1, X + 1, max(1, int(segment_size)))
    counts = _map_blocks(
        lambda b: int(np.count_nonzero(squarefree_block(b[0], b[1], primes))), blocks, workers
    )
    return sum(counts)


def count_squarefree_mobius(X: int) -> int:
    """Q(X) via sum_{d <= sqrt X} mu(d) floor(X/d^2); an independent route."""
    X = int(X)
    if X < 1:
        raise DomainError(f"X must be >= 1, got {X}")
    root = math.isqrt(X)
    mu = sieve_mobius(1, root + 1)
    d = np.arange(1, root + 1, dtype=np.int64)
    return int(np.sum(mu.astype(np.int64) * (X // (d * d))))


def write_segment(path: str | os.PathLike, seg: SqfreeSegment) -> None:
    """Write ``seg`` in the SQF1 format, atomically (temp file, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, seg.lo, seg.hi))
            fh.write(seg.bits.astype("<u8").tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_segment(path: str | os.PathLike) -> SqfreeSegment:
    """Read an SQF1 file; raises ``ValueError`` on any inconsistency."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError("truncated header")
    magic, version, lo, hi = _HEADER.unpack_from(data)
    if magic != CACHE_MAGIC:
        raise ValueError("bad magic")
    if version != CACHE_VERSION:
        raise ValueError(f"unsupported version {version}")
    if hi <= lo or hi - lo > MAX_SPAN:
        raise ValueError("bad bounds")
    words = -(-(hi - lo) // 64)
    body = data[_HEADER.size :]
    if len(body) != 8 * words:
        raise ValueError("payload length mismatch")
    bits = np.frombuffer(body, dtype="<u8").copy()
    tail = (hi - lo) % 64
    if tail and int(bits[-1]) >> tail:
        raise ValueError("nonzero trailing bits")
    return SqfreeSegment(lo, hi, bits)


class SegmentCache:
    """Directory of SQF1 files keyed by ``(lo, hi)``.

    Unreadable or inconsistent files are ignored (and recomputed by the
    caller), never trusted.
    """

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)

    def path_for(self, lo: int, hi: int) -> Path:
        return self.directory / f"sqf_{lo}_{hi}.bin"

    def get(self, lo: int, hi: int) -> SqfreeSegment | None:
        path = self.path_for(lo, hi)
        if not path.exists():
            return None
        try:
            seg = read_segment(path)
        except (OSError, ValueError) as exc:
            log.warning("ignoring cache file %s: %s", path, exc)
            return None
        if (seg.lo, seg.hi) != (lo, hi):
            log.warning("ignoring cache file %s: key mismatch", path)
            return None
        return seg

    def put(self, seg: SqfreeSegment) -> Path:
        path = self.path_for(seg.lo, seg.hi)
        write_segment(path, seg)
        return path
