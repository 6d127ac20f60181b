"""Squarefree pairs (n, r n + l): window geometry, exact counts and the completed sum.

Windows follow the open-interval convention: n counts when both n and
r n + l lie strictly inside (0, X).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .arith import factorize, is_prime, primes_up_to, rational_product
from .errors import CapacityError, DomainError, HypothesisError
from .localdensity import _ell_factor_data, big_lambda, c2_constant, f_density, kappa_prime_power
from .sieve import SegmentCache, squarefree_mask

MAX_PAIR_X = 10**8
MAX_SIGMA_X = 10**7
FACTOR_METHOD_LIMIT = 10**7


@dataclass(frozen=True)
class PairWindow:
    """I(X, l, r) = {u real : 0 < u < X and 0 < r u + l < X}."""

    X: float
    l: int
    r: int
    length: float

    @classmethod
    def of(cls, X, l: int, r: int) -> "PairWindow":
        return cls(X, int(l), int(r), interval_length(X, l, r))


def _window_bounds(X, l: int, r: int) -> tuple[Fraction, Fraction]:
    X = Fraction(X)
    if r > 0:
        lo = max(Fraction(0), Fraction(-l, r))
        hi = min(X, (X - l) / r)
    else:
        lo = max(Fraction(0), (X - l) / r)
        hi = min(X, Fraction(-l, r))
    return lo, hi


def interval_length(X, l: int, r: int) -> float:
    """Lebesgue length of I(X, l, r)."""
    r, l = int(r), int(l)
    if r == 0:
        raise DomainError("r must be nonzero")
    if not X > 0:
        raise DomainError(f"X must be positive, got {X}")
    lo, hi = _window_bounds(X, l, r)
    return float(max(Fraction(0), hi - lo))


def window_integers(X, l: int, r: int) -> tuple[int, int]:
    """Inclusive range [a, b] of integers n in the open window (b < a if empty)."""
    lo, hi = _window_bounds(X, int(l), int(r))
    return math.floor(lo) + 1, math.ceil(hi) - 1


def pair_count_S(X, l: int, r: int, *, mask: np.ndarray | None = None,
                 cache: SegmentCache | None = None, workers: int = 1) -> int:
    """Number of integers n in I(X, l, r) with n and r n + l both squarefree.

    ``mask`` may be a precomputed boolean mu^2 array indexed by n (index 0
    unused) covering at least ``[0, ceil(X))``.
    """
    l, r = int(l), int(r)
    if r == 0:
        raise DomainError("r must be nonzero")
    if X > MAX_PAIR_X:
        raise CapacityError(f"X={X} exceeds the desk-scale limit 10**8")
    a, b = window_integers(X, l, r)
    if b < a:
        return 0
    top = math.ceil(X)
    if abs(r) * max(abs(a), abs(b)) + abs(l) > 2**62:
        raise CapacityError("r n + l overflows 64-bit range")
    if mask is None:
        mask = _mask_upto(top, cache=cache, workers=workers)
    elif mask.size < top:
        raise DomainError("mask does not cover the window")
    first, last = r * a + l, r * b + l
    if r > 0:
        partner = mask[first : last + 1 : r]
    else:
        stop = last - 1 if last > 0 else None
        partner = mask[first:stop:r]
    return int(np.count_nonzero(mask[a : b + 1] & partner))


def _mask_upto(top: int, cache: SegmentCache | None = None, workers: int = 1) -> np.ndarray:
    """Boolean mu^2 array for 0..top-1 (index 0 set False)."""
    if top <= 1:
        return np.zeros(max(top, 1), dtype=bool)
    return np.concatenate([[False], squarefree_mask(1, top, cache=cache, workers=workers)])


@dataclass
class PairDensityRow:
    l: int
    r: int
    S: int
    f: float
    interval: float
    main: float
    abs_dev: float
    rel_dev: float


@dataclass
class PairDensityReport:
    X: float
    r: int
    rows: list[PairDensityRow] = field(default_factory=list)

    @property
    def max_rel_dev(self) -> float:
        return max((abs(row.rel_dev) for row in self.rows), default=0.0)

    @property
    def mean_rel_dev(self) -> float:
        if not self.rows:
            return 0.0
        return math.fsum(abs(row.rel_dev) for row in self.rows) / len(self.rows)

    @property
    def max_abs_dev(self) -> float:
        return max((abs(row.abs_dev) for row in self.rows), default=0.0)


def verify_pair_density(X, r: int, ls: Iterable[int], *, cache: SegmentCache | None = None,
                        workers: int = 1) -> PairDensityReport:
    """Compare S(l, r) with f(l, r) |I(X, l, r)| for each l; reports, never asserts."""
    r = int(r)
    if X > MAX_PAIR_X:
        raise CapacityError(f"X={X} exceeds the desk-scale limit 10**8")
    mask = _mask_upto(math.ceil(X), cache=cache, workers=workers)
    report = PairDensityReport(X, r)
    for l in ls:
        l = int(l)
        S = pair_count_S(X, l, r, mask=mask)
        f = f_density(l, r).approx
        length = interval_length(X, l, r)
        main = f * length
        dev = S - main
        rel = dev / main if main else (0.0 if S == 0 else math.inf)
        report.rows.append(PairDensityRow(l, r, S, f, length, main, dev, rel))
    return report


def sigma_support(X, q: int, r: int, s: int) -> np.ndarray:
    """Every l = s (mod q) whose window I(X, l, r) has positive length."""
    X = Fraction(X)
    lo = min(Fraction(0), -r * X)
    hi = max(X, X - r * X)
    # l ranges over the open interval (lo, hi)
    first = math.floor(lo) + 1
    last = math.ceil(hi) - 1
    start = first + ((s - first) % q)
    return np.arange(start, last + 1, q, dtype=np.int64)


def interval_lengths(X: float, ls: np.ndarray, r: int) -> np.ndarray:
    """Vectorised :func:`interval_length` in floating point."""
    ls = ls.astype(np.float64)
    if r > 0:
        lo = np.maximum(0.0, -ls / r)
        hi = np.minimum(X, (X - ls) / r)
    else:
        lo = np.maximum(0.0, (X - ls) / r)
        hi = np.minimum(X, -ls / r)
    return np.maximum(0.0, hi - lo)


def _rational_parts_by_factoring(ls: np.ndarray, r: int) -> np.ndarray:
    return np.array([float(_ell_factor_data(int(l), r)) for l in ls.tolist()], dtype=np.float64)


def _rational_parts_by_sieve(ls: np.ndarray, q: int, r: int) -> np.ndarray:
    """Rational part of f(l, r) along the progression ``ls`` (step q), by sieving p^2 | l."""
    out = np.ones(ls.size, dtype=np.float64)
    if ls.size == 0:
        return out
    rprimes = set(factorize(abs(r)).primes)
    for p in rprimes:
        out *= (p * p - 1) / (p * p - 2.0)
        v1 = (ls % p) == 0
        v2 = (ls % (p * p)) == 0
        k1 = float(kappa_prime_power(p, 1))
        k2 = float(kappa_prime_power(p, 2))
        out *= np.where(v2, k2, np.where(v1, k1, 1.0))
    top = int(np.max(np.abs(ls)))
    first = int(ls[0])
    for p in primes_up_to(math.isqrt(top)).tolist():
        if p in rprimes or p == q:
            continue
        sq = p * p
        # first index k with first + k q = 0 (mod p^2)
        k0 = (-first * pow(q, -1, sq)) % sq
        out[k0::sq] *= (sq - 1) / (sq - 2.0)
    return out


def big_sigma(X, q: int, r: int, s: int, *, method: str = "auto", workers: int = 1) -> float:
    """Completed sum over l = s (mod q) of f(l, r) |I(X, l, r)|.

    Finite: only l in the support of the window contributes. ``method``
    selects per-l factorisation ("factor"), a p^2 sieve along the progression
    ("sieve"), or "auto" (factor below X = 10**7, sieve above).
    """
    q, r, s = int(q), int(r), int(s)
    if not is_prime(q):
        raise DomainError(f"q={q} must be prime")
    if r == 0:
        raise DomainError("r must be nonzero")
    if (r * s) % q == 0:
        raise HypothesisError(f"q={q} divides r*s={r * s}")
    if abs(r) > 10:
        raise DomainError("|r| <= 10 required")
    f_density(1, r)  # validates squarefree r
    if X > MAX_SIGMA_X:
        raise CapacityError(f"X={X} exceeds 10**7")
    ls = sigma_support(X, q, r, s)
    if method == "auto":
        method = "factor" if X < FACTOR_METHOD_LIMIT else "sieve"
    lengths = interval_lengths(float(X), ls, r)
    if method == "factor":
        parts = _chunked(ls, lambda c: _rational_parts_by_factoring(c, r), workers)
    elif method == "sieve":
        parts = _rational_parts_by_sieve(ls, q, r)
    else:
        raise DomainError(f"unknown method {method!r}")
    terms = parts * lengths
    return c2_constant() * math.fsum(terms.tolist())


def _chunked(ls: np.ndarray, fn, workers: int) -> np.ndarray:
    if workers <= 1 or ls.size < 2 * 4096:
        return fn(ls)
    chunks = np.array_split(ls, workers * 4)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(fn, chunks)))


def big_sigma_prime(X, q: int, r: int, s: int, **kw) -> float:
    """big_sigma divided by C_2 prod_{p|r} (p^2-1)/(p^2-2)."""
    pr = rational_product(Fraction(p * p - 1, p * p - 2) for p in factorize(abs(int(r))).primes)
    return big_sigma(X, q, r, s, **kw) / (c2_constant() * float(pr))


def sigma_main_term(X, q: int) -> float:
    """Lambda(q, r) X^2 / q (Lambda does not depend on r for prime q)."""
    return big_lambda(q) * float(X) ** 2 / q
