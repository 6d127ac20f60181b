"""Squarefree counts in residue classes: error terms, variance and affine correlations.

All counts use the closed range n <= X. Floating statistics are reduced with
``math.fsum``, which is exactly rounded and therefore independent of the
order in which partial results arrive.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .arith import mod_inverse
from .errors import CapacityError, DegenerateMapError, DomainError, HypothesisError
from .localdensity import cq_constant
from .sieve import DEFAULT_SEGMENT, SegmentCache, _base_primes, sieve_squarefree, squarefree_block

log = logging.getLogger(__name__)

MAX_X = 10**9


@dataclass(frozen=True)
class AffineMap:
    """gamma(a) = r a + s."""

    r: int
    s: int

    def __post_init__(self):
        if self.r == 0:
            raise DomainError("r must be nonzero")

    def __call__(self, a, q: int):
        return (self.r * a + self.s) % q

    def check(self, q: int) -> None:
        if self.r % q == 0:
            raise DegenerateMapError(f"q={q} divides r={self.r}; a -> r a + s is not a bijection")

    def inverse_of_zero(self, q: int) -> int:
        """The residue a with r a + s = 0 (mod q)."""
        return (-self.s * mod_inverse(self.r, q)) % q


@dataclass(frozen=True, eq=False)
class ErrorVector:
    """Per-residue squarefree counts up to X and the error terms E(X, q, a)."""

    X: int
    q: int
    counts: np.ndarray
    main_term: float
    E: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ErrorVector):
            return NotImplemented
        return (self.X, self.q) == (other.X, other.q) and np.array_equal(self.counts, other.counts)


def residue_counts(X: int, q: int, *, segment_size: int = DEFAULT_SEGMENT, workers: int = 1,
                   cache: SegmentCache | None = None) -> np.ndarray:
    """counts[a] = #{n <= X squarefree : n = a (mod q)}, one sieve pass."""
    X, q = int(X), int(q)
    if cache is not None:
        seg = sieve_squarefree(1, X + 1, segment_size=segment_size, workers=workers, cache=cache)
        return np.bincount(seg.values() % q, minlength=q).astype(np.int64)
    primes = _base_primes(X + 1)

    def block(bounds):
        lo, hi = bounds
        mask = squarefree_block(lo, hi, primes)
        n = np.flatnonzero(mask).astype(np.int64) + lo
        return np.bincount(n % q, minlength=q).astype(np.int64)

    bounds = [(a, min(a + segment_size, X + 1)) for a in range(1, X + 1, segment_size)]
    if workers <= 1 or len(bounds) <= 1:
        parts = [block(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, bounds))
    total = np.zeros(q, dtype=np.int64)
    for p in parts:
        total += p
    return total


def error_vector(X: int, q: int, *, allow_degenerate: bool = False, workers: int = 1,
                 cache: SegmentCache | None = None) -> ErrorVector:
    """Counts and E(X, q, a) = count_a - C(q) X / q for every residue a."""
    X, q = int(X), int(q)
    if q < 2:
        raise DomainError(f"q must be >= 2, got {q}")
    if X < 1:
        raise DomainError(f"X must be >= 1, got {X}")
    if X > MAX_X:
        raise CapacityError(f"X={X} exceeds 10**9")
    if q > X:
        if not allow_degenerate:
            raise DomainError(f"q={q} > X={X}; pass allow_degenerate=True to proceed")
        log.warning("q=%d exceeds X=%d: outside the regime q <= X", q, X)
    counts = residue_counts(X, q, workers=workers, cache=cache)
    main = cq_constant(q) * X / q
    E = counts.astype(np.float64) - main
    counts.flags.writeable = False
    E.flags.writeable = False
    return ErrorVector(X, q, counts, main, E)


def coprime_residues(q: int) -> np.ndarray:
    a = np.arange(q, dtype=np.int64)
    return a[np.gcd(a, q) == 1]


def variance(ev: ErrorVector) -> float:
    """sum over a coprime to q of E(X, q, a)^2."""
    vals = ev.E[coprime_residues(ev.q)]
    return math.fsum((vals * vals).tolist())


def variance_naive(ev: ErrorVector) -> float:
    """Two-pass variance straight from counts; an independent check of :func:`variance`."""
    total = 0.0
    for a in range(1, ev.q):
        if math.gcd(a, ev.q) == 1:
            e = int(ev.counts[a]) - ev.main_term
            total += e * e
    return total


def _gamma_index(q: int, gamma: AffineMap) -> np.ndarray:
    a = np.arange(q, dtype=np.int64)
    return (gamma.r % q * a + gamma.s % q) % q


def s_gamma(ev: ErrorVector, gamma: AffineMap) -> int:
    """Pairs n1, n2 <= X squarefree with n2 = r n1 + s (mod q)."""
    gamma.check(ev.q)
    c = ev.counts
    return int(np.dot(c, c[_gamma_index(ev.q, gamma)]))


def full_correlation(ev: ErrorVector, gamma: AffineMap) -> float:
    """sum over every residue a of E(a) E(gamma(a))."""
    gamma.check(ev.q)
    prod = ev.E * ev.E[_gamma_index(ev.q, gamma)]
    return math.fsum(prod.tolist())


def decomposition_rhs(ev: ErrorVector, gamma: AffineMap) -> float:
    """S[gamma] - 2 C(q) (X/q) Q(X) + C(q)^2 X^2 / q, equal to :func:`full_correlation`."""
    cq = cq_constant(ev.q)
    X, q = ev.X, ev.q
    return math.fsum([s_gamma(ev, gamma), -2 * cq * X / q * ev.total, cq * cq * X * X / q])


def correlation(ev: ErrorVector, gamma: AffineMap, *, require_hypothesis: bool = True) -> float:
    """C[gamma](X, q): the full correlation minus the residues a = 0 and a = gamma^-1(0).

    With ``require_hypothesis=False`` the homothety s = 0 is accepted; then
    gamma^-1(0) = 0 and only a = 0 is dropped.
    """
    q = ev.q
    gamma.check(q)
    if require_hypothesis and (gamma.r * gamma.s) % q == 0:
        raise HypothesisError(f"q={q} divides r*s={gamma.r * gamma.s}")
    idx = _gamma_index(q, gamma)
    skip = {0, gamma.inverse_of_zero(q)}
    keep = np.ones(q, dtype=bool)
    keep[list(skip)] = False
    prod = ev.E[keep] * ev.E[idx[keep]]
    return math.fsum(prod.tolist())


@dataclass(frozen=True)
class CorrelationRow:
    X: int
    q: int
    r: int
    s: int
    S_gamma: int
    full_sum: float
    C: float
    variance: float

    @property
    def ratio(self) -> float:
        return self.C / self.variance if self.variance else math.nan


def correlation_summary(ev: ErrorVector, gamma: AffineMap, *, require_hypothesis: bool = True) -> CorrelationRow:
    return CorrelationRow(
        ev.X, ev.q, gamma.r, gamma.s,
        s_gamma(ev, gamma),
        full_correlation(ev, gamma),
        correlation(ev, gamma, require_hypothesis=require_hypothesis),
        variance(ev),
    )


def trivial_bound_holds(ev: ErrorVector) -> bool:
    """|E(X, q, a)| <= X/q + 1 for every a."""
    return bool(np.all(np.abs(ev.E) <= ev.X / ev.q + 1))
