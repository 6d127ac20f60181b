"""Exact local densities of squarefree pairs and the constants built from them.

``f_density(l, r)`` is the density of integers n for which both n and
r*n + l are squarefree. It factors as C_2 times a rational number, and the
rational part is kept exact. Infinite sums and products carry explicit tail
bounds.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .arith import (
    divisors,
    factorize,
    is_prime,
    is_squarefree,
    mobius,
    primes_up_to,
    rational_product,
)
from .errors import DomainError

SIX_OVER_PI2 = 6 / math.pi**2


@dataclass(frozen=True)
class DensityValue:
    """``rational_part * C_2`` (or just ``rational_part``), with a float copy."""

    rational_part: Fraction
    includes_c2: bool
    approx: float

    @classmethod
    def with_c2(cls, rational_part: Fraction) -> "DensityValue":
        return cls(rational_part, True, float(rational_part) * c2_constant())

    def __float__(self) -> float:
        return self.approx


def h_value(d: int) -> Fraction:
    """mu^2(d) prod_{p | d} (1 - 2/p^2)^-1."""
    d = int(d)
    if d < 1:
        raise DomainError(f"h needs d >= 1, got {d}")
    out = Fraction(1)
    for p, e in factorize(d):
        if e > 1:
            return Fraction(0)
        out *= Fraction(p * p, p * p - 2)
    return out


def beta_value(m: int) -> Fraction:
    """Dirichlet inverse-convolution of h with 1: beta = h * mu.

    Computed prime by prime, since both h and mu are multiplicative:
    beta(p) = h(p) - 1, beta(p^2) = -h(p), beta(p^k) = 0 for k >= 3.
    """
    m = int(m)
    if m < 1:
        raise DomainError(f"beta needs m >= 1, got {m}")
    out = Fraction(1)
    for p, e in factorize(m):
        hp = Fraction(p * p, p * p - 2)
        if e == 1:
            out *= hp - 1
        elif e == 2:
            out *= -hp
        else:
            return Fraction(0)
    return out


def beta_by_convolution(m: int) -> Fraction:
    """beta(m) = sum_{de = m} h(d) mu(e), summed over divisors."""
    return sum((h_value(d) * mobius(m // d) for d in divisors(m)), Fraction(0))


def kappa_prime_power(p: int, alpha: int) -> Fraction:
    if alpha == 0:
        return Fraction(1)
    if alpha == 1:
        return Fraction(p * p - p - 1, p * p - 1)
    if alpha == 2:
        return Fraction(p * p - p, p * p - 1)
    return Fraction(0)


def kappa_value(n: int) -> Fraction:
    """Multiplicative kappa with kappa(p)=(p^2-p-1)/(p^2-1), kappa(p^2)=(p^2-p)/(p^2-1)."""
    n = int(n)
    if n < 1:
        raise DomainError(f"kappa needs n >= 1, got {n}")
    return rational_product(kappa_prime_power(p, e) for p, e in factorize(n))


def _check_sqfree_r(r: int) -> int:
    r = int(r)
    if r == 0:
        raise DomainError("r must be nonzero")
    if not is_squarefree(r):
        raise DomainError(f"r={r} is not squarefree")
    return r


def u_p(p: int, l: int, r: int) -> int:
    """Number of residues v mod p^2 with p^2 | v or p^2 | r*v + l (case table)."""
    p, l = int(p), int(l)
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if l == 0:
        raise DomainError("l must be nonzero")
    r = _check_sqfree_r(r)
    if r % p == 0:
        if l % (p * p) == 0:
            return p
        if l % p == 0:
            return p + 1
        return 1
    return 1 if l % (p * p) == 0 else 2


@lru_cache(maxsize=64)
def _residues(m: int) -> np.ndarray:
    v = np.arange(m, dtype=np.int64)
    v.flags.writeable = False
    return v


def u_p_bruteforce(p: int, l: int, r: int) -> int:
    """Direct scan of v in [0, p^2) counting p | sigma(v) sigma(r v + l)."""
    p, l, r = int(p), int(l), int(r)
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if p > 1000:
        raise DomainError("brute force limited to p <= 1000")
    p2 = p * p
    v = _residues(p2)
    # p | sigma(n) iff p^2 | n; v = 0 is the only v in range with p^2 | v
    hit = (r * v + l) % p2 == 0
    hit[0] = True
    return int(np.count_nonzero(hit))


def c2_partial_product(limit: int) -> float:
    """prod_{p <= limit} (1 - 2/p^2) in floating point."""
    primes = primes_up_to(int(limit)).astype(np.float64)
    return float(np.exp(np.sum(np.log1p(-2.0 / (primes * primes)))))


def c2_tail_factor_bounds(limit: int) -> tuple[float, float]:
    """Bounds ``(low, 1)`` on prod_{p > limit} (1 - 2/p^2).

    Uses log(1 - x) >= -3x/2 for x <= 2/9 and sum_{n > P} 1/n^2 < 1/P.
    """
    limit = max(int(limit), 2)
    return math.exp(-3.0 / limit), 1.0


_C2_LOCK = threading.Lock()
_C2_CACHE: dict[int, float] = {}


def _c2_high_precision(digits: int) -> mpmath.mpf:
    # log C_2 = sum_{p<=P} log(1-2/p^2) - sum_k 2^k/k * P_{>P}(2k), with P_{>P}
    # the prime zeta function minus its terms p <= P; the k-series converges
    # like (2/P^2)^k.
    cut = 100
    with mpmath.workdps(digits + 10):
        small = [int(p) for p in primes_up_to(cut)]
        head = mpmath.fsum(mpmath.log(1 - mpmath.mpf(2) / p**2) for p in small)
        tail = mpmath.mpf(0)
        k = 1
        while True:
            rest = mpmath.primezeta(2 * k) - mpmath.fsum(mpmath.mpf(p) ** (-2 * k) for p in small)
            term = mpmath.mpf(2) ** k / k * rest
            tail += term
            if abs(term) < mpmath.mpf(10) ** (-(digits + 5)):
                break
            k += 1
        return mpmath.exp(head - tail)


def c2_constant(eps: float = 1e-15) -> float:
    """C_2 = prod_p (1 - 2/p^2) to relative accuracy ``eps``.

    The product over p <= 100 is exact; the remaining primes enter through
    the prime zeta function, so any accuracy down to double precision costs
    the same. Memoised per precision under a lock.
    """
    if not (0 < eps <= 1e-3):
        raise DomainError(f"eps must lie in (0, 1e-3], got {eps}")
    digits = max(17, int(math.ceil(-math.log10(eps))) + 2)
    with _C2_LOCK:
        if digits not in _C2_CACHE:
            _C2_CACHE[digits] = float(_c2_high_precision(digits))
        return _C2_CACHE[digits]


def _ell_factor_data(l: int, r: int) -> Fraction:
    """Rational part of f(l, r): everything but C_2."""
    out = Fraction(1)
    rfac = set(factorize(abs(r)).primes)
    for p in rfac:
        out *= Fraction(p * p - 1, p * p - 2)
    for p, e in factorize(abs(l)):
        if p in rfac:
            out *= kappa_prime_power(p, min(e, 2))
        elif e >= 2:
            out *= Fraction(p * p - 1, p * p - 2)
    return out


def f_density(l: int, r: int) -> DensityValue:
    """Density f(l, r) of n with n and r n + l both squarefree.

    C_2 prod_{p|r} (p^2-1)/(p^2-2) prod_{p^2|l, p∤r} (p^2-1)/(p^2-2) kappa((l, r^2)).
    Divisibility is taken on |l| and |r|.
    """
    l = int(l)
    if l == 0:
        raise DomainError("f(l, r) is undefined for l = 0")
    r = _check_sqfree_r(r)
    # (l, r^2) has p-part p^min(v_p(l), 2) for p | r, since r is squarefree
    return DensityValue.with_c2(_ell_factor_data(l, r))


def f_density_euler(l: int, r: int, prime_limit: int = 10**5) -> float:
    """prod_{p <= prime_limit} (1 - u_p(l, r)/p^2), the truncated Euler product."""
    l, r = int(l), int(r)
    primes = primes_up_to(prime_limit)
    out = 1.0
    logs = []
    special = set(factorize(abs(l)).primes) | set(factorize(abs(r)).primes)
    generic = [p for p in primes.tolist() if p not in special]
    pg = np.asarray(generic, dtype=np.float64)
    logs.append(float(np.sum(np.log1p(-2.0 / (pg * pg)))))
    for p in sorted(special):
        if p <= prime_limit:
            out *= 1 - u_p(p, l, r) / (p * p)
    return out * math.exp(math.fsum(logs))


def cq_constant(q: int) -> float:
    """C(q) = (6/pi^2) (1 - q^-2)^-1."""
    q = int(q)
    if q < 2:
        raise DomainError(f"q must be >= 2, got {q}")
    return SIX_OVER_PI2 / (1 - 1 / (q * q))


def rho_sigma_pairs(r: int) -> list[tuple[int, int]]:
    """Pairs (rho, sigma) with rho*sigma | r^2 and kappa(rho) mu(sigma) != 0."""
    r2 = int(r) ** 2
    out = []
    for rho in divisors(r2):
        for sigma in divisors(r2 // rho):
            if kappa_value(rho) != 0 and mobius(sigma) != 0:
                out.append((rho, sigma))
    return out


def rho_sigma_sum(r: int) -> Fraction:
    """sum_{rho sigma | r^2} kappa(rho) mu(sigma) / (rho sigma)."""
    return sum(
        (kappa_value(rho) * mobius(sigma) / Fraction(rho * sigma) for rho, sigma in rho_sigma_pairs(r)),
        Fraction(0),
    )


def rho_sigma_product(r: int) -> Fraction:
    """prod_{p | r} (p^2 - 1)/p^2."""
    return rational_product(Fraction(p * p - 1, p * p) for p in factorize(abs(int(r))).primes)


@lru_cache(maxsize=4)
def _h_over_d4_prefix(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    d = np.arange(1, cutoff + 1, dtype=np.int64)
    h = h_array(1, cutoff + 1)
    return d, h / (d.astype(np.float64) ** 4)


def h_array(lo: int, hi: int) -> np.ndarray:
    """h(d) for d in ``[lo, hi)`` as float64, by sieving over all prime factors."""
    lo, hi = int(lo), int(hi)
    n = hi - lo
    out = np.ones(n, dtype=np.float64)
    rest = np.arange(lo, hi, dtype=np.int64)
    for p in primes_up_to(math.isqrt(hi - 1)).tolist():
        start = -(-lo // p) * p - lo
        out[start::p] *= p * p / (p * p - 2.0)
        rest[start::p] //= p
        sq = p * p
        start2 = -(-lo // sq) * sq - lo
        out[start2::sq] = 0.0
    big = rest > 1
    pb = rest[big].astype(np.float64)
    out[big] *= pb * pb / (pb * pb - 2.0)
    return out


def lambda_d_sum(q: int, r: int, cutoff: int = 10**5) -> tuple[float, float]:
    """sum_{(d, qr) = 1, d <= cutoff} h(d)/d^4 and a bound on the omitted tail.

    The tail is at most (1/C_2) sum_{d > D} d^-4 <= 1/(3 C_2 D^3) < 3.1/D^3.
    """
    d, terms = _h_over_d4_prefix(int(cutoff))
    keep = np.gcd(d, abs(int(q) * int(r))) == 1
    tail = 1.0 / (3.0 * c2_constant() * cutoff**3)
    return math.fsum(terms[keep].tolist()), tail


def lambda_factors(q: int, r: int, cutoff: int = 10**5) -> tuple[float, float]:
    """(lambda(q, r), Lambda(q, r)).

    lambda uses the truncated d-sum (tail below 3.1/cutoff^3); Lambda is the
    closed form (6/pi^2)^2 (1 + 1/(q^2 (q^2 - 2)))^-1 valid for prime q.
    """
    q = int(q)
    if not is_prime(q):
        raise DomainError(f"q={q} must be prime")
    r = _check_sqfree_r(r)
    if r % q == 0:
        raise DomainError(f"q={q} divides r={r}")
    dsum, _ = lambda_d_sum(q, r, cutoff)
    lam = float(rho_sigma_sum(r)) * dsum
    return lam, big_lambda(q)


def big_lambda(q: int) -> float:
    q = int(q)
    return SIX_OVER_PI2**2 / (1 + 1 / (q * q * (q * q - 2)))


def big_lambda_via_lambda(q: int, r: int, cutoff: int = 10**5) -> float:
    """C_2 prod_{p|r} (p^2-1)/(p^2-2) lambda(q, r); should equal Lambda(q, r)."""
    lam, _ = lambda_factors(q, r, cutoff)
    pr = rational_product(Fraction(p * p - 1, p * p - 2) for p in factorize(abs(r)).primes)
    return c2_constant() * float(pr) * lam
