"""Exact integer arithmetic, multiplicative functions and periodic Bernoulli functions.

Everything here is pure. Rationals are carried as :class:`fractions.Fraction`,
which is exact and never wraps, so no overflow guard is needed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, NonInvertibleError

Rational = Fraction

TRIAL_LIMIT = 10**6
MAX_FACTOR_INPUT = 2**63

MULT_KINDS = ("mu", "mu2", "d", "d3", "omega", "sigma_squarefull")


@dataclass(frozen=True)
class Factorization:
    """Prime decomposition ``n = prod(p**e for p, e in factors)``."""

    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise DomainError(f"malformed factor list {self.factors!r}")
            last = p
            prod *= p**e
        if prod != self.n:
            raise DomainError(f"factors multiply to {prod}, not {self.n}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def exponent(self, p: int) -> int:
        for prime, e in self.factors:
            if prime == p:
                return e
        return 0

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)


@lru_cache(maxsize=8)
def primes_up_to(limit: int) -> np.ndarray:
    """All primes ``<= limit`` as an int64 array (Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    out = np.flatnonzero(flags).astype(np.int64)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=1)
def _trial_primes() -> tuple[int, ...]:
    return tuple(int(p) for p in primes_up_to(TRIAL_LIMIT))


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@lru_cache(maxsize=1 << 16)
def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split_large(n: int, out: dict[int, int], rng: random.Random) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_brent(n, rng)
    _split_large(d, out, rng)
    _split_large(n // d, out, rng)


def factorize(n: int) -> Factorization:
    """Factor ``1 <= n <= 2**63``.

    Trial division by primes below 10**6, then Miller-Rabin and Pollard-Brent
    on whatever cofactor remains.
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"factorize needs n >= 1, got {n}")
    if n > MAX_FACTOR_INPUT:
        raise DomainError(f"factorize supports n <= 2**63, got {n}")
    found: dict[int, int] = {}
    m = n
    for p in _trial_primes():
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    if m > 1:
        if m < TRIAL_LIMIT * TRIAL_LIMIT:
            found[m] = found.get(m, 0) + 1
        else:
            # seeded so factorizations are reproducible run to run
            _split_large(m, found, random.Random(m))
    return Factorization(n, tuple(sorted(found.items())))


def _check_positive(n: int) -> int:
    n = int(n)
    if n < 1:
        raise DomainError(f"expected a positive integer, got {n}")
    return n


def mult_eval(kind: str, n: int) -> int:
    """Evaluate one of the multiplicative functions listed in ``MULT_KINDS``."""
    n = _check_positive(n)
    if kind not in MULT_KINDS:
        raise DomainError(f"unknown multiplicative function {kind!r}")
    fac = factorize(n)
    if kind == "mu":
        if any(e > 1 for _, e in fac):
            return 0
        return -1 if len(fac) % 2 else 1
    if kind == "mu2":
        return int(all(e == 1 for _, e in fac))
    if kind == "d":
        return math.prod(e + 1 for _, e in fac)
    if kind == "d3":
        return math.prod((e + 1) * (e + 2) // 2 for _, e in fac)
    if kind == "omega":
        return len(fac)
    return math.prod(p for p, e in fac if e >= 2)


def mobius(n: int) -> int:
    return mult_eval("mu", n)


def is_squarefree(n: int) -> bool:
    return mult_eval("mu2", abs(int(n))) == 1


def divisors(n: int) -> list[int]:
    """Positive divisors of ``|n|`` in increasing order."""
    n = abs(int(n))
    if n == 0:
        raise DomainError("0 has infinitely many divisors")
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def prime_divisors(n: int) -> tuple[int, ...]:
    n = abs(int(n))
    if n == 0:
        raise DomainError("0 has no finite set of prime divisors")
    return factorize(n).primes


def euler_phi(n: int) -> int:
    n = _check_positive(n)
    out = n
    for p, _ in factorize(n):
        out = out // p * (p - 1)
    return out


def mod_inverse(a: int, q: int) -> int:
    """Inverse of ``a`` modulo ``q``, returned in ``[1, q-1]``."""
    q = int(q)
    if q < 2:
        raise DomainError(f"modulus must be >= 2, got {q}")
    a = int(a) % q
    if math.gcd(a, q) != 1:
        raise NonInvertibleError(f"{a} is not invertible modulo {q}")
    return pow(a, -1, q)


def batch_inverse(values: Sequence[int], q: int) -> list[int]:
    """Invert many residues with a single modular inversion (prefix products)."""
    q = int(q)
    vals = [int(v) % q for v in values]
    if not vals:
        return []
    prefix = []
    acc = 1
    for v in vals:
        if v == 0 or math.gcd(v, q) != 1:
            raise NonInvertibleError(f"{v} is not invertible modulo {q}")
        acc = acc * v % q
        prefix.append(acc)
    inv = pow(acc, -1, q)
    out = [0] * len(vals)
    for i in range(len(vals) - 1, 0, -1):
        out[i] = inv * prefix[i - 1] % q
        inv = inv * vals[i] % q
    out[0] = inv
    return out


def _powmod_array(base: np.ndarray, exponent: int, q: int) -> np.ndarray:
    # operands stay below q < 3.03e9, so products fit in uint64
    result = np.ones_like(base, dtype=np.uint64)
    b = base.astype(np.uint64) % np.uint64(q)
    qq = np.uint64(q)
    e = exponent
    while e:
        if e & 1:
            result = result * b % qq
        b = b * b % qq
        e >>= 1
    return result


@lru_cache(maxsize=16)
def inverse_square_table(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Residues ``n mod q`` coprime to q and the matching ``n̄² mod q``.

    Returns ``(coprime, inv_sq)`` where ``coprime`` is a boolean array of
    length q and ``inv_sq[n]`` is ``n̄² mod q`` (0 where n is not coprime).
    """
    q = int(q)
    if q < 2:
        raise DomainError("modulus must be >= 2")
    if q >= 3_000_000_000:
        raise DomainError("inverse tables need q < 3e9")
    n = np.arange(q, dtype=np.int64)
    coprime = np.gcd(n, q) == 1
    inv = np.zeros(q, dtype=np.uint64)
    # Euler: n^(phi(q)-1) is the inverse of any unit
    inv[coprime] = _powmod_array(n[coprime], euler_phi(q) - 1, q)
    inv_sq = (inv * inv % np.uint64(q)).astype(np.int64)
    coprime.flags.writeable = False
    inv_sq.flags.writeable = False
    return coprime, inv_sq


_BELOW_ONE = math.nextafter(1.0, 0.0)


def frac_part(x: float) -> float:
    """``x - floor(x)``, in [0, 1) for negative x too."""
    f = x - math.floor(x)
    # tiny negative x rounds up to 1.0; the true value lies just below 1
    return _BELOW_ONE if f >= 1.0 else f


def bernoulli(k: int, x: float) -> float:
    """Periodic Bernoulli function ``B_k({x})`` for k in {1, 2}."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"bernoulli needs a finite argument, got {x}")
    t = frac_part(x)
    if k == 1:
        return t - 0.5
    if k == 2:
        return t * t / 2 - t / 2 + 1 / 12
    raise DomainError(f"only B_1 and B_2 are implemented, got k={k}")


def bernoulli_array(k: int, x) -> np.ndarray:
    """Vectorised :func:`bernoulli`."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DomainError("bernoulli needs finite arguments")
    t = x - np.floor(x)
    t = np.where(t >= 1.0, _BELOW_ONE, t)
    if k == 1:
        return t - 0.5
    if k == 2:
        return t * t / 2 - t / 2 + 1 / 12
    raise DomainError(f"only B_1 and B_2 are implemented, got k={k}")


def rational_product(values: Iterable[Fraction]) -> Fraction:
    out = Fraction(1)
    for v in values:
        out *= v
    return out


def nearest_prime(x: float) -> int:
    """Prime closest to ``x``; ties go to the smaller prime."""
    if x < 2:
        return 2
    below = math.floor(x)
    above = below + 1
    while True:
        lo_ok = below >= 2 and is_prime(below)
        hi_ok = is_prime(above)
        if lo_ok and hi_ok:
            return below if x - below <= above - x else above
        if lo_ok and x - below <= above - x:
            return below
        if hi_ok and above - x < x - below:
            return above
        # advance whichever side is closer to x
        if x - below <= above - x:
            below -= 1
        else:
            above += 1
