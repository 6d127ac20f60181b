"""Inverse-square exponential sums and the Bernoulli-difference sums A, B and G.

Phases are always reduced exactly, ``e(m/q)`` with ``m = a n̄² mod q`` an
integer, so no angle is ever accumulated. Infinite sums are truncated under a
:class:`TruncationBudget` whose ``tail_bound`` is a proven bound on the
omitted part:

* a_sum: ``|B_2(x + t) - B_2(x)| <= t/2`` gives tail ``Y^2 / (2T)``;
* b_sum: additionally ``h(d) <= 1/C_2``;
* g_sum: per-term A tails plus ``|A(Z)| <= (pi^2/12) Z^2`` and
  ``|beta(m)| <= 1/C_2`` for the omitted m.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .arith import divisors, factorize, inverse_square_table, is_prime, mobius
from .errors import CapacityError, DomainError, HypothesisError
from .localdensity import (
    beta_value,
    c2_constant,
    h_array,
    is_squarefree,
    kappa_value,
    lambda_d_sum,
    rho_sigma_pairs,
    rho_sigma_sum,
)

MAX_CUTOFF = 10**9
MAX_N = 10**9
BLOCK = 1 << 20
MIN_TERM_CUTOFF = 64


@dataclass(frozen=True)
class TruncationBudget:
    """Cutoff for an infinite sum together with the bound on what it drops.

    ``outer_cutoff`` is the m-cutoff used by :func:`g_sum` (0 elsewhere).
    """

    tolerance: float
    cutoff: int
    tail_bound: float
    outer_cutoff: int = 0

    def __post_init__(self):
        if self.cutoff < 1:
            raise DomainError("cutoff must be positive")
        if self.tail_bound > self.tolerance * (1 + 1e-12):
            raise DomainError("tail bound exceeds tolerance")


def _resolve(tail_at, tolerance, cutoff, what: str) -> tuple[float, int]:
    if (tolerance is None) == (cutoff is None):
        raise DomainError("give exactly one of tolerance or cutoff")
    if cutoff is not None:
        cutoff = int(cutoff)
        if cutoff < 1:
            raise DomainError("cutoff must be positive")
        if cutoff > MAX_CUTOFF:
            raise CapacityError(f"{what} cutoff {cutoff} exceeds 10**9")
        return tail_at(cutoff), cutoff
    if not tolerance > 0:
        raise DomainError("tolerance must be positive")
    lo, hi = 1, 1
    while tail_at(hi) > tolerance:
        hi *= 2
        if hi > 2 * MAX_CUTOFF:
            raise CapacityError(f"{what} needs a cutoff beyond 10**9 for tolerance {tolerance}")
    while lo < hi:
        mid = (lo + hi) // 2
        if tail_at(mid) <= tolerance:
            hi = mid
        else:
            lo = mid + 1
    if hi > MAX_CUTOFF:
        raise CapacityError(f"{what} needs a cutoff beyond 10**9 for tolerance {tolerance}")
    return tail_at(hi), hi


def a_sum_budget(Y: float, *, tolerance: float | None = None, cutoff: int | None = None) -> TruncationBudget:
    tail_at = lambda T: Y * Y / (2.0 * T)
    tail, T = _resolve(tail_at, tolerance, cutoff, "a_sum")
    return TruncationBudget(tolerance if tolerance is not None else tail, T, tail)


def b_sum_budget(D: float, *, tolerance: float | None = None, cutoff: int | None = None) -> TruncationBudget:
    inv_c2 = 1.0 / c2_constant()
    tail_at = lambda T: inv_c2 * D * D / (2.0 * T)
    tail, T = _resolve(tail_at, tolerance, cutoff, "b_sum")
    return TruncationBudget(tolerance if tolerance is not None else tail, T, tail)


# ---------------------------------------------------------------------------
# e(a n̄²/q)


def _check_unit(a: int, q: int) -> tuple[int, int]:
    a, q = int(a), int(q)
    if q < 2:
        raise DomainError(f"q must be >= 2, got {q}")
    if math.gcd(a, q) != 1:
        raise DomainError(f"gcd({a}, {q}) != 1")
    return a % q, q


def _phases(a: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """For every residue n mod q: coprimality flag and m = a n̄² mod q."""
    coprime, inv_sq = inverse_square_table(q)
    return coprime, (a * inv_sq) % q


def _e_sum(m: np.ndarray, q: int) -> complex:
    ang = (2.0 * math.pi / q) * m.astype(np.float64)
    return complex(math.fsum(np.cos(ang).tolist()), math.fsum(np.sin(ang).tolist()))


def _residue_block_sum(coprime, m, q, lo, hi) -> complex:
    idx = np.arange(lo, hi, dtype=np.int64)
    keep = coprime[idx]
    return _e_sum(m[idx[keep]], q)


def incomplete_invsq_sum(N: int, q: int, a: int, *, workers: int = 1) -> complex:
    """sum_{n <= N, (n, q) = 1} e(a n̄² / q).

    n̄² depends only on n mod q, so N = k q + rem reduces to k complete
    periods and one partial period.
    """
    a, q = _check_unit(a, q)
    N = int(N)
    if N < 0:
        raise DomainError("N must be non-negative")
    if N > MAX_N:
        raise CapacityError(f"N={N} exceeds 10**9")
    coprime, m = _phases(a, q)
    periods, rem = divmod(N, q)
    bounds = [(lo, min(lo + BLOCK, rem + 1)) for lo in range(1, rem + 1, BLOCK)]
    if periods:
        bounds_full = [(lo, min(lo + BLOCK, q)) for lo in range(1, q, BLOCK)]
    else:
        bounds_full = []
    work = [(b, 1) for b in bounds] + [(b, periods) for b in bounds_full]

    def run(item):
        (lo, hi), mult = item
        return _residue_block_sum(coprime, m, q, lo, hi), mult

    results = _map(run, work, workers)
    re = math.fsum(v.real * k for v, k in results)
    im = math.fsum(v.imag * k for v, k in results)
    return complex(re, im)


def complete_sum(q: int, a: int) -> complex:
    """sum over n mod q coprime to q of e(a n̄² / q)."""
    return incomplete_invsq_sum(q - 1, q, a)


def gauss_magnitude_error(q: int, a: int) -> float:
    """| |complete_sum + 1| - sqrt(q) |, which vanishes for prime q."""
    return abs(abs(complete_sum(q, a) + 1) - math.sqrt(q))


def _map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Bernoulli differences


def b2_difference(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """B_2(x + t) - B_2(x) for x in [0, 1), t >= 0.

    For x + t < 1 this is t (x - 1/2 + t/2), free of cancellation; otherwise
    the periodic closed form is used.
    """
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    small = x + t < 1.0
    out = t * (x - 0.5 + t / 2)
    if not np.all(small):
        xb, tb = x[~small], t[~small]
        y = xb + (tb - np.floor(tb))
        y = y - np.floor(y)
        out[~small] = (y * y / 2 - y / 2) - (xb * xb / 2 - xb / 2)
    return out


def b2_fourier(x, harmonics: int) -> np.ndarray:
    """Partial Fourier series sum_{1 <= |h| <= H} e(h x) / (4 pi^2 h^2) of B_2.

    Differs from the closed form by at most 1/(2 pi^2 H) everywhere.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    for h in range(harmonics, 0, -1):
        out += np.cos(2 * math.pi * h * x) / (2 * math.pi**2 * h * h)
    return out


def _delta_block(Y2: float, coprime, m, q, lo, hi, weights=None, extra_keep=None) -> float:
    n = np.arange(lo, hi, dtype=np.int64)
    r = n % q
    keep = coprime[r]
    if extra_keep is not None:
        keep &= extra_keep(n)
    if weights is not None:
        w = weights(lo, hi)
        keep &= w != 0
        w = w[keep]
    n, r = n[keep], r[keep]
    x = m[r].astype(np.float64) / q
    nf = n.astype(np.float64)
    d = b2_difference(x, Y2 / (nf * nf))
    if weights is not None:
        d = d * w
    return float(np.sum(d))


def _blocked(total: int, fn, workers: int) -> float:
    bounds = [(lo, min(lo + BLOCK, total + 1)) for lo in range(1, total + 1, BLOCK)]
    return math.fsum(_map(lambda b: fn(*b), bounds, workers))


def a_sum(Y: float, q: int, a: int, budget: TruncationBudget | None = None, *,
          workers: int = 1) -> float:
    """A(Y; q, a) = sum_{n >= 1, (n, q) = 1} [B_2(Y²/n² + a n̄²/q) - B_2(a n̄²/q)], truncated.

    Without a budget the cutoff is chosen for tail bound 1e-6 (capacity
    error if that needs more than 10**9 terms).
    """
    a, q = _check_unit(a, q)
    Y = float(Y)
    if not Y > 0:
        raise DomainError("Y must be positive")
    if Y > 1e6:
        raise DomainError("Y <= 10**6 required")
    if budget is None:
        budget = a_sum_budget(Y, tolerance=1e-6)
    coprime, m = _phases(a, q)
    Y2 = Y * Y
    return _blocked(budget.cutoff, lambda lo, hi: _delta_block(Y2, coprime, m, q, lo, hi), workers)


def _check_r(q: int, r: int) -> int:
    r = int(r)
    if r == 0 or not is_squarefree(r):
        raise DomainError(f"r={r} must be nonzero and squarefree")
    if math.gcd(q, r) != 1:
        raise DomainError(f"gcd(q={q}, r={r}) != 1")
    return r


def b_sum(D: float, q: int, a: int, r: int, budget: TruncationBudget | None = None, *,
          workers: int = 1) -> float:
    """B(D; q, a; r) = sum_{(d, q r) = 1} h(d) [B_2(D²/d² + a d̄²/q) - B_2(a d̄²/q)], truncated."""
    a, q = _check_unit(a, q)
    r = _check_r(q, r)
    D = float(D)
    if D < 0:
        raise DomainError("D must be non-negative")
    if D == 0:
        return 0.0
    if budget is None:
        budget = b_sum_budget(D, tolerance=1e-6)
    coprime, m = _phases(a, q)
    rprimes = factorize(abs(r)).primes

    def coprime_to_r(n):
        keep = np.ones(n.size, dtype=bool)
        for p in rprimes:
            keep &= n % p != 0
        return keep

    D2 = D * D
    return _blocked(
        budget.cutoff,
        lambda lo, hi: _delta_block(D2, coprime, m, q, lo, hi, weights=h_array, extra_keep=coprime_to_r),
        workers,
    )


# ---------------------------------------------------------------------------
# G via the beta-convolution


@dataclass(frozen=True)
class GTerm:
    rho: int
    sigma: int
    tau: int
    m: int
    coeff: float
    Z: float
    residue: int
    cutoff: int

    @property
    def tail(self) -> float:
        return abs(self.coeff) * self.Z * self.Z / (2.0 * self.cutoff)


@dataclass(frozen=True)
class GPlan:
    """Terms of the quadruple sum for G(Y; q, s; r) and their tail bounds."""

    Y: float
    q: int
    s: int
    r: int
    budget: TruncationBudget
    terms: tuple[GTerm, ...] = field(repr=False)


def _g_outer_tail(Y: float, r: int, M: int) -> float:
    # sum over omitted m > M of |coeff| (pi^2/12) Z^2, Z^2 = Y/(rho sigma tau^2 m^2)
    weight = 0.0
    for rho, sigma in rho_sigma_pairs(r):
        for tau in divisors(r):
            weight += abs(float(kappa_value(rho))) / (tau * tau)
    return (math.pi**2 / 12) * Y * weight / (c2_constant() * M)


def g_plan(Y: float, q: int, s: int, r: int, *, cutoff: int, m_cutoff: int) -> GPlan:
    """Enumerate the terms of G(Y; q, s; r) for n-cutoff ``cutoff`` and m-cutoff ``m_cutoff``.

    Each A(Z) gets its own cutoff max(64, ceil(cutoff Z²/Y)), so every term
    drops at most |coeff| Y / (2 cutoff) before weighting by Z²/Y.
    """
    q, s = int(q), int(s)
    if not is_prime(q):
        raise DomainError(f"q={q} must be prime")
    r = _check_r(q, r)
    if (r * s) % q == 0:
        raise HypothesisError(f"q={q} divides r*s={r * s}")
    Y = float(Y)
    if Y < 0:
        raise DomainError("Y must be non-negative")
    cutoff, m_cutoff = int(cutoff), int(m_cutoff)
    if cutoff > MAX_CUTOFF or m_cutoff > MAX_CUTOFF:
        raise CapacityError("cutoff beyond 10**9")
    qr = q * abs(r)
    terms = []
    if Y > 0:
        pairs = [(rho, sigma, float(kappa_value(rho)) * mobius(sigma)) for rho, sigma in rho_sigma_pairs(r)]
        taus = [(tau, mobius(tau)) for tau in divisors(r)]
        for mm in range(1, m_cutoff + 1):
            if math.gcd(mm, qr) != 1:
                continue
            beta = beta_value(mm)
            if beta == 0:
                continue
            for rho, sigma, ks in pairs:
                for tau, mt in taus:
                    if mt == 0:
                        continue
                    k = rho * sigma * tau * tau * mm * mm
                    Z2 = Y / k
                    coeff = ks * mt * rho * sigma * float(beta)
                    n_cut = max(MIN_TERM_CUTOFF, math.ceil(cutoff * Z2 / Y))
                    residue = (pow(k, -1, q) * s) % q
                    terms.append(GTerm(rho, sigma, tau, mm, coeff, math.sqrt(Z2), residue, n_cut))
    inner = math.fsum(t.tail for t in terms)
    outer = _g_outer_tail(Y, r, m_cutoff)
    tail = inner + outer
    budget = TruncationBudget(tail, cutoff, tail, outer_cutoff=m_cutoff)
    return GPlan(Y, q, s, r, budget, tuple(terms))


def g_sum_budget(Y: float, q: int, s: int, r: int, *, cutoff: int, m_cutoff: int) -> TruncationBudget:
    return g_plan(Y, q, s, r, cutoff=cutoff, m_cutoff=m_cutoff).budget


def g_sum(Y: float, q: int, s: int, r: int, budget: TruncationBudget | None = None, *,
          workers: int = 1) -> float:
    """G(Y; q, s; r) through the beta-convolution quadruple sum of A values.

    ``budget`` must come from :func:`g_sum_budget` (its ``cutoff`` and
    ``outer_cutoff`` are reused); default cutoff 10**6, m-cutoff 2000.
    """
    if budget is None:
        plan = g_plan(Y, q, s, r, cutoff=10**6, m_cutoff=2000)
    else:
        plan = g_plan(Y, q, s, r, cutoff=budget.cutoff, m_cutoff=max(1, budget.outer_cutoff))
    tables = {}

    def term_value(t: GTerm) -> float:
        if t.Z == 0:
            return 0.0
        coprime, m = tables[t.residue]
        Z2 = t.Z * t.Z
        total = _blocked(t.cutoff, lambda lo, hi: _delta_block(Z2, coprime, m, plan.q, lo, hi), 1)
        return t.coeff * total

    # phase tables are filled serially first so worker threads only read them
    for t in plan.terms:
        if t.residue not in tables:
            tables[t.residue] = _phases(t.residue, plan.q)
    values = _map(term_value, list(plan.terms), workers)
    return math.fsum(values)


def g_sum_via_b(Y: float, q: int, s: int, r: int, *, cutoff: int) -> float:
    """G(Y; q, s; r) = sum_{rho sigma | r^2} kappa(rho) mu(sigma) rho sigma B(sqrt(Y/(rho sigma)); q, conj(rho sigma) s; r).

    An independent route to :func:`g_sum` through the h-weighted sum.
    """
    q, r, s = int(q), int(r), int(s)
    total = []
    for rho, sigma in rho_sigma_pairs(r):
        k = rho * sigma
        coeff = float(kappa_value(rho)) * mobius(sigma) * k
        D = math.sqrt(Y / k)
        a = (pow(k, -1, q) * s) % q
        total.append(coeff * b_sum(D, q, a, r, b_sum_budget(D, cutoff=cutoff)))
    return math.fsum(total)


# ---------------------------------------------------------------------------
# The completed sum written through G


@dataclass(frozen=True)
class SigmaIdentity:
    exact: float
    via_g: float
    bound: float

    @property
    def discrepancy(self) -> float:
        return abs(self.exact - self.via_g)


def sigma_prime_via_g(X: float, q: int, s: int, r: int, *, cutoff: int = 10**6, m_cutoff: int = 2000,
                      d_cutoff: int = 10**5, workers: int = 1) -> tuple[float, float]:
    """lambda(q,r) X²/q - (q/r){G(X/q) - G((1-r)X/q) + G(-rX/q)}, all G at residue -s.

    Valid for r < 0 (all three arguments positive). Returns the value and a
    bound on its truncation error.
    """
    r = int(r)
    if r >= 0:
        raise DomainError("the G representation is implemented for r < 0")
    X = float(X)
    dsum, dtail = lambda_d_sum(q, r, d_cutoff)
    rs = float(rho_sigma_sum(r))
    main = rs * dsum * X * X / q
    bound = abs(rs) * dtail * X * X / q
    gs = []
    for sign, Y in ((1, X / q), (-1, (1 - r) * X / q), (1, -r * X / q)):
        budget = g_sum_budget(Y, q, -s, r, cutoff=cutoff, m_cutoff=m_cutoff)
        gs.append(sign * g_sum(Y, q, -s, r, budget, workers=workers))
        bound += abs(q / r) * budget.tail_bound
    value = main - (q / r) * math.fsum(gs)
    return value, bound


# ---------------------------------------------------------------------------
# Decay of incomplete sums


@dataclass(frozen=True)
class DecayRow:
    q: int
    epsilon: float
    N: int
    a: int
    abs_sum: float

    @property
    def ratio(self) -> float:
        return self.abs_sum / self.N if self.N else 0.0


@dataclass
class DecayReport:
    rows: list[DecayRow]

    def summary(self) -> list[tuple[int, float, int, float, float]]:
        """(q, epsilon, N, max ratio, mean ratio) per (q, epsilon)."""
        groups: dict[tuple[int, float], list[DecayRow]] = {}
        for row in self.rows:
            groups.setdefault((row.q, row.epsilon), []).append(row)
        out = []
        for (q, eps), rows in groups.items():
            ratios = [r.ratio for r in rows]
            out.append((q, eps, rows[0].N, max(ratios), math.fsum(ratios) / len(ratios)))
        return out


def sample_units(q: int, count: int, seed: int = 0) -> list[int]:
    """``count`` distinct residues coprime to q, reproducible from (seed, q)."""
    rng = np.random.default_rng([seed, q])
    out: list[int] = []
    seen = set()
    limit = min(count, sum(1 for a in range(1, q) if math.gcd(a, q) == 1)) if q < 10**4 else count
    while len(out) < limit:
        a = int(rng.integers(1, q))
        if a not in seen and math.gcd(a, q) == 1:
            seen.add(a)
            out.append(a)
    return out


def decay_scan(q_list, exponents, a_samples: int, *, seed: int = 0, workers: int = 1) -> DecayReport:
    """|sum_{n <= N} e(a n̄²/q)| / N at N = ceil(q^epsilon); observational only."""
    rows = []
    for q in q_list:
        q = int(q)
        if q > 10**7:
            raise CapacityError(f"q={q} exceeds 10**7")
        units = sample_units(q, a_samples, seed)
        for eps in exponents:
            N = math.ceil(q ** float(eps))
            for a in units:
                rows.append(DecayRow(q, float(eps), N, a, abs(incomplete_invsq_sum(N, q, a, workers=workers))))
    return DecayReport(rows)
