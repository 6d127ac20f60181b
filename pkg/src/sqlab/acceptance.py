"""Exit criteria for the whole laboratory, shared by the test suite and ``sqlab selftest``.

Each criterion returns a :class:`CriterionResult`. ``measured`` and
``tolerance`` are deterministic numbers, so the CSV written by
:func:`results_csv` is byte-identical however many workers computed it.
Wall-clock time is kept on the result for the runtime limits but never
written to the CSV.
"""

from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import median

import numpy as np

from . import __version__
from .apstats import AffineMap, correlation, decomposition_rhs, error_vector, full_correlation, s_gamma, variance
from .arith import divisors, factorize, is_prime, mult_eval, nearest_prime, primes_up_to
from .expsum import (
    a_sum,
    a_sum_budget,
    b_sum,
    b_sum_budget,
    g_sum,
    g_sum_budget,
    gauss_magnitude_error,
)
from .localdensity import beta_value, h_value, rho_sigma_product, rho_sigma_sum, u_p, u_p_bruteforce
from .pairstats import big_sigma, sigma_main_term, verify_pair_density
from .sieve import count_squarefree

CSV_HEADER = "criterion,name,status,measured,tolerance"


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""
    seconds: float = field(default=0.0, compare=False)
    time_limit: float | None = None

    @property
    def status(self) -> str:
        return "pass" if self.passed else "FAIL"

    def line(self) -> str:
        limit = f", limit {self.time_limit:.0f}s" if self.time_limit else ""
        return (f"[{self.status}] criterion {self.number:2d} {self.name}: measured={self.measured:.6g} "
                f"tolerance={self.tolerance:.6g} ({self.seconds:.1f}s{limit}) {self.detail}")


def _timed(number: int, name: str, limit: float | None, fn) -> CriterionResult:
    t0 = time.perf_counter()
    passed, measured, tol, detail = fn()
    elapsed = time.perf_counter() - t0
    ok = passed and (limit is None or elapsed < limit)
    if passed and not ok:
        detail = (detail + f" runtime over {limit:.0f}s").strip()
    return CriterionResult(number, name, ok, float(measured), float(tol), detail, elapsed, limit)


DECOMPOSITION_CASES = ((10**5, 101, -1, 7), (10**6, 997, 2, 5), (10**6, 1009, -1, 1))


def criterion_1(workers: int = 1) -> CriterionResult:
    def run():
        worst = 0.0
        for X, q, r, s in DECOMPOSITION_CASES:
            t0 = time.perf_counter()
            ev = error_vector(X, q, workers=workers)
            g = AffineMap(r, s)
            lhs = full_correlation(ev, g)
            rhs = decomposition_rhs(ev, g)
            rel = abs(lhs - rhs) / max(1.0, abs(s_gamma(ev, g)))
            if time.perf_counter() - t0 >= 30:
                return False, rel, 1e-6, f"case {(X, q, r, s)} over 30s"
            worst = max(worst, rel)
        return worst <= 1e-6, worst, 1e-6, "max |sum E E(gamma) - rhs| / max(1, S)"

    return _timed(1, "exact decomposition", 90, run)


def criterion_2(workers: int = 1) -> CriterionResult:
    def run():
        worst = 0.0
        worst_odd = 0.0
        count = 0
        for q in primes_up_to(2000).tolist():
            for a in range(1, min(50, q - 1) + 1):
                err = gauss_magnitude_error(q, a) / math.sqrt(q)
                worst = max(worst, err)
                if q > 2:
                    worst_odd = max(worst_odd, err)
                count += 1
        # q = 2 is included as stated: there the sum is e(1/2) = -1, so |sum + 1| = 0, not sqrt(2)
        return worst <= 1e-9, worst, 1e-9, f"{count} (q, a) pairs; odd primes only: {worst_odd:.3g}"

    return _timed(2, "Gauss magnitude", 60, run)


U_P_RS = (1, -1, 2, -2, 3, -3, 5, -5, 6, -6, 7, -7, 10, -10)


def criterion_3(workers: int = 1) -> CriterionResult:
    def run():
        bad = 0
        total = 0
        for p in primes_up_to(97).tolist():
            for r in U_P_RS:
                for l in range(-500, 501):
                    if l == 0:
                        continue
                    total += 1
                    if u_p(p, l, r) != u_p_bruteforce(p, l, r):
                        bad += 1
        return bad == 0, bad, 0, f"{total} grid points"

    return _timed(3, "local-count oracle", 60, run)


def _is_cubefree(m: int) -> bool:
    return all(e < 3 for _, e in factorize(m))


def criterion_4(workers: int = 1) -> CriterionResult:
    def run():
        beta = {m: beta_value(m) for m in range(1, 10**4 + 1)}
        bad = 0
        for d in range(1, 5001):
            if sum((beta[m] for m in divisors(d)), Fraction(0)) != h_value(d):
                bad += 1
        nonzero = sum(1 for m, b in beta.items() if not _is_cubefree(m) and b != 0)
        return bad == 0 and nonzero == 0, bad + nonzero, 0, "convolution mismatches + nonzero beta off cubefree"

    return _timed(4, "convolution exactness", 10, run)


def criterion_5(workers: int = 1) -> CriterionResult:
    def run():
        bad = 0
        checked = 0
        for r in range(1, 51):
            if mult_eval("mu2", r) != 1:
                continue
            checked += 1
            if rho_sigma_sum(r) != rho_sigma_product(r):
                bad += 1
        return bad == 0, bad, 0, f"{checked} squarefree r"

    return _timed(5, "rho-sigma identity", None, run)


def criterion_6(workers: int = 1) -> CriterionResult:
    def run():
        rep = verify_pair_density(10**7, 1, range(1, 101), workers=workers)
        worst = rep.max_rel_dev
        return worst <= 0.005, worst, 0.005, "max relative deviation, X=1e7, r=1, l=1..100"

    return _timed(6, "pair density desk check", 120, run)


def criterion_7(workers: int = 1) -> CriterionResult:
    def run():
        X, q, r, s = 10**6, 1009, -1, 1
        sig = big_sigma(X, q, r, s, workers=workers)
        main = sigma_main_term(X, q)
        rel = abs(sig - main) / main
        return rel <= 1e-3, rel, 1e-3, "|sigma - Lambda X^2/q| / (Lambda X^2/q)"

    return _timed(7, "completed sum main term", 120, run)


def criterion_8(workers: int = 1) -> CriterionResult:
    def run():
        worst = 0.0
        for X in (10**4, 10**5, 10**6, 10**7, 10**8):
            Q = count_squarefree(X, workers=workers)
            worst = max(worst, abs(Q - 6 / math.pi**2 * X) / math.sqrt(X))
        q100 = count_squarefree(100)
        return worst <= 1 and q100 == 61, worst, 1, f"max |Q - 6X/pi^2|/sqrt(X); Q(100)={q100}"

    return _timed(8, "squarefree counting", 120, run)


def variance_ratio(X: int, workers: int = 1) -> tuple[int, float]:
    q = nearest_prime(X**0.8)
    ev = error_vector(X, q, workers=workers)
    return q, variance(ev) / math.sqrt(X * q)


def criterion_9(workers: int = 1) -> CriterionResult:
    def run():
        q1, r1 = variance_ratio(10**6, workers)
        q2, r2 = variance_ratio(10**7, workers)
        spread = abs(r1 - r2) / min(r1, r2)
        return spread <= 0.25, spread, 0.25, f"V/sqrt(Xq): {r1:.6f} (q={q1}), {r2:.6f} (q={q2})"

    return _timed(9, "variance stability", None, run)


def criterion_10(workers: int = 1) -> CriterionResult:
    def run():
        X = 10**7
        q = nearest_prime(X**0.8)
        ev = error_vector(X, q, workers=workers)
        V = variance(ev)
        base = abs(correlation(ev, AffineMap(-1, 0), require_hypothesis=False)) / V
        others = [abs(correlation(ev, AffineMap(-1, s))) / V for s in (1, 2, 3)]
        each_smaller = all(o < base for o in others)
        med = median(others)
        passed = each_smaller and med <= base / 3
        detail = f"|C/V| s=0: {base:.4f}; s=1,2,3: " + ", ".join(f"{o:.4f}" for o in others)
        return passed, med / base, 1 / 3, detail

    return _timed(10, "independence probe", 300, run)


def truncation_samples(count: int = 50, seed: int = 2024) -> list[tuple[float, int, int, int, int]]:
    """(Y, q, a, r, s) samples: Y in [1, 1000], q prime, a a unit, r squarefree, q not dividing r s."""
    rng = np.random.default_rng(seed)
    primes = [p for p in primes_up_to(2000).tolist() if p > 3]
    rs = (-1, 1, -2, 2, -3, 3)
    out = []
    while len(out) < count:
        Y = float(rng.uniform(1.0, 1000.0))
        q = int(rng.choice(primes))
        a = int(rng.integers(1, q))
        r = int(rng.choice(rs))
        s = int(rng.integers(1, q))
        out.append((Y, q, a, r, s))
    return out


def criterion_11(workers: int = 1) -> CriterionResult:
    def run():
        worst = 0.0
        T = 1 << 13
        for Y, q, a, r, s in truncation_samples():
            b1 = a_sum_budget(Y, cutoff=T)
            b2 = a_sum_budget(Y, cutoff=2 * T)
            change = abs(a_sum(Y, q, a, b2, workers=workers) - a_sum(Y, q, a, b1, workers=workers))
            worst = max(worst, change / b1.tail_bound)
            b1 = b_sum_budget(Y, cutoff=T)
            b2 = b_sum_budget(Y, cutoff=2 * T)
            change = abs(b_sum(Y, q, a, r, b2, workers=workers) - b_sum(Y, q, a, r, b1, workers=workers))
            worst = max(worst, change / b1.tail_bound)
            Yg = Y / 10
            g1 = g_sum_budget(Yg, q, s, r, cutoff=T, m_cutoff=32)
            g2 = g_sum_budget(Yg, q, s, r, cutoff=2 * T, m_cutoff=64)
            change = abs(g_sum(Yg, q, s, r, g2, workers=workers) - g_sum(Yg, q, s, r, g1, workers=workers))
            worst = max(worst, change / g1.tail_bound)
        return worst <= 1.0, worst, 1.0, "max change / reported tail bound over a, b, g sums"

    return _timed(11, "truncation honesty", None, run)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_criteria(numbers=None, workers: int = 1) -> list[CriterionResult]:
    numbers = sorted(numbers or CRITERIA)
    return [CRITERIA[n](workers) for n in numbers]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def results_csv(results: list[CriterionResult], invocation: str = "sqlab selftest") -> str:
    buf = io.StringIO()
    buf.write(f"# {invocation} (sqlab {__version__})\n")
    buf.write(CSV_HEADER + "\n")
    for r in results:
        buf.write(f"{r.number},{r.name},{r.status},{_fmt(r.measured)},{_fmt(r.tolerance)}\n")
    return buf.getvalue()


def criterion_12(results_by_workers: dict[int, list[CriterionResult]]) -> CriterionResult:
    """Compare selftest CSV bodies computed with different worker counts."""
    t0 = time.perf_counter()
    texts = {w: results_csv(res) for w, res in results_by_workers.items()}
    distinct = len(set(texts.values()))
    return CriterionResult(12, "determinism across workers", distinct == 1, distinct - 1, 0,
                           "workers " + ",".join(str(w) for w in sorted(texts)),
                           time.perf_counter() - t0)
