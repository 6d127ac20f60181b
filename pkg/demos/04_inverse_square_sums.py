"""
Exponential sums over inverse squares
=====================================

sum_{n <= N} e(a n^-2 / q). Over a full period the sum plus one is a
quadratic Gauss sum, of size exactly sqrt(q) for odd prime q. Shorter sums
cancel too; the decay scan records |sum| / N at N = q^epsilon.
"""

import math
from pathlib import Path

from sqlab.arith import primes_up_to
from sqlab.expsum import complete_sum, decay_scan, gauss_magnitude_error, incomplete_invsq_sum
from sqlab.svg import Series, emit_svg

OUT = Path(__file__).with_name("out")
OUT.mkdir(exist_ok=True)

print("sum_{n<=4} e(n^-2/5) =", incomplete_invsq_sum(4, 5, 1))
worst = max(gauss_magnitude_error(q, a) / math.sqrt(q) for q in primes_up_to(2000)[1:].tolist() for a in range(1, min(4, q)))
print(f"odd q <= 2000: max | |S + 1| - sqrt q | / sqrt q = {worst:.2e}")
print("q = 2 is different: S =", complete_sum(2, 1), "so |S + 1| = 0")

qs = [10007, 100003, 1000003]
eps = [0.2, 0.3, 0.4, 0.5, 0.6, 0.8]
rep = decay_scan(qs, eps, 6, seed=1)
series = []
for q in qs:
    rows = [(N, mx, mean) for qq, _, N, mx, mean in rep.summary() if qq == q]
    for N, mx, mean in rows:
        print(f"q={q:>8d} N={N:>7d}  max |S|/N = {mx:.4f}  mean = {mean:.4f}")
    series.append(Series(f"q={q}", [r[0] for r in rows], [r[1] for r in rows]))
emit_svg(series, OUT / "decay.svg", title="max |sum| / N at N = q^eps", xlabel="N", ylabel="ratio",
         logx=True, logy=True)
