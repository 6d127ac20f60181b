"""
Squarefree pairs n, r n + l
===========================

The number S(l, r) of n with n and r n + l both squarefree inside the window
I(X, l, r) is f(l, r) |I| up to a small error, where f is an Euler product
that collapses to C_2 times an exact rational.
"""

from pathlib import Path

from sqlab.localdensity import c2_constant, f_density, f_density_euler, big_lambda
from sqlab.pairstats import big_sigma, sigma_main_term, verify_pair_density
from sqlab.svg import Series, emit_svg

OUT = Path(__file__).with_name("out")
OUT.mkdir(exist_ok=True)

print(f"C_2 = {c2_constant():.17g}")
for l, r in [(1, 1), (4, 1), (2, 2), (12, -6), (72, 1)]:
    f = f_density(l, r)
    print(f"f({l}, {r}) = {f.rational_part} C_2 = {f.approx:.10f}   Euler product p <= 1e6: "
          f"{f_density_euler(l, r, 10**6):.10f}")

X = 10**7
rep = verify_pair_density(X, 1, range(1, 101))
print(f"\nX=1e7, r=1, l=1..100: max relative deviation {rep.max_rel_dev:.2e}, mean {rep.mean_rel_dev:.2e}")
worst = max(rep.rows, key=lambda row: abs(row.rel_dev))
print(f"worst l={worst.l}: S={worst.S}, f|I|={worst.main:.1f}")

emit_svg([Series("r = 1", [row.l for row in rep.rows], [row.rel_dev for row in rep.rows])],
         OUT / "pair_density.svg", title="S(l, 1) / (f |I|) - 1 at X = 1e7", xlabel="l", ylabel="relative deviation")

# summing f |I| over a residue class of l gives frak-S, close to Lambda X^2 / q
X, q = 10**6, 1009
for r, s in [(-1, 1), (2, 5), (-6, 7)]:
    sig = big_sigma(X, q, r, s)
    main = sigma_main_term(X, q)
    print(f"frak-S(1e6, {q}, r={r}, s={s}) = {sig:.6e}   Lambda X^2/q = {main:.6e}   rel {sig / main - 1:+.2e}")
print(f"Lambda({q}) = {big_lambda(q):.12f}")
