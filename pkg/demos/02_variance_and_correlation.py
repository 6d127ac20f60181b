"""
Variance and affine correlations of the error terms
===================================================

For q near X^(4/5) the variance V = sum_a E(X, q, a)^2 grows like sqrt(Xq).
The correlation C[gamma] pairs E(a) with E(r a + s); the interesting case is
r = -1, where s = 0 gives a persistent correlation and s != 0 should be
smaller. The exact identity

    sum_a E(a) E(gamma a) = S[gamma] - 2 C(q) (X/q) Q(X) + C(q)^2 X^2 / q

holds to rounding error, and S[gamma] is well predicted by the completed
sum frak-S built from local densities.
"""

import math

from sqlab.apstats import AffineMap, correlation, decomposition_rhs, error_vector, full_correlation, variance
from sqlab.arith import nearest_prime
from sqlab.localdensity import cq_constant
from sqlab.pairstats import big_sigma

for X in (10**5, 10**6, 10**7):
    q = nearest_prime(X**0.8)
    ev = error_vector(X, q)
    V = variance(ev)
    print(f"X={X:>9d} q={q:>7d}  V/sqrt(Xq) = {V / math.sqrt(X * q):.4f}")

X = 10**7
q = nearest_prime(X**0.8)
ev = error_vector(X, q)
V = variance(ev)
print(f"\nX={X}, q={q}, r=-1")
for s in range(0, 6):
    g = AffineMap(-1, s)
    C = correlation(ev, g, require_hypothesis=s != 0)
    line = f"  s={s}: C/V = {C / V:+.4f}"
    if s:
        # replace S[gamma] by frak-S in the exact identity to predict the full sum
        cq = cq_constant(q)
        predicted = big_sigma(X, q, -1, s) - 2 * cq * X / q * ev.total + cq * cq * X * X / q
        line += f"   full sum / V = {full_correlation(ev, g) / V:+.4f}, predicted from frak-S {predicted / V:+.4f}"
        line += f"   identity residual {abs(full_correlation(ev, g) - decomposition_rhs(ev, g)):.2e}"
    print(line)
