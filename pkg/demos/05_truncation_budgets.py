"""
Bernoulli-difference sums and their truncation budgets
======================================================

A(Y; q, a), B(D; q, a; r) and G(Y; q, s; r) are infinite sums. Each is cut
off with a proven bound on what was dropped, and doubling the cutoff never
moves the value by more than that bound. For r < 0 the completed sum
frak-S' is recovered from three G values plus a main term.
"""

from sqlab.expsum import (
    a_sum,
    a_sum_budget,
    b_sum,
    b_sum_budget,
    g_sum,
    g_sum_budget,
    g_sum_via_b,
    sigma_prime_via_g,
)
from sqlab.pairstats import big_sigma_prime

Y, q, a = 50.0, 101, 1
for T in (10**4, 10**5, 10**6):
    b = a_sum_budget(Y, cutoff=T)
    print(f"A({Y}; {q}, {a}) with T={T:>8d}: {a_sum(Y, q, a, b):+.8f}   tail <= {b.tail_bound:.2e}")

D = 30.0
b = b_sum_budget(D, cutoff=10**6)
print(f"B({D}; {q}, 1; -1) = {b_sum(D, q, 1, -1, b):+.8f}   tail <= {b.tail_bound:.2e}")

Y, s, r = 20.0, 3, -2
budget = g_sum_budget(Y, 103, s, r, cutoff=10**5, m_cutoff=2000)
print(f"G({Y}; 103, {s}; {r}) = {g_sum(Y, 103, s, r, budget):+.8f} (tail <= {budget.tail_bound:.2e}),"
      f" via B: {g_sum_via_b(Y, 103, s, r, cutoff=10**5):+.8f}")

for X, q, s, r in [(5000, 101, 5, -1), (10**4, 53, 3, -2)]:
    exact = big_sigma_prime(X, q, r, s)
    value, bound = sigma_prime_via_g(X, q, s, r, cutoff=10**5, m_cutoff=500, d_cutoff=10**4)
    print(f"frak-S'({X}, {q}, r={r}, s={s}): exact {exact:.6f}, via G {value:.6f}, "
          f"|diff| {abs(exact - value):.2e} <= bound {bound:.2e}")
