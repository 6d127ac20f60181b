"""
Counting squarefree numbers
===========================

Q(X), the number of squarefree n <= X, is close to 6X/pi^2 with an error
well below sqrt(X). Splitting the same count over residue classes mod q
gives the error terms E(X, q, a) studied in the later demos.
"""

import math
from pathlib import Path

import numpy as np

from sqlab.apstats import error_vector, trivial_bound_holds
from sqlab.sieve import count_squarefree, count_squarefree_mobius, sieve_squarefree
from sqlab.svg import Series, emit_svg

OUT = Path(__file__).with_name("out")
OUT.mkdir(exist_ok=True)

# the first few squarefree numbers, straight from the sieve
print("squarefree n <= 30:", sieve_squarefree(1, 31).values().tolist())

# segmented count against the Mobius-sum formula sum_d mu(d) floor(X/d^2)
xs = [10**k for k in range(2, 9)]
devs = []
for X in xs:
    Q = count_squarefree(X)
    assert Q == count_squarefree_mobius(X)
    dev = (Q - 6 * X / math.pi**2) / math.sqrt(X)
    devs.append(dev)
    print(f"X=1e{int(math.log10(X))}  Q={Q:>10d}  (Q - 6X/pi^2)/sqrt(X) = {dev:+.5f}")

# residue classes: counts mod q and their deviation from C(q) X / q
X, q = 10**6, 997
ev = error_vector(X, q)
print(f"\nX={X}, q={q}: main term {ev.main_term:.3f}, max |E| = {np.max(np.abs(ev.E)):.2f}, "
      f"trivial bound X/q + 1 = {X / q + 1:.2f}, holds: {trivial_bound_holds(ev)}")

emit_svg([Series("(Q - 6X/pi^2)/sqrt X", xs, devs)], OUT / "squarefree_counts.svg",
         title="normalised counting error", xlabel="X", ylabel="deviation / sqrt X", logx=True)
emit_svg([Series(f"E(1e6, {q}, a)", list(range(q)), ev.E.tolist())], OUT / "error_vector.svg",
         title="error terms by residue", xlabel="a", ylabel="E", lines=False)
