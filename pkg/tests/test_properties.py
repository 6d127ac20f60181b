"""Property-based checks of the invariants, driven by hypothesis."""

import math
from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from sqlab.apstats import AffineMap, correlation, error_vector, full_correlation, decomposition_rhs, s_gamma
from sqlab.arith import bernoulli, divisors, factorize, is_prime, mod_inverse, mult_eval
from sqlab.expsum import b2_difference, incomplete_invsq_sum
from sqlab.localdensity import beta_value, f_density, h_value, kappa_value, u_p, u_p_bruteforce
from sqlab.pairstats import interval_length, pair_count_S
from sqlab.sieve import SqfreeSegment, read_segment, sieve_squarefree, write_segment

from conftest import trial_squarefree

PRIMES = [p for p in range(2, 200) if is_prime(p)]
SQFREE_R = [r for r in range(-30, 31) if r != 0 and mult_eval("mu2", abs(r)) == 1]
fast = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@fast
@given(st.integers(1, 2**62))
def test_factorize_reconstructs(n):
    fac = factorize(n)
    assert math.prod(p**e for p, e in fac) == n
    assert all(is_prime(p) for p in fac.primes)


@fast
@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_multiplicativity(m, n):
    assume(math.gcd(m, n) == 1)
    for kind in ("mu", "mu2", "d", "d3"):
        assert mult_eval(kind, m * n) == mult_eval(kind, m) * mult_eval(kind, n)
    assert h_value(m * n) == h_value(m) * h_value(n)
    assert kappa_value(m * n) == kappa_value(m) * kappa_value(n)


@fast
@given(st.integers(1, 3000))
def test_h_is_sum_of_beta(d):
    assert sum((beta_value(m) for m in divisors(d)), Fraction(0)) == h_value(d)


@fast
@given(st.integers(-10**9, 10**9), st.sampled_from(PRIMES))
def test_mod_inverse_property(a, q):
    assume(a % q)
    inv = mod_inverse(a, q)
    assert 1 <= inv < q and (a * inv) % q == 1


@fast
@given(st.floats(-1e6, 1e6, allow_nan=False), st.integers(-50, 50))
def test_bernoulli_periodic_and_floor(x, k):
    # B_1 jumps at integers; x + k may round onto the jump
    if abs(x - round(x)) > 1e-6:
        assert abs(bernoulli(1, x + k) - bernoulli(1, x)) < 1e-6
    assert abs(math.floor(x) - (x - 0.5 - bernoulli(1, x))) < 1e-9 * max(1.0, abs(x))


@fast
@given(st.integers(1, 10**9), st.integers(1, 3000), st.integers(1, 3000))
def test_segment_join(lo, n1, n2):
    a, b = sieve_squarefree(lo, lo + n1), sieve_squarefree(lo + n1, lo + n1 + n2)
    assert a.join(b) == sieve_squarefree(lo, lo + n1 + n2)


@fast
@given(st.integers(1, 5000), st.integers(1, 200))
def test_segment_vs_trial(lo, n):
    seg = sieve_squarefree(lo, lo + n)
    assert seg.values().tolist() == [m for m in range(lo, lo + n) if trial_squarefree(m)]


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, 10**6), st.lists(st.booleans(), min_size=1, max_size=300))
def test_cache_file_roundtrip(tmp_path_factory, lo, bits):
    seg = SqfreeSegment.from_mask(lo, np.array(bits))
    path = tmp_path_factory.mktemp("rt") / "s.bin"
    write_segment(path, seg)
    back = read_segment(path)
    assert back == seg and back.to_mask().tolist() == bits


@fast
@given(st.sampled_from(PRIMES[:12]), st.integers(-10**4, 10**4), st.sampled_from(SQFREE_R))
def test_u_p_case_table(p, l, r):
    assume(l != 0)
    assert u_p(p, l, r) == u_p_bruteforce(p, l, r)


@fast
@given(st.integers(-10**6, 10**6), st.sampled_from(SQFREE_R))
def test_density_positive_and_bounded(l, r):
    assume(l != 0)
    f = f_density(l, r)
    assert 0 < f.approx < 1
    assert f.rational_part == f_density(-l, r).rational_part


@fast
@given(st.floats(0.5, 1e4), st.integers(-10**5, 10**5), st.sampled_from(SQFREE_R))
def test_interval_length_bounds(X, l, r):
    L = interval_length(X, l, r)
    assert 0 <= L <= X
    if abs(l) > (abs(r) + 1) * X:
        assert L == 0


@fast
@given(st.integers(2, 400), st.integers(-1500, 1500), st.sampled_from([-3, -2, -1, 1, 2, 5]))
def test_pair_count_brute(X, l, r):
    brute = sum(1 for n in range(1, X) if 0 < r * n + l < X and trial_squarefree(n) and trial_squarefree(r * n + l))
    assert pair_count_S(X, l, r) == brute


@fast
@given(st.floats(0, 1, exclude_max=True), st.floats(0, 100))
def test_b2_difference_bounds(x, t):
    d = float(b2_difference(np.array([x]), np.array([t]))[0])
    assert abs(d) <= min(t / 2, 1 / 8) + 1e-12


@fast
@given(st.integers(0, 5000), st.sampled_from(PRIMES[1:]), st.integers(1, 10**6))
def test_invsq_sum_bounds_and_conjugation(N, q, a):
    assume(a % q)
    z = incomplete_invsq_sum(N, q, a)
    assert abs(z) <= N + 1e-9
    assert abs(z - incomplete_invsq_sum(N, q, -a % q).conjugate()) <= 1e-9


_EVS = {}


def _ev(X, q):
    if (X, q) not in _EVS:
        _EVS[X, q] = error_vector(X, q)
    return _EVS[X, q]


@fast
@given(st.sampled_from([(10**4, 101), (5 * 10**4, 97), (2 * 10**4, 7)]), st.integers(-50, 50),
       st.integers(-10**4, 10**4), st.integers(-5, 5))
def test_correlation_invariants(xq, r, s, t):
    X, q = xq
    assume(r % q and (r * s) % q)
    ev = _ev(X, q)
    g = AffineMap(r, s)
    assert correlation(ev, g) == correlation(ev, AffineMap(r, s + q * t))
    lhs, rhs = full_correlation(ev, g), decomposition_rhs(ev, g)
    assert abs(lhs - rhs) <= 1e-6 * max(1, s_gamma(ev, g))
