import math
import threading
from fractions import Fraction

import pytest

from sqlab.arith import divisors, factorize, mobius, primes_up_to
from sqlab.errors import DomainError
from sqlab.localdensity import (
    beta_by_convolution,
    beta_value,
    big_lambda,
    big_lambda_via_lambda,
    c2_constant,
    c2_partial_product,
    c2_tail_factor_bounds,
    cq_constant,
    f_density,
    f_density_euler,
    h_array,
    h_value,
    kappa_value,
    lambda_d_sum,
    lambda_factors,
    rho_sigma_pairs,
    rho_sigma_product,
    rho_sigma_sum,
    u_p,
    u_p_bruteforce,
)

C2 = 0.32263409893924466


def test_h_examples():
    assert h_value(1) == 1
    assert h_value(2) == 2
    assert h_value(4) == 0
    assert h_value(6) == Fraction(18, 7)


def test_h_array_matches_exact():
    vals = h_array(1, 3001)
    for d in range(1, 3001):
        assert vals[d - 1] == pytest.approx(float(h_value(d)), rel=1e-14)
    assert h_array(10**6, 10**6 + 50) == pytest.approx([float(h_value(d)) for d in range(10**6, 10**6 + 50)])


def test_beta_examples():
    assert beta_value(1) == 1
    assert beta_value(2) == 1
    assert beta_value(8) == 0


def test_beta_prime_rule_equals_convolution():
    for m in range(1, 1500):
        assert beta_value(m) == beta_by_convolution(m)


def test_convolution_identity_exact():
    beta = {m: beta_value(m) for m in range(1, 5001)}
    for d in range(1, 5001):
        assert sum(beta[m] for m in divisors(d)) == h_value(d)


def test_beta_bound_on_cubefree():
    for m in range(1, 10**4 + 1):
        fac = factorize(m)
        if any(e >= 3 for _, e in fac):
            assert beta_value(m) == 0
            continue
        a = math.prod(p for p, e in fac if e == 1)
        d_a = 2 ** sum(1 for _, e in fac if e == 1)
        assert abs(beta_value(m)) <= Fraction(3 * d_a, a * a)


def test_kappa_examples():
    assert kappa_value(1) == 1
    assert kappa_value(2) == Fraction(1, 3)
    assert kappa_value(4) == Fraction(2, 3)
    assert kappa_value(6) == Fraction(5, 24)
    assert kappa_value(8) == 0


def test_u_p_examples():
    assert u_p(3, 5, 1) == 2
    assert u_p(2, 4, 2) == 2
    assert u_p(2, 2, 2) == 3
    assert u_p_bruteforce(3, 5, 1) == 2
    assert u_p_bruteforce(2, 4, 2) == 2
    assert u_p_bruteforce(5, 1, 1) == 2
    with pytest.raises(DomainError):
        u_p(4, 1, 1)
    with pytest.raises(DomainError):
        u_p(3, 1, 4)
    with pytest.raises(DomainError):
        u_p(3, 0, 1)


def test_u_p_matches_scan_on_a_grid():
    # the full acceptance grid runs in test_acceptance; this is a quick slice
    for p in (2, 3, 5, 7, 11):
        for r in (1, -1, 2, -2, 3, -3, 5, -5, 6, -6, 7, -7, 10, -10):
            for l in range(-60, 61):
                if l:
                    assert u_p(p, l, r) == u_p_bruteforce(p, l, r)


def test_c2_value_and_bracket():
    assert c2_constant() == pytest.approx(C2, rel=1e-15)
    assert c2_constant(1e-10) == pytest.approx(0.3226340989, abs=1e-10)
    assert c2_partial_product(2) == 0.5
    parts = [c2_partial_product(P) for P in (10, 100, 1000, 10**5)]
    assert all(a > b for a, b in zip(parts, parts[1:]))
    for P in (100, 10**4, 10**6):
        low, high = c2_tail_factor_bounds(P)
        assert c2_partial_product(P) * low <= C2 <= c2_partial_product(P) * high


def test_c2_thread_safe_first_use():
    out = []
    threads = [threading.Thread(target=lambda: out.append(c2_constant(1e-13))) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(out)) == 1


def test_f_density_examples():
    f = f_density(1, 1)
    assert f.rational_part == 1 and f.includes_c2 and f.approx == pytest.approx(C2, rel=1e-12)
    assert f_density(4, 1).rational_part == Fraction(3, 2)
    assert f_density(2, 2).rational_part == Fraction(1, 2)
    with pytest.raises(DomainError):
        f_density(0, 1)


@pytest.mark.parametrize("r", [1, -1, 2, -2, 3, -6, 10])
def test_f_density_against_euler_product(r):
    # primes above P shift the product by the factor prod_{p > P}(1 - 2/p^2),
    # which lies in [exp(-3/P), 1]; at P = 10**5 that is ~1.6e-6 in practice
    low, _ = c2_tail_factor_bounds(10**5)
    for l in list(range(-30, 31)) + [72, -200, 300, 4 * 9 * 25]:
        if l == 0:
            continue
        exact = f_density(l, r).approx
        truncated = f_density_euler(l, r, 10**5)
        assert exact * (1 - 1e-12) <= truncated <= exact / low


@pytest.mark.parametrize("r", [1, -1, 2, -6])
def test_f_density_euler_to_1e_6(r):
    for l in (1, -1, 2, 4, -12, 72, 50, -98):
        assert f_density_euler(l, r, 10**6) == pytest.approx(f_density(l, r).approx, rel=1e-6)


def test_f_density_invariants():
    for l in range(1, 200):
        d = f_density(l, 3)
        assert d.approx == pytest.approx(float(d.rational_part) * C2, rel=1e-12)
        assert f_density(-l, 3).rational_part == d.rational_part


def test_cq():
    assert cq_constant(5) == pytest.approx(150 / (24 * math.pi**2), rel=1e-14)
    assert cq_constant(5) == pytest.approx(0.633257, abs=1e-6)


def test_rho_sigma_identity():
    assert rho_sigma_sum(2) == Fraction(3, 4) == rho_sigma_product(2)
    assert sorted(rho_sigma_pairs(2)) == [(1, 1), (1, 2), (2, 1), (2, 2), (4, 1)]
    for r in range(1, 51):
        if mobius(r) != 0:
            assert rho_sigma_sum(r) == rho_sigma_product(r)
            assert rho_sigma_sum(-r) == rho_sigma_product(r)


def test_big_lambda():
    assert big_lambda(5) == pytest.approx(0.368934, abs=1e-6)
    lam, Lam = lambda_factors(5, 2)
    assert Lam == big_lambda(5)
    for q in (101, 997):
        for r in (-1, 2, 6):
            assert big_lambda_via_lambda(q, r) == pytest.approx(big_lambda(q), rel=1e-8)
    with pytest.raises(DomainError):
        lambda_factors(5, 10)
    with pytest.raises(DomainError):
        lambda_factors(6, 1)


def test_lambda_tail_bound():
    full, _ = lambda_d_sum(101, 2, 10**5)
    part, tail = lambda_d_sum(101, 2, 50)
    assert tail < 3.1 / 50**3
    assert 0 <= full - part <= tail
