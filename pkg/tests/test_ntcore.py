import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from shiftprimes.ntcore import (
    FIVE_SIXTHS,
    HALF,
    GuardError,
    Modulus,
    alpha_window,
    alpha_window_from_ratio,
    checked_int64,
    divisors,
    euler_phi,
    factorize,
    is_prime,
    log_integral,
    moebius,
    theta_kappa,
)
from shiftprimes.sieve import prime_array


def naive_is_prime(n):
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


def test_factorize_examples():
    assert factorize(1).pairs == ()
    assert factorize(12).pairs == ((2, 2), (3, 1))
    assert factorize(101).pairs == ((101, 1),)


def test_factorize_rejects_out_of_range():
    with pytest.raises(ValueError):
        factorize(0)
    with pytest.raises(ValueError):
        factorize(2**63)


def test_factorize_roundtrip_up_to_a_million():
    for n in range(1, 10**6 + 1):
        f = factorize(n)
        assert f.value() == n
    # spot-check primality of the parts on a smaller range
    for n in range(1, 5000):
        assert all(naive_is_prime(p) for p in factorize(n).primes)


def test_factorize_roundtrip_random_63_bit():
    rng = random.Random(20240601)
    for _ in range(10**4):
        n = rng.randrange(1, 2**63)
        f = factorize(n)
        assert f.value() == n
        assert all(is_prime(p) for p in f.primes)


def test_factorize_semiprime_with_large_factors():
    p, q = 1_000_003, 999_999_937
    assert factorize(p * q).pairs == ((p, 1), (q, 1))
    assert factorize(2**61 - 1).pairs == ((2**61 - 1, 1),)


def test_is_prime_matches_trial_division():
    assert [n for n in range(200) if is_prime(n)] == [n for n in range(200) if naive_is_prime(n)]
    # strong pseudoprimes to several small bases
    for n in (2047, 1373653, 25326001, 3215031751, 2152302898747, 3474749660383, 341550071728321):
        assert not is_prime(n)


def test_phi_and_moebius_examples():
    assert [euler_phi(n) for n in (1, 101, 12)] == [1, 100, 4]
    assert [moebius(n) for n in (1, 12, 6)] == [1, 0, 1]
    assert euler_phi(12) == sum(1 for k in range(1, 13) if math.gcd(k, 12) == 1)


def test_divisors_examples():
    assert divisors(1) == [1]
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert divisors(101) == [1, 101]
    assert divisors(360) == [d for d in range(1, 361) if 360 % d == 0]


def test_moebius_and_phi_divisor_sums():
    n_max = 10**5
    mu_sum = np.zeros(n_max + 1, dtype=np.int64)
    phi_sum = np.zeros(n_max + 1, dtype=np.int64)
    mu = np.array([0] + [moebius(d) for d in range(1, n_max + 1)])
    phi = np.array([0] + [euler_phi(d) for d in range(1, n_max + 1)])
    for d in range(1, n_max + 1):
        mu_sum[d::d] += mu[d]
        phi_sum[d::d] += phi[d]
    assert mu_sum[1] == 1 and not mu_sum[2:].any()
    assert np.array_equal(phi_sum[1:], np.arange(1, n_max + 1))


def test_modulus_fields():
    m = Modulus.of(54)
    assert m.factorization.pairs == ((2, 1), (3, 3))
    assert m.phi == 18 and not m.cube_free and m.theta == FIVE_SIXTHS
    assert Modulus.of(12).theta == HALF and Modulus.of(1).cube_free
    assert Modulus.of(12) is Modulus.of(12)


def test_theta_kappa_examples():
    assert theta_kappa(12, 0) == (HALF, Fraction(1, 3))
    assert theta_kappa(8, Fraction(1, 6)) == (FIVE_SIXTHS, Fraction(2, 7))
    assert theta_kappa(1, 0) == (HALF, Fraction(1, 3))


@given(st.integers(1, 5000), st.fractions(0, 10))
def test_kappa_at_most_one_third(q, eps):
    theta, kappa = theta_kappa(q, eps)
    assert kappa <= Fraction(1, 3)
    assert (kappa == Fraction(1, 3)) == (theta == HALF and eps == 0)


def test_alpha_window_examples():
    w = alpha_window_from_ratio(0.3, HALF, Fraction(1, 20))
    assert w.lo == pytest.approx(0.165) and w.hi == pytest.approx(0.25) and not w.empty
    w = alpha_window_from_ratio(1 / 3, HALF, 0)
    assert w.lo == pytest.approx(1 / 6) and w.hi == pytest.approx(1 / 6) and not w.empty
    w = alpha_window_from_ratio(0.4, FIVE_SIXTHS, 0)
    assert w.lo == pytest.approx(1 / 3) and w.hi == pytest.approx(0.0) and w.empty


def test_alpha_window_from_modulus_uses_log_ratio():
    w = alpha_window(101, 101.0**3, 0)
    ref = alpha_window_from_ratio(1 / 3, HALF, 0)
    assert w.lo == pytest.approx(ref.lo) and w.hi == pytest.approx(ref.hi)
    with pytest.raises(ValueError):
        alpha_window(101, 50, 0)


def test_log_integral_against_quadrature():
    assert log_integral(2) == 0
    for x in (3.0, 10.0, 1e3, 1e5, 1e7):
        ref, _ = integrate.quad(lambda t: 1 / math.log(t), 2, x, limit=200)
        assert log_integral(x) == pytest.approx(ref, rel=1e-10)


def test_log_integral_close_to_prime_count():
    assert abs(log_integral(1e6) - 78498) / 78498 < 0.002
    assert len(prime_array(10**6)) == 78498


def test_log_integral_monotone_and_vectorised():
    xs = np.linspace(2, 1e5, 1000)
    vals = log_integral(xs)
    assert np.all(np.diff(vals) > 0)
    assert vals[10] == pytest.approx(log_integral(float(xs[10])))
    with pytest.raises(ValueError):
        log_integral(1.5)


def test_int64_guard():
    assert checked_int64(2**63 - 1) == 2**63 - 1
    with pytest.raises(OverflowError):
        checked_int64(2**63)
    assert GuardError("g", "msg").guard == "g"


@settings(max_examples=200)
@given(st.integers(1, 10**12))
def test_factorization_consistent_with_phi(n):
    f = factorize(n)
    assert f.value() == n
    phi = 1
    for p, e in f:
        phi *= p ** (e - 1) * (p - 1)
    assert euler_phi(n) == phi
