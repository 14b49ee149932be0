import math

import numpy as np
import pytest

from shiftprimes.characters import all_characters, build_basis, principal_character, primitive_characters
from shiftprimes.charsums import (
    SumAccumulator,
    T_sum,
    bv_error_sum,
    bv_threshold,
    class_sums,
    max_over_prefix,
    nontriviality_report,
    prime_char_sum,
    psi_chi,
    scan_characters,
    shifted_char_sum,
    shifted_char_sums,
    t_sum,
)
from shiftprimes.ntcore import euler_phi, log_integral, moebius
from shiftprimes.sieve import prime_array, prime_count_progression, von_mangoldt_stream


def naive_prefix(chi, x, kernel):
    """Dense scan over every integer y <= x with complex arithmetic."""
    terms = dict(von_mangoldt_stream(x)) if kernel == "von-mangoldt" else {int(p): 1.0 for p in prime_array(x)}
    s, best = 0j, 0.0
    for y in range(1, x + 1):
        if y in terms:
            s += terms[y] * complex(chi(y))
        best = max(best, abs(s))
    return s, best


def test_psi_chi_examples():
    chi0 = principal_character(1)
    assert psi_chi(10, chi0) == pytest.approx(math.log(2520), abs=1e-12)
    for chi in all_characters(7):
        assert psi_chi(2, chi) == pytest.approx(math.log(2) * complex(chi(2)), abs=1e-12)
    for chi in all_characters(24):  # all real
        assert chi.is_real
        assert psi_chi(5000, chi, "exact").imag == 0.0


def test_psi_chi_principal_removes_shared_prime_powers():
    for q in (1, 6, 10, 30, 97, 100):
        chi0 = principal_character(q)
        for y in (10, 1000, 10**4):
            direct = math.fsum(v for n, v in von_mangoldt_stream(y) if math.gcd(n, q) == 1)
            assert psi_chi(y, chi0, "exact").real == pytest.approx(direct, rel=1e-13)


def test_prime_char_sum_examples():
    assert prime_char_sum(1000, principal_character(30)).real == sum(1 for p in prime_array(1000) if 30 % p)
    nonprincipal = all_characters(4)[1]
    assert prime_char_sum(10, nonprincipal) == -1
    for chi in all_characters(9):
        assert prime_char_sum(2, chi) == pytest.approx(complex(chi(2)))


def test_orthogonality_through_prime_sums():
    """sum_chi prime_char_sum(y, chi) conj(chi(l)) = phi(q) pi(y; q, l), exactly."""
    from shiftprimes.cyclotomic import histogram_value

    for q in range(1, 51):
        chars = all_characters(q)
        basis = build_basis(q)
        E = basis.exponent
        for y in (10, 997, 10**4):
            counts = np.bincount(prime_array(y) % q, minlength=q).astype(np.int64)
            _, hist = class_sums(chars, counts, "exact")
            for l in (1, q - 1):
                if math.gcd(l, q) != 1:
                    continue
                total = np.zeros(E, dtype=np.int64)
                for chi, h in zip(chars, hist):
                    k = chi.exponent_of(l)
                    total += np.roll(h, -k)
                assert histogram_value(total) == euler_phi(q) * prime_count_progression(y, q, l)


@pytest.mark.parametrize("kernel", ["von-mangoldt", "prime-indicator"])
def test_jump_point_scan_matches_dense_scan(kernel):
    for q in (1, 3, 4, 5, 8, 12):
        chars = all_characters(q)
        for mode in ("fast", "exact"):
            for chi, (v, r) in zip(chars, scan_characters(chars, 300, kernel, mode)):
                s, best = naive_prefix(chi, 300, kernel)
                assert abs(v - s) < 1e-9
                assert r.max_abs == pytest.approx(best, abs=1e-9)


def test_t_sum_examples():
    psi = math.fsum(v for _, v in von_mangoldt_stream(500))
    assert t_sum(500, 1) == pytest.approx(psi, rel=1e-13)
    naive = math.fsum(naive_prefix(chi, 50, "von-mangoldt")[1] for chi in all_characters(3))
    assert t_sum(50, 3) == pytest.approx(naive, rel=1e-12)
    assert t_sum(1000, 7) >= max_over_prefix(1000, principal_character(7)).max_abs >= 0


def test_T_sum_examples():
    psi = math.fsum(v for _, v in von_mangoldt_stream(30))
    assert T_sum(30, 1) == pytest.approx(psi, rel=1e-13)
    naive = 0.0
    for q in range(1, 5):
        inner = sum(naive_prefix(chi, 30, "von-mangoldt")[1] for chi in primitive_characters(q))
        naive += q / euler_phi(q) * inner
    assert T_sum(30, 4) == pytest.approx(naive, rel=1e-12)
    values = [T_sum(2000, Q) for Q in range(1, 15)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_prefix_max_of_vanishing_sum():
    r = max_over_prefix(1, principal_character(5), "prime-indicator")
    assert r.max_abs == 0 and r.argmax_y == 1


def test_shifted_sum_examples():
    # principal character: count of p <= x with gcd(p + a, q) = 1, by inclusion-exclusion
    for q, a, x in ((6, 1, 100), (30, 7, 5000), (35, 2, 999)):
        ie = 0
        for d in range(1, q + 1):
            if q % d == 0 and moebius(d):
                ie += moebius(d) * prime_count_progression(x, d, -a)
        assert shifted_char_sum(principal_character(q), x, a) == ie
    quad = next(c for c in all_characters(5) if c.order == 2)
    brute = sum(complex(quad(int(p) + 1)) for p in prime_array(30))
    assert shifted_char_sum(quad, 30, 1) == brute
    with pytest.raises(ValueError):
        shifted_char_sum(quad, 30, 5)


def test_shifted_sums_bounded_by_prime_count():
    for q in (7, 16, 45):
        chars, vals, _ = shifted_char_sums(q, 3000, 1)
        assert np.all(np.abs(vals) <= len(prime_array(3000)) + 1e-9)


def test_nontriviality_report():
    rows = nontriviality_report(101, 1, [0.0, 1.5, 2.0])
    assert rows[0].note == "below range" and rows[0].max_ratio is None
    assert rows[1].x == math.ceil(101**1.5)
    assert 0 <= rows[1].max_ratio < 1
    assert rows[1].max_ratio == pytest.approx(0.0158788391257, rel=1e-9)
    assert rows[1].argmax_character == "101:exps=[17]"
    assert all(0 <= r.max_ratio <= 1 for r in rows[1:])
    assert nontriviality_report(2, 1, [3.0])[0].note == "no non-principal characters"


def naive_bv(x, Qcap):
    primes = prime_array(x)
    ys = np.arange(2, x + 1)
    li = log_integral(ys.astype(float))
    total = 0.0
    for q in range(1, Qcap + 1):
        best = 0.0
        for l in range(q):
            if math.gcd(l, q) != 1:
                continue
            hits = np.zeros(x + 1, dtype=np.int64)
            hits[primes[primes % q == l % q]] = 1
            count = np.cumsum(hits)[2:]
            best = max(best, float(np.max(np.abs(count - li / euler_phi(q)))))
        total += best
    return total


def test_bv_error_sum_examples():
    ys = np.arange(2, 5001)
    pi = np.searchsorted(prime_array(5000), ys, side="right")
    direct = float(np.max(np.abs(pi - log_integral(ys.astype(float)))))
    assert bv_error_sum(5000, 1) == pytest.approx(direct, rel=1e-12)
    assert bv_error_sum(10**4, 10) == pytest.approx(naive_bv(10**4, 10), rel=1e-12)
    values = [bv_error_sum(3000, Q) for Q in range(1, 12)]
    assert values[0] >= 0 and all(b >= a for a, b in zip(values, values[1:]))
    assert bv_threshold(1e6, 1) == pytest.approx(1e3 * math.log(1e6) ** -4.5)


def test_accumulator_modes_agree():
    rng = np.random.default_rng(5)
    for order in (1, 2, 4, 6, 10, 12):
        ks = rng.integers(0, order, 5000)
        exact, fast = SumAccumulator(order, "exact"), SumAccumulator(order, "fast")
        for chunk in np.array_split(ks, 7):
            exact.add_many(chunk)
            fast.add_many(chunk)
        assert abs(exact.result() - fast.result()) <= 1e-9 * len(ks)
        if order <= 2:
            assert exact.exact_value() == pytest.approx(exact.result().real)


def test_accumulator_merge():
    a, b, c = (SumAccumulator(12, "exact") for _ in range(3))
    a.add_many(np.array([1, 2, 3]))
    b.add_many(np.array([4, 5]))
    c.add_many(np.array([1, 2, 3, 4, 5]))
    assert a.merge(b).result() == pytest.approx(c.result())
    with pytest.raises(ValueError):
        a.merge(SumAccumulator(6, "exact"))


def test_exact_and_fast_sums_agree_on_all_small_moduli():
    """Histogram and complex-double accumulation agree to 1e-9 per term, q <= 100, x <= 10**5."""
    x = 10**5
    n_terms = len(prime_array(x))
    for q in range(1, 101):
        chars = all_characters(q)
        counts = np.bincount(prime_array(x) % q, minlength=q).astype(np.int64)
        fast, _ = class_sums(chars, counts, "fast")
        exact, _ = class_sums(chars, counts, "exact")
        assert np.max(np.abs(fast - exact)) <= 1e-9 * n_terms
        _, sf, _ = shifted_char_sums(q, x, 1, "fast")
        _, se, _ = shifted_char_sums(q, x, 1, "exact")
        assert np.max(np.abs(sf - se)) <= 1e-9 * n_terms
    for q in (7, 30, 64):
        chars = all_characters(q)
        fast = scan_characters(chars, x, "von-mangoldt", "fast")
        exact = scan_characters(chars, x, "von-mangoldt", "exact")
        for (vf, rf), (ve, re) in zip(fast, exact):
            assert abs(vf - ve) <= 1e-9 * n_terms
            assert abs(rf.max_abs - re.max_abs) <= 1e-9 * n_terms


def test_scan_is_thread_independent():
    chars = all_characters(63)
    one = scan_characters(chars, 20000, "von-mangoldt", "fast", threads=1)
    many = scan_characters(chars, 20000, "von-mangoldt", "fast", threads=8)
    assert one == many
