import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shiftprimes.characters import (
    ONE,
    ZERO,
    CharacterParseError,
    CharValue,
    DirichletCharacter,
    all_characters,
    build_basis,
    character_table,
    conductor,
    evaluate,
    induced_primitive,
    is_primitive,
    parse_character,
    primitive_characters,
    principal_character,
    theta_for_character,
)
from shiftprimes.ntcore import FIVE_SIXTHS, HALF, GuardError, euler_phi


def units(q):
    return [n for n in range(1, q + 1) if math.gcd(n, q) == 1]


def mult_order(g, q):
    k, x = 1, g % q
    while x != 1 % q:
        x = x * g % q
        k += 1
    return k


def test_basis_examples():
    b1 = build_basis(1)
    assert b1.generators == () and b1.modulus.phi == 1
    b5 = build_basis(5)
    assert b5.orders == (4,) and mult_order(b5.generators[0].g, 5) == 4
    b8 = build_basis(8)
    assert b8.orders == (2, 2)
    assert sorted(g.g for g in b8.generators) in ([3, 5], [5, 7], [3, 7])


@pytest.mark.parametrize("q", [7, 9, 16, 24, 45, 100, 343, 1024, 2 * 3**5, 9973])
def test_generators_span_unit_group(q):
    b = build_basis(q)
    assert math.prod(b.orders) == euler_phi(q)
    for g in b.generators:
        assert mult_order(g.g, q) == g.order
    # discrete logs reconstruct every unit
    for n in units(q)[:500]:
        logs = b.dlog(n)
        value = 1
        for g, l in zip(b.generators, logs):
            value = value * pow(g.g, int(l), q) % q
        assert value == n % q


def test_all_characters_examples():
    assert len(all_characters(1)) == 1
    assert len(all_characters(5)) == 4
    chars12 = all_characters(12)
    assert len(chars12) == 4 and all(c.is_real for c in chars12)
    assert all_characters(12)[0].is_principal


def test_all_characters_guard():
    with pytest.raises(GuardError) as exc:
        all_characters(1_000_003)
    assert exc.value.guard == "character-count"


def test_evaluate_examples():
    chi0 = principal_character(10)
    assert all(evaluate(chi0, n) == ONE for n in units(10))
    quad = next(c for c in all_characters(5) if c.order == 2)
    assert complex(quad(2)) == -1
    assert [complex(quad(n)) for n in (1, 4)] == [1, 1]
    assert quad(5).is_zero


def test_char_value_arithmetic():
    i = CharValue.root(1, 4)
    assert complex(i) == 1j and complex(i * i) == -1
    assert i.conjugate() == CharValue.root(3, 4)
    assert (i * ZERO).is_zero and repr(ZERO) == "Zero"
    assert repr(CharValue.root(2, 6)) == "RootOfUnity(1/3)"


def test_multiplicativity_random_triples():
    rng = random.Random(11)
    for _ in range(10**4):
        q = rng.randint(1, 400)
        chars = all_characters(q)
        chi = chars[rng.randrange(len(chars))]
        m, n = rng.randint(1, 10**6), rng.randint(1, 10**6)
        assert chi(m * n) == chi(m) * chi(n)


@given(st.integers(1, 200), st.integers(0, 10**6), st.data())
def test_periodicity_and_conjugation(q, n, data):
    chars = all_characters(q)
    chi = chars[data.draw(st.integers(0, len(chars) - 1))]
    assert chi(n) == chi(n + q)
    assert chi.conj().conj() == chi
    prod = chi * chi.conj()
    assert prod.is_principal
    if math.gcd(n, q) == 1:
        assert (chi(n) * chi.conj()(n)) == ONE


def test_table_matches_pointwise_evaluation():
    for q in (1, 2, 12, 15, 16, 27, 40):
        b = build_basis(q)
        chars = all_characters(q)
        table = character_table(b, chars)
        for chi, row in zip(chars, table):
            for n in range(q):
                v = chi(n)
                assert (row[n] == -1) == v.is_zero
                if not v.is_zero:
                    assert Fraction(int(row[n]), b.exponent) == v.phase


def test_characters_are_distinct_homomorphisms():
    for q in (9, 20, 63):
        table = character_table(build_basis(q), all_characters(q))
        assert len({row.tobytes() for row in table}) == euler_phi(q)


def test_conductor_examples():
    assert conductor(principal_character(12)).d == 1
    # lift of the nontrivial character mod 3 to modulus 9
    lift = next(c for c in all_characters(9) if c.order == 2)
    assert conductor(lift).d == 3
    for chi in all_characters(13)[1:]:
        assert conductor(chi).d == 13 and is_primitive(chi)
    assert not is_primitive(principal_character(7))
    assert len(primitive_characters(12)) == 1


def test_primitive_counts_follow_moebius_convolution():
    from shiftprimes.ntcore import divisors, moebius

    for q in range(1, 120):
        expected = sum(moebius(q // d) * euler_phi(d) for d in divisors(q))
        assert len(primitive_characters(q)) == expected


def definitional_conductor(chi):
    q = chi.q
    us = units(q)
    for d in chi.modulus.divisors():
        if all(chi(n).phase == 0 for n in us if n % d == 1 % d):
            return d


def test_conductor_matches_definition():
    for q in list(range(1, 80)) + [96, 128, 135, 243, 250]:
        for chi in all_characters(q):
            assert conductor(chi).d == definitional_conductor(chi), chi


def test_induced_primitive_agrees_on_units_up_to_300():
    for q in range(1, 301):
        b = build_basis(q)
        chars = all_characters(q)
        us = np.array(units(q))
        table = character_table(b, chars)[:, us % q].astype(np.int64)
        for chi, row in zip(chars, table):
            prim = induced_primitive(chi)
            assert prim.is_primitive()
            pb = prim.basis
            prow = prim.table[us % prim.q].astype(np.int64)
            # equal phases: row / E_q == prow / E_d
            assert np.array_equal(row * pb.exponent, prow * b.exponent), chi


def test_theta_examples():
    assert all(theta_for_character(c) == HALF for c in all_characters(12))
    prim27 = primitive_characters(27)
    assert prim27 and all(theta_for_character(c) == FIVE_SIXTHS for c in prim27)
    # characters mod 54 induced from modulus 2 have conductor 1 -> cube-free
    for c in all_characters(54):
        if conductor(c).d in (1, 2):
            assert theta_for_character(c) == HALF


def test_serialize_roundtrip_and_parse_errors():
    for q in (1, 8, 12, 35):
        for chi in all_characters(q):
            assert parse_character(chi.serialize()) == chi
    with pytest.raises(CharacterParseError) as exc:
        parse_character("12exps=[1,0]")
    assert exc.value.position == 2
    with pytest.raises(CharacterParseError):
        parse_character("12:exps=[1,0")
    with pytest.raises((CharacterParseError, ValueError)):
        parse_character("5:exps=[7]")


def test_constructor_validation():
    b = build_basis(5)
    with pytest.raises(ValueError):
        DirichletCharacter(b, (4,))
    with pytest.raises(ValueError):
        DirichletCharacter(b, (1, 1))
    with pytest.raises(ValueError):
        all_characters(5)[1] * all_characters(7)[1]


def test_large_modulus_uses_giant_steps():
    q = 10_000_019  # prime above the log-table limit
    b = build_basis(q)
    g = b.generators[0].g
    for k in (1, 12345, q - 2):
        assert b.dlog(pow(g, k, q)) == (k,)
