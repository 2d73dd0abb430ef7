import random
from fractions import Fraction

import pytest

from condpoisson.exact import b_vars
from condpoisson.fixtures import FIXTURES, MATRICES, replacement
from condpoisson.genfun import f0_table
from condpoisson.guess import GuessAnsatz, fit, guess_system, minimal_fit, monomials, unknown_count
from condpoisson.recurrence import Box, march, verify

BIMOLECULAR = MATRICES["bimolecular"]


def rates(seed, n):
    rng = random.Random(seed)
    return tuple(Fraction(rng.randint(1, 9), rng.randint(1, 9)) for _ in range(n))


def annihilates(rec, A, lam, window):
    return verify(rec, A, lam, window).passed


def test_monomials_are_graded():
    assert monomials(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert unknown_count(2, 2, 2) == 18


def test_ansatz_checks():
    with pytest.raises(ValueError, match="overlap"):
        GuessAnsatz(0, 1, 1, Box((0,), (10,)), Box((10,), (12,)))
    with pytest.raises(ValueError, match="more equations"):
        GuessAnsatz(0, 1, 1, Box((0,), (3,)), Box((10,), (12,)))
    a = GuessAnsatz.default(2, 0, 2, 1)
    assert a.fit_window.lo == (2, 0) and a.fit_window.hi == (9, 3)
    assert a.fit_window.disjoint(a.validation_window)


def test_one_row_recovery():
    A = MATRICES["one_row"]
    (b1,) = b_vars(1)
    rec = fit(A, (1, 1), GuessAnsatz.default(1, 0, 1, 1))
    assert rec.coefficients == (-2 + 0 * b1, b1 + 1)
    best = minimal_fit(A, (1, 1), 0, 3, 3)
    assert best == rec


def test_bimolecular_order_two():
    (b1, b2) = b_vars(2)
    for i in range(2):
        rec = minimal_fit(BIMOLECULAR, (1, 1, 1), i, 3, 3)
        assert rec.order == 2 and rec.direction == i
        assert annihilates(rec, BIMOLECULAR, (1, 1, 1), Box.cube(2, 0, 30))
    rec = fit(BIMOLECULAR, (1, 1, 1), GuessAnsatz.default(2, 0, 2, 2))
    assert rec is not None
    printed = FIXTURES["bimolecular"].recurrences[0].substitute_rates((1, 1, 1))
    # same monic normalization: both have leading coefficient b1 + 2
    assert rec.coefficients[-1] == b1 + 2
    assert rec == printed


def test_no_constant_order_one_recurrence():
    assert fit(BIMOLECULAR, (1, 1, 1), GuessAnsatz.default(2, 0, 1, 0)) is None


def test_degenerate_bounds():
    assert minimal_fit(BIMOLECULAR, (1, 1, 1), 0, 0, 0) is None


def test_symbolic_rates_rejected():
    with pytest.raises(ValueError):
        fit(BIMOLECULAR, None, GuessAnsatz.default(2, 0, 1, 1))


def test_deterministic():
    lam = rates("det", 3)
    first = minimal_fit(BIMOLECULAR, lam, 1, 3, 3)
    assert minimal_fit(BIMOLECULAR, lam, 1, 3, 3) == first


@pytest.mark.parametrize("name", ["one_row", "bimolecular", "water", "receptor_ligand", "envz_ompr"])
def test_guesses_agree_with_fixtures(name):
    fx = FIXTURES[name]
    lam = rates(name, fx.A.n)
    window = Box.cube(fx.A.m, 0, 30)
    for printed, holds in zip(fx.recurrences, fx.holds):
        guessed = minimal_fit(fx.A, lam, printed.direction, 4, 4)
        assert guessed is not None
        assert annihilates(guessed, fx.A, lam, window)
        if holds:
            assert annihilates(printed, fx.A, lam, window)


@pytest.mark.parametrize("direction", [0, 1, 2])
def test_futile_cycle_replacements(direction):
    fx = FIXTURES["futile_cycle"]
    lam = rates("futile", fx.A.n)
    rec = replacement(fx.A, lam, direction)
    assert verify(rec, fx.A, lam, Box.cube(3, 0, 30)).passed


def test_guessed_system_marches():
    lam = rates("system", 5)
    A = MATRICES["receptor_ligand"]
    sys = guess_system(A, lam)
    table = f0_table(A, lam, (15, 15), "exp")
    for b in Box.cube(2, 0, 15):
        assert march(sys, None, b) == table[b]
