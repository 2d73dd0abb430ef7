import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from condpoisson.errors import DimensionError, NullConditioningError, UnsupportedShapeError
from condpoisson.exact import Poly, lam_vars
from condpoisson.fixtures import MATRICES
from condpoisson.genfun import (
    ConditionalLaw,
    ConstraintMatrix,
    enumerate_support,
    f0,
    f0_table,
    factorial_moment,
    mixed_factorial_moment,
    prob_F,
    raw_moment,
    stats,
    stirling2,
    two_row_aggregates,
    two_row_f0,
)

BIMOLECULAR = MATRICES["bimolecular"]
WATER = MATRICES["water"]
RL = MATRICES["receptor_ligand"]


def weight(lam, k):
    out = Fraction(1)
    for x, kj in zip(lam, k):
        out *= Fraction(x) ** kj / math.factorial(kj)
    return out


def brute_support(A, b, cap):
    """All k in [0, cap]^n with Ak = b, by exhaustive search."""
    return [k for k in itertools.product(range(cap + 1), repeat=A.n)
            if all(sum(a * x for a, x in zip(row, k)) == bi for row, bi in zip(A.rows, b))]


# -- constraint matrices ----------------------------------------------------


def test_matrix_parse_and_shape():
    A = ConstraintMatrix.parse("1 0 1; 0 1 1")
    assert A == BIMOLECULAR
    assert (A.m, A.n) == (2, 3)
    assert A.column(2) == (1, 1)


@pytest.mark.parametrize("rows, err", [
    (((1, 0), (0, 0)), "column 2 is all zero"),
    (((1, -1),), "non-negative"),
    (((1, 2), (1,)), "ragged"),
    ((), "at least one row"),
])
def test_matrix_rejects(rows, err):
    with pytest.raises(ValueError, match=err):
        ConstraintMatrix(rows)


# -- support and F0 ---------------------------------------------------------


def test_support_examples():
    assert enumerate_support("1 1", (2,)) == [(0, 2), (1, 1), (2, 0)]
    assert sorted(enumerate_support(BIMOLECULAR, (1, 1))) == [(0, 0, 1), (1, 1, 0)]
    assert enumerate_support(RL, (0, 0)) == [(0,) * 5]


@given(st.sampled_from(sorted(MATRICES)), st.data())
def test_support_matches_exhaustive_search(name, data):
    A = MATRICES[name]
    if A.n > 6:
        return
    b = tuple(data.draw(st.integers(0, 3)) for _ in range(A.m))
    support = enumerate_support(A, b)
    assert support == sorted(support)
    assert support == brute_support(A, b, max(b))


def test_f0_symbolic_examples():
    l1, l2, l3 = lam_vars(3)
    assert f0("1 1", None, (2,)) == (l1 + l2) ** 2 / 2
    assert f0(BIMOLECULAR, None, (2, 2)) == l3**2 / 2 + l1 * l2 * l3 + l1**2 * l2**2 / 4
    assert f0(WATER, None, (1, 1)) == l3
    assert f0(RL, None, (0, 0)) == 1


@pytest.mark.parametrize("method", ["product", "exp", "enumerate"])
def test_f0_one_row_closed_form(method):
    # Y ~ Poisson(l1 + l2): F0(b) = (l1 + l2)^b / b!
    lam = (Fraction(2, 3), Fraction(5, 4))
    for b in range(12):
        assert f0("1 1", lam, (b,), method) == sum(lam) ** b / math.factorial(b)


instances = st.integers(1, 3).flatmap(lambda m: st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.lists(st.lists(st.integers(0, 2), min_size=n, max_size=n), min_size=m, max_size=m)
    .filter(lambda rows: all(any(r[j] for r in rows) for j in range(n))),
    st.lists(st.fractions(min_value=Fraction(1, 5), max_value=3, max_denominator=5), min_size=n, max_size=n),
    st.lists(st.integers(0, 4), min_size=m, max_size=m),
)))


@given(instances)
def test_methods_agree_with_enumeration(inst):
    rows, lam, b = inst
    A = ConstraintMatrix(rows)
    direct = sum((weight(lam, k) for k in enumerate_support(A, b)), Fraction(0))
    for method in ("product", "exp", "enumerate"):
        assert f0(A, lam, b, method) == direct


@given(instances)
def test_symbolic_specializes_to_numeric(inst):
    rows, lam, b = inst
    A = ConstraintMatrix(rows)
    sym = f0(A, None, b)
    assert sym.eval({f"lam{j + 1}": x for j, x in enumerate(lam)}) == f0(A, lam, b)


def test_table_boundaries():
    t = f0_table(BIMOLECULAR, (1, 1, 1), (3, 3))
    assert t[(-1, 2)] == 0
    with pytest.raises(IndexError):
        t[(4, 0)]


def test_input_validation():
    with pytest.raises(DimensionError):
        f0(BIMOLECULAR, (1, 1), (1, 1))
    with pytest.raises(DimensionError):
        f0(BIMOLECULAR, (1, 1, 1), (1,))
    with pytest.raises(ValueError):
        f0(BIMOLECULAR, (1, 0, 1), (1, 1))
    with pytest.raises(ValueError):
        f0(BIMOLECULAR, (1, 1, 1), (1, -1))


# -- probabilities ------------------------------------------------------------


def test_prob_examples():
    jp = prob_F("1 1", (1, 1), (2,))
    assert (jp.f0, jp.rate_sum) == (2, 2)
    assert jp.value == pytest.approx(2 * math.exp(-2), rel=1e-15)
    jp = prob_F("1 1", (1, 3), (0,))
    assert jp.f0 == 1 and jp.value == pytest.approx(math.exp(-4), rel=1e-15)
    assert prob_F(WATER, (1, 1, 1), (0, 1)).value == 0


def test_one_row_probabilities_sum_to_one():
    lam = (Fraction(1, 2), Fraction(3, 2), Fraction(1))
    total = sum(lam)
    exact = Fraction(0)
    previous = Fraction(-1)
    for b in range(40):
        exact += prob_F("1 1 1", lam, (b,)).f0
        assert exact > previous
        previous = exact
        if b + 2 <= 2 * total:
            continue
        # remaining mass after b is below the next term times a geometric factor
        tail = total ** (b + 1) / math.factorial(b + 1) / (1 - total / (b + 2))
        assert 1 - float(exact) * math.exp(-total) <= float(tail) * math.exp(-total) + 1e-15
    assert float(exact) * math.exp(-total) == pytest.approx(1.0, abs=1e-12)


def test_prob_large_rates_stay_finite():
    assert 0 < prob_F("1 1", (400, 400), (800,)).value < 1


# -- conditional moments ------------------------------------------------------


def test_factorial_moment_examples():
    assert factorial_moment("1 1", (1, 3), (4,), 0, 1) == 1
    assert factorial_moment("1 1", (1, 3), (4,), 0, 5) == 0
    assert factorial_moment(BIMOLECULAR, (1, 1, 1), (1, 1), 2, 1) == Fraction(1, 2)


def test_mixed_moment_examples():
    assert mixed_factorial_moment(BIMOLECULAR, (1, 1, 1), (1, 1), 0, 1) == Fraction(1, 2)
    assert mixed_factorial_moment(BIMOLECULAR, (1, 1, 1), (1, 1), 0, 2) == 0
    for i, j in itertools.permutations(range(5), 2):
        assert mixed_factorial_moment(RL, (1,) * 5, (0, 0), i, j) == 0
    with pytest.raises(ValueError):
        mixed_factorial_moment(BIMOLECULAR, (1, 1, 1), (1, 1), 1, 1)


def test_null_event_is_an_error():
    with pytest.raises(NullConditioningError):
        ConditionalLaw(WATER, (1, 1, 1), (0, 1))
    with pytest.raises(NullConditioningError):
        stats("2", (1,), (3,))


@given(instances, st.integers(1, 3))
def test_moments_match_enumeration(inst, r):
    rows, lam, b = inst
    A = ConstraintMatrix(rows)
    support = enumerate_support(A, b)
    if not support:
        return
    law = ConditionalLaw(A, lam, b)
    total = sum(weight(lam, k) for k in support)

    def expect(g):
        return sum(g(k) * weight(lam, k) for k in support) / total

    for j in range(A.n):
        assert law.factorial_moment(j, r) == expect(lambda k: math.perm(k[j], r))
        assert law.raw_moment(j, r) == expect(lambda k: k[j] ** r)
        assert law.variance(j) == expect(lambda k: k[j] ** 2) - expect(lambda k: k[j]) ** 2
    for i, j in itertools.combinations(range(A.n), 2):
        assert law.mixed_factorial_moment(i, j) == expect(lambda k: k[i] * k[j])


def test_binomial_law():
    rng = random.Random(7)
    for _ in range(30):
        lam = (Fraction(rng.randint(1, 9), rng.randint(1, 9)), Fraction(rng.randint(1, 9), rng.randint(1, 9)))
        b = rng.randint(0, 25)
        p = lam[0] / sum(lam)
        law = ConditionalLaw("1 1", lam, (b,))
        assert law.mean(0) == b * p
        assert law.variance(0) == b * p * (1 - p)


def test_stirling_numbers():
    assert [stirling2(4, k) for k in range(5)] == [0, 1, 7, 6, 1]
    assert stirling2(0, 0) == 1


def test_raw_moment_wrapper():
    # X | Y=4 ~ Bin(4, 1/4): E[X^2] = var + mean^2 = 3/4 + 1
    assert raw_moment("1 1", (1, 3), (4,), 0, 2) == Fraction(7, 4)


# -- statistics report -----------------------------------------------------------


def test_stats_binomial_example():
    rep = stats("1 1", (1, 3), (4,))
    assert rep.means[0] == 1 and rep.variances[0] == Fraction(3, 4)
    assert rep.correlation[0][1] == pytest.approx(-1.0)


def test_stats_receptor_ligand_examples():
    rep = stats(RL, (1,) * 5, (5, 5))
    assert rep.correlation[0][1] == pytest.approx(-0.3647053019, abs=1e-8)
    assert rep.correlation[0][2] == pytest.approx(0.5636021195, abs=1e-8)
    assert rep.correlation[3][4] == pytest.approx(-0.6350805992, abs=1e-8)
    assert all(rep.correlation[i][i] == 1.0 for i in range(5))


@given(instances)
def test_stats_invariants(inst):
    rows, lam, b = inst
    A = ConstraintMatrix(rows)
    if not enumerate_support(A, b):
        return
    rep = stats(A, lam, b)
    n = A.n
    for i in range(n):
        for j in range(n):
            assert rep.covariance[i][j] == rep.covariance[j][i]
            c = rep.correlation[i][j]
            if rep.variances[i] == 0 or rep.variances[j] == 0:
                assert c is None
            else:
                assert -1 - 1e-12 <= c <= 1 + 1e-12
        if rep.variances[i]:
            assert rep.correlation[i][i] == 1.0
    if n <= 5:
        assert rep.covariance_psd()


def test_zero_variance_marks_correlation_undefined():
    # b = 0 forces X = 0 with certainty
    rep = stats(BIMOLECULAR, (1, 1, 1), (0, 0))
    assert rep.variances == (0, 0, 0)
    assert all(c is None for row in rep.correlation for c in row)


# -- two-row single sum ------------------------------------------------------------


def test_two_row_examples():
    assert two_row_f0(BIMOLECULAR, (1, 1, 1), (1, 1)) == 2
    assert two_row_f0(RL, (1,) * 5, (2, 2)) == sum(weight((1,) * 5, k) for k in enumerate_support(RL, (2, 2)))
    assert two_row_f0(RL, (1,) * 5, (0, 0)) == 1


def test_two_row_aggregates_follow_column_patterns():
    l = lam_vars(6)
    z1, z2, both = two_row_aggregates(MATRICES["envz_ompr"], None)
    assert (z1, z2, both) == (l[0] + l[4], l[1] + l[3], l[2] + l[5])


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.lists(st.sampled_from([(1, 0), (0, 1), (1, 1)]), min_size=n, max_size=n),
    st.lists(st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=4), min_size=n, max_size=n),
    st.tuples(st.integers(0, 8), st.integers(0, 8)),
)))
def test_two_row_matches_f0(inst):
    cols, lam, b = inst
    A = ConstraintMatrix(tuple(zip(*cols)))
    assert two_row_f0(A, lam, b) == f0(A, lam, b, "enumerate")
    assert two_row_f0(A, None, b) == f0(A, None, b)


@pytest.mark.parametrize("A", [WATER, MATRICES["futile_cycle"], MATRICES["one_row"]])
def test_two_row_rejects_other_shapes(A):
    with pytest.raises(UnsupportedShapeError):
        two_row_f0(A, (1,) * A.n, (1,) * A.m)


def test_symbolic_rates_are_polys():
    assert isinstance(f0(BIMOLECULAR, None, (1, 1)), Poly)
