"""Joint probabilities and conditional moments of Poisson variables under Ak = b.

``F0(b)`` is the coefficient of ``z^b`` in ``exp(sum_j lam_j * prod_i z_i^a_ij)``.
Three independent routes compute it:

* ``"product"`` multiplies the truncated expansions of each factor
  ``exp(lam_j z^{a_j})`` over the box ``[0, b]`` (the default);
* ``"exp"`` fills the same box with the power-series exponential recurrence
  ``b_i F0(b) = sum_j a_ij lam_j F0(b - a_j)``;
* ``"enumerate"`` sums the weights of the lattice points ``{k >= 0 : Ak = b}``.

Conditional factorial moments follow from shifted coefficients:
``E[X_j^(r) | Y=b] = lam_j^r F0(b - r a_j) / F0(b)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DimensionError, NullConditioningError, UnsupportedShapeError
from .exact import Poly, determinant, lam_names, to_fraction

Value = Union[Fraction, Poly]
METHODS = ("product", "exp", "enumerate")


@dataclass(frozen=True)
class ConstraintMatrix:
    """Non-negative integer m x n matrix without all-zero columns."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        if not rows or not rows[0]:
            raise DimensionError("constraint matrix needs at least one row and one column")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise DimensionError("ragged constraint matrix")
        for r in self.rows:
            for x in r:
                if int(x) != x:
                    raise ValueError(f"constraint matrix entries must be integers, got {x!r}")
        if any(x < 0 for r in rows for x in r):
            raise ValueError("constraint matrix entries must be non-negative")
        for j in range(n):
            if not any(r[j] for r in rows):
                raise ValueError(
                    f"column {j + 1} is all zero: X_{j + 1} is unconstrained (its conditional law is "
                    f"plain Poisson) and the sum defining F0 diverges; drop that column"
                )
        object.__setattr__(self, "rows", rows)

    @classmethod
    def parse(cls, text: str) -> "ConstraintMatrix":
        """Rows separated by ';' or newlines, entries by whitespace or commas."""
        lines = [ln for ln in text.replace(";", "\n").splitlines() if ln.strip()]
        return cls(tuple(tuple(int(x) for x in ln.replace(",", " ").split()) for ln in lines))

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    @property
    def columns(self) -> tuple:
        return tuple(self.column(j) for j in range(self.n))

    def __str__(self):
        return "; ".join(" ".join(str(x) for x in r) for r in self.rows)


def as_matrix(A) -> ConstraintMatrix:
    if isinstance(A, ConstraintMatrix):
        return A
    if isinstance(A, str):
        return ConstraintMatrix.parse(A)
    return ConstraintMatrix(tuple(tuple(r) for r in A))


def rate_vector(A: ConstraintMatrix, lam) -> tuple:
    """Numeric rates as Fractions, or the symbols lam1..lamn when ``lam`` is None."""
    if lam is None:
        names = lam_names(A.n)
        return tuple(Poly.var(v, names) for v in names)
    lam = tuple(lam)
    if len(lam) != A.n:
        raise DimensionError(f"expected {A.n} rates, got {len(lam)}")
    if all(isinstance(x, Poly) for x in lam):
        return lam
    if any(isinstance(x, Poly) for x in lam):
        raise ValueError("rate vector mixes symbolic and numeric entries")
    out = tuple(to_fraction(x) for x in lam)
    if any(x <= 0 for x in out):
        raise ValueError("numeric rates must be strictly positive")
    return out


def _counts(A: ConstraintMatrix, b) -> tuple:
    b = tuple(int(x) for x in b)
    if len(b) != A.m:
        raise DimensionError(f"expected {A.m} constraint counts, got {len(b)}")
    if any(x < 0 for x in b):
        raise ValueError("constraint counts must be non-negative")
    return b


def _unit(rates) -> tuple:
    if rates and isinstance(rates[0], Poly):
        vs = rates[0].variables
        return Poly(vs), Poly.constant(1, vs)
    return Fraction(0), Fraction(1)


def enumerate_support(A, b) -> list[tuple]:
    """All k >= 0 with Ak = b, in lexicographic order."""
    A = as_matrix(A)
    b = _counts(A, b)
    cols = A.columns
    out: list[tuple] = []

    def rec(j, remaining, prefix):
        if j == A.n:
            if not any(remaining):
                out.append(tuple(prefix))
            return
        a = cols[j]
        kmax = min(remaining[i] // a[i] for i in range(A.m) if a[i])
        for k in range(kmax + 1):
            prefix.append(k)
            rec(j + 1, [remaining[i] - k * a[i] for i in range(A.m)], prefix)
            prefix.pop()

    rec(0, list(b), [])
    return out


def _weight(rates, k) -> Value:
    w = Fraction(1)
    for c, kj in zip(rates, k):
        if kj:
            w = c**kj * w if isinstance(c, Poly) else w * c**kj
            w = w / math.factorial(kj)
    return w


class F0Table:
    """F0 on the box ``0 <= x <= bounds``; zero outside the non-negative orthant."""

    def __init__(self, bounds: tuple, values: list, zero):
        self.bounds = bounds
        self.values = values
        self._zero = zero
        self._strides = _strides(bounds)

    def __getitem__(self, point) -> Value:
        if any(x < 0 for x in point):
            return self._zero
        if any(x > hi for x, hi in zip(point, self.bounds)):
            raise IndexError(f"{tuple(point)} lies outside the computed box {self.bounds}")
        return self.values[sum(x * s for x, s in zip(point, self._strides))]

    def __len__(self):
        return len(self.values)


def _strides(bounds) -> tuple:
    strides = []
    acc = 1
    for hi in reversed(bounds):
        strides.append(acc)
        acc *= hi + 1
    return tuple(reversed(strides))


def _product_fill(A: ConstraintMatrix, rates, bounds) -> list:
    zero, one = _unit(rates)
    strides = _strides(bounds)
    size = math.prod(hi + 1 for hi in bounds)
    table = [zero] * size
    table[0] = one
    for a, c in zip(A.columns, rates):
        support = [i for i in range(A.m) if a[i]]
        kmax = min(bounds[i] // a[i] for i in support)
        weights = [one]
        for k in range(1, kmax + 1):
            weights.append(weights[-1] * c / k)
        step = sum(a[i] * strides[i] for i in support)
        # each chain x0, x0 + a, x0 + 2a, ... is convolved with the weights
        for x0 in itertools.product(*(range(hi + 1) for hi in bounds)):
            if all(x0[i] >= a[i] for i in support):
                continue
            length = min((bounds[i] - x0[i]) // a[i] for i in support) + 1
            if length <= 0:
                continue
            start = sum(x * s for x, s in zip(x0, strides))
            idx = range(start, start + length * step, step)
            vals = [table[t] for t in idx]
            nz = [t for t, v in enumerate(vals) if v]
            if not nz:
                continue
            out = [zero] * length
            for t in range(nz[0], length):
                acc = zero
                for s in nz:
                    if s > t:
                        break
                    acc = acc + vals[s] * weights[t - s]
                out[t] = acc
            for t, v in zip(idx, out):
                table[t] = v
    return table


def _exp_fill(A: ConstraintMatrix, rates, bounds) -> list:
    zero, one = _unit(rates)
    strides = _strides(bounds)
    size = math.prod(hi + 1 for hi in bounds)
    table = [zero] * size
    table[0] = one
    cols = A.columns
    # per direction i: the columns touching z_i with their weights a_ij * lam_j
    per_dir = []
    for i in range(A.m):
        entries = []
        for j, a in enumerate(cols):
            if a[i]:
                entries.append((a[i] * rates[j], a, sum(x * s for x, s in zip(a, strides))))
        per_dir.append(entries)
    for flat, x in enumerate(itertools.product(*(range(hi + 1) for hi in bounds))):
        if flat == 0:
            continue
        i = next(k for k, v in enumerate(x) if v)
        acc = zero
        for w, a, off in per_dir[i]:
            if all(xi >= ai for xi, ai in zip(x, a)):
                v = table[flat - off]
                if v:
                    acc = acc + w * v
        table[flat] = acc / x[i]
    return table


def _enumerate_fill(A: ConstraintMatrix, rates, bounds) -> list:
    zero, _ = _unit(rates)
    out = []
    for x in itertools.product(*(range(hi + 1) for hi in bounds)):
        acc = zero
        for k in enumerate_support(A, x):
            acc = acc + _weight(rates, k)
        out.append(acc)
    return out


_FILLERS = {"product": _product_fill, "exp": _exp_fill, "enumerate": _enumerate_fill}


def f0_table(A, lam, bounds, method: str = "product") -> F0Table:
    """F0 at every point of the box ``[0, bounds]``.

    ``lam=None`` gives symbolic values (polynomials in lam1..lamn).
    """
    A = as_matrix(A)
    bounds = _counts(A, bounds)
    rates = rate_vector(A, lam)
    if method not in _FILLERS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    zero, _ = _unit(rates)
    return F0Table(bounds, _FILLERS[method](A, rates, bounds), zero)


def f0(A, lam, b, method: str = "product") -> Value:
    """F0(b) = sum over Ak=b of prod lam_j^k_j / k_j!  (exact)."""
    A = as_matrix(A)
    b = _counts(A, b)
    if method == "enumerate":
        rates = rate_vector(A, lam)
        zero, _ = _unit(rates)
        acc = zero
        for k in enumerate_support(A, b):
            acc = acc + _weight(rates, k)
        return acc
    return f0_table(A, lam, b, method)[b]


@dataclass(frozen=True)
class JointProbability:
    f0: Fraction
    rate_sum: Fraction
    value: float

    def __str__(self):
        return f"F0={_fmt(self.f0)} rate_sum={_fmt(self.rate_sum)} P={self.value:.10g}"


def _fmt(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def exp_scaled(x: Fraction, t: Fraction) -> float:
    """Double-precision x * exp(-t), robust to huge numerators and denominators."""
    if x == 0:
        return 0.0
    if x < 0:
        return -exp_scaled(-x, t)
    return math.exp(math.log(x.numerator) - math.log(x.denominator) - float(t))


def prob_F(A, lam, b, method: str = "product") -> JointProbability:
    """P(Y = b) as the exact pair (F0(b), sum lam) plus its float value."""
    A = as_matrix(A)
    rates = rate_vector(A, lam)
    if isinstance(rates[0], Poly):
        raise ValueError("prob_F needs numeric rates")
    value = f0(A, rates, b, method)
    total = sum(rates, Fraction(0))
    return JointProbability(value, total, exp_scaled(value, total))


class ConditionalLaw:
    """Conditional moments of X given Y = b, sharing one F0 table."""

    def __init__(self, A, lam, b, method: str = "product"):
        self.A = as_matrix(A)
        self.b = _counts(self.A, b)
        self.rates = rate_vector(self.A, lam)
        if isinstance(self.rates[0], Poly):
            raise ValueError("conditional moments need numeric rates")
        self.table = f0_table(self.A, self.rates, self.b, method)
        self.f0 = self.table[self.b]
        if not self.f0:
            raise NullConditioningError(
                f"F0(b) = 0 for b={self.b}: the conditioning event has probability zero"
            )

    def _shifted(self, shift) -> Fraction:
        return self.table[tuple(bi - s for bi, s in zip(self.b, shift))]

    def _index(self, j: int) -> int:
        if not 0 <= j < self.A.n:
            raise IndexError(f"variable index {j} out of range 0..{self.A.n - 1}")
        return j

    def factorial_moment(self, j: int, r: int) -> Fraction:
        j = self._index(j)
        if r < 1:
            raise ValueError("factorial moment order must be >= 1")
        a = self.A.column(j)
        return self.rates[j] ** r * self._shifted([r * x for x in a]) / self.f0

    def mixed_factorial_moment(self, i: int, j: int) -> Fraction:
        i, j = self._index(i), self._index(j)
        if i == j:
            raise ValueError("mixed moment needs i != j; use factorial_moment(j, 2)")
        ai, aj = self.A.column(i), self.A.column(j)
        return self.rates[i] * self.rates[j] * self._shifted([x + y for x, y in zip(ai, aj)]) / self.f0

    def raw_moment(self, j: int, r: int) -> Fraction:
        """E[X_j^r | Y=b] from factorial moments via Stirling numbers."""
        return sum((stirling2(r, k) * self.factorial_moment(j, k) for k in range(1, r + 1)), Fraction(0))

    def mean(self, j: int) -> Fraction:
        return self.factorial_moment(j, 1)

    def variance(self, j: int) -> Fraction:
        m1 = self.factorial_moment(j, 1)
        return self.factorial_moment(j, 2) + m1 - m1 * m1

    def covariance(self, i: int, j: int) -> Fraction:
        if i == j:
            return self.variance(i)
        return self.mixed_factorial_moment(i, j) - self.mean(i) * self.mean(j)


def stirling2(r: int, k: int) -> int:
    """Stirling number of the second kind S(r, k)."""
    if r == k:
        return 1
    if k <= 0 or k > r:
        return 0
    total = sum((-1) ** (k - i) * math.comb(k, i) * i**r for i in range(k + 1))
    return total // math.factorial(k)


def factorial_moment(A, lam, b, j: int, r: int, method: str = "product") -> Fraction:
    """E[X_j (X_j - 1) ... (X_j - r + 1) | Y = b], ``j`` zero-based."""
    return ConditionalLaw(A, lam, b, method).factorial_moment(j, r)


def mixed_factorial_moment(A, lam, b, i: int, j: int, method: str = "product") -> Fraction:
    """E[X_i X_j | Y = b] for i != j (zero-based)."""
    return ConditionalLaw(A, lam, b, method).mixed_factorial_moment(i, j)


def raw_moment(A, lam, b, j: int, r: int, method: str = "product") -> Fraction:
    return ConditionalLaw(A, lam, b, method).raw_moment(j, r)


@dataclass(frozen=True)
class StatReport:
    """Conditional means, variances, covariances and correlations.

    Correlations are doubles; ``None`` marks an entry whose variance factor is
    zero. Everything else is exact.
    """

    f0: Fraction
    means: tuple
    variances: tuple
    covariance: tuple
    correlation: tuple

    def covariance_psd(self) -> bool:
        """Exact check that every principal minor of the covariance matrix is >= 0."""
        n = len(self.means)
        for size in range(1, n + 1):
            for idx in itertools.combinations(range(n), size):
                minor = [[self.covariance[i][j] for j in idx] for i in idx]
                if determinant(minor) < 0:
                    return False
        return True


def stats(A, lam, b, method: str = "product") -> StatReport:
    law = ConditionalLaw(A, lam, b, method)
    n = law.A.n
    means = tuple(law.mean(j) for j in range(n))
    variances = tuple(law.variance(j) for j in range(n))
    cov = [[None] * n for _ in range(n)]
    for i in range(n):
        cov[i][i] = variances[i]
        for j in range(i + 1, n):
            cov[i][j] = cov[j][i] = law.mixed_factorial_moment(i, j) - means[i] * means[j]
    corr = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if variances[i] > 0 and variances[j] > 0:
                if i == j:
                    corr[i][j] = 1.0
                else:
                    rho = float(cov[i][j]) / math.sqrt(float(variances[i] * variances[j]))
                    corr[i][j] = max(-1.0, min(1.0, rho))
    return StatReport(
        law.f0, means, variances,
        tuple(tuple(r) for r in cov), tuple(tuple(r) for r in corr),
    )


def two_row_aggregates(A, lam) -> tuple:
    """Rate sums over the column patterns (1,0), (0,1) and (1,1) of a 0/1 two-row matrix."""
    A = as_matrix(A)
    if A.m != 2 or any(x not in (0, 1) for r in A.rows for x in r):
        raise UnsupportedShapeError("single-sum path needs a two-row matrix with 0/1 entries")
    rates = rate_vector(A, lam)
    zero, _ = _unit(rates)
    only_first, only_second, both = zero, zero, zero
    for col, c in zip(A.columns, rates):
        if col == (1, 0):
            only_first = only_first + c
        elif col == (0, 1):
            only_second = only_second + c
        else:
            both = both + c
    return only_first, only_second, both


def two_row_f0(A, lam, b) -> Value:
    """F0(b1, b2) as a single hypergeometric sum over the (1,1)-column count k."""
    A = as_matrix(A)
    first, second, both = two_row_aggregates(A, lam)
    b1, b2 = _counts(A, b)
    acc = first * 0
    for k in range(min(b1, b2) + 1):
        term = both**k * first ** (b1 - k) * second ** (b2 - k)
        acc = acc + term / (math.factorial(k) * math.factorial(b1 - k) * math.factorial(b2 - k))
    return acc
