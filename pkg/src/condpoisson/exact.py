"""Exact rationals, sparse multivariate polynomials and fraction-free linear algebra.

Rationals are :class:`fractions.Fraction` throughout. :class:`Poly` stores a
map from exponent vectors to nonzero ``Fraction`` coefficients over a tuple of
named indeterminates kept in canonical order (``lam1 ... lamn`` before
``b1 ... bm``, anything else after, by name).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import UnboundVariableError

Scalar = Union[int, Fraction]

_NAME_RE = re.compile(r"^([A-Za-z_]+?)(\d+)$")
_GROUPS = {"lam": 0, "b": 1}


def _var_key(name: str):
    m = _NAME_RE.match(name)
    if m and m.group(1) in _GROUPS:
        return (_GROUPS[m.group(1)], int(m.group(2)), "")
    return (2, 0, name)


def canonical_order(names: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set(names), key=_var_key))


def lam_names(n: int) -> tuple[str, ...]:
    return tuple(f"lam{j}" for j in range(1, n + 1))


def b_names(m: int) -> tuple[str, ...]:
    return tuple(f"b{i}" for i in range(1, m + 1))


def to_fraction(x) -> Fraction:
    """Exact conversion; floats go through their decimal literal, not binary."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class Poly:
    """Sparse polynomial with rational coefficients.

    Instances are immutable. Arithmetic between polynomials over different
    variable tuples first lifts both onto the canonical union of variables.
    """

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str] = (), terms: Mapping[tuple, Scalar] | None = None):
        variables = tuple(variables)
        if canonical_order(variables) != variables:
            raise ValueError(f"variables {variables} are not in canonical order")
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != len(variables):
                raise ValueError("exponent vector length does not match variable count")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            c = to_fraction(c)
            if c:
                clean[exps] = clean.get(exps, 0) + c
                if not clean[exps]:
                    del clean[exps]
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # construction

    @classmethod
    def constant(cls, c: Scalar, variables: Sequence[str] = ()) -> "Poly":
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, name: str, variables: Sequence[str] | None = None) -> "Poly":
        variables = canonical_order((variables or ()) + (name,)) if variables else (name,)
        exps = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {exps: 1})

    @classmethod
    def monomial(cls, variables: Sequence[str], exps: Sequence[int], c: Scalar = 1) -> "Poly":
        return cls(tuple(variables), {tuple(exps): c})

    # structure

    def lift(self, variables: Sequence[str]) -> "Poly":
        variables = tuple(variables)
        if variables == self.variables:
            return self
        pos = {v: i for i, v in enumerate(variables)}
        dropped = [v for v in self.used_variables() if v not in pos]
        if dropped:
            raise ValueError(f"cannot drop variable {dropped[0]} that appears in the polynomial")
        new = {}
        for exps, c in self.terms.items():
            out = [0] * len(variables)
            for v, e in zip(self.variables, exps):
                if e:
                    out[pos[v]] = e
            new[tuple(out)] = c
        return Poly(variables, new)

    def _coerce(self, other) -> tuple["Poly", "Poly"]:
        if not isinstance(other, Poly):
            other = Poly.constant(to_fraction(other), self.variables)
        if other.variables == self.variables:
            return self, other
        vs = canonical_order(self.variables + other.variables)
        return self.lift(vs), other.lift(vs)

    def used_variables(self) -> tuple[str, ...]:
        used = [False] * len(self.variables)
        for exps in self.terms:
            for i, e in enumerate(exps):
                if e:
                    used[i] = True
        return tuple(v for v, u in zip(self.variables, used) if u)

    def trim(self) -> "Poly":
        """Drop variables that do not occur."""
        return self.lift(self.used_variables())

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        if name not in self.variables:
            return 0 if self.terms else -1
        i = self.variables.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def sorted_terms(self) -> list[tuple[tuple, Fraction]]:
        """Terms in graded-lexicographic order, highest first."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def leading_coefficient(self) -> Fraction:
        return self.sorted_terms()[0][1] if self.terms else Fraction(0)

    def content(self) -> Fraction:
        """Positive rational c with self/c having coprime integer coefficients."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = math.gcd(num, c.numerator)
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Fraction(num, den)

    # arithmetic

    def __neg__(self):
        return Poly(self.variables, {e: -c for e, c in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        a, b = self._coerce(other)
        out = dict(a.terms)
        for e, c in b.terms.items():
            out[e] = out.get(e, 0) + c
        return Poly(a.variables, out)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly(self.variables, {e: c * other for e, c in self.terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self._coerce(other)
        out: dict = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(a.variables, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Poly):
            other = other.constant_value()
        other = to_fraction(other)
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        return self * (1 / other)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Poly.constant(1, self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # comparison

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(other, self.variables)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.trim()._key() == other.trim()._key()

    def _key(self):
        return (self.variables, frozenset(self.terms.items()))

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self.trim()._key()))
        return self._hash

    # evaluation

    def eval(self, assignment: Mapping[str, Scalar]) -> Fraction:
        """Exact value at a full assignment of every occurring variable."""
        missing = [v for v in self.used_variables() if v not in assignment]
        if missing:
            raise UnboundVariableError(missing[0])
        vals = [to_fraction(assignment[v]) if v in assignment else None for v in self.variables]
        total = Fraction(0)
        for exps, c in self.terms.items():
            t = c
            for v, e in zip(vals, exps):
                if e:
                    t *= v**e
            total += t
        return total

    def subs(self, assignment: Mapping[str, Union[Scalar, "Poly"]]) -> "Poly":
        """Substitute values (or polynomials) for some variables."""
        keep = tuple(v for v in self.variables if v not in assignment)
        result = Poly(keep)
        for exps, c in self.terms.items():
            mono = {}
            factor: Union[Fraction, Poly] = c
            for v, e in zip(self.variables, exps):
                if not e:
                    continue
                if v in assignment:
                    val = assignment[v]
                    factor = factor * (val**e if isinstance(val, Poly) else to_fraction(val) ** e)
                else:
                    mono[v] = e
            base = Poly.monomial(keep, tuple(mono.get(v, 0) for v in keep))
            result = result + base * factor
        return result

    def evaluator(self, names: Sequence[str]):
        """Fast closure evaluating on a positional tuple of values for ``names``."""
        names = tuple(names)
        missing = [v for v in self.used_variables() if v not in names]
        if missing:
            raise UnboundVariableError(missing[0])
        idx = {v: i for i, v in enumerate(names)}
        terms = [
            (c, tuple((idx[v], e) for v, e in zip(self.variables, exps) if e))
            for exps, c in self.terms.items()
        ]

        def run(values):
            total = 0
            for c, factors in terms:
                t = c
                for i, e in factors:
                    t = t * values[i] ** e
                total += t
            return total

        return run

    # text

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(self.variables, exps) if e
            )
            mag = abs(c)
            if mono:
                body = mono if mag == 1 else f"{mag}*{mono}"
            else:
                body = str(mag)
            parts.append(("-" if c < 0 else "+", body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Poly({str(self)!r})"

    def to_terms(self) -> list:
        """Serializable term list ``[[exponents], "num/den"]`` in canonical order."""
        return [[list(e), f"{c.numerator}/{c.denominator}"] for e, c in self.sorted_terms()]

    @classmethod
    def from_terms(cls, variables: Sequence[str], terms: Iterable) -> "Poly":
        return cls(tuple(variables), {tuple(e): Fraction(c) for e, c in terms})


def lam_vars(n: int) -> tuple[Poly, ...]:
    names = lam_names(n)
    return tuple(Poly.var(v, names) for v in names)


def b_vars(m: int) -> tuple[Poly, ...]:
    names = b_names(m)
    return tuple(Poly.var(v, names) for v in names)


def poly_eval(p: Poly, assignment: Mapping[str, Scalar]) -> Fraction:
    return p.eval(assignment)


@dataclass(frozen=True)
class RatMatrix:
    """Dense row-major rational matrix."""

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entries length must equal rows*cols")
        object.__setattr__(self, "entries", tuple(to_fraction(x) for x in self.entries))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Scalar]], cols: int | None = None) -> "RatMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged matrix")
        return cls(len(rows), cols, tuple(x for r in rows for x in r))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def T(self) -> "RatMatrix":
        return RatMatrix(
            self.cols, self.rows,
            tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)),
        )

    def vecmul(self, v: Sequence[Scalar]) -> tuple:
        """Row vector times matrix."""
        if len(v) != self.rows:
            raise ValueError("dimension mismatch")
        return tuple(sum((to_fraction(v[i]) * self[i, j] for i in range(self.rows)), Fraction(0))
                     for j in range(self.cols))


def _as_rows(M) -> list[list[Fraction]]:
    if isinstance(M, RatMatrix):
        return M.to_rows()
    return [[to_fraction(x) for x in r] for r in M]


def _integer_rows(rows: list[list[Fraction]]) -> list[list[int]]:
    out = []
    for r in rows:
        den = 1
        for x in r:
            den = den * x.denominator // math.gcd(den, x.denominator)
        out.append([int(x * den) for x in r])
    return out


def bareiss_echelon(M) -> tuple[list[list[int]], list[int]]:
    """Fraction-free row echelon form.

    Rows are first scaled to integers (row scaling leaves rank and row space
    unchanged). Returns the echelon rows and the pivot columns.
    """
    a = _integer_rows(_as_rows(M))
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    prev = 1
    r = 0
    pivots = []
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        for i in range(r + 1, nrows):
            f = a[i][c]
            row_i = a[i]
            row_r = a[r]
            for j in range(c + 1, ncols):
                row_i[j] = (piv * row_i[j] - f * row_r[j]) // prev
            row_i[c] = 0
        prev = piv
        pivots.append(c)
        r += 1
    return a, pivots


def matrix_rank(M) -> int:
    return len(bareiss_echelon(M)[1])


def determinant(M) -> Fraction:
    rows = _as_rows(M)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return Fraction(1)
    scale = Fraction(1)
    for r in rows:
        den = 1
        for x in r:
            den = den * x.denominator // math.gcd(den, x.denominator)
        scale /= den
    a = _integer_rows(rows)
    sign = 1
    prev = 1
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        piv = a[c][c]
        for i in range(c + 1, n):
            f = a[i][c]
            for j in range(c + 1, n):
                a[i][j] = (piv * a[i][j] - f * a[c][j]) // prev
            a[i][c] = 0
        prev = piv
    return sign * a[n - 1][n - 1] * scale


def rref(M) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals (zero rows dropped)."""
    a, pivots = bareiss_echelon(M)
    rows = [[Fraction(x) for x in a[i]] for i in range(len(pivots))]
    for i, c in enumerate(pivots):
        piv = rows[i][c]
        rows[i] = [x / piv for x in rows[i]]
    for i in range(len(pivots) - 1, -1, -1):
        c = pivots[i]
        for k in range(i):
            f = rows[k][c]
            if f:
                rows[k] = [x - f * y for x, y in zip(rows[k], rows[i])]
    return rows, pivots


def nullspace(M, ncols: int | None = None) -> list[tuple[Fraction, ...]]:
    """Basis of {x : Mx = 0}, one vector per free column, in column order."""
    rows = _as_rows(M)
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows:
        return [tuple(Fraction(int(i == f)) for i in range(ncols)) for f in range(ncols)]
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -red[i][f]
        basis.append(tuple(v))
    return basis


def left_nullspace(M) -> list[tuple[Fraction, ...]]:
    """Basis of {v : vM = 0}."""
    rows = _as_rows(M)
    nrows = len(rows)
    if nrows == 0:
        return []
    ncols = len(rows[0])
    if ncols == 0:
        return [tuple(Fraction(int(i == f)) for i in range(nrows)) for f in range(nrows)]
    transposed = [[rows[i][j] for i in range(nrows)] for j in range(ncols)]
    return nullspace(transposed, nrows)
