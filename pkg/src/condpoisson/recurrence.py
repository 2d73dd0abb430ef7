"""Directional P-recurrences for F0: stepping, constant-memory marching, verification.

A recurrence in direction ``i`` (zero-based) of order ``R`` is

    sum_{r=0}^{R} P_r(b, lam) * F0(b + r e_i) = 0

with coefficient polynomials in ``b1..bm`` and optionally ``lam1..lamn``.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from .errors import DimensionError, DiscreteSingularityError
from .exact import Poly, b_names, canonical_order, lam_names, to_fraction
from .genfun import ConstraintMatrix, as_matrix, f0, f0_table, rate_vector

FORMAT_VERSION = 1


@dataclass(frozen=True)
class PRecurrence:
    direction: int
    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(c if isinstance(c, Poly) else Poly.constant(to_fraction(c)) for c in self.coefficients)
        if len(coeffs) < 2:
            raise ValueError("a recurrence needs order >= 1 (at least two coefficients)")
        if coeffs[-1].is_zero():
            raise ValueError("leading coefficient must not be the zero polynomial")
        if self.direction < 0:
            raise ValueError("direction must be non-negative")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def variables(self) -> tuple:
        return canonical_order(v for c in self.coefficients for v in c.used_variables())

    def bind(self, m: int, lam=None) -> "_BoundRecurrence":
        return _BoundRecurrence(self, m, lam)

    def substitute_rates(self, lam) -> "PRecurrence":
        names = lam_names(len(lam))
        assignment = {v: to_fraction(x) for v, x in zip(names, lam)}
        return PRecurrence(self.direction, tuple(c.subs(assignment) for c in self.coefficients))

    def scaled(self, factor) -> "PRecurrence":
        return PRecurrence(self.direction, tuple(c * factor for c in self.coefficients))

    def __str__(self):
        i = self.direction + 1
        parts = []
        for r, c in enumerate(self.coefficients):
            if c.is_zero():
                continue
            shift = f"b{i}+{r}" if r else f"b{i}"
            parts.append(f"({c})*F0[{shift}]")
        return " + ".join(parts) + " = 0"

    def to_dict(self) -> dict:
        vs = self.variables
        return {
            "direction": self.direction + 1,
            "order": self.order,
            "variables": list(vs),
            "coefficients": [c.lift(vs).to_terms() if c.terms else [] for c in self.coefficients],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PRecurrence":
        vs = tuple(data["variables"])
        coeffs = tuple(Poly.from_terms(vs, terms) for terms in data["coefficients"])
        rec = cls(int(data["direction"]) - 1, coeffs)
        if rec.order != int(data["order"]):
            raise ValueError("order field disagrees with the coefficient count")
        return rec


def dumps(rec: PRecurrence) -> str:
    return json.dumps(rec.to_dict(), sort_keys=True)


def loads(text: str) -> PRecurrence:
    return PRecurrence.from_dict(json.loads(text))


class _BoundRecurrence:
    """Coefficients compiled for fast evaluation at integer points."""

    def __init__(self, rec: PRecurrence, m: int, lam=None):
        self.rec = rec
        if rec.direction >= m:
            raise DimensionError(f"direction {rec.direction + 1} exceeds the {m} constraint rows")
        bn = b_names(m)
        coeffs = rec.coefficients
        if lam is not None:
            assignment = {v: to_fraction(x) for v, x in zip(lam_names(len(lam)), lam)}
            # a coefficient may vanish identically at these rates; that surfaces as a singularity
            coeffs = [c.subs(assignment) for c in coeffs]
        extra = sorted({v for c in coeffs for v in c.used_variables() if v not in bn})
        if extra:
            raise DimensionError(f"recurrence uses unbound variables {extra}")
        self.direction = rec.direction
        self.order = rec.order
        self._evals = [c.evaluator(bn) for c in coeffs]

    def coefficients_at(self, point) -> list:
        return [Fraction(ev(point)) for ev in self._evals]

    def leading_at(self, point) -> Fraction:
        return Fraction(self._evals[-1](point))


def shift(point, direction: int, by: int) -> tuple:
    p = list(point)
    p[direction] += by
    return tuple(p)


def step(rec: PRecurrence, known: Sequence, point, lam) -> Fraction:
    """F0 at ``point + R e_i`` from the R values F0(point + r e_i), r < R."""
    bound = rec if isinstance(rec, _BoundRecurrence) else rec.bind(len(point), lam)
    return _step(bound, known, tuple(point))


def _step(bound: _BoundRecurrence, known, point) -> Fraction:
    if len(known) != bound.order:
        raise ValueError(f"need {bound.order} known values, got {len(known)}")
    coeffs = bound.coefficients_at(point)
    lead = coeffs[-1]
    if not lead:
        raise DiscreteSingularityError(bound.direction, point)
    acc = Fraction(0)
    for c, v in zip(coeffs, known):
        if c:
            acc += c * v
    return -acc / lead


@dataclass(frozen=True)
class Box:
    """Inclusive integer box ``lo <= b <= hi``."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(int(x) for x in self.lo))
        object.__setattr__(self, "hi", tuple(int(x) for x in self.hi))
        if len(self.lo) != len(self.hi):
            raise DimensionError("box corners differ in dimension")

    @classmethod
    def cube(cls, m: int, lo: int, hi: int) -> "Box":
        return cls((lo,) * m, (hi,) * m)

    def __iter__(self) -> Iterator[tuple]:
        return itertools.product(*(range(a, b + 1) for a, b in zip(self.lo, self.hi)))

    def __len__(self):
        n = 1
        for a, b in zip(self.lo, self.hi):
            n *= max(0, b - a + 1)
        return n

    def disjoint(self, other: "Box") -> bool:
        return any(a1 > b2 or a2 > b1 for a1, b1, a2, b2 in zip(self.lo, self.hi, other.lo, other.hi))


@dataclass(frozen=True)
class VerifyResult:
    passed: bool
    checked: int
    counterexample: Optional[tuple] = None
    residual: object = None

    def __bool__(self):
        return self.passed


def residual(rec: PRecurrence, values, point, lam=None):
    """sum_r P_r(point) F0(point + r e_i) with F0 looked up in ``values``."""
    point = tuple(point)
    assignment = {v: x for v, x in zip(b_names(len(point)), point)}
    if lam is not None:
        assignment.update({v: to_fraction(x) for v, x in zip(lam_names(len(lam)), lam)})
    acc = 0
    for r, c in enumerate(rec.coefficients):
        if c.is_zero():
            continue
        cv = c.subs(assignment)
        if lam is not None:
            cv = cv.constant_value()
        acc = acc + values[shift(point, rec.direction, r)] * cv
    return acc


def verify(rec: PRecurrence, A, lam, window, method: str = "exp") -> VerifyResult:
    """Check the recurrence identity exactly at every point of ``window``.

    With ``lam=None`` F0 is symbolic and the identity is checked as a
    polynomial identity in the rates.
    """
    A = as_matrix(A)
    points = list(window)
    if not points:
        return VerifyResult(True, 0)
    if any(len(p) != A.m for p in points):
        raise DimensionError("window dimension does not match the matrix")
    bounds = [max(p[i] for p in points) for i in range(A.m)]
    bounds[rec.direction] += rec.order
    table = f0_table(A, lam, bounds, method)
    if lam is None:
        for k, p in enumerate(points):
            res = residual(rec, table, p)
            if not (res.is_zero() if isinstance(res, Poly) else res == 0):
                return VerifyResult(False, k + 1, tuple(p), res)
        return VerifyResult(True, len(points))
    rates = rate_vector(A, lam)
    bound = rec.bind(A.m, rates)
    for k, p in enumerate(points):
        coeffs = bound.coefficients_at(p)
        res = Fraction(0)
        for r, c in enumerate(coeffs):
            if c:
                res += c * table[shift(p, rec.direction, r)]
        if res:
            return VerifyResult(False, k + 1, tuple(p), res)
    return VerifyResult(True, len(points))


@dataclass
class MarchStats:
    """Bookkeeping from one march: stored-value high-water mark and routing events."""

    steps: int = 0
    live: int = 0
    max_live: int = 0
    reroutes: int = 0
    direct: int = 0
    blocked: list = field(default_factory=list)

    def hold(self, k: int):
        self.live += k
        self.max_live = max(self.max_live, self.live)

    def release(self, k: int):
        self.live -= k


class RecurrenceSystem:
    """One recurrence per direction plus the initial block ``prod [0, R_i)``.

    Block values are exact F0 values computed here from the generating
    function (symbolic in the rates unless ``rates`` pins them). A supplied
    block is checked against the same oracle.
    """

    def __init__(self, A, recurrences: Iterable[PRecurrence], rates=None, block: Optional[dict] = None):
        self.A = as_matrix(A)
        recs = sorted(recurrences, key=lambda r: r.direction)
        if [r.direction for r in recs] != list(range(self.A.m)):
            raise ValueError(f"need exactly one recurrence for each of the {self.A.m} directions")
        self.recurrences = tuple(recs)
        self.rates = None if rates is None else rate_vector(self.A, rates)
        self.orders = tuple(r.order for r in recs)
        corner = tuple(R - 1 for R in self.orders)
        table = f0_table(self.A, self.rates, corner, "enumerate")
        expected = {p: table[p] for p in itertools.product(*(range(R) for R in self.orders))}
        if block is not None:
            block = {tuple(k): v for k, v in block.items()}
            if set(block) != set(expected):
                raise ValueError("initial block must cover exactly the box prod [0, R_i)")
            for p, v in block.items():
                if v != expected[p]:
                    raise ValueError(f"initial value at {p} disagrees with the generating function")
        self.block = expected

    def block_values(self, lam) -> dict:
        if self.rates is not None:
            if lam is not None and rate_vector(self.A, lam) != self.rates:
                raise ValueError("this system was built for fixed rates; march it with those rates")
            return dict(self.block)
        names = lam_names(self.A.n)
        assignment = dict(zip(names, lam))
        return {p: v.eval(assignment) for p, v in self.block.items()}

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_VERSION,
            "matrix": [list(r) for r in self.A.rows],
            "rates": None if self.rates is None else [f"{x.numerator}/{x.denominator}" for x in self.rates],
            "recurrences": [r.to_dict() for r in self.recurrences],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RecurrenceSystem":
        rates = data.get("rates")
        return cls(
            ConstraintMatrix(tuple(tuple(r) for r in data["matrix"])),
            [PRecurrence.from_dict(r) for r in data["recurrences"]],
            rates=None if rates is None else [Fraction(x) for x in rates],
        )


class _Marcher:
    def __init__(self, system: RecurrenceSystem, lam, stats: MarchStats):
        self.system = system
        self.A = system.A
        self.m = system.A.m
        self.rates = system.rates if lam is None else rate_vector(system.A, lam)
        if self.rates is None or isinstance(self.rates[0], Poly):
            raise ValueError("marching needs numeric rates")
        self.block = system.block_values(self.rates)
        self.bound = [r.bind(self.m, self.rates) for r in system.recurrences]
        self.orders = system.orders
        self.stats = stats

    def value(self, b: tuple, reroute: bool = True) -> Fraction:
        return self._value(b, 0, reroute)

    def _value(self, b: tuple, i: int, reroute: bool) -> Fraction:
        # coordinates < i already lie inside the block range
        if i == self.m:
            return self.block[b]
        R = self.orders[i]
        if b[i] < R:
            return self._value(b, i + 1, reroute)
        window = deque(maxlen=R)
        for c in range(R):
            seed = self._value(b[:i] + (c,) + b[i + 1:], i + 1, reroute)
            window.append(seed)
            self.stats.hold(1)
        bound = self.bound[i]
        for t in range(b[i] - R + 1):
            base = b[:i] + (t,) + b[i + 1:]
            try:
                val = _step(bound, window, base)
            except DiscreteSingularityError:
                val = self._blocked(shift(base, i, R), i, reroute)
            self.stats.steps += 1
            window.append(val)
        result = window[-1]
        self.stats.release(R)
        return result

    def _blocked(self, target: tuple, failed: int, reroute: bool) -> Fraction:
        self.stats.blocked.append(target)
        if reroute:
            for j in range(self.m):
                if j == failed or target[j] < self.orders[j]:
                    continue
                base = shift(target, j, -self.orders[j])
                bound = self.bound[j]
                if not bound.leading_at(base):
                    continue
                try:
                    known = [self.value(shift(base, j, r), reroute=False) for r in range(self.orders[j])]
                    val = _step(bound, known, base)
                except DiscreteSingularityError:
                    continue
                self.stats.reroutes += 1
                return val
        self.stats.direct += 1
        return f0(self.A, self.rates, target)


def march(system: RecurrenceSystem, lam, b, stats: Optional[MarchStats] = None) -> Fraction:
    """F0(b) by stepping the recurrences from the initial block.

    Direction m is marched first with the other coordinates inside the
    block, then direction m-1, and so on; each level keeps only a window of
    R_i values. A vanishing leading coefficient is routed around through the
    other directions (ascending), and failing that the single blocked value
    is computed from the generating function.
    """
    b = tuple(int(x) for x in b)
    if len(b) != system.A.m:
        raise DimensionError(f"expected {system.A.m} constraint counts, got {len(b)}")
    if any(x < 0 for x in b):
        raise ValueError("constraint counts must be non-negative")
    stats = stats if stats is not None else MarchStats()
    return _Marcher(system, lam, stats).value(b)
