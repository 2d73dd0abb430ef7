"""Empirical discovery of P-recurrences for F0 from exact tables.

For fixed numeric rates, an ansatz of order R and coefficient degree d in
``b1..bm`` turns the identity ``sum_r P_r(b) F0(b + r e_i) = 0`` at every
point of a fitting window into a homogeneous linear system over the
rationals. A nullspace vector is a candidate; it is accepted only if the
identity also holds exactly on a disjoint validation window.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exact import Poly, b_names, nullspace, rref
from .genfun import as_matrix, f0_table, rate_vector
from .recurrence import Box, PRecurrence, shift


def monomials(m: int, degree: int) -> list[tuple]:
    """Exponent vectors of total degree <= ``degree``, graded then lexicographic."""
    out = [e for e in itertools.product(range(degree + 1), repeat=m) if sum(e) <= degree]
    return sorted(out, key=lambda e: (sum(e), tuple(-x for x in e)))


def unknown_count(m: int, order: int, degree: int) -> int:
    return (order + 1) * math.comb(degree + m, m)


@dataclass(frozen=True)
class GuessAnsatz:
    direction: int
    order: int
    degree: int
    fit_window: Box
    validation_window: Box

    def __post_init__(self):
        if self.order < 1 or self.degree < 0:
            raise ValueError("need order >= 1 and degree >= 0")
        if not self.fit_window.disjoint(self.validation_window):
            raise ValueError("fitting and validation windows overlap")
        m = len(self.fit_window.lo)
        if len(self.fit_window) <= unknown_count(m, self.order, self.degree):
            raise ValueError("fitting window gives no more equations than unknowns")

    @classmethod
    def default(cls, m: int, direction: int, order: int, degree: int) -> "GuessAnsatz":
        lo = max(order, 2)
        hi = order + degree + m + 4
        side = degree + 2
        while (hi - lo + 1) * (side + 1) ** (m - 1) <= unknown_count(m, order, degree):
            hi += 1
        fit = Box(
            tuple(lo if k == direction else 0 for k in range(m)),
            tuple(hi if k == direction else side for k in range(m)),
        )
        vlo, vhi = hi + 1, hi + order + degree + 4
        val = Box(
            tuple(vlo if k == direction else 0 for k in range(m)),
            tuple(vhi if k == direction else side + 1 for k in range(m)),
        )
        return cls(direction, order, degree, fit, val)


def _system(table, points, direction, order, monos):
    rows = []
    for p in points:
        vals = [table[shift(p, direction, r)] for r in range(order + 1)]
        mons = [math.prod(x**e for x, e in zip(p, mono)) for mono in monos]
        rows.append([v * mv for v in vals for mv in mons])
    return rows


def _pick(rows, monos, order) -> Optional[list]:
    """Nullspace element of least total degree, ties broken by smallest leading term."""
    k = len(monos)
    for dd in range(max(sum(e) for e in monos) + 1):
        keep = [r * k + c for r in range(order + 1) for c, e in enumerate(monos) if sum(e) <= dd]
        sub = [[row[c] for c in keep] for row in rows]
        basis = nullspace(sub, len(keep))
        if not basis:
            continue
        if len(basis) > 1:
            # order columns from most to least significant term, reduce, take the last row
            prio = sorted(range(len(keep)), key=lambda c: (keep[c] // k, _term_key(monos[keep[c] % k])), reverse=True)
            red, _ = rref([[v[c] for c in prio] for v in basis])
            chosen = [Fraction(0)] * len(keep)
            for pos, c in enumerate(prio):
                chosen[c] = red[-1][pos]
            vec = chosen
        else:
            vec = list(basis[0])
        full = [Fraction(0)] * (k * (order + 1))
        for c, v in zip(keep, vec):
            full[c] = v
        return full
    return None


def _term_key(e):
    return (sum(e), e)


def _to_recurrence(vec, monos, m, direction, order) -> Optional[PRecurrence]:
    names = b_names(m)
    k = len(monos)
    coeffs = [Poly(names, {monos[c]: vec[r * k + c] for c in range(k)}) for r in range(order + 1)]
    while coeffs and coeffs[-1].is_zero():
        coeffs.pop()
    if len(coeffs) < 2:
        return None
    lead = coeffs[-1]
    scale = lead.content()
    if lead.leading_coefficient() < 0:
        scale = -scale
    return PRecurrence(direction, tuple(c / scale for c in coeffs))


def holds_on(rec: PRecurrence, table, points) -> bool:
    bn = b_names(len(table.bounds))
    evs = [c.evaluator(bn) for c in rec.coefficients]
    for p in points:
        acc = 0
        for r, ev in enumerate(evs):
            acc += ev(p) * table[shift(p, rec.direction, r)]
        if acc:
            return False
    return True


def fit(A, lam, ansatz: GuessAnsatz) -> Optional[PRecurrence]:
    """Fit one recurrence on the ansatz windows; None if nothing validates."""
    A = as_matrix(A)
    rates = rate_vector(A, lam)
    if isinstance(rates[0], Poly):
        raise ValueError("guessing works with numeric rates")
    m = A.m
    if len(ansatz.fit_window.lo) != m or len(ansatz.validation_window.lo) != m:
        raise ValueError("window dimension does not match the matrix")
    i, R = ansatz.direction, ansatz.order
    bounds = [max(w.hi[k] for w in (ansatz.fit_window, ansatz.validation_window)) for k in range(m)]
    bounds[i] += R
    table = f0_table(A, rates, bounds, "exp")
    monos = monomials(m, ansatz.degree)
    rows = _system(table, ansatz.fit_window, i, R, monos)
    vec = _pick(rows, monos, R)
    if vec is None:
        return None
    rec = _to_recurrence(vec, monos, m, i, R)
    if rec is None or not holds_on(rec, table, ansatz.validation_window):
        return None
    return rec


def minimal_fit(A, lam, direction: int, max_order: int, max_degree: int) -> Optional[PRecurrence]:
    """First successful fit scanning (order, degree) by increasing order+degree, then order."""
    A = as_matrix(A)
    if max_order < 1 or max_degree < 0:
        return None
    for total in range(1, max_order + max_degree + 1):
        for R in range(1, min(total, max_order) + 1):
            d = total - R
            if d > max_degree:
                continue
            rec = fit(A, lam, GuessAnsatz.default(A.m, direction, R, d))
            if rec is not None:
                return rec
    return None


def guess_system(A, lam, max_order: int = 4, max_degree: int = 4):
    """Recurrences for every direction bundled as a fixed-rate RecurrenceSystem."""
    from .recurrence import RecurrenceSystem

    A = as_matrix(A)
    recs = []
    for i in range(A.m):
        rec = minimal_fit(A, lam, i, max_order, max_degree)
        if rec is None:
            raise LookupError(f"no recurrence found in direction {i + 1} up to order {max_order}, degree {max_degree}")
        recs.append(rec)
    return RecurrenceSystem(A, recs, rates=lam)
