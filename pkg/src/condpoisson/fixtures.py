"""Constraint matrices, printed recurrences and reaction networks used as reference data.

Printed recurrences are stored with denominators cleared, i.e. as
``sum_r P_r F0(b + r e_i) = 0``. Each carries the outcome of exact
verification against the generating function (``holds``); a recurrence that
does not hold is kept for the record and a guessed replacement is used in
its place (see :func:`replacement`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .exact import b_vars, lam_vars
from .genfun import ConstraintMatrix, two_row_aggregates
from .recurrence import PRecurrence

MATRICES = {
    "one_row": ConstraintMatrix(((1, 1),)),
    "bimolecular": ConstraintMatrix(((1, 0, 1), (0, 1, 1))),
    "water": ConstraintMatrix(((1, 0, 1), (0, 2, 1))),
    "receptor_ligand": ConstraintMatrix(((0, 0, 1, 1, 1), (1, 1, 0, 1, 1))),
    "envz_ompr": ConstraintMatrix(((1, 0, 1, 0, 1, 1), (0, 1, 1, 1, 0, 1))),
    "futile_cycle": ConstraintMatrix(((0, 0, 1, 0, 1, 0), (0, 0, 0, 1, 0, 1), (1, 1, 0, 0, 1, 1))),
    "il1_trap": ConstraintMatrix(
        (
            (1, 0, 0, 0, 1, 1, 0, 0),
            (0, 1, 0, 0, 1, 0, 0, 1),
            (0, 0, 1, 0, 0, 1, 1, 0),
            (0, 0, 0, 1, 0, 0, 1, 1),
        )
    ),
}

# reported correlation matrix for receptor_ligand, lam = 1, b = (5, 5)
RECEPTOR_LIGAND_CORRELATION = (
    (1.0, -0.3647053019, 0.5636021195, -0.2407443460, -0.2407443460),
    (-0.3647053019, 1.0, 0.5636021195, -0.2407443460, -0.2407443460),
    (0.5636021195, 0.5636021195, 1.0, -0.4271530174, -0.4271530174),
    (-0.2407443460, -0.2407443460, -0.4271530174, 1.0, -0.6350805992),
    (-0.2407443460, -0.2407443460, -0.4271530174, -0.6350805992, 1.0),
)

# reported conditional mean / "variance" of X1 for il1_trap, lam = 1
IL1_REPORTED = {
    (10, 10, 10, 10): (1.897, 1.112),
    (20, 20, 20, 20): (2.813, 1.379),
}


@dataclass(frozen=True)
class RecurrenceFixture:
    name: str
    matrix: str
    recurrences: tuple
    holds: tuple
    printed_initial: dict = field(default_factory=dict)
    notes: str = ""

    @property
    def A(self) -> ConstraintMatrix:
        return MATRICES[self.matrix]


def _rec(direction, coeffs):
    return PRecurrence(direction, tuple(coeffs))


def _one_row():
    l1, l2 = lam_vars(2)
    (b1,) = b_vars(1)
    return RecurrenceFixture(
        "one_row", "one_row",
        (_rec(0, [-(l1 + l2), 1 + b1]),),
        holds=(True,),
        printed_initial={(1,): l1 + l2},
        notes="printed text also gives F0(0)=0, which contradicts F0(0)=1; initial values are regenerated",
    )


def _bimolecular():
    l1, l2, l3 = lam_vars(3)
    b1, b2 = b_vars(2)
    n1 = -b2 * l3 + b1 * l3 + l3 - l1 * l2
    n2 = -l3 + b1 * l3 - b2 * l3 + l1 * l2
    return RecurrenceFixture(
        "bimolecular", "bimolecular",
        (
            _rec(0, [-l1 * l3, n1, l2 * (2 + b1)]),
            _rec(1, [-l2 * l3, -n2, l1 * (b2 + 2)]),
        ),
        holds=(True, True),
        printed_initial={
            (1, 1): l3 + l1 * l2,
            (1, 2): l2 * l3 + l2**2 * l1 / 2,
            (2, 1): l1 * l3 + l2 * l1**2 / 2,
            (2, 2): l3**2 / 2 + l2 * l1 * l3 + l2**2 * l1**2 / 4,
        },
        notes="printed 2x2 table reads as a plain matrix: row = b1, column = b2",
    )


def _water():
    l1, l2, l3 = lam_vars(3)
    b1, b2 = b_vars(2)
    d = 2 * l2 * (3 + b1) * (2 + b1)
    return RecurrenceFixture(
        "water", "water",
        (
            _rec(0, [
                -l1 * l3**2,
                l3**2 - b2 * l3**2 + 2 * l2 * l1**2 + b1 * l3**2,
                -l1 * l2 * (2 + b1),
                d,
            ]),
            _rec(1, [-2 * l2 * l3, -2 * l1 * l2, -l3 * (b1 - 2 - b2), l1 * (3 + b2)]),
        ),
        holds=(False, True),
        printed_initial={
            (1, 1): l3, (1, 2): l1 * l2, (1, 3): l2 * l3,
            (2, 1): l1 * l3, (2, 2): l3**2 / 2 + l2 * l1**2 / 2, (2, 3): l2 * l1 * l3,
            (3, 1): l1**2 * l3 / 2, (3, 2): l1 * l3**2 / 2 + l2 * l1**3 / 6,
            (3, 3): l3**3 / 6 + l2 * l1**2 * l3 / 2,
        },
        notes="printed 3x3 table reads as a plain matrix: row = b1, column = b2; the printed b1 "
              "recurrence fails already at b=(0,0) (not a sign typo); the b2 recurrence holds",
    )


def _receptor_ligand():
    l1, l2, l3, l4, l5 = lam_vars(5)
    b1, b2 = b_vars(2)
    n1 = -b2 * l5 - b2 * l4 + l5 + l4 - l1 * l3 - l2 * l3 + b1 * l5 + b1 * l4
    n2 = -l5 - l4 + b1 * l5 + b1 * l4 - b2 * l5 - b2 * l4 + l2 * l3 + l1 * l3
    s, t = l4 + l5, l1 + l2
    return RecurrenceFixture(
        "receptor_ligand", "receptor_ligand",
        (
            _rec(0, [-l3 * s, n1, t * (2 + b1)]),
            _rec(1, [-s * t, -n2, l3 * (b2 + 2)]),
        ),
        holds=(True, True),
        printed_initial={
            (1, 1): s + t * l3,
            (1, 2): s * t + t**2 * l3 / 2,
            (2, 1): l3 * s + t * l3**2 / 2,
            (2, 2): s**2 / 2 + t * l3 * s + t**2 * l3**2 / 4,
        },
    )


def _envz_ompr():
    l1, l2, l3, l4, l5, l6 = lam_vars(6)
    b1, b2 = b_vars(2)
    n1 = l3 + l6 - l5 * l4 - l5 * l2 + b1 * l3 + b1 * l6 - l1 * l4 - l1 * l2 - b2 * l3 - b2 * l6
    n2 = b1 * l6 + b1 * l3 - b2 * l6 - b2 * l3 + l1 * l4 + l5 * l4 + l1 * l2 + l5 * l2 - l6 - l3
    p, q, c = l1 + l5, l2 + l4, l3 + l6
    return RecurrenceFixture(
        "envz_ompr", "envz_ompr",
        (
            _rec(0, [-c * p, n1, q * (2 + b1)]),
            _rec(1, [-c * q, -n2, (b2 + 2) * p]),
        ),
        holds=(True, True),
        printed_initial={
            (1, 1): c + q * p,
            (1, 2): c * q + q**2 * p / 2,
            (2, 1): p * c + q * p**2 / 2,
            (2, 2): c**2 / 2 + q * p * c + q**2 * p**2 / 4,
        },
        notes="second term of the b2 recurrence is typeset as .../(b2+2)(l5+l1); read with the "
              "same denominator as the first term",
    )


def _futile_cycle():
    l1, l2, l3, l4, l5, l6 = lam_vars(6)
    b1, b2, b3 = b_vars(3)
    n1 = -b2 * l6 - b2 * l3 - l1 * l2 - l1 * l4 - l5 * l2 - l5 * l4 + b1 * l6 + b1 * l3 + l6 + l3
    n2 = b1 * l3 + b1 * l6 - l3 - l6 + l1 * l2 + l5 * l2 + l1 * l4 + l5 * l4 - b2 * l3 - b2 * l6
    return RecurrenceFixture(
        "futile_cycle", "futile_cycle",
        (
            _rec(0, [-(l6 + l3) * (l1 + l5), n1, (l2 + l4) * (2 + b1)]),
            _rec(1, [-(l6 + l3) * (l2 + l4), -n2, (b2 + 2) * (l1 + l5)]),
        ),
        holds=(False, False),
        notes="three-row matrix but only b1/b2 recurrences are printed (written for 'F'); "
              "checked against the three-argument F0 with b3 ranging over the window; both fail",
    )


FIXTURES = {f.name: f for f in (
    _one_row(), _bimolecular(), _water(), _receptor_ligand(), _envz_ompr(), _futile_cycle(),
)}


# outcome of verifying the printed single-sum b1 recurrence on two-row 0/1 matrices
TWO_ROW_PRINTED_HOLDS = False
TWO_ROW_PRINTED_NOTES = (
    "fails already at b=(0,0) on bimolecular, receptor_ligand and envz_ompr under either pairing of "
    "the first two aggregates; a guessed order-2 recurrence replaces it"
)


def two_row_printed_recurrence(A, swap: bool = False) -> PRecurrence:
    """The printed order-2 b1 recurrence for a general 0/1 two-row matrix.

    The printed formula is written in three aggregates; in the exponent
    polynomial the first pairs with z1, the second with z2 and the third with
    z1 z2. ``swap=True`` exchanges the first two.
    """
    z1, z2, both = two_row_aggregates(A, None)
    if swap:
        z1, z2 = z2, z1
    c01, c10, c11 = z1, z2, both
    b1, b2 = b_vars(2)
    return PRecurrence(0, (
        c11 * c10 + c01 * c10**2,
        -c11 * b1 - c11 + b2 * c11 + b2 * c10 * c01 - 2 * b1 * c10 * c01 - 3 * c01 * c10,
        c10 * b1**2 + 4 * c10 - 2 * c10 * b2 + 4 * c10 * b1 - c10 * b1 * b2,
    ))


def replacement(A, lam, direction: int, max_order: int = 4, max_degree: int = 4) -> PRecurrence:
    """A guessed recurrence standing in for a printed one that fails verification."""
    from .guess import minimal_fit

    rec = minimal_fit(A, lam, direction, max_order, max_degree)
    if rec is None:
        raise LookupError(f"no replacement recurrence in direction {direction + 1}")
    return rec


@dataclass(frozen=True)
class NetworkFixture:
    """A reaction network together with its reported structure.

    ``species_order`` is the column order of the matching constraint matrix;
    ``steady_state`` is a positive complex-balanced point for the listed rates
    (None when the network is not complex balanced).
    """

    name: str
    text: str
    species_order: tuple
    report: tuple  # (c, l, rank, deficiency, weakly reversible)
    matrix: Optional[str] = None
    steady_state: Optional[tuple] = None
    notes: str = ""

    def network(self):
        from .crn import parse_network

        return parse_network(self.text).reorder(self.species_order)


NETWORKS = {f.name: f for f in (
    NetworkFixture(
        "one_row", "X1 <-> X2 @ k1=3, k2=2\n", ("X1", "X2"), (2, 1, 1, 0, True), "one_row",
        (Fraction(1), Fraction(3, 2)),
    ),
    NetworkFixture(
        "bimolecular", "X1 + X2 <-> X3 @ k1=2, k2=3\n", ("X1", "X2", "X3"), (2, 1, 1, 0, True),
        "bimolecular", (Fraction(1), Fraction(1), Fraction(2, 3)),
    ),
    NetworkFixture(
        "water", "2 X1 + X2 <-> 2 X3 @ k1=4, k2=1\n", ("X1", "X2", "X3"), (2, 1, 1, 0, True),
        "water", (Fraction(1), Fraction(1), Fraction(2)),
    ),
    NetworkFixture(
        "receptor_ligand",
        "R1 + L <-> R2 + L @ k31=1, k13=1\n"
        "R1 + L <-> C1 @ k21=1, k12=1\n"
        "R2 + L <-> C2 @ k43=1, k34=1\n"
        "C1 <-> C2 @ k42=1, k24=1\n",
        ("R1", "R2", "L", "C1", "C2"), (4, 1, 3, 0, True), "receptor_ligand", (Fraction(1),) * 5,
    ),
    NetworkFixture(
        "envz_ompr",
        "R + Z <-> R + ZP @ k1=1, k2=1\n"
        "R + ZP <-> ERP @ k3=1, k4=1\n"
        "ERP -> RP + Z @ k5=1\n"
        "RP + Z <-> EPR @ k6=1, k7=1\n"
        "EPR -> R + Z @ k8=1\n",
        ("R", "ZP", "ERP", "Z", "RP", "EPR"), (5, 1, 4, 0, True), "envz_ompr",
        (Fraction(3, 2), Fraction(2, 3), Fraction(1, 2), Fraction(1), Fraction(1), Fraction(1, 2)),
        notes="with all rate constants 1 the all-ones vector is not a steady state (dR/dt = 1); "
              "the listed point is the complex-balanced steady state for unit rates",
    ),
    NetworkFixture(
        "il1_trap",
        "R + L <-> RL @ k1=1, k2=1\n"
        "R + A <-> RA @ k3=1, k4=1\n"
        "A + T <-> AT @ k5=1, k6=1\n"
        "L + T <-> LT @ k7=1, k8=1\n",
        ("R", "L", "A", "T", "RL", "RA", "AT", "LT"), (8, 4, 4, 0, True), "il1_trap", (Fraction(1),) * 8,
    ),
    NetworkFixture(
        "futile_cycle",
        "E + S <-> C @ k1=1, k2=1\n"
        "C <-> E + P @ k3=1, k4=1\n"
        "F + P <-> D @ k5=1, k6=1\n"
        "D <-> F + S @ k7=1, k8=1\n",
        ("S", "P", "E", "F", "C", "D"), (6, 2, 3, 1, True), "futile_cycle",
        notes="the printed display reuses the label k4 on two reactions; eight distinct constants are used",
    ),
    NetworkFixture(
        "counterexample", "A -> B @ k1=1\n2 B -> 2 A @ k2=1\n", ("A", "B"), (4, 2, 1, 1, False),
        notes="mass-action steady state at (2, 1) that is not complex balanced",
    ),
)}

COUNTEREXAMPLE_STEADY_STATE = (Fraction(2), Fraction(1))
ENVZ_ALL_ONES = (Fraction(1),) * 6
