"""Chemical reaction networks: parsing, deficiency analysis and product-form checks.

A network file has one reaction per line::

    # comment
    X1 + X2 <-> X3 @ k1=1, k2=1
    A -> B @ 1/2
    2 B -> 2 A @ 0.75

``<->`` expands to a forward and a backward reaction and needs two rates.
Species are numbered in order of first appearance. The literal ``0`` stands
for the empty complex (inflow/outflow reactions).
"""

from __future__ import annotations

import itertools
import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import networkx as nx

from .errors import DimensionError, NetworkSyntaxError
from .exact import left_nullspace, matrix_rank, rref, to_fraction
from .genfun import ConstraintMatrix

Complex = tuple


@dataclass(frozen=True)
class Reaction:
    source: Complex
    target: Complex
    rate: Fraction
    label: str = ""

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError("reaction source and target coincide")
        if any(x < 0 for x in self.source + self.target):
            raise ValueError("complexes have non-negative entries")
        if self.rate <= 0:
            raise ValueError("rate constants must be positive")


@dataclass(frozen=True)
class ReactionNetwork:
    species: tuple
    reactions: tuple

    def __post_init__(self):
        n = len(self.species)
        if len(set(self.species)) != n:
            raise ValueError("duplicate species name")
        for r in self.reactions:
            if len(r.source) != n or len(r.target) != n:
                raise DimensionError("complex length does not match the species count")

    @property
    def n(self) -> int:
        return len(self.species)

    @property
    def m(self) -> int:
        return len(self.reactions)

    @cached_property
    def complexes(self) -> tuple:
        seen = {}
        for r in self.reactions:
            seen.setdefault(r.source, None)
            seen.setdefault(r.target, None)
        return tuple(seen)

    @cached_property
    def stoichiometry(self) -> tuple:
        """Gamma as n rows; column i is T(i) - S(i)."""
        return tuple(
            tuple(r.target[s] - r.source[s] for r in self.reactions) for s in range(self.n)
        )

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.complexes)
        g.add_edges_from((r.source, r.target) for r in self.reactions)
        return g

    @property
    def rates(self) -> tuple:
        return tuple(r.rate for r in self.reactions)

    def with_rates(self, rates: Sequence) -> "ReactionNetwork":
        if len(rates) != self.m:
            raise DimensionError(f"expected {self.m} rate constants, got {len(rates)}")
        return ReactionNetwork(self.species, tuple(
            Reaction(r.source, r.target, to_fraction(k), r.label) for r, k in zip(self.reactions, rates)
        ))

    def reorder(self, names: Sequence[str]) -> "ReactionNetwork":
        """The same network with species listed in the given order."""
        if sorted(names) != sorted(self.species):
            raise ValueError("reorder needs a permutation of the species names")
        idx = [self.species.index(s) for s in names]
        perm = lambda c: tuple(c[i] for i in idx)  # noqa: E731
        return ReactionNetwork(tuple(names), tuple(
            Reaction(perm(r.source), perm(r.target), r.rate, r.label) for r in self.reactions
        ))

    def format_complex(self, c: Complex) -> str:
        parts = [(f"{k} " if k > 1 else "") + s for s, k in zip(self.species, c) if k]
        return " + ".join(parts) or "0"

    def __str__(self):
        lines = []
        for r in self.reactions:
            rate = f"{r.label}={r.rate}" if r.label else str(r.rate)
            lines.append(f"{self.format_complex(r.source)} -> {self.format_complex(r.target)} @ {rate}")
        return "\n".join(lines)


# ----------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"(?P<ws>[ \t]+)|(?P<arrow><->|->)|(?P<at>@)|(?P<plus>\+)|(?P<comma>,)|(?P<eq>=)"
    r"|(?P<num>-?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?(?:/\d+)?)|(?P<id>[A-Za-z][A-Za-z0-9_]*)"
)


def _tokens(line: str, lineno: int):
    pos = 0
    out = []
    while pos < len(line):
        mt = _TOKEN.match(line, pos)
        if mt is None:
            raise NetworkSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        if mt.lastgroup != "ws":
            out.append((mt.lastgroup, mt.group(), pos + 1))
        pos = mt.end()
    out.append(("end", "", len(line) + 1))
    return out


class _LineParser:
    def __init__(self, line: str, lineno: int):
        self.toks = _tokens(line, lineno)
        self.i = 0
        self.lineno = lineno

    def peek(self):
        return self.toks[self.i]

    def take(self, kind: str, what: str):
        tok = self.toks[self.i]
        if tok[0] != kind:
            self.fail(f"expected {what}, found {tok[1]!r}" if tok[1] else f"expected {what} before end of line", tok)
        self.i += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise NetworkSyntaxError(message, self.lineno, tok[2])

    def complex(self):
        kind, text, col = self.peek()
        if kind == "num" and text == "0" and self.toks[self.i + 1][0] in ("arrow", "at"):
            self.i += 1
            return {}, col
        terms = {}
        while True:
            kind, text, tcol = self.peek()
            coeff = 1
            if kind == "num":
                if not text.isdigit() or int(text) == 0:
                    self.fail(f"stoichiometric coefficient must be a positive integer, found {text!r}")
                coeff = int(text)
                self.i += 1
            _, name, ncol = self.take("id", "a species name")
            if name in terms:
                raise NetworkSyntaxError(
                    f"species {name!r} repeated within a complex; write '{terms[name] + coeff} {name}'",
                    self.lineno, ncol,
                )
            terms[name] = coeff
            if self.peek()[0] != "plus":
                return terms, col
            self.i += 1

    def rate(self):
        label = ""
        if self.peek()[0] == "id":
            label = self.take("id", "a rate label")[1]
            self.take("eq", "'=' after the rate label")
        kind, text, col = self.take("num", "a rate constant")
        try:
            value = to_fraction(text)
        except (ValueError, ZeroDivisionError):
            self.fail(f"malformed rate {text!r}", (kind, text, col))
        if value <= 0:
            self.fail(f"rate constants must be positive, found {text}", (kind, text, col))
        return value, label

    def reaction(self):
        lhs, lcol = self.complex()
        _, arrow, acol = self.take("arrow", "'->' or '<->'")
        rhs, _ = self.complex()
        self.take("at", "'@' followed by rate constants")
        rates = [self.rate()]
        if self.peek()[0] == "comma":
            self.i += 1
            rates.append(self.rate())
        end = self.peek()
        if end[0] != "end":
            self.fail(f"unexpected {end[1]!r}")
        want = 2 if arrow == "<->" else 1
        if len(rates) != want:
            self.fail(f"'{arrow}' takes {want} rate constant{'s' if want > 1 else ''}, found {len(rates)}", end)
        if lhs == rhs:
            raise NetworkSyntaxError("source and target complexes coincide", self.lineno, acol)
        return lhs, rhs, arrow, rates


def parse_network(text: str) -> ReactionNetwork:
    """Parse a line-oriented network description."""
    parsed = []
    species: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        lhs, rhs, arrow, rates = _LineParser(line, lineno).reaction()
        for name in itertools.chain(lhs, rhs):
            species.setdefault(name, len(species))
        parsed.append((lhs, rhs, arrow, rates))
    if not parsed:
        raise NetworkSyntaxError("no reactions", 1, 1)
    names = tuple(species)

    def vec(terms):
        return tuple(terms.get(s, 0) for s in names)

    reactions = []
    for lhs, rhs, arrow, rates in parsed:
        reactions.append(Reaction(vec(lhs), vec(rhs), *rates[0]))
        if arrow == "<->":
            reactions.append(Reaction(vec(rhs), vec(lhs), *rates[1]))
    return ReactionNetwork(names, tuple(reactions))


def load_network(path) -> ReactionNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


# ----------------------------------------------------------------------------
# structure


@dataclass(frozen=True)
class NetworkReport:
    complexes: int
    linkage_classes: int
    rank: int
    deficiency: int
    weakly_reversible: bool

    def __str__(self):
        wr = "true" if self.weakly_reversible else "false"
        return (f"c={self.complexes} l={self.linkage_classes} rank={self.rank} "
                f"deficiency={self.deficiency} weakly_reversible={wr}")

    def to_dict(self) -> dict:
        return {
            "complexes": self.complexes,
            "linkage_classes": self.linkage_classes,
            "rank": self.rank,
            "deficiency": self.deficiency,
            "weakly_reversible": self.weakly_reversible,
        }


def analyze(net: ReactionNetwork) -> NetworkReport:
    g = net.graph
    c = g.number_of_nodes()
    classes = list(nx.weakly_connected_components(g))
    r = matrix_rank(net.stoichiometry)
    wr = all(nx.is_strongly_connected(g.subgraph(cls)) for cls in classes)
    return NetworkReport(c, len(classes), r, c - len(classes) - r, wr)


# ----------------------------------------------------------------------------
# deterministic mass action


def _vector(x, n: int) -> tuple:
    if len(x) != n:
        raise DimensionError(f"expected a vector of length {n}, got {len(x)}")
    return tuple(v if isinstance(v, float) else to_fraction(v) for v in x)


def _power(x, c) -> Fraction:
    out = Fraction(1)
    for xi, ci in zip(x, c):
        if ci:
            out *= xi**ci
    return out


def mass_action_rhs(net: ReactionNetwork, x) -> tuple:
    """Gamma R(x) with R_i(x) = k_i x^S(i); exact for rational x."""
    x = _vector(x, net.n)
    if any(v < 0 for v in x):
        raise ValueError("concentrations must be non-negative")
    flux = [r.rate * _power(x, r.source) for r in net.reactions]
    return tuple(sum(g * f for g, f in zip(row, flux)) for row in net.stoichiometry)


def _positive(net, x):
    x = _vector(x, net.n)
    if any(v <= 0 for v in x):
        raise ValueError("steady-state vector must be positive")
    return x


def complex_balance_residuals(net: ReactionNetwork, x) -> dict:
    """Inflow minus outflow at every complex; all zero iff x is complex balanced."""
    x = _positive(net, x)
    res = {c: Fraction(0) for c in net.complexes}
    for r in net.reactions:
        f = r.rate * _power(x, r.source)
        res[r.target] += f
        res[r.source] -= f
    return res


def is_complex_balanced(net: ReactionNetwork, x) -> bool:
    return not any(complex_balance_residuals(net, x).values())


# ----------------------------------------------------------------------------
# conservation laws


@dataclass(frozen=True)
class ConservationLaws:
    """Integer basis of the left nullspace of Gamma.

    ``nonnegative`` is False when no non-negative basis was found within the
    bounded recombination search; the rows are then a signed basis.
    """

    rows: tuple
    nonnegative: bool

    def matrix(self) -> ConstraintMatrix:
        if not self.nonnegative:
            raise ValueError("conservation basis is not in non-negative form")
        return ConstraintMatrix(self.rows)


def _integer_row(v) -> tuple:
    den = math.lcm(*(Fraction(x).denominator for x in v))
    ints = [int(Fraction(x) * den) for x in v]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    return tuple(-x for x in ints) if lead < 0 else tuple(ints)


def _signed(row) -> bool:
    return any(x < 0 for x in row)


def _recombine(rows: list, bound: int = 3) -> list:
    rows = list(rows)
    progress = True
    while progress and any(_signed(r) for r in rows):
        progress = False
        for i, ri in enumerate(rows):
            if not _signed(ri):
                continue
            best = None
            for j, rj in enumerate(rows):
                if j == i:
                    continue
                for a in range(-bound, bound + 1):
                    for b in range(-bound, bound + 1):
                        if a == 0:
                            continue
                        cand = tuple(a * x + b * y for x, y in zip(ri, rj))
                        if any(cand) and not _signed(cand):
                            cand = _integer_row(cand)
                            key = (sum(cand), tuple(-x for x in cand))
                            if best is None or key < best[0]:
                                best = (key, cand)
            if best is not None:
                rows[i] = best[1]
                progress = True
    return rows


def conservation_matrix(net: ReactionNetwork) -> ConservationLaws:
    """Conservation laws as integer rows with content 1, preferring a non-negative basis."""
    basis = left_nullspace(net.stoichiometry)
    if not basis:
        return ConservationLaws((), True)
    reduced, _ = rref(basis)
    rows = [_integer_row(v) for v in reduced]
    if any(_signed(r) for r in rows):
        rows = _recombine(rows)
    nonneg = not any(_signed(r) for r in rows)
    return ConservationLaws(tuple(rows), nonneg)


# ----------------------------------------------------------------------------
# stochastic kinetics


def _falling(n: int, k: int) -> int:
    return math.perm(n, k)


def propensity(net: ReactionNetwork, i: int, N: Sequence[int]) -> Fraction:
    """k_i N!/(N - S(i))!, zero when fewer molecules are present than consumed."""
    if len(N) != net.n:
        raise DimensionError(f"expected a count vector of length {net.n}")
    r = net.reactions[i]
    out = r.rate
    for ns, s in zip(N, r.source):
        if ns < s:
            return Fraction(0)
        out *= _falling(ns, s)
    return out


def product_form(x, N) -> Fraction:
    """x^N / N!."""
    out = Fraction(1)
    for xi, ni in zip(x, N):
        out *= Fraction(xi) ** ni / math.factorial(ni)
    return out


class SSCMEChecker:
    """Residuals of the steady-state master equation for P(M) = x^M / M!.

    At state N the inflow through reaction i comes from M = N - T(i) + S(i)
    and equals P(M) A_i(M) = P(N) k_i x^(S-T) N!/(N-T)!; the outflow is
    P(N) k_i N!/(N-S)!. Factoring out P(N) leaves integer falling factorials
    times per-reaction constants computed once.
    """

    def __init__(self, net: ReactionNetwork, x):
        self.net = net
        self.x = _positive(net, x)
        self._terms = [
            (r.rate * _power(self.x, r.source) / _power(self.x, r.target), r.rate, r.source, r.target)
            for r in net.reactions
        ]

    def residual(self, N: Sequence[int]) -> Fraction:
        N = tuple(int(v) for v in N)
        if len(N) != self.net.n or any(v < 0 for v in N):
            raise ValueError("state must be a non-negative count vector of the right length")
        acc = Fraction(0)
        for ratio, k, source, target in self._terms:
            acc += ratio * _falling_product(N, target) - k * _falling_product(N, source)
        return acc * product_form(self.x, N) if acc else acc

    def scan(self, radius: int):
        """First state in the box [0, radius]^n with nonzero residual, or None."""
        for N in lattice_box(self.net.n, radius):
            res = self.residual(N)
            if res:
                return N, res
        return None


def _falling_product(N, c) -> int:
    out = 1
    for ns, cs in zip(N, c):
        if ns < cs:
            return 0
        out *= _falling(ns, cs)
    return out


def sscme_residual(net: ReactionNetwork, x, N: Sequence[int]) -> Fraction:
    """Inflow minus outflow of probability at state N for P(M) = x^M / M!."""
    return SSCMEChecker(net, x).residual(N)


def lattice_box(n: int, radius: int):
    """All count vectors with every entry in [0, radius]."""
    return itertools.product(range(radius + 1), repeat=n)


def sscme_scan(net: ReactionNetwork, x, radius: int):
    """First state in the box with nonzero residual, or None."""
    return SSCMEChecker(net, x).scan(radius)


def key_lemma_residual(net: ReactionNetwork, x, alpha: Mapping) -> Fraction:
    """sum_i k_i x^(S(i)-T(i)) alpha(T(i)) - sum_i k_i alpha(S(i)).

    Zero for every alpha when x is complex balanced. The residual is returned
    whatever x is, so that failures at non-balanced points can be exhibited.
    """
    x = _positive(net, x)
    missing = [c for c in net.complexes if c not in alpha]
    if missing:
        raise KeyError(f"alpha is undefined at complex {net.format_complex(missing[0])}")
    out = Fraction(0)
    for r in net.reactions:
        ratio = _power(x, r.source) / _power(x, r.target)
        out += r.rate * ratio * to_fraction(alpha[r.target]) - r.rate * to_fraction(alpha[r.source])
    return out


def random_alpha(net: ReactionNetwork, rng: random.Random, height: int = 20) -> dict:
    return {c: Fraction(rng.randint(-height, height), rng.randint(1, height)) for c in net.complexes}
