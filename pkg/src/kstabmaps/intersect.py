"""Formal intersection numbers: classes, multilinear expansion, tables.

A ``Cycle`` is a polynomial in class symbols (commuting), with coefficients
that are either Fractions or ``MPoly`` values in free parameters. A table maps
degree-d monomials to numbers; lookups are symmetric and a missing entry is an
error, never an implicit zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .errors import DegreeMismatch, MissingEntry
from .exactmath import Q, UniPoly, fmt


# ---------------------------------------------------------------- free parameters

class MPoly:
    """Polynomial over Q in named variables; monomials are sorted (name, power) tuples."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        self.terms = {k: Q(v) for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def var(cls, name: str) -> "MPoly":
        return cls({((name, 1),): 1})

    @classmethod
    def const(cls, c) -> "MPoly":
        return cls({(): Q(c)})

    @staticmethod
    def lift(x) -> "MPoly":
        return x if isinstance(x, MPoly) else MPoly.const(x)

    @property
    def is_constant(self) -> bool:
        return all(k == () for k in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def __add__(self, other):
        other = MPoly.lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return MPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return MPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-MPoly.lift(other))

    def __rsub__(self, other):
        return MPoly.lift(other) - self

    def __mul__(self, other):
        if isinstance(other, Cycle):
            return NotImplemented
        other = MPoly.lift(other)
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = _mono_mul(k1, k2)
                out[k] = out.get(k, Fraction(0)) + v1 * v2
        return MPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1 / Q(other))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, MPoly)):
            return (self - other).terms == {}
        return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def substitute(self, values: Mapping) -> Fraction:
        total = Fraction(0)
        for mono, c in self.terms.items():
            term = c
            for name, p in mono:
                term *= Q(values[name]) ** p
            total += term
        return total

    def coefficient_in(self, name: str) -> dict:
        """Split by the power of one variable: {power: MPoly}."""
        out: dict = {}
        for mono, c in self.terms.items():
            p = dict(mono).get(name, 0)
            rest = tuple((v, q) for v, q in mono if v != name)
            out.setdefault(p, MPoly())
            out[p] = out[p] + MPoly({rest: c})
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono, c in sorted(self.terms.items()):
            m = "*".join(n if p == 1 else f"{n}^{p}" for n, p in mono)
            parts.append(f"{fmt(c)}*{m}" if m else fmt(c))
        return " + ".join(parts)


def _mono_mul(a: tuple, b: tuple) -> tuple:
    d = dict(a)
    for n, p in b:
        d[n] = d.get(n, 0) + p
    return tuple(sorted(d.items()))


def simplify(x):
    """Collapse constant MPoly values to Fractions."""
    if isinstance(x, MPoly) and x.is_constant:
        return x.constant_value()
    return x


# ---------------------------------------------------------------- cycles

class Cycle:
    """Formal polynomial in class symbols; a divisor is a degree-1 cycle."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        clean = {}
        for k, v in (terms or {}).items():
            if not isinstance(v, MPoly):
                v = Q(v)
            if v != 0:
                clean[tuple(sorted(k))] = v
        self.terms = clean

    @property
    def degree(self) -> int:
        degs = {len(k) for k in self.terms}
        if len(degs) > 1:
            raise DegreeMismatch(f"inhomogeneous cycle with degrees {sorted(degs)}")
        return degs.pop() if degs else 0

    def __add__(self, other):
        if not isinstance(other, Cycle):
            return NotImplemented
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return Cycle(out)

    def __neg__(self):
        return Cycle({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Cycle):
            out: dict = {}
            for k1, v1 in self.terms.items():
                for k2, v2 in other.terms.items():
                    k = tuple(sorted(k1 + k2))
                    out[k] = out[k] + v1 * v2 if k in out else v1 * v2
            return Cycle(out)
        if not isinstance(other, MPoly):
            other = Q(other)
        return Cycle({k: other * v for k, v in self.terms.items()})

    def __rmul__(self, other):
        return self * other

    def __pow__(self, e: int):
        if e == 0:
            return Cycle({(): 1})
        out = self
        for _ in range(e - 1):
            out = out * self
        return out

    def __repr__(self):
        return " + ".join(f"({v})*{'.'.join(k) or '1'}" for k, v in sorted(self.terms.items())) or "0"


def sym(name: str) -> Cycle:
    return Cycle({(name,): 1})


def combo(coeffs: Mapping) -> Cycle:
    """Divisor from {symbol: coefficient}."""
    out = Cycle()
    for name, c in coeffs.items():
        out = out + Q(c) * sym(name) if not isinstance(c, MPoly) else out + c * sym(name)
    return out


# ---------------------------------------------------------------- tables

class IntersectionTable:
    """Top intersection numbers of degree ``ambient_degree``.

    ``provider`` (optional) computes entries on demand, e.g. from mixed
    volumes; anything it cannot supply is still a MissingEntry.
    """

    def __init__(self, ambient_degree: int, entries: Mapping | None = None,
                 provider: Callable | None = None, symbols: Iterable | None = None):
        self.ambient_degree = ambient_degree
        self.entries: dict = {}
        for mono, v in (entries or {}).items():
            if isinstance(mono, str):
                mono = tuple(mono.split("."))
            mono = tuple(sorted(mono))
            if len(mono) != ambient_degree:
                raise DegreeMismatch(f"entry {mono} is not of degree {ambient_degree}")
            self.entries[mono] = v if isinstance(v, MPoly) else Q(v)
        self.provider = provider
        self._symbols = set(symbols or ())
        for mono in self.entries:
            self._symbols.update(mono)

    @property
    def symbols(self) -> list:
        return sorted(self._symbols)

    def lookup(self, monomial):
        key = tuple(sorted(monomial))
        if len(key) != self.ambient_degree:
            raise DegreeMismatch(f"monomial {key} is not of degree {self.ambient_degree}")
        if key in self.entries:
            return self.entries[key]
        if self.provider is not None:
            v = self.provider(key)
            if v is not None:
                self.entries[key] = v
                return v
        raise MissingEntry(key)

    def evaluate(self, expr: Cycle):
        if expr.terms and expr.degree != self.ambient_degree:
            raise DegreeMismatch(f"expression has degree {expr.degree}, table has {self.ambient_degree}")
        total = Fraction(0)
        for mono, c in expr.terms.items():
            total = c * self.lookup(mono) + total
        return simplify(total) if isinstance(total, MPoly) else total

    def to_json(self) -> dict:
        rows = []
        for mono, v in sorted(self.entries.items()):
            if isinstance(v, MPoly):
                raise TypeError("symbolic tables are not serializable")
            rows.append({"monomial": list(mono), "value": fmt(v)})
        return {"ambient_degree": self.ambient_degree, "entries": rows}

    @classmethod
    def from_json(cls, data: Mapping) -> "IntersectionTable":
        d = int(data["ambient_degree"])
        entries = {}
        for row in data["entries"]:
            key = tuple(sorted(row["monomial"]))
            if key in entries:
                raise ValueError(f"duplicate table entry {key}")
            entries[key] = Q(row["value"])
        return cls(d, entries)


def evaluate(expr: Cycle, table: IntersectionTable):
    return table.evaluate(expr)


def m_expansion(expr: Cycle, table: IntersectionTable, var: str = "m") -> UniPoly:
    """Evaluate an expression whose coefficients are polynomial in ``var``."""
    val = table.evaluate(expr)
    if not isinstance(val, MPoly):
        return UniPoly((val,))
    parts = val.coefficient_in(var)
    coeffs = []
    for p in range(max(parts) + 1 if parts else 0):
        c = simplify(parts.get(p, MPoly()))
        if isinstance(c, MPoly):
            raise TypeError(f"coefficient of {var}^{p} still has free parameters: {c}")
        coeffs.append(c)
    return UniPoly(coeffs)


# ---------------------------------------------------------------- identity checks

@dataclass
class IdentityReport:
    n: int
    passed: bool
    parameters: list
    discrepancy: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "passed": self.passed,
            "parameters": self.parameters,
            "discrepancy": {k: v for k, v in sorted(self.discrepancy.items())},
        }


def odaka_identity_sides(n: int):
    """Both sides of the combinatorial identity as symbolic values in r.

    (rL - E)^n.(rL + (n-1)E) = -E.E.sum_{j=1}^{n-1} (n-j) (rL)^{j-1} (rL-E)^{n-j}
    under L^{n+1} = 0 and L^n.E = 0; the other L^i.E^{n+1-i} are free.
    """
    r = MPoly.var("r")
    entries: dict = {}
    params = []
    for i in range(n + 2):
        mono = ("L",) * i + ("E",) * (n + 1 - i)
        if i >= n:
            entries[mono] = Fraction(0)
        else:
            name = f"L{i}E{n + 1 - i}"
            params.append(name)
            entries[mono] = MPoly.var(name)
    table = IntersectionTable(n + 1, entries)
    L, E = sym("L"), sym("E")
    rL = r * L
    lhs = (rL - E) ** n * (rL + (n - 1) * E)
    acc = Cycle()
    for j in range(1, n):
        acc = acc + (n - j) * (rL ** (j - 1)) * ((rL - E) ** (n - j))
    rhs = -(E * E * acc) if acc.terms else Cycle()
    lv = table.evaluate(lhs) if lhs.terms else Fraction(0)
    rv = table.evaluate(rhs) if rhs.terms else Fraction(0)
    return MPoly.lift(lv), MPoly.lift(rv), params


def verify_odaka_identity(n: int) -> IdentityReport:
    if not 1 <= n <= 8:
        raise ValueError("n must lie in 1..8")
    lhs, rhs, params = odaka_identity_sides(n)
    diff = lhs - rhs
    disc = {repr(MPoly({k: 1})): fmt(v) for k, v in diff.terms.items()}
    return IdentityReport(n, not diff.terms, params, disc)


# ---------------------------------------------------------------- inequalities

@dataclass
class InequalityReport:
    values: dict
    holds: dict

    @property
    def passed(self) -> bool:
        return all(self.holds.values())

    def failures(self) -> dict:
        return {k: self.values[k] for k, ok in self.holds.items() if not ok}

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "values": {k: fmt(v) for k, v in sorted(self.values.items())},
            "holds": dict(sorted(self.holds.items())),
        }


def check_inequalities(table: IntersectionTable, rL: Cycle, E: Cycle, n: int,
                       nef: Mapping[str, Cycle]) -> InequalityReport:
    """Signs of (rL-E)^n against R (nef), E, rL+nE and rL+(n-1)E."""
    base = (rL - E) ** n
    values, holds = {}, {}
    for name, R in sorted(nef.items()):
        v = table.evaluate(base * R)
        values[f"i[{name}]"] = v
        holds[f"i[{name}]"] = v <= 0
    v = table.evaluate(base * E)
    values["ii"], holds["ii"] = v, v > 0
    v = table.evaluate(base * (rL + n * E))
    values["iii"], holds["iii"] = v, v > 0
    v = table.evaluate(base * (rL + (n - 1) * E))
    values["improved"], holds["improved"] = v, v >= 0
    return InequalityReport(values, holds)
