"""Truncated power series over exact rationals or big floats.

Two series types cover the whole package: :class:`TruncatedSeries2` in the
phase-space variables (x, xi) and :class:`TruncatedSeries1` in a single
variable.  Every series carries the truncation order up to which its
coefficients are certified; arithmetic propagates that order soundly
(valuation-aware for products, so multiplying by a monomial does not
discard knowledge).  Coefficients live in a pluggable :class:`Ring`:
exact ``fractions.Fraction`` by default, mpmath big floats where
fractional powers are unavoidable.
"""

from __future__ import annotations

from contextlib import nullcontext
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import mpmath

RATIONAL = "rational"
BIGFLOAT = "float"


class RingMismatchError(ValueError):
    """Operands belong to different coefficient rings."""


class OrderUnderflowError(ValueError):
    """An operation would produce a series with negative truncation order."""


class NotInvertibleError(ValueError):
    """Compositional inverse requested for a series with f(0) != 0 or f'(0) = 0."""


class NotReducedError(ValueError):
    """A residual series contains an exponent congruent to k-1 mod k."""


class CompositionError(ValueError):
    """Substitution of a series with nonzero constant term into a full series."""


@dataclass(frozen=True)
class Ring:
    """Coefficient ring tag: exact rationals or big floats with fixed precision."""

    kind: str = RATIONAL
    precision: int = 0

    def __post_init__(self):
        if self.kind not in (RATIONAL, BIGFLOAT):
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if self.kind == BIGFLOAT and self.precision < 8:
            raise ValueError("big-float ring needs a precision of at least 8 bits")

    def context(self):
        """Context manager pinning mpmath working precision (no-op for rationals)."""
        if self.kind == BIGFLOAT:
            return mpmath.workprec(self.precision)
        return nullcontext()

    @property
    def zero(self):
        if self.kind == RATIONAL:
            return Fraction(0)
        with self.context():
            return mpmath.mpf(0)

    def coerce(self, value):
        if self.kind == RATIONAL:
            if isinstance(value, Fraction):
                return value
            if isinstance(value, int) or isinstance(value, str):
                return Fraction(value)
            raise TypeError(f"cannot coerce {type(value).__name__} into the rational ring")
        with self.context():
            if isinstance(value, Fraction):
                return mpmath.mpf(value.numerator) / value.denominator
            return mpmath.mpf(value)

    def div_int(self, value, n: int):
        """value / n, exact for rationals, correctly rounded for floats."""
        if self.kind == RATIONAL:
            return value / n
        with self.context():
            return value / mpmath.mpf(n)

    def coeff_str(self, value) -> str:
        if self.kind == RATIONAL:
            return str(value)
        dps = int(self.precision * 0.30103) + 5
        return mpmath.nstr(value, dps)

    def coeff_from_str(self, text: str):
        if self.kind == RATIONAL:
            return Fraction(text)
        with self.context():
            return mpmath.mpf(text)

    def to_json(self):
        if self.kind == RATIONAL:
            return {"kind": RATIONAL}
        return {"kind": BIGFLOAT, "precision": self.precision}

    @classmethod
    def from_json(cls, obj) -> "Ring":
        if obj is None:
            return cls()
        if isinstance(obj, str):
            return cls(kind=obj) if obj == RATIONAL else cls(kind=obj, precision=256)
        kind = obj.get("kind", RATIONAL)
        if kind == RATIONAL:
            return cls()
        return cls(kind=BIGFLOAT, precision=int(obj.get("precision", 256)))


RATIONAL_RING = Ring()


def _check_rings(a, b):
    if a.ring != b.ring:
        raise RingMismatchError(f"ring mismatch: {a.ring} vs {b.ring}")


class TruncatedSeries2:
    """Bivariate truncated power series in (x, xi).

    ``coeffs`` maps exponent pairs (i, j) to nonzero coefficients, with
    i + j <= order.  Instances are immutable after construction; all
    operations return fresh series.
    """

    __slots__ = ("coeffs", "order", "ring")

    def __init__(self, coeffs, order: int, ring: Ring = RATIONAL_RING):
        if order < 0:
            raise OrderUnderflowError(f"series order must be >= 0, got {order}")
        clean = {}
        for (i, j), c in dict(coeffs).items():
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent pair {(i, j)}")
            if i + j > order:
                continue
            c = ring.coerce(c)
            if c != 0:
                clean[(i, j)] = c
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "ring", ring)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries2 is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, order: int, ring: Ring = RATIONAL_RING) -> "TruncatedSeries2":
        return cls({}, order, ring)

    @classmethod
    def constant(cls, value, order: int, ring: Ring = RATIONAL_RING) -> "TruncatedSeries2":
        return cls({(0, 0): value}, order, ring)

    @classmethod
    def monomial(cls, value, i: int, j: int, order: int,
                 ring: Ring = RATIONAL_RING) -> "TruncatedSeries2":
        return cls({(i, j): value}, order, ring)

    @classmethod
    def _raw(cls, coeffs, order, ring) -> "TruncatedSeries2":
        """Trusted constructor: coeffs already coerced and pruned."""
        out = cls.__new__(cls)
        object.__setattr__(out, "coeffs", {e: c for e, c in coeffs.items() if e[0] + e[1] <= order})
        object.__setattr__(out, "order", order)
        object.__setattr__(out, "ring", ring)
        if order < 0:
            raise OrderUnderflowError(f"series order must be >= 0, got {order}")
        return out

    # -- basic queries ------------------------------------------------

    def coefficient(self, i: int, j: int):
        return self.coeffs.get((i, j), self.ring.zero)

    def valuation(self) -> int:
        """Smallest total degree of a stored term; order + 1 for the zero series."""
        if not self.coeffs:
            return self.order + 1
        return min(i + j for i, j in self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def terms(self):
        """Deterministic iteration: increasing total degree, then lex on (i, j)."""
        for key in sorted(self.coeffs, key=lambda e: (e[0] + e[1], e)):
            yield key, self.coeffs[key]

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries2):
            return NotImplemented
        return (self.ring == other.ring and self.order == other.order
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.order, self.ring, tuple(sorted(self.coeffs.items()))))

    def agrees_with(self, other: "TruncatedSeries2", order: int | None = None) -> bool:
        """Coefficient-wise equality of all terms of total degree <= order."""
        _check_rings(self, other)
        if order is None:
            order = min(self.order, other.order)
        order = min(order, self.order, other.order)
        for source, target in ((self, other), (other, self)):
            for (i, j), c in source.coeffs.items():
                if i + j <= order and target.coefficient(i, j) != c:
                    return False
        return True

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries2):
            return NotImplemented
        _check_rings(self, other)
        order = min(self.order, other.order)
        with self.ring.context():
            out = dict(self.coeffs)
            for key, c in other.coeffs.items():
                s = out.get(key, 0) + c
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
        return TruncatedSeries2._raw(out, order, self.ring)

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries2):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return TruncatedSeries2._raw({e: -c for e, c in self.coeffs.items()},
                                     self.order, self.ring)

    def scale(self, scalar) -> "TruncatedSeries2":
        with self.ring.context():
            s = self.ring.coerce(scalar)
            if s == 0:
                return TruncatedSeries2.zero(self.order, self.ring)
            return TruncatedSeries2._raw({e: c * s for e, c in self.coeffs.items()},
                                         self.order, self.ring)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries2):
            _check_rings(self, other)
            order = min(self.order + other.valuation(), other.order + self.valuation())
            out = {}
            with self.ring.context():
                for (i1, j1), c1 in self.coeffs.items():
                    for (i2, j2), c2 in other.coeffs.items():
                        i, j = i1 + i2, j1 + j2
                        if i + j > order:
                            continue
                        key = (i, j)
                        s = out.get(key, 0) + c1 * c2
                        if s == 0:
                            out.pop(key, None)
                        else:
                            out[key] = s
            return TruncatedSeries2._raw(out, order, self.ring)
        if isinstance(other, (int, Fraction, str)) or isinstance(other, mpmath.mpf):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)) or isinstance(other, mpmath.mpf):
            return self.scale(other)
        return NotImplemented

    def mul_monomial(self, value, di: int, dj: int) -> "TruncatedSeries2":
        """Multiply by an exact monomial value * x^di * xi^dj (order rises by di+dj)."""
        with self.ring.context():
            v = self.ring.coerce(value)
            if v == 0:
                return TruncatedSeries2.zero(self.order + di + dj, self.ring)
            out = {(i + di, j + dj): c * v for (i, j), c in self.coeffs.items()}
        return TruncatedSeries2._raw(out, self.order + di + dj, self.ring)

    def power(self, n: int) -> "TruncatedSeries2":
        if n < 0:
            raise ValueError("negative power of a series")
        result = TruncatedSeries2.constant(1, self.order + n * max(self.valuation() - 1, 0),
                                           self.ring)
        for _ in range(n):
            result = result * self
        return result

    # -- calculus -----------------------------------------------------

    def dx(self) -> "TruncatedSeries2":
        if self.order == 0:
            raise OrderUnderflowError("derivative of an order-0 series")
        with self.ring.context():
            out = {(i - 1, j): c * i for (i, j), c in self.coeffs.items() if i > 0}
        return TruncatedSeries2._raw(out, self.order - 1, self.ring)

    def dxi(self) -> "TruncatedSeries2":
        if self.order == 0:
            raise OrderUnderflowError("derivative of an order-0 series")
        with self.ring.context():
            out = {(i, j - 1): c * j for (i, j), c in self.coeffs.items() if j > 0}
        return TruncatedSeries2._raw(out, self.order - 1, self.ring)

    def integrate_x(self) -> "TruncatedSeries2":
        with self.ring.context():
            out = {(i + 1, j): self.ring.div_int(c, i + 1) for (i, j), c in self.coeffs.items()}
        return TruncatedSeries2._raw(out, self.order + 1, self.ring)

    def integrate_xi(self) -> "TruncatedSeries2":
        with self.ring.context():
            out = {(i, j + 1): self.ring.div_int(c, j + 1) for (i, j), c in self.coeffs.items()}
        return TruncatedSeries2._raw(out, self.order + 1, self.ring)

    # -- structure ----------------------------------------------------

    def truncate(self, order: int) -> "TruncatedSeries2":
        if order >= self.order:
            return self
        return TruncatedSeries2._raw(dict(self.coeffs), order, self.ring)

    def _assume_order(self, order: int) -> "TruncatedSeries2":
        """Re-tag the certified order.  Caller asserts exactness (polynomial data)."""
        return TruncatedSeries2._raw(dict(self.coeffs), order, self.ring)

    def substitute(self, sx: "TruncatedSeries2", sxi: "TruncatedSeries2") -> "TruncatedSeries2":
        """Evaluate the series at (sx, sxi); both must vanish at the origin."""
        _check_rings(self, sx)
        _check_rings(self, sxi)
        v = min(sx.valuation(), sxi.valuation())
        if v < 1:
            raise CompositionError("substituted series must have zero constant term")
        order = min(sx.order, sxi.order, (self.order + 1) * v - 1)
        ring = self.ring
        if not self.coeffs:
            return TruncatedSeries2.zero(order, ring)
        rows: dict[int, dict[int, object]] = {}
        for (i, j), c in self.coeffs.items():
            rows.setdefault(i, {})[j] = c
        work = order + 1  # headroom so Horner's own order tracking never binds
        acc = TruncatedSeries2.zero(work, ring)
        for i in range(max(rows), -1, -1):
            acc = (acc * sx._assume_order(work)).truncate(work) if not acc.is_zero() \
                else TruncatedSeries2.zero(work, ring)
            row = rows.get(i)
            if row:
                inner = TruncatedSeries2.zero(work, ring)
                for j in range(max(row), -1, -1):
                    inner = (inner * sxi._assume_order(work)).truncate(work) \
                        if not inner.is_zero() else TruncatedSeries2.zero(work, ring)
                    if j in row:
                        inner = inner + TruncatedSeries2.constant(row[j], work, ring)
                acc = acc + inner
        return acc.truncate(order)

    # -- numeric / io -------------------------------------------------

    def evaluate(self, x: float, xi: float) -> float:
        total = 0.0
        for (i, j), c in self.coeffs.items():
            total += float(c) * x**i * xi**j
        return total

    def map_coefficients(self, ring: Ring) -> "TruncatedSeries2":
        """Re-coerce every coefficient into another ring (e.g. rational -> float)."""
        return TruncatedSeries2(dict(self.coeffs), self.order, ring)

    def to_json(self):
        return {
            "ring": self.ring.to_json(),
            "order": self.order,
            "coeffs": [[i, j, self.ring.coeff_str(c)] for (i, j), c in self.terms()],
        }

    @classmethod
    def from_json(cls, obj) -> "TruncatedSeries2":
        ring = Ring.from_json(obj.get("ring"))
        coeffs = {(int(i), int(j)): ring.coeff_from_str(s) for i, j, s in obj["coeffs"]}
        return cls(coeffs, int(obj["order"]), ring)

    def __repr__(self):
        if not self.coeffs:
            body = "0"
        else:
            parts = []
            for (i, j), c in self.terms():
                mono = "".join(p for p in (f"x^{i}" if i else "", f"xi^{j}" if j else "") if p)
                parts.append(f"{c}*{mono}" if mono else f"{c}")
            body = " + ".join(parts)
        return f"<series2 {body} + O(deg>{self.order})>"


class TruncatedSeries1:
    """Univariate truncated power series; mirrors :class:`TruncatedSeries2`."""

    __slots__ = ("coeffs", "order", "ring")

    def __init__(self, coeffs, order: int, ring: Ring = RATIONAL_RING):
        if order < 0:
            raise OrderUnderflowError(f"series order must be >= 0, got {order}")
        clean = {}
        for e, c in dict(coeffs).items():
            if e < 0:
                raise ValueError(f"negative exponent {e}")
            if e > order:
                continue
            c = ring.coerce(c)
            if c != 0:
                clean[e] = c
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "ring", ring)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries1 is immutable")

    @classmethod
    def zero(cls, order: int, ring: Ring = RATIONAL_RING) -> "TruncatedSeries1":
        return cls({}, order, ring)

    @classmethod
    def constant(cls, value, order: int, ring: Ring = RATIONAL_RING) -> "TruncatedSeries1":
        return cls({0: value}, order, ring)

    @classmethod
    def monomial(cls, value, e: int, order: int, ring: Ring = RATIONAL_RING) -> "TruncatedSeries1":
        return cls({e: value}, order, ring)

    @classmethod
    def identity(cls, order: int, ring: Ring = RATIONAL_RING) -> "TruncatedSeries1":
        return cls({1: 1}, order, ring)

    @classmethod
    def _raw(cls, coeffs, order, ring) -> "TruncatedSeries1":
        out = cls.__new__(cls)
        object.__setattr__(out, "coeffs", {e: c for e, c in coeffs.items() if e <= order})
        object.__setattr__(out, "order", order)
        object.__setattr__(out, "ring", ring)
        if order < 0:
            raise OrderUnderflowError(f"series order must be >= 0, got {order}")
        return out

    def coefficient(self, e: int):
        return self.coeffs.get(e, self.ring.zero)

    def valuation(self) -> int:
        if not self.coeffs:
            return self.order + 1
        return min(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def terms(self):
        for e in sorted(self.coeffs):
            yield e, self.coeffs[e]

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries1):
            return NotImplemented
        return (self.ring == other.ring and self.order == other.order
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.order, self.ring, tuple(sorted(self.coeffs.items()))))

    def agrees_with(self, other: "TruncatedSeries1", order: int | None = None) -> bool:
        _check_rings(self, other)
        if order is None:
            order = min(self.order, other.order)
        order = min(order, self.order, other.order)
        for source, target in ((self, other), (other, self)):
            for e, c in source.coeffs.items():
                if e <= order and target.coefficient(e) != c:
                    return False
        return True

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries1):
            return NotImplemented
        _check_rings(self, other)
        order = min(self.order, other.order)
        with self.ring.context():
            out = dict(self.coeffs)
            for e, c in other.coeffs.items():
                s = out.get(e, 0) + c
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return TruncatedSeries1._raw(out, order, self.ring)

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries1):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return TruncatedSeries1._raw({e: -c for e, c in self.coeffs.items()},
                                     self.order, self.ring)

    def scale(self, scalar) -> "TruncatedSeries1":
        with self.ring.context():
            s = self.ring.coerce(scalar)
            if s == 0:
                return TruncatedSeries1.zero(self.order, self.ring)
            return TruncatedSeries1._raw({e: c * s for e, c in self.coeffs.items()},
                                         self.order, self.ring)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries1):
            _check_rings(self, other)
            order = min(self.order + other.valuation(), other.order + self.valuation())
            out = {}
            with self.ring.context():
                for e1, c1 in self.coeffs.items():
                    for e2, c2 in other.coeffs.items():
                        e = e1 + e2
                        if e > order:
                            continue
                        s = out.get(e, 0) + c1 * c2
                        if s == 0:
                            out.pop(e, None)
                        else:
                            out[e] = s
            return TruncatedSeries1._raw(out, order, self.ring)
        if isinstance(other, (int, Fraction, str)) or isinstance(other, mpmath.mpf):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)) or isinstance(other, mpmath.mpf):
            return self.scale(other)
        return NotImplemented

    def derivative(self) -> "TruncatedSeries1":
        if self.order == 0:
            raise OrderUnderflowError("derivative of an order-0 series")
        with self.ring.context():
            out = {e - 1: c * e for e, c in self.coeffs.items() if e > 0}
        return TruncatedSeries1._raw(out, self.order - 1, self.ring)

    def antiderivative(self) -> "TruncatedSeries1":
        with self.ring.context():
            out = {e + 1: self.ring.div_int(c, e + 1) for e, c in self.coeffs.items()}
        return TruncatedSeries1._raw(out, self.order + 1, self.ring)

    def truncate(self, order: int) -> "TruncatedSeries1":
        if order >= self.order:
            return self
        return TruncatedSeries1._raw(dict(self.coeffs), order, self.ring)

    def _assume_order(self, order: int) -> "TruncatedSeries1":
        return TruncatedSeries1._raw(dict(self.coeffs), order, self.ring)

    def compose1(self, inner: "TruncatedSeries1") -> "TruncatedSeries1":
        """Substitute a univariate series (vanishing at 0) into this one."""
        _check_rings(self, inner)
        v = inner.valuation()
        if v < 1:
            raise CompositionError("inner series must have zero constant term")
        order = min(inner.order, (self.order + 1) * v - 1)
        ring = self.ring
        if not self.coeffs:
            return TruncatedSeries1.zero(order, ring)
        work = order + 1
        acc = TruncatedSeries1.zero(work, ring)
        for e in range(max(self.coeffs), -1, -1):
            acc = (acc * inner._assume_order(work)).truncate(work) \
                if not acc.is_zero() else TruncatedSeries1.zero(work, ring)
            if e in self.coeffs:
                acc = acc + TruncatedSeries1.constant(self.coeffs[e], work, ring)
        return acc.truncate(order)

    def substitute2(self, inner: TruncatedSeries2) -> TruncatedSeries2:
        """Substitute a bivariate series (vanishing at the origin) into this one."""
        v = inner.valuation()
        if v < 1:
            raise CompositionError("inner series must have zero constant term")
        order = min(inner.order, (self.order + 1) * v - 1)
        ring = inner.ring
        if not self.coeffs:
            return TruncatedSeries2.zero(order, ring)
        work = order + 1
        acc = TruncatedSeries2.zero(work, ring)
        for e in range(max(self.coeffs), -1, -1):
            acc = (acc * inner._assume_order(work)).truncate(work) \
                if not acc.is_zero() else TruncatedSeries2.zero(work, ring)
            if e in self.coeffs:
                acc = acc + TruncatedSeries2.constant(ring.coerce(self.coeffs[e]), work, ring)
        return acc.truncate(order)

    def as_series2_in_x(self, order: int | None = None) -> TruncatedSeries2:
        if order is None:
            order = self.order
        return TruncatedSeries2({(e, 0): c for e, c in self.coeffs.items()},
                                order, self.ring)

    def evaluate(self, t: float) -> float:
        total = 0.0
        for e, c in self.coeffs.items():
            total += float(c) * t**e
        return total

    def map_coefficients(self, ring: Ring) -> "TruncatedSeries1":
        return TruncatedSeries1(dict(self.coeffs), self.order, ring)

    def to_json(self):
        return {
            "ring": self.ring.to_json(),
            "order": self.order,
            "coeffs": [[e, self.ring.coeff_str(c)] for e, c in self.terms()],
        }

    @classmethod
    def from_json(cls, obj) -> "TruncatedSeries1":
        ring = Ring.from_json(obj.get("ring"))
        coeffs = {int(e): ring.coeff_from_str(s) for e, s in obj["coeffs"]}
        return cls(coeffs, int(obj["order"]), ring)

    def __repr__(self):
        if not self.coeffs:
            body = "0"
        else:
            body = " + ".join(f"{c}*t^{e}" if e else f"{c}" for e, c in self.terms())
        return f"<series1 {body} + O(deg>{self.order})>"


@dataclass(frozen=True)
class AkHamiltonian:
    """The Hamiltonian xi^2 + sigma * x^k with an A_{k-1} singularity at 0."""

    k: int
    sigma: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.sigma not in (-1, 1):
            raise ValueError("sigma must be +1 or -1")

    def as_series2(self, order: int, ring: Ring = RATIONAL_RING) -> TruncatedSeries2:
        return TruncatedSeries2({(0, 2): 1, (self.k, 0): self.sigma}, order, ring)

    def value(self, x: float, xi: float) -> float:
        return xi * xi + self.sigma * x**self.k

    def __str__(self):
        sign = "+" if self.sigma > 0 else "-"
        return f"xi^2 {sign} x^{self.k}"


@dataclass(frozen=True)
class SeriesMap:
    """Coordinate-change germ (x, xi) -> (phi_x, phi_xi), vanishing at the origin."""

    phi_x: TruncatedSeries2
    phi_xi: TruncatedSeries2

    def __post_init__(self):
        _check_rings(self.phi_x, self.phi_xi)
        if self.phi_x.coefficient(0, 0) != 0 or self.phi_xi.coefficient(0, 0) != 0:
            raise ValueError("map components must vanish at the origin")
        a, b = self.phi_x.coefficient(1, 0), self.phi_x.coefficient(0, 1)
        c, d = self.phi_xi.coefficient(1, 0), self.phi_xi.coefficient(0, 1)
        if a * d - b * c == 0:
            raise ValueError("map is singular at the origin (zero Jacobian determinant)")

    @property
    def ring(self) -> Ring:
        return self.phi_x.ring

    @property
    def order(self) -> int:
        return min(self.phi_x.order, self.phi_xi.order)

    @classmethod
    def identity(cls, order: int, ring: Ring = RATIONAL_RING) -> "SeriesMap":
        return cls(TruncatedSeries2.monomial(1, 1, 0, order, ring),
                   TruncatedSeries2.monomial(1, 0, 1, order, ring))

    def jacobian_determinant(self) -> TruncatedSeries2:
        return (self.phi_x.dx() * self.phi_xi.dxi()
                - self.phi_x.dxi() * self.phi_xi.dx())

    def to_json(self):
        return {"phi_x": self.phi_x.to_json(), "phi_xi": self.phi_xi.to_json()}

    @classmethod
    def from_json(cls, obj) -> "SeriesMap":
        return cls(TruncatedSeries2.from_json(obj["phi_x"]),
                   TruncatedSeries2.from_json(obj["phi_xi"]))


# -- module-level operations ------------------------------------------


def poisson_bracket(a: TruncatedSeries2, b: TruncatedSeries2) -> TruncatedSeries2:
    """d_x(a) * d_xi(b) - d_xi(a) * d_x(b), the dxi^dx coefficient of db^da."""
    _check_rings(a, b)
    return a.dx() * b.dxi() - a.dxi() * b.dx()


def compose(outer: TruncatedSeries1, inner: TruncatedSeries2) -> TruncatedSeries2:
    """Taylor composition outer(inner(x, xi)); inner must vanish at the origin."""
    return outer.substitute2(inner)


def invert_series(f: TruncatedSeries1) -> TruncatedSeries1:
    """Compositional inverse g with f(g(t)) = t to the truncation order."""
    if f.coefficient(0) != 0:
        raise NotInvertibleError("series has a nonzero constant term")
    f1 = f.coefficient(1)
    if f1 == 0:
        raise NotInvertibleError("series has a vanishing linear coefficient")
    ring = f.ring
    order = f.order
    ident = TruncatedSeries1.identity(order, ring)
    with ring.context():
        inv_f1 = ring.coerce(1) / f1 if ring.kind == BIGFLOAT else Fraction(1) / f1
        g = {1: inv_f1}
        for degree in range(2, order + 1):
            current = TruncatedSeries1._raw(dict(g), order, ring)
            defect = f.compose1(current) - ident
            # f(g) = t + defect; the lowest defect term fixes the next coefficient
            d = defect.coefficient(degree)
            if d != 0:
                g[degree] = -d * inv_f1
        result = TruncatedSeries1._raw(g, order, ring)
    return result


def xi_parity_split(g: TruncatedSeries2) -> tuple[TruncatedSeries2, TruncatedSeries2]:
    """Split g(x, xi) = g0(x, xi^2) + xi*g1(x, xi^2); returns (g0, g1) in (x, eta)."""
    even = {}
    odd = {}
    for (i, j), c in g.coeffs.items():
        if j % 2 == 0:
            even[(i, j // 2)] = c
        else:
            odd[(i, (j - 1) // 2)] = c
    return (TruncatedSeries2._raw(even, g.order, g.ring),
            TruncatedSeries2._raw(odd, g.order, g.ring))


def xi_parity_recombine(g0: TruncatedSeries2, g1: TruncatedSeries2,
                        order: int) -> TruncatedSeries2:
    """Inverse of :func:`xi_parity_split`: g0(x, xi^2) + xi*g1(x, xi^2)."""
    _check_rings(g0, g1)
    out = {}
    for (i, j), c in g0.coeffs.items():
        out[(i, 2 * j)] = c
    for (i, j), c in g1.coeffs.items():
        out[(i, 2 * j + 1)] = c
    return TruncatedSeries2._raw(out, order, g0.ring)


def c_decompose(c: TruncatedSeries1, k: int) -> list[TruncatedSeries1]:
    """Split a reduced residual into (c_0, ..., c_{k-2}) with sum x^i c_i(x^k) = c."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if c.order < k - 2:
        raise OrderUnderflowError(
            f"residual order {c.order} too small to certify all {k - 1} components")
    buckets: list[dict[int, object]] = [dict() for _ in range(k - 1)]
    for e, coeff in c.coeffs.items():
        r = e % k
        if r == k - 1:
            raise NotReducedError(f"exponent {e} is congruent to k-1 = {k - 1} mod {k}")
        buckets[r][(e - r) // k] = coeff
    return [TruncatedSeries1._raw(buckets[i], (c.order - i) // k, c.ring)
            for i in range(k - 1)]


def c_recompose(components: Iterable[TruncatedSeries1], k: int,
                order: int) -> TruncatedSeries1:
    """Inverse of :func:`c_decompose` at the given certified order."""
    components = list(components)
    out = {}
    ring = components[0].ring
    for i, comp in enumerate(components):
        for m, coeff in comp.coeffs.items():
            out[i + k * m] = coeff
    return TruncatedSeries1._raw(out, order, ring)


def unit_series_power(f: TruncatedSeries1, alpha: Fraction) -> TruncatedSeries1:
    """f(t)^alpha for f with f(0) > 0, via the binomial series on f/f(0) - 1.

    Integer alpha works in any ring; fractional alpha requires the big-float
    ring (the leading coefficient f(0)^alpha is irrational in general).
    """
    alpha = Fraction(alpha)
    c0 = f.coefficient(0)
    if c0 == 0:
        raise NotInvertibleError("series has zero constant term; no unit power")
    ring = f.ring
    if alpha.denominator != 1 and ring.kind != BIGFLOAT:
        raise RingMismatchError("fractional powers require the big-float ring")
    with ring.context():
        if ring.kind == BIGFLOAT:
            lead = mpmath.power(c0, mpmath.mpf(alpha.numerator) / alpha.denominator)
            inv_c0 = 1 / c0
        else:
            lead = c0 ** int(alpha)
            inv_c0 = Fraction(1) / c0
    w = f.scale(inv_c0) - TruncatedSeries1.constant(1, f.order, ring)
    result = TruncatedSeries1.constant(1, f.order, ring)
    term = TruncatedSeries1.constant(1, f.order, ring)
    binom = ring.coerce(1)
    for m in range(1, f.order + 1):
        with ring.context():
            binom = ring.div_int(binom * ring.coerce(alpha - (m - 1)), m)
        term = term * w
        if term.is_zero():
            break
        result = result + term.scale(binom)
    return result.scale(lead)
