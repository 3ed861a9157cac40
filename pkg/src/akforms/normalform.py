"""Normal-form presentations of the pair (H, omega) and their invariants.

Three presentations of the reduced residual c(x):

* F form: the primitive f with f' = c, split as f = sum x^i f_i(x^k),
  i = 1..k-1 (the 2-form is d(f dxi));
* c-of-H form: c rewritten as sum x^i ct_i(H) through the per-monomial
  constants b(i, j) with |b| >= 1;
* fibration form: after reparametrizing the Hamiltonian the leading
  component becomes exactly 1; needs fractional powers, hence big floats.

For even k the involution (x, xi) -> (-x, -xi) preserves H but flips the
sign of one half of the components; canonicalize_sign picks the
deterministic orbit representative (first nonzero coefficient positive).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import comb

import mpmath

from .cohomology import h_ratio
from .series import (
    BIGFLOAT,
    AkHamiltonian,
    NotReducedError,
    Ring,
    SeriesMap,
    TruncatedSeries1,
    TruncatedSeries2,
    c_decompose,
    invert_series,
    unit_series_power,
)

F_FORM = "F_FORM"
CH_FORM = "CH_FORM"
FIBRATION_FORM = "FIBRATION_FORM"

_COMPONENT_COUNT = {F_FORM: -1, CH_FORM: -1, FIBRATION_FORM: -2}  # offset from k
_FIRST_SUBSCRIPT = {F_FORM: 1, CH_FORM: 0, FIBRATION_FORM: 1}


class DegenerateError(ValueError):
    """The 2-form vanishes at the origin; the requested form does not exist."""


class FormMismatchError(ValueError):
    """Normal forms of different kind, k or sigma cannot be compared."""


@dataclass(frozen=True)
class NormalForm:
    """One of the three presentations, as a tuple of univariate components.

    ``components[idx]`` is the function with subscript idx + first_subscript
    (f_1.. for the F form, ct_0.. for the c-of-H form, chat_1.. with the
    implicit leading 1 for the fibration form).  The flip metadata does not
    take part in equality.
    """

    kind: str
    k: int
    sigma: int
    components: tuple[TruncatedSeries1, ...]
    smooth_mode: bool = False
    flipped: bool = field(default=False, compare=False)
    orientation_flipped: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.kind not in _COMPONENT_COUNT:
            raise ValueError(f"unknown normal-form kind {self.kind!r}")
        expected = self.k + _COMPONENT_COUNT[self.kind]
        if len(self.components) != expected:
            raise ValueError(
                f"{self.kind} for k={self.k} needs {expected} components, "
                f"got {len(self.components)}")
        object.__setattr__(self, "components", tuple(self.components))

    def subscripts(self) -> list[int]:
        first = _FIRST_SUBSCRIPT[self.kind]
        return list(range(first, first + len(self.components)))

    def component(self, subscript: int) -> TruncatedSeries1:
        return self.components[subscript - _FIRST_SUBSCRIPT[self.kind]]

    def flip_orbit_subscripts(self) -> list[int]:
        """Subscripts whose sign the involution (x,xi) -> (-x,-xi) flips."""
        if self.k % 2 != 0:
            return []
        want = 0 if self.kind == F_FORM else 1  # even f_i, odd ct_i / chat_i
        return [s for s in self.subscripts() if s % 2 == want]

    def apply_flip(self) -> "NormalForm":
        """The other representative of the involution orbit."""
        orbit = set(self.flip_orbit_subscripts())
        comps = tuple(-c if s in orbit else c
                      for s, c in zip(self.subscripts(), self.components))
        return replace(self, components=comps)

    def to_json(self):
        return {
            "kind": self.kind,
            "k": self.k,
            "sigma": self.sigma,
            "smooth_mode": self.smooth_mode,
            "flipped": self.flipped,
            "orientation_flipped": self.orientation_flipped,
            "components": [c.to_json() for c in self.components],
        }

    @classmethod
    def from_json(cls, obj) -> "NormalForm":
        return cls(
            kind=obj["kind"],
            k=int(obj["k"]),
            sigma=int(obj["sigma"]),
            components=tuple(TruncatedSeries1.from_json(c) for c in obj["components"]),
            smooth_mode=bool(obj.get("smooth_mode", False)),
            flipped=bool(obj.get("flipped", False)),
            orientation_flipped=bool(obj.get("orientation_flipped", False)),
        )


@dataclass
class ConversionTable:
    """Constants b(i, j) relating x^(i+jk) to x^i H^j modulo exact brackets."""

    k: int
    sigma: int
    constants: dict[tuple[int, int], Fraction] = field(default_factory=dict)

    def record(self, i: int, j: int, value: Fraction) -> None:
        if abs(value) < 1:
            raise AssertionError(f"|b({i},{j})| = {value} < 1")
        self.constants[(i, j)] = value

    def i_independent(self) -> bool:
        """Whether b(i, j) happens to depend on j alone (it does not, in general)."""
        by_j: dict[int, Fraction] = {}
        for (_, j), value in self.constants.items():
            if j in by_j and by_j[j] != value:
                return False
            by_j.setdefault(j, value)
        return True


@dataclass(frozen=True)
class FibrationChange:
    """Reparametrization data: old Hamiltonian value = h(new value).

    fhat is the series of the implicit relation h(t) * fhat(h(t)) = t.
    """

    h: TruncatedSeries1
    fhat: TruncatedSeries1

    def defect(self) -> TruncatedSeries1:
        """h(t)*fhat(h(t)) - t; all coefficients vanish up to roundoff."""
        ring = self.h.ring
        with ring.context():
            composed = self.h * self.fhat.compose1(self.h)
            return composed - TruncatedSeries1.identity(composed.order, ring)

    def max_defect(self) -> float:
        d = self.defect()
        with self.h.ring.context():
            return max((abs(c) for c in d.coeffs.values()), default=mpmath.mpf(0))


def b_constant(H: AkHamiltonian, i: int, j: int) -> Fraction:
    """The unique constant with {H, U} = b*x^(i+jk) - x^i*H^j for polynomial U."""
    if j == 0:
        return Fraction(1)
    k, sigma = H.k, H.sigma
    total = Fraction(0)
    for n in range(j + 1):
        prod = Fraction(1)
        ii, jj = i + n * k, j - n
        for _ in range(j - n):
            prod *= h_ratio(ii, jj, k)
            ii, jj = ii + k, jj - 1
        total += comb(j, n) * prod
    return Fraction(sigma) ** j * total


def f_form(c: TruncatedSeries1, H: AkHamiltonian) -> NormalForm:
    """Antiderivative presentation: f with f' = c, f(0) = 0, split by x-residue."""
    k = H.k
    c_decompose(c, k)  # raises NotReducedError on a bad exponent
    f = c.antiderivative()
    buckets: list[dict[int, object]] = [dict() for _ in range(k - 1)]
    for e, coeff in f.coeffs.items():
        if e % k == 0:
            raise AssertionError(f"f acquired an exponent divisible by k: {e}")
        i = e % k
        buckets[i - 1][(e - i) // k] = coeff
    comps = tuple(
        TruncatedSeries1._raw(buckets[i - 1], (f.order - i) // k, c.ring)
        for i in range(1, k))
    return NormalForm(kind=F_FORM, k=k, sigma=H.sigma, components=comps)


def f_recompose(nf: NormalForm) -> TruncatedSeries1:
    """Rebuild f(x) = sum x^i f_i(x^k) from an F-form."""
    if nf.kind != F_FORM:
        raise FormMismatchError("f_recompose needs an F form")
    k = nf.k
    out: dict[int, object] = {}
    order = None
    for s, comp in zip(nf.subscripts(), nf.components):
        for m, coeff in comp.coeffs.items():
            out[s + k * m] = coeff
        bound = s + k * (comp.order + 1) - 1
        order = bound if order is None else min(order, bound)
    ring = nf.components[0].ring
    return TruncatedSeries1._raw(out, order, ring)


def ch_form(c: TruncatedSeries1, H: AkHamiltonian
            ) -> tuple[NormalForm, ConversionTable]:
    """Rewrite the residual as sum x^i ct_i(H) via the constants b(i, j)."""
    k = H.k
    ring = c.ring
    table = ConversionTable(k, H.sigma)
    buckets: list[dict[int, object]] = [dict() for _ in range(k - 1)]
    with ring.context():
        for e, coeff in c.terms():
            i = e % k
            if i == k - 1:
                raise NotReducedError(f"exponent {e} is congruent to k-1 mod {k}")
            j = (e - i) // k
            b = b_constant(H, i, j)
            table.record(i, j, b)
            buckets[i][j] = coeff * ring.coerce(Fraction(1) / b)
    comps = tuple(
        TruncatedSeries1._raw(buckets[i], (c.order - i) // k, ring)
        for i in range(k - 1))
    return NormalForm(kind=CH_FORM, k=k, sigma=H.sigma, components=comps), table


def ch_expand(nf: NormalForm, H: AkHamiltonian) -> TruncatedSeries2:
    """Expand sum x^i ct_i(H(x, xi)) as a bivariate series (exact polynomial)."""
    if nf.kind != CH_FORM:
        raise FormMismatchError("ch_expand needs a c-of-H form")
    k = nf.k
    target = min(s + k * (comp.order + 1) - 1
                 for s, comp in zip(nf.subscripts(), nf.components))
    ring = nf.components[0].ring
    h_series = H.as_series2(target + k, ring)
    total = TruncatedSeries2.zero(target, ring)
    for s, comp in zip(nf.subscripts(), nf.components):
        if comp.is_zero():
            continue
        # re-tag the polynomial component so the substitution keeps every
        # exact term up to the target degree (H has valuation 2, and the
        # generic order formula would under-report)
        piece = comp._assume_order(target).substitute2(h_series)
        piece = piece.mul_monomial(1, s, 0)
        total = total + piece._assume_order(target)
    return total


def fibration_transport(components, k: int, reparam: TruncatedSeries1):
    """Transport the full component list along old = reparam(new).

    out_i(t) = in_i(reparam(t)) * (reparam(t)/t)^((i+1)/k - 1/2) * reparam'(t).
    Requires reparam(0) = 0, reparam'(0) > 0 and the big-float ring.
    """
    ring = reparam.ring
    if reparam.valuation() != 1:
        raise DegenerateError("reparametrization must vanish to first order only")
    ratio = TruncatedSeries1._raw(
        {e - 1: v for e, v in reparam.coeffs.items()}, reparam.order - 1, ring)
    deriv = reparam.derivative()
    out = []
    for i, comp in enumerate(components):
        exponent = Fraction(i + 1, k) - Fraction(1, 2)
        factor = unit_series_power(ratio, exponent) * deriv
        out.append(comp.map_coefficients(ring).compose1(reparam) * factor)
    return out


def fibration_form(nf: NormalForm, precision: int | None = None
                   ) -> tuple[NormalForm, FibrationChange]:
    """Normalize the leading component to 1 by reparametrizing the Hamiltonian.

    Returns the fibration-form presentation together with the change record
    (h, fhat) satisfying h(t)*fhat(h(t)) = t.  Applies the orientation flip
    (x, xi) -> (x, -xi) first when the leading coefficient is negative.
    """
    if nf.kind != CH_FORM:
        raise FormMismatchError("fibration_form needs a c-of-H form")
    k = nf.k
    lead = nf.components[0].coefficient(0)
    if lead == 0:
        raise DegenerateError("ct_0(0) = 0: the 2-form is degenerate at the origin")
    if precision is None:
        precision = nf.components[0].ring.precision or 256
    ring = Ring(BIGFLOAT, precision)

    orientation_flipped = lead < 0
    comps = [c.map_coefficients(ring) for c in nf.components]
    if orientation_flipped:
        comps = [-c for c in comps]

    beta = Fraction(2 + k, 2 * k)
    c0 = comps[0]
    with ring.context():
        f_series = TruncatedSeries1._raw(
            {m: v * ring.coerce(beta / (m + beta)) for m, v in c0.coeffs.items()},
            c0.order, ring)
        fhat = unit_series_power(f_series, 1 / beta)
        eta = fhat * TruncatedSeries1.identity(fhat.order + 1, ring)
        h = invert_series(eta)
        hatted = fibration_transport(comps, k, h)

        tol = mpmath.mpf(2) ** (-(precision - 16))
        lead_defect = hatted[0] - TruncatedSeries1.constant(1, hatted[0].order, ring)
        worst = max((abs(v) for v in lead_defect.coeffs.values()), default=mpmath.mpf(0))
        if worst > tol:
            raise AssertionError(
                f"fibration normalization defect {worst} exceeds tolerance {tol}")

    out = NormalForm(kind=FIBRATION_FORM, k=k, sigma=nf.sigma,
                     components=tuple(hatted[1:]), smooth_mode=nf.smooth_mode,
                     orientation_flipped=orientation_flipped)
    return out, FibrationChange(h=h, fhat=fhat)


def canonicalize_sign(nf: NormalForm) -> tuple[NormalForm, bool]:
    """Deterministic representative of the involution orbit.

    For even k the first nonzero coefficient among the flip-orbit
    components (scanned by subscript, then exponent) is made positive.
    Odd k has no relation and the form is returned unchanged.
    """
    orbit = nf.flip_orbit_subscripts()
    if not orbit:
        return replace(nf, flipped=False), False
    for s in orbit:
        comp = nf.component(s)
        for e in sorted(comp.coeffs):
            value = comp.coeffs[e]
            if value > 0:
                return replace(nf, flipped=False), False
            if value < 0:
                return replace(nf.apply_flip(), flipped=True), True
    return replace(nf, flipped=False), False


def invariants_equal(a: NormalForm, b: NormalForm) -> bool:
    """True iff the canonical representatives agree to the common order."""
    if (a.kind, a.k, a.sigma) != (b.kind, b.k, b.sigma):
        raise FormMismatchError(
            f"cannot compare ({a.kind}, k={a.k}, sigma={a.sigma}) with "
            f"({b.kind}, k={b.k}, sigma={b.sigma})")
    ca, _ = canonicalize_sign(a)
    cb, _ = canonicalize_sign(b)
    return all(x.agrees_with(y) for x, y in zip(ca.components, cb.components))


def potential_form(nf: NormalForm) -> tuple[TruncatedSeries1, SeriesMap]:
    """Split coordinates: V with H = xi~^2 + V(x~) under (x~, xi~) = (f(x), -xi).

    V = sigma * (f^{-1})^k; the defining identity xi~^2 + V(f(x)) = H is
    re-verified before returning.
    """
    if nf.kind != F_FORM:
        raise FormMismatchError("potential_form needs an F form")
    f = f_recompose(nf)
    if f.coefficient(1) == 0:
        raise DegenerateError("f_1(0) = 0: the change of variables is singular")
    ring = f.ring
    k, sigma = nf.k, nf.sigma
    finv = invert_series(f)
    v = finv
    for _ in range(k - 1):
        v = v * finv
    V = v.scale(sigma)

    order = f.order
    phi_x = f.as_series2_in_x(order)
    phi_xi = TruncatedSeries2.monomial(-1, 0, 1, order, ring)
    change = SeriesMap(phi_x=phi_x, phi_xi=phi_xi)

    H = AkHamiltonian(k, sigma)
    lhs = phi_xi * phi_xi + V.substitute2(phi_x)
    if not lhs.agrees_with(H.as_series2(lhs.order + k, ring), min(lhs.order, order)):
        raise AssertionError("potential-form identity xi~^2 + V(f(x)) = H failed")
    return V, change
