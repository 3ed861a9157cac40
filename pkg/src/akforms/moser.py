"""H-preserving test maps and symbolic pullbacks.

The flow generator is Y = w * X_H with X_H = (2*xi, -sigma*k*x^(k-1)),
which annihilates H by construction, so its truncated Lie-series
exponential preserves H exactly to the working order (asserted, not
assumed).  Together with the involution (x, xi) -> (-x, -xi) these maps
drive the round-trip verification: pulling the 2-form back through any
of them must leave the computed invariants unchanged (up to the sign
relation for even k).

Generators must be honest series.  For sigma = -1 and even k the level
sets are disconnected and there are H-preserving maps generated by data
that is merely constant per connected component; such generators have
no single-series representation and are outside this module's scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cohomology import solve_cohomological
from .normalform import NormalForm, f_form, invariants_equal
from .series import (
    RATIONAL_RING,
    AkHamiltonian,
    Ring,
    SeriesMap,
    TruncatedSeries1,
    TruncatedSeries2,
)


class ValuationTooLowError(ValueError):
    """The flow generator would break truncation soundness (constant w)."""


class NotHPreservingError(ValueError):
    """The map does not preserve H to the certified order."""


class NotAkShapeError(ValueError):
    """The linear part is not of the upper-triangular unit-diagonal shape."""


@dataclass(frozen=True)
class LinearPart:
    """Linear data (eps1, b; 0, eps2) of an H-preserving map at the origin."""

    eps1: int
    eps2: int
    b: Fraction


def canonical_vf(H: AkHamiltonian, order: int | None = None,
                 ring: Ring = RATIONAL_RING
                 ) -> tuple[TruncatedSeries2, TruncatedSeries2]:
    """The field (d_xi H, -d_x H) = (2*xi, -sigma*k*x^(k-1)); dH(X) = 0 checked."""
    if order is None:
        order = H.k + 2
    vx = TruncatedSeries2.monomial(2, 0, 1, order, ring)
    vxi = TruncatedSeries2.monomial(-H.sigma * H.k, H.k - 1, 0, order, ring)
    hs = H.as_series2(order + H.k, ring)
    if not (hs.dx() * vx + hs.dxi() * vxi).is_zero():
        raise AssertionError("canonical field does not annihilate H")
    return vx, vxi


def _apply_field(fx: TruncatedSeries2, fxi: TruncatedSeries2,
                 f: TruncatedSeries2, work: int) -> TruncatedSeries2:
    lifted = f._assume_order(work + 1)
    return (fx * lifted.dx() + fxi * lifted.dxi()).truncate(work)


def flow_map(w: TruncatedSeries2, H: AkHamiltonian, order: int) -> SeriesMap:
    """Time-one Lie-series exponential of w * X_H, truncated at the order.

    w is read as an exact polynomial; it must vanish at the origin so that
    every application of the field strictly raises the valuation.  The
    returned map is checked to satisfy H(map) = H up to the order.
    """
    if w.valuation() < 1:
        raise ValuationTooLowError(
            "flow generator w must vanish at the origin (valuation >= 1)")
    ring = w.ring
    work = order
    w_big = w._assume_order(work + max(H.k, 2))
    field_x = w_big.mul_monomial(2, 0, 1)
    field_xi = w_big.mul_monomial(-H.sigma * H.k, H.k - 1, 0)

    components = []
    for seed in (TruncatedSeries2.monomial(1, 1, 0, work, ring),
                 TruncatedSeries2.monomial(1, 0, 1, work, ring)):
        total = seed
        term = seed
        n = 1
        while not term.is_zero():
            if n > work + 2:
                raise AssertionError("Lie series failed to terminate")
            term = _apply_field(field_x, field_xi, term, work).scale(Fraction(1, n))
            total = total + term._assume_order(work)
            n += 1
        components.append(total)
    phi = SeriesMap(phi_x=components[0], phi_xi=components[1])

    defect = _h_pullback_defect(phi, H, order)
    if not defect.is_zero():
        raise AssertionError(
            f"flow map does not preserve H to order {order}: defect {defect!r}")
    return phi


def _h_pullback_defect(m: SeriesMap, H: AkHamiltonian, order: int | None = None
                       ) -> TruncatedSeries2:
    """H(map) - H, truncated at the certifiable order."""
    px, pxi = m.phi_x, m.phi_xi
    hk = px
    for _ in range(H.k - 1):
        hk = hk * px
    pulled = pxi * pxi + hk.scale(H.sigma)
    if order is not None:
        pulled = pulled.truncate(min(order, pulled.order))
    return pulled - H.as_series2(pulled.order + H.k, m.ring).truncate(pulled.order)


def preserves_h(m: SeriesMap, H: AkHamiltonian) -> bool:
    """Whether H(map) = H holds to the map's certified order."""
    return _h_pullback_defect(m, H).is_zero()


def pullback_form(g: TruncatedSeries2, m: SeriesMap) -> TruncatedSeries2:
    """Coefficient of the pulled-back 2-form: g(map) * det(d map)."""
    return g.substitute(m.phi_x, m.phi_xi) * m.jacobian_determinant()


def inv_map(order: int, ring: Ring = RATIONAL_RING) -> SeriesMap:
    """The involution (x, xi) -> (-x, -xi); preserves H exactly when k is even."""
    return SeriesMap(TruncatedSeries2.monomial(-1, 1, 0, order, ring),
                     TruncatedSeries2.monomial(-1, 0, 1, order, ring))


def compose_maps(outer: SeriesMap, inner: SeriesMap) -> SeriesMap:
    """The germ outer(inner(x, xi))."""
    return SeriesMap(outer.phi_x.substitute(inner.phi_x, inner.phi_xi),
                     outer.phi_xi.substitute(inner.phi_x, inner.phi_xi))


def linear_part(m: SeriesMap, H: AkHamiltonian) -> LinearPart:
    """Extract (eps1, eps2, b) of an H-preserving map and validate its shape."""
    defect = _h_pullback_defect(m, H)
    if not defect.is_zero():
        raise NotHPreservingError(
            f"map changes H within the certified order: {defect!r}")
    a = m.phi_x.coefficient(1, 0)
    b = m.phi_x.coefficient(0, 1)
    c = m.phi_xi.coefficient(1, 0)
    d = m.phi_xi.coefficient(0, 1)
    if c != 0:
        raise NotAkShapeError(f"lower-left entry of the linear part is {c}, not 0")
    if d * d != 1:
        raise NotAkShapeError(f"xi-diagonal entry {d} is not a unit")
    if a ** H.k != 1:
        raise NotAkShapeError(f"x-diagonal entry {a} is not a k-th root of unity")
    return LinearPart(eps1=int(a), eps2=int(d), b=b)


def roundtrip_invariants(g: TruncatedSeries2, H: AkHamiltonian,
                         w: TruncatedSeries2) -> bool:
    """Invariants of g and of its pullback along the flow of w*X_H agree.

    The comparison runs at the order both pipelines certify (the pullback
    loses one order to the Jacobian).
    """
    phi = flow_map(w, H, g.order)
    pulled = pullback_form(g, phi)
    nf_a = invariants_of(g, H)
    nf_b = invariants_of(pulled, H)
    return invariants_equal(nf_a, nf_b)


def invariants_of(g: TruncatedSeries2, H: AkHamiltonian) -> NormalForm:
    """F-form invariants of the 2-form with coefficient g."""
    return f_form(solve_cohomological(g, H).c, H)


def two_form_of_f_dxi(f: TruncatedSeries1) -> TruncatedSeries2:
    """Coefficient of d(f(x) dxi) against dxi^dx, namely -f'(x)."""
    return (-f.derivative()).as_series2_in_x()
