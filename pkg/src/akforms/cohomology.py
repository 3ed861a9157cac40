"""Exact solution of the cohomological equation {H, u} = g - c(x).

The transport bracket of H = xi^2 + sigma*x^k acts on monomials in a
triangular way, so the equation is solved by three eliminations:

1. odd-in-xi part of g, killed by an explicit antiderivative in x;
2. even-in-xi monomials x^i xi^(2j), folded down to pure x-powers through
   the ladder u_{ij} = x^(i+1) xi^(2j-1) / (2(i+1));
3. pure x-powers with exponent = k-1 mod k, killed by an antiderivative
   in xi.

What survives is the unique residual c(x) = sum_{i<=k-2} x^i c_i(x^k).
Everything is exact ring arithmetic; the certificate {H, u} + c = g is
re-verified by a direct bracket before returning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

from .series import (
    AkHamiltonian,
    TruncatedSeries1,
    TruncatedSeries2,
)


def ham_bracket(H: AkHamiltonian, u: TruncatedSeries2) -> TruncatedSeries2:
    """{H, u} = 2*xi*d_x(u) - sigma*k*x^(k-1)*d_xi(u).

    This is the transport bracket fixing the sign convention of the whole
    package: {H, x*xi/2} = xi^2 - sigma*(k/2)*x^k.
    """
    term_x = u.dx().mul_monomial(2, 0, 1)
    term_xi = u.dxi().mul_monomial(H.sigma * H.k, H.k - 1, 0)
    return term_x - term_xi


def h_ratio(i: int, j: int, k: int) -> Fraction:
    """Ladder ratio (2j-1)*k / (2*(i+1)) produced by one bracket step."""
    return Fraction((2 * j - 1) * k, 2 * (i + 1))


def tau(i: int, j: int, k: int) -> tuple[int, int]:
    """Index shift (i, j) -> (i+k, j-1) of one ladder step."""
    return (i + k, j - 1)


def elim_coefficient(k: int, sigma: int, i: int, j: int, n: int) -> Fraction:
    """Closed form a_{ij}^n = sigma^n * prod_{p<n} h(tau^p(i, j))."""
    value = Fraction(sigma) ** n
    ii, jj = i, j
    for _ in range(n):
        value *= h_ratio(ii, jj, k)
        ii, jj = tau(ii, jj, k)
    return value


@lru_cache(maxsize=None)
def _check_sign_convention(k: int, sigma: int) -> bool:
    """Self-test: the fixed sign choice must reproduce the bracket of x*xi/2."""
    H = AkHamiltonian(k, sigma)
    u01 = TruncatedSeries2.monomial(Fraction(1, 2), 1, 1, k + 2)
    expected = TruncatedSeries2(
        {(0, 2): 1, (k, 0): -sigma * h_ratio(0, 1, k)}, k + 2)
    got = ham_bracket(H, u01)
    if not got.agrees_with(expected, k):
        raise AssertionError(
            f"sign convention self-test failed for k={k}, sigma={sigma}: "
            f"got {got!r}, expected {expected!r}")
    return True


@dataclass
class ElimTable:
    """Ladder coefficients a_{ij}^n recorded during elimination.

    a_{ij}^0 = 1 and a_{ij}^n = sigma^n * prod_{p<n} h(tau^p(i,j)); the
    closed form is re-derivable via :func:`elim_coefficient`.
    """

    k: int
    sigma: int
    entries: dict[tuple[int, int, int], Fraction] = field(default_factory=dict)

    def h(self, i: int, j: int) -> Fraction:
        return h_ratio(i, j, self.k)

    def tau(self, i: int, j: int) -> tuple[int, int]:
        return tau(i, j, self.k)

    def record(self, i: int, j: int, n: int, value: Fraction) -> None:
        self.entries[(i, j, n)] = value

    def verify_closed_form(self) -> bool:
        return all(value == elim_coefficient(self.k, self.sigma, i, j, n)
                   for (i, j, n), value in self.entries.items())


@dataclass
class CohomologySolution:
    """Certificate (u, c) with {H, u} + c = g to residual_order.

    ``u`` is kept exact for the input read as a polynomial (its stored
    order can exceed residual_order); ``c`` is truncated to the order the
    underlying germ certifies.
    """

    u: TruncatedSeries2
    c: TruncatedSeries1
    residual_order: int
    table: ElimTable

    def verify(self, g: TruncatedSeries2, H: AkHamiltonian) -> bool:
        lhs = ham_bracket(H, self.u) + self.c.as_series2_in_x(self.u.order)
        return lhs.agrees_with(g, self.residual_order)


def _expand_H_power(H: AkHamiltonian, p: int):
    """Exponent/coefficient pairs of (xi^2 + sigma*x^k)^p as integer data."""
    for q in range(p + 1):
        yield (H.k * (p - q), 2 * q), comb(p, q) * H.sigma ** (p - q)


def _accumulate(target: dict, key: tuple[int, int], value) -> None:
    s = target.get(key, 0) + value
    if s == 0:
        target.pop(key, None)
    else:
        target[key] = s


def eliminate_odd(g: TruncatedSeries2, H: AkHamiltonian
                  ) -> tuple[TruncatedSeries2, TruncatedSeries2]:
    """Kill the odd-in-xi part of g.

    Returns (u_odd, g_even) with {H, u_odd} equal to the odd part of g,
    exactly, and g_even = g - odd part.
    """
    _check_sign_convention(H.k, H.sigma)
    k, sigma = H.k, H.sigma
    ring = g.ring
    u_terms: dict[tuple[int, int], object] = {}
    even_terms: dict[tuple[int, int], object] = {}
    max_deg = g.order
    with ring.context():
        for (a, jj), coeff in g.terms():
            if jj % 2 == 0:
                even_terms[(a, jj)] = coeff
                continue
            b = (jj - 1) // 2
            for m in range(b + 1):
                pref = coeff * ring.coerce(
                    Fraction(comb(b, m) * (-sigma) ** m, 2 * (a + m * k + 1)))
                base_i = a + m * k + 1
                for (di, dj), hc in _expand_H_power(H, b - m):
                    key = (base_i + di, dj)
                    max_deg = max(max_deg, key[0] + key[1])
                    _accumulate(u_terms, key, pref * ring.coerce(hc))
    u_odd = TruncatedSeries2(u_terms, max_deg, ring)
    g_even = TruncatedSeries2(even_terms, g.order, ring)
    return u_odd, g_even


def eliminate_xi(g_even: TruncatedSeries2, H: AkHamiltonian
                 ) -> tuple[TruncatedSeries2, TruncatedSeries1, ElimTable]:
    """Fold every even monomial x^i xi^(2j) down to a pure x-power.

    Returns (U, c_raw, table) with {H, U} = g_even - c_raw exactly.
    """
    _check_sign_convention(H.k, H.sigma)
    k, sigma = H.k, H.sigma
    ring = g_even.ring
    table = ElimTable(k, sigma)
    u_terms: dict[tuple[int, int], object] = {}
    c_terms: dict[int, object] = {}
    max_deg = g_even.order
    max_exp = 0
    with ring.context():
        for (i, jj), coeff in g_even.terms():
            if jj % 2 != 0:
                raise ValueError(f"input is not even in xi: monomial {(i, jj)}")
            j = jj // 2
            if j == 0:
                _accumulate(c_terms, i, coeff)
                max_exp = max(max_exp, i)
                continue
            a_n = Fraction(1)
            for n in range(j):
                table.record(i, j, n, a_n)
                key = (i + n * k + 1, 2 * (j - n) - 1)
                max_deg = max(max_deg, key[0] + key[1])
                _accumulate(u_terms, key,
                            coeff * ring.coerce(a_n / (2 * (i + n * k + 1))))
                a_n = sigma * a_n * h_ratio(i + n * k, j - n, k)
            _accumulate(c_terms, i + k * j, coeff * ring.coerce(a_n))
            max_exp = max(max_exp, i + k * j)
    U = TruncatedSeries2(u_terms, max_deg, ring)
    c_raw = TruncatedSeries1(c_terms, max(g_even.order, max_exp), ring)
    return U, c_raw, table


def reduce_residual(c_raw: TruncatedSeries1, H: AkHamiltonian
                    ) -> tuple[TruncatedSeries2, TruncatedSeries1]:
    """Remove the exponents of c_raw congruent to k-1 mod k.

    Returns (u0_corr, c) with {H, u0_corr} equal to the removed part,
    exactly, and c carrying the remaining (reduced) exponents.
    """
    _check_sign_convention(H.k, H.sigma)
    k, sigma = H.k, H.sigma
    ring = c_raw.ring
    u_terms: dict[tuple[int, int], object] = {}
    kept: dict[int, object] = {}
    max_deg = 0
    with ring.context():
        for e, coeff in c_raw.terms():
            if e % k != k - 1:
                kept[e] = coeff
                continue
            j = (e - (k - 1)) // k
            # x^k = sigma*(H - xi^2) on the fiber, so the j-th power of the
            # removable series picks up sigma^j on top of the -sigma/k prefactor
            pref = coeff * ring.coerce(Fraction(-sigma * sigma ** j, k))
            for m in range(j + 1):
                factor = pref * ring.coerce(Fraction(comb(j, m) * (-1) ** m, 2 * m + 1))
                for (di, dj), hc in _expand_H_power(H, j - m):
                    key = (di, dj + 2 * m + 1)
                    max_deg = max(max_deg, key[0] + key[1])
                    _accumulate(u_terms, key, factor * ring.coerce(hc))
    u0_corr = TruncatedSeries2(u_terms, max(max_deg, c_raw.order), ring)
    c = TruncatedSeries1(kept, c_raw.order, ring)
    return u0_corr, c


def solve_cohomological(g: TruncatedSeries2, H: AkHamiltonian) -> CohomologySolution:
    """Full three-step elimination with a verified certificate.

    The returned residual c is the unique series of the form
    sum_{i=0}^{k-2} x^i c_i(x^k) with {H, u} + c = g up to g's order.
    """
    u_odd, g_even = eliminate_odd(g, H)
    U, c_raw, table = eliminate_xi(g_even, H)
    u0_corr, c_full = reduce_residual(c_raw, H)

    order = max(u_odd.order, U.order, u0_corr.order, g.order)
    u = (u_odd._assume_order(order) + U._assume_order(order)
         + u0_corr._assume_order(order))
    c = c_full.truncate(g.order)

    solution = CohomologySolution(u=u, c=c, residual_order=g.order, table=table)
    if not solution.verify(g, H):
        raise AssertionError(
            "cohomological certificate failed: {H,u} + c != g to order "
            f"{g.order} (k={H.k}, sigma={H.sigma})")
    return solution
