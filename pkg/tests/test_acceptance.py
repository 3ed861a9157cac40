"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines as the
criteria execute.
"""

import functools
import random
import time
from fractions import Fraction

import mpmath
import numpy as np
from scipy.interpolate import CubicSpline

from akforms.analysis import (
    abel_forward,
    abel_invert,
    channel_action,
    generalized_actions,
    growth_bound_check,
)
from akforms.cohomology import solve_cohomological
from akforms.moser import (
    inv_map,
    invariants_of,
    pullback_form,
    roundtrip_invariants,
    two_form_of_f_dxi,
)
from akforms.normalform import (
    CH_FORM,
    NormalForm,
    b_constant,
    f_form,
    f_recompose,
    fibration_form,
    fibration_transport,
    invariants_equal,
    potential_form,
)
from akforms.series import (
    AkHamiltonian,
    TruncatedSeries1,
    TruncatedSeries2,
    poisson_bracket,
)
from helpers import rand_flow_generator, rand_reduced_residual, rand_series2

H4 = AkHamiltonian(4, 1)


def criterion(num, text):
    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {num:2d} FAIL  {text}")
                raise
            print(f"ACCEPTANCE {num:2d} PASS  {text}")
        return inner
    return wrap


@criterion(1, "cohomological certificate: 100 random g, order 24, exact, < 30 s")
def test_certificate_exact_and_fast():
    rng = random.Random(1000)
    started = time.perf_counter()
    for trial in range(100):
        k = 2 + trial % 6            # cycles through k = 2..7
        sigma = 1 if trial % 2 == 0 else -1
        H = AkHamiltonian(k, sigma)
        g = rand_series2(rng, 24, terms=25)
        sol = solve_cohomological(g, H)
        assert sol.residual_order == 24
        # independent oracle: the generic two-argument bracket
        lhs = (poisson_bracket(sol.u, H.as_series2(sol.u.order + k))
               + sol.c.as_series2_in_x(sol.u.order))
        assert lhs.agrees_with(g, 24)
        assert all(e % k != k - 1 for e in sol.c.coeffs)
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"runtime {elapsed:.1f} s exceeds 30 s"


@criterion(2, "worked quartic: residuals, correction term, f components, relation metadata")
def test_worked_quartic():
    sol = solve_cohomological(TruncatedSeries2.monomial(1, 0, 2, 12), H4)
    assert sol.c == TruncatedSeries1.monomial(2, 4, 12)

    sol = solve_cohomological(TruncatedSeries2.monomial(1, 3, 0, 12), H4)
    assert sol.c.is_zero()
    assert sol.u.agrees_with(
        TruncatedSeries2.monomial(Fraction(-1, 4), 0, 1, sol.u.order))

    nf = f_form(solve_cohomological(TruncatedSeries2.constant(1, 12), H4).c, H4)
    assert nf.components[0].agrees_with(TruncatedSeries1.constant(1, 0))
    assert nf.components[1].is_zero()
    assert nf.components[2].is_zero()
    # the sign relation acts exactly on the f_2 slot
    assert nf.flip_orbit_subscripts() == [2]


@criterion(3, "b-constants: bracket oracle for b(0,1) = 3 and |b| >= 1 sweep")
def test_b_constants():
    # oracle: {H, -x*xi/2} = 3x^4 - H through the generic bracket
    u = TruncatedSeries2.monomial(Fraction(-1, 2), 1, 1, 10)
    lhs = poisson_bracket(u, H4.as_series2(14))
    rhs = TruncatedSeries2.monomial(3, 4, 0, 10) - H4.as_series2(10)
    assert lhs.agrees_with(rhs, 9)
    assert b_constant(H4, 0, 1) == 3

    for k in range(2, 8):
        for sigma in (1, -1):
            H = AkHamiltonian(k, sigma)
            for i in range(k - 1):
                for j in range(11):
                    assert abs(b_constant(H, i, j)) >= 1


@criterion(4, "Moser invariance: 50 random flow round trips per k in {3, 4, 5}")
def test_moser_invariance():
    rng = random.Random(4000)
    for k in (3, 4, 5):
        H = AkHamiltonian(k, 1)
        for _ in range(50):
            g = rand_series2(rng, 10)
            w = rand_flow_generator(rng, 10)
            assert w.valuation() >= 1
            assert roundtrip_invariants(g, H, w)


@criterion(5, "involution relation: equal after canonicalization, k = 4, 20 random g")
def test_involution_relation():
    rng = random.Random(5000)
    for _ in range(20):
        g = rand_series2(rng, 8)
        pulled = pullback_form(g, inv_map(8))
        nf_a = invariants_of(g, H4)
        nf_b = invariants_of(pulled, H4)
        assert invariants_equal(nf_a, nf_b)

        orbit_nonzero = any(not nf_a.component(s).is_zero()
                            for s in nf_a.flip_orbit_subscripts())
        raw_equal = all(x.agrees_with(y)
                        for x, y in zip(nf_a.components, nf_b.components))
        assert raw_equal == (not orbit_nonzero)


@criterion(6, "fibration form: h = 2^(-4/3) H at 256 bits, round trip to 1e-28")
def test_fibration_quartic_constant():
    order = 8
    ct = TruncatedSeries1.constant(2, order)
    zero = TruncatedSeries1.zero(order)
    nf = NormalForm(kind=CH_FORM, k=4, sigma=1, components=(ct, zero, zero))
    fib, change = fibration_form(nf, precision=256)
    with mpmath.workprec(256):
        tol30 = mpmath.mpf(10) ** -30
        expected = mpmath.power(2, mpmath.mpf(-4) / 3)
        assert abs(change.h.coefficient(1) - expected) <= tol30
        for e in range(2, change.h.order + 1):
            assert abs(change.h.coefficient(e)) <= tol30

        ring = change.h.ring
        comps_float = [c.map_coefficients(ring) for c in nf.components]
        hatted = fibration_transport(comps_float, 4, change.h)
        lead_defect = hatted[0] - TruncatedSeries1.constant(1, hatted[0].order, ring)
        assert all(abs(v) <= tol30 for v in lead_defect.coeffs.values())
        assert all(c.is_zero() for c in fib.components)

        # round trip: transport back along the inverse reparametrization
        eta = change.fhat * TruncatedSeries1.identity(change.fhat.order + 1, ring)
        full = [TruncatedSeries1.constant(1, hatted[0].order, ring), *fib.components]
        recovered = fibration_transport(full, 4, eta)
        tol28 = mpmath.mpf(10) ** -28
        for original, back in zip(comps_float, recovered):
            diff = original.truncate(back.order) - back.truncate(original.order)
            assert all(abs(v) <= tol28 for v in diff.coeffs.values())


@criterion(7, "Abel round trip: G = 1 + h, k = 4, rel error <= 1e-6 at 20 points, < 5 s")
def test_abel_roundtrip():
    started = time.perf_counter()
    sample_points = np.linspace(0.01, 0.1, 20)
    for i in range(3):
        grid = np.linspace(0.0, 0.1, 41)
        channel = [abel_invert(lambda s: 1.0 + s, 4, i, float(t)) for t in grid]
        spline = CubicSpline(grid, channel)
        for h in sample_points:
            forward = abel_forward(lambda s: float(spline(s)), 4, i, float(h))
            rel = abs(forward - (1.0 + h)) / (1.0 + h)
            assert rel <= 1e-6, f"i={i}, h={h}: rel={rel}"
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"runtime {elapsed:.1f} s exceeds 5 s"


@criterion(8, "symbolic vs numeric: A_0(0.05) of g = xi^2 matches c_0(t) = 2t to 1e-4")
def test_symbolic_numeric_cross_check():
    g = TruncatedSeries2.monomial(1, 0, 2, 8)
    sol = solve_cohomological(g, H4)
    assert sol.c == TruncatedSeries1.monomial(2, 4, 8)
    numeric = generalized_actions(g, 4, 0.05)[0]
    symbolic = channel_action(lambda t: 2.0 * t, 4, 0, 0.05)
    assert abs(numeric - symbolic) / abs(symbolic) <= 1e-4


@criterion(9, "growth bound: zero violations for i, j <= 40 and k in {2..6}")
def test_growth_bound_sweep():
    for k in range(2, 7):
        report = growth_bound_check(k, 1, i_max=40, j_max=40)
        assert report.checked > 0
        assert report.passed, f"violations for k={k}: {report.violations[:3]}"


@criterion(10, "potential form: both identities exact to order 16, 20 random f-forms")
def test_potential_form_random():
    rng = random.Random(10_000)
    for trial in range(20):
        k = 2 + trial % 5
        sigma = 1 if trial % 2 == 0 else -1
        H = AkHamiltonian(k, sigma)
        c = rand_reduced_residual(rng, 16, k, unit=True)
        nf = f_form(c, H)
        V, change = potential_form(nf)
        f = f_recompose(nf)

        lhs = change.phi_xi * change.phi_xi + V.substitute2(change.phi_x)
        assert lhs.agrees_with(H.as_series2(lhs.order + k), 16)

        one = TruncatedSeries2.constant(1, f.order)
        pulled = pullback_form(one, change)
        assert pulled.agrees_with(two_form_of_f_dxi(f), 16)
