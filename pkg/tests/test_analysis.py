import math
import random
from fractions import Fraction

import pytest
from scipy import integrate
from scipy.special import beta as beta_fn

from akforms.analysis import (
    QuadratureConfig,
    SampledFunction,
    abel_forward,
    abel_invert,
    action_compact,
    action_noncompact,
    channel_action,
    cross_check_invariants,
    generalized_actions,
    growth_bound_check,
)
from akforms.cohomology import elim_coefficient, ham_bracket
from akforms.series import AkHamiltonian, TruncatedSeries2

H4 = AkHamiltonian(4, 1)
CFG = QuadratureConfig()


# -- plain actions -----------------------------------------------------


def test_action_compact_circle():
    assert action_compact(lambda x, xi: 1.0, 2, 1.0) == pytest.approx(math.pi, rel=1e-9)


def test_action_compact_quartic_against_1d_oracle():
    # independent reduction: area = 2 * int_{-1}^{1} sqrt(1 - x^4) dx
    oracle, _ = integrate.quad(lambda x: 2.0 * math.sqrt(1.0 - x ** 4), -1, 1)
    assert action_compact(lambda x, xi: 1.0, 4, 1.0) == pytest.approx(oracle, rel=1e-9)
    assert oracle == pytest.approx(3.4960767390561565, rel=1e-10)


def test_action_compact_odd_in_x_vanishes():
    value = action_compact(lambda x, xi: x + 3 * x * xi * xi, 4, 0.7)
    assert abs(value) < 1e-10


def test_action_noncompact_degenerate_area():
    # h = 0, k = 2: region between the axis branch x = |xi| and xi = +-eps
    assert action_noncompact(lambda x, xi: 1.0, 2, 0.0, CFG) == pytest.approx(
        CFG.epsilon ** 2, rel=1e-10)


def test_action_noncompact_continuity_at_zero():
    at_zero = action_noncompact(lambda x, xi: 1.0, 3, 0.0, CFG)
    near_zero = action_noncompact(lambda x, xi: 1.0, 3, -1e-8, CFG)
    assert at_zero == pytest.approx(near_zero, rel=1e-5)


def test_action_noncompact_odd_in_xi_vanishes():
    value = action_noncompact(lambda x, xi: xi * (1 + x), 3, -0.05, CFG)
    assert abs(value) < 1e-10


def test_action_noncompact_domain_check():
    with pytest.raises(ValueError):
        action_noncompact(lambda x, xi: 1.0, 3, 0.5, CFG)


# -- generalized (channel) actions ---------------------------------------


def test_generalized_actions_beta_oracle():
    # each channel function identically 1: A_i = h^((i+1)/k - 1/2) * B(1/2, (i+1)/k)
    g = TruncatedSeries2({(0, 0): 1, (1, 0): 1, (2, 0): 1}, 8)
    h = 0.05
    values = generalized_actions(g, 4, h)
    for i in range(3):
        expected = h ** ((i + 1) / 4 - 0.5) * beta_fn(0.5, (i + 1) / 4)
        assert values[i] == pytest.approx(expected, rel=1e-8)


def test_generalized_actions_require_even():
    with pytest.raises(ValueError):
        generalized_actions(TruncatedSeries2.monomial(1, 0, 1, 6), 4, 0.05)


def test_generalized_actions_bracket_invariance():
    rng = random.Random(41)
    base = TruncatedSeries2({(0, 0): 1, (1, 0): Fraction(1, 2), (0, 2): 1}, 10)
    for w_coeffs in ({(1, 1): Fraction(1, 3)}, {(2, 1): Fraction(-1, 2)},
                     {(1, 3): Fraction(1, 5)}):
        w = TruncatedSeries2(w_coeffs, 10)
        shift = ham_bracket(H4, w).truncate(10)
        assert all(j % 2 == 0 for (_, j) in shift.coeffs)
        for h in (0.02, 0.05):
            a = generalized_actions(base, 4, h)
            b = generalized_actions(base + shift, 4, h)
            for i in range(3):
                scale = max(abs(a[i]), 1.0)
                assert abs(a[i] - b[i]) / scale < 1e-7


def test_generalized_actions_small_h_scaling():
    # A_i(h) / h^((i+1)/k - 1/2) -> B(1/2, (i+1)/k) * g_i(0, 0)
    g = TruncatedSeries2({(0, 0): 2, (1, 0): 3, (0, 2): 1}, 8)
    h = 1e-5
    values = generalized_actions(g, 4, h)
    leading = {0: 2.0, 1: 3.0, 2: 0.0}
    for i in range(3):
        scaled = values[i] / h ** ((i + 1) / 4 - 0.5)
        target = beta_fn(0.5, (i + 1) / 4) * leading[i]
        assert scaled == pytest.approx(target, abs=2e-2 * max(1.0, abs(target)))


def test_action_equals_action_of_residual():
    # equal invariants imply equal actions: the bracket part integrates to
    # zero over any sublevel set by Stokes, so the residual alone carries I(h)
    from akforms.cohomology import solve_cohomological
    g = TruncatedSeries2({(0, 0): 1, (1, 0): Fraction(1, 2),
                          (0, 2): Fraction(1, 3), (2, 0): Fraction(-1, 4)}, 12)
    c = solve_cohomological(g, H4).c
    for h in (0.02, 0.05, 0.1):
        original = action_compact(g.evaluate, 4, h)
        reduced = action_compact(lambda x, xi: c.evaluate(x), 4, h)
        assert reduced == pytest.approx(original, rel=1e-9)


# -- Abel-type inversion -------------------------------------------------


def test_abel_invert_zero():
    assert abel_invert(lambda h: 0.0, 4, 1, 0.05, dG=lambda h: 0.0) == pytest.approx(0.0, abs=1e-12)


def test_abel_invert_constant_channel():
    # channel c = C gives G = C * B(1/2, (i+1)/k); inverting returns C
    for k, i in ((4, 0), (4, 2), (3, 1), (5, 3)):
        C = 1.7
        G_value = C * beta_fn(0.5, (i + 1) / k)
        got = abel_invert(lambda h: G_value, k, i, 0.05, dG=lambda h: 0.0)
        assert got == pytest.approx(C, rel=1e-9)


def test_abel_invert_linear_roundtrip():
    for i in range(3):
        c_samples = {}
        for t in [0.01 + 0.09 * n / 19 for n in range(20)]:
            c_samples[t] = abel_invert(lambda h: h, 4, i, t)
        for t, c_val in c_samples.items():
            # forward-transform the pointwise inverse of G(h) = h:
            # by linearity c is linear in t, so interpolation is exact
            c0 = abel_invert(lambda h: h, 4, i, 0.0)
            slope = (c_samples[max(c_samples)] - c0) / max(c_samples)
            forward = abel_forward(lambda s: c0 + slope * s, 4, i, t)
            assert forward == pytest.approx(t, rel=1e-6)


def test_abel_invert_out_of_range():
    with pytest.raises(ValueError):
        abel_invert(lambda h: 1.0, 4, 3, 0.05)
    with pytest.raises(ValueError):
        abel_invert(lambda h: 1.0, 4, 0, -0.1)


def test_abel_invert_sampled_matches_callable():
    grid = [0.1 * n / 40 for n in range(41)]
    sampled = SampledFunction(grid=grid, values=[1.0 + h + 0.5 * h * h for h in grid])
    with pytest.raises(ValueError):
        abel_invert(sampled, 4, 0, 0.2)  # outside the sampled domain
    for t in (0.02, 0.05, 0.09):
        direct = abel_invert(lambda h: 1.0 + h + 0.5 * h * h, 4, 0, t,
                             dG=lambda h: 1.0 + h)
        via_samples = abel_invert(sampled, 4, 0, t)
        assert via_samples == pytest.approx(direct, rel=1e-7)


def test_sampled_function_roundtrip_and_derivative(tmp_path):
    grid = [0.1 * n / 20 for n in range(21)]
    sf = SampledFunction(grid=grid, values=[math.sin(h) for h in grid])
    path = tmp_path / "g.csv"
    sf.to_csv(path)
    back = SampledFunction.from_csv(path)
    assert back.grid == sf.grid and back.values == sf.values
    derivs = sf.derivative_samples()
    for h, d in zip(grid, derivs):
        assert d == pytest.approx(math.cos(h), abs=1e-8)


# -- growth bound --------------------------------------------------------


def test_growth_bound_example_value():
    # k = 2, i = 1, j = 2, n = 1: |a| = h(1, 2) = 3/2 against 2^(3/2)*(5/2)*pi
    assert abs(elim_coefficient(2, 1, 1, 2, 1)) == Fraction(3, 2)
    bound = 2 ** (1 + 1.5 - 1) * (1 + 1.5) * math.pi
    assert bound == pytest.approx(22.2144, abs=1e-3)
    assert float(Fraction(3, 2)) <= bound


def test_growth_bound_gate():
    # j' = 1/2 < 1 excludes every j = 1 pair from the sweep
    report = growth_bound_check(4, 1, i_max=10, j_max=1)
    assert report.checked == 0 and report.passed


def test_growth_bound_small_sweep():
    for k in (2, 3, 4):
        report = growth_bound_check(k, 1, i_max=12, j_max=12)
        assert report.passed
        assert report.checked > 0


# -- symbolic vs numeric -------------------------------------------------


def test_cross_check_trivial_constant():
    report = cross_check_invariants(TruncatedSeries2.constant(1, 8), H4, [0.05])
    assert report.passed


def test_cross_check_quartic_xi_squared():
    g = TruncatedSeries2.monomial(1, 0, 2, 8)
    report = cross_check_invariants(g, H4, [0.05])
    assert report.passed
    row0 = [r for r in report.rows if r.channel == 0][0]
    symbolic = channel_action(lambda t: 2.0 * t, 4, 0, 0.05)
    assert row0.symbolic == pytest.approx(symbolic, rel=1e-10)
    assert row0.rel_discrepancy < 1e-4


def test_cross_check_two_channels():
    g = TruncatedSeries2({(0, 0): 1, (1, 0): 1}, 8)
    report = cross_check_invariants(g, H4, [0.03, 0.06])
    assert report.passed


def test_cross_check_guards():
    with pytest.raises(ValueError):
        cross_check_invariants(TruncatedSeries2.constant(1, 8),
                               AkHamiltonian(3, 1), [0.05])
    with pytest.raises(ValueError):
        cross_check_invariants(TruncatedSeries2.monomial(1, 1, 1, 8), H4, [0.05])


def test_quadrature_config_region_invariant():
    with pytest.raises(ValueError):
        QuadratureConfig(epsilon=0.1, h_max=0.1)
