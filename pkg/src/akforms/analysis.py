"""Numerical cross checks: action integrals, channel actions, Abel inversion.

Quadrature goes through QUADPACK (scipy) after the substitutions that
turn the endpoint singularities into integrable or removable ones
(xi = sqrt(h)*sin(theta) on the fibers, v = 1 - w^2 in the inversion
kernel).  All tolerances come from :class:`QuadratureConfig`; a budget
overrun raises :class:`NonConvergentError` instead of returning a bad
number.

These checks run in the direction a finite computation can certify:
equal invariants imply equal action data, verified at sample energies.
The converse (action data pinning down the invariants) holds here only
at the truncated-series level, through the exact elimination module.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .cohomology import h_ratio, solve_cohomological
from .series import AkHamiltonian, TruncatedSeries2, c_decompose


class NonConvergentError(RuntimeError):
    """Adaptive quadrature exhausted its subdivision budget."""


@dataclass(frozen=True)
class QuadratureConfig:
    epsilon: float = 0.5
    h_max: float = 0.1
    abs_tol: float = 1e-12
    rel_tol: float = 1e-8
    max_subdivisions: int = 200
    cross_rel_tol: float = 1e-4

    def __post_init__(self):
        if self.epsilon <= 0 or self.h_max <= 0:
            raise ValueError("epsilon and h_max must be positive")
        if self.epsilon ** 2 <= self.h_max:
            raise ValueError("need epsilon^2 > h_max for a well-defined region")


DEFAULT_CONFIG = QuadratureConfig()


@dataclass
class SampledFunction:
    """Function samples on a strictly increasing grid in [0, h0]."""

    grid: list[float]
    values: list[float]

    def __post_init__(self):
        if len(self.grid) != len(self.values):
            raise ValueError("grid and values must have equal length")
        if len(self.grid) < 2:
            raise ValueError("need at least two samples")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")

    @classmethod
    def from_csv(cls, path) -> "SampledFunction":
        grid, values = [], []
        with open(path, newline="") as handle:
            for row in csv.reader(handle):
                if not row:
                    continue
                try:
                    a, b = float(row[0]), float(row[1])
                except ValueError:
                    continue  # header line
                grid.append(a)
                values.append(b)
        return cls(grid=grid, values=values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["h", "value"])
            for a, b in zip(self.grid, self.values):
                writer.writerow([repr(a), repr(b)])

    def derivative_samples(self) -> list[float]:
        """Grid-point derivatives: 4th-order central stencils inside,
        one-sided at the ends (uniform grids); np.gradient otherwise."""
        x = np.asarray(self.grid, dtype=float)
        y = np.asarray(self.values, dtype=float)
        steps = np.diff(x)
        if len(y) >= 5 and np.allclose(steps, steps[0], rtol=1e-10):
            d = steps[0]
            out = np.empty_like(y)
            out[2:-2] = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * d)
            out[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * d)
            out[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * d)
            out[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * d)
            out[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * d)
            return out.tolist()
        return np.gradient(y, x).tolist()

    def interpolants(self):
        """(G, G') as callables on [grid[0], grid[-1]]."""
        g_spline = CubicSpline(self.grid, self.values)
        d_spline = CubicSpline(self.grid, self.derivative_samples())
        return (lambda t: float(g_spline(t))), (lambda t: float(d_spline(t)))


def _quad(func, a, b, cfg: QuadratureConfig) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(func, a, b, epsabs=cfg.abs_tol,
                                      epsrel=cfg.rel_tol,
                                      limit=cfg.max_subdivisions)
        except integrate.IntegrationWarning as exc:
            raise NonConvergentError(str(exc)) from exc
    return value


def _dblquad(func, a, b, gfun, hfun, cfg: QuadratureConfig) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.dblquad(func, a, b, gfun, hfun,
                                         epsabs=cfg.abs_tol, epsrel=cfg.rel_tol)
        except integrate.IntegrationWarning as exc:
            raise NonConvergentError(str(exc)) from exc
    return value


def action_compact(g_eval, k: int, h: float,
                   cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Integral of g over the compact sublevel set {xi^2 + x^k <= h}, k even."""
    if k % 2 != 0:
        raise ValueError("compact sublevel sets need even k (sigma = +1)")
    if h <= 0:
        raise ValueError("need h > 0")
    x_max = h ** (1.0 / k)

    def xi_lo(x):
        return -math.sqrt(max(h - x ** k, 0.0))

    def xi_hi(x):
        return math.sqrt(max(h - x ** k, 0.0))

    return _dblquad(lambda xi, x: g_eval(x, xi), -x_max, x_max, xi_lo, xi_hi, cfg)


def action_noncompact(g_eval, k: int, h: float,
                      cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Integral of g over R(h) = {|xi| <= eps, 0 <= x <= (xi^2 - h)^(1/k)}, h <= 0."""
    if h > 0 or h < -cfg.h_max:
        raise ValueError(f"need -h_max <= h <= 0, got {h}")

    def x_hi(xi):
        return (xi * xi - h) ** (1.0 / k)

    return _dblquad(lambda x, xi: g_eval(x, xi), -cfg.epsilon, cfg.epsilon,
                    lambda xi: 0.0, x_hi, cfg)


def _even_channels(g: TruncatedSeries2, k: int) -> list[dict[tuple[int, int], float]]:
    """Split an even-in-xi series into x-residue channels i = 0..k-2.

    Channel i holds float coefficients of t^m s^b where the monomial was
    x^(i+km) xi^(2b); the residue-(k-1) channel is bracket-exact and is
    not an action channel, so it is dropped.
    """
    channels: list[dict[tuple[int, int], float]] = [dict() for _ in range(k - 1)]
    for (a, j), coeff in g.coeffs.items():
        if j % 2 != 0:
            raise ValueError("series must be even in xi")
        i = a % k
        if i == k - 1:
            continue
        channels[i][((a - i) // k, j // 2)] = float(coeff)
    return channels


def _channel_eval(channel: dict[tuple[int, int], float]):
    def evaluate(t: float, s: float) -> float:
        return sum(c * t ** m * s ** b for (m, b), c in channel.items())
    return evaluate


def _fiber_integral(func_of_t_s, k: int, i: int, h: float,
                    cfg: QuadratureConfig) -> float:
    """Integral of f(h - xi^2, xi^2) * (h - xi^2)^(-(k-1-i)/k) over the fiber.

    Substituting xi = sqrt(h) sin(theta) removes the improper endpoint:
    the integrand becomes f(h cos^2, h sin^2) * cos(theta)^((2i+2-k)/k)
    times h^((2i+2-k)/(2k)), integrable for every 0 <= i <= k-2.
    """
    if h <= 0:
        raise ValueError("need h > 0")
    ecos = (2 * i + 2 - k) / k

    def integrand(theta):
        c2 = math.cos(theta) ** 2
        return func_of_t_s(h * c2, h * (1 - c2)) * math.cos(theta) ** ecos

    prefactor = h ** ((2 * i + 2 - k) / (2 * k))
    return prefactor * _quad(integrand, -math.pi / 2, math.pi / 2, cfg)


def generalized_actions(g: TruncatedSeries2, k: int, h: float,
                        cfg: QuadratureConfig = DEFAULT_CONFIG) -> list[float]:
    """Channel actions A_i(h), i = 0..k-2, of an even-in-xi series (sigma=+1)."""
    channels = _even_channels(g, k)
    return [_fiber_integral(_channel_eval(channel), k, i, h, cfg)
            for i, channel in enumerate(channels)]


def channel_action(c_eval, k: int, i: int, h: float,
                   cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """A_i(h) for a single channel given as a univariate function of t = h - xi^2."""
    return _fiber_integral(lambda t, _s: c_eval(t), k, i, h, cfg)


def abel_forward(c_eval, k: int, i: int, h: float,
                 cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """G(h) = integral over [-1, 1] of c(h(1-xi^2)) * (1-xi^2)^(-(k-1-i)/k)."""
    ecos = (2 * i + 2 - k) / k

    def integrand(theta):
        c2 = math.cos(theta) ** 2
        return c_eval(h * c2) * math.cos(theta) ** ecos

    return _quad(integrand, -math.pi / 2, math.pi / 2, cfg)


def _numeric_derivative(func, x: float, scale: float):
    step = max(scale, 1e-3) * 1e-6
    if x - step < 0:
        return (-3 * func(x) + 4 * func(x + step) - func(x + 2 * step)) / (2 * step)
    return (func(x + step) - func(x - step)) / (2 * step)


def abel_invert(G, k: int, i: int, t: float,
                cfg: QuadratureConfig = DEFAULT_CONFIG, dG=None) -> float:
    """Solve the channel integral equation for c_i at the point t.

    c_i(t) = (1/pi) * [ ((i+1)/k) * I0 + t * I1 ] with
    I0 = int_0^1 v^((i+1-k/2)/k) G(tv) (1-v)^(-1/2) dv and I1 the same
    with v-exponent (i+1+k/2)/k and G'.  The substitution v = 1 - w^2
    removes the (1-v)^(-1/2) factor before quadrature.  G may be a
    callable or a :class:`SampledFunction` (derivative by finite
    differences in that case).
    """
    if not 0 <= i <= k - 2:
        raise ValueError(f"channel index must satisfy 0 <= i <= k-2, got {i}")
    if isinstance(G, SampledFunction):
        if not (G.grid[0] <= t <= G.grid[-1]):
            raise ValueError(f"t = {t} outside the sampled domain")
        g_func, d_func = G.interpolants()
    else:
        g_func = G
        d_func = dG if dG is not None else (
            lambda x: _numeric_derivative(G, x, max(abs(t), 1.0)))
    if t < 0:
        raise ValueError("t must be nonnegative")

    alpha = (i + 1 - k / 2) / k

    def kernel0(w):
        v = 1 - w * w
        return v ** alpha * g_func(t * v)

    def kernel1(w):
        v = 1 - w * w
        return v ** (alpha + 1) * d_func(t * v)

    i0 = 2 * _quad(kernel0, 0.0, 1.0, cfg)
    i1 = 2 * _quad(kernel1, 0.0, 1.0, cfg)
    return ((i + 1) / k * i0 + t * i1) / math.pi


@dataclass
class GrowthBoundReport:
    k: int
    sigma: int
    i_max: int
    j_max: int
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self):
        return {
            "k": self.k, "sigma": self.sigma,
            "i_max": self.i_max, "j_max": self.j_max,
            "checked": self.checked, "passed": self.passed,
            "violations": [
                {"i": i, "j": j, "n": n, "value": str(v), "bound": b}
                for (i, j, n, v, b) in self.violations],
        }


def growth_bound_check(k: int, sigma: int, i_max: int, j_max: int,
                       precision: int = 128) -> GrowthBoundReport:
    """Check |a_{ij}^n| <= 2^(i'+j'-1) * (i'+j') * pi over the gated range.

    The gate is i' = (i+1)/k >= 1 and j' = (2j-1)/2 >= 1; the ladder
    values are exact rationals, the bound is evaluated in big floats.
    """
    report = GrowthBoundReport(k=k, sigma=sigma, i_max=i_max, j_max=j_max)
    with mpmath.workprec(precision):
        for i in range(k - 1, i_max + 1):
            for j in range(2, j_max + 1):
                i_prime = Fraction(i + 1, k)
                j_prime = Fraction(2 * j - 1, 2)
                if i_prime < 1 or j_prime < 1:
                    continue
                s = i_prime + j_prime
                bound = (mpmath.power(2, mpmath.mpf(s.numerator) / s.denominator - 1)
                         * (mpmath.mpf(s.numerator) / s.denominator) * mpmath.pi)
                a = Fraction(1)
                ii, jj = i, j
                for n in range(j):
                    report.checked += 1
                    value = abs(a)
                    numeric = mpmath.mpf(value.numerator) / value.denominator
                    if numeric > bound:
                        report.violations.append((i, j, n, value, float(bound)))
                    a *= h_ratio(ii, jj, k)
                    ii, jj = ii + k, jj - 1
    return report


@dataclass
class CrossCheckRow:
    channel: int
    h: float
    numeric: float
    symbolic: float
    rel_discrepancy: float


@dataclass
class CrossCheckReport:
    k: int
    rel_tol: float
    rows: list[CrossCheckRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.rel_discrepancy <= self.rel_tol for r in self.rows)

    def to_json(self):
        return {
            "k": self.k, "rel_tol": self.rel_tol, "passed": self.passed,
            "rows": [{"channel": r.channel, "h": r.h, "numeric": r.numeric,
                      "symbolic": r.symbolic, "rel_discrepancy": r.rel_discrepancy}
                     for r in self.rows],
        }


def cross_check_invariants(g: TruncatedSeries2, H: AkHamiltonian,
                           h_samples: list[float],
                           cfg: QuadratureConfig = DEFAULT_CONFIG
                           ) -> CrossCheckReport:
    """Channel actions of g from quadrature vs the symbolic residual.

    The residual c from the exact elimination and the raw series g differ
    by a bracket-exact term, whose channel actions vanish by integration
    by parts; truncation makes the match approximate at small h.
    """
    if H.sigma != 1 or H.k % 2 != 0:
        raise ValueError("cross check needs sigma = +1 and even k")
    k = H.k
    for (_, j) in g.coeffs:
        if j % 2 == 1:
            raise ValueError("cross check expects an even-in-xi series")
    solution = solve_cohomological(g, H)
    comps = c_decompose(solution.c, k)
    report = CrossCheckReport(k=k, rel_tol=cfg.cross_rel_tol)
    for h in h_samples:
        numeric = generalized_actions(g, k, h, cfg)
        for i in range(k - 1):
            comp = comps[i]
            symbolic = channel_action(comp.evaluate, k, i, h, cfg)
            denom = max(abs(symbolic), abs(numeric[i]), 1e-30)
            rel = abs(numeric[i] - symbolic) / denom
            report.rows.append(CrossCheckRow(channel=i, h=h, numeric=numeric[i],
                                             symbolic=symbolic,
                                             rel_discrepancy=rel))
    return report
