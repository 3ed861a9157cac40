"""Batch front-end: parse problem files, run pipelines, emit reports.

Structured results go to stdout as JSON (sorted keys, so identical inputs
and seeds give byte-identical output); a short human summary goes to
stderr.  Exit codes: 0 ok, 2 input error, 3 degenerate input, 4 numeric
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import random
import sys
from dataclasses import dataclass
from fractions import Fraction

from .analysis import (
    DEFAULT_CONFIG,
    NonConvergentError,
    QuadratureConfig,
    SampledFunction,
    abel_forward,
    abel_invert,
    action_compact,
    action_noncompact,
    generalized_actions,
    growth_bound_check,
)
from .cohomology import solve_cohomological
from .moser import roundtrip_invariants
from .normalform import (
    DegenerateError,
    FormMismatchError,
    NormalForm,
    canonicalize_sign,
    ch_expand,
    ch_form,
    f_form,
    fibration_form,
    invariants_equal,
)
from .series import AkHamiltonian, Ring, TruncatedSeries2


class SpecError(ValueError):
    """Problem file failed to parse or violates its invariants."""


@dataclass
class ProblemSpec:
    k: int
    sigma: int
    order: int
    ring: Ring
    mode: str
    g: TruncatedSeries2

    @property
    def hamiltonian(self) -> AkHamiltonian:
        return AkHamiltonian(self.k, self.sigma)

    @classmethod
    def from_json(cls, obj, order_override=None,
                  mode_override=None) -> "ProblemSpec":
        try:
            k = int(obj["k"])
            sigma = int(obj["sigma"])
            order = int(order_override if order_override is not None
                        else obj.get("order", 2 * k))
            ring = Ring.from_json(obj.get("ring"))
            mode = mode_override or obj.get("mode", "analytic")
            g_obj = dict(obj["g"])
            g_obj.setdefault("order", order)
            g_obj.setdefault("ring", ring.to_json())
            g = TruncatedSeries2.from_json(g_obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"bad problem spec: {exc}") from exc
        if k < 2:
            raise SpecError(f"k must be >= 2, got {k}")
        if sigma not in (-1, 1):
            raise SpecError(f"sigma must be +1 or -1, got {sigma}")
        if order < k:
            raise SpecError(f"order must be >= k, got order={order}, k={k}")
        if mode not in ("analytic", "smooth"):
            raise SpecError(f"mode must be 'analytic' or 'smooth', got {mode!r}")
        return cls(k=k, sigma=sigma, order=order, ring=ring, mode=mode,
                   g=g.truncate(order))


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc


def _emit(report, summary_lines) -> None:
    sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    for line in summary_lines:
        sys.stderr.write(line + "\n")


def _smoothed(nf: NormalForm, spec: ProblemSpec) -> NormalForm:
    if spec.mode == "smooth" and not nf.smooth_mode:
        from dataclasses import replace
        return replace(nf, smooth_mode=True)
    return nf


# -- normalform --------------------------------------------------------


def cmd_normalform(args) -> int:
    spec = ProblemSpec.from_json(_read_json(args.spec), args.order, args.mode)
    H = spec.hamiltonian
    solution = solve_cohomological(spec.g, H)
    nf_f = _smoothed(f_form(solution.c, H), spec)
    nf_ch, table = ch_form(solution.c, H)
    nf_ch = _smoothed(nf_ch, spec)

    expanded = ch_expand(nf_ch, H)
    residual = solve_cohomological(
        solution.c.as_series2_in_x(expanded.order) - expanded, H)
    ch_certificate_ok = residual.c.is_zero()

    fib_json = None
    change_json = None
    fib_defect = None
    if not args.no_fibration:
        precision = args.precision or 256
        nf_fib, change = fibration_form(nf_ch, precision=precision)
        nf_fib = _smoothed(nf_fib, spec)
        fib_json = nf_fib.to_json()
        change_json = {"h": change.h.to_json(), "fhat": change.fhat.to_json()}
        fib_defect = float(change.max_defect())

    report = {
        "k": spec.k,
        "sigma": spec.sigma,
        "order": spec.order,
        "mode": spec.mode,
        "f_form": nf_f.to_json(),
        "ch_form": nf_ch.to_json(),
        "fibration_form": fib_json,
        "fibration_change": change_json,
        "certificates": {
            "u": solution.u.to_json(),
            "c": solution.c.to_json(),
            "residual_order": solution.residual_order,
            "b_i_independent": table.i_independent(),
            "ch_certificate_ok": ch_certificate_ok,
            "fibration_defect": fib_defect,
            "flip_orbit_subscripts": nf_f.flip_orbit_subscripts(),
        },
    }
    _emit(report, [
        f"normalform: H = {H}, order {spec.order}, mode {spec.mode}",
        f"residual c certified to order {solution.residual_order}; "
        f"c-of-H certificate {'ok' if ch_certificate_ok else 'FAILED'}",
    ])
    return 0


# -- compare -----------------------------------------------------------


def _load_form(path: str, form_kind: str, args) -> NormalForm:
    obj = _read_json(path)
    if isinstance(obj, dict) and "kind" in obj:
        return NormalForm.from_json(obj)
    spec = ProblemSpec.from_json(obj, args.order, args.mode)
    H = spec.hamiltonian
    solution = solve_cohomological(spec.g, H)
    if form_kind == "ch":
        nf, _ = ch_form(solution.c, H)
    else:
        nf = f_form(solution.c, H)
    return _smoothed(nf, spec)


def cmd_compare(args) -> int:
    nf_a = _load_form(args.spec_a, args.form, args)
    nf_b = _load_form(args.spec_b, args.form, args)
    try:
        equal = invariants_equal(nf_a, nf_b)
    except FormMismatchError as exc:
        raise SpecError(str(exc)) from exc
    _, flip_a = canonicalize_sign(nf_a)
    _, flip_b = canonicalize_sign(nf_b)
    orders = [min(x.order, y.order)
              for x, y in zip(nf_a.components, nf_b.components)]
    certified = min(orders) if orders else 0
    report = {"equal": equal, "flipped": flip_a != flip_b,
              "certified_order": certified}
    _emit(report, [f"compare: equal={equal} flipped={flip_a != flip_b} "
                   f"certified_order={certified}"])
    return 0


# -- roundtrip ---------------------------------------------------------


def _random_polynomial(rng: random.Random, order: int, ring: Ring,
                       max_degree: int = 4) -> TruncatedSeries2:
    """Sparse random polynomial with valuation >= 1 (flow generator)."""
    terms = {}
    for _ in range(rng.randint(1, 4)):
        d = rng.randint(1, min(order, max_degree))
        i = rng.randint(0, d)
        value = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        if value:
            terms[(i, d - i)] = value
    if not terms:
        terms[(1, 0)] = Fraction(1, 2)
    return TruncatedSeries2(terms, order, ring)


def cmd_roundtrip(args) -> int:
    spec = ProblemSpec.from_json(_read_json(args.spec), args.order, args.mode)
    H = spec.hamiltonian
    rng = random.Random(args.seed)
    failures = []
    for trial in range(args.trials):
        w = _random_polynomial(rng, spec.order, spec.ring)
        if not roundtrip_invariants(spec.g, H, w):
            failures.append(trial)
    report = {"trials": args.trials, "seed": args.seed,
              "failures": failures, "all_ok": not failures}
    _emit(report, [f"roundtrip: {args.trials} trials, "
                   f"{len(failures)} failures (seed {args.seed})"])
    return 0


# -- action ------------------------------------------------------------


def _parse_h_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise SpecError(f"bad h list {text!r}: {exc}") from exc


def _dump_levelsets(path: str, H: AkHamiltonian, h_list: list[float],
                    epsilon: float, points: int = 200) -> None:
    rows = []
    for h in h_list:
        if H.sigma > 0 and H.k % 2 == 0:
            if h <= 0:
                continue
            for idx in range(points):
                theta = -math.pi / 2 + math.pi * idx / (points - 1)
                xi = math.sqrt(h) * math.sin(theta)
                x = max(h - xi * xi, 0.0) ** (1.0 / H.k)
                rows.append((h, x, xi))
                rows.append((h, -x, xi))
        else:
            for idx in range(points):
                xi = -epsilon + 2 * epsilon * idx / (points - 1)
                rhs = (h - xi * xi) * H.sigma  # x^k = sigma*(h - xi^2)
                if H.k % 2 == 1:
                    x = math.copysign(abs(rhs) ** (1.0 / H.k), rhs)
                    rows.append((h, x, xi))
                elif rhs >= 0:
                    x = rhs ** (1.0 / H.k)
                    rows.append((h, x, xi))
                    rows.append((h, -x, xi))
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["h", "x", "xi"])
        for row in rows:
            writer.writerow([repr(v) for v in row])


def cmd_action(args) -> int:
    spec = ProblemSpec.from_json(_read_json(args.spec), args.order, args.mode)
    H = spec.hamiltonian
    h_list = _parse_h_list(args.h_list)
    cfg = QuadratureConfig(epsilon=args.epsilon, h_max=args.h_max,
                           rel_tol=args.tol,
                           abs_tol=min(args.tol * 1e-4, 1e-12))
    g_eval = spec.g.evaluate
    even = all(j % 2 == 0 for (_, j) in spec.g.coeffs)
    entries = []
    for h in h_list:
        entry = {"h": h}
        if H.sigma > 0 and H.k % 2 == 0:
            entry["action"] = action_compact(g_eval, H.k, h, cfg)
            if even:
                entry["generalized"] = generalized_actions(spec.g, H.k, h, cfg)
        else:
            entry["action"] = action_noncompact(g_eval, H.k, h, cfg)
        entries.append(entry)
    report = {"k": spec.k, "sigma": spec.sigma, "entries": entries}
    if args.csv:
        with open(args.csv, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["h", "value"])
            for entry in entries:
                writer.writerow([repr(entry["h"]), repr(entry["action"])])
        report["csv"] = args.csv
    if args.dump_levelsets:
        _dump_levelsets(args.dump_levelsets, H, h_list, args.epsilon)
        report["levelsets_csv"] = args.dump_levelsets
    _emit(report, [f"action: {len(entries)} samples for H = {H}"])
    return 0


# -- abel --------------------------------------------------------------


def cmd_abel(args) -> int:
    sampled = SampledFunction.from_csv(args.csv)
    k, i = args.k, args.i
    if not 0 <= i <= k - 2:
        raise SpecError(f"need 0 <= i <= k-2, got i={i}, k={k}")
    cfg = QuadratureConfig(rel_tol=args.tol, abs_tol=min(args.tol * 1e-4, 1e-12))
    if args.t_list:
        t_values = _parse_h_list(args.t_list)
    else:
        t_values = list(sampled.grid)
    points = [{"t": t, "c": abel_invert(sampled, k, i, t, cfg)} for t in t_values]

    # forward re-transform of the recovered channel as a consistency check
    from scipy.interpolate import CubicSpline
    spline = CubicSpline([p["t"] for p in points], [p["c"] for p in points])
    g_func, _ = sampled.interpolants()
    checks = []
    for t in t_values:
        if t < max(t_values) * 0.05:
            continue
        forward = abel_forward(lambda s: float(spline(s)), k, i, t, cfg)
        target = g_func(t)
        rel = abs(forward - target) / max(abs(target), 1e-30)
        checks.append({"t": t, "rel_error": rel})
    report = {"k": k, "i": i, "points": points, "forward_check": checks}
    if args.out_csv:
        with open(args.out_csv, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["h", "value"])
            for p in points:
                writer.writerow([repr(p["t"]), repr(p["c"])])
        report["csv"] = args.out_csv
    worst = max((c["rel_error"] for c in checks), default=0.0)
    _emit(report, [f"abel: inverted channel i={i} (k={k}) at "
                   f"{len(points)} points; worst forward error {worst:.3e}"])
    return 0


# -- check-growth ------------------------------------------------------


def cmd_checkgrowth(args) -> int:
    try:
        k_values = [int(part) for part in args.k_list.split(",") if part.strip()]
    except ValueError as exc:
        raise SpecError(f"bad k list {args.k_list!r}") from exc
    reports = [growth_bound_check(k, args.sigma, args.i_max, args.j_max)
               for k in k_values]
    report = {"reports": [r.to_json() for r in reports],
              "passed": all(r.passed for r in reports)}
    _emit(report, [f"check-growth: k in {k_values}, i <= {args.i_max}, "
                   f"j <= {args.j_max}: "
                   + ("no violations" if report["passed"] else "VIOLATIONS")])
    return 0


# -- parser ------------------------------------------------------------


def _add_common(sub) -> None:
    sub.add_argument("--order", type=int, default=None,
                     help="override the truncation order")
    sub.add_argument("--precision", type=int, default=None,
                     help="big-float precision in bits")
    sub.add_argument("--mode", choices=["analytic", "smooth"], default=None)
    sub.add_argument("--tol", type=float, default=DEFAULT_CONFIG.rel_tol,
                     help="relative quadrature tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="akforms",
        description="Symplectic normal forms of A_{k-1} singularities")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("normalform", help="all three normal forms + certificates")
    p.add_argument("spec", help="problem JSON file ('-' for stdin)")
    p.add_argument("--no-fibration", action="store_true",
                   help="skip the big-float fibration form")
    _add_common(p)
    p.set_defaults(func=cmd_normalform)

    p = subs.add_parser("compare", help="invariant equality of two inputs")
    p.add_argument("spec_a", help="problem spec or emitted normal-form JSON")
    p.add_argument("spec_b")
    p.add_argument("--form", choices=["f", "ch"], default="f")
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    p = subs.add_parser("roundtrip", help="random flow-pullback invariance trials")
    p.add_argument("spec")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_roundtrip)

    p = subs.add_parser("action", help="action integrals at sampled energies")
    p.add_argument("spec")
    p.add_argument("--h-list", required=True,
                   help="comma-separated energy values")
    p.add_argument("--epsilon", type=float, default=DEFAULT_CONFIG.epsilon)
    p.add_argument("--h-max", type=float, default=DEFAULT_CONFIG.h_max)
    p.add_argument("--csv", default=None, help="write h,value samples here")
    p.add_argument("--dump-levelsets", default=None,
                   help="write a CSV point cloud of the level curves")
    _add_common(p)
    p.set_defaults(func=cmd_action)

    p = subs.add_parser("abel", help="invert sampled channel data")
    p.add_argument("csv", help="sampled h,value CSV file")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--t-list", default=None)
    p.add_argument("--out-csv", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_abel)

    p = subs.add_parser("check-growth", help="ladder-coefficient growth bound sweep")
    p.add_argument("--k-list", default="2,3,4,5,6")
    p.add_argument("--sigma", type=int, default=1, choices=[-1, 1])
    p.add_argument("--i-max", type=int, default=40)
    p.add_argument("--j-max", type=int, default=40)
    _add_common(p)
    p.set_defaults(func=cmd_checkgrowth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return 2
    except (DegenerateError,) as exc:
        sys.stderr.write(f"degenerate input: {exc}\n")
        return 3
    except NonConvergentError as exc:
        sys.stderr.write(f"numeric non-convergence: {exc}\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
