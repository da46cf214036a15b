"""Command-line front end: ``pcfbounds eval|table|regions|figdata|coeffs``.

Exit codes: 0 success, 1 ``--check`` mismatch, 2 invalid parameters,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from importlib import resources

from mpmath import mp, mpc, mpf, sqrt

from .numerics.context import PrecisionContext
from .numerics.special import PoleError
from .poincare import PhaseError, RegionError

EXIT_OK, EXIT_CHECK, EXIT_PARAMS, EXIT_NUMERIC = 0, 1, 2, 3
METHODS = ("oracle", "poincare", "uniform-pos", "uniform-negz", "uniform-nega", "ibp")


class UsageError(ValueError):
    """Parameters that do not fit the requested method."""


# ----------------------------------------------------------------- parsing


def parse_real(text: str):
    """Decimal or ``p/q`` string to mpf, kept exact at the working precision."""
    text = text.strip()
    try:
        if "/" in text:
            q = Fraction(text)
            return mpf(q.numerator) / q.denominator
        return mpf(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a real number: {text!r}") from exc


def parse_complex(text: str):
    """Python complex syntax (``3+4j``) or polar ``r@theta`` with theta in units of pi.

    ``r@1`` lands on the upper side of the negative real axis.
    """
    text = text.strip()
    if "@" in text:
        r, th = text.split("@", 1)
        r, th = parse_real(r), parse_real(th)
        if th == 1:
            return mpc(-r, 0)
        return r * mp.expj(th * mp.pi)
    try:
        z = mp.mpmathify(text.replace("i", "j")) if ("j" in text or "i" in text) else None
    except (ValueError, TypeError) as exc:
        raise UsageError(f"not a complex number: {text!r}") from exc
    return parse_real(text) if z is None else z


def _fmt(x, digits):
    if x is None:
        return None
    if isinstance(x, bool):
        return x
    if isinstance(x, (int, str)):
        return x
    if hasattr(x, "as_dict"):
        return x.as_dict(digits)
    x = mp.mpmathify(x)
    if isinstance(x, mpc):
        if x.imag == 0:
            return mp.nstr(x.real, digits)
        return {"re": mp.nstr(x.real, digits), "im": mp.nstr(x.imag, digits)}
    return mp.nstr(x, digits)


def _flat(value):
    """Scalar-friendly rendering for csv and text output."""
    if isinstance(value, dict):
        if set(value) == {"re", "im"}:
            return f"{value['re']}{'' if str(value['im']).startswith('-') else '+'}{value['im']}j"
        return ";".join(f"{k}={_flat(v)}" for k, v in value.items())
    return "" if value is None else str(value)


# ------------------------------------------------------------------ output


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render_record(record: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(record, indent=2) + "\n"
    flat = {}
    for key, value in record.items():
        if key in ("params", "details") and isinstance(value, dict):
            for k, v in value.items():
                flat[f"{key}.{k}"] = _flat(v)
        else:
            flat[key] = _flat(value)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(flat))
        writer.writeheader()
        writer.writerow(flat)
        return buf.getvalue()
    width = max(len(k) for k in flat)
    return "".join(f"{k.ljust(width)} = {v}\n" for k, v in flat.items())


def _render_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    if not rows:
        return ""
    fields = list(rows[0])
    for row in rows[1:]:
        fields.extend(k for k in row if k not in fields)
    buf = io.StringIO()
    if fmt == "csv":
        writer = csv.DictWriter(buf, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _flat(row.get(k)) for k in fields})
        return buf.getvalue()
    widths = {k: max(len(k), *(len(_flat(r.get(k))) for r in rows)) for k in fields}
    buf.write("  ".join(k.rjust(widths[k]) for k in fields) + "\n")
    for row in rows:
        buf.write("  ".join(_flat(row.get(k)).rjust(widths[k]) for k in fields) + "\n")
    return buf.getvalue()


# -------------------------------------------------------------------- eval


def _report_record(rep, params, args, extra=None):
    d = args.print_digits
    exact_value = None
    if rep.exact_remainder is not None:
        exact_value = rep.partial_sum + rep.exact_remainder
    record = {
        "params": params,
        "method": rep.method,
        "value": {"mantissa": _fmt(rep.partial_sum, d), "logscale": _fmt(rep.prefactor_log, d)},
        "partial_sum": _fmt(rep.partial_sum, d),
        "bound": _fmt(rep.bound, d),
        "exact_remainder": _fmt(rep.exact_remainder, d),
        "exact_value": _fmt(exact_value, d),
        "ratio": _fmt(rep.ratio, d),
        "region": rep.region,
        "digits": args.digits,
        "details": {k: _fmt(v, d) for k, v in rep.details.items()},
    }
    if extra:
        record.update(extra)
    return record


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required for method {args.method}")


def _point_t(args, a):
    from .uniform import uniform_point

    if (args.t is None) == (args.z is None):
        raise UsageError("give exactly one of --t and --z")
    if args.t is not None:
        return parse_real(args.t)
    z = parse_complex(args.z)
    if isinstance(z, mpc):
        if z.imag != 0:
            raise UsageError("uniform methods need real z")
        z = z.real
    return uniform_point(a, z=abs(z)).t


def cmd_eval(args, ctx) -> int:
    from . import integral, oracle, poincare, uniform

    method = args.method
    _need(args, "a")
    a = parse_real(args.a)
    d = args.print_digits
    params = {"a": args.a, "z": args.z, "t": args.t, "n": args.n}
    if method == "oracle":
        _need(args, "z")
        z = parse_complex(args.z)
        real = not isinstance(z, mpc) or z.imag == 0
        zz = z.real if isinstance(z, mpc) and real else z
        vals = oracle.pcf_values(a, zz, ctx, with_v=real)
        record = {
            "params": {"a": args.a, "z": args.z},
            "method": "oracle",
            "value": vals.U.as_dict(d),
            "bound": None,
            "exact_remainder": None,
            "ratio": None,
            "region": None,
            "digits": args.digits,
            "U": _fmt(vals.U.value(), d),
            "Uprime": _fmt(vals.Uprime.value(), d),
            "V": _fmt(vals.V.value(), d) if vals.V is not None else None,
            "Vprime": _fmt(vals.Vprime.value(), d) if vals.Vprime is not None else None,
        }
        _emit(args, _render_record(record, args.format))
        return EXIT_OK
    _need(args, "n")
    n = args.n
    if n < 1:
        raise UsageError("--n must be >= 1")
    if method == "poincare":
        _need(args, "z")
        z = parse_complex(args.z)
        rep = poincare.remainder_bound(a, z, n, args.mode, ctx, exact=args.oracle, strict=args.strict)
        params["mode"] = args.mode
    elif method == "uniform-pos":
        rep = uniform.eval_pos_z(a, _point_t(args, a), n, ctx, exact=args.oracle)
    elif method == "uniform-negz":
        rep = uniform.eval_neg_z(a, _point_t(args, a), n, ctx, exact=args.oracle)
    elif method == "uniform-nega":
        reps = uniform.eval_neg_a(a, _point_t(args, a), n, ctx, exact=args.oracle)
        rep = reps[args.function]
        params["function"] = args.function
    elif method == "ibp":
        _need(args, "z")
        z = parse_real(args.z)
        weight = integral.WeightConfig(parse_real(args.sigma_n))
        s0 = parse_real(args.sigma0) if args.sigma0 else None
        rep = integral.eval_ibp(a, z, n, ctx, exact=args.oracle, weight=weight, sigma0=s0)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown method {method}")
    _emit(args, _render_record(_report_record(rep, params, args), args.format))
    return EXIT_OK


# ------------------------------------------------------------------- table


def load_expected() -> dict:
    text = resources.files("pcfbounds").joinpath("data/tables.json").read_text(encoding="utf-8")
    return json.loads(text)


def compute_table(which: int, ctx, jobs: int = 1):
    from .poincare import table_poincare
    from .uniform import tables_uniform

    if which == 1:
        return table_poincare("piecewise", ctx, jobs=jobs)
    if which == 2:
        return table_poincare("hyp2f1", ctx, jobs=jobs)
    if which in (3, 4, 5):
        return tables_uniform(which, ctx, jobs=jobs)
    raise UsageError("table must be 1..5")


def compare_table(which: int, grid, expected: dict | None = None) -> list[dict]:
    """One row per cell with the computed value, the printed value and the verdict."""
    ref = (expected or load_expected())[str(which)]
    tol = {(o["row"], o["col"]): o["tolerance"] for o in ref.get("overrides", [])}
    cap = ref.get("max_entry")
    rows = []
    for i, rv in enumerate(ref["row_values"]):
        for j, cv in enumerate(ref["col_values"]):
            got = grid[i][j]
            want = ref["values"][i][j]
            t = tol.get((i, j), ref["tolerance"])
            diff = abs(float(got) - want)
            ok = diff <= t and (cap is None or got <= cap)
            rows.append({
                "table": which,
                "row_name": ref["rows"],
                "row_value": rv,
                "col_name": ref["cols"],
                "col_value": cv,
                "computed": mp.nstr(got, 8),
                "expected": want,
                "abs_diff": f"{diff:.2e}",
                "tolerance": t,
                "ok": ok,
            })
    return rows


def cmd_table(args, ctx) -> int:
    which = args.which
    grid = compute_table(which, ctx, args.jobs)
    rows = compare_table(which, grid)
    failed = [r for r in rows if not r["ok"]]
    if args.format == "text":
        ref = load_expected()[str(which)]
        lines = [f"Table {which}: {ref['title']}\n"]
        head = [f"{ref['rows']}\\{ref['cols']}"] + [str(c) for c in ref["col_values"]]
        lines.append("  ".join(h.rjust(9) for h in head) + "\n")
        for i, rv in enumerate(ref["row_values"]):
            cells = [mp.nstr(grid[i][j], 5) for j in range(len(ref["col_values"]))]
            lines.append("  ".join(c.rjust(9) for c in [str(rv)] + cells) + "\n")
        lines.append(f"{len(rows) - len(failed)}/{len(rows)} cells within tolerance\n")
        _emit(args, "".join(lines))
    else:
        _emit(args, _render_rows(rows, args.format))
    if args.check and failed:
        for r in failed:
            print(
                f"mismatch: table {which} {r['row_name']}={r['row_value']} {r['col_name']}={r['col_value']}: "
                f"computed {r['computed']}, expected {r['expected']} (tol {r['tolerance']})",
                file=sys.stderr,
            )
        return EXIT_CHECK
    return EXIT_OK


# ----------------------------------------------------------------- regions


def _parse_grid(text: str):
    try:
        xs, ys = text.split(",")
        x0, x1, nx = xs.split(":")
        y0, y1, ny = ys.split(":")
        return (parse_real(x0), parse_real(x1), int(nx)), (parse_real(y0), parse_real(y1), int(ny))
    except ValueError as exc:
        raise UsageError("grid must look like x0:x1:nx,y0:y1:ny") from exc


def region_rows(a, points=64, grid=None, zs=()):
    from .poincare import classify_region, region_boundaries

    kappa = abs(mp.mpmathify(a))
    rows = []
    for name, pts in region_boundaries(kappa, points).items():
        for k, z in enumerate(pts):
            w = sqrt(2 * z)
            rows.append({"kind": "boundary", "name": name, "index": k, "plane": "z",
                         "x": mp.nstr(z.real, 12), "y": mp.nstr(z.imag, 12), "region": ""})
            rows.append({"kind": "boundary", "name": name, "index": k, "plane": "w",
                         "x": mp.nstr(w.real, 12), "y": mp.nstr(w.imag, 12), "region": ""})
    samples = list(zs)
    if grid is not None:
        (x0, x1, nx), (y0, y1, ny) = grid
        for i in range(nx):
            for j in range(ny):
                x = x0 + (x1 - x0) * i / max(nx - 1, 1)
                y = y0 + (y1 - y0) * j / max(ny - 1, 1)
                samples.append(mpc(x, y))
    for k, z in enumerate(samples):
        z = mp.mpmathify(z)
        rows.append({"kind": "point", "name": "sample", "index": k, "plane": "z",
                     "x": mp.nstr(mp.re(z), 12), "y": mp.nstr(mp.im(z), 12),
                     "region": str(classify_region(a, z))})
    return rows


def cmd_regions(args, ctx) -> int:
    a = parse_real(args.a)
    grid = _parse_grid(args.grid) if args.grid else None
    zs = [parse_complex(z) for z in (args.point or [])]
    with ctx.workdps(5):
        rows = region_rows(a, args.points, grid, zs)
    _emit(args, _render_rows(rows, args.format))
    return EXIT_OK


# ----------------------------------------------------------------- figdata


def fig2_rows(points=101):
    from .uniform import gen_coeffs

    table = gen_coeffs(8)
    rows = []
    for k in range(points):
        tau = -1 + mpf(k) / (points - 1)
        row = {"tau": mp.nstr(tau, 12)}
        for s in (1, 2, 3):
            row[f"phi{s}"] = mp.nstr(table.phi[s](tau), 15)
        rows.append(row)
    return rows


def fig3_rows(ctx, points=51):
    from .numerics.rationalpoly import poly_variation
    from .uniform import gen_coeffs, variation_majorant, variation_phi

    table = gen_coeffs(8)
    rows = []
    with ctx.workdps(5):
        for s in (1, 2, 3):
            shift = poly_variation(table.phi[s], (Fraction(-1), Fraction(-1, 2)), ctx)
            for k in range(points):
                tau = -mpf(1) / 2 + mpf(k) / (2 * (points - 1))
                var = variation_phi(s, tau, "pos_z", ctx)
                maj = variation_majorant(s, tau)
                rows.append({
                    "s": s,
                    "tau": mp.nstr(tau, 12),
                    "phi": mp.nstr(table.phi[s](tau), 15),
                    "variation": mp.nstr(var, 15),
                    "majorant": mp.nstr(maj, 15),
                    "variation_shifted": mp.nstr(var + shift, 15),
                    "majorant_shifted": mp.nstr(maj + shift, 15),
                })
    return rows


def fig4_table(ctx, z=10, lams=None):
    from . import integral

    if lams is None:
        lams = [mpf(k) / 4 for k in range(81)]
        with ctx.workdps(5):
            dip = mp.findroot(lambda x: integral.f1_closed(x, ctx), 8)
        lams = sorted(set(lams) | {dip})
    out = []
    for row in integral.fig4_rows(lams, z, ctx):
        out.append({k: mp.nstr(v, 12) for k, v in row.items()})
    return out


def cmd_figdata(args, ctx) -> int:
    if args.which == 2:
        rows = fig2_rows(args.points or 101)
    elif args.which == 3:
        rows = fig3_rows(ctx, args.points or 51)
    else:
        lams = None
        if args.lambdas:
            lams = [parse_real(x) for x in args.lambdas.split(",")]
        rows = fig4_table(ctx, parse_real(args.z), lams)
    _emit(args, _render_rows(rows, args.format))
    return EXIT_OK


# ------------------------------------------------------------------ coeffs


def cmd_coeffs(args, ctx) -> int:
    from .integral import cauchy_kernel
    from .uniform import gen_coeffs

    rows = []
    if args.kernel is not None:
        k = cauchy_kernel(args.kernel)
        for (i, j, m), v in k.numer:
            rows.append({"kernel": f"Q{k.n}", "sigma": i, "lambda": j, "s": m, "coefficient": str(v),
                         "denominator": f"(sigma-lambda)^{k.qpow} (sigma-s)^{k.ppow}"})
    else:
        table = gen_coeffs(max(8, args.N))
        for name in ("phi", "psi"):
            for s in range(args.N + 1):
                poly = getattr(table, name)[s]
                for power, c in enumerate(poly.coeffs):
                    if c != 0:
                        rows.append({"poly": f"{name}{s}", "power": power, "coefficient": str(c)})
    _emit(args, _render_rows(rows, args.format))
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--digits", type=int, default=40, help="working decimal digits (>= 30)")
    common.add_argument("--format", choices=("csv", "json", "text"), default="text")
    common.add_argument("--out", help="write to this file instead of stdout")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for table cells")
    common.add_argument("--print-digits", type=int, default=20, help="significant digits in the output")

    parser = argparse.ArgumentParser(prog="pcfbounds", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", parents=[common], help="evaluate an expansion, its bound and the oracle")
    ev.add_argument("--method", choices=METHODS, required=True)
    ev.add_argument("--a")
    ev.add_argument("--z", help="complex (3+4j) or polar r@theta, theta in units of pi")
    ev.add_argument("--t")
    ev.add_argument("--n", type=int)
    ev.add_argument("--mode", choices=("piecewise", "hyp2f1"), default="piecewise")
    ev.add_argument("--strict", action="store_true", help="only the three basic regions")
    ev.add_argument("--function", choices=("U", "V", "Uprime", "Vprime"), default="U")
    ev.add_argument("--sigma-n", default="1")
    ev.add_argument("--sigma0")
    ev.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=True,
                    help="compute the exact remainder and the ratio (default on)")
    ev.set_defaults(func=cmd_eval)

    tb = sub.add_parser("table", parents=[common], help="reproduce a ratio table")
    tb.add_argument("which", type=int, choices=(1, 2, 3, 4, 5))
    tb.add_argument("--check", action="store_true", help="exit 1 when a cell misses its tolerance")
    tb.set_defaults(func=cmd_table)

    rg = sub.add_parser("regions", parents=[common], help="region boundaries and classifications")
    rg.add_argument("--a", default="1")
    rg.add_argument("--points", type=int, default=64)
    rg.add_argument("--grid", help="x0:x1:nx,y0:y1:ny sample grid to classify")
    rg.add_argument("--point", action="append", help="extra z to classify (repeatable)")
    rg.set_defaults(func=cmd_regions)

    fg = sub.add_parser("figdata", parents=[common], help="curve data: 2 coefficient polynomials, 3 variations, 4 f_n profiles")
    fg.add_argument("which", type=int, choices=(2, 3, 4))
    fg.add_argument("--points", type=int)
    fg.add_argument("--z", default="10", help="z for the f_n profiles")
    fg.add_argument("--lambdas", help="comma-separated lambda values for the f_n profiles")
    fg.set_defaults(func=cmd_figdata)

    cf = sub.add_parser("coeffs", parents=[common], help="exact coefficient polynomials")
    cf.add_argument("--N", type=int, default=3)
    cf.add_argument("--kernel", type=int, help="print the Cauchy kernel Q_n instead")
    cf.set_defaults(func=cmd_coeffs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ctx = PrecisionContext(digits=args.digits)
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        with ctx.workdps(5):
            return args.func(args, ctx)
    except (UsageError, PhaseError, RegionError, PoleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except (ArithmeticError, ZeroDivisionError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
