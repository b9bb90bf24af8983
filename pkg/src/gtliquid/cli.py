"""Command-line front end.

Exit codes: 0 ok, 1 domain failure (invalid density, inadmissible query,
no liquid region, ...), 2 usage or I/O error.  Machine-readable output goes
to stdout or --out; progress goes to stderr only.  Files are written once,
through a temporary file in the target directory and an atomic rename.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import boundary, finite, liquid
from .density import BUILTIN_NAMES, DensitySpec, MalformedSpec, UnknownName, builtin, support_atlas, validate
from .transforms import HalfPlanePoint

__all__ = ["main"]


class UsageError(Exception):
    pass


class DomainError(Exception):
    pass


# ---------------------------------------------------------------------------
# plumbing


def _progress(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr, flush=True)


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(args.out)
    d = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=d)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False)


def _load_spec(args) -> DensitySpec:
    if getattr(args, "builtin", None):
        try:
            return builtin(args.builtin)
        except UnknownName:
            raise UsageError(f"unknown builtin {args.builtin!r}; choose from {', '.join(BUILTIN_NAMES)}") from None
    if not getattr(args, "spec", None):
        raise UsageError("need --spec PATH or --builtin NAME")
    try:
        text = Path(args.spec).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.spec}: {exc}") from None
    try:
        return DensitySpec.from_json(text, name=Path(args.spec).stem)
    except MalformedSpec as exc:
        raise UsageError(str(exc)) from None


def _valid_spec(args) -> DensitySpec:
    spec = _load_spec(args)
    rep = validate(spec)
    if not rep.valid:
        raise DomainError("invalid density: " + "; ".join(f"{v.invariant} at {v.location}: {v.detail}" for v in rep))
    return spec


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    spec = _load_spec(args)
    rep = validate(spec)
    out = {
        "valid": rep.valid,
        "mass": spec.mass,
        "hull": list(spec.hull),
        "violations": [{"invariant": v.invariant, "location": v.location, "detail": v.detail} for v in rep],
    }
    _emit(args, _json(out))
    return 0 if rep.valid else 1


def cmd_map(args) -> int:
    spec = _valid_spec(args)
    if args.nu < 1 or args.nv < 1:
        raise UsageError("grid must have at least one point in each direction")
    if args.v_range[0] <= 0 or args.v_range[1] <= 0:
        raise UsageError("v-range must be positive")
    us = np.linspace(args.u_range[0], args.u_range[1], args.nu) if args.nu > 1 else np.array([args.u_range[0]])
    vs = np.linspace(args.v_range[0], args.v_range[1], args.nv) if args.nv > 1 else np.array([args.v_range[0]])
    U, V = np.meshgrid(us, vs, indexing="ij")
    d = liquid.inverse_map_arrays(spec, U.ravel(), V.ravel())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "v", "chi", "eta", "re_omega", "im_omega", "rho", "residual"])
    for k, (u, v) in enumerate(zip(U.ravel(), V.ravel())):
        om = d["omega"][k]
        w.writerow([_fmt(u), _fmt(v), _fmt(d["chi"][k]), _fmt(d["eta"][k]), _fmt(om.real), _fmt(om.imag), _fmt(d["rho"][k]), _fmt(d["residual"][k])])
    _emit(args, buf.getvalue())
    return 0


def _svg(spec: DensitySpec, atlas: boundary.BoundaryAtlas) -> str:
    a, b = spec.hull
    W, H, pad = 800.0, 400.0, 30.0
    lo, hi = a - 0.05 * (b - a), b + 0.05 * (b - a)

    def px(chi, eta):
        return (pad + (chi - lo) / (hi - lo) * (W - 2 * pad), H - pad - eta * (H - 2 * pad))

    def path(pts):
        q = [px(c, e) for c, e in pts if math.isfinite(c) and math.isfinite(e)]
        return " ".join(f"{x:.2f},{y:.2f}" for x, y in q)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0f}" height="{H:.0f}" viewBox="0 0 {W:.0f} {H:.0f}">']
    out.append('<rect width="100%" height="100%" fill="white"/>')
    trap = [(a, 1.0), (b, 1.0), (b, 0.0), (a + 1.0, 0.0), (a, 1.0)]
    out.append(f'<polyline points="{path(trap)}" fill="none" stroke="#999" stroke-dasharray="4,3" stroke-width="1"/>')
    for pl in atlas.edge:
        if len(pl.points) > 1:
            out.append(f'<polyline points="{path(pl.points)}" fill="none" stroke="blue" stroke-width="1.5"/>')
    for x0, x1 in atlas.generic_top:
        out.append(f'<polyline points="{path([(x0, 1.0), (x1, 1.0)])}" fill="none" stroke="black" stroke-width="2"/>')
    for seg in atlas.singular:
        pts = [(seg.x, 1.0)] + list(seg.points) + [seg.endpoint_nt]
        out.append(f'<polyline points="{path(pts)}" fill="none" stroke="red" stroke-width="1.5"/>')
        x, y = px(*seg.endpoint_nt)
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="red"/>')
    ix, iy = px(*atlas.infinity)
    out.append(f'<circle cx="{ix:.2f}" cy="{iy:.2f}" r="3" fill="blue"/>')
    out.append("</svg>")
    return "\n".join(out)


def cmd_boundary(args) -> int:
    spec = _valid_spec(args)
    t0 = time.time()
    atlas = boundary.assemble(spec, n_edge=args.n_edge)
    _progress(args, f"boundary assembled in {time.time() - t0:.1f}s")
    if args.format == "svg":
        _emit(args, _svg(spec, atlas))
    elif args.format == "json":
        _emit(args, atlas.to_json())
    else:
        raise UsageError("boundary supports --format json or svg")
    return 0


def _class_dict(spec, atlas, x: float, delta) -> dict:
    try:
        cls = boundary.classify(spec, atlas, x, delta=delta)
    except boundary.OutsideDomain as exc:
        return {"x": x, "kind": "OutsideDomain", "detail": str(exc)}
    d = {"x": x}
    d.update(cls.to_dict())
    if cls.singular:
        seg = boundary.singular_segment(spec, x, cls, [0.0])
        d["endpoint"] = list(seg.endpoint_nt)
    return d


def cmd_classify(args) -> int:
    spec = _valid_spec(args)
    if not args.x:
        raise UsageError("give at least one x")
    atlas = support_atlas(spec)
    _emit(args, _json([_class_dict(spec, atlas, float(x), args.delta) for x in args.x]))
    return 0


def cmd_sample(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be positive")
    if args.toprow:
        top = finite.TopRow(_ints(args.toprow))
        if args.n is not None and args.n != top.n:
            raise UsageError(f"--n {args.n} does not match the top row length {top.n}")
    else:
        if args.n is None or args.n < 1:
            raise UsageError("need --toprow or a density with --n")
        spec = _valid_spec(args)
        top = finite.toprow_from_density(spec, args.n)
        if top.repaired:
            _progress(args, f"rounding repaired {top.repaired} coordinates of the top row")
    t0 = time.time()
    samples = finite.gt_sample_batch(top, args.seed, args.count)
    _progress(args, f"{args.count} samples at n={top.n} in {time.time() - t0:.1f}s")
    buf = io.StringIO()
    finite.write_samples_csv(samples, buf)
    _emit(args, buf.getvalue())
    return 0


def cmd_compare(args) -> int:
    spec = _valid_spec(args)
    try:
        samples = finite.read_samples_csv(args.samples)
    except OSError as exc:
        raise UsageError(f"cannot read {args.samples}: {exc}") from None
    except finite.MixedDepth as exc:
        raise DomainError(str(exc)) from None
    if not samples:
        raise DomainError("no samples")
    n = samples[0].n
    if args.n is not None and args.n != n:
        raise DomainError(f"samples have depth {n}, not {args.n}")
    a, b = spec.hull
    chi_edges = np.linspace(a, b, args.chi_bins + 1)
    eta_edges = np.linspace(0.0, 1.0, args.eta_bins + 1)
    cmp = finite.compare_density(spec, samples, n, chi_edges, eta_edges)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["chi_lo", "chi_hi", "eta_lo", "eta_hi", "empirical", "predicted", "interior"])
        for row in cmp.rows():
            w.writerow([_fmt(v) if isinstance(v, float) else int(v) for v in row])
        _emit(args, buf.getvalue())
    else:
        out = {
            "n": n,
            "samples": len(samples),
            "sup_error": cmp.sup_error,
            "interior_bins": int(cmp.interior.sum()),
            "bins": [
                {"chi": [r[0], r[1]], "eta": [r[2], r[3]], "empirical": None if math.isnan(r[4]) else r[4], "predicted": None if math.isnan(r[5]) else r[5], "interior": r[6]}
                for r in cmp.rows()
            ],
        }
        _emit(args, _json(out))
    _progress(args, f"sup error over {int(cmp.interior.sum())} interior bins: {cmp.sup_error:.4f}")
    return 0


def cmd_kernel(args) -> int:
    top = finite.TopRow(_ints(args.toprow))
    out = []
    for q in args.query:
        vals = _ints(q)
        if len(vals) != 4:
            raise UsageError(f"query {q!r} must be u,r,v,s")
        u, r, v, s = vals
        try:
            k = finite.kernel(top, (u, r), (v, s))
        except finite.InadmissibleQuery as exc:
            raise DomainError(f"query {q}: {exc}") from None
        out.append({"query": [u, r, v, s], "value": f"{k.numerator}/{k.denominator}", "float": float(k)})
    _emit(args, _json(out))
    return 0


def cmd_burgers(args) -> int:
    spec = _valid_spec(args)
    out = []
    for p in args.point:
        try:
            u, v = (float(t) for t in p.split(","))
            hp = HalfPlanePoint(u, v)
        except ValueError:
            raise UsageError(f"point {p!r} must be u,v with v > 0") from None
        res = []
        for h in args.h:
            try:
                res.append(liquid.burgers_residual(spec, hp, h))
            except (liquid.NotInLiquidRegion, liquid.NoConvergence) as exc:
                raise DomainError(f"point {p}, h={h}: {exc}") from None
        rates = [math.log2(r0 / r1) if r0 > 0 and r1 > 0 else None for r0, r1 in zip(res, res[1:])]
        out.append({"point": [u, v], "h": list(args.h), "residual": res, "order": rates})
    _emit(args, _json(out))
    return 0


# ---------------------------------------------------------------------------
# parser


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="density JSON file")
    common.add_argument("--builtin", help=f"registered density ({', '.join(BUILTIN_NAMES)})")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv", "svg"), default=None)
    common.add_argument("--tol", type=float, default=1e-12)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs single-threaded")
    common.add_argument("--quiet", action="store_true", help="suppress progress on stderr")

    p = argparse.ArgumentParser(prog="gtliquid", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="check density admissibility")

    m = sub.add_parser("map", parents=[common], help="chart values on a (u, v) grid as CSV")
    m.add_argument("--u-range", type=float, nargs=2, required=True)
    m.add_argument("--v-range", type=float, nargs=2, required=True)
    m.add_argument("--nu", type=int, default=20)
    m.add_argument("--nv", type=int, default=20)

    bnd = sub.add_parser("boundary", parents=[common], help="boundary atlas as JSON or SVG")
    bnd.add_argument("--n-edge", type=int, default=64)

    c = sub.add_parser("classify", parents=[common], help="classify top-line points")
    c.add_argument("x", type=float, nargs="*")
    c.add_argument("--delta", type=float, default=None)

    s = sub.add_parser("sample", parents=[common], help="uniform patterns as CSV (sample_id, r, i, y)")
    s.add_argument("--toprow", help="comma-separated strictly decreasing integers")
    s.add_argument("--n", type=int)
    s.add_argument("--count", type=int, default=1)

    cp = sub.add_parser("compare", parents=[common], help="empirical vs predicted density")
    cp.add_argument("--samples", required=True)
    cp.add_argument("--n", type=int)
    cp.add_argument("--chi-bins", type=int, default=10)
    cp.add_argument("--eta-bins", type=int, default=10)

    k = sub.add_parser("kernel", parents=[common], help="exact correlation kernel values")
    k.add_argument("--toprow", required=True)
    k.add_argument("--query", action="append", required=True, help="u,r,v,s (repeatable)")

    bg = sub.add_parser("burgers", parents=[common], help="Burgers residual by central differences")
    bg.add_argument("--point", action="append", required=True, help="u,v (repeatable)")
    bg.add_argument("--h", type=float, nargs="+", default=[1e-2, 5e-3, 2.5e-3])
    return p


_COMMANDS = {
    "validate": cmd_validate,
    "map": cmd_map,
    "boundary": cmd_boundary,
    "classify": cmd_classify,
    "sample": cmd_sample,
    "compare": cmd_compare,
    "kernel": cmd_kernel,
    "burgers": cmd_burgers,
}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.format is None:
        args.format = {"map": "csv", "sample": "csv"}.get(args.command, "json")
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
