"""Command-line interface: ``mirrorfield {profile,pair,verify,probe}``.

Exit codes: 0 ok, 1 invariant failure, 2 validation error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, casimir, geometry, propagators, states, verify
from .errors import ConvergenceError, MirrorfieldError, ValidationError
from .geometry import Region, RegionKind
from .parallel import ordered_map
from .testfields import TestFunction

EXIT_OK, EXIT_INVARIANT, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise ValidationError(f"expected {n} comma-separated numbers, got {text!r}")
    if not all(math.isfinite(v) for v in vals):
        raise ValidationError(f"numbers must be finite: {text!r}")
    return vals


def _region(args, allow_minkowski: bool = True) -> Region:
    name = args.region
    if name == "minkowski" and not allow_minkowski:
        raise ValidationError("this command needs a region with boundary (halfspace or slab)")
    if name == "slab":
        if args.d is None:
            raise ValidationError("--d is required for the slab")
    elif args.d is not None:
        raise ValidationError("--d only applies to the slab")
    return Region.parse(name, args.d)


def _header(command: str, config: dict) -> list[str]:
    lines = [f"# mirrorfield {__version__}", f"# command={command}"]
    for k in sorted(config):
        lines.append(f"# {k}={config[k]}")
    return lines


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


# ---------------------------------------------------------------- profile


def cmd_profile(args) -> int:
    region = _region(args, allow_minkowski=False)
    zs = _floats(args.z)
    req = casimir.ProfileRequest(region, tuple(zs), args.xi, args.h)

    def row(z):
        ps = casimir.t00_point_split(region, z, h=req.h)
        out = {"z": z, "phi2": casimir.phi2_renormalized(region, z),
               "phi2_closed": casimir.phi2_closed_form(region, z),
               "t00": casimir.t00_renormalized(region, z, req.xi, h=req.h),
               "t00_closed": casimir.t00_closed_form(region, z, req.xi), "split_residual": ps.residual,
               "oracle_t00": None, "oracle_residual": None}
        if region.kind is RegionKind.SLAB:
            m = casimir.mode_sum_oracle(z, region.d, req.xi)
            out["oracle_t00"], out["oracle_residual"] = m.value, m.residual
        return out

    rows = ordered_map(row, list(req.z))
    config = {"region": region.describe(), "xi": repr(req.xi), "z": ",".join(repr(z) for z in req.z),
              "h": "auto(wall distance/40)" if req.h is None else repr(req.h),
              "richardson_levels": 3, "phi2_tol": casimir.PHI2_TOL, "t00_tol": casimir.T00_TOL}
    cols = ["z", "phi2", "phi2_closed", "t00", "t00_closed", "oracle_t00", "split_residual", "oracle_residual"]
    lines = _header("profile", config) + [",".join(cols)]
    lines += [",".join(_fmt(r[c]) for c in cols) for r in rows]
    _emit("\n".join(lines) + "\n", args.out)
    if args.plot:
        from .plotting import profile_figure

        profile_figure(rows, region.describe(), req.xi, Path(args.plot))
    return EXIT_OK


# ---------------------------------------------------------------- pair


def _load_tf(path: str) -> TestFunction:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read test function file {path}: {exc}") from None
    return TestFunction.from_json(text)


def cmd_pair(args) -> int:
    region = _region(args)
    f, g = _load_tf(args.f), _load_tf(args.g)
    state = states.TwoPointPairing(region)
    state.check_domain(f)
    state.check_domain(g)
    vac = states.TwoPointPairing(Region.minkowski()).gram([f, g])
    E = propagators.pair_E(f, g, "position")
    if region.has_boundary:
        Eb = propagators.pair_E_boundary(region, f, g, "position")
        M = state.gram([f, g])
        invisible = bool(geometry.reflected_causally_disjoint(region, f.box, g.box, include_direct=False)
                         and geometry.reflected_causally_disjoint(region, g.box, f.box, include_direct=False))
    else:
        Eb, M, invisible = E, vac, True
    ccr = abs(M[0, 1] - M[1, 0] - 1j * Eb)
    norm = state.normalization
    rec = {
        "version": __version__,
        "region": region.describe(),
        "pair_E": E,
        "pair_E_boundary": Eb,
        "two_point": [vac[0, 1].real, vac[0, 1].imag],
        "image_two_point": [M[0, 1].real, M[0, 1].imag],
        "ccr_residual": ccr,
        "image_normalization": norm,
        "boundary_invisible": invisible,
        "boundary_bulk_difference": abs(Eb - norm * E),
    }
    _emit(json.dumps(rec, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    names = [s.strip() for s in args.suite.split(",") if s.strip()] if args.suite else None
    if args.seed < 0:
        raise ValidationError("--seed must be non-negative")
    checks = verify.run_suites(args.seed, names, slab_d=args.d)
    report = verify.report_json(checks, args.seed, names, slab_d=args.d)
    if args.out:
        Path(args.out).write_text(report)
    else:
        sys.stdout.write(report)
    print(verify.summary(checks), file=sys.stderr)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_INVARIANT


# ---------------------------------------------------------------- probe


def cmd_probe(args) -> int:
    region = _region(args)
    x = _floats(args.x, 4)
    target = _floats(args.target, 4)
    direction = np.asarray(_floats(args.direction, 4))
    lo, hi, n = _floats(args.deltas, 3)
    if int(n) != n:
        raise ValidationError("the third --deltas entry is a count")
    deltas = np.logspace(math.log10(lo), math.log10(hi), int(n)) if lo > 0 and hi > 0 else None
    if deltas is None:
        raise ValidationError("--deltas bounds must be positive")
    xp0 = np.asarray(target)
    res = states.singularity_probe(region, x, lambda dl: tuple(xp0 - dl * direction), deltas)
    config = {"region": region.describe(), "x": args.x, "target": args.target, "direction": args.direction,
              "deltas": args.deltas}
    lines = _header("probe", config) + ["delta,W,abs_W"]
    lines += [f"{float(d)!r},{float(v)!r},{abs(float(v))!r}" for d, v in zip(res.deltas, res.values)]
    lines.append(f"# fitted_exponent,{res.exponent!r}")
    lines.append(f"# fit_residual,{res.residual!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mirrorfield", description="Scalar field with Dirichlet walls by images.")
    p.add_argument("--version", action="version", version=f"mirrorfield {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def region_args(q, choices):
        q.add_argument("--region", choices=choices, required=True)
        q.add_argument("--d", type=float, default=None, help="slab width")

    q = sub.add_parser("profile", help="renormalized <phi^2> and <T00> profile as CSV")
    region_args(q, ["halfspace", "slab"])
    q.add_argument("--xi", type=float, default=casimir.CONFORMAL_XI)
    q.add_argument("--z", required=True, help="comma-separated interior z values")
    q.add_argument("--h", type=float, default=None, help="point-split step (default: wall distance / 40)")
    q.add_argument("--out", default=None)
    q.add_argument("--plot", default=None, metavar="PNG", help="also render the profile to this image file")
    q.set_defaults(func=cmd_profile)

    q = sub.add_parser("pair", help="pairings of two test functions as JSON")
    region_args(q, ["minkowski", "halfspace", "slab"])
    q.add_argument("--f", required=True, help="test function JSON file")
    q.add_argument("--g", required=True, help="test function JSON file")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_pair)

    q = sub.add_parser("verify", help="run the invariant suites")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--suite", default=None, help=f"comma-separated subset of {','.join(verify.SUITES)}")
    q.add_argument("--d", type=float, default=verify.DEFAULT_SLAB_D, help="slab width for the state suites")
    q.add_argument("--out", default=None, help="JSON report path (default stdout)")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("probe", help="growth exponent of W near a reflected light cone")
    region_args(q, ["minkowski", "halfspace", "slab"])
    q.add_argument("--x", required=True, help="base point t,x,y,z")
    q.add_argument("--target", required=True, help="x' at delta = 0")
    q.add_argument("--direction", default="1,0,0,0", help="x'(delta) = target - delta * direction")
    q.add_argument("--deltas", default="1e-3,1e-2,11", help="lo,hi,count (log spaced)")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_probe)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"mirrorfield: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, ValueError) as exc:
        print(f"mirrorfield: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except MirrorfieldError as exc:
        print(f"mirrorfield: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
