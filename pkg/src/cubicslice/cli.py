"""Command-line front end.

Every run writes its outputs and a canonical ``run_config.json`` under
``--out``. ``cubicslice --config run_config.json`` replays a run.

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from PIL import Image


from . import plotting
from .attracting import NoMatch, radius_attracting, zcurve
from .family import CubicSlicePoint
from .grid import C_PLANE, V_PLANE, GridSpec
from .parabolic import NoConvergence, ZeroLeading, cq_poly, cq_roots, parabolic_measure
from .potential import MaskTooLarge, convergence_table, grid_mass
from .render import CLASSIFY, MODES, heightfield, render_slice, vslice, write_sidecar
from .rotation import PrecisionExhausted, RotationNumber, parse_theta
from .series import DegenerateSequence, SmallDivisorZero, hadamard_radius, linearize

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = (
    NoConvergence,
    NoMatch,
    ZeroLeading,
    SmallDivisorZero,
    DegenerateSequence,
    MaskTooLarge,
    PrecisionExhausted,
)
COMMON = ("command", "out", "threads", "seed", "config")
CONFIG_NAME = "run_config.json"


class UsageError(Exception):
    pass


def parse_complex(text: str) -> complex:
    """Parse "a+bi", "a", "bi" or "a-bi" (no spaces)."""
    if not isinstance(text, str) or " " in text or not text:
        raise argparse.ArgumentTypeError(f"invalid complex value {text!r} (expected a+bi)")
    try:
        if text.endswith("i"):
            return complex(text[:-1] + "j")
        return complex(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid complex value {text!r} (expected a+bi)") from None


def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    out: str = "out"
    threads: int = 1
    seed: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        d = json.loads(text)
        return cls(command=d["command"], params=dict(d.get("params", {})), out=d.get("out", "out"),
                   threads=int(d.get("threads", 1)), seed=int(d.get("seed", 0)))

    def to_argv(self) -> list[str]:
        argv = [self.command]
        for key in sorted(self.params):
            value = self.params[key]
            flag = "--" + key.replace("_", "-")
            if isinstance(value, bool):
                if value:
                    argv.append(flag)
            elif value is not None:
                # the "=" form keeps values such as -1.0+0.5i from reading as flags
                argv.append(f"{flag}={value}")
        argv += [f"--out={self.out}", f"--threads={self.threads}", f"--seed={self.seed}"]
        return argv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _theta_or_lambda(args) -> tuple[complex, RotationNumber | None]:
    if args.theta is not None and args.lam is not None:
        raise UsageError("argument --theta: not allowed together with --lambda")
    if args.theta is not None:
        try:
            theta = parse_theta(args.theta)
        except ValueError as exc:
            raise UsageError(f"argument --theta: {exc}") from None
        return complex(math.cos(2 * math.pi * theta.value), math.sin(2 * math.pi * theta.value)), theta
    if args.lam is None:
        raise UsageError("argument --lambda: required (or give --theta)")
    return args.lam, None


def _grid(args, coordinate=C_PLANE) -> GridSpec:
    try:
        return GridSpec(args.center, args.half_width, args.res, coordinate)
    except ValueError as exc:
        flag = "--res" if "resolution" in str(exc) else "--half-width"
        raise UsageError(f"argument {flag}: {exc}") from None


# ---------------------------------------------------------------- commands


def cmd_series(args, out: Path):
    lam, _ = _theta_or_lambda(args)
    if args.quadratic:
        a2, a3 = -lam / 2, 0
    else:
        if args.c is None:
            raise UsageError("argument --c: required unless --quadratic is given")
        _, a2, a3 = CubicSlicePoint(lam, args.c).coefficients()
    seq = linearize(a2, a3, lam, args.N)
    est = hadamard_radius(seq, args.window)
    la = seq.log_abs()
    b = seq.coeffs
    with open(out / "series.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "re", "im", "log_abs"])
        for n in range(seq.N):
            w.writerow([n + 1, repr(float(b[n].real)), repr(float(b[n].imag)), repr(float(la[n]))])
    _write_json(out / "radius.json", {
        "r_hat": est.r_hat, "r_tail": est.r_tail, "r_fit": est.r_fit,
        "uncertainty": est.uncertainty, "N": seq.N, "log_scale": seq.log_scale,
    })
    plotting.series_figure(seq, out / "series.png")


def cmd_radius(args, out: Path):
    lam, theta = _theta_or_lambda(args)
    if args.c is None:
        raise UsageError("argument --c: required")
    p = CubicSlicePoint(lam, args.c)
    if theta is not None or abs(abs(lam) - 1) < 1e-12:
        _, a2, a3 = p.coefficients()
        est = hadamard_radius(linearize(a2, a3, lam, args.N), args.window)
        doc = {"r": est.r_hat, "uncertainty": est.uncertainty, "method": "series", "main": None}
    else:
        res = radius_attracting(p, method=args.method, N=args.N, window=args.window)
        doc = {
            "r": res.r,
            "uncertainty": res.uncertainty,
            "method": args.method,
            "main": res.main.value,
            "phi_at_1": _pair(res.phi_at_1),
            "phi_at_c": _pair(res.phi_at_c),
        }
    doc.update({"lambda": _pair(lam), "c": _pair(p.c)})
    _write_json(out / "radius.json", doc)


def cmd_slice(args, out: Path):
    g = _grid(args)
    img = render_slice(args.lam, g, mode=args.mode, max_iter=args.max_iter, ss=args.ss, threads=args.threads)
    img.save_png(out / "slice.png")
    write_sidecar(out / "slice.slcf", g, img.raw.values)


def cmd_vslice(args, out: Path):
    g = _grid(args, V_PLANE)
    img = vslice(args.lam, g, max_iter=args.max_iter, ss=args.ss, threads=args.threads)
    img.save_png(out / "vslice.png")
    write_sidecar(out / "vslice.slcf", g, img.raw.values)


def cmd_heightfield(args, out: Path):
    g = _grid(args)
    f, raster = heightfield(args.lam, g, threads=args.threads)
    Image.fromarray(raster, mode="RGBA").save(out / "heightfield.png")
    write_sidecar(out / "heightfield.slcf", g, f.values)
    summary = {"masked_fraction": float(1 - f.mask.mean())}
    try:
        ml, ma = grid_mass(f.map(lambda v: -v))
        summary.update({"mass_laplacian": ml, "mass_asymptotic": ma})
    except (MaskTooLarge, ValueError) as exc:
        summary["mass_error"] = str(exc)
    _write_json(out / "heightfield.json", summary)


def cmd_zcurve(args, out: Path):
    pts = zcurve(args.lam, n_rays=args.rays)
    with open(out / "zcurve.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ray_index", "re_c", "im_c", "re_psi", "im_psi", "flags"])
        for p in pts:
            w.writerow([p.ray_index, repr(p.c.real), repr(p.c.imag), repr(p.psi.real), repr(p.psi.imag), p.flags])
    plotting.zcurve_figure(pts, out / "zcurve.png")


def cmd_parabolic(args, out: Path):
    if args.q < 1:
        raise UsageError("argument --q: must be at least 1")
    if math.gcd(args.p, args.q) != 1:
        raise UsageError(f"argument --p: {args.p}/{args.q} is not in lowest terms")
    poly = cq_poly(args.p, args.q)
    roots = cq_roots(poly, seed=args.seed)
    mu = parabolic_measure(args.p, args.q, seed=args.seed)
    _write_json(out / "parabolic.json", {
        "p": args.p,
        "q": args.q,
        "coeffs": [_pair(c) for c in poly.coeffs],
        "roots_u": [_pair(u) for u in roots],
        "atoms_c": [_pair(c) for c in mu.points],
        "weight": 2 * math.pi / args.q,
    })
    plotting.atoms_figure(mu, out / "parabolic.png", title=f"{args.p}/{args.q}")


def cmd_converge(args, out: Path):
    try:
        theta = parse_theta(args.theta, depth=max(args.depth, 1))
    except ValueError as exc:
        raise UsageError(f"argument --theta: {exc}") from None
    g = GridSpec(0, args.half_width, args.res)
    report = convergence_table(theta, args.depth, g, N=args.N, seed=args.seed, threads=args.threads)
    with open(out / "converge.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "q", "sup_gap", "weak_star_gap", "u_n_at_zero", "seconds"])
        for r in report.rows:
            w.writerow([r.p, r.q, repr(r.sup_gap), repr(r.weak_star_gap), repr(r.u_n_at_zero), f"{r.seconds:.3f}"])
    _write_json(out / "converge.json", {"radius_uncertainty": report.uncertainty})
    plotting.convergence_figure(report, out / "converge.png")


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker threads (SLICE_THREADS overrides)")
    common.add_argument("--seed", type=int, default=0, help="seed for jittered root initial guesses")

    parser = _Parser(prog="cubicslice", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="replay the run described by a run_config.json")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def lam_args(p, theta=False):
        p.add_argument("--lambda", dest="lam", type=parse_complex, required=not theta, help="multiplier a+bi")
        if theta:
            p.add_argument("--theta", help="rotation number: golden, cf:a1,a2,... or a decimal")

    def grid_args(p, res=512, half_width=8.0):
        p.add_argument("--center", type=parse_complex, default=0j)
        p.add_argument("--half-width", type=float, default=half_width)
        p.add_argument("--res", type=int, default=res)

    p = sub.add_parser("series", parents=[common], help="linearizing coefficients and radius")
    lam_args(p, theta=True)
    p.add_argument("--c", type=parse_complex)
    p.add_argument("--quadratic", action="store_true", help="use Q(z) = lam z (1 - z/2)")
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--window", type=float, default=0.5)

    p = sub.add_parser("radius", parents=[common], help="conformal radius r(P) at one parameter")
    lam_args(p, theta=True)
    p.add_argument("--c", type=parse_complex)
    p.add_argument("--method", choices=("series", "dynamic"), default="series")
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--window", type=float, default=0.5)

    p = sub.add_parser("slice", parents=[common], help="bifurcation loci in the c-plane")
    lam_args(p)
    grid_args(p)
    p.add_argument("--mode", choices=MODES, default=CLASSIFY)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--ss", type=int, default=1, help="supersampling factor per side")

    p = sub.add_parser("vslice", parents=[common], help="bifurcation locus in the v-plane")
    lam_args(p)
    grid_args(p, half_width=4.0)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--ss", type=int, default=1)

    p = sub.add_parser("heightfield", parents=[common], help="log r - log|c| on a grid")
    lam_args(p)
    grid_args(p, res=256, half_width=4.0)

    p = sub.add_parser("zcurve", parents=[common], help="curve where both critical points bound U")
    lam_args(p)
    p.add_argument("--rays", type=int, default=256)

    p = sub.add_parser("parabolic", parents=[common], help="parabolic polynomial, roots and atoms")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)

    p = sub.add_parser("converge", parents=[common], help="convergence of parabolic potentials")
    p.add_argument("--theta", default="golden")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--res", type=int, default=21)
    p.add_argument("--half-width", type=float, default=3.0)
    p.add_argument("--N", type=int, default=16384)
    return parser


COMMANDS = {
    "series": cmd_series,
    "radius": cmd_radius,
    "slice": cmd_slice,
    "vslice": cmd_vslice,
    "heightfield": cmd_heightfield,
    "zcurve": cmd_zcurve,
    "parabolic": cmd_parabolic,
    "converge": cmd_converge,
}


def _config_from_args(args) -> RunConfig:
    params = {}
    for key, value in vars(args).items():
        if key in COMMON:
            continue
        params["lambda" if key == "lam" else key] = format_complex(value) if isinstance(value, complex) else value
    return RunConfig(command=args.command, params=params, out=args.out, threads=args.threads, seed=args.seed)


def _usage(message: str) -> int:
    print(f"cubicslice: error: {message}", file=sys.stderr)
    return EXIT_USAGE


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            cfg = RunConfig.from_json(Path(args.config).read_text())
            args = parser.parse_args(cfg.to_argv())
        if not args.command:
            raise UsageError("a subcommand is required")
    except UsageError as exc:
        return _usage(str(exc))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        return _usage(f"argument --config: {exc}")

    env = os.environ.get("SLICE_THREADS")
    if env:
        try:
            args.threads = int(env)
        except ValueError:
            return _usage(f"SLICE_THREADS: not an integer: {env!r}")
    if args.threads < 1:
        return _usage("argument --threads: must be at least 1")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _config_from_args(args)
    (out / CONFIG_NAME).write_text(cfg.to_json())
    try:
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        return _usage(str(exc))
    except NUMERICAL_ERRORS as exc:
        print(f"cubicslice: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        return _usage(str(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
