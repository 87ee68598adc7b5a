"""Command-line interface.

Every subcommand writes a single JSON document to standard output and
diagnostics to standard error.  Exit codes: 0 success or certified,
1 usage or I/O error, 2 refuted or negative verdict, 3 inconclusive
(sampled pass only, or an iteration that did not converge).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .classify import certify_gamma_contraction
from .dilation import (
    TruncatedDilation,
    build_model_dilation,
    build_schaffer_dilation,
    minimality_check,
    verify_dilation,
    verify_model_intertwining,
)
from .errors import (
    GammaKitError,
    NoConvergence,
    NotAContraction,
    NotCommuting,
    NotPositiveOnCircle,
    ResidualTooLarge,
    ShapeError,
)
from .fundamental import (
    certify_theorem_4_4,
    solve_fundamental_via_fejer_riesz,
)
from .geometry import GammaPoint, Verdict, membership
from .instances import KINDS, GenSpec, generate
from .io import InstanceFormatError, dump_json, instance_to_pair, load_json, matrix_to_json, pair_to_instance
from .kernels import KernelSpec, eval_kernel, finite_section, gram, ratio_gram
from .numerics import ToleranceConfig, opnorm

EXIT_OK, EXIT_USAGE, EXIT_NEGATIVE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _complex_pair(value):
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return complex(value)
    raise InstanceFormatError(f"expected [re, im], got {value!r}")


def _point(doc):
    if not isinstance(doc, (list, tuple)) or len(doc) != 2:
        raise InstanceFormatError(f"expected a point [z1, z2], got {doc!r}")
    return (_complex_pair(doc[0]), _complex_pair(doc[1]))


def _cpx(z):
    return [float(z.real), float(z.imag)]


def _config(args):
    kw = {}
    if args.tol is not None:
        kw["eq_tol"] = args.tol
        kw["psd_tol"] = args.tol
    if args.theta_grid is not None:
        kw["grid_theta"] = args.theta_grid
    if args.radius_grid is not None:
        kw["grid_radius"] = args.radius_grid
    try:
        return ToleranceConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load_pair(path, cfg):
    doc = load_json(path)
    return instance_to_pair(doc, cfg)


def cmd_check_point(args, cfg, out):
    pt = GammaPoint(complex(args.s_re, args.s_im), complex(args.p_re, args.p_im))
    rep = membership(pt, cfg)
    dump_json(rep.to_dict(), out)
    return EXIT_NEGATIVE if rep.verdict is Verdict.OUTSIDE else EXIT_OK


def cmd_classify(args, cfg, out):
    pair, _ = _load_pair(args.instance, cfg)
    rep = certify_gamma_contraction(pair, cfg)
    dump_json(rep.to_dict(), out)
    kind = rep.is_gamma_contraction.kind
    return {"Certified": EXIT_OK, "Refuted": EXIT_NEGATIVE}.get(kind, EXIT_INCONCLUSIVE)


def cmd_solve_fundamental(args, cfg, out):
    pair, _ = _load_pair(args.instance, cfg)
    doc = {"route": args.route}
    code = EXIT_OK
    pinv_sol = fr_sol = None
    if args.route in ("pinv", "both"):
        try:
            cert = certify_theorem_4_4(pair, cfg)
        except NotAContraction as exc:
            dump_json({"route": args.route, "status": "Not", "reason": str(exc)}, out)
            return EXIT_NEGATIVE
        doc["certificate"] = cert.to_dict()
        if cert.solution is not None:
            pinv_sol = cert.solution
            doc["pinv"] = pinv_sol.to_dict()
        if not cert.is_gamma_contraction:
            code = EXIT_NEGATIVE
    if args.route in ("fejer-riesz", "both"):
        try:
            fr_sol = solve_fundamental_via_fejer_riesz(pair, cfg)
            doc["fejer_riesz"] = fr_sol.to_dict()
        except NoConvergence as exc:
            doc["fejer_riesz"] = {"status": "NoConvergence", "reason": str(exc),
                                  "max_size": exc.max_size}
            code = max(code, EXIT_INCONCLUSIVE) if code != EXIT_NEGATIVE else code
        except (NotPositiveOnCircle, NotAContraction) as exc:
            doc["fejer_riesz"] = {"status": "Refuted", "reason": str(exc)}
            code = EXIT_NEGATIVE
    if pinv_sol is not None and fr_sol is not None:
        diff = opnorm(pinv_sol.A - fr_sol.A)
        doc["disagreement"] = diff
        if diff > 10 * cfg.eq_tol and code == EXIT_OK:
            code = EXIT_INCONCLUSIVE
    dump_json(doc, out)
    return code


def cmd_dilate(args, cfg, out):
    pair, _ = _load_pair(args.instance, cfg)
    if args.model:
        model = build_model_dilation(pair, N=args.blocks, cfg=cfg)
        rep = verify_model_intertwining(model, pair, cfg)
        doc = {
            "n_levels": model.n_levels,
            "B": matrix_to_json(model.B),
            "W": matrix_to_json(model.W),
            "tail_bound": model.tail_bound,
            "report": rep.to_dict(),
        }
        dump_json(doc, out)
        return EXIT_OK if rep.passed else EXIT_NEGATIVE
    try:
        dil = build_schaffer_dilation(pair, N=args.blocks, cfg=cfg)
    except (ResidualTooLarge, NotAContraction) as exc:
        dump_json({"status": "Refuted", "reason": str(exc)}, out)
        return EXIT_NEGATIVE
    dump_json(dil.to_dict(), out)
    return EXIT_OK


def cmd_verify_dilation(args, cfg, out):
    dil = TruncatedDilation.from_dict(load_json(args.dilation))
    degree = args.max_degree
    if dil.dim_defect and dil.n_blocks < degree + 1:
        raise UsageError(f"--max-degree must be below the block count {dil.n_blocks}")
    rep = verify_dilation(dil, degree, cfg)
    mini = minimality_check(dil, cfg)
    dump_json({"report": rep.to_dict(), "minimality": mini.to_dict()}, out)
    return EXIT_OK if rep.passed else EXIT_NEGATIVE


def _kernel_spec(args):
    try:
        return KernelSpec.parse(args.kind, args.series)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_kernel_eval(args, cfg, out):
    spec = _kernel_spec(args)
    doc = load_json(args.points)
    if isinstance(doc, dict) and "pairs" in doc:
        pairs = [(_point(z), _point(w)) for z, w in doc["pairs"]]
    elif isinstance(doc, dict) and "points" in doc:
        pts = [_point(z) for z in doc["points"]]
        pairs = [(z, w) for z in pts for w in pts]
    else:
        raise InstanceFormatError("points file needs 'pairs' or 'points'")
    values = [eval_kernel(spec, z, w) for z, w in pairs]
    if args.format == "csv":
        out.write("z1_re,z1_im,z2_re,z2_im,w1_re,w1_im,w2_re,w2_im,value_re,value_im\n")
        for (z, w), v in zip(pairs, values):
            nums = [*_cpx(z[0]), *_cpx(z[1]), *_cpx(w[0]), *_cpx(w[1]), *_cpx(v)]
            out.write(",".join(repr(x) for x in nums) + "\n")
    else:
        dump_json({"kernel": spec.label, "mode": spec.eval_mode,
                   "values": [_cpx(v) for v in values]}, out)
    return EXIT_OK


def cmd_kernel_gram(args, cfg, out):
    doc = load_json(args.points)
    if not isinstance(doc, dict) or "points" not in doc:
        raise InstanceFormatError("points file needs 'points'")
    pts = [_point(z) for z in doc["points"]]
    if args.ratio is not None:
        g = ratio_gram(args.ratio, pts, cfg)
    else:
        g = gram(_kernel_spec(args), pts, cfg)
    dump_json(g.to_dict(), out)
    return EXIT_OK if g.psd_verdict else EXIT_NEGATIVE


def cmd_finite_section(args, cfg, out):
    pair = finite_section(args.lam, args.cutoff, args.family, cfg)
    meta = {"source": "finite-section", "lambda": args.lam, "cutoff": args.cutoff,
            "family": args.family}
    dump_json(pair_to_instance(pair, meta), out)
    return EXIT_OK


def cmd_gen_instance(args, cfg, out):
    seed = args.seed if args.seed is not None else args.global_seed
    if seed is None:
        raise UsageError("gen-instance needs --seed")
    params = {}
    if args.norm_cap is not None:
        params["norm_cap"] = args.norm_cap
    if args.lam is not None:
        params["lambda"] = args.lam
    if args.cutoff is not None:
        params["cutoff"] = args.cutoff
    if args.family is not None:
        params["family"] = args.family
    if args.mode is not None:
        params["mode"] = args.mode
    spec = GenSpec(int(seed), int(args.dim), args.kind, params)
    pair, meta = generate(spec, cfg)
    cert = certify_theorem_4_4(pair, cfg)
    meta["certification"] = cert.to_dict()
    dump_json(pair_to_instance(pair, meta), out)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="gammakit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--tol", type=float, default=None, help="equality and PSD tolerance")
    p.add_argument("--theta-grid", type=int, default=None)
    p.add_argument("--radius-grid", type=int, default=None)
    p.add_argument("--seed", dest="global_seed", type=int, default=None)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check-point", help="membership of (s, p) in the symmetrized bidisc")
    for name in ("s_re", "s_im", "p_re", "p_im"):
        c.add_argument(name, type=float)
    c.set_defaults(func=cmd_check_point)

    c = sub.add_parser("classify", help="classify an instance")
    c.add_argument("-i", "--instance", required=True)
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("solve-fundamental", help="solve the fundamental equation")
    c.add_argument("-i", "--instance", required=True)
    c.add_argument("--route", choices=("pinv", "fejer-riesz", "both"), default="both")
    c.set_defaults(func=cmd_solve_fundamental)

    c = sub.add_parser("dilate", help="build a truncated dilation")
    c.add_argument("-i", "--instance", required=True)
    c.add_argument("--blocks", type=int, default=8)
    c.add_argument("--model", action="store_true", help="functional model dilation instead")
    c.set_defaults(func=cmd_dilate)

    c = sub.add_parser("verify-dilation", help="check a dilation written by 'dilate'")
    c.add_argument("-i", "--dilation", required=True)
    c.add_argument("--max-degree", type=int, default=4)
    c.set_defaults(func=cmd_verify_dilation)

    for name, func in (("kernel-eval", cmd_kernel_eval), ("kernel-gram", cmd_kernel_gram)):
        c = sub.add_parser(name)
        c.add_argument("--kind", default="szego", help="szego, bergman:LAM or symfock:LAM")
        c.add_argument("--points", required=True)
        c.add_argument("--series", type=int, default=None)
        if name == "kernel-eval":
            c.add_argument("--format", choices=("json", "csv"), default="json")
        else:
            c.add_argument("--ratio", type=int, default=None)
        c.set_defaults(func=func)

    c = sub.add_parser("finite-section", help="emit a finite multiplication section")
    c.add_argument("--lambda", dest="lam", type=float, required=True)
    c.add_argument("--cutoff", type=int, required=True)
    c.add_argument("--family", choices=("a", "s", "antisymmetric", "symmetric"), default="a")
    c.set_defaults(func=cmd_finite_section)

    c = sub.add_parser("gen-instance", help="generate a seeded instance")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--dim", type=int, default=4)
    c.add_argument("--kind", choices=KINDS, default="symmetrized")
    c.add_argument("--norm-cap", type=float, default=None)
    c.add_argument("--lambda", dest="lam", type=float, default=None)
    c.add_argument("--cutoff", type=int, default=None)
    c.add_argument("--family", default=None)
    c.add_argument("--mode", default=None)
    c.set_defaults(func=cmd_gen_instance)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        return args.func(args, cfg, out)
    except (UsageError, OSError, json.JSONDecodeError, InstanceFormatError,
            NotCommuting, ShapeError, ValueError) as exc:
        sys.stderr.write(f"gammakit: {exc}\n")
        return EXIT_USAGE
    except NoConvergence as exc:
        sys.stderr.write(f"gammakit: {exc}\n")
        return EXIT_INCONCLUSIVE
    except (GammaKitError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"gammakit: {exc}\n")
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
