"""Command-line interface: ``trilinear-manin <command> ...``.

Reports go to stdout (or ``--out``) as JSON.  Exit status is 0 on success,
2 for invalid input and 3 when a computation exceeds its budget.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from typing import Optional, Sequence

from .arith import BudgetError, fraction_to_json
from .form import DimensionError, FormFileError, GenerationError, TrilinearForm, check_genericity, random_generic_form

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3
CSV_HEADER = ["form_id", "variant", "P1", "P2", "P3", "B", "count", "seconds"]


def _int_list(s: str) -> list[int]:
    try:
        return [int(t) for t in s.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


def _count_arg(s: str) -> int:
    """Integers that may be written like 1e6."""
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {s!r}")
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}")
    return int(v)


def _emit(obj, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _workers(args) -> int:
    from .enumeration import default_workers

    return args.threads or default_workers()


# -- commands ------------------------------------------------------------------


def cmd_gen(args):
    form = random_generic_form(args.n, args.bound, args.seed)
    if args.out:
        form.dump(args.out)
    else:
        _emit(form.to_json(), None)
    rep = check_genericity(form, seed=args.seed)
    print(json.dumps({"form_id": form.form_id(), "seed": args.seed, "genericity": rep.to_json()}), file=sys.stderr)


def cmd_count(args):
    from .enumeration import CountVariant, count_box, count_height, h_function

    form = TrilinearForm.load(args.form)
    variant = CountVariant(args.variant, args.lam)
    t0 = time.perf_counter()
    if args.mode == "box":
        if None in (args.P1, args.P2, args.P3):
            raise ValueError("box mode needs --P1, --P2 and --P3")
        rep = count_box(form, args.P1, args.P2, args.P3, variant, _workers(args))
    elif args.mode == "height":
        if args.B is None:
            raise ValueError("height mode needs --B")
        rep = count_height(form, args.B, args.primitive, variant, _workers(args))
    else:
        if None in (args.l1, args.l2, args.l3):
            raise ValueError("shell mode needs --l1, --l2 and --l3")
        from .enumeration import CountReport

        c = h_function(form, args.l1, args.l2, args.l3, variant)
        rep = CountReport(variant.label(form), c, time.perf_counter() - t0, form.form_id(),
                          {"l1": args.l1, "l2": args.l2, "l3": args.l3})
    if args.csv:
        new = not os.path.exists(args.csv) or os.path.getsize(args.csv) == 0
        with open(args.csv, "a", newline="") as fh:
            w = csv.writer(fh)
            if new:
                w.writerow(CSV_HEADER)
            b = rep.bounds
            w.writerow([rep.form_id, rep.variant, b.get("P1", ""), b.get("P2", ""), b.get("P3", ""),
                        b.get("B", ""), rep.count, f"{rep.elapsed:.6f}"])
    _emit(rep.to_json(), args.out)


def cmd_fiber(args):
    from .enumeration import count_fiber_z
    from .form import Contraction, contract
    from .lattice import lattice_det, predict_fiber_exact, slice_volume

    form = TrilinearForm.load(args.form)
    b = contract(form, Contraction.B, args.x, args.y)
    if b.is_zero():
        raise ValueError("B(x, y) = 0: the fibre is the whole z-box")
    det_sq, det = lattice_det(b.values)
    vol = slice_volume(b.values)
    pred = predict_fiber_exact(b.values, args.P3)
    _emit({
        "bvec": list(b.values),
        "det_sq": fraction_to_json(det_sq),
        "det": det,
        "volume": vol.value,
        "predicted": float(pred),
        "predicted_exact": fraction_to_json(pred),
        "exact": count_fiber_z(form, args.x, args.y, args.P3, args.variant),
        "P3": args.P3,
    }, args.out)


def cmd_series(args):
    from .expsums import singular_series_trunc

    form = TrilinearForm.load(args.form)
    st = singular_series_trunc(form, args.Q)
    _emit({
        "Q": st.Q,
        "terms": [{"q": q, "A": fraction_to_json(a)} for q, a in st.terms],
        "partial": fraction_to_json(st.partial),
        "partial_float": float(st.partial),
        "tail_diagnostic": st.tail_diagnostic,
    }, args.out)


def cmd_osc(args):
    from .expsums import I_beta, J_of_phi
    from .quadrature import QuadSpec

    form = TrilinearForm.load(args.form)
    quad = QuadSpec(samples=args.samples, seed=args.seed)
    out = {"seed": args.seed, "samples": args.samples}
    if args.beta is not None:
        re, im = I_beta(form, args.beta, quad, return_imag=True)
        out["I"] = {"beta": args.beta, **re.to_json(), "imag": im.to_json()}
    if args.phi is not None:
        out["J"] = {"phi": args.phi, **J_of_phi(form, args.phi, quad).to_json()}
    if len(out) == 2:
        raise ValueError("give --phi and/or --beta")
    _emit(out, args.out)


def cmd_arcs(args):
    from .expsums import ArcSpec, count_M, in_major_arc

    spec = ArcSpec(args.a, args.q, args.theta, args.P)
    out = {
        "alpha": args.alpha, "a": args.a, "q": args.q, "theta": args.theta, "P": args.P,
        "arc_constant": 1,
        "half_width": args.P ** (-1 + 2 * args.theta),
        "in_arc": in_major_arc(args.alpha, spec),
    }
    if args.form:
        if None in (args.H1, args.H2, args.Hinv):
            raise ValueError("counting M needs --H1, --H2 and --Hinv")
        form = TrilinearForm.load(args.form)
        out["M"] = {"kind": args.kind, "H1": args.H1, "H2": args.H2, "Hinv": args.Hinv,
                    "count": count_M(form, args.alpha, args.H1, args.H2, args.Hinv, args.kind)}
    _emit(out, args.out)


def cmd_sigma_p(args):
    from .local import check_primitive_density, sigma_p

    form = TrilinearForm.load(args.form)
    out = sigma_p(form, args.p, args.rmax).to_json()
    if args.primitive:
        out["primitive"] = check_primitive_density(form, args.p, args.rmax).to_json()
    _emit(out, args.out)


def cmd_sigma_inf(args):
    from .local import sigma_infinity

    form = TrilinearForm.load(args.form)
    _emit(sigma_infinity(form, args.method, args.phi, args.samples, args.seed).to_json(), args.out)


def cmd_fiber_density(args):
    from .fiber import fiber_density

    form = TrilinearForm.load(args.form)
    _emit(fiber_density(form, args.x, args.Q, args.phi, args.samples, args.seed, args.lam).to_json(), args.out)


def cmd_bb_sum(args):
    from .enumeration import CountVariant
    from .hyperbolic import ShellCounter, fit_leading, sum_hyperbolic

    form = TrilinearForm.load(args.form)
    h = ShellCounter(form, CountVariant("u", args.lam))
    Ps = sorted(set(args.fit or []) | {args.P})
    sums = {P: sum_hyperbolic(h, P) for P in Ps}
    out = {"form_id": form.form_id(), "P": args.P, "sum": sums[args.P], "beta": form.n,
           "sums": {str(P): s for P, s in sums.items()}}
    if args.fit:
        fit = fit_leading([sums[P] for P in sorted(args.fit)], sorted(args.fit), float(form.n))
        out["fit"] = fit.to_json()
    _emit(out, args.out)


def cmd_predict(args):
    from .assembly import assemble

    form = TrilinearForm.load(args.form)
    rep = assemble(form, args.pmax, args.phi, args.samples, args.Q, args.seed)
    _emit(rep.to_json(), args.out)


def cmd_compare(args):
    from .assembly import PredictionReport, assemble, compare_counts
    from .enumeration import CountVariant

    form = TrilinearForm.load(args.form)
    if args.report:
        with open(args.report) as fh:
            rep = PredictionReport.from_json(json.load(fh))
        rep.comparisons = []
    else:
        rep = assemble(form, args.pmax, args.phi, args.samples, args.Q, args.seed)
    compare_counts(form, args.B, rep, CountVariant("u", args.lam), _workers(args))
    _emit(rep.to_json(), args.out)


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trilinear-manin", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=None, help="worker threads (default $MANIN_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, fn, needs_form=True, **kw):
        sp = sub.add_parser(name, **kw)
        if needs_form:
            sp.add_argument("--form", required=True, help="form JSON file")
        sp.add_argument("--out", default=None, help="write JSON here instead of stdout")
        sp.set_defaults(func=fn)
        return sp

    sp = cmd("gen", cmd_gen, False, help="random generic form")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--bound", type=int, default=3)
    sp.add_argument("--seed", type=int, required=True)

    sp = cmd("count", cmd_count, help="exact point counts")
    sp.add_argument("--mode", choices=["box", "height", "shell"], default="box")
    for name in ("P1", "P2", "P3", "B", "l1", "l2", "l3"):
        sp.add_argument(f"--{name}", type=int, default=None)
    sp.add_argument("--variant", default="u", choices=["all", "nondeg3", "n1", "nprime", "u"])
    sp.add_argument("--lambda", dest="lam", type=int, default=None)
    sp.add_argument("--primitive", action="store_true")
    sp.add_argument("--csv", default=None, help="append a CSV row here")

    sp = cmd("fiber", cmd_fiber, help="one fibre: lattice, slice volume, prediction, exact count")
    sp.add_argument("--x", type=_int_list, required=True)
    sp.add_argument("--y", type=_int_list, required=True)
    sp.add_argument("--P3", type=int, required=True)
    sp.add_argument("--variant", default="all", choices=["all", "nondeg3", "u"])

    sp = cmd("series", cmd_series, help="truncated singular series")
    sp.add_argument("--Q", type=int, required=True)

    sp = cmd("osc", cmd_osc, help="oscillatory integral I(beta) and J(phi)")
    sp.add_argument("--phi", type=float, default=None)
    sp.add_argument("--beta", type=float, default=None)
    sp.add_argument("--samples", type=_count_arg, default=1 << 20)
    sp.add_argument("--seed", type=int, default=0)

    sp = cmd("arcs", cmd_arcs, False, help="major-arc membership and M counts")
    sp.add_argument("--form", default=None)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--P", type=float, required=True)
    sp.add_argument("--H1", type=int, default=None)
    sp.add_argument("--H2", type=int, default=None)
    sp.add_argument("--Hinv", type=float, default=None)
    sp.add_argument("--kind", default="B", choices=["B", "B'", "B''"])

    sp = cmd("sigma-p", cmd_sigma_p, help="p-adic density sequence")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--rmax", type=int, required=True)
    sp.add_argument("--primitive", action="store_true", help="also report N*(r)")

    sp = cmd("sigma-inf", cmd_sigma_inf, help="archimedean density")
    sp.add_argument("--method", choices=["leray-fiber", "sinc", "both"], default="both")
    sp.add_argument("--phi", type=float, default=16.0)
    sp.add_argument("--samples", type=_count_arg, default=1 << 20)
    sp.add_argument("--seed", type=int, default=0)

    sp = cmd("fiber-density", cmd_fiber_density, help="fibre series and integral at x")
    sp.add_argument("--x", type=_int_list, required=True)
    sp.add_argument("--Q", type=int, default=12)
    sp.add_argument("--phi", type=float, default=None)
    sp.add_argument("--samples", type=_count_arg, default=1 << 18)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--lambda", dest="lam", type=int, default=None)

    sp = cmd("bb-sum", cmd_bb_sum, help="hyperbolic shell sums and leading-constant fit")
    sp.add_argument("--P", type=int, required=True)
    sp.add_argument("--fit", type=_int_list, default=None)
    sp.add_argument("--lambda", dest="lam", type=int, default=None)

    for name, fn in (("predict", cmd_predict), ("compare", cmd_compare)):
        sp = cmd(name, fn, help="assembled constant" if name == "predict" else "prediction vs exact counts")
        sp.add_argument("--pmax", type=int, default=19)
        sp.add_argument("--phi", type=float, default=16.0)
        sp.add_argument("--samples", type=_count_arg, default=1 << 20)
        sp.add_argument("--Q", type=int, default=None)
        sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--B", type=_int_list, required=True)
    sp.add_argument("--report", default=None, help="reuse a saved predict report")
    sp.add_argument("--lambda", dest="lam", type=int, default=None)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        args.func(args)
    except (BudgetError, GenerationError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        partial = getattr(exc, "partial", None)
        if hasattr(partial, "to_json"):
            print(json.dumps({"partial": partial.to_json()}, sort_keys=True), file=sys.stderr)
        return EXIT_BUDGET
    except (FormFileError, DimensionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
