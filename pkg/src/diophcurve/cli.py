"""Batch CLI: every experiment as a subcommand with streamed records.

Output goes to stdout as JSON lines (default) or CSV; the first record is a
header echoing the semantic config, so a run can be reproduced from its own
output.  Thread count is execution detail, not config: it is reported on
stderr and never appears in the stream (outputs are identical for any
--threads value).

Exit codes: 0 success, 2 config error, 3 resource-guard refusal.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import cover as cov
from . import limsup as lim
from .approx import (ApproxError, GallagherSeries, KhintchineSeries,
                     Theorem2Series, classify_powerlaw, parse_approx,
                     partial_sum)
from .counting import (MODE_REDUCED, MODE_TRIPLES, CountError,
                       count_block_mult, count_block_sim, count_near_curve,
                       resolve_threads)
from .curve import CurveError, parse_curve, verify_nondegeneracy
from ._kernels import BACKEND

_COLUMNS = {
    "verify": ["ok", "samples", "min_slope", "max_slope", "min_abs_f2",
               "max_abs_f2", "f2_sign_constant", "sim_k_ok", "messages"],
    "count": ["Q", "delta", "mode", "count", "predicted_bound", "ratio",
              "boundary_ambiguous", "vv_floor_ok"],
    "block-count": ["t", "m", "mode", "count", "predicted_bound", "ratio",
                    "boundary_ambiguous"],
    "hits": ["q", "p1", "p2", "err_x", "err_y", "product_err", "mode"],
    "cover": ["t", "q", "p1", "p2", "m", "source", "x_lo", "x_hi", "diameter"],
    "tail": ["t", "count", "hausdorff_sum", "lebesgue_sum"],
    "series": ["H", "partial_sum"],
    "measure": ["n", "Q", "grid", "fraction"],
    "mc": ["kind", "n_dim", "samples", "Q", "seed", "q_min", "fraction"],
}


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


class _Emitter:
    def __init__(self, fmt: str, cmd: str):
        self.fmt = fmt
        self.cols = _COLUMNS[cmd]
        self.w = csv.writer(sys.stdout, lineterminator="\n") if fmt == "csv" else None

    def header(self, config: dict):
        if self.fmt == "json":
            print(json.dumps({"record": "header", **config}, sort_keys=True))
        else:
            print("# " + json.dumps(config, sort_keys=True))
            self.w.writerow(self.cols)

    def row(self, record: dict):
        if self.fmt == "json":
            print(json.dumps({"record": "row", **record}, sort_keys=True))
        else:
            self.w.writerow([_cell(record.get(c)) for c in self.cols])

    def summary(self, record: dict):
        if self.fmt == "json":
            print(json.dumps({"record": "summary", **record}, sort_keys=True))
        else:
            print("# summary " + json.dumps(record, sort_keys=True))


def _int_list(text: str):
    return [int(x) for x in text.split(",")]


def _with_interval(curve, text):
    if text is None:
        return curve
    import dataclasses
    lo, hi = (float(x) for x in text.split(","))
    return dataclasses.replace(curve, a=lo, b=hi)


# --- handlers ----------------------------------------------------------------

def _cmd_verify(args, em):
    curve = parse_curve(args.curve)
    em.header({"subcommand": "verify", "curve": args.curve,
               "samples": args.samples, "format": args.format})
    rep = verify_nondegeneracy(curve, args.samples)
    em.row({"ok": rep.ok, "samples": rep.samples,
            "min_slope": rep.min_slope, "max_slope": rep.max_slope,
            "min_abs_f2": rep.min_abs_f2, "max_abs_f2": rep.max_abs_f2,
            "f2_sign_constant": rep.f2_sign_constant,
            "sim_k_ok": rep.sim_k_ok, "messages": "; ".join(rep.messages)})
    return 0


def _cmd_count(args, em):
    curve = _with_interval(parse_curve(args.curve), args.interval)
    psi = parse_approx(args.psi) if args.psi else None
    if psi is None and args.delta is None:
        raise CountError("need --delta or --psi")
    mode = MODE_REDUCED if args.mode == "reduced" else MODE_TRIPLES
    em.header({"subcommand": "count", "curve": args.curve,
               "interval": args.interval, "Q": args.Q,
               "delta": args.delta, "psi": args.psi, "mode": mode,
               "format": args.format})
    for Q in _int_list(args.Q):
        delta = float(psi.eval(Q)) / Q if psi else args.delta
        rep = count_near_curve(curve, Q, delta, mode, threads=args.threads)
        em.row({"Q": Q, "delta": delta, "vv_floor_ok": delta * Q >= Q ** (-2 / 3),
                **rep.to_json()})
    return 0


def _cmd_block_count(args, em):
    curve = parse_curve(args.curve)
    psi = parse_approx(args.psi)
    em.header({"subcommand": "block-count", "curve": args.curve,
               "psi": args.psi, "phi": args.phi, "mode": args.mode,
               "t": args.t, "m": args.m, "format": args.format})
    for t in _int_list(args.t):
        if args.mode == "mult":
            if args.m is None:
                raise CountError("mult mode needs --m")
            rep = count_block_mult(curve, psi, t, args.m, threads=args.threads)
        else:
            if args.phi is None:
                raise CountError("sim mode needs --phi")
            rep = count_block_sim(curve, psi, parse_approx(args.phi), t,
                                  threads=args.threads)
        em.row({"t": t, "m": args.m if args.mode == "mult" else None,
                **rep.to_json()})
    return 0


def _cmd_hits(args, em):
    curve = parse_curve(args.curve)
    psi1 = parse_approx(args.psi)
    psi2 = parse_approx(args.phi) if args.phi else None
    mode = lim.MODE_SIM if args.mode == "sim" else lim.MODE_MULT
    em.header({"subcommand": "hits", "curve": args.curve, "x": args.x,
               "q_min": args.q_min, "q_max": args.q_max, "mode": mode,
               "psi": args.psi, "phi": args.phi, "format": args.format})
    for h in lim.find_hits(curve, args.x, args.q_min, args.q_max, mode,
                           psi1, psi2):
        em.row({"q": h.q, "p1": h.p1, "p2": h.p2, "err_x": h.err_x,
                "err_y": h.err_y, "product_err": h.product_err,
                "mode": h.mode})
    return 0


def _element_row(e):
    return {"t": e.t, "q": e.q, "p1": e.p1, "p2": e.p2, "m": e.m,
            "source": e.source, "x_lo": e.x_lo, "x_hi": e.x_hi,
            "diameter": e.diameter}


def _cmd_cover(args, em):
    curve = parse_curve(args.curve)
    psi = parse_approx(args.psi)
    em.header({"subcommand": "cover", "curve": args.curve, "psi": args.psi,
               "phi": args.phi, "mode": args.mode, "t": args.t, "s": args.s,
               "format": args.format})
    elements = []
    for t in _int_list(args.t):
        if args.mode == "mult":
            if args.s is None:
                raise cov.CoverError("mult mode needs --s")
            elements.extend(cov.build_cover_mult(curve, psi, args.s, t,
                                                 threads=args.threads))
        else:
            if args.phi is None:
                raise cov.CoverError("sim mode needs --phi")
            elements.extend(cov.build_cover_sim(curve, psi,
                                                parse_approx(args.phi), t,
                                                threads=args.threads))
    for e in elements:
        em.row(_element_row(e))
    em.summary(cov.summarize(elements, args.s if args.s is not None else 1.0)
               .to_json())
    return 0


def _cmd_tail(args, em):
    curve = parse_curve(args.curve)
    psi = parse_approx(args.psi)
    phi = parse_approx(args.phi) if args.phi else None
    em.header({"subcommand": "tail", "curve": args.curve, "psi": args.psi,
               "phi": args.phi, "mode": args.mode, "n": args.n, "T": args.T,
               "s": args.s, "format": args.format})
    summ = cov.tail_sum(curve, psi, args.mode, args.n, args.T, s=args.s,
                        phi=phi, threads=args.threads)
    for e in summ.per_t_breakdown:
        em.row({"t": e.t, "count": e.count, "hausdorff_sum": e.hausdorff_sum,
                "lebesgue_sum": e.lebesgue_sum})
    em.summary(summ.to_json())
    return 0


def _cmd_series(args, em):
    em.header({"subcommand": "series", "kind": args.kind, "psi": args.psi,
               "n": args.n, "s": args.s, "H": args.H, "format": args.format})
    psis = [parse_approx(x) for x in args.psi]
    if args.kind == "khintchine":
        series = KhintchineSeries(tuple(psis))
    elif args.kind == "gallagher":
        series = GallagherSeries(psis[0], args.n)
    else:
        if args.s is None:
            raise ApproxError("theorem2 needs --s")
        series = Theorem2Series(psis[0], args.s)
    cps = []
    h = 10
    while h < args.H:
        cps.append(h)
        h *= 10
    cps.append(args.H)
    for cp in cps:
        em.row({"H": cp, "partial_sum": partial_sum(series, cp)})
    try:
        v = classify_powerlaw(series)
        em.summary({"verdict": v.verdict, "reason": v.reason,
                    "critical_exponent": v.critical_exponent})
    except ApproxError:
        # no closed form for this family; the partial sums above still stand
        em.summary({"verdict": None,
                    "reason": "no closed-form verdict for this family",
                    "critical_exponent": None})
    return 0


def _cmd_measure(args, em):
    curve = parse_curve(args.curve)
    psi1 = parse_approx(args.psi)
    psi2 = parse_approx(args.phi) if args.phi else psi1
    mode = lim.MODE_SIM if args.mode == "sim" else lim.MODE_MULT
    em.header({"subcommand": "measure", "curve": args.curve, "psi": args.psi,
               "phi": args.phi, "mode": mode, "grid": args.grid, "n": args.n,
               "Q": args.Q, "format": args.format})
    for n in _int_list(args.n):
        frac = lim.empirical_tail_measure(curve, psi1, psi2, mode, args.grid,
                                          n, args.Q, threads=args.threads)
        em.row({"n": n, "Q": args.Q, "grid": args.grid, "fraction": frac})
    return 0


def _cmd_mc(args, em):
    em.header({"subcommand": "mc", "kind": args.kind, "n_dim": args.n_dim,
               "psi": args.psi, "samples": args.samples, "Q": args.Q,
               "seed": args.seed, "q_min": args.q_min, "format": args.format})
    psis = [parse_approx(x) for x in args.psi]
    frac = lim.mc_classical(args.n_dim, args.kind,
                            psis if len(psis) > 1 else psis[0],
                            args.samples, args.Q, args.seed,
                            q_min=args.q_min, threads=args.threads)
    em.row({"kind": args.kind, "n_dim": args.n_dim, "samples": args.samples,
            "Q": args.Q, "seed": args.seed, "q_min": args.q_min,
            "fraction": frac})
    return 0


_HANDLERS = {
    "verify": _cmd_verify, "count": _cmd_count,
    "block-count": _cmd_block_count, "hits": _cmd_hits, "cover": _cmd_cover,
    "tail": _cmd_tail, "series": _cmd_series, "measure": _cmd_measure,
    "mc": _cmd_mc,
}


def _build_parser():
    top = argparse.ArgumentParser(
        prog="diophcurve",
        description="Rational points near planar curves: counts, covers, "
                    "hit statistics.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json",
                        help="output stream format (default json)")
    common.add_argument("--threads", default=None,
                        help="worker count or 'auto' (default: DIOPH_THREADS or 1); "
                             "never changes output")
    sub = top.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("verify", parents=[common],
                       help="check slope and curvature bounds on a grid")
    p.add_argument("--curve", required=True)
    p.add_argument("--samples", type=int, default=1000)

    p = sub.add_parser("count", parents=[common],
                       help="triples |q f(p1/q) - p2| < delta for q <= Q; "
                            "CSV columns: " + ",".join(_COLUMNS["count"]))
    p.add_argument("--curve", required=True)
    p.add_argument("--Q", required=True, help="denominator bound(s), comma separated")
    p.add_argument("--delta", type=float)
    p.add_argument("--psi", help="use delta = psi(Q)/Q instead of --delta")
    p.add_argument("--mode", choices=["triples", "reduced"], default="triples")
    p.add_argument("--interval", help="override the curve interval, e.g. 0,1")

    p = sub.add_parser("block-count", parents=[common],
                       help="certified window count on a dyadic block; "
                            "CSV columns: " + ",".join(_COLUMNS["block-count"]))
    p.add_argument("--curve", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--phi")
    p.add_argument("--t", required=True, help="block index(es), comma separated")
    p.add_argument("--m", type=int)
    p.add_argument("--mode", choices=["mult", "sim"], required=True)

    p = sub.add_parser("hits", parents=[common],
                       help="approximation hits at one point; CSV columns: "
                            + ",".join(_COLUMNS["hits"]))
    p.add_argument("--curve", required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--q-min", type=int, default=1)
    p.add_argument("--q-max", type=int, required=True)
    p.add_argument("--mode", choices=["sim", "mult"], required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--phi")

    p = sub.add_parser("cover", parents=[common],
                       help="materialize block covers; CSV columns: "
                            + ",".join(_COLUMNS["cover"]))
    p.add_argument("--curve", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--phi")
    p.add_argument("--mode", choices=["mult", "sim"], required=True)
    p.add_argument("--t", required=True, help="block index(es), comma separated")
    p.add_argument("--s", type=float)

    p = sub.add_parser("tail", parents=[common],
                       help="streamed cover summary over blocks [n, T]; "
                            "CSV columns: " + ",".join(_COLUMNS["tail"]))
    p.add_argument("--curve", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--phi")
    p.add_argument("--mode", choices=["mult", "sim"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--s", type=float)

    p = sub.add_parser("series", parents=[common],
                       help="partial sums and convergence verdict; CSV "
                            "columns: " + ",".join(_COLUMNS["series"]))
    p.add_argument("--kind", choices=["khintchine", "gallagher", "theorem2"],
                   required=True)
    p.add_argument("--psi", action="append", required=True,
                   help="repeat for khintchine coordinates")
    p.add_argument("--n", type=int, default=2, help="gallagher dimension")
    p.add_argument("--s", type=float)
    p.add_argument("--H", type=int, required=True)

    p = sub.add_parser("measure", parents=[common],
                       help="fraction of an x-grid hit by some q in [2^n, Q]; "
                            "CSV columns: " + ",".join(_COLUMNS["measure"]))
    p.add_argument("--curve", required=True)
    p.add_argument("--psi", required=True)
    p.add_argument("--phi")
    p.add_argument("--mode", choices=["sim", "mult"], required=True)
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--n", required=True, help="tail start exponent(s), comma separated")
    p.add_argument("--Q", type=int, required=True)

    p = sub.add_parser("mc", parents=[common],
                       help="seeded Monte Carlo for the independent-coordinate "
                            "systems; CSV columns: " + ",".join(_COLUMNS["mc"]))
    p.add_argument("--kind", choices=["khintchine", "gallagher"], required=True)
    p.add_argument("--n-dim", type=int, default=2)
    p.add_argument("--psi", action="append", required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--Q", type=int, required=True)
    p.add_argument("--seed", type=int, required=True,
                   help="required: no implicit entropy")
    p.add_argument("--q-min", type=int, default=1)
    return top


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    print(f"backend: {BACKEND}, threads: {resolve_threads(args.threads)}",
          file=sys.stderr)
    em = _Emitter(args.format, args.cmd)
    try:
        return _HANDLERS[args.cmd](args, em)
    except cov.ResourceGuardError as e:
        print(f"resource guard: {e}", file=sys.stderr)
        for t, pred in e.predictions:
            print(f"  t={t}: predicted {pred:.3e} elements", file=sys.stderr)
        return 3
    except (ApproxError, CurveError, CountError, cov.CoverError,
            lim.DomainError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
