"""Command-line driver: ``aplab normalize | lipschitzify | pipeline | verify-r | flow | morphism``.

Every report opens with a ``#`` header listing the subcommand, the input and
every parameter including defaults, followed by readable lines and a JSON
block after ``--- machine-readable ---``.  Exit codes: 0 success,
2 certificate failure, 3 structural error, 4 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from aplab import __version__, kernels
from aplab.actionfile import read_action, write_action
from aplab.displacement_normalization import (
    DEFAULT_DEPTH,
    SNAPSHOT_ERR,
    check_R_membership,
    normalize_action,
    snapshot_action,
)
from aplab.errors import AplabError, NonConvergence
from aplab.flow_lab import (
    DEFAULT_EPS,
    DEFAULT_S,
    DEFAULT_SAMPLES,
    DEFAULT_W,
    afp,
    almost_periods,
    covering_number,
)
from aplab.group_action import GroupAction, lipschitz_bound, resolve, symmetrize
from aplab.lipschitz_conjugation import DEFAULT_RADIUS, WeightScheme, lipschitzify
from aplab.morphism_detector import DEFAULT_N, TranslationNumber, morphism_report
from aplab.rational import decimal_string, format_rational, parse_rational

EXIT_OK = 0
EXIT_CERTIFICATE = 2
EXIT_STRUCTURAL = 3
EXIT_NONCONVERGENCE = 4

DEFAULT_LIP_TOL = Fraction(1, 1 << 20)
DEFAULT_LIP_WINDOW = Fraction(20)
DEFAULT_GRID = 201
DEFAULT_VERIFY_WINDOW = (Fraction(-20), Fraction(20))


def _rat(text):
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def _fmt(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, (tuple, list)):
        return [_fmt(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _fmt(x) for k, x in v.items()}
    return v


class Report:
    def __init__(self, command: str, args, params: dict):
        self.lines = [f"# aplab {__version__} {command}"]
        if not args.no_timestamp:
            self.lines.append(f"# generated: {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}")
        self.lines.append(f"# input: {args.input}")
        self.lines.append(f"# kernel backend: {kernels.BACKEND}")
        for k, v in params.items():
            self.lines.append(f"# {k}: {_show(v)}")
        self.data: dict = {"command": command}

    def add(self, line: str = ""):
        self.lines.append(line)

    def render(self) -> str:
        body = "\n".join(self.lines)
        machine = json.dumps(_fmt(self.data), sort_keys=True, indent=2)
        return f"{body}\n--- machine-readable ---\n{machine}\n"

    def emit(self, path):
        text = self.render()
        if path:
            Path(path).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)


def _show(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, (tuple, list)):
        return " ".join(_show(x) for x in v)
    return "none" if v is None else str(v)


def _load(path) -> GroupAction:
    return read_action(path)


def _symmetric(A: GroupAction, rep: Report) -> GroupAction:
    if A.symmetric:
        return A
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        S = symmetrize(A)
    added = [n for n in S.generators if n not in A.generators]
    rep.add(f"note: input not symmetric; adjoined {', '.join(added) or 'pairings only'}")
    return S


def _keep_relators(A: GroupAction) -> GroupAction:
    def ok(r):
        try:
            for t in r:
                resolve(A, t)
        except KeyError:
            return False
        return True

    return A.with_generators(A.generators, relators=tuple(r for r in A.relators if ok(r)))


def _membership_lines(rep: Report, title: str, R, key: str):
    rep.add(f"[{title}]")
    rep.add(f"window: [{format_rational(R.window[0])}, {format_rational(R.window[1])}]")
    rep.add(f"K: {format_rational(R.K_bound)}  C: {format_rational(R.C)}  D: {format_rational(R.D)}")
    for n in sorted(R.max_slope):
        rep.add(f"lipschitz {n}: {format_rational(R.max_slope[n])}")
    if R.max_displacement:
        rep.add(f"max-envelope displacement range: {_show(R.max_displacement)}")
        rep.add(f"min-envelope displacement range: {_show(R.min_displacement)}")
    rep.add(f"checked points: {R.checked_points}")
    for w in R.witnesses:
        rep.add(f"witness: x={format_rational(w.x)} generator={w.generator} {w.bound} value={format_rational(w.value)}")
    rep.add(f"result: {'pass' if R.passed else 'FAIL'}")
    rep.add()
    rep.data[key] = {
        "window": R.window,
        "K": R.K_bound,
        "C": R.C,
        "D": R.D,
        "lipschitz": R.max_slope,
        "max_displacement": R.max_displacement,
        "min_displacement": R.min_displacement,
        "witnesses": [[w.x, w.generator, w.bound, w.value] for w in R.witnesses],
        "passed": R.passed,
    }


def _normalize_into(rep: Report, A: GroupAction, depth: int):
    res = normalize_action(A, depth)
    es = res.sequence
    rep.add(f"generators: {', '.join(A.generators)}")
    rep.add(f"K (max bilipschitz constant of generators): {format_rational(res.K)}")
    rep.add("escape sequence: " + " ".join(format_rational(es.x(n)) for n in range(-min(depth, 6), min(depth, 6) + 1)))
    ok, worst, first = res.distortion
    rep.add(f"escape gap distortion: worst ratio {format_rational(worst)} ({'within' if ok else 'exceeds'} K)")
    rep.add(f"squared generating set size: {len(res.action.generators)}")
    for n in res.notes:
        rep.add(f"note: {n}")
    rep.add()
    K = res.K
    _membership_lines(rep, f"R(G, G-bar, K^6 = {format_rational(K**6)}, 1, 4)", res.report, "membership")
    _membership_lines(rep, f"single generators: Lipschitz <= K^3 = {format_rational(K**3)}, |displacement| <= 2", res.single_report, "single")
    rep.data.update({"K": K, "depth": depth, "escape_points": list(es.points), "distortion_ok": ok})
    passed = res.report.passed and res.single_report.passed
    rep.add(f"certificate: {'pass' if passed else 'FAIL'}")
    rep.data["passed"] = passed
    out = _keep_relators(res.action).with_generators(res.action.generators, name=f"{A.name}-normalized")
    return out, passed


# -- subcommands --------------------------------------------------------------


def cmd_normalize(args) -> int:
    rep = Report("normalize", args, {"depth": args.depth, "out": args.out})
    A = _symmetric(_load(args.input), rep)
    out, passed = _normalize_into(rep, A, args.depth)
    if args.out:
        write_action(out, args.out)
    rep.emit(args.report)
    return EXIT_OK if passed else EXIT_CERTIFICATE


def _stage1(rep: Report, A: GroupAction, args, snapshot_err):
    ws = WeightScheme(args.alpha, args.ball) if args.alpha is not None else WeightScheme.default_for(A, args.ball)
    W = args.window
    L, report = lipschitzify(A, ws, window=(-W, W), grid_n=args.grid, tol=args.tol)
    rep.add("[stage 1: Lipschitz conjugation]")
    rep.add(f"alpha: {format_rational(ws.alpha)}  ball radius: {ws.radius}  ball size: {report.ball_size}")
    defect = report.truncation_defect
    rep.add(f"truncation defect bound: {decimal_string(defect) if isinstance(defect, Fraction) else defect}")
    gens = []
    for g in report.generators:
        rep.add(
            f"{g.name}: L={format_rational(g.L)} empirical lower={decimal_string(g.empirical_lower)} "
            f"tail hint L^3={format_rational(g.analytic_tail_hint)} quotient violations={g.quotient_violations}"
        )
        gens.append({"name": g.name, "L": g.L, "empirical_lower": g.empirical_lower, "violations": g.quotient_violations})
    snap = snapshot_action(L, (-W, W), snapshot_err)
    snap = snap.with_generators(snap.generators, name=f"{A.name}-lipschitz")
    rep.add(f"snapshot: certified PL, sup error <= {format_rational(snapshot_err)} on [-{format_rational(W)}, {format_rational(W)}]")
    rep.add("note: snapshot drops relators; paired inverses are exact inverses of the snapshots")
    rep.add()
    rep.data["stage1"] = {
        "alpha": ws.alpha,
        "radius": ws.radius,
        "ball_size": report.ball_size,
        "truncation_defect": defect if isinstance(defect, Fraction) else str(defect),
        "generators": gens,
        "ok": report.ok,
    }
    return snap, report.ok


def _stage1_params(args):
    return {
        "alpha": args.alpha if args.alpha is not None else "1/(4k)",
        "ball": args.ball,
        "tol": args.tol,
        "window": args.window,
        "grid": args.grid,
    }


def cmd_lipschitzify(args) -> int:
    rep = Report("lipschitzify", args, {**_stage1_params(args), "out": args.out})
    A = _symmetric(_load(args.input), rep)
    snap, ok = _stage1(rep, A, args, args.tol)
    if args.out:
        write_action(snap, args.out)
    rep.emit(args.report)
    return EXIT_OK if ok else EXIT_CERTIFICATE


def cmd_pipeline(args) -> int:
    params = {
        "depth": args.depth,
        "force-lipschitz": args.force_lipschitz,
        **_stage1_params(args),
        "snapshot-err": args.snapshot_err,
        "out": args.out,
    }
    rep = Report("pipeline", args, params)
    A = _symmetric(_load(args.input), rep)
    K = lipschitz_bound(A)
    rep.add(f"uniform Lipschitz scan: PL generators, global bilipschitz constant {format_rational(K)}")
    ok1 = True
    if args.force_lipschitz:
        A, ok1 = _stage1(rep, A, args, args.snapshot_err)
    else:
        rep.add("stage 1 skipped: input already uniformly bilipschitz")
        rep.add()
    rep.add("[stage 2: displacement normalization]")
    out, passed = _normalize_into(rep, A, args.depth)
    if args.out:
        write_action(out, args.out)
    rep.emit(args.report)
    return EXIT_OK if passed and ok1 else EXIT_CERTIFICATE


def cmd_verify_r(args) -> int:
    A0 = _load(args.input)
    K = args.K if args.K is not None else lipschitz_bound(A0)
    window = tuple(args.window) if args.window else DEFAULT_VERIFY_WINDOW
    rep = Report("verify-r", args, {"K": args.K if args.K is not None else f"max generator constant = {format_rational(K)}", "C": args.C, "D": args.D, "window": window})
    A = _symmetric(A0, rep)
    R = check_R_membership(A, K, args.C, args.D, window)
    _membership_lines(rep, f"R(G, S, {format_rational(K)}, {format_rational(args.C)}, {format_rational(args.D)})", R, "membership")
    rep.emit(args.report)
    return EXIT_OK if R.passed else EXIT_CERTIFICATE


def cmd_flow(args) -> int:
    step = args.step if args.step is not None else args.S / args.samples
    params = {"eps": args.eps, "S": args.S, "W": args.W, "samples": args.samples, "step": step, "csv": args.csv}
    rep = Report("flow", args, params)
    A = _symmetric(_load(args.input), rep)
    value, arg = afp(A, (-args.W, args.W))
    scan = almost_periods(A, args.eps, args.S, step, args.W)
    cover = covering_number(A, args.eps, args.samples, args.S, args.W)
    rep.add(f"afp on [-{format_rational(args.W)}, {format_rational(args.W)}]: {format_rational(value)} at x={format_rational(arg)}")
    rep.add(f"almost periods found: {len(scan.almost_periods)} of {len(scan.shifts)} shifts")
    rep.add(f"largest gap between almost periods: {format_rational(scan.max_gap)}")
    rep.add(f"covering number (eps-net size over {args.samples} samples): {cover}")
    rep.add("note: compactness is a diagnostic; a finite sample cannot certify it")
    rep.data.update({"afp": value, "afp_at": arg, "almost_periods": len(scan.almost_periods), "max_gap": scan.max_gap, "covering_number": cover})
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["s", "d_W", "is_almost_period", "s_exact", "d_W_exact"])
            for s, d in zip(scan.shifts, scan.distances):
                w.writerow([decimal_string(s), decimal_string(d), int(d <= args.eps), format_rational(s), format_rational(d)])
    rep.emit(args.report)
    return EXIT_OK


def cmd_morphism(args) -> int:
    rep = Report("morphism", args, {"n": args.n, "pairs": args.pairs, "seed": args.seed})
    A = _symmetric(_load(args.input), rep)
    m = morphism_report(A, args.n, args.pairs, args.seed)
    rep.add("[tail-slope morphism g -> slope at +infinity]")
    for n, (r, l) in m.tail_slopes.items():
        rep.add(f"{n}: +inf {format_rational(r)}  -inf {format_rational(l)}")
    for word, rp, lp, ok in m.relators:
        rep.add(f"relator {' '.join(word)}: +inf {format_rational(rp)} -inf {format_rational(lp)} {'ok' if ok else 'INCONSISTENT'}")
    tn = {}
    if m.translation_numbers:
        rep.add("[translation numbers]")
        for n, t in m.translation_numbers.items():
            if isinstance(t, TranslationNumber):
                rep.add(f"{n}: {decimal_string(t.estimate)} (halving error {decimal_string(t.halving_error)}, n={t.n})")
                tn[n] = {"estimate": t.estimate, "halving_error": t.halving_error}
            else:
                rep.add(f"{n}: {t}")
                tn[n] = t
        worst = max((abs(uv - u - v) for _, _, uv, u, v in m.additivity), default=None)
        if worst is not None:
            rep.add(f"additivity: {len(m.additivity)} pairs, worst defect {decimal_string(worst)}")
    for n in m.notes:
        rep.add(f"note: {n}")
    rep.add(f"verdict: {m.verdict}")
    rep.data.update({
        "tail_slopes": {n: list(s) for n, s in m.tail_slopes.items()},
        "relators": [[" ".join(w), rp, lp, ok] for w, rp, lp, ok in m.relators],
        "translation_numbers": tn,
        "verdict": m.verdict,
    })
    rep.emit(args.report)
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------


def _stage1_flags(p):
    p.add_argument("--alpha", type=_rat, default=None, help="ball weight base (default 1/(4k) for k generators)")
    p.add_argument("--ball", type=int, default=DEFAULT_RADIUS, help="ball radius N")
    p.add_argument("--tol", type=_rat, default=DEFAULT_LIP_TOL, help="enclosure and snapshot tolerance")
    p.add_argument("--window", type=_rat, default=DEFAULT_LIP_WINDOW, help="snapshot window half-width W")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID, help="grid points for the Lipschitz scan")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aplab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"aplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("input", help="action file")
        p.add_argument("--report", default=None, help="write the report here instead of stdout")
        p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp (byte-identical reports)")
        p.set_defaults(func=fn)
        return p

    p = common("normalize", cmd_normalize, "straighten by the escape sequence and certify R-membership")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="escape sequence depth M")
    p.add_argument("--out", default=None, help="write the normalized action file here")

    p = common("lipschitzify", cmd_lipschitzify, "stage 1 conjugation with a certified PL snapshot")
    _stage1_flags(p)
    p.add_argument("--out", default=None, help="write the snapshot action file here")

    p = common("pipeline", cmd_pipeline, "stage 1 (if needed) then normalization")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="escape sequence depth M")
    p.add_argument("--force-lipschitz", action="store_true", help="run stage 1 even on uniformly bilipschitz input")
    _stage1_flags(p)
    p.add_argument("--snapshot-err", type=_rat, default=SNAPSHOT_ERR, help="sup error of the stage 1 PL snapshot")
    p.add_argument("--out", default=None, help="write the normalized action file here")

    p = common("verify-r", cmd_verify_r, "check membership in R(G, S, K, C, D) on a window")
    p.add_argument("--K", type=_rat, default=None, help="bilipschitz bound (default: the generators' own)")
    p.add_argument("--C", type=_rat, default=Fraction(1), help="lower displacement bound")
    p.add_argument("--D", type=_rat, default=Fraction(4), help="upper displacement bound")
    p.add_argument("--window", type=_rat, nargs=2, metavar=("A", "B"), default=None, help="window (default -20 20)")

    p = common("flow", cmd_flow, "translation-flow diagnostics")
    p.add_argument("--eps", type=_rat, default=DEFAULT_EPS)
    p.add_argument("--S", type=_rat, default=DEFAULT_S, help="largest shift")
    p.add_argument("--W", type=_rat, default=DEFAULT_W, help="window half-width")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="orbit samples for the covering number")
    p.add_argument("--step", type=_rat, default=None, help="almost-period scan step (default S/samples)")
    p.add_argument("--csv", default=None, help="write the almost-period scan here")

    p = common("morphism", cmd_morphism, "tail-slope morphism and translation numbers")
    p.add_argument("--n", type=int, default=DEFAULT_N, help="iterations for translation numbers (power of two)")
    p.add_argument("--pairs", type=int, default=20, help="random word pairs for the additivity test")
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NonConvergence as exc:
        print(f"aplab: numeric non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (AplabError, OSError, ValueError, TypeError) as exc:
        print(f"aplab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL


if __name__ == "__main__":
    sys.exit(main())
