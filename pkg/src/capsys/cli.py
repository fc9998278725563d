"""``capsys`` command-line front end.

Every subcommand writes its JSON/CSV/SVG artifacts into ``--out`` and then,
last, a ``manifest.json`` listing them.  Exit codes: 0 ok, 2 usage or body
spec error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import artifacts as art
from . import capacities as cap
from . import dual
from . import geometry as geo
from . import john
from . import paper_examples as pe
from . import zoll
from .loops import TimeLoop

log = logging.getLogger("capsys")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

DEFAULTS = {"modes": 24, "grid": None, "starts": 8, "seed": 0, "tol": 1e-9, "threads": None,
            "out": "capsys_out", "body": None, "ellipsoid": None, "polydisc": None}


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing


def _common():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("body (choose one)")
    g.add_argument("--body", metavar="FILE", help="JSON body specification")
    g.add_argument("--ellipsoid", metavar="a1,a2,...", help="normal-form ellipsoid E(a1, ..., an)")
    g.add_argument("--polydisc", metavar="a,n", help="polydisc P(a, ..., a) with n factors")
    s = p.add_argument_group("solver")
    s.add_argument("--modes", type=int, metavar="N", help="Fourier truncation (default 24)")
    s.add_argument("--grid", type=int, metavar="M", help="time grid (default 8N)")
    s.add_argument("--starts", type=int, metavar="S", help="multistart runs (default 8)")
    s.add_argument("--seed", metavar="U64", help="base seed (default 0, or $CAPSYS_SEED)")
    s.add_argument("--tol", type=float, metavar="X", help="final stationarity tolerance (default 1e-9)")
    s.add_argument("--threads", type=int, metavar="T", help="worker threads (default: logical cores)")
    o = p.add_argument_group("output")
    o.add_argument("--out", metavar="DIR", help="output directory (default capsys_out)")
    o.add_argument("--config", metavar="FILE", help="JSON file with defaults for any of these flags")
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(
        prog="capsys", description="Symplectic capacities, systoles and the systolic index of convex bodies.")
    parser.add_argument("--version", action="version", version=f"capsys {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("capacity", parents=[common], help="first capacity (closed form and numeric)")
    sub.add_parser("systole", parents=[common], help="solve for a systole and certify it")
    sub.add_parser("index", parents=[common], help="systolic index from the capacity sequence")
    sub.add_parser("zoll", parents=[common], help="generalized Zoll flag and systole-space heuristics")
    sub.add_parser("john", parents=[common], help="enclosing ellipsoid and index/capacity bounds")
    ck = sub.add_parser("check", parents=[common], help="certify a loop CSV as a closed characteristic")
    ck.add_argument("--loop", metavar="CSV", required=True, help="loop samples (t,x1,y1,...,xn,yn)")
    ck.add_argument("--action", type=float, metavar="T", help="action to certify at (default: loop action)")
    ck.add_argument("--max-residual", type=float, default=1e-6, metavar="X",
                    help="largest inclusion residual accepted (default 1e-6)")
    ck.add_argument("--corner-window", type=int, default=2, metavar="W",
                    help="samples skipped on each side of a corner (default 2)")
    dm = sub.add_parser("demo", parents=[common], help="reproduce the worked examples")
    dm.add_argument("name", choices=("bxb1-w11", "regressions", "examples"))
    return parser


def _read_json(path, what):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None


def resolve_settings(args, environ=None):
    """Merge flags > config file > ``CAPSYS_SEED`` > built-in defaults."""
    environ = os.environ if environ is None else environ
    conf = {}
    if args.config:
        conf = _read_json(args.config, "config file")
        if not isinstance(conf, dict):
            raise UsageError(f"{args.config}: config must be a JSON object")
        unknown = set(conf) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"{args.config}: unknown config keys {sorted(unknown)}")
    out = dict(DEFAULTS)
    if "CAPSYS_SEED" in environ:
        out["seed"] = environ["CAPSYS_SEED"]
    out.update(conf)
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    try:
        seed = int(out["seed"])
    except (TypeError, ValueError):
        raise UsageError(f"seed must be an integer, got {out['seed']!r}") from None
    if not 0 <= seed < 2**64:
        raise UsageError("seed must lie in [0, 2^64)")
    out["seed"] = seed
    if out["threads"] is None:
        out["threads"] = os.cpu_count() or 1
    if sum(out[k] is not None for k in ("body", "ellipsoid", "polydisc")) > 1:
        raise UsageError("give at most one of --body, --ellipsoid, --polydisc")
    return out


def solve_config(s):
    try:
        return dual.SolveConfig(modes=int(s["modes"]), grid=None if s["grid"] is None else int(s["grid"]),
                                starts=int(s["starts"]), seed=s["seed"], tol=float(s["tol"]),
                                threads=max(int(s["threads"]), 1))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid solver settings: {exc}") from None


def _floats(text, flag):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag} expects comma-separated numbers, got {text!r}") from None


class Target:
    """What a command runs on: a body oracle, a closed form, or both."""

    def __init__(self, spec, body, closed, n, source):
        self.spec = spec
        self.body = body
        self.closed = closed
        self.n = n
        self.source = source

    def sequence(self, m=None):
        if self.closed is None:
            return None
        return self.closed(4 * self.n if m is None else m)

    def shadows(self):
        if self.body is not None:
            return [art.body_shadow(self.body, j) for j in range(self.n)]
        a = self.spec["a"]
        return [art.disc_shadow(np.sqrt(a / np.pi)) for _ in range(self.n)]


def _closed_form(spec):
    kind = spec.get("type")
    if kind == "ellipsoid":
        a = list(spec["a"])
        return lambda m: cap.ellipsoid_sequence(a, m)
    if kind == "polydisc":
        return lambda m: cap.polydisc_sequence(spec["a"], spec["n"], m)
    if kind == "scale":
        inner = _closed_form(spec["body"])
        lam = float(spec["lambda"])
        return None if inner is None else (lambda m: inner(m).scaled(lam**2))
    if kind == "translate":
        return _closed_form(spec["body"])
    return None


def resolve_target(s):
    if s["ellipsoid"] is not None:
        spec = {"type": "ellipsoid", "a": _floats(s["ellipsoid"], "--ellipsoid")}
        source = f"--ellipsoid {s['ellipsoid']}"
    elif s["polydisc"] is not None:
        vals = _floats(s["polydisc"], "--polydisc")
        if len(vals) != 2 or vals[1] != int(vals[1]) or vals[1] < 1:
            raise UsageError("--polydisc expects a,n with n a positive integer")
        spec = {"type": "polydisc", "a": vals[0], "n": int(vals[1])}
        source = f"--polydisc {s['polydisc']}"
    elif s["body"] is not None:
        spec = _read_json(s["body"], "body file")
        source = str(s["body"])
    else:
        raise UsageError("a body is required: --body FILE, --ellipsoid a1,..., or --polydisc a,n")
    try:
        if isinstance(spec, dict) and spec.get("type") == "polydisc":
            if not spec.get("a", 0) > 0 or int(spec.get("n", 0)) < 1:
                raise ValueError("polydisc needs a > 0 and n >= 1")
            body, n = None, int(spec["n"])
        else:
            body = geo.body_from_spec(spec)
            n = body.n
        closed = _closed_form(spec)
        if closed is not None:
            closed(1)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"{source}: invalid body: {exc}") from None
    return Target(spec, body, closed, n, source)


# ---------------------------------------------------------------------------
# output bookkeeping


class Run:
    def __init__(self, command, settings, cfg, target):
        self.command = command
        self.settings = settings
        self.cfg = cfg
        self.target = target
        self.out = Path(settings["out"])
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = self.out / "manifest.json"
        if self.manifest.exists():
            self.manifest.unlink()
        self.artifacts = []
        self.start = time.perf_counter()

    def path(self, name):
        self.artifacts.append(name)
        return self.out / name

    def json(self, name, obj):
        art.write_json(self.path(name), obj)

    def csv(self, name, loop):
        loop.write_csv(self.path(name))

    def svg(self, name, loops, labels, title):
        art.loops_svg(self.path(name), [lp.samples for lp in loops], self.target.shadows(), labels, title)

    def finish(self, status):
        cfg = self.cfg
        man = {
            "command": self.command,
            "body_spec_path": self.settings["body"],
            "body_source": self.target.source if self.target else None,
            "config": {"modes": cfg.modes, "grid": cfg.grid, "starts": cfg.starts, "seed": cfg.seed,
                       "tol": cfg.tol, "threads": cfg.threads},
            "out": str(self.out),
            "artifacts": list(self.artifacts),
            "status": status,
            "wall_time": time.perf_counter() - self.start,
            "version": __version__,
            "seed": cfg.seed,
        }
        art.write_json(self.manifest, man)


def _need_body(target, what):
    if target.body is None:
        raise UsageError(f"{what} needs a body oracle; polydiscs only have closed forms")
    return target.body


def _original(target, loop):
    return loop + target.body.offset


def _run_summary(results):
    return [{"run": r.extras.get("run"), "value": r.value, "converged": bool(r.converged),
             "iterations": r.extras.get("iterations")} for r in results]


def _solve(run, stem):
    """Solve, write the best systole as JSON/CSV/SVG; returns all results."""
    body = run.target.body
    try:
        results = dual.solve(body, run.cfg)
    except ValueError as exc:
        raise NumericalFailure(str(exc)) from None
    best = results[0]
    loop = _original(run.target, best.loop)
    run.csv(f"{stem}.csv", loop)
    run.svg(f"{stem}.svg", [loop], [f"systole, T = {best.T:.6g}"], f"{stem}")
    info = best.to_json(f"{stem}.csv")
    info.update({"value": best.value, "converged": bool(best.converged), "offset": body.offset.tolist()})
    return results, info


def _converged(results):
    return bool(results and results[0].converged and np.isfinite(results[0].value))


# ---------------------------------------------------------------------------
# commands


def cmd_capacity(run):
    t = run.target
    out = {"body": t.spec, "n": t.n}
    status = "ok"
    seq = t.sequence()
    if t.body is not None:
        results, info = _solve(run, "systole")
        c1 = results[0].value
        out["numeric"] = {"c1": c1, "systole": info, "runs": _run_summary(results)}
        if seq is None:
            seq = cap.numeric_sequence(c1, run.cfg)
        if not _converged(results):
            status = "not_converged"
    out["sequence"] = seq.to_json()
    out["c1"] = seq.c1
    out["c1_provenance"] = seq.provenance[0]
    if t.body is not None:
        out["systolic_ratio"] = cap.systolic_ratio(seq.c1, t.body.volume(), t.n)
    run.json("capacity.json", out)
    print(f"c1 = {seq.c1:.10g} ({seq.provenance[0]})")
    return status


def cmd_systole(run):
    _need_body(run.target, "systole")
    results, info = _solve(run, "systole")
    info["runs"] = _run_summary(results)
    run.json("systole.json", info)
    print(f"T = {info['T']:.10g}, inclusion residual {info['inclusion_residual']:.3g}, "
          f"boundary residual {info['boundary_residual']:.3g}")
    return "ok" if _converged(results) else "not_converged"


def cmd_index(run):
    t = run.target
    out = {"body": t.spec, "n": t.n}
    seq = t.sequence()
    status = "ok"
    if seq is not None:
        idx, lower = cap.sys_index(seq, with_flag=True)
        zl = cap.is_generalized_zoll(seq, t.n)
        out.update({"index": idx, "index_is_lower_bound": lower, "generalized_zoll": zl,
                    "zoll": zl, "sequence": seq.to_json()})
        print(f"index = {idx}{' (lower bound)' if lower else ''}, generalized zoll = {str(zl).lower()}")
    else:
        # only c_1 is computable, so only bounds can be reported
        results = dual.minimize(t.body, run.cfg)
        c1 = results[0].value
        symmetric = bool(john._is_symmetric(john.body_vertices(t.body))) \
            if john.body_vertices(t.body) is not None else None
        out.update({"index": None, "generalized_zoll": None, "zoll": None,
                    "c1_numeric": c1, "centrally_symmetric": symmetric,
                    "index_bounds": {f: cap.index_bound(t.n, f) for f in cap.INDEX_FLAVORS}})
        if not (results[0].converged and np.isfinite(c1)):
            status = "not_converged"
        print(f"no closed-form sequence; c1 = {c1:.10g}, index <= {cap.index_bound(t.n)}")
    run.json("index.json", out)
    return status


def cmd_zoll(run):
    t = run.target
    out = {"body": t.spec, "n": t.n}
    seq = t.sequence()
    status = "ok"
    if seq is not None:
        out["generalized_zoll"] = cap.is_generalized_zoll(seq, t.n)
        out["sequence"] = seq.to_json()
    else:
        out["generalized_zoll"] = None
    if t.body is not None:
        results = dual.solve(t.body, run.cfg)
        sel = zoll.select_systoles([r for r in results if r.converged] or results)
        rep = zoll.report(sel, t.body, seed=run.cfg.seed)
        clusters = []
        reps = []
        for i, c in enumerate(rep["clusters"]):
            name = f"cluster_{i:03d}.csv"
            loop = _original(t, c.representative.loop)
            run.csv(name, loop)
            reps.append(loop)
            clusters.append({"action": c.action, "members": c.members, "spread": c.spread,
                             "inclusion_residual": c.representative.inclusion_residual,
                             "loop_csv": name})
        run.svg("clusters.svg", reps, [f"cluster {i}" for i in range(len(reps))], "cluster representatives")
        out["heuristics"] = {"systoles": len(sel), "runs": len(results), "clusters": clusters,
                             "coverage": rep["coverage"], "uniqueness": rep["uniqueness"],
                             "tolerances": rep["tolerances"]}
        if not _converged(results):
            status = "not_converged"
    run.json("zoll.json", out)
    print(f"generalized zoll = {json.dumps(out['generalized_zoll'])}")
    if "heuristics" in out:
        h = out["heuristics"]
        print(f"{len(h['clusters'])} cluster(s), coverage {h['coverage']:.3g}, "
              f"uniqueness {str(h['uniqueness']).lower()}")
    return status


def cmd_john(run):
    t = run.target
    body = _need_body(run.target, "john")
    try:
        res = john.john_for_body(body)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sw = john.verify_sandwich(body, res, seed=run.cfg.seed)
    seq = t.sequence()
    status = "ok"
    if seq is not None:
        c1 = seq.c1
    else:
        results = dual.minimize(body, run.cfg)
        c1 = results[0].value
        if not results[0].converged:
            status = "not_converged"
    out = {"body": t.spec, "n": t.n}
    out.update(res.to_json())
    out["center"] = (res.center + body.offset).tolist()
    out["iterations"] = res.iterations
    out["centrally_symmetric"] = res.centrally_symmetric
    out["sandwich"] = {"ok": bool(sw), "outer_ok": sw.outer_ok, "inner_ok": sw.inner_ok,
                       "margin": sw.margin, **sw.details}
    out["bounds"] = john.capacity_bound_report(body, res, c1=c1)
    run.json("john.json", out)
    print(f"c1 bound {out['bounds']['c1_bound']:.6g} vs c1 {c1:.6g}; sandwich {'ok' if sw else 'FAILED'}")
    if not sw or not out["bounds"]["consistent"]:
        status = "bound_violated"
    return status


def cmd_check(run, args):
    body = _need_body(run.target, "check")
    try:
        loop = TimeLoop.read_csv(args.loop)
    except (OSError, ValueError, IndexError) as exc:
        raise UsageError(f"{args.loop}: cannot read loop: {exc}") from None
    if loop.dim != body.dim:
        raise UsageError(f"{args.loop}: loop lives in R^{loop.dim}, body in R^{body.dim}")
    work = loop + (-body.offset)
    T = work.action() if args.action is None else args.action
    if not T > 0:
        raise UsageError("the action must be positive")
    res, info = dual.inclusion_residual(body, work, T, corner_window=args.corner_window, return_info=True)
    bres = float(np.max(np.abs(geo.gauge2(body, work.samples) - 1.0)))
    ok = bool(res <= args.max_residual)
    run.svg("check.svg", [loop], [f"loop, T = {T:.6g}"], "checked loop")
    run.json("check.json", {"loop_csv": str(args.loop), "T": T, "sampled_action": work.action(),
                            "inclusion_residual": res, "boundary_residual": bres,
                            "corners": info["corners"], "excluded": info["excluded"],
                            "max_residual": args.max_residual, "certified": ok})
    print(f"inclusion residual {res:.3g} ({'certified' if ok else 'NOT certified'}), "
          f"boundary residual {bres:.3g}")
    return "ok" if ok else "not_certified"


def _demo_w11(run):
    M = run.settings["grid"] or pe.REGRESSION_GRID
    g = pe.bxb1_gamma(M)
    rows = []
    for n in (1, 2, 4, 8, 16):
        gn = pe.bxb1_gamma_n(n, M)
        sup = float(np.abs(g.samples - gn.samples).max())
        rows.append({"n": n, "sup": sup, "sup_bound": 1 / n, "w11_gap": pe.w11_gap(n, M),
                     "action": gn.action()})
    body = geo.bxb1()
    run.target = Target(body.to_spec(), body, None, 2, "bxb1")
    g4 = pe.bxb1_gamma_n(4, M)
    run.csv("gamma.csv", g + body.offset)
    run.csv("gamma_4.csv", g4 + body.offset)
    run.svg("bxb1_w11.svg", [g + body.offset, g4 + body.offset], ["gamma", "gamma_4"], "gamma vs gamma_4")
    run.json("bxb1_w11.json", {"grid": M, "rows": rows})
    lines = ["n,sup,sup_bound,w11_gap,action"]
    lines += [f"{r['n']},{r['sup']:.17g},{r['sup_bound']:.17g},{r['w11_gap']:.17g},{r['action']:.17g}"
              for r in rows]
    art.write_atomic(run.path("bxb1_w11.csv"), "\n".join(lines) + "\n")
    print(f"{'n':>3}  {'sup|g - g_n|':>14}  {'1/n':>8}  {'W11 gap':>10}")
    for r in rows:
        print(f"{r['n']:>3}  {r['sup']:>14.6g}  {r['sup_bound']:>8.4g}  {r['w11_gap']:>10.6g}")
    ok = all(r["sup"] <= r["sup_bound"] + 1e-12 and r["w11_gap"] >= 2 for r in rows)
    return "ok" if ok else "check_failed"


def cmd_demo(run, args):
    run.json("examples.json", pe.manifest())
    if args.name == "examples":
        return "ok"
    if args.name == "bxb1-w11":
        return _demo_w11(run)
    cfg = run.cfg
    rows = pe.run_regressions(modes=cfg.modes, starts=cfg.starts, seed=cfg.seed)
    table = pe.format_table(rows)
    run.json("regressions.json", rows)
    art.write_atomic(run.path("regressions.txt"), table + "\n")
    print(table)
    return "ok" if all(r["pass"] for r in rows) else "check_failed"


COMMANDS = {"capacity": cmd_capacity, "systole": cmd_systole, "index": cmd_index,
            "zoll": cmd_zoll, "john": cmd_john}


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="capsys: %(levelname)s: %(message)s")
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
        cfg = solve_config(settings)
        needs_body = args.command not in ("demo",)
        target = resolve_target(settings) if needs_body else None
        run = Run(["capsys", *argv], settings, cfg, target)
    except UsageError as exc:
        print(f"capsys: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "check":
            status = cmd_check(run, args)
        elif args.command == "demo":
            status = cmd_demo(run, args)
        else:
            status = COMMANDS[args.command](run)
    except UsageError as exc:
        print(f"capsys: error: {exc}", file=sys.stderr)
        run.finish("usage_error")
        return EXIT_USAGE
    except (NumericalFailure, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"capsys: numerical failure: {exc}", file=sys.stderr)
        run.finish("numerical_failure")
        return EXIT_NUMERIC
    run.finish(status)
    if status != "ok":
        print(f"capsys: {status.replace('_', ' ')}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
