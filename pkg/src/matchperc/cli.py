"""Command-line front end: tiling, derive, check and percolate subcommands.

Exit codes of ``check``: 0 property present, 1 absent, 2 indeterminate.
Every subcommand exits 2 on unusable input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path

from . import metric, nst, percolation, planegraph, tilings

EXIT_PRESENT, EXIT_ABSENT, EXIT_INDETERMINATE = 0, 1, 2


def _version():
    try:
        return metadata.version("matchperc")
    except metadata.PackageNotFoundError:
        return "0+unknown"


@dataclass
class RunManifest:
    subcommand: str
    params: dict
    seed: int | None = None
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    version: str = field(default_factory=_version)
    graph_hash: str | None = None

    def to_json_dict(self):
        return asdict(self)


def _manifest(args, inputs=(), outputs=(), graph_hash=None):
    params = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return RunManifest(args.command, params, params.get("seed"), list(inputs),
                       [str(o) for o in outputs if o], graph_hash=graph_hash)


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if hasattr(x, "tolist"):
        return x.tolist()
    if hasattr(x, "item"):
        return x.item()
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    if hasattr(x, "value"):
        return x.value
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _clean(obj):
    """Non-finite floats become strings so the JSON stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _write_json(path, manifest, payload):
    text = _dump(_clean({"manifest": manifest.to_json_dict(), **payload}))
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(path, manifest, header, rows):
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(manifest.to_json_dict(), sort_keys=True,
                                          default=_jsonable) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if path:
        Path(path).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _figure_path(args):
    if not getattr(args, "figure", False):
        return None
    if not args.output:
        raise ValueError("--figure needs --output to place the image next to it")
    return str(Path(args.output).with_suffix(".png"))


# -- tiling specs ------------------------------------------------------------------------

def _add_spec_flags(p, radius=True):
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--pq", nargs=2, type=int, metavar=("P", "Q"), help="regular {p,q} tiling")
    grp.add_argument("--archimedean", metavar="CONFIG",
                     help=f"vertex configuration, one of {', '.join(tilings.ARCHIMEDEAN)}")
    grp.add_argument("--custom", metavar="FILE",
                     help="custom periodic tiling JSON, or 'framed-square' for the built-in example")
    grp.add_argument("--spec", metavar="FILE", help="tiling spec JSON file")
    if radius:
        p.add_argument("--radius", type=int, default=3, help="generation radius")


def spec_from_args(args):
    radius = getattr(args, "radius", 3)
    if args.spec:
        d = json.loads(Path(args.spec).read_text())
        d.setdefault("radius", radius)
        return tilings.spec_from_json_dict(d)
    if args.custom:
        custom = (tilings.framed_square_tiling() if args.custom == "framed-square"
                  else tilings.CustomTiling.load(args.custom))
        return tilings.TilingSpec("custom", radius=radius, custom=custom)
    if args.archimedean:
        return tilings.TilingSpec("archimedean", config=args.archimedean, radius=radius)
    p, q = args.pq or (4, 4)
    return tilings.TilingSpec("regular", p, q, radius=radius)


def load_graph(path):
    return planegraph.PlaneGraph.from_json_dict(json.loads(Path(path).read_text()))


def _graph_spec(g):
    d = g.meta.get("spec")
    return tilings.spec_from_json_dict(d) if d else None


# -- subcommands ----------------------------------------------------------------------------

def cmd_tiling(args):
    spec = spec_from_args(args)
    g = tilings.generate(spec)
    s = g.summary()
    print(f"V={s['V']} E={s['E']} F={s['F']} orbits={s['orbits']} mode={s['mode']} "
          f"radius={s['radius']}")
    fig = _figure_path(args)
    man = _manifest(args, outputs=[args.output, fig], graph_hash=g.graph_hash())
    if args.output:
        _write_json(args.output, man, g.to_json_dict())
    if fig:
        from .report import plot_graph
        plot_graph(g, fig, title=g.meta.get("tiling"))
    return 0


def cmd_derive(args):
    g = load_graph(args.graph)
    if args.hat:
        h = planegraph.build_hat(g)
        print(f"facial sites: {h.n_sites} (complete faces: {len(g.complete_faces)})")
        payload = h.to_json_dict()
    else:
        m = planegraph.build_matching(g)
        if not m.diagonals:
            print("triangulation: G* = G")
        print(f"diagonals: {len(m.diagonals)} (complete faces: {len(g.complete_faces)})")
        payload = m.to_json_dict()
    man = _manifest(args, [args.graph], [args.output], g.graph_hash())
    if args.output:
        _write_json(args.output, man, payload)
    return 0


_EXIT = {nst.Verdict.PRESENT: EXIT_PRESENT, nst.Verdict.ABSENT: EXIT_ABSENT,
         nst.Verdict.INDETERMINATE: EXIT_INDETERMINATE}


def _check_pi(args, g, m):
    v = g.root if args.vertex is None else args.vertex
    try:
        k = planegraph.constants(g, m)
        zeta, A_G = k.zeta, k.A
        if args.hat:
            h = planegraph.build_hat(g)
            res = nst.check_pi_hat_A(h, m, v, args.pi_a, zeta, A_G, args.budget)
        else:
            res = nst.check_pi_A(m, v, args.pi_a, zeta, A_G, args.budget)
    except planegraph.InsufficientGraphError as exc:
        if not m.diagonals:
            res = nst.PiResult(nst.Verdict.ABSENT, None, 0, ["no diagonals: G* = G"])
        else:
            res = nst.PiResult(nst.Verdict.INDETERMINATE, None, 0, [str(exc)])
        zeta = A_G = None
    if res.witness is not None and args.witness:
        Path(args.witness).write_text(_dump(res.witness.to_json_dict()))
    print(f"Pi_A (A={args.pi_a}, {'hat' if args.hat else 'star'}): {res.verdict.value}")
    payload = {"check": "pi-a", "A": args.pi_a, "vertex": v, "zeta": zeta, "A_G": A_G,
               "result": res.to_json_dict()}
    return _EXIT[res.verdict], payload, (res.witness.path if res.witness else None)


def _check_metric(args, g, m):
    reports = metric.metric_summary(g, m)
    verdicts = [r.verdict for r in reports]
    payload = {"check": "metric", "diagonals": [r.to_json_dict() for r in reports]}
    highlight = None
    if "maximal" in verdicts:
        d = metric.select_diagonal(m)
        if not metric.is_maximal(m, d).maximal:
            d = reports[verdicts.index("maximal")].edge
        spec = _graph_spec(g)
        if args.tube and spec is not None:
            host, dt = metric.tube_matching(spec, g, d, args.tube)
        else:
            host, dt = m, d
        plus, minus, asm = metric.two_sided(host, dt, args.window)
        payload.update(selected=list(d), trace_plus=plus.to_json_dict(),
                       trace_minus=minus.to_json_dict(), assembly=asm.to_json_dict())
        code = EXIT_PRESENT if asm.nst and not asm.chords else EXIT_INDETERMINATE
        if host is m:
            highlight = asm.path
        print(f"maximal diagonal {tuple(d)}: two-sided path with "
              f"{asm.plus_steps}+{asm.minus_steps} steps, nst={asm.nst}")
    elif reports and all(v == "not-maximal" for v in verdicts):
        code = EXIT_ABSENT
        print(f"no maximal diagonal among {len(reports)} tested")
    else:
        code = EXIT_INDETERMINATE
        hints = sorted({r.hint for r in reports if r.hint})
        print("maximality indeterminate" + (f": {hints[0]}" if hints else ""))
    return code, payload, highlight


def _check_weak(args, g, m):
    s, t = args.weak
    near = sorted({(x, y) for x, y, _ in m.diagonals
                   if max(g.root_distance(x), g.root_distance(y)) <= 2})
    for x, y in near:
        for d in ((x, y), (y, x)):
            asm = metric.two_sided(m, d)[2]
            bound = metric.max_edge_span(m, d)
            if metric.weak_criterion(m, d, s, t, asm, bound):
                path = asm.path[asm.offset + s:asm.offset + t + 1]
                print(f"weak criterion holds for d={d}, s={s}, t={t}")
                return EXIT_PRESENT, {"check": "weak", "s": s, "t": t, "diagonal": list(d),
                                      "span": asm.p(t) - asm.p(s), "bound": bound,
                                      "path": path}, path
    print(f"weak criterion fails for s={s}, t={t} on {len(near)} diagonals")
    return EXIT_ABSENT, {"check": "weak", "s": s, "t": t, "diagonal": None}, None


def cmd_check(args):
    g = load_graph(args.graph)
    m = planegraph.build_matching(g)
    if args.pi_a is not None:
        code, payload, hl = _check_pi(args, g, m)
    elif args.metric:
        code, payload, hl = _check_metric(args, g, m)
    else:
        code, payload, hl = _check_weak(args, g, m)
    payload["exit_code"] = code
    fig = _figure_path(args)
    man = _manifest(args, [args.graph], [args.output, args.witness, fig], g.graph_hash())
    _write_json(args.output, man, payload)
    if fig:
        from .report import plot_graph
        plot_graph(g, fig, m, highlight=hl if hl and max(hl) < len(g) else None)
    return code


def _instances(spec, host, n, offset):
    return percolation.instance_from_spec(spec, host, n, offset)


def cmd_percolate(args):
    percolation.set_threads(args.threads)
    spec = spec_from_args(args)
    fig = _figure_path(args)
    if args.pc:
        return _percolate_pc(args, spec, fig)
    if args.sweep:
        return _percolate_sweep(args, spec, fig)
    return _percolate_pivotal(args, spec, fig)


def _percolate_sweep(args, spec, fig):
    rows, results = [], []
    hashes = []
    for host in args.host:
        inst = _instances(spec, host, args.n, args.arc_offset)
        ss = args.s if host == "hat" else [0.0]
        res = percolation.sweep(inst, args.p, ss, args.trials, args.seed)
        results.append(res)
        hashes.append(inst.graph_hash)
        rows += res.rows()
    man = _manifest(args, outputs=[args.output, fig], graph_hash=",".join(sorted(set(hashes))))
    _write_csv(args.output, man, ["host", "n", "p", "s", "theta", "stderr", "trials", "seed"],
               rows)
    if fig:
        from .report import plot_sweep
        for i, res in enumerate(results):
            path = fig if i == 0 else str(Path(fig).with_name(
                f"{Path(fig).stem}-{res.host}.png"))
            plot_sweep(res, path)
    return 0


def _percolate_pc(args, spec, fig):
    estimates, curves = [], {}
    for host in args.host:
        insts = {n: _instances(spec, host, n, args.arc_offset) for n in args.sizes}
        est = percolation.estimate_pc(spec, host, args.sizes, args.trials, args.seed,
                                      args.method, args.arc_offset, insts)
        estimates.append(est)
        print(f"{host}: p_c = {est.pc:.5f} +- {est.pc_err:.5f} "
              f"(p*(n) = {', '.join(f'{x:.5f}' for x in est.p_star)})")
        if fig and args.method == "newman-ziff":
            for i, n in enumerate(args.sizes):
                curves[f"{host}, n={n}"] = percolation.crossing_thresholds(
                    insts[n], args.trials, args.seed + i)
    payload = {"estimates": [e.to_json_dict() for e in estimates]}
    hosts = [e.host for e in estimates]
    if "g" in hosts and "star" in hosts:
        a, b = estimates[hosts.index("g")], estimates[hosts.index("star")]
        payload["sum"] = a.pc + b.pc
        payload["sum_err"] = math.hypot(a.pc_err, b.pc_err)
        payload["gap"] = a.pc - b.pc
        print(f"p_c(G) + p_c(G*) = {payload['sum']:.5f} +- {payload['sum_err']:.5f}")
    csv_path = str(Path(args.output).with_suffix(".csv")) if args.output else None
    man = _manifest(args, outputs=[args.output, csv_path, fig])
    _write_json(args.output, man, payload)
    if csv_path:
        rows = [(e.host, n, p, err) for e in estimates
                for n, p, err in zip(e.sizes, e.p_star, e.p_star_err)]
        _write_csv(csv_path, man, ["host", "n", "p_star", "stderr"], rows)
    if fig:
        from .report import plot_crossing
        plot_crossing(curves, fig)
    return 0


def _percolate_pivotal(args, spec, fig):
    host = args.host[0]
    inst = _instances(spec, host, args.n, args.arc_offset)
    p, s = args.p[0], args.s[0]
    if args.russo:
        res = percolation.russo_derivatives(inst, p, s, args.trials, args.seed)
        payload = {"russo": res.to_json_dict()}
        print(f"dtheta/dp = {res.dtheta_dp:.4f} (fd {res.fd_dp:.4f}), "
              f"dtheta/ds = {res.dtheta_ds:.4f} (fd {res.fd_ds:.4f})")
    else:
        er = percolation.enhancement_ratio(inst, p, s, args.z, args.M, args.trials, args.seed)
        st = er.stats
        payload = {"enhancement": er.to_json_dict(), "pivotal": st.to_json_dict()}
        print(f"P(z in Pi) = {er.p_pivotal:.4g}, P(Di meets window) = {er.p_window:.4g}, "
              f"ratio = {er.ratio:.4g} ({er.ratio_flag}); verified {st.verified}, "
              f"mismatches {st.mismatches}")
        if fig:
            from .report import plot_pivotal
            g = tilings.generate(tilings.TilingSpec(spec.kind, spec.p, spec.q, spec.config,
                                                    args.n + 1, spec.custom))
            plot_pivotal(inst, g, st, fig)
    man = _manifest(args, outputs=[args.output, fig], graph_hash=inst.graph_hash)
    _write_json(args.output, man, payload)
    return 0


# -- parser -----------------------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="matchperc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tiling", help="generate a ball of a tiling as graph JSON")
    _add_spec_flags(p)
    p.add_argument("-o", "--output")
    p.add_argument("--figure", action="store_true", help="also draw the ball (PNG next to output)")
    p.set_defaults(func=cmd_tiling)

    p = sub.add_parser("derive", help="build G* or G-hat from graph JSON")
    p.add_argument("graph")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--matching", action="store_true")
    grp.add_argument("--hat", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("check", help="property checks; exit 0 present, 1 absent, 2 indeterminate")
    p.add_argument("graph")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--pi-a", type=int, metavar="A", help="local nst path property at radius A")
    grp.add_argument("--metric", action="store_true", help="maximal diagonal and two-sided path")
    grp.add_argument("--weak", nargs=2, type=int, metavar=("S", "T"),
                     help="weak criterion on the window (nu_S, ..., nu_T)")
    p.add_argument("--hat", action="store_true", help="with --pi-a: search in G-hat")
    p.add_argument("--vertex", type=int, help="centre vertex (default: root)")
    p.add_argument("--budget", type=int, default=nst.DEFAULT_BUDGET)
    p.add_argument("--witness", help="write the witness path JSON here")
    p.add_argument("--tube", type=float, default=0.0,
                   help="with --metric: trace in a tube of this half-length instead of the ball")
    p.add_argument("--window", type=float, default=math.inf,
                   help="with --metric: stop traces beyond this p-value")
    p.add_argument("-o", "--output")
    p.add_argument("--figure", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("percolate", help="site percolation sweeps, p_c estimates, pivotality")
    _add_spec_flags(p, radius=False)
    p.add_argument("--host", nargs="+", choices=percolation.HOSTS, default=["g"])
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--sweep", action="store_true", help="theta_n(p, s) grid to CSV")
    mode.add_argument("--pc", action="store_true", help="critical point from crossing probabilities")
    mode.add_argument("--pivotal", action="store_true", help="pivotal statistics and ratio")
    mode.add_argument("--russo", action="store_true", help="derivatives via pivotal counts")
    p.add_argument("--n", type=int, default=16, help="region radius")
    p.add_argument("--sizes", nargs="+", type=int, default=[32, 64])
    p.add_argument("--p", nargs="+", type=float, default=[0.5])
    p.add_argument("--s", nargs="+", type=float, default=[0.0])
    p.add_argument("--M", type=int, default=2, help="window radius about the probe vertex")
    p.add_argument("--z", type=int, help="probe vertex, local id (default: at distance n/4)")
    p.add_argument("--method", choices=["newman-ziff", "crossing-half"], default="newman-ziff")
    p.add_argument("--arc-offset", type=float, default=0.0,
                   help="rotation (radians) of the four boundary arcs")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, help=f"worker cap (default ${percolation.THREADS_ENV})")
    p.add_argument("-o", "--output")
    p.add_argument("--figure", action="store_true")
    p.set_defaults(func=cmd_percolate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (tilings.TilingError, planegraph.StructureError, planegraph.InsufficientGraphError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE


if __name__ == "__main__":
    sys.exit(main())
