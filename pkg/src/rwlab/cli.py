"""Command-line interface: ``rwlab <group> <command>``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def vertex(text: str):
    """Parse a vertex label: JSON (``3``, ``[1,0]``, ``["s",2,1]``) or a bare string."""
    try:
        v = json.loads(text)
    except json.JSONDecodeError:
        return text
    from .graphs import _freeze

    return _freeze(v)


def vertex_list(text: str) -> list:
    from .graphs import _freeze

    return [_freeze(v) for v in json.loads(text)]


def _params(args) -> dict:
    return {"stretch": args.stretch} if getattr(args, "stretch", None) else {}


def _emit(obj, out: str | None = None) -> None:
    from .runner import dumps

    text = dumps(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_graph(args):
    from .graphs import FiniteGraph, free_window, wired_truncation

    if args.graph:
        return FiniteGraph.loads(Path(args.graph).read_text())
    if not args.family:
        raise ValueError("give --graph FILE or --family")
    if args.wired:
        return wired_truncation(args.family, _params(args), args.radius)
    return free_window(args.family, args.radius, _params(args))


# ---------------------------------------------------------------------------
# handlers


def cmd_graph_build(args) -> int:
    from .graphs import ball_sizes

    F = _load_graph(args)
    doc = F.to_json()
    if args.summary:
        doc = {"family": doc["family"], "radius": doc["radius"], "wired": doc["wired"], "vertices": len(F), "edges": len(F.edges), "connected": F.is_connected()}
        if args.family:
            doc["ball_sizes"] = ball_sizes(args.family, range(1, args.radius + 1), _params(args))
    _emit(doc, args.out)
    return EXIT_OK


def cmd_kernel_green(args) -> int:
    from .laplacian import green_column

    F = _load_graph(args)
    col = green_column(F, args.z, args.y, args.exact)
    xs = args.x or list(F.vertices)
    _emit({"z": args.z, "y": args.y, "values": [[x, col[F.idx(x)]] for x in xs]}, args.out)
    return EXIT_OK


def cmd_kernel_resist(args) -> int:
    from .laplacian import resistances_from

    F = _load_graph(args)
    res = resistances_from(F, args.x, args.y, args.exact)
    _emit({"from": args.x, "resistance": [[y, res[y]] for y in args.y]}, args.out)
    return EXIT_OK


def _spec(args):
    from .boundary import parse_spec

    return parse_spec(args.family, args.spec, **_params(args))


def cmd_boundary_measure(args) -> int:
    from .boundary import harmonic_measure_limit

    h = harmonic_measure_limit(_spec(args), args.set, args.tol, args.cap, args.exact)
    _emit({"spec": _spec(args).name, "radius": h.radius, "converged": h.converged, "iterates": [[r, dev] for r, _, dev in h.iterates], "measure": [[v, m] for v, m in h.measure.as_dict().items()]}, args.out)
    return EXIT_OK if h.converged else EXIT_FAIL


def cmd_boundary_kernel(args) -> int:
    from .boundary import potential_kernel_from_h, potential_kernel_limit
    from .graphs import origin

    o = args.root if args.root is not None else origin(args.family)
    fn = potential_kernel_limit if args.formula == "limit" else potential_kernel_from_h
    k = fn(_spec(args), o, args.targets, args.tol, args.cap, args.exact)
    _emit({"spec": _spec(args).name, "root": o, "formula": k.formula, "radius": k.radius, "converged": k.converged, "iterates": k.iterates, "values": [[x, k(x)] for x in args.targets]}, args.out)
    return EXIT_OK if k.converged else EXIT_FAIL


def cmd_walks_diag(args) -> int:
    from .boundary import parse_spec, window_kernel
    from .graphs import origin
    from .walks import default_checkpoints, martingale_and_ratio_diagnostics

    o = origin(args.family)
    a = window_kernel(_spec(args), o, args.radius)
    other = window_kernel(parse_spec(args.family, args.other, **_params(args)), o, args.radius) if args.other else None
    rep = martingale_and_ratio_diagnostics(a, other, default_checkpoints(args.steps), args.replicas, args.seed)
    _emit({"spec": a.spec.name, "other": args.other, "radius": args.radius, "replicas": args.replicas, "seed": args.seed, "rows": rep.rows()}, args.out)
    return EXIT_OK


def cmd_ust_sample(args) -> int:
    from .boundary import window_kernel
    from .graphs import origin
    from .ust import ends_proxy, wilson_finite, wilson_rooted_at_h

    if args.spec:
        a = window_kernel(_spec(args), origin(args.family), args.radius)
        tree = wilson_rooted_at_h(a, args.seed)
    else:
        F = _load_graph(args)
        root = args.root if args.root is not None else (F.boundary if F.boundary is not None else F.vertices[0])
        tree = wilson_finite(F, root, args.seed)
    doc = tree.to_json()
    if tree.graph.family:
        doc["ends_proxy"] = ends_proxy(tree)
    _emit(doc, args.out)
    return EXIT_OK


def cmd_ust_spine(args) -> int:
    from .ust import canonical_spine, spine_cocycle_profile

    sp = spine_cocycle_profile(args.family, canonical_spine(args.family, 4 * args.n_max), args.n_max, _params(args))
    _emit({"family": args.family, "n_plus": sp.n_plus, "n_minus": sp.n_minus, "cocycle_residual": sp.cocycle_residual, "rerooting_residual": sp.rerooting_residual, "rows": sp.rows()}, args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    from .runner import ConfigError, ScenarioConfig, execute_many, load_configs

    try:
        if args.config:
            cfgs = load_configs(args.config)
        elif args.scenario:
            cfgs = [ScenarioConfig(s, args.seed) for s in args.scenario]
        else:
            raise ConfigError("give --config FILE or --scenario NAME")
        if args.out:
            cfgs = [ScenarioConfig(c.scenario, c.seed, c.options, args.out) for c in cfgs]
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    ok = True
    for path, passed in execute_many(cfgs, args.workers):
        print(f"{'PASS' if passed else 'FAIL'} {path}")
        ok &= passed
    return EXIT_OK if ok else EXIT_FAIL


def cmd_regress(args) -> int:
    from .runner import regress

    rep = regress(args.golden, args.results)
    for name, r in sorted(rep.items()):
        print(f"{r['status'].upper():7s} {name}")
        for m in r["mismatches"]:
            print(f"        {m['metric']}: golden {m['golden']} got {m['value']} (tolerance {m['tolerance']})")
    if not rep:
        print("no golden results found", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if all(r["status"] == "ok" for r in rep.values()) else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def _graph_args(p):
    from .graphs import FAMILIES

    p.add_argument("--graph", help="graph JSON file from 'graph build'")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--radius", type=int, default=4)
    p.add_argument("--stretch", type=int, help="stretch count N for stretched_line")
    p.add_argument("--wired", action="store_true", help="wire the outside of the window to one vertex")


def _spec_args(p):
    from .graphs import FAMILIES

    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--spec", default="right", help="right, left, wired, axis, neg_axis, diagonal, stretch_midpoints or mix:THETA")
    p.add_argument("--stretch", type=int)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--cap", type=int, help="largest window radius")
    p.add_argument("--exact", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rwlab", description="Random walks, harmonic measure from infinity and spanning trees on lattice families.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="group", required=True)

    g = sub.add_parser("graph").add_subparsers(dest="cmd", required=True)
    p = g.add_parser("build", help="build a window or wired truncation")
    _graph_args(p)
    p.add_argument("--summary", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_graph_build)

    k = sub.add_parser("kernel").add_subparsers(dest="cmd", required=True)
    p = k.add_parser("green", help="G_z(x, y): visits to y before hitting z")
    _graph_args(p)
    p.add_argument("--z", type=vertex, required=True)
    p.add_argument("--y", type=vertex, required=True)
    p.add_argument("--x", type=vertex, nargs="*")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_kernel_green)
    p = k.add_parser("resist", help="effective resistance from x")
    _graph_args(p)
    p.add_argument("--x", type=vertex, required=True)
    p.add_argument("--y", type=vertex, nargs="+", required=True)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_kernel_resist)

    b = sub.add_parser("boundary").add_subparsers(dest="cmd", required=True)
    p = b.add_parser("measure", help="harmonic measure of a finite set seen from a boundary point")
    _spec_args(p)
    p.add_argument("--set", type=vertex_list, required=True, help='JSON list, e.g. "[[0,0],[1,0]]"')
    p.add_argument("--out")
    p.set_defaults(func=cmd_boundary_measure)
    p = b.add_parser("kernel", help="potential kernel a(x, o) for a boundary point")
    _spec_args(p)
    p.add_argument("--root", type=vertex)
    p.add_argument("--targets", type=vertex_list, required=True)
    p.add_argument("--formula", choices=("limit", "def"), default="limit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_boundary_kernel)

    w = sub.add_parser("walks").add_subparsers(dest="cmd", required=True)
    p = w.add_parser("diag", help="checkpoint statistics of the Doob-transformed walk")
    _spec_args(p)
    p.add_argument("--other", help="second boundary point for the ratio a_other/a")
    p.add_argument("--radius", type=int, default=512)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_walks_diag)

    u = sub.add_parser("ust").add_subparsers(dest="cmd", required=True)
    p = u.add_parser("sample", help="one uniform spanning tree by Wilson's algorithm")
    _graph_args(p)
    p.add_argument("--spec", help="root the tree at this boundary point instead")
    p.add_argument("--root", type=vertex)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ust_sample)
    p = u.add_parser("spine", help="spine profile of a two-ended family")
    p.add_argument("--family", choices=("line", "ladder", "stretched_line"), required=True)
    p.add_argument("--stretch", type=int)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ust_spine)

    from .scenarios import SCENARIOS

    p = sub.add_parser("run", help="run scenarios and write results, tables and a manifest")
    p.add_argument("--config", help="JSON config (object or list of objects)")
    p.add_argument("--scenario", nargs="+", choices=SCENARIOS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output root (default $RWLAB_OUT or ./rwlab_out)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("regress", help="compare results against golden files")
    p.add_argument("--golden", required=True)
    p.add_argument("--results", required=True)
    p.set_defaults(func=cmd_regress)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
