"""Command line entry point.

Exit codes: 0 when everything checked holds, 1 when a property fails, 2 on
usage or configuration errors.
"""

import argparse
import json
import logging
import os
from pathlib import Path
import sys
import warnings

from . import suites
from .adjacency import AmbiguousContact, audit_transitivity, check_B2, check_nested, ds_type_check
from .boundary import BoundaryError, homeomorphism_diagnostic, parse_pairs, parse_pairs_text
from .chain import KernelTable, occupancy_report
from .config import ConfigError, fixture_names, load
from .ifs import ExactModeRequired, IfsError, osc_probe
from .kernel import check_B1, write_kernel_csv
from .render import RenderError, render
from .words import InvalidWord, parse_word

log = logging.getLogger("fractal_martin")

CHECKS = ("transitivity", "b2", "nested", "ds-type", "b1", "osc")


class UsageError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    return str(x)


def _emit(args, payload, lines):
    if args.json:
        print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _config(args):
    return load(args.config, args.masses)


def cmd_verify(args) -> int:
    cfg = _config(args)
    chain = cfg.chain()
    if args.inject_fault:
        v, w = (parse_word(t, chain.n_letters) for t in args.inject_fault.split(":"))
        chain.inject_fault(v, w, chain.green(v, w) + 1)
    try:
        results = suites.run(chain, args.depth, args.suite)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ok = all(r["pass"] for r in results)
    lines = [f"{cfg.name} masses={chain.masses} depth={args.depth}"]
    for r in results:
        if r.get("skipped"):
            status = f"SKIP ({r['skipped']})"
        else:
            status = "PASS" if r["pass"] else "FAIL"
        lines.append(f"  {r['suite']:<15} {status:<6} checked={r['checked']}")
        if r["counterexample"]:
            lines.append(f"    counterexample: {r['counterexample']}")
    _emit(args, {"config": cfg.name, "depth": args.depth, "pass": ok, "suites": results}, lines)
    return 0 if ok else 1


def cmd_audit(args) -> int:
    cfg = _config(args)
    space = cfg.space()
    check = args.check
    fmt = space.format
    if check == "transitivity":
        per_level = []
        bad = []
        for n in range(args.depth + 1):
            v = audit_transitivity(n, space)
            per_level.append({"depth": n, "violations": len(v), "max_class_size": max(len(c) for c in space.level(n).classes)})
            bad += [[fmt(x) for x in t] for t in v]
        ok = not bad
        payload = {"check": check, "depth": args.depth, "pass": ok, "levels": per_level, "violations": bad[:200]}
        lines = [f"{cfg.name}: transitivity to depth {args.depth}: {'clean' if ok else f'{len(bad)} violations'}"]
        lines += [f"  depth {r['depth']}: {r['violations']} violations, max R = {r['max_class_size']}" for r in per_level]
        lines += [f"  {u} ~ {v} ~ {w} but not {u} ~ {w}" for u, v, w in bad[:20]]
    elif check == "b2":
        rep = check_B2(args.depth, space, cfg.masses)
        ok = rep["pass"]
        payload = {"check": check, **rep}
        lines = [f"{cfg.name}: (B2) to depth {args.depth}: {'pass' if ok else 'FAIL'}"]
        lines += [f"  fails at {r['word']}" for r in rep["failing"][:20]]
    elif check == "nested":
        rep = check_nested(args.depth, cfg.ifs)
        ok = rep["pass"]
        payload = {"check": check, **rep}
        lines = [f"{cfg.name}: nestedness evidence at depth {args.depth}: {'pass' if ok else 'FAIL'}"]
        lines += [f"  {k}: {rep[k]}" for k in ("connected", "nesting", "single_vertex_in_child", "at_most_one_point")]
    elif check == "ds-type":
        rep = ds_type_check(args.depth, cfg.chain(space))
        ok = rep["pass"]
        payload = {"check": check, **rep}
        lines = [f"{cfg.name}: DS-type conditions at depth {args.depth}: {'pass' if ok else 'FAIL'}"]
        lines += [f"  {k}: {rep[k]}" for k in ("LW1", "LW2", "LW3", "LW4", "LW5")]
        lines += [f"  inf probability {rep['inf_probability']} (depth {args.depth - 1}: {rep['inf_probability_previous']})"]
    elif check == "b1":
        rep = check_B1(cfg.chain(space), depth=args.depth)
        ok = rep["pass"]
        payload = {"check": check, "depth": rep["depth"], "pass": ok, "failing": rep["failing"], "rows": rep["rows"]}
        lines = [f"{cfg.name}: (B1) evidence on {len(rep['rows'])} kernel sequences: {'pass' if ok else 'FAIL'}"]
        lines += [f"  v={r['v']} along {r['xi']} neither stabilizes nor contracts" for r in rep["failing"][:20]]
    elif check == "osc":
        rep = osc_probe(cfg.ifs)
        ok = rep["status"] != "fail"
        payload = {"check": check, "pass": ok, **rep}
        lines = [f"{cfg.name}: open set condition probe: {rep['status']}"]
    else:
        raise UsageError(f"unknown check {check!r}")
    _emit(args, payload, lines)
    return 0 if ok else 1


def cmd_table(args) -> int:
    cfg = _config(args)
    chain = cfg.chain()
    out = Path(args.out or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
        table = KernelTable.build(chain, args.depth)
        chain_csv = out / f"{cfg.name}-chain-d{args.depth}.csv"
        kernel_csv = out / f"{cfg.name}-kernel-d{args.depth}.csv"
        table.write_csv(chain_csv, chain.space)
        write_kernel_csv(chain, args.depth, kernel_csv)
    except OSError as exc:
        raise UsageError(f"cannot write tables to {out}: {exc}") from None
    payload = {"chain_table": str(chain_csv), "kernel_table": str(kernel_csv), "rows": len(table.entries)}
    _emit(args, payload, [f"wrote {chain_csv} ({len(table.entries)} rows)", f"wrote {kernel_csv}"])
    return 0


def cmd_render(args) -> int:
    cfg = _config(args)
    if not cfg.renderable:
        raise UsageError(f"{cfg.name} is not a planar fractal (dimension {cfg.ifs.geometric_dim}); rendering disabled")
    path = args.out or f"{cfg.name}-d{args.depth}.svg"
    try:
        fmt = render(cfg.ifs, cfg.masses, args.depth, path)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None
    _emit(args, {"out": path, "format": fmt, "polygons": cfg.ifs.n_letters**args.depth}, [f"wrote {path} ({cfg.ifs.n_letters ** args.depth} cells, {fmt})"])
    return 0


def cmd_simulate(args) -> int:
    cfg = _config(args)
    if args.paths < 1:
        raise UsageError("--paths must be at least 1")
    rep = occupancy_report(cfg.chain(), args.seed, args.depth, args.paths)
    lines = [f"{cfg.name}: {args.paths} paths to depth {args.depth}, seed {args.seed}"]
    lines += [f"  {r['word']:>8}  freq {r['frequency']:.6f}  m(w) {r['predicted']:>10}  z {r['z']:+.2f}" for r in rep["rows"]]
    lines.append("  flagged: some |z| > 4" if rep["flagged"] else "  all |z| <= 4")
    _emit(args, rep, lines)
    return 1 if rep["flagged"] else 0


def cmd_boundary(args) -> int:
    cfg = _config(args)
    chain = cfg.chain()
    if not args.pairs:
        raise UsageError("--pairs FILE is required")
    try:
        text = Path(args.pairs).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read pairs file: {exc}") from None
    try:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            pairs = parse_pairs_text(text, chain.n_letters)
        else:
            pairs = parse_pairs(doc, chain.n_letters)
        depths = [int(d) for d in args.depths.split(",")]
    except (BoundaryError, ValueError) as exc:
        raise UsageError(f"malformed pairs: {exc}") from None
    rep = homeomorphism_diagnostic(chain, pairs, depths)
    lines = [f"{cfg.name}: boundary diagnostics at depths {rep['depths']} (evidence only)"]
    for r in rep["pairs"]:
        rho = ", ".join(f"D={d}: {x:.3e}" for d, x in r["rho_by_depth"])
        lines.append(
            f"  {r['xi']} vs {r['zeta']}: n0={r['n0']} address distance {r['address_distance']:.6g}; rho {rho}; verdicts agree: {r['verdicts_agree']}"
        )
    lines.append(f"  spearman(address distance, rho): {rep['spearman_address_vs_rho']}")
    _emit(args, rep, lines)
    return 0 if rep["pass"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fractal-martin", description="Martin boundary toolkit for self-similar fractals.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(name, help_, depth):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", help=f"config JSON path or fixture name ({', '.join(fixture_names())}); NAME:PRESET picks a mass preset")
        sp.add_argument("--masses", help="mass preset from the config's mass_presets")
        sp.add_argument("--depth", type=int, default=depth)
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        return sp

    sp = common("verify", "run exact identity suites", 6)
    sp.add_argument("--suite", default="all", help=f"one of {', '.join(suites.SUITES)}, or all")
    sp.add_argument("--inject-fault", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_verify)

    sp = common("audit", "structural audits", 6)
    sp.add_argument("--check", default="transitivity", choices=CHECKS)
    sp.set_defaults(func=cmd_audit)

    sp = common("table", "export Green/q and kernel tables as CSV", 3)
    sp.add_argument("--out", help="output directory")
    sp.set_defaults(func=cmd_table)

    sp = common("render", "draw cells shaded by mass (SVG, or PPM for .ppm)", 3)
    sp.add_argument("--out", help="output file")
    sp.set_defaults(func=cmd_render)

    sp = common("simulate", "sample chain paths and compare occupancy to m(w)", 3)
    sp.add_argument("--paths", type=int, default=100000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_simulate)

    sp = common("boundary", "boundary equivalence and Martin distance diagnostics", 8)
    sp.add_argument("--pairs", help="JSON list of word pairs or text with one pair per line")
    sp.add_argument("--depths", default="4,6,8", help="comma-separated truncation depths")
    sp.set_defaults(func=cmd_boundary)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.depth < 0:
        print("error: --depth must be non-negative", file=sys.stderr)
        return 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", AmbiguousContact)
            return args.func(args)
    except (UsageError, ConfigError, InvalidWord, ExactModeRequired, RenderError, IfsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        os._exit(0)


if __name__ == "__main__":
    sys.exit(main())
