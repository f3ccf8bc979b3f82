"""``ptlab`` command line: census, graph generation, membership, experiments."""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from .density import four_profile, frac_str, kst_defect, t_inj
from .experiments import REGISTRY, ConfigError, config_from_json, report_json, run_experiment
from .graph_core import Four, GraphFormatError, blowup, format_graph, named_graph, parse_graph, random_graph
from .property_pi import BUILTIN_PROPERTY, integerize, load_property, phi_value, z_value


def _read_graph(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    try:
        return parse_graph(text)
    except GraphFormatError as exc:
        raise GraphFormatError(f"{path}: {exc}") from None


def _emit(obj, out: str | None = None) -> None:
    text = json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def membership_report(g, prop) -> dict:
    z = z_value(prop, g)
    member = z <= prop.b
    out = {"property": prop.name or "custom", "n": g.n, "m": g.m, "z": frac_str(z),
           "b": frac_str(prop.b), "member": member}
    if not member:
        out["gap"] = frac_str(z - prop.b)
        out["gap_bound"] = frac_str(Fraction(1, integerize(prop).scale * math.comb(g.n, prop.h)))
    return out


def cmd_density(args) -> int:
    g = _read_graph(args.file)
    prof = four_profile(g, args.mode)
    out = {"census": prof.to_json()}
    out["p"] = {c.name: frac_str(prof.density(c)) for c in Four}
    out["t_inj_K2"] = frac_str(t_inj("K2", g)) if g.n >= 2 else None
    out["t_inj_C4"] = frac_str(t_inj(Four.C4, g, prof)) if g.n >= 4 else frac_str(0)
    out["phi"] = frac_str(phi_value(g, prof)) if g.n >= 2 else None
    out["kst_defect"] = frac_str(kst_defect(g, prof)) if g.n >= 4 else None
    out.update(membership_report(g, BUILTIN_PROPERTY))
    _emit(out, args.out)
    return 0


def cmd_member(args) -> int:
    g = _read_graph(args.file)
    prop = load_property(args.property)
    _emit(membership_report(g, prop), args.out)
    return 0


def cmd_gen(args) -> int:
    if args.kind == "random":
        if args.n is None:
            raise ConfigError("gen random needs --n")
        g = random_graph(args.n, args.seed)
    elif args.kind == "named":
        if not args.name:
            raise ConfigError("gen named needs --name")
        g = named_graph(args.name, args.n)
    elif args.kind == "blowup":
        if args.base is None or args.k is None:
            raise ConfigError("gen blowup needs --base and --k")
        if not args.out:
            raise ConfigError("gen blowup needs --out (the parts sidecar goes next to it)")
        g, structure = blowup(_read_graph(args.base), args.k)
        sidecar = Path(args.out + ".parts.json")
        sidecar.write_text(json.dumps(structure.to_json()) + "\n", encoding="utf-8")
    else:
        raise ConfigError(f"unknown generator {args.kind!r}")
    text = format_graph(g)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_experiment(args) -> int:
    data = None
    if args.config:
        raw = args.config
        data = json.loads(raw if raw.lstrip().startswith("{") else Path(raw).read_text(encoding="utf-8"))
    cfg = config_from_json(args.name, data, args.seed, args.out)
    report = run_experiment(cfg)
    text = report_json(report)
    out = cfg.output or f"{cfg.experiment}-report.json"
    Path(out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    if report["failed_assertions"]:
        print("failed: " + ", ".join(report["failed_assertions"]), file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="4-vertex census, densities and membership of a graph file")
    p.add_argument("file")
    p.add_argument("--mode", choices=["fast", "reference"], default="fast")
    p.add_argument("--out")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("member", help="membership in a weighted density property")
    p.add_argument("file")
    p.add_argument("--property", default="thm1.4", help="built-in name, JSON string or JSON file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_member)

    p = sub.add_parser("gen", help="generate a graph file")
    p.add_argument("kind", choices=["random", "blowup", "named"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--base", help="graph file to blow up")
    p.add_argument("--name", help="named graph, e.g. C4, K13c, Kn(7)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("experiment", help="run a named experiment: " + ", ".join(sorted(REGISTRY)))
    p.add_argument("name", choices=sorted(REGISTRY))
    p.add_argument("--config", help="JSON file or inline JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GraphFormatError, ConfigError, KeyError, ValueError, OSError) as exc:
        print(f"ptlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
