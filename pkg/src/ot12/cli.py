"""Command-line entry point.

Subcommands: enumerate, sample, census, surgery, partitions, keane, render,
verify.  A declarative TOML run-config can set geometry/weights/parameters;
command-line flags override file values.  Every output directory receives a
manifest (tool version, seed, config hash) and the effective configuration,
so identical invocations produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .census import CellRect, full_census, size_statistics
from .configuration import Weights, from_text, to_text
from .errors import Ot12Error
from .lattice import BoxSpec, Torus, Window
from .partitions import TilingSpec, keane_census, max_compatible_family, nested_family
from .render import render_svg
from .sampler import run as sampler_run
from .surgery import build_encounter_box, rewire_box_interior, select_trident

OUT_ROOT_ENV = "OT12_OUT_ROOT"


def _load_config(path):
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _merged(cfg, section, key, flag_value, default=None):
    if flag_value is not None:
        return flag_value
    return cfg.get(section, {}).get(key, default)


def _geometry(cfg, args):
    mode = _merged(cfg, "geometry", "mode", getattr(args, "mode", None), None)
    L = _merged(cfg, "geometry", "L", getattr(args, "L", None))
    w = _merged(cfg, "geometry", "w", getattr(args, "win_w", None))
    h = _merged(cfg, "geometry", "h", getattr(args, "win_h", None))
    if mode is None:
        mode = "torus" if L is not None else ("window" if w is not None else None)
    if mode == "torus":
        if L is None:
            raise Ot12Error("torus geometry needs L (flag --L or config geometry.L)")
        return Torus(int(L))
    if mode == "window":
        if w is None or h is None:
            raise Ot12Error("window geometry needs w and h")
        return Window(int(w), int(h))
    raise Ot12Error("no geometry given (use --L or --window W H, or a config file)")


def _weights(cfg, args):
    a = _merged(cfg, "weights", "a", getattr(args, "a", None), 1.0)
    b = _merged(cfg, "weights", "b", getattr(args, "b", None), 1.0)
    c = _merged(cfg, "weights", "c", getattr(args, "c", None), 1.0)
    return Weights(float(a), float(b), float(c))


def _json_dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_outputs(outdir, effective, files):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    echo = _json_dumps(effective)
    (outdir / "config.json").write_text(echo)
    manifest = {
        "tool": "ot12",
        "version": __version__,
        "config_hash": hashlib.sha256(echo.encode()).hexdigest(),
        "seed": effective.get("seed"),
        "subcommand": effective.get("subcommand"),
    }
    (outdir / "manifest.json").write_text(_json_dumps(manifest))
    for name, payload in files.items():
        mode = "wb" if isinstance(payload, bytes) else "w"
        with open(outdir / name, mode) as fh:
            fh.write(payload)


def _window_rect(args):
    spec = getattr(args, "window", None)
    if spec is None:
        return None
    x0, y0, w, h = (int(t) for t in spec)
    return CellRect(x0, y0, w, h)


def _cmd_enumerate(args):
    cfg = _load_config(args.config)
    g = _geometry(cfg, args)
    w = _weights(cfg, args)
    from .exact import partition_function

    import math

    count, z = partition_function(g, w, cap=args.cap)
    payload = {"count": count, "logZ": math.log(z) if z > 0 else None}
    text = _json_dumps(payload)
    sys.stdout.write(text)
    if args.out:
        _write_outputs(
            args.out,
            {"subcommand": "enumerate", "geometry": repr(g), "weights": [w.a, w.b, w.c], "seed": None},
            {"result.json": text},
        )
    return 0


def _cmd_sample(args):
    cfg = _load_config(args.config)
    g = _geometry(cfg, args)
    w = _weights(cfg, args)
    seed = int(_merged(cfg, "sample", "seed", args.seed, 1))
    sweeps = int(_merged(cfg, "sample", "sweeps", args.sweeps, 100))
    burn_in = int(_merged(cfg, "sample", "burn_in", args.burn_in, 1000))
    thin = int(_merged(cfg, "sample", "thin", args.thin, 10))
    radius = int(_merged(cfg, "sample", "block_radius", args.block_radius, 1))
    res = sampler_run(
        g, w, seed, burn_in=burn_in, n_samples=sweeps, thinning=thin, block_radius=radius
    )
    files = {"diagnostics.json": _json_dumps(res.diagnostics)}
    for i, sample in enumerate(res.configurations()):
        files[f"sample_{i:06d}.ot12"] = to_text(sample)
    effective = {
        "subcommand": "sample",
        "geometry": repr(g),
        "weights": [w.a, w.b, w.c],
        "seed": seed,
        "sweeps": sweeps,
        "burn_in": burn_in,
        "thin": thin,
        "block_radius": radius,
    }
    _write_outputs(args.out, effective, files)
    sys.stdout.write(_json_dumps({"written": sweeps, "out": str(args.out)}))
    return 0


def _read_samples(paths):
    for p in paths:
        yield from_text(Path(p).read_text())


def _sample_paths(args):
    paths = []
    for item in args.inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(p.glob("sample_*.ot12")))
        else:
            paths.append(p)
    if not paths:
        raise Ot12Error("no input configurations found")
    return paths


def _cmd_census(args):
    rect = _window_rect(args)
    paths = _sample_paths(args)
    rows = []
    stats = None
    for path in paths:
        cfg = from_text(Path(path).read_text())
        report = full_census(cfg, window=rect, adjacency=args.adjacency)
        if stats is None:
            stats = size_statistics([], cfg.geometry.n_vertices)
        stats.add(report)
        row = {"sample": Path(path).name}
        for code in range(1, 7):
            row[f"largest_{code}"] = report.largest(code, 0)
            row[f"second_{code}"] = report.largest(code, 1)
            row[f"boundary_{code}"] = report.boundary_count(code)
        rows.append(row)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    summary = {"n_samples": len(rows), "size_stats": stats.summary()}
    files = {"census.csv": buf.getvalue(), "summary.json": _json_dumps(summary)}
    if args.svg:
        cfg = from_text(Path(paths[0]).read_text())
        files["first_sample.svg"] = render_svg(cfg, code=args.code, window=rect)
    effective = {
        "subcommand": "census",
        "inputs": [str(p) for p in paths],
        "adjacency": args.adjacency,
        "window": list(rect) if rect else None,
        "seed": None,
    }
    _write_outputs(args.out, effective, files)
    sys.stdout.write(_json_dumps(summary))
    return 0


def _cmd_surgery(args):
    cfg_in = from_text(Path(args.infile).read_text())
    cfg = _load_config(args.config)
    w = _weights(cfg, args)
    center = (int(args.center[0]), int(args.center[1]))
    if args.op == "rewire":
        report = rewire_box_interior(cfg_in, args.N, center, w)
    else:
        rect = _window_rect(args)
        trident = select_trident(cfg_in, args.N, center, window=rect)
        report = build_encounter_box(cfg_in, args.N, center, trident, w, window=rect)
    files = {
        "report.json": _json_dumps(report.as_dict()),
        "before.svg": render_svg(report.input_config, code=1),
        "after.svg": render_svg(report.output_config, code=1),
        "after.ot12": to_text(report.output_config),
    }
    effective = {
        "subcommand": "surgery",
        "op": args.op,
        "N": args.N,
        "center": list(center),
        "in": str(args.infile),
        "seed": None,
    }
    _write_outputs(args.out, effective, files)
    sys.stdout.write(_json_dumps({"op": args.op, "n_modified": report.n_modified, "bound": report.bound}))
    return 0


def _cmd_partitions(args):
    size, family = max_compatible_family(args.Ysize)
    witness = nested_family(args.Ysize)
    payload = {
        "Y_size": args.Ysize,
        "max_family": size,
        "bound": args.Ysize - 2,
        "witness_family": [repr(p) for p in family],
        "nested_family": [repr(p) for p in witness],
    }
    sys.stdout.write(_json_dumps(payload))
    if args.out:
        _write_outputs(args.out, {"subcommand": "partitions", "Ysize": args.Ysize, "seed": None}, {"result.json": _json_dumps(payload)})
    return 0


def _cmd_keane(args):
    cfg = _load_config(args.config)
    w = _weights(cfg, args)
    rect = _window_rect(args)
    paths = _sample_paths(args)
    samples = _read_samples(paths)
    first = next(iter(_read_samples(paths[:1])))
    g = first.geometry
    if args.center:
        center = (int(args.center[0]), int(args.center[1]))
    elif g.mode == "window":
        center = (g.w // 2, g.h // 2)
    else:
        center = (g.L // 2, g.L // 2)
    tiling = TilingSpec(args.s, args.N, center)
    report = keane_census(samples, tiling, args.code, w, window=rect)
    rows = [{"sample": i, "encounter_boxes": c} for i, c in enumerate(report.counts)]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["sample", "encounter_boxes"])
    writer.writeheader()
    writer.writerows(rows)
    files = {"keane.json": _json_dumps(report.as_dict()), "keane.csv": buf.getvalue()}
    effective = {
        "subcommand": "keane",
        "s": args.s,
        "N": args.N,
        "code": args.code,
        "center": list(center),
        "inputs": [str(p) for p in paths],
        "seed": None,
    }
    _write_outputs(args.out, effective, files)
    sys.stdout.write(_json_dumps({"total_encounter_boxes": report.total_boxes, "violations": report.violations}))
    return 0 if not report.violations else 1


def _cmd_render(args):
    cfg = from_text(Path(args.infile).read_text())
    svg = render_svg(cfg, code=args.code, window=_window_rect(args))
    Path(args.outfile).write_text(svg)
    return 0


def _cmd_verify(args):
    from .selfcheck import run_verification

    failures = run_verification(quick=args.quick)
    if failures:
        sys.stdout.write(f"{failures} check(s) failed\n")
        return 1
    sys.stdout.write("all checks passed\n")
    return 0


def _add_geometry_flags(p):
    p.add_argument("--config", help="TOML run-config file")
    p.add_argument("--mode", choices=("torus", "window"))
    p.add_argument("--L", type=int, help="torus side (cells)")
    p.add_argument("--win-w", dest="win_w", type=int, help="window width (cells)")
    p.add_argument("--win-h", dest="win_h", type=int, help="window height (cells)")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--c", type=float)


def build_parser():
    parser = argparse.ArgumentParser(prog="ot12", description=__doc__)
    parser.add_argument("--version", action="version", version=f"ot12 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="exact count and partition function")
    _add_geometry_flags(p)
    p.add_argument("--cap", type=int, default=40)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_enumerate)

    p = sub.add_parser("sample", help="block heat-bath sampling")
    _add_geometry_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--sweeps", type=int, help="number of kept samples")
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--block-radius", dest="block_radius", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("census", help="homogeneous-cluster census over samples")
    p.add_argument("inputs", nargs="+", help="configuration files or a sample directory")
    p.add_argument("--code", type=int, default=1)
    p.add_argument("--adjacency", choices=("lattice", "present"), default="lattice")
    p.add_argument("--window", nargs=4, metavar=("X0", "Y0", "W", "H"))
    p.add_argument("--svg", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_census)

    p = sub.add_parser("surgery", help="box rewiring / encounter construction")
    p.add_argument("--op", choices=("rewire", "encounter"), required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--center", nargs=2, metavar=("X", "Y"), required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--window", nargs=4, metavar=("X0", "Y0", "W", "H"))
    p.add_argument("--config")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_surgery)

    p = sub.add_parser("partitions", help="compatible-family bound check")
    p.add_argument("--Ysize", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_partitions)

    p = sub.add_parser("keane", help="encounter-box counting experiment")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--code", type=int, default=1)
    p.add_argument("--center", nargs=2, metavar=("X", "Y"))
    p.add_argument("--window", nargs=4, metavar=("X0", "Y0", "W", "H"))
    p.add_argument("--config")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_keane)

    p = sub.add_parser("render", help="SVG rendering of a configuration")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--code", type=int)
    p.add_argument("--window", nargs=4, metavar=("X0", "Y0", "W", "H"))
    p.set_defaults(fn=_cmd_render)

    p = sub.add_parser("verify", help="run the built-in oracle/property suite")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(fn=_cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out", None) and not os.path.isabs(str(args.out)):
        root = os.environ.get(OUT_ROOT_ENV)
        if root:
            args.out = str(Path(root) / str(args.out))
    try:
        return args.fn(args)
    except Ot12Error as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
