"""Command-line front end.

    lwrdg run --preset two-one --degree 2 --out runs/two-one
    lwrdg run --config configs/bottleneck.json --cells 80
    lwrdg convergence --degrees 0,1,2,3 --meshes 10..320 --bp
    lwrdg compare --preset traffic-circle
    lwrdg junction-fuzz --trials 10000
    lwrdg export-preset two-two-step -o two-two-step.json
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, kernels
from . import config as config_mod
from .errors import ConfigError, DomainError, IntegrityError
from .junction import JunctionKind
from .limiters import TvbConfig
from .presets import PRESETS, build_preset

__all__ = ["main", "build_parser", "parse_meshes"]


def parse_meshes(text: str) -> list:
    """``"10,20,40"`` or a doubling range ``"10..320"``."""
    if ".." in text:
        lo, hi = (int(v) for v in text.split("..", 1))
        if lo < 1 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad mesh range {text!r}")
        out = [lo]
        while out[-1] * 2 <= hi:
            out.append(out[-1] * 2)
        return out
    try:
        out = [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad mesh list {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"bad mesh list {text!r}")
    return out


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_solver_flags(p):
    p.add_argument("--degree", type=int, choices=range(4), help="polynomial degree k")
    p.add_argument("--cells", type=int, help="cells per unit length")
    p.add_argument("--t-end", type=float, help="final time")
    p.add_argument("--cfl", type=float, help="CFL number for every degree")
    p.add_argument("--flux", choices=("lf", "godunov"), help="interior numerical flux")
    p.add_argument("--tvb-M", type=float, dest="tvb_m", help="TVB constant M")
    p.add_argument("--no-tvb", action="store_true", help="disable the TVB limiter")
    p.add_argument("--no-bp", action="store_true", help="disable the bound-preserving limiter")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lwrdg", description="RKDG solver for LWR traffic on road networks")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto",
                   help="kernel implementation (default: compiled when available)")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a preset or a config file")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--config", type=Path)
    _add_solver_flags(r)
    r.add_argument("--out", type=Path, default=Path("runs/latest"), help="output directory")
    r.add_argument("--samples", type=int, help="samples per cell in the CSV files")

    c = sub.add_parser("convergence", help="error table for the smooth periodic problem")
    c.add_argument("--degrees", type=_int_list, default=[0, 1, 2, 3])
    c.add_argument("--meshes", type=parse_meshes, default=parse_meshes("10..320"))
    g = c.add_mutually_exclusive_group()
    g.add_argument("--bp", dest="bp", action="store_const", const="on", help="with the BP limiter")
    g.add_argument("--no-bp", dest="bp", action="store_const", const="off", help="without it")
    g.add_argument("--both", dest="bp", action="store_const", const="both", help="both tables (default)")
    c.add_argument("--out", type=Path, help="directory for convergence.csv and convergence.txt")

    m = sub.add_parser("compare", help="L1 distance of P0/P1/P2 runs to a fine first-order reference")
    m.add_argument("--preset", choices=sorted(PRESETS), required=True)
    m.add_argument("--degrees", type=_int_list, default=[0, 1, 2])
    m.add_argument("--cells", type=int, default=40)
    m.add_argument("--ref-cells", type=int, default=1600)

    f = sub.add_parser("junction-fuzz", help="closed-form junction solvers against the grid oracle")
    f.add_argument("--trials", type=int, default=10000)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--kinds", default="1x1,1x2,2x1,2x2")

    e = sub.add_parser("export-preset", help="write a preset as a JSON config")
    e.add_argument("name", choices=sorted(PRESETS))
    e.add_argument("-o", "--output", type=Path, help="file (default: stdout)")

    sub.add_parser("list-presets", help="list preset names")
    return p


def _configure(args) -> config_mod.NetworkConfig:
    cfg = build_preset(args.preset) if args.preset else config_mod.load(args.config)
    if args.cells is not None:
        if args.cells < 1:
            raise ConfigError("--cells: must be positive")
        cfg = cfg.with_cells(args.cells)
    s = cfg.solver
    changes = {}
    if args.degree is not None:
        changes["degree"] = args.degree
        cfg = replace(cfg, roads=tuple(replace(r, degree=None) for r in cfg.roads))
    if args.t_end is not None:
        changes["t_end"] = args.t_end
        changes["output_times"] = tuple(t for t in s.output_times if t < args.t_end) + (args.t_end,)
    if args.cfl is not None:
        changes["cfl"] = {k: args.cfl for k in s.cfl}
    if args.flux is not None:
        changes["flux"] = args.flux
    if args.tvb_m is not None or args.no_tvb:
        changes["tvb"] = TvbConfig(M=s.tvb.M if args.tvb_m is None else args.tvb_m,
                                   enabled=not args.no_tvb)
    if args.no_bp:
        changes["bp"] = False
    return cfg.with_solver(**changes) if changes else cfg


def _cmd_run(args) -> int:
    from .network import run
    from .output import write_run

    cfg = _configure(args)
    res = run(cfg)
    out = write_run(res, args.out, args.samples)
    s = res.summary()
    print(f"{cfg.name or 'config'}: {s['steps']} steps to t={s['t_end']:g}, "
          f"density range [{s['rho_min']:.6f}, {s['rho_max']:.6f}], "
          f"relative mass drift {s['relative_mass_drift']:.2e}")
    print(f"wrote {out}")
    return 0


def _cmd_convergence(args) -> int:
    from .verification import convergence_study

    which = {"on": [True], "off": [False], "both": [False, True], None: [False, True]}[args.bp]
    text, csv_parts = [], []
    for bp in which:
        for rep in convergence_study(args.degrees, args.meshes, bp=bp):
            text.append(rep.to_text())
            csv_parts.append(rep.to_csv(header=not csv_parts))
    print("\n\n".join(text))
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "convergence.txt").write_text("\n\n".join(text) + "\n")
        (args.out / "convergence.csv").write_text("".join(csv_parts))
    return 0


def _cmd_compare(args) -> int:
    from .network import run
    from .verification import compare_to_reference, reference_config

    cfg = build_preset(args.preset)
    if args.ref_cells % args.cells:
        raise ConfigError("--ref-cells must be a multiple of --cells")
    ref = run(reference_config(cfg, args.ref_cells))
    runs = {k: run(cfg.with_cells(args.cells).with_solver(degree=k)) for k in args.degrees}
    dist = compare_to_reference(runs, ref)
    ids = ref.state.net.ids
    print(f"{args.preset}: L1 distance of cell averages to the 1/{args.ref_cells} reference")
    print(f"{'t':>6} {'road':>5} " + " ".join(f"{'P' + str(k):>10}" for k in args.degrees))
    for t in sorted(ref.snapshots):
        for rid in ids:
            print(f"{t:>6g} {rid:>5} " + " ".join(f"{dist[k][t][rid]:>10.3e}" for k in args.degrees))
    return 0


def _cmd_fuzz(args) -> int:
    from .verification import junction_fuzz

    ok = True
    for kind in args.kinds.split(","):
        try:
            kind = JunctionKind(kind.strip())
        except ValueError:
            raise ConfigError(f"--kinds: unknown junction kind {kind!r}") from None
        rep = junction_fuzz(kind, args.trials, args.seed)
        print(rep.line())
        ok &= rep.ok
    print("zero mismatches" if ok else "MISMATCHES FOUND")
    return 0 if ok else 1


def _cmd_export(args) -> int:
    text = json.dumps(config_mod.to_dict(build_preset(args.name)), indent=2) + "\n"
    if args.output:
        args.output.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "convergence": _cmd_convergence, "compare": _cmd_compare,
                "junction-fuzz": _cmd_fuzz, "export-preset": _cmd_export,
                "list-presets": lambda a: print("\n".join(PRESETS)) or 0}
    try:
        if args.backend == "auto":
            return handlers[args.command](args)
        with kernels.use(args.backend):
            return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return 3
    except (DomainError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
