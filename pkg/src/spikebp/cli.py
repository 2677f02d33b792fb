"""Command-line entry point: ``spikebp {construct,simulate,sweep,characterize}``.

Every command reads an optional TOML config (``--config``) and lets flags
override it. Each output file gets a ``<file>.manifest.json`` next to it.

Exit codes: 0 success, 2 usage/config error, 3 construction failure,
4 simulation aborted.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from importlib import metadata

import numpy as np

from .checknode import ScnuConfig
from .codes import CodeConstructionError, construct_regular_code, has_four_cycle, write_alist
from .decoders import ALGORITHMS, ConfigError, DecoderConfig
from .neurons import LifParams
from .simulation import CodeSource, SimConfig, iter_curve, write_csv, write_json
from .sweep import (
    SweepConfig,
    characterize_scnu,
    default_theta1_grid,
    sweep_theta1,
    write_characteristic_csv,
    write_sweep_csv,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("spikebp")

EXIT_USAGE = 2
EXIT_CONSTRUCTION = 3
EXIT_ABORTED = 4
OUTPUT_DIR_ENV = "SPIKEBP_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _version() -> str:
    try:
        return metadata.version("spikebp")
    except metadata.PackageNotFoundError:
        return "unknown"


def parse_grid(text: str) -> tuple[float, ...]:
    """``"a:b:step"`` (inclusive) or a comma-separated list."""
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        try:
            a, b, step = (float(x) for x in text.split(":"))
        except ValueError:
            raise UsageError(f"bad range {text!r}; expected start:stop:step") from None
        if step <= 0 or b < a:
            raise UsageError(f"bad range {text!r}")
        count = int(round((b - a) / step)) + 1
        return tuple(round(a + k * step, 10) for k in range(count))
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"bad value list {text!r}") from None


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None


def _pick(flag, section: dict, key: str, default=None):
    if flag is not None:
        return flag
    return section.get(key, default)


def _grid_value(value) -> tuple[float, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return parse_grid(value)
    if isinstance(value, (int, float)):
        return (float(value),)
    return tuple(float(v) for v in value)


def _output_path(given: str | None, default_name: str) -> str:
    path = given or os.path.join(os.environ.get(OUTPUT_DIR_ENV, "."), default_name)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return path


def _write_manifest(output: str, command: str, resolved: dict, seed, outputs: list[str], started: float):
    manifest = {
        "tool": "spikebp",
        "version": _version(),
        "command": command,
        "config": resolved,
        "master_seed": seed,
        "outputs": outputs,
        "timings": {"started_unix": started, "wall_seconds": time.time() - started},
    }
    with open(output + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# ---------------------------------------------------------------------------
# config assembly
# ---------------------------------------------------------------------------

def _code_source(args, cfg: dict) -> CodeSource:
    sec = cfg.get("code", {})
    alist = _pick(args.alist, sec, "alist")
    k = _pick(args.k, sec, "k")
    if alist is not None:
        return CodeSource(alist=alist, k=k)
    n, dv, dc = (_pick(getattr(args, a), sec, a) for a in ("n", "dv", "dc"))
    if None in (n, dv, dc):
        raise UsageError("a code is required: --alist PATH or --n/--dv/--dc")
    return CodeSource(n=n, dv=dv, dc=dc, seed=_pick(args.code_seed, sec, "seed", 1), k=k)


def _scnu_config(args, cfg: dict, levels_default: int) -> ScnuConfig:
    sec = cfg.get("scnu", {})
    li = sec.get("li", {})
    lif = sec.get("lif", {})
    levels = _pick(args.levels, sec, "levels", levels_default)
    theta1 = _pick(args.theta1, sec, "theta1")
    if theta1 is None:
        raise UsageError("--theta1 is required for SCNU decoders")
    theta2 = _pick(args.theta2, sec, "theta2")
    gamma = _pick(args.gamma, sec, "gamma", 1.0)
    if theta2 is None:
        theta2 = gamma * theta1
    return ScnuConfig(
        levels=levels,
        theta1=theta1,
        theta2=theta2,
        li_params=LifParams(**li),
        lif_params=LifParams(**lif),
        backend=_pick(args.backend, sec, "backend", "functional"),
        substeps=sec.get("substeps", 3),
        gain=sec.get("gain", 10.0),
        stateful=sec.get("stateful", False),
        li_readout=_pick(args.li_readout, sec, "li_readout", "immediate"),
    )


def _decoder_config(args, cfg: dict, algorithm: str | None = None) -> DecoderConfig:
    sec = cfg.get("decoder", {})
    algorithm = algorithm or _pick(args.decoder, sec, "algorithm")
    if algorithm is None:
        raise UsageError("--decoder is required")
    scnu = None
    if algorithm in ("elena", "ml-elena"):
        scnu = _scnu_config(args, cfg, 1 if algorithm == "elena" else 8)
    return DecoderConfig(
        algorithm,
        iterations=_pick(args.iterations, sec, "iterations", 20),
        nms_lambda=_pick(args.nms_lambda, sec, "nms_lambda") if algorithm == "nms" else None,
        oms_offset=_pick(args.oms_offset, sec, "oms_offset") if algorithm == "oms" else None,
        scnu=scnu,
        early_stop=bool(_pick(args.early_stop, sec, "early_stop", False)),
    )


def _sim_config(args, cfg: dict, decoder: DecoderConfig, grid=None) -> SimConfig:
    sec = cfg.get("simulation", {})
    if grid is None:
        grid = _grid_value(_pick(args.ebn0, sec, "ebn0"))
        if not grid:
            raise UsageError("--ebn0 is required (list or start:stop:step)")
    reliability = _pick(args.reliability, sec, "reliability", "matched")
    design = _pick(args.design_ebn0, sec, "design_ebn0")
    if reliability == "fixed" and design is None:
        raise UsageError("--reliability fixed needs --design-ebn0")
    if reliability not in ("fixed", "matched"):
        raise UsageError(f"unknown reliability mode {reliability!r}")
    return SimConfig(
        code=_code_source(args, cfg),
        decoder=decoder,
        ebn0_grid=grid,
        design_ebn0_db=design if reliability == "fixed" else None,
        min_bit_errors=_pick(args.min_errors, sec, "min_bit_errors", 100),
        min_codewords=_pick(args.min_codewords, sec, "min_codewords", 0),
        max_codewords=_pick(args.max_codewords, sec, "max_codewords", 100_000),
        batch_size=_pick(args.batch_size, sec, "batch_size", 64),
        master_seed=_pick(args.seed, sec, "seed", 0),
        workers=_pick(args.workers, sec, "workers", os.cpu_count() or 1),
        rate=_pick(args.rate, sec, "rate"),
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_construct(args) -> int:
    cfg = _load_config(args.config).get("code", {})
    n, dv, dc = (_pick(getattr(args, a), cfg, a) for a in ("n", "dv", "dc"))
    if None in (n, dv, dc):
        raise UsageError("construct needs --n, --dv and --dc")
    seed = _pick(args.code_seed, cfg, "seed", 1)
    restarts = _pick(args.max_restarts, cfg, "max_restarts", 1000)
    output = _output_path(args.output, f"regular_{n}_{dv}_{dc}_s{seed}.alist")
    started = time.time()
    try:
        g = construct_regular_code(n, dv, dc, seed=seed, max_restarts=restarts)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    except CodeConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    write_alist(g, output)
    regular = bool(np.all(g.vn_degrees == dv) and np.all(g.cn_degrees == dc))
    girth_ok = not has_four_cycle(g)
    print(f"wrote {output}: N={g.n_vns} M={g.n_cns} edges={g.n_edges}")
    print(f"regular ({dv},{dc}): {'yes' if regular else 'no'}")
    print(f"girth >= 6: {'yes' if girth_ok else 'no'}")
    resolved = {"n": n, "dv": dv, "dc": dc, "seed": seed, "max_restarts": restarts}
    _write_manifest(output, "construct", resolved, seed, [output], started)
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    sim = _sim_config(args, cfg, _decoder_config(args, cfg))
    prefix = _output_path(args.output, f"ber_{sim.decoder.algorithm}")
    csv_path, json_path = prefix + ".csv", prefix + ".json"
    started = time.time()
    points = []
    try:
        graph = sim.code.build()
        for p in iter_curve(sim, graph):
            points.append(p)
            print(f"{p.ebn0_db:6.3f} dB  ber={p.ber:.4e} [{p.wilson_low:.3e}, {p.wilson_high:.3e}]"
                  f"  fer={p.fer:.4e}  words={p.codewords_sent}", flush=True)
    except CodeConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except (KeyboardInterrupt, Exception) as exc:  # noqa: BLE001
        print(f"simulation aborted: {exc!r}", file=sys.stderr)
        return EXIT_ABORTED
    write_csv(points, csv_path, sim.decoder.label, sim.code.label, sim.master_seed)
    write_json(points, sim, json_path)
    resolved = sim.to_dict()
    resolved["workers"] = "excluded: results do not depend on it"
    _write_manifest(csv_path, "simulate", resolved, sim.master_seed, [csv_path, json_path], started)
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    sec = cfg.get("sweep", {})
    design = _pick(args.design_ebn0, sec, "design_ebn0")
    if design is None:
        raise UsageError("sweep needs --design-ebn0")
    grid = _grid_value(_pick(args.theta1_grid, sec, "theta1", None)) or default_theta1_grid()
    levels = _pick(args.levels, sec, "levels", 8)
    gamma = _pick(args.gamma, sec, "gamma", 1.0)
    # thresholds are supplied per grid point; a placeholder keeps the template valid
    args.theta1 = args.theta1 if args.theta1 is not None else grid[0]
    decoder = _decoder_config(args, cfg, "elena" if levels == 1 else "ml-elena")
    eval_at = _pick(args.eval_ebn0, sec, "eval_ebn0", design)
    args.reliability, args.design_ebn0 = "fixed", design
    base = _sim_config(args, cfg, decoder, grid=(eval_at,))
    sweep = SweepConfig(base, design, grid, gamma=gamma, levels=levels, eval_ebn0_db=eval_at)
    output = _output_path(args.output, f"sweep_L{levels}.csv")
    started = time.time()
    try:
        result = sweep_theta1(sweep)
    except CodeConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except (KeyboardInterrupt, Exception) as exc:  # noqa: BLE001
        print(f"simulation aborted: {exc!r}", file=sys.stderr)
        return EXIT_ABORTED
    write_sweep_csv(result, output)
    print(f"best theta1={result.best_theta1:g} theta2={result.best_theta2:g} ber={result.best_point.ber:.4e}")
    resolved = {"base": base.to_dict(), "design_ebn0_db": design, "eval_ebn0_db": eval_at,
                "theta1_grid": list(grid), "gamma": gamma, "levels": levels}
    _write_manifest(output, "sweep", resolved, base.master_seed, [output], started)
    return 0


def cmd_characterize(args) -> int:
    cfg = _load_config(args.config)
    sec = cfg.get("characterize", {})
    if args.grid is not None or "grid" in sec:
        grid = _grid_value(_pick(args.grid, sec, "grid"))
    else:
        grid = None
    levels = _pick(args.levels, sec, "levels", 4)
    theta1 = _pick(args.theta1, sec, "theta1", 1.0)
    theta2 = _pick(args.theta2, sec, "theta2")
    if theta2 is None:
        theta2 = _pick(args.gamma, sec, "gamma", 1.0) * theta1
    if grid is None:
        grid = tuple(np.linspace(0.0, (levels + 1) * theta1, 1000).tolist())
    if not grid:
        raise UsageError("magnitude grid is empty")
    scnu = ScnuConfig(levels=levels, theta1=theta1, theta2=theta2)
    output = _output_path(args.output, f"scnu_L{levels}.csv")
    started = time.time()
    try:
        table = characterize_scnu(scnu, grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_characteristic_csv(table, output)
    print(f"wrote {len(table)} points to {output}")
    resolved = {"levels": levels, "theta1": theta1, "theta2": theta2, "points": len(grid)}
    _write_manifest(output, "characterize", resolved, None, [output], started)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_code_flags(p):
    g = p.add_argument_group("code")
    g.add_argument("--alist", help="parity-check matrix in alist format")
    g.add_argument("--n", type=int, help="block length for a constructed code")
    g.add_argument("--dv", type=int)
    g.add_argument("--dc", type=int)
    g.add_argument("--code-seed", type=int, help="construction seed (default 1)")
    g.add_argument("--k", type=int, help="declared information length (default N-M)")


def _add_decoder_flags(p, with_algorithm=True):
    g = p.add_argument_group("decoder")
    if with_algorithm:
        g.add_argument("--decoder", choices=ALGORITHMS)
    g.add_argument("--iterations", type=int)
    g.add_argument("--nms-lambda", type=float)
    g.add_argument("--oms-offset", type=float)
    g.add_argument("--early-stop", action="store_true", default=None)
    g.add_argument("--levels", type=int)
    g.add_argument("--theta1", type=float)
    g.add_argument("--theta2", type=float)
    g.add_argument("--gamma", type=float, help="theta2 = gamma * theta1 when --theta2 is absent")
    g.add_argument("--backend", choices=("functional", "snn"))
    g.add_argument("--li-readout", choices=("immediate", "delayed"))


def _add_sim_flags(p, with_grid=True):
    g = p.add_argument_group("simulation")
    if with_grid:
        g.add_argument("--ebn0", help="Eb/N0 grid in dB: 'a:b:step' or 'x,y,z'")
        g.add_argument("--reliability", choices=("matched", "fixed"))
    g.add_argument("--design-ebn0", type=float, help="design Eb/N0 (dB) for fixed reliability")
    g.add_argument("--min-errors", type=int)
    g.add_argument("--min-codewords", type=int)
    g.add_argument("--max-codewords", type=int)
    g.add_argument("--batch-size", type=int)
    g.add_argument("--seed", type=int, help="master seed")
    g.add_argument("--workers", type=int)
    g.add_argument("--rate", type=float, help="override the code rate used for Eb/N0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spikebp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a random regular code without 4-cycles")
    p.add_argument("--config")
    p.add_argument("--n", type=int)
    p.add_argument("--dv", type=int)
    p.add_argument("--dc", type=int)
    p.add_argument("--seed", dest="code_seed", type=int)
    p.add_argument("--max-restarts", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("simulate", help="BER/FER curve over an Eb/N0 grid")
    p.add_argument("--config")
    _add_code_flags(p)
    _add_decoder_flags(p)
    _add_sim_flags(p)
    p.add_argument("-o", "--output", help="output prefix (.csv and .json are added)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="theta1 line search for the spiking decoders")
    p.add_argument("--config")
    _add_code_flags(p)
    _add_decoder_flags(p, with_algorithm=False)
    _add_sim_flags(p, with_grid=False)
    p.add_argument("--theta1-grid", help="'a:b:step' or list (default 0.1:4.0:0.1)")
    p.add_argument("--eval-ebn0", type=float, help="Eb/N0 at which BER is measured (default: design)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep, decoder=None, ebn0=None, reliability=None)

    p = sub.add_parser("characterize", help="SCNU staircase transfer table")
    p.add_argument("--config")
    p.add_argument("--levels", type=int)
    p.add_argument("--theta1", type=float)
    p.add_argument("--theta2", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--grid", help="magnitudes: 'a:b:step' or list (default 1000 points)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_characterize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
