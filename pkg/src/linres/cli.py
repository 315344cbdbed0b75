"""Command-line entry point.

Subcommands: ``build``, ``analyze``, ``encode-verify``, ``memory-curve``,
``sr-sweep``, ``rank-scan``. Exit codes: 0 success, 1 invalid input,
2 numerical failure. Output files go to ``--out-dir``, else to
``$LINRES_OUTPUT_DIR``, else to the current directory.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ch_encoding import encode_input, encode_input_cyclic, reservoir_char_coeffs
from .controllability import (
    analyze,
    controllability_matrix,
    cyclic_controllability_tilde,
    expected_column_norms,
    nullspace_profile,
    trailing_energy,
)
from .exceptions import LinresError, NumericalError, ValidationError
from .linalg_core import spectrum_summary
from .simulate import (
    RANK_COLUMNS,
    SWEEP_COLUMNS,
    ExperimentConfig,
    NormalizationMode,
    derive_seeds,
    memory_curves,
    rank_scan,
    run_reservoir,
)
from .topology import Reservoir, ReservoirSpec, RescaleMode, TopologyKind, build_reservoir

OUTPUT_DIR_ENV = "LINRES_OUTPUT_DIR"
VERIFY_TOL = 1e-8

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2

RAW_SWEEP_COLUMNS = ("topology", "n", "rho", "tau", "realization", "gamma")
RAW_RANK_COLUMNS = ("topology", "n", "rho", "fixed", "realization", "rank")

ALL_KINDS = [k.value for k in TopologyKind]

# keys accepted in experiment config files, besides ExperimentConfig fields
_EXTRA_KEYS = {
    "memory-curve": {"kinds"},
    "sr-sweep": {"kinds"},
    "rank-scan": {"kinds", "ns", "rho", "fixed"},
}
_INT_FIELDS = {"T", "t0", "n", "realizations", "master_seed", "washout", "workers"}
_FLOAT_FIELDS = {"ridge", "rho"}
_INT_LIST_FIELDS = {"taus", "ns"}
_FLOAT_LIST_FIELDS = {"rhos"}
_CONFIG_FIELDS = set(ExperimentConfig.__dataclass_fields__)


def _arg_type(parse):
    def convert(text):
        try:
            return parse(text)
        except ValidationError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    return convert


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# config files


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            out.extend(range(*bits))
        else:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(p) for p in text.replace(";", ",").split(",") if p.strip()]


def parse_config_text(text: str, command: str) -> dict:
    """Parse ``key = value`` lines into typed values.

    Lists are comma separated; integer lists also accept
    ``start:stop[:step]`` ranges. Every problem is collected and reported
    together in one :class:`ValidationError`.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ValidationError(f"unreadable config: {exc}") from exc
    allowed = _CONFIG_FIELDS | _EXTRA_KEYS[command]
    values, problems = {}, []
    for key, raw in cp["run"].items():
        if key not in allowed:
            problems.append(f"unknown key {key!r}")
            continue
        try:
            values[key] = _convert(key, raw)
        except (ValueError, LinresError) as exc:
            problems.append(f"{key}: {exc}")
    if problems:
        raise ValidationError("invalid config:\n  - " + "\n  - ".join(problems))
    return values


def _convert(key: str, raw):
    if isinstance(raw, str):
        raw = raw.strip()
    if key in _INT_FIELDS:
        return int(raw)
    if key in _FLOAT_FIELDS:
        return float(raw)
    if key in _INT_LIST_FIELDS:
        return raw if isinstance(raw, list) else _int_list(raw)
    if key in _FLOAT_LIST_FIELDS:
        return raw if isinstance(raw, list) else _float_list(raw)
    if key == "kinds":
        items = raw if isinstance(raw, list) else [p for p in raw.split(",") if p.strip()]
        return [TopologyKind.parse(k).value for k in items]
    if key == "fixed":
        return NormalizationMode.parse(raw).value
    if key == "rescale_mode":
        return RescaleMode.parse(raw).value
    return raw


def _split_config(values: dict, command: str) -> tuple[ExperimentConfig, dict]:
    cfg_kwargs = {k: v for k, v in values.items() if k in _CONFIG_FIELDS}
    extras = {k: v for k, v in values.items() if k not in _CONFIG_FIELDS}
    extras.setdefault("kinds", list(ALL_KINDS))
    if command == "rank-scan":
        extras.setdefault("ns", list(range(10, 201, 10)))
        extras.setdefault("rho", 0.995)
        extras.setdefault("fixed", NormalizationMode.SPECTRAL_RADIUS.value)
        problems = []
        if not extras["ns"]:
            problems.append("ns must not be empty")
        elif min(extras["ns"]) < 2:
            problems.append("every n in ns must be >= 2")
        if extras["rho"] <= 0:
            problems.append("rho must be positive")
        if problems:
            raise ValidationError("invalid config:\n  - " + "\n  - ".join(problems))
    if not extras["kinds"]:
        raise ValidationError("invalid config:\n  - kinds must not be empty")
    return ExperimentConfig(**cfg_kwargs), extras


def load_run_config(args, command: str) -> tuple[ExperimentConfig, dict]:
    if args.manifest:
        doc = json.loads(Path(args.manifest).read_text())
        if doc.get("command") != command:
            raise ValidationError(
                f"manifest was written by {doc.get('command')!r}, not {command!r}"
            )
        values = {k: _convert(k, v) for k, v in doc["config"].items()}
    elif args.config:
        values = parse_config_text(Path(args.config).read_text(), command)
    else:
        values = {}
    if getattr(args, "workers", None):
        values["workers"] = args.workers
    return _split_config(values, command)


# --------------------------------------------------------------------------
# output helpers


def output_dir(arg: str | None) -> Path:
    path = Path(arg or os.environ.get(OUTPUT_DIR_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_manifest(path: Path, command: str, config: ExperimentConfig, extras: dict,
                   outputs: list[Path], started: str) -> None:
    seeds = []
    for i in range(config.realizations):
        a, b, c = derive_seeds(config.master_seed, i)
        seeds.append({"realization": i, "reservoir_seed": a, "input_seed": b, "signal_seed": c})
    doc = {
        "tool": "linres",
        "version": __version__,
        "command": command,
        "config": {**{k: v for k, v in config.to_dict().items() if k != "workers"}, **extras},
        "master_seed": config.master_seed,
        "seed_derivation": "numpy SeedSequence(master_seed, spawn_key=(realization,)) -> 3 x uint64",
        "seeds": seeds,
        "started": started,
        "finished": _now(),
        "outputs": {p.name: sha256(p) for p in outputs},
    }
    path.write_text(json.dumps(doc, indent=2) + "\n")


def write_svg(path: Path, series: list[tuple[str, np.ndarray, np.ndarray, np.ndarray]],
              xlabel: str, ylabel: str) -> None:
    """Line plot with a one-std band per series."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise ValidationError("--svg needs matplotlib (pip install 'linres[plot]')") from exc
    matplotlib.rcParams["svg.hashsalt"] = "linres"
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, x, mean, std in series:
        (line,) = ax.plot(x, mean, label=label)
        ax.fill_between(x, mean - std, mean + std, color=line.get_color(), alpha=0.25, lw=0)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# --------------------------------------------------------------------------
# subcommands


def _spec_from_args(args) -> ReservoirSpec:
    return ReservoirSpec(args.kind, args.n, args.rho, args.seed, args.input_seed, args.rescale)


def cmd_build(args) -> int:
    R = build_reservoir(_spec_from_args(args))
    out = Path(args.out) if args.out else output_dir(args.out_dir) / f"reservoir_{R.kind.value}_n{R.n}.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(R.to_json() + "\n")
    summary = spectrum_summary(R.W)
    print(f"wrote {out}")
    print(f"spectral_radius {summary.spectral_radius:.12g}")
    print(f"max_singular_value {summary.max_singular_value:.12g}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        R = Reservoir.from_json(Path(args.reservoir).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {args.reservoir}: {exc}") from exc
    report = analyze(controllability_matrix(R), args.tol)
    out = output_dir(args.out_dir)
    stem = Path(args.reservoir).stem
    (out / f"{stem}_report.json").write_text(
        report.to_json(include_matrix=args.include_matrix, indent=1) + "\n"
    )
    write_csv(out / f"{stem}_singular_values.csv", ("index", "singular_value"),
              enumerate(report.singular_values.tolist()))
    expected = expected_column_norms(R.spec.rho, R.n)
    write_csv(out / f"{stem}_column_norms.csv", ("k", "column_norm", "expected_norm"),
              zip(range(R.n), report.column_norms.tolist(), expected.tolist()))
    write_csv(out / f"{stem}_nullspace_energy.csv", ("basis_index", "trailing_energy"),
              enumerate(trailing_energy(report).tolist()))
    write_csv(out / f"{stem}_nullspace_profile.csv", ("component", "energy"),
              enumerate(nullspace_profile(report).tolist()))
    print(f"rank {report.rank}")
    print(f"nullity {report.nullity}")
    print(f"rank_tolerance {report.rank_tolerance:.6g}")
    return EXIT_OK


def cmd_encode_verify(args) -> int:
    spec = _spec_from_args(args)
    if spec.rho >= 1:
        raise NumericalError(f"rho={spec.rho} >= 1: the encoded input diverges")
    R = build_reservoir(spec)
    K = args.length
    if K < R.n:
        raise ValidationError(f"--length must be >= n ({R.n})")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(args.signal_seed)))
    window = rng.standard_normal(K)  # most recent first
    x_direct = run_reservoir(R, window[::-1])[-1]
    C = controllability_matrix(R)
    enc = encode_input(reservoir_char_coeffs(R), window, K)
    scale = 1.0 + np.linalg.norm(x_direct)
    residuals = {"C s": float(np.linalg.norm(x_direct - C @ enc.s) / scale)}
    if R.kind is TopologyKind.CYCLIC:
        enc_t = encode_input_cyclic(R.spec.rho, R.n, window, K)
        C_t = cyclic_controllability_tilde(R.w)
        residuals["C~ s~"] = float(np.linalg.norm(x_direct - C_t @ enc_t.s) / scale)
    for name, value in residuals.items():
        print(f"residual[{name}] {value:.3e}")
    worst = max(residuals.values())
    print(f"max_residual {worst:.3e}")
    print(f"tail_estimate {enc.tail_estimate:.3e}")
    if args.out:
        Path(args.out).write_text(enc.to_json() + "\n")
    ok = worst <= VERIFY_TOL
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_NUMERICAL


def _run_curves(args, command: str) -> int:
    started = _now()
    config, extras = load_run_config(args, command)
    out = output_dir(args.out_dir)
    curves = memory_curves(extras["kinds"], config.rhos, config)
    stem = command.replace("-", "_")
    raw_rows, agg_rows = [], []
    for curve in curves:
        for i, row in enumerate(curve.gammas):
            raw_rows.extend((curve.topology.value, curve.n, curve.rho, tau, i, float(g))
                            for tau, g in zip(curve.taus, row))
        agg_rows.extend((curve.topology.value, curve.n, curve.rho, tau, m, s)
                        for tau, m, s in curve.points)
    raw_path, agg_path = out / f"{stem}_raw.csv", out / f"{stem}.csv"
    write_csv(raw_path, RAW_SWEEP_COLUMNS, raw_rows)
    write_csv(agg_path, SWEEP_COLUMNS, agg_rows)
    outputs = [raw_path, agg_path]
    if args.svg:
        svg_path = out / f"{stem}.svg"
        if command == "memory-curve":
            series = [(f"{c.topology.value} rho={c.rho:g}", np.array(c.taus), c.mean, c.std)
                      for c in curves]
            write_svg(svg_path, series, "tau", "gamma")
        else:
            series = []
            for kind in extras["kinds"]:
                group = [c for c in curves if c.topology.value == kind]
                rhos = np.array([c.rho for c in group])
                for j, tau in enumerate(config.taus):
                    series.append((f"{kind} tau={tau}", rhos,
                                   np.array([c.mean[j] for c in group]),
                                   np.array([c.std[j] for c in group])))
            write_svg(svg_path, series, "rho", "gamma")
        outputs.append(svg_path)
    write_manifest(out / f"{stem}_manifest.json", command, config, extras, outputs, started)
    for p in outputs:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_memory_curve(args) -> int:
    return _run_curves(args, "memory-curve")


def cmd_sr_sweep(args) -> int:
    return _run_curves(args, "sr-sweep")


def cmd_rank_scan(args) -> int:
    started = _now()
    config, extras = load_run_config(args, "rank-scan")
    out = output_dir(args.out_dir)
    raw, agg = rank_scan(extras["kinds"], extras["ns"], extras["rho"], extras["fixed"], config)
    raw_path, agg_path = out / "rank_scan_raw.csv", out / "rank_scan.csv"
    write_csv(raw_path, RAW_RANK_COLUMNS, raw.rows)
    write_csv(agg_path, RANK_COLUMNS, agg.rows)
    outputs = [raw_path, agg_path]
    if args.svg:
        svg_path = out / "rank_scan.svg"
        series = []
        for kind in extras["kinds"]:
            sub = agg.where(topology=kind)
            series.append((kind, np.array(sub.column("n")), np.array(sub.column("mean_rank")),
                           np.array(sub.column("std_rank"))))
        write_svg(svg_path, series, "n", "rank of C")
        outputs.append(svg_path)
    write_manifest(out / "rank_scan_manifest.json", "rank-scan", config, extras, outputs, started)
    for p in outputs:
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="linres", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"linres {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def reservoir_flags(p, kind_required=True):
        p.add_argument("--kind", required=kind_required, type=_arg_type(TopologyKind.parse),
                       help="delay | cyclic | random | wigner")
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--rho", type=float, required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--input-seed", type=int, default=0)
        p.add_argument("--rescale", type=_arg_type(RescaleMode.parse), default=RescaleMode.AS_DISTRIBUTED,
                       help="as-distributed | exact | exact-msv")

    p = sub.add_parser("build", help="build a reservoir and write it as JSON")
    reservoir_flags(p)
    p.add_argument("--out", help="output file (default: <out-dir>/reservoir_<kind>_n<n>.json)")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("analyze", help="rank, nullspace and column norms of C")
    p.add_argument("reservoir", help="reservoir JSON written by `build`")
    p.add_argument("--tol", type=float, default=None, help="rank tolerance")
    p.add_argument("--include-matrix", action="store_true", help="embed C in the report")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("encode-verify", help="check x0 = C s against direct simulation")
    reservoir_flags(p)
    p.add_argument("--length", type=int, required=True, help="input window length K")
    p.add_argument("--signal-seed", type=int, default=0)
    p.add_argument("--out", help="write the encoded input as JSON")
    p.set_defaults(func=cmd_encode_verify)

    for name, func, helptext in (
        ("memory-curve", cmd_memory_curve, "accuracy against delay tau"),
        ("sr-sweep", cmd_sr_sweep, "accuracy against spectral radius"),
        ("rank-scan", cmd_rank_scan, "rank of C against reservoir size"),
    ):
        p = sub.add_parser(name, help=helptext)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--config", help="key = value config file")
        src.add_argument("--manifest", help="rerun from a manifest written by a previous run")
        p.add_argument("--out-dir")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--svg", action="store_true", help="also write an SVG plot")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"linres {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"linres {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"linres {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
