"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 solver failure, 4 size cap exceeded.
All outputs are deterministic functions of the arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import InputError, SizeCapExceeded, SolverError
from .frate import ScanReport, aep_scan, frate_lower_sequence, markov_aep_bracket
from .graphs import POWER_CAP, load_graph
from .markov import entropy_rate, load_chain, marginal
from .pullback import (
    hmm_frate_crosscheck,
    is_pullback_cohomomorphism,
    load_observation,
    pullback,
    pullback_f_identity,
    pullback_product_check,
    pullback_refinement_identity,
)
from .spectral import SpectralPointId, evaluate_report
from .transport import ornstein_distance

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_CAP = 0, 2, 3, 4


@dataclass
class ExperimentConfig:
    """Resolved arguments of one run."""

    graph: str | None = None
    chain: list[str] = field(default_factory=list)
    obs: str | None = None
    point: str = SpectralPointId.FRAC_CLIQUE_COVER.value
    n_max: int = 6
    k_max: int = 4
    c: list[float] = field(default_factory=lambda: [0.3, 0.5, 0.8])
    seed: int = 0
    cap_vertices: int | None = None
    out: str | None = None
    fmt: str = "csv"
    plot: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "ExperimentConfig":
        chain = args.chain or []
        cfg = cls(
            graph=args.graph,
            chain=list(chain),
            obs=args.obs,
            point=SpectralPointId.parse(args.point).value,
            n_max=args.n_max,
            k_max=args.k_max,
            c=sorted(args.c),
            seed=args.seed,
            cap_vertices=args.cap_vertices,
            out=args.out,
            fmt=args.format,
            plot=getattr(args, "plot", False),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        for path in [self.graph, self.obs, *self.chain]:
            if path is not None and not Path(path).is_file():
                raise InputError(f"no such file: {path}")
        if self.n_max < 1 or self.k_max < 1 or (self.cap_vertices is not None and self.cap_vertices < 1):
            raise InputError("n-max, k-max and cap-vertices must be positive")
        if any(not 0 < c < 1 for c in self.c):
            raise InputError("every c must lie in (0, 1)")

    def require(self, *names: str) -> None:
        for name in names:
            if not getattr(self, name):
                raise InputError(f"--{name.replace('_', '-')} is required")


# -- output helpers --------------------------------------------------------------
def _dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _table_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _emit(cfg: ExperimentConfig, name: str, text: str, stdout) -> None:
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    else:
        stdout.write(text)


# -- subcommands -------------------------------------------------------------------
def cmd_spectral(cfg: ExperimentConfig, stdout=sys.stdout) -> int:
    cfg.require("graph")
    g = load_graph(cfg.graph)
    report = evaluate_report(cfg.point, g, cfg.cap_vertices)
    data = {"graph": cfg.graph, "point": cfg.point, "n_vertices": len(g), **report.to_dict()}
    if cfg.fmt == "json":
        _emit(cfg, "spectral.json", _dump_json(data), stdout)
    else:
        header = ["point", "value", "certified_gap", "iterations", "solver"]
        _emit(cfg, "spectral.csv", _table_csv(header, [[data[h] for h in header]]), stdout)
    return EXIT_OK


def cmd_frate(cfg: ExperimentConfig, stdout=sys.stdout) -> int:
    cfg.require("graph", "chain")
    g = load_graph(cfg.graph)
    src = load_chain(cfg.chain[0])
    info = src.mutual_information()
    lowers = frate_lower_sequence(g, src, cfg.k_max)
    rows = []
    for k in range(1, cfg.k_max + 1):
        b = markov_aep_bracket(g, src, k)
        rows.append([k, b.upper, b.lower, b.gap, info / k, lowers[k - 1], b.certified_gap])
    header = ["k", "upper", "lower", "width", "mutual_information_over_k", "entropy_form_lower", "certified_gap"]
    if cfg.fmt == "json":
        data = {
            "graph": cfg.graph,
            "chain": cfg.chain[0],
            "entropy_rate": entropy_rate(src),
            "mutual_information": info,
            "rows": [dict(zip(header, r)) for r in rows],
        }
        _emit(cfg, "frate.json", _dump_json(data), stdout)
    else:
        _emit(cfg, "frate.csv", _table_csv(header, rows), stdout)
    return EXIT_OK


def scan_svg(report: ScanReport) -> str:
    """Plot of the normalized heuristic value against ``n``, one series per ``c``."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "ambiguous-aep"
    fig, ax = plt.subplots(figsize=(6, 4))
    for c in sorted({r.c for r in report.rows}):
        rows = [r for r in report.rows if r.c == c]
        ax.plot([r.n for r in rows], [r.heuristic_value for r in rows], marker="o", label=f"c = {c}")
    by_n = {r.n: r for r in report.rows}
    ns = sorted(by_n)
    ax.plot(ns, [by_n[n].bracket_upper for n in ns], "k--", lw=1, label="bracket upper")
    ax.plot(ns, [by_n[n].bracket_lower for n in ns], "k:", lw=1, label="bracket lower")
    ax.set_xlabel("n")
    ax.set_ylabel("(1/n) log2 f")
    ax.legend()
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def cmd_aep_scan(cfg: ExperimentConfig, stdout=sys.stdout) -> int:
    cfg.require("graph", "chain")
    g = load_graph(cfg.graph)
    src = load_chain(cfg.chain[0])
    report = aep_scan(g, src, cfg.point, cfg.n_max, cfg.c, cfg.k_max, cap=cfg.cap_vertices or POWER_CAP)
    if cfg.out:
        _emit(cfg, "scan.csv", report.to_csv(), stdout)
        _emit(cfg, "scan.json", report.to_json(), stdout)
        if cfg.plot:
            _emit(cfg, "scan.svg", scan_svg(report), stdout)
    else:
        stdout.write(report.to_json() if cfg.fmt == "json" else report.to_csv())
    return EXIT_OK


def cmd_pullback(cfg: ExperimentConfig, stdout=sys.stdout) -> int:
    cfg.require("obs")
    obs = load_observation(cfg.obs)
    g = pullback(obs)
    rng = np.random.default_rng(cfg.seed)
    p = rng.dirichlet(np.ones(obs.n_hidden))
    data = {
        "obs": cfg.obs,
        "point": cfg.point,
        "seed": cfg.seed,
        "pullback": g.to_dict(),
        "cohomomorphism": is_pullback_cohomomorphism(obs),
        "product_identity": {"equal": pullback_product_check(obs, obs)},
        "f_identity": pullback_f_identity(obs, range(obs.n_hidden), cfg.point).to_dict(),
        "refinement_identity": pullback_refinement_identity(obs, p).to_dict(),
    }
    if cfg.chain:
        src = load_chain(cfg.chain[0])
        if obs.graph.n_edges == 0:
            data["hmm_crosscheck"] = [r.to_dict() for r in hmm_frate_crosscheck(obs, src, cfg.k_max)]
    _emit(cfg, "pullback.json", _dump_json(data), stdout)
    return EXIT_OK


def cmd_ornstein(cfg: ExperimentConfig, stdout=sys.stdout) -> int:
    if len(cfg.chain) != 2:
        raise InputError("ornstein needs exactly two --chain files")
    a, b = (load_chain(path) for path in cfg.chain)
    if a.n_states != b.n_states:
        raise InputError("the two chains must share an alphabet")
    rows = []
    coupling = None
    for n in range(1, cfg.n_max + 1):
        coupling = ornstein_distance(marginal(a, n), marginal(b, n), a.n_states, n)
        rows.append({"n": n, "dbar": coupling.cost, "dual_bound": coupling.dual_bound, "certified_gap": coupling.certified_gap})
    data = {"chains": cfg.chain, "rows": rows}
    _emit(cfg, "ornstein.json", _dump_json(data), stdout)
    if cfg.out and coupling is not None:
        _emit(cfg, "coupling.csv", coupling.to_csv(), stdout)
    return EXIT_OK


def cmd_entropy_rate(cfg: ExperimentConfig, stdout=sys.stdout) -> int:
    cfg.require("chain")
    src = load_chain(cfg.chain[0])
    data = {
        "chain": cfg.chain[0],
        "states": list(src.alphabet),
        "entropy_rate": entropy_rate(src),
        "stationary": src.pi.tolist(),
        "period": src.period,
        "mutual_information": src.mutual_information(),
    }
    _emit(cfg, "entropy_rate.json", _dump_json(data), stdout)
    return EXIT_OK


COMMANDS = {
    "spectral": cmd_spectral,
    "frate": cmd_frate,
    "aep-scan": cmd_aep_scan,
    "pullback": cmd_pullback,
    "ornstein": cmd_ornstein,
    "entropy-rate": cmd_entropy_rate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ambiguous-aep", description="Spectral points, F-rates and typical subsets of confusability graphs.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="graph JSON file {\"vertices\", \"edges\"}")
    common.add_argument("--chain", action="append", help="chain JSON file {\"states\", \"W\"} (repeat for ornstein)")
    common.add_argument("--obs", help="observation JSON file {\"hidden\", \"map\", \"graph\"}")
    common.add_argument("--point", default="fcc", choices=[p.value for p in SpectralPointId])
    common.add_argument("--n-max", type=int, default=6)
    common.add_argument("--k-max", type=int, default=4)
    common.add_argument("--c", type=float, nargs="+", default=[0.3, 0.5, 0.8])
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output directory (default: standard output)")
    common.add_argument("--cap-vertices", type=int, help="vertex cap for exact solvers (default: per solver)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "aep-scan":
            p.add_argument("--plot", action="store_true", help="also write scan.svg (needs --out)")
    return parser


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = ExperimentConfig.from_args(args)
        return COMMANDS[args.command](cfg, stdout)
    except SizeCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
