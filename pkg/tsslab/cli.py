"""
Command-line driver: ``python -m tsslab <command>``.

Every command writes ``manifest.json`` into its output directory before any
result file. Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from . import __version__
from .config import get_settings
from .errors import GraphValidationError, NoiseConfigError, ParseError, TssError, UsageError
from .io.graph_files import CANONICAL_FILES, file_sha256, load_graph_dir, save_graph, write_labels
from .io.reports import read_json, write_cbc_csv, write_csv, write_json, write_manifest
from .log import configure_logging, get_logger
from .models.graph import BoundaryTag, Graph
from .schemas import (
    DifficultyKind,
    ExperimentManifest,
    NoiseKind,
    NoiseSpec,
    PacingKind,
    SbmConfig,
    ScheduleKind,
    TssConfig,
)
from .services.centrality import betweenness_centrality
from .services.curriculum import topological_cbc
from .services.experiments import (
    METHODS,
    cell_key,
    correlation_study,
    derive_seed,
    noisy_labels_for,
    run_experiment,
    run_seeds,
    run_sweep,
)
from .services.graphs import classify_boundary, edge_homophily, generate_sbm_from_config
from .services.noise import corrupt_graph_labels, effective_instance_std, noise_audit, scope_mask

logger = get_logger(__name__)

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_CHECK_FAILED = 0, 1, 2, 3
INPUT_ERRORS = (
    UsageError, ParseError, GraphValidationError, NoiseConfigError, ValidationError, FileNotFoundError, UnicodeDecodeError,
)


class CliUsageError(UsageError):
    """Raised by the argument parser instead of exiting."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise CliUsageError(f"{self.prog}: {message}")


# ============================================================================
# Helpers
# ============================================================================

def _graph_dir(path: Path) -> Path:
    if not path.is_dir():
        raise UsageError(f"graph directory {path} does not exist")
    return path


def _input_hashes(graph_dir: Path, extra: Sequence[Optional[Path]] = ()) -> Dict[str, str]:
    hashes = {name: file_sha256(graph_dir / name) for name in CANONICAL_FILES.values() if (graph_dir / name).exists()}
    for path in extra:
        if path is not None:
            hashes[path.name] = file_sha256(path)
    return hashes


def _recorded_num_classes(graph_dir: Path) -> Optional[int]:
    """Class count from a ``gen`` manifest in the graph directory, if there is one."""
    path = graph_dir / "manifest.json"
    if not path.exists():
        return None
    manifest = read_json(path)
    if manifest.get("command") != "gen":
        return None
    return manifest.get("config", {}).get("sbm", {}).get("num_classes")


def _load(args) -> Graph:
    graph_dir = _graph_dir(args.graph)
    labels_path = getattr(args, "labels", None)
    if labels_path is not None and not labels_path.exists():
        raise UsageError(f"labels file {labels_path} does not exist")
    num_classes = getattr(args, "num_classes", None)
    if num_classes is None:
        num_classes = _recorded_num_classes(graph_dir)
    return load_graph_dir(graph_dir, noisy_labels_path=labels_path, num_classes=num_classes)


def _manifest(args, config: Dict[str, Any], seeds: List[int], outputs: List[str], stats=None, extra_inputs=()) -> ExperimentManifest:
    hashes = _input_hashes(args.graph, extra_inputs) if getattr(args, "graph", None) else {}
    return ExperimentManifest(
        command=args.command,
        tool_version=__version__,
        config=config,
        seeds=seeds,
        input_hashes=hashes,
        outputs=outputs,
        stats=stats or {},
    )


def _tss_config(args) -> TssConfig:
    """TssConfig from ``--config`` with flag overrides applied."""
    base: Dict[str, Any] = read_json(args.config) if args.config else {}
    overrides = {
        "alpha": args.alpha,
        "lambda0": args.lambda0,
        "pacing": args.pacing,
        "T": args.epochs,
        "pretrain_epochs": args.pretrain_epochs,
        "pair_budget": args.pair_budget,
        "epsilon": args.eps,
        "difficulty": args.difficulty,
        "schedule": args.schedule,
        "refresh_every": args.refresh_every,
    }
    base.update({key: value for key, value in overrides.items() if value is not None})
    if args.epochs is not None:
        base["train"] = {**base.get("train", {}), "epochs": args.epochs}
    return TssConfig.model_validate(base)


def _noise_spec(args) -> Optional[NoiseSpec]:
    if args.noise_kind is None:
        if args.noise_rate is not None:
            raise UsageError("--noise-rate requires --noise-kind")
        return None
    return NoiseSpec(
        kind=args.noise_kind,
        rate=args.noise_rate if args.noise_rate is not None else 0.0,
        seed=args.seed,
        scope=args.scope,
    )


def _noise_record(spec: Optional[NoiseSpec]) -> Optional[Dict[str, Any]]:
    if spec is None:
        return None
    record = spec.model_dump(mode="json")
    if spec.kind == NoiseKind.INSTANCE:
        record["effective_std"] = effective_instance_std(spec.rate, spec.std)
    return record


def _boundary_means(scores: np.ndarray, graph: Graph, ids: np.ndarray) -> Dict[str, Optional[float]]:
    near = np.array([tag == BoundaryTag.NEAR for tag in classify_boundary(graph)])[ids]
    values = scores[ids]
    return {
        "near_mean": float(values[near].mean()) if near.any() else None,
        "far_mean": float(values[~near].mean()) if (~near).any() else None,
        "near_count": int(near.sum()),
        "far_count": int((~near).sum()),
    }


# ============================================================================
# Commands
# ============================================================================

def cmd_gen(args) -> int:
    """Generate an SBM graph in the canonical file format."""
    base = read_json(args.config) if args.config else {}
    overrides = {
        "n": args.n,
        "num_classes": args.classes,
        "p_in": args.p_in,
        "p_out": args.p_out,
        "feature_dim": args.feature_dim,
        "feature_shift": args.feature_shift,
        "seed": args.seed,
        "train_fraction": args.train_fraction,
        "val_fraction": args.val_fraction,
    }
    base.update({key: value for key, value in overrides.items() if value is not None})
    config = SbmConfig.model_validate(base)
    graph = generate_sbm_from_config(config)
    try:
        homophily = edge_homophily(graph)
    except TssError:
        homophily = None

    out = Path(args.out)
    stats = {"homophily": homophily, "num_edges": graph.num_edges, "num_classes": graph.num_classes}
    write_manifest(out, ExperimentManifest(
        command="gen",
        tool_version=__version__,
        config={"sbm": config.model_dump()},
        seeds=[config.seed],
        outputs=sorted(CANONICAL_FILES.values()),
        stats=stats,
    ))
    save_graph(graph, out)
    print(f"n={graph.n} edges={graph.num_edges} homophily={homophily}")
    return EXIT_OK


def cmd_corrupt(args) -> int:
    """Write noisy labels for a graph plus an audit of the corruption."""
    graph = _load(args)
    spec = NoiseSpec(kind=args.noise_kind, rate=args.noise_rate, seed=args.seed, scope=args.scope, std=args.std)
    noisy = corrupt_graph_labels(graph, spec)
    mask = scope_mask(graph, spec.scope)
    audit = noise_audit(graph.clean_labels[mask], noisy[mask], graph.num_classes)

    out = Path(args.out)
    write_manifest(out, _manifest(args, {"noise": _noise_record(spec)}, [spec.seed], ["audit.json", "noisy_labels.txt"]))
    write_labels(out / "noisy_labels.txt", noisy)
    write_json(out / "audit.json", audit)
    print(f"flip_rate={audit.flip_rate:.6f} count={audit.count}")
    return EXIT_OK


def cmd_cbc(args) -> int:
    """Per-node CBC (and optionally shortest-path betweenness) as CSV."""
    graph = _load(args)
    labels = graph.noisy_labels if graph.noisy_labels is not None else graph.clean_labels
    ids = graph.train_ids if args.node_set == "train" else np.arange(graph.n)
    settings = get_settings()
    cbc = topological_cbc(
        graph, labels, ids,
        alpha=args.alpha, epsilon=args.eps, pair_budget=args.pair_budget, seed=args.seed,
        parallelism=args.workers or settings.workers, cache_dir=settings.cache_dir,
    )
    betweenness = betweenness_centrality(graph) if args.with_betweenness else None
    summary = _boundary_means(cbc.scores, graph, ids)
    summary.update(pair_count=cbc.pair_count, skipped_pairs=cbc.skipped_pairs, sampled=cbc.sampled)

    out = Path(args.out)
    config = {"alpha": args.alpha, "epsilon": args.eps, "pair_budget": args.pair_budget, "node_set": args.node_set}
    write_manifest(out, _manifest(args, config, [args.seed], ["cbc.csv", "cbc_summary.json"], extra_inputs=[args.labels]))
    write_cbc_csv(
        out / "cbc.csv", cbc, labels,
        clean_labels=graph.clean_labels, betweenness=betweenness, boundary=classify_boundary(graph),
    )
    write_json(out / "cbc_summary.json", summary)
    print(f"near_mean={summary['near_mean']} far_mean={summary['far_mean']}")
    if args.check_boundary:
        near, far = summary["near_mean"], summary["far_mean"]
        if near is None or far is None or near <= far:
            print("boundary check failed: near-boundary nodes do not score above far nodes", file=sys.stderr)
            return EXIT_CHECK_FAILED
    return EXIT_OK


def _aggregate_rows(report) -> List[Dict[str, Any]]:
    return [
        {"method": row.method, "cell": cell_key(row.cell), "mean": row.mean, "std": row.std, "n": row.n}
        for row in report.aggregate
    ]


def cmd_train(args) -> int:
    """Train plain and/or TSS models over one or more seeds."""
    graph = _load(args)
    config = _tss_config(args)
    noise = _noise_spec(args)
    methods = list(METHODS) if args.method == "both" else [args.method]
    seeds = run_seeds(args.seed, args.seeds)
    settings = get_settings()

    out = Path(args.out)
    outputs = ["aggregate.csv", "metrics.json"] + [f"runs/{method}-{seed}" for seed in seeds for method in methods]
    manifest_config = {
        "methods": methods,
        "tss": config.model_dump(mode="json"),
        "noise": _noise_record(noise),
        "root_seed": args.seed,
        "correlation_subsets": args.correlation_subsets,
    }
    write_manifest(out, _manifest(args, manifest_config, seeds, outputs, extra_inputs=[args.labels, args.config]))

    report = run_experiment(
        graph, methods, config, seeds, noise=noise,
        workers=args.workers or settings.workers, cache_dir=settings.cache_dir, artifacts_dir=out,
    )
    if args.correlation_subsets:
        seed = derive_seed(args.seed, "correlation")
        report.correlation = correlation_study(
            graph, noisy_labels_for(graph, noise, seeds[0]), config, args.correlation_subsets, seed,
        )
    write_json(out / "metrics.json", report)
    write_csv(out / "aggregate.csv", ["method", "cell", "mean", "std", "n"], _aggregate_rows(report))
    for row in report.aggregate:
        print(f"{row.method} mean={row.mean:.4f} std={row.std:.4f} n={row.n}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    """Grid sweep with per-cell results that survive interruption."""
    graph = _load(args)
    config = _tss_config(args)
    noise = _noise_spec(args)
    grid = read_json(args.grid)
    if not isinstance(grid, dict):
        raise UsageError("grid must be a JSON object mapping axis names to lists")
    methods = list(METHODS) if args.method == "both" else [args.method]
    seeds = run_seeds(args.seed, args.seeds)
    settings = get_settings()

    out = Path(args.out)
    manifest_config = {
        "methods": methods,
        "grid": grid,
        "tss": config.model_dump(mode="json"),
        "noise": _noise_record(noise),
        "root_seed": args.seed,
    }
    write_manifest(out, _manifest(args, manifest_config, seeds, ["aggregate.csv", "cells", "metrics.json"],
                                  extra_inputs=[args.labels, args.config, args.grid]))
    report = run_sweep(
        graph, grid, methods, config, seeds, out, noise=noise,
        workers=args.workers or settings.workers, cache_dir=settings.cache_dir,
    )
    write_json(out / "metrics.json", report)
    write_csv(out / "aggregate.csv", ["method", "cell", "mean", "std", "n"], _aggregate_rows(report))
    print(f"cells={len(report.aggregate)} runs={len(report.runs)}")
    return EXIT_OK


def cmd_serve(args) -> int:
    """Serve the HTTP API with uvicorn."""
    import uvicorn

    uvicorn.run("tsslab.main:app", host=args.host, port=args.port, log_level=get_settings().log_level.lower())
    return EXIT_OK


# ============================================================================
# Parser
# ============================================================================

def _add_training_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--graph", type=Path, required=True, help="Directory with edges/features/labels/splits files")
    parser.add_argument("--num-classes", type=int, help="Class count (default: gen manifest, else inferred from labels)")
    parser.add_argument("--labels", type=Path, help="Noisy label file (default: graph labels or --noise-*)")
    parser.add_argument("--method", choices=[*METHODS, "both"], default="both")
    parser.add_argument("--config", type=Path, help="TssConfig JSON file")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--lambda0", type=float)
    parser.add_argument("--pacing", choices=[kind.value for kind in PacingKind])
    parser.add_argument("--epochs", type=int, help="Curriculum epochs T and plain training epochs")
    parser.add_argument("--pretrain-epochs", type=int)
    parser.add_argument("--pair-budget", type=int)
    parser.add_argument("--eps", type=float)
    parser.add_argument("--difficulty", choices=[kind.value for kind in DifficultyKind])
    parser.add_argument("--schedule", choices=[kind.value for kind in ScheduleKind])
    parser.add_argument("--refresh-every", type=int)
    parser.add_argument("--seed", type=int, default=0, help="Root seed")
    parser.add_argument("--seeds", type=int, default=1, help="Number of derived run seeds")
    parser.add_argument("--noise-kind", choices=[kind.value for kind in NoiseKind])
    parser.add_argument("--noise-rate", type=float)
    parser.add_argument("--scope", choices=["train", "train_val", "all"], default="train")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", type=Path, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsslab", description="Topological Sample Selection lab")
    parser.add_argument("--version", action="version", version=f"tsslab {__version__}")
    parser.add_argument("--log-level", help="Override LOG_LEVEL")
    parser.add_argument("--log-format", choices=["console", "json"], help="Override LOG_FORMAT")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = commands.add_parser("gen", help="Generate a stochastic block model graph")
    gen.add_argument("--config", type=Path, help="SbmConfig JSON file")
    gen.add_argument("--n", type=int)
    gen.add_argument("--classes", type=int)
    gen.add_argument("--p-in", type=float)
    gen.add_argument("--p-out", type=float)
    gen.add_argument("--feature-dim", type=int)
    gen.add_argument("--feature-shift", type=float)
    gen.add_argument("--train-fraction", type=float)
    gen.add_argument("--val-fraction", type=float)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", type=Path, required=True)
    gen.set_defaults(func=cmd_gen)

    corrupt = commands.add_parser("corrupt", help="Corrupt a graph's labels")
    corrupt.add_argument("--graph", type=Path, required=True)
    corrupt.add_argument("--num-classes", type=int, help="Class count (default: gen manifest, else inferred from labels)")
    corrupt.add_argument("--noise-kind", choices=[kind.value for kind in NoiseKind], required=True)
    corrupt.add_argument("--noise-rate", type=float, required=True)
    corrupt.add_argument("--scope", choices=["train", "train_val", "all"], default="train")
    corrupt.add_argument("--std", type=float, default=0.1, help="Instance noise rate spread")
    corrupt.add_argument("--seed", type=int, default=0)
    corrupt.add_argument("--out", type=Path, required=True)
    corrupt.set_defaults(func=cmd_corrupt)

    cbc = commands.add_parser("cbc", help="Class-conditional betweenness per node")
    cbc.add_argument("--graph", type=Path, required=True)
    cbc.add_argument("--num-classes", type=int, help="Class count (default: gen manifest, else inferred from labels)")
    cbc.add_argument("--labels", type=Path, help="Noisy label file (default: graph labels)")
    cbc.add_argument("--alpha", type=float, default=0.15)
    cbc.add_argument("--eps", type=float, default=1e-12)
    cbc.add_argument("--pair-budget", type=int)
    cbc.add_argument("--node-set", choices=["train", "all"], default="train")
    cbc.add_argument("--with-betweenness", action="store_true", help="Also compute shortest-path betweenness")
    cbc.add_argument("--check-boundary", action="store_true",
                     help=f"Exit {EXIT_CHECK_FAILED} unless near-boundary nodes have higher mean CBC than far nodes")
    cbc.add_argument("--seed", type=int, default=0)
    cbc.add_argument("--workers", type=int)
    cbc.add_argument("--out", type=Path, required=True)
    cbc.set_defaults(func=cmd_cbc)

    train = commands.add_parser("train", help="Train plain and/or TSS models")
    _add_training_flags(train)
    train.add_argument("--correlation-subsets", type=int, help="Also run the CBC / extraction F-score study")
    train.set_defaults(func=cmd_train)

    sweep = commands.add_parser("sweep", help="Hyperparameter grid sweep")
    _add_training_flags(sweep)
    sweep.add_argument("--grid", type=Path, required=True, help="JSON object of axis -> list of values")
    sweep.set_defaults(func=cmd_sweep)

    serve = commands.add_parser("serve", help="Serve the HTTP API")
    serve.add_argument("--host", default="0.0.0.0")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except CliUsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    configure_logging(args.log_level, args.log_format)

    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        logger.exception("command_failed", command=args.command)
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
