"""Seeded experiment runs, aggregation and resumable parameter sweeps."""

import hashlib
import itertools
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..errors import UsageError
from ..io.checkpoints import save_checkpoint
from ..io.reports import read_json, write_history_csv, write_json, write_trace
from ..log import get_logger
from ..models.gcn import GcnParams
from ..models.graph import Graph
from ..models.trace import TrainTrace
from ..schemas.experiments import CorrelationReport, MethodAggregate, MetricsReport, RunResult
from ..schemas.noise import NoiseSpec
from ..schemas.training import HistoryRow, TssConfig
from .curriculum import cbc_fscore_correlation, run_tss, split_noisy_validation
from .gcn import accuracy, predict, train_plain
from .noise import corrupt_graph_labels

logger = get_logger(__name__)

METHODS = ("plain", "tss")

# Sweep axes and the model each one overrides
TSS_AXES = {"lambda0", "pacing", "alpha", "difficulty", "schedule", "T", "pretrain_epochs", "refresh_every"}
NOISE_AXES = {"noise_rate": "rate", "noise_kind": "kind"}


def _key_int(key: Any) -> int:
    if isinstance(key, (int, np.integer)) and key >= 0:
        return int(key)
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def derive_seed(root: int, *keys: Any) -> int:
    """Deterministic child seed of ``root`` for the sub-task named by ``keys``."""
    sequence = np.random.SeedSequence(int(root), spawn_key=tuple(_key_int(key) for key in keys))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


class MethodRun(NamedTuple):
    """Outcome of one method on one seed."""

    result: RunResult
    extraction: List[Optional[float]]
    params: GcnParams
    history: Optional[List[HistoryRow]] = None
    trace: Optional[TrainTrace] = None


def run_seeds(root: int, count: int) -> List[int]:
    if count < 1:
        raise UsageError("at least one seed is required")
    return [derive_seed(root, "run", index) for index in range(count)]


def seeded_config(config: TssConfig, seed: int) -> TssConfig:
    """Copy of ``config`` whose split, sampling and initialisation seeds derive from ``seed``."""
    train = config.train.model_copy(update={"seed": derive_seed(seed, "init")})
    return config.model_copy(update={"seed": derive_seed(seed, "split"), "train": train})


def noisy_labels_for(graph: Graph, noise: Optional[NoiseSpec], seed: int) -> np.ndarray:
    """Attached noisy labels, or fresh ones drawn from ``noise`` seeded by ``seed``."""
    if noise is None:
        if graph.noisy_labels is not None:
            return graph.noisy_labels
        if graph.clean_labels is None:
            raise UsageError("graph has no labels")
        return graph.clean_labels
    spec = noise.model_copy(update={"seed": derive_seed(seed, "noise")})
    return corrupt_graph_labels(graph, spec)


def run_method(
    graph: Graph,
    noisy_labels: np.ndarray,
    method: str,
    config: TssConfig,
    seed: int,
    cell: Optional[Dict[str, Any]] = None,
    parallelism: int = 1,
    cache_dir: Optional[Path] = None,
) -> MethodRun:
    """
    Run ``plain`` or ``tss`` once.

    Both methods hold out the same noisy validation split. ``plain`` selects its
    checkpoint on that split with ``config.train.patience`` (falling back to
    ``config.patience``). For tss with known clean labels the run carries the
    per-epoch extraction F-scores.
    """
    if method not in METHODS:
        raise UsageError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    config = seeded_config(config, seed)
    eval_labels = graph.clean_labels if graph.clean_labels is not None else noisy_labels
    history: Optional[List[HistoryRow]] = None
    trace: Optional[TrainTrace] = None

    if method == "plain":
        fit_ids, val_ids = split_noisy_validation(graph.train_ids, config.noisy_val_fraction, config.seed)
        fit_mask = np.zeros(graph.n, dtype=bool)
        fit_mask[fit_ids] = True
        val_mask = np.zeros(graph.n, dtype=bool)
        val_mask[val_ids] = True
        patience = config.train.patience or config.patience
        params, history = train_plain(
            graph, noisy_labels, fit_mask, config.train.model_copy(update={"patience": patience}),
            val_mask=val_mask if val_ids.size else None,
        )
        valued = [row for row in history if row.val_acc is not None]
        best = max(valued, key=lambda row: row.val_acc) if valued and patience else None
        extraction: List[Optional[float]] = []
        val_acc, best_epoch, epochs_run = (best.val_acc, best.epoch, len(history)) if best else (
            history[-1].val_acc, history[-1].epoch, len(history)
        )
    else:
        params, trace = run_tss(graph, noisy_labels, config, parallelism=parallelism, cache_dir=cache_dir)
        extraction = [record.extraction.fscore if record.extraction else None for record in trace.records]
        val_acc, best_epoch, epochs_run = trace.best_val_acc, trace.best_epoch, len(trace.records)

    predictions, _ = predict(params, graph)
    test_acc = accuracy(predictions, eval_labels, graph.test_mask)
    result = RunResult(
        method=method,
        seed=seed,
        test_acc=test_acc if test_acc is not None else 0.0,
        val_acc=val_acc,
        best_epoch=best_epoch,
        epochs_run=epochs_run,
        cell=cell or {},
    )
    logger.info("run_finished", method=method, seed=seed, test_acc=result.test_acc, cell=cell or {})
    return MethodRun(result, extraction, params, history, trace)


def write_run_artifacts(run_dir: Path, run: MethodRun, config: TssConfig) -> Dict[str, Path]:
    """History CSV (plain) or trace files (tss), plus the selected checkpoint."""
    paths = {}
    if run.history is not None:
        paths["history"] = write_history_csv(run_dir / "history.csv", run.history)
    if run.trace is not None:
        summary = {"result": run.result, "config": seeded_config(config, run.result.seed)}
        paths.update(write_trace(run_dir, run.trace, summary))
    paths["checkpoint"] = save_checkpoint(
        run_dir / "model.ckpt", run.params, {"method": run.result.method, "seed": run.result.seed, "hidden": run.params.hidden},
    )
    return paths


def aggregate(runs: Sequence[RunResult]) -> List[MethodAggregate]:
    """Mean and population std of test accuracy per (method, cell), in first-seen order."""
    groups: Dict[Tuple[str, str], List[RunResult]] = {}
    for run in runs:
        groups.setdefault((run.method, cell_key(run.cell)), []).append(run)
    rows = []
    for (method, _), members in groups.items():
        values = np.array([member.test_acc for member in members])
        rows.append(MethodAggregate(
            method=method,
            cell=members[0].cell,
            mean=float(values.mean()),
            std=float(values.std()),
            n=len(members),
        ))
    return rows


def run_experiment(
    graph: Graph,
    methods: Sequence[str],
    config: TssConfig,
    seeds: Sequence[int],
    noise: Optional[NoiseSpec] = None,
    cell: Optional[Dict[str, Any]] = None,
    workers: int = 1,
    cache_dir: Optional[Path] = None,
    artifacts_dir: Optional[Path] = None,
) -> MetricsReport:
    """
    Every method on every seed; seeds run in parallel when ``workers`` > 1.

    With ``artifacts_dir`` each run also writes its history CSV or trace and a
    checkpoint under ``runs/<method>-<seed>/``.
    """

    def one_seed(seed: int) -> List[MethodRun]:
        labels = noisy_labels_for(graph, noise, seed)
        outcomes = []
        for method in methods:
            run = run_method(graph, labels, method, config, seed, cell=cell, cache_dir=cache_dir)
            if artifacts_dir is not None:
                write_run_artifacts(Path(artifacts_dir) / "runs" / f"{method}-{seed}", run, config)
            outcomes.append(run)
        return outcomes

    if workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_seed = list(pool.map(one_seed, seeds))
    else:
        per_seed = [one_seed(seed) for seed in seeds]

    runs, extraction = [], {}
    for outcomes in per_seed:
        for run in outcomes:
            runs.append(run.result)
            if run.extraction:
                extraction[f"{run.result.method}:{run.result.seed}"] = run.extraction
    return MetricsReport(runs=runs, aggregate=aggregate(runs), extraction=extraction)


def correlation_study(
    graph: Graph,
    noisy_labels: np.ndarray,
    config: TssConfig,
    num_subsets: int,
    seed: int,
    subset_size: Optional[int] = None,
) -> CorrelationReport:
    """Pretrain an extractor on all training nodes and correlate subset CBC with extraction quality."""
    config = seeded_config(config, seed)
    pretrain = config.train.model_copy(update={"epochs": config.pretrain_epochs, "patience": None})
    extractor, _ = train_plain(graph, noisy_labels, graph.train_mask, pretrain)
    return cbc_fscore_correlation(
        graph, noisy_labels, extractor,
        num_subsets=num_subsets, subset_size=subset_size, seed=config.seed, alpha=config.alpha,
    )


def cell_key(cell: Dict[str, Any]) -> str:
    """File-name-safe, order-independent key of a sweep cell."""
    if not cell:
        return "base"
    parts = [f"{name}={cell[name]}" for name in sorted(cell)]
    return "__".join(part.replace("/", "_").replace(" ", "") for part in parts)


def expand_grid(grid: Dict[str, Sequence[Any]]) -> List[Dict[str, Any]]:
    """Cartesian product of the grid axes, axes in sorted order."""
    unknown = set(grid) - TSS_AXES - set(NOISE_AXES)
    if unknown:
        raise UsageError(f"unknown sweep axes: {', '.join(sorted(unknown))}")
    names = sorted(grid)
    for name in names:
        if not isinstance(grid[name], (list, tuple)) or not grid[name]:
            raise UsageError(f"sweep axis {name!r} must be a non-empty list")
    return [dict(zip(names, values)) for values in itertools.product(*(grid[name] for name in names))]


def apply_cell(config: TssConfig, noise: Optional[NoiseSpec], cell: Dict[str, Any]) -> Tuple[TssConfig, Optional[NoiseSpec]]:
    """Validated copies of the base config and noise spec with the cell's overrides."""
    tss_updates = {name: value for name, value in cell.items() if name in TSS_AXES}
    noise_updates = {NOISE_AXES[name]: value for name, value in cell.items() if name in NOISE_AXES}
    try:
        config = TssConfig.model_validate({**config.model_dump(), **tss_updates})
        if noise_updates:
            if noise is None:
                raise UsageError("noise axes need a base noise spec")
            noise = NoiseSpec.model_validate({**noise.model_dump(), **noise_updates})
    except ValueError as exc:
        raise UsageError(f"invalid sweep cell {cell_key(cell)}: {exc}") from exc
    return config, noise


def run_sweep(
    graph: Graph,
    grid: Dict[str, Sequence[Any]],
    methods: Sequence[str],
    config: TssConfig,
    seeds: Sequence[int],
    out_dir: Path,
    noise: Optional[NoiseSpec] = None,
    workers: int = 1,
    cache_dir: Optional[Path] = None,
) -> MetricsReport:
    """
    Run every grid cell, writing ``cells/<key>.json`` as each completes.

    Cells whose file already exists are loaded instead of rerun, so an
    interrupted sweep resumes where it stopped.
    """
    cells_dir = Path(out_dir) / "cells"
    runs: List[RunResult] = []
    extraction: Dict[str, List[Optional[float]]] = {}
    for cell in expand_grid(grid):
        path = cells_dir / f"{cell_key(cell)}.json"
        if path.exists():
            report = MetricsReport.model_validate(read_json(path))
            logger.info("sweep_cell_resumed", cell=cell_key(cell))
        else:
            cell_config, cell_noise = apply_cell(config, noise, cell)
            report = run_experiment(
                graph, methods, cell_config, seeds, noise=cell_noise, cell=cell, workers=workers, cache_dir=cache_dir,
            )
            write_json(path, report)
            logger.info("sweep_cell_done", cell=cell_key(cell))
        runs.extend(report.runs)
        for name, values in report.extraction.items():
            extraction[f"{cell_key(cell)}:{name}"] = values
    return MetricsReport(runs=runs, aggregate=aggregate(runs), extraction=extraction)
