"""
Topological curriculum: pacing, CBC ordering, confident extraction and the
TSS training loop.
"""

import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.stats

from ..config import get_settings
from ..errors import UndefinedStatisticError, UsageError
from ..io.ppr_cache import cached_ppr
from ..log import get_logger
from ..models.centrality import CbcScores
from ..models.gcn import AdamState, GcnParams
from ..models.graph import Graph
from ..models.trace import TrainTrace
from ..schemas.experiments import CorrelationReport, CorrelationRow
from ..schemas.training import (
    DifficultyKind,
    EpochRecord,
    ExtractionScore,
    PacingKind,
    ScheduleKind,
    TssConfig,
)
from ..validators import ensure_labels
from .centrality import cbc_scores, feature_difficulty, neighborhood_difficulty
from .gcn import accuracy, adam_step, init_params, loss_and_grads, predict_from, train_plain
from .graphs import normalized_adjacency
from .ppr import DEFAULT_ALPHA, DEFAULT_TOL, ppr_matrix

logger = get_logger(__name__)


# Invariants every curriculum trace must satisfy
TRACE_REQUIREMENTS = {
    "lambda_monotone": "Pace is non-decreasing across epochs",
    "lambda_reaches_one": "Pace reaches 1 by the last recorded epoch",
    "pool_monotone": "Candidate pool size is non-decreasing",
    "pool_size_matches": "Pool size equals floor(pace * training nodes)",
    "confident_in_pool": "Every confident node lies in the current pool prefix",
    "confident_in_train": "Every confident node is a fit training node",
}


def pacing(kind: Union[PacingKind, str], lambda_prev: float, lambda0: float, t: int, T: int) -> float:
    """
    Next pace value.

    linear and root are recurrences on ``lambda_prev``; geometric is the closed
    form lambda0 ** (1 - t / T). Results are clamped to [lambda0, 1] and t == T
    always yields 1.
    """
    kind = PacingKind(kind)
    if T < 1 or not 1 <= t <= T:
        raise UsageError(f"t must lie in [1, {T}], got {t}")
    if not 0.0 < lambda0 <= 1.0:
        raise UsageError("lambda0 must lie in (0, 1]")
    if t == T:
        return 1.0
    frac = t / T
    if kind is PacingKind.LINEAR:
        value = lambda_prev + (1.0 - lambda_prev) * frac
    elif kind is PacingKind.ROOT:
        value = math.sqrt(lambda_prev ** 2 + (1.0 - lambda_prev ** 2) * frac)
    else:
        value = lambda0 ** (1.0 - frac)
    return float(min(1.0, max(lambda0, value)))


def pacing_schedule(kind: Union[PacingKind, str], lambda0: float, T: int) -> List[float]:
    """[lambda_1, ..., lambda_T] starting from lambda_0 = lambda0."""
    values, current = [], lambda0
    for t in range(1, T + 1):
        current = pacing(kind, current, lambda0, t, T)
        values.append(current)
    return values


def sort_by_cbc(scores: np.ndarray, train_ids: Sequence[int]) -> np.ndarray:
    """Train ids in ascending score order, ties broken by id."""
    ids = np.asarray(train_ids, dtype=np.int64)
    values = np.asarray(scores, dtype=np.float64)[ids]
    return ids[np.lexsort((ids, values))]


def extract_confident(predictions: np.ndarray, noisy_labels: np.ndarray, pool: Sequence[int]) -> np.ndarray:
    """Pool members whose prediction agrees with their noisy label, in pool order."""
    pool = np.asarray(pool, dtype=np.int64)
    return pool[np.asarray(predictions)[pool] == np.asarray(noisy_labels)[pool]]


def confident_subset(params: GcnParams, graph: Graph, noisy_labels: np.ndarray, pool: Sequence[int]) -> np.ndarray:
    """Confident nodes of ``pool`` under the classifier ``params``."""
    if len(pool) == 0:
        raise UsageError("candidate pool must not be empty")
    predictions, _ = predict_from(params, normalized_adjacency(graph, with_self_loops=True), graph.features)
    return extract_confident(predictions, noisy_labels, pool)


def extraction_fscore(
    extracted_ids: Sequence[int],
    clean_flags: np.ndarray,
    pool_ids: Optional[Sequence[int]] = None,
) -> ExtractionScore:
    """
    Precision, recall and F-score of an extraction against true cleanliness.

    Recall is measured against the clean members of ``pool_ids`` (every node
    when omitted). Undefined ratios are reported as None.
    """
    flags = np.asarray(clean_flags, dtype=bool)
    extracted = np.unique(np.asarray(extracted_ids, dtype=np.int64))
    pool = np.arange(flags.size) if pool_ids is None else np.unique(np.asarray(pool_ids, dtype=np.int64))
    hits = int(flags[extracted].sum()) if extracted.size else 0
    clean_in_pool = int(flags[pool].sum())

    precision = hits / extracted.size if extracted.size else None
    recall = hits / clean_in_pool if clean_in_pool else None
    if precision is None or recall is None:
        fscore = None
    elif precision + recall == 0:
        fscore = 0.0
    else:
        fscore = 2.0 * precision * recall / (precision + recall)
    return ExtractionScore(precision=precision, recall=recall, fscore=fscore)


def split_noisy_validation(train_ids: np.ndarray, fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Reserve ``fraction`` of the training nodes as a noisy validation set."""
    train_ids = np.asarray(train_ids, dtype=np.int64)
    count = int(round(fraction * train_ids.size))
    if count >= train_ids.size:
        raise UsageError("noisy validation would consume every training node")
    order = np.random.default_rng(seed).permutation(train_ids)
    return np.sort(order[count:]), np.sort(order[:count])


def difficulty_scores(
    graph: Graph,
    noisy_labels: np.ndarray,
    node_ids: np.ndarray,
    config: TssConfig,
    parallelism: int = 1,
    cache_dir: Optional[Path] = None,
) -> np.ndarray:
    """Per-node difficulty under the configured measurer; higher is harder."""
    if config.difficulty is DifficultyKind.FEATURE:
        return feature_difficulty(graph, noisy_labels, node_ids)
    if config.difficulty is DifficultyKind.NEIGHBORHOOD:
        return neighborhood_difficulty(graph, noisy_labels, node_ids)
    return topological_cbc(
        graph, noisy_labels, node_ids,
        alpha=config.alpha, tol=config.tol, epsilon=config.epsilon,
        pair_budget=config.pair_budget, seed=config.seed,
        parallelism=parallelism, cache_dir=cache_dir,
    ).scores


def topological_cbc(
    graph: Graph,
    noisy_labels: np.ndarray,
    node_ids: np.ndarray,
    alpha: float = DEFAULT_ALPHA,
    tol: float = DEFAULT_TOL,
    epsilon: float = 1e-12,
    pair_budget: Optional[int] = None,
    seed: int = 0,
    parallelism: int = 1,
    cache_dir: Optional[Path] = None,
) -> CbcScores:
    """PPR on the self-loop-free adjacency followed by CBC over ``node_ids``."""
    norm_adj = normalized_adjacency(graph, with_self_loops=False)
    sources = np.asarray(node_ids, dtype=np.int64)
    ppr = cached_ppr(
        cache_dir, norm_adj, alpha, tol, sources,
        lambda: ppr_matrix(norm_adj, alpha=alpha, tol=tol, parallelism=parallelism, sources=sources),
    )
    return cbc_scores(ppr, noisy_labels, sources, epsilon=epsilon, pair_budget=pair_budget, seed=seed, parallelism=parallelism)


def _mask(ids: np.ndarray, n: int) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    mask[ids] = True
    return mask


def run_tss(
    graph: Graph,
    noisy_labels: np.ndarray,
    config: TssConfig,
    parallelism: int = 1,
    cache_dir: Optional[Path] = None,
) -> Tuple[GcnParams, TrainTrace]:
    """
    Train a GCN with Topological Sample Selection.

    Steps: carve a noisy validation split from the training nodes, pretrain an
    extractor on the rest, order those nodes by difficulty, then for t = 1..T
    grow the candidate pool by the pacing function and take one optimiser step
    on the pool members the extractor agrees with. Returns the checkpoint with
    the best noisy-validation accuracy and the full trace.
    """
    noisy = ensure_labels(noisy_labels, graph.n, graph.num_classes, "noisy labels")
    train_ids = graph.train_ids
    if train_ids.size == 0:
        raise UsageError("train mask is empty")
    if cache_dir is None:
        cache_dir = get_settings().cache_dir

    fit_ids, val_ids = split_noisy_validation(train_ids, config.noisy_val_fraction, config.seed)
    fit_mask = _mask(fit_ids, graph.n)
    val_mask = _mask(val_ids, graph.n) if val_ids.size else graph.val_mask
    eval_labels = graph.clean_labels if graph.clean_labels is not None else noisy
    clean_flags = (noisy == graph.clean_labels) if graph.clean_labels is not None else None
    logger.info("tss_started", fit=int(fit_ids.size), noisy_val=int(val_ids.size), T=config.T,
                pacing=config.pacing.value, difficulty=config.difficulty.value, schedule=config.schedule.value)

    norm_adj = normalized_adjacency(graph, with_self_loops=True)
    pretrain_config = config.train.model_copy(update={"epochs": config.pretrain_epochs, "patience": None})
    extractor, _ = train_plain(graph, noisy, fit_mask, pretrain_config, val_mask=val_mask, norm_adj=norm_adj)
    extractor_predictions, _ = predict_from(extractor, norm_adj, graph.features)

    scores = difficulty_scores(graph, noisy, fit_ids, config, parallelism=parallelism, cache_dir=cache_dir)
    order = sort_by_cbc(scores, fit_ids)
    trace = TrainTrace(sorted_order=order, fit_ids=fit_ids, noisy_val_ids=val_ids)

    train = config.train
    params = init_params(graph.feature_dim, train.hidden, graph.num_classes, train.seed)
    state = AdamState.zeros_like(params)
    dropout_rng = np.random.default_rng(train.seed + 1) if train.dropout > 0 else None
    n_fit = fit_ids.size

    best_params, best_val, best_epoch, stale = params.copy(), -1.0, None, 0
    lambda_t = config.lambda0
    vanilla_set = extract_confident(extractor_predictions, noisy, order) if config.schedule is ScheduleKind.VANILLA else None

    for t in range(1, config.T + 1):
        if config.refresh_every and t > 1 and (t - 1) % config.refresh_every == 0:
            extractor_predictions, _ = predict_from(params, norm_adj, graph.features)
            logger.debug("extractor_refreshed", t=t)

        if vanilla_set is not None:
            lambda_t, pool = 1.0, order
            confident = vanilla_set
        else:
            lambda_t = pacing(config.pacing, lambda_t, config.lambda0, t, config.T)
            pool = order[: int(math.floor(lambda_t * n_fit))]
            confident = extract_confident(extractor_predictions, noisy, pool)

        loss, skipped = None, confident.size == 0
        if skipped:
            logger.warning("empty_confident_subset", t=t, pool_size=int(pool.size))
        else:
            loss, grads = loss_and_grads(
                params, norm_adj, graph.features, noisy, _mask(confident, graph.n).astype(np.float64),
                weight_decay=train.weight_decay, dropout=train.dropout, rng=dropout_rng,
            )
            state, params = adam_step(state, params, grads, train.lr)

        predictions, _ = predict_from(params, norm_adj, graph.features)
        val_acc = accuracy(predictions, noisy, val_mask)
        trace.append(EpochRecord(
            t=t,
            lambda_t=lambda_t,
            pool_size=int(pool.size),
            confident_size=int(confident.size),
            confident_ids=[int(i) for i in np.sort(confident)],
            loss=loss,
            val_acc=val_acc,
            test_acc=accuracy(predictions, eval_labels, graph.test_mask),
            skipped=skipped,
            extraction=extraction_fscore(confident, clean_flags, pool) if clean_flags is not None else None,
        ))

        if skipped:
            continue
        if val_acc is None or val_acc > best_val:
            best_params, best_val, best_epoch, stale = params.copy(), (val_acc if val_acc is not None else best_val), t, 0
        elif lambda_t >= 1.0:
            stale += 1
            if config.patience is not None and stale >= config.patience:
                logger.info("tss_early_stop", t=t, best_epoch=best_epoch)
                break

    final = best_params if best_epoch is not None else params
    trace.params = final
    trace.best_epoch = best_epoch
    trace.best_val_acc = best_val if best_val >= 0 else None
    logger.info("tss_finished", epochs=len(trace.records), best_epoch=best_epoch, best_val=trace.best_val_acc)
    return final, trace


def check_trace(trace: TrainTrace, train_mask: np.ndarray) -> Dict[str, Any]:
    """
    Audit a curriculum trace against the pacing and pool invariants.

    Returns:
        Audit result with validity flag and per-check details
    """
    records = trace.records
    lambdas = np.asarray(trace.lambdas)
    pools = np.asarray(trace.pool_sizes)
    order = np.asarray(trace.sorted_order)
    fit = set(int(i) for i in trace.fit_ids)
    train_mask = np.asarray(train_mask, dtype=bool)

    in_pool = all(set(r.confident_ids) <= set(int(i) for i in order[: r.pool_size]) for r in records)
    in_train = all(all(train_mask[i] and i in fit for i in r.confident_ids) for r in records)
    vanilla = bool(records) and all(r.lambda_t == 1.0 and r.pool_size == order.size for r in records)
    sizes_match = vanilla or all(r.pool_size == int(math.floor(r.lambda_t * order.size)) for r in records)
    checks = {
        "lambda_monotone": bool(np.all(np.diff(lambdas) >= 0)),
        "lambda_reaches_one": bool(records) and lambdas[-1] == 1.0,
        "pool_monotone": bool(np.all(np.diff(pools) >= 0)),
        "pool_size_matches": sizes_match,
        "confident_in_pool": in_pool,
        "confident_in_train": in_train,
    }
    details = {
        key: {"passed": bool(checks[key]), "description": description}
        for key, description in TRACE_REQUIREMENTS.items()
    }
    passed = sum(1 for item in details.values() if item["passed"])
    return {
        "is_valid": passed == len(TRACE_REQUIREMENTS),
        "passed": passed,
        "total": len(TRACE_REQUIREMENTS),
        "details": details,
    }


def cbc_fscore_correlation(
    graph: Graph,
    noisy_labels: np.ndarray,
    pretrained_params: GcnParams,
    num_subsets: int = 50,
    subset_size: Optional[int] = None,
    seed: int = 0,
    cbc: Optional[CbcScores] = None,
    alpha: float = DEFAULT_ALPHA,
) -> CorrelationReport:
    """
    Pearson correlation between subset mean CBC and confident-extraction F-score.

    Subsets are drawn uniformly without replacement from the training nodes;
    ``subset_size`` defaults to a tenth of them.
    """
    if graph.clean_labels is None:
        raise UsageError("clean labels are required to score extraction quality")
    noisy = ensure_labels(noisy_labels, graph.n, graph.num_classes, "noisy labels")
    train_ids = graph.train_ids
    size = subset_size or max(2, train_ids.size // 10)
    if num_subsets < 3 or size > train_ids.size:
        raise UsageError("need at least 3 subsets no larger than the training set")

    if cbc is None:
        cbc = topological_cbc(graph, noisy, train_ids, alpha=alpha, seed=seed)
    predictions, _ = predict_from(pretrained_params, normalized_adjacency(graph, with_self_loops=True), graph.features)
    clean_flags = noisy == graph.clean_labels

    rng = np.random.default_rng(seed)
    rows: List[CorrelationRow] = []
    for index in range(num_subsets):
        subset = np.sort(rng.choice(train_ids, size=size, replace=False))
        score = extraction_fscore(extract_confident(predictions, noisy, subset), clean_flags, subset)
        rows.append(CorrelationRow(
            subset=index,
            mean_cbc=float(cbc.subset(subset).mean()),
            precision=score.precision,
            recall=score.recall,
            fscore=score.fscore,
        ))

    usable = [row for row in rows if row.fscore is not None]
    means = np.array([row.mean_cbc for row in usable])
    fscores = np.array([row.fscore for row in usable])
    if len(usable) < 3 or np.ptp(means) == 0 or np.ptp(fscores) == 0:
        raise UndefinedStatisticError("correlation is undefined for constant CBC or F-score", "pearson")
    r, p_value = scipy.stats.pearsonr(means, fscores)
    logger.info("cbc_fscore_correlation", r=float(r), p_value=float(p_value), subsets=len(usable))
    return CorrelationReport(
        pearson_r=float(r), p_value=float(p_value), num_subsets=num_subsets, subset_size=size, rows=rows,
    )
