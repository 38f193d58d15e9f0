"""Synthetic label noise generators and corruption audits."""

from typing import Optional

import numpy as np
import scipy.special
import scipy.stats

from ..errors import NoiseConfigError, UsageError
from ..log import get_logger
from ..models.graph import Graph
from ..models.noise import TransitionMatrix
from ..schemas.noise import NoiseAudit, NoiseKind, NoiseSpec

logger = get_logger(__name__)


def transition_matrix(kind: NoiseKind, rate: float, num_classes: int) -> TransitionMatrix:
    """
    Class-conditional flip matrix.

    symmetric: diagonal 1 - rate, off-diagonal rate / (C - 1).
    pairflip: diagonal 1 - rate, T[a][(a + 1) mod C] = rate.
    """
    kind = NoiseKind(kind)
    if kind == NoiseKind.INSTANCE:
        raise NoiseConfigError("instance-dependent noise has no single transition matrix; use instance_noise")
    if num_classes < 2:
        raise NoiseConfigError("label noise needs at least 2 classes")
    if not 0.0 <= rate < 1.0:
        raise NoiseConfigError(f"rate must lie in [0, 1), got {rate}")

    matrix = np.eye(num_classes) * (1.0 - rate)
    if kind == NoiseKind.SYMMETRIC:
        off = rate / (num_classes - 1)
        matrix += off * (1.0 - np.eye(num_classes))
    else:
        if rate >= 0.5:
            raise NoiseConfigError("pairflip rate must be < 0.5")
        matrix[np.arange(num_classes), (np.arange(num_classes) + 1) % num_classes] += rate
    return TransitionMatrix(matrix=matrix)


def _scope_mask(scope: Optional[np.ndarray], n: int) -> np.ndarray:
    if scope is None:
        return np.ones(n, dtype=bool)
    scope = np.asarray(scope, dtype=bool)
    if scope.shape != (n,):
        raise UsageError(f"scope mask must have length {n}")
    return scope


def apply_class_noise(
    labels: np.ndarray,
    matrix: TransitionMatrix,
    scope: Optional[np.ndarray] = None,
    seed: int = 0,
) -> np.ndarray:
    """Resample each in-scope label from its row of the transition matrix."""
    labels = np.asarray(labels, dtype=np.int64)
    scope = _scope_mask(scope, labels.size)
    if labels.size and (labels.min() < 0 or labels.max() >= matrix.num_classes):
        raise UsageError("labels fall outside the transition matrix classes")

    rng = np.random.default_rng(seed)
    noisy = labels.copy()
    targets = np.flatnonzero(scope)
    cumulative = np.cumsum(matrix.matrix, axis=1)
    cumulative[:, -1] = 1.0
    draws = rng.random(targets.size)
    rows = cumulative[labels[targets]]
    noisy[targets] = np.minimum((draws[:, None] >= rows).sum(axis=1), matrix.num_classes - 1)
    return noisy


def instance_flip_distribution(features: np.ndarray, labels: np.ndarray, projection: np.ndarray) -> np.ndarray:
    """
    Softmax over wrong classes of the projected, L2-normalised features.

    Row i puts zero mass on labels[i].
    """
    features = np.asarray(features, dtype=np.float64)
    norms = np.linalg.norm(features, axis=1, keepdims=True)
    unit = np.divide(features, norms, out=np.zeros_like(features), where=norms > 0)
    logits = unit @ projection
    logits[np.arange(len(labels)), labels] = -np.inf
    return scipy.special.softmax(logits, axis=1)


def instance_rate_half_width(rate: float, std: float) -> float:
    """Half-width of the symmetric window around ``rate`` that keeps q_i in [0, 1]."""
    return min(rate, 1.0 - rate) if std > 0 else 0.0


def effective_instance_std(rate: float, std: float) -> float:
    """Standard deviation of the per-instance flip probabilities actually drawn."""
    half_width = instance_rate_half_width(rate, std)
    if half_width == 0.0:
        return 0.0
    bound = half_width / std
    return float(scipy.stats.truncnorm.std(-bound, bound, loc=rate, scale=std))


def instance_noise(
    features: np.ndarray,
    labels: np.ndarray,
    rate: float,
    seed: int = 0,
    num_classes: Optional[int] = None,
    std: float = 0.1,
    scope: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Instance-dependent label noise.

    Per-instance flip probabilities q_i come from a normal(rate, std) truncated
    symmetrically to [rate - m, rate + m] with m = min(rate, 1 - rate), so their
    mean is exactly ``rate`` and rate 0 never flips. A random projection maps
    each feature vector to scores over the wrong classes and a flipped label is
    drawn from their softmax.
    """
    if not 0.0 <= rate < 1.0:
        raise NoiseConfigError(f"rate must lie in [0, 1), got {rate}")
    if std < 0:
        raise NoiseConfigError("std must be non-negative")
    labels = np.asarray(labels, dtype=np.int64)
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] != labels.size:
        raise UsageError("features and labels disagree on the number of instances")
    num_classes = num_classes or int(labels.max()) + 1
    if num_classes < 2:
        raise NoiseConfigError("label noise needs at least 2 classes")
    scope = _scope_mask(scope, labels.size)

    rng = np.random.default_rng(seed)
    targets = np.flatnonzero(scope)
    half_width = instance_rate_half_width(rate, std)
    if half_width == 0.0:
        q = np.full(targets.size, rate)
    else:
        bound = half_width / std
        q = scipy.stats.truncnorm.rvs(-bound, bound, loc=rate, scale=std, size=targets.size, random_state=rng)
    projection = rng.standard_normal((features.shape[1], num_classes))
    wrong = instance_flip_distribution(features[targets], labels[targets], projection)

    flip = rng.random(targets.size) < q
    cumulative = np.cumsum(wrong, axis=1)
    cumulative[:, -1] = 1.0
    draws = rng.random(targets.size)
    choice = np.minimum((draws[:, None] >= cumulative).sum(axis=1), num_classes - 1)

    noisy = labels.copy()
    flipped = targets[flip]
    noisy[flipped] = choice[flip]
    # guard against a zero-probability tail draw landing on the true class
    same = noisy[flipped] == labels[flipped]
    if np.any(same):
        noisy[flipped[same]] = np.argmax(wrong[flip][same], axis=1)
    return noisy


def noise_audit(clean: np.ndarray, noisy: np.ndarray, num_classes: int) -> NoiseAudit:
    """Empirical confusion matrix and flip rates."""
    clean = np.asarray(clean, dtype=np.int64)
    noisy = np.asarray(noisy, dtype=np.int64)
    if clean.shape != noisy.shape:
        raise UsageError("clean and noisy label vectors must have equal length")
    counts = np.zeros((num_classes, num_classes))
    np.add.at(counts, (clean, noisy), 1.0)
    totals = counts.sum(axis=1)
    confusion = np.divide(counts, totals[:, None], out=np.zeros_like(counts), where=totals[:, None] > 0)
    per_class = [
        float(1.0 - confusion[c, c]) if totals[c] > 0 else None
        for c in range(num_classes)
    ]
    flip_rate = float(np.mean(clean != noisy)) if clean.size else 0.0
    return NoiseAudit(
        num_classes=num_classes,
        count=int(clean.size),
        confusion=confusion.tolist(),
        flip_rate=flip_rate,
        per_class_flip_rate=per_class,
    )


def scope_mask(graph: Graph, scope: str) -> np.ndarray:
    """Boolean mask for a NoiseSpec scope name."""
    if scope == "train":
        return graph.train_mask.copy()
    if scope == "train_val":
        return graph.train_mask | graph.val_mask
    if scope == "all":
        return np.ones(graph.n, dtype=bool)
    raise UsageError(f"unknown noise scope {scope!r}")


def corrupt_graph_labels(graph: Graph, spec: NoiseSpec) -> np.ndarray:
    """Noisy label vector for ``graph`` according to ``spec``; out-of-scope labels stay clean."""
    if graph.clean_labels is None:
        raise UsageError("corruption requires clean labels")
    mask = scope_mask(graph, spec.scope)
    if spec.kind == NoiseKind.INSTANCE:
        noisy = instance_noise(
            graph.features, graph.clean_labels, spec.rate, seed=spec.seed,
            num_classes=graph.num_classes, std=spec.std, scope=mask,
        )
    else:
        matrix = transition_matrix(spec.kind, spec.rate, graph.num_classes)
        noisy = apply_class_noise(graph.clean_labels, matrix, scope=mask, seed=spec.seed)
    logger.info(
        "labels_corrupted",
        kind=spec.kind.value,
        rate=spec.rate,
        seed=spec.seed,
        achieved=float(np.mean(noisy[mask] != graph.clean_labels[mask])) if mask.any() else 0.0,
    )
    return noisy
