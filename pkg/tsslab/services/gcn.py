"""Two-layer GCN with explicit forward/backward passes and Adam."""

from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.special

from ..errors import ShapeError, UsageError
from ..log import get_logger
from ..models.gcn import AdamState, GcnParams
from ..models.graph import Graph, NormalizedAdjacency
from ..schemas.training import HistoryRow, TrainConfig
from .graphs import normalized_adjacency

logger = get_logger(__name__)


def init_params(feature_dim: int, hidden: int, num_classes: int, seed: int) -> GcnParams:
    """Glorot-uniform initialisation of both layers."""
    rng = np.random.default_rng(seed)

    def glorot(fan_in: int, fan_out: int) -> np.ndarray:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    return GcnParams(W1=glorot(feature_dim, hidden), W2=glorot(hidden, num_classes))


def _check_shapes(params: GcnParams, norm_adj: NormalizedAdjacency, features: np.ndarray) -> None:
    if features.shape[0] != norm_adj.n:
        raise ShapeError(f"features have {features.shape[0]} rows but the graph has {norm_adj.n} nodes")
    if params.W1.shape[0] != features.shape[1]:
        raise ShapeError(f"W1 expects {params.W1.shape[0]} features, got {features.shape[1]}")
    if params.W1.shape[1] != params.W2.shape[0]:
        raise ShapeError(f"W1 width {params.W1.shape[1]} does not match W2 height {params.W2.shape[0]}")


def _dropout_mask(shape, rate: float, rng: Optional[np.random.Generator]) -> Optional[np.ndarray]:
    if rate <= 0.0 or rng is None:
        return None
    return (rng.random(shape) >= rate) / (1.0 - rate)


def gcn_forward(
    params: GcnParams,
    norm_adj: NormalizedAdjacency,
    features: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    H = relu(A_s X W1), logits = A_s H W2.

    Returns:
        Hidden activations and logits
    """
    features = np.asarray(features, dtype=np.float64)
    _check_shapes(params, norm_adj, features)
    adjacency = norm_adj.matrix
    hidden = np.maximum(adjacency @ (features @ params.W1), 0.0)
    logits = adjacency @ (hidden @ params.W2)
    return hidden, np.asarray(logits)


def loss_and_grads(
    params: GcnParams,
    norm_adj: NormalizedAdjacency,
    features: np.ndarray,
    labels: np.ndarray,
    node_weights: np.ndarray,
    weight_decay: float = 5e-4,
    dropout: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[float, GcnParams]:
    """
    Weighted mean cross-entropy plus (weight_decay / 2) ||params||^2 and its exact gradient.

    Nodes with zero weight do not contribute; their labels are never read.
    """
    features = np.asarray(features, dtype=np.float64)
    _check_shapes(params, norm_adj, features)
    weights = np.asarray(node_weights, dtype=np.float64)
    if weights.shape != (norm_adj.n,):
        raise ShapeError(f"node_weights must have length {norm_adj.n}")
    if np.any(weights < 0):
        raise UsageError("node_weights must be non-negative")
    active = np.flatnonzero(weights > 0)
    if active.size == 0:
        raise UsageError("node_weights are all zero")

    adjacency = norm_adj.matrix
    input_mask = _dropout_mask(features.shape, dropout, rng)
    dropped_features = features * input_mask if input_mask is not None else features
    propagated = adjacency @ dropped_features
    pre_hidden = np.asarray(propagated @ params.W1)
    hidden = np.maximum(pre_hidden, 0.0)
    hidden_mask = _dropout_mask(hidden.shape, dropout, rng)
    dropped_hidden = hidden * hidden_mask if hidden_mask is not None else hidden
    propagated_hidden = np.asarray(adjacency @ dropped_hidden)
    logits = propagated_hidden @ params.W2

    log_probs = scipy.special.log_softmax(logits[active], axis=1)
    targets = np.asarray(labels, dtype=np.int64)[active]
    share = weights[active] / weights[active].sum()
    data_loss = -float(np.sum(share * log_probs[np.arange(active.size), targets]))
    loss = data_loss + 0.5 * weight_decay * params.squared_norm()

    grad_logits = np.zeros_like(logits)
    probs = np.exp(log_probs)
    probs[np.arange(active.size), targets] -= 1.0
    grad_logits[active] = share[:, None] * probs

    grad_W2 = propagated_hidden.T @ grad_logits + weight_decay * params.W2
    # A_s is symmetric, so A_s^T = A_s
    grad_hidden = np.asarray(adjacency @ (grad_logits @ params.W2.T))
    if hidden_mask is not None:
        grad_hidden *= hidden_mask
    grad_pre = grad_hidden * (pre_hidden > 0)
    grad_W1 = np.asarray(propagated.T @ grad_pre) + weight_decay * params.W1
    return loss, GcnParams(W1=grad_W1, W2=grad_W2)


def adam_step(state: AdamState, params: GcnParams, grads: GcnParams, lr: float) -> Tuple[AdamState, GcnParams]:
    """Bias-corrected Adam update; returns new state and parameters."""
    if not state.m:
        state = AdamState.zeros_like(params)
    t = state.t + 1
    new_m, new_v, new_blocks = {}, {}, {}
    grad_blocks = grads.blocks()
    for name, block in params.blocks().items():
        grad = grad_blocks[name]
        if grad.shape != block.shape:
            raise ShapeError(f"gradient for {name} has shape {grad.shape}, expected {block.shape}")
        m = state.beta1 * state.m[name] + (1.0 - state.beta1) * grad
        v = state.beta2 * state.v[name] + (1.0 - state.beta2) * grad * grad
        m_hat = m / (1.0 - state.beta1 ** t)
        v_hat = v / (1.0 - state.beta2 ** t)
        new_blocks[name] = block - lr * m_hat / (np.sqrt(v_hat) + state.eps)
        new_m[name], new_v[name] = m, v
    new_state = AdamState(t=t, m=new_m, v=new_v, beta1=state.beta1, beta2=state.beta2, eps=state.eps)
    return new_state, GcnParams(**new_blocks)


def predict_from(params: GcnParams, norm_adj: NormalizedAdjacency, features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Argmax labels (lowest index on ties) and softmax probabilities."""
    _, logits = gcn_forward(params, norm_adj, features)
    probs = scipy.special.softmax(logits, axis=1)
    return np.argmax(logits, axis=1).astype(np.int64), probs


def predict(params: GcnParams, graph: Graph) -> Tuple[np.ndarray, np.ndarray]:
    """Per-node predictions using the self-loop normalised adjacency."""
    return predict_from(params, normalized_adjacency(graph, with_self_loops=True), graph.features)


def accuracy(predictions: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> Optional[float]:
    """Accuracy on ``mask``; None when the mask is empty."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return None
    return float(np.mean(predictions[mask] == np.asarray(labels)[mask]))


def _mask_from(ids_or_mask, n: int) -> np.ndarray:
    array = np.asarray(ids_or_mask)
    if array.dtype == bool:
        if array.shape != (n,):
            raise ShapeError(f"mask must have length {n}")
        return array.copy()
    mask = np.zeros(n, dtype=bool)
    mask[array.astype(np.int64)] = True
    return mask


def train_plain(
    graph: Graph,
    labels: np.ndarray,
    mask,
    config: TrainConfig,
    val_mask=None,
    norm_adj: Optional[NormalizedAdjacency] = None,
) -> Tuple[GcnParams, List[HistoryRow]]:
    """
    Full-batch cross-entropy training on ``mask``.

    ``val_mask`` (default: the graph's val split) is scored against ``labels``;
    with ``config.patience`` set, the best validation checkpoint is returned and
    training stops after ``patience`` epochs without improvement. Test accuracy
    uses clean labels when the graph has them.
    """
    if config.epochs < 1:
        raise UsageError("epochs must be >= 1")
    train_mask = _mask_from(mask, graph.n)
    if not train_mask.any():
        raise UsageError("training mask is empty")
    selection_mask = graph.val_mask.copy() if val_mask is None else _mask_from(val_mask, graph.n)
    labels = np.asarray(labels, dtype=np.int64)
    eval_labels = graph.clean_labels if graph.clean_labels is not None else labels

    norm_adj = norm_adj or normalized_adjacency(graph, with_self_loops=True)
    params = init_params(graph.feature_dim, config.hidden, graph.num_classes, config.seed)
    state = AdamState.zeros_like(params)
    dropout_rng = np.random.default_rng(config.seed + 1) if config.dropout > 0 else None
    weights = train_mask.astype(np.float64)

    history: List[HistoryRow] = []
    best_params, best_val, best_epoch, stale = params.copy(), -1.0, 0, 0
    for epoch in range(1, config.epochs + 1):
        loss, grads = loss_and_grads(
            params, norm_adj, graph.features, labels, weights,
            weight_decay=config.weight_decay, dropout=config.dropout, rng=dropout_rng,
        )
        state, params = adam_step(state, params, grads, config.lr)
        predictions, _ = predict_from(params, norm_adj, graph.features)
        val_acc = accuracy(predictions, labels, selection_mask)
        history.append(HistoryRow(
            epoch=epoch,
            loss=loss,
            train_acc=accuracy(predictions, labels, train_mask),
            val_acc=val_acc,
            test_acc=accuracy(predictions, eval_labels, graph.test_mask),
        ))
        if config.patience is None:
            continue
        if val_acc is not None and val_acc > best_val:
            best_params, best_val, best_epoch, stale = params.copy(), val_acc, epoch, 0
        else:
            stale += 1
            if stale >= config.patience:
                logger.info("early_stop", epoch=epoch, best_epoch=best_epoch, best_val=best_val)
                break

    final = best_params if config.patience is not None and best_epoch > 0 else params
    logger.info("plain_training_done", epochs=len(history), final_loss=history[-1].loss)
    return final, history


def finite_difference_check(
    params: GcnParams,
    norm_adj: NormalizedAdjacency,
    features: np.ndarray,
    labels: np.ndarray,
    node_weights: np.ndarray,
    weight_decay: float = 5e-4,
    step: float = 1e-5,
    floor: float = 1e-6,
) -> Dict[str, float]:
    """
    Max relative error per block between analytic and central-difference gradients.

    Entry error is |a - f| / max(|a| + |f|, floor); ``floor`` keeps round-off on
    near-zero entries from dominating.
    """
    _, analytic = loss_and_grads(params, norm_adj, features, labels, node_weights, weight_decay=weight_decay)
    errors = {}
    for name, block in params.blocks().items():
        numeric = np.zeros_like(block)
        for index in np.ndindex(block.shape):
            original = block[index]
            block[index] = original + step
            plus, _ = loss_and_grads(params, norm_adj, features, labels, node_weights, weight_decay=weight_decay)
            block[index] = original - step
            minus, _ = loss_and_grads(params, norm_adj, features, labels, node_weights, weight_decay=weight_decay)
            block[index] = original
            numeric[index] = (plus - minus) / (2.0 * step)
        exact = analytic.blocks()[name]
        denom = np.maximum(np.abs(exact) + np.abs(numeric), floor)
        errors[name] = float(np.max(np.abs(exact - numeric) / denom))
    return errors
