"""Personalized PageRank: dense factorisation and row-wise power iteration."""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Literal, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from ..config import get_settings
from ..errors import ConvergenceError, SingularSystemError, UsageError
from ..log import get_logger
from ..models.graph import NormalizedAdjacency
from ..models.ppr import PprMatrix

logger = get_logger(__name__)

DEFAULT_ALPHA = 0.15
DEFAULT_TOL = 1e-9


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha <= 1.0:
        raise UsageError(f"alpha must lie in (0, 1], got {alpha}")


def default_max_iter(alpha: float, tol: float) -> int:
    """10 * ceil(log(tol) / log(1 - alpha)); geometric convergence needs far fewer."""
    if alpha >= 1.0:
        return 1
    return max(1, 10 * math.ceil(math.log(tol) / math.log(1.0 - alpha)))


def _row_residuals(rows: np.ndarray, sources: np.ndarray, norm_adj: NormalizedAdjacency, alpha: float) -> np.ndarray:
    # || x_u - (alpha e_u + (1 - alpha) x_u A_hat) ||_1 per row
    propagated = np.asarray((norm_adj.matrix.T @ rows.T).T)
    target = (1.0 - alpha) * propagated
    target[np.arange(len(sources)), sources] += alpha
    return np.abs(rows - target).sum(axis=1)


def ppr_dense(norm_adj: NormalizedAdjacency, alpha: float, dense_threshold: Optional[int] = None) -> PprMatrix:
    """
    Exact pi = alpha (I - (1 - alpha) A_hat)^{-1} by Cholesky factorisation.

    The system matrix is symmetric positive definite for alpha > 0 and spectral
    radius(A_hat) <= 1; an LU fallback covers numerically indefinite cases.
    """
    _check_alpha(alpha)
    n = norm_adj.n
    threshold = dense_threshold or get_settings().dense_threshold
    if n > threshold:
        raise UsageError(f"dense PPR limited to n <= {threshold}, got n={n}")

    system = np.eye(n) - (1.0 - alpha) * norm_adj.matrix.toarray()
    rhs = alpha * np.eye(n)
    try:
        rows = scipy.linalg.cho_solve(scipy.linalg.cho_factor(system), rhs)
    except np.linalg.LinAlgError:
        try:
            rows = scipy.linalg.lu_solve(scipy.linalg.lu_factor(system, check_finite=True), rhs)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularSystemError(f"PPR system is singular for alpha={alpha}") from exc
    if not np.all(np.isfinite(rows)):
        raise SingularSystemError(f"PPR system is singular for alpha={alpha}")

    sources = np.arange(n)
    residual = float(_row_residuals(rows, sources, norm_adj, alpha).max()) if n else 0.0
    logger.debug("ppr_dense_solved", n=n, alpha=alpha, residual=residual)
    return PprMatrix(alpha=alpha, rows=rows, sources=sources, residual_bound=residual, method="dense_inverse", tol=0.0)


def ppr_row(
    norm_adj: NormalizedAdjacency,
    alpha: float,
    source_u: int,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
) -> Tuple[np.ndarray, float]:
    """
    Iterate x <- alpha e_u + (1 - alpha) A_hat x until ||dx||_1 <= tol.

    Returns:
        The PPR vector of ``source_u`` and its residual
    """
    _check_alpha(alpha)
    if tol <= 0:
        raise UsageError("tol must be positive")
    n = norm_adj.n
    if not 0 <= source_u < n:
        raise UsageError(f"source {source_u} out of range [0, {n})")
    max_iter = max_iter or default_max_iter(alpha, tol)
    matrix = norm_adj.matrix
    teleport = np.zeros(n)
    teleport[source_u] = alpha

    x = teleport.copy()
    delta = math.inf
    for iteration in range(1, max_iter + 1):
        updated = teleport + (1.0 - alpha) * (matrix @ x)
        delta = float(np.abs(updated - x).sum())
        x = updated
        if delta <= tol:
            residual = float(np.abs(x - (teleport + (1.0 - alpha) * (matrix @ x))).sum())
            return x, residual
    raise ConvergenceError(f"PPR row {source_u} did not converge", residual=delta, iterations=max_iter)


def ppr_matrix(
    norm_adj: NormalizedAdjacency,
    alpha: float = DEFAULT_ALPHA,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
    parallelism: int = 1,
    sources: Optional[Sequence[int]] = None,
    method: Literal["auto", "dense", "iterative"] = "auto",
    dense_threshold: Optional[int] = None,
) -> PprMatrix:
    """
    Compute PPR rows, dense below the threshold and row-wise above it.

    Args:
        norm_adj: Symmetric normalised adjacency (usually without self-loops)
        alpha: Teleport probability
        tol: L1 tolerance per iterative row
        max_iter: Iteration cap per row
        parallelism: Worker threads for iterative rows
        sources: Rows to compute on the iterative path (default: all)
        method: Force ``dense`` or ``iterative``
        dense_threshold: Override the configured dense threshold

    Returns:
        PprMatrix; the dense path always holds every row
    """
    _check_alpha(alpha)
    threshold = dense_threshold or get_settings().dense_threshold
    use_dense = method == "dense" or (method == "auto" and norm_adj.n <= threshold)
    if use_dense:
        return ppr_dense(norm_adj, alpha, dense_threshold=max(threshold, norm_adj.n) if method == "dense" else threshold)

    source_ids = np.arange(norm_adj.n) if sources is None else np.asarray(sorted(set(int(s) for s in sources)), dtype=np.int64)

    def solve(source: int) -> Tuple[np.ndarray, float]:
        return ppr_row(norm_adj, alpha, int(source), tol=tol, max_iter=max_iter)

    if parallelism > 1 and len(source_ids) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(solve, source_ids))
    else:
        results = [solve(source) for source in source_ids]

    rows = np.vstack([row for row, _ in results]) if results else np.zeros((0, norm_adj.n))
    residual = max((res for _, res in results), default=0.0)
    logger.info("ppr_iterative_solved", n=norm_adj.n, rows=len(source_ids), alpha=alpha, residual=residual)
    return PprMatrix(alpha=alpha, rows=rows, sources=source_ids, residual_bound=float(residual), method="iterative", tol=tol)


def neumann_series(norm_adj: NormalizedAdjacency, alpha: float, terms: int) -> np.ndarray:
    """Truncated alpha * sum_{k < terms} (1 - alpha)^k A_hat^k, dense."""
    _check_alpha(alpha)
    adjacency = norm_adj.matrix.toarray()
    power = np.eye(norm_adj.n)
    total = np.zeros_like(power)
    for k in range(terms):
        total += (1.0 - alpha) ** k * power
        power = power @ adjacency
    return alpha * total
