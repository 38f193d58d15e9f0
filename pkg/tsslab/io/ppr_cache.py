"""
Binary PPR cache.

Layout: one ASCII header line ``n alpha tol method residual_bound num_rows``,
then ``num_rows`` little-endian int64 source ids, then the rows as row-major
little-endian float64.
"""

import hashlib
import os
import tempfile
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..errors import ParseError
from ..log import get_logger
from ..models.graph import NormalizedAdjacency
from ..models.ppr import PprMatrix

logger = get_logger(__name__)

PathLike = Union[str, Path]


def cache_key(norm_adj: NormalizedAdjacency, alpha: float, tol: float, sources: Optional[Sequence[int]]) -> str:
    digest = hashlib.sha256()
    matrix = norm_adj.matrix
    digest.update(np.asarray(matrix.shape, dtype="<i8").tobytes())
    digest.update(np.asarray(matrix.indptr, dtype="<i8").tobytes())
    digest.update(np.asarray(matrix.indices, dtype="<i8").tobytes())
    digest.update(np.asarray(matrix.data, dtype="<f8").tobytes())
    digest.update(f"{alpha!r}:{tol!r}:{int(norm_adj.self_loops)}".encode())
    if sources is not None:
        digest.update(np.asarray(sorted(set(int(s) for s in sources)), dtype="<i8").tobytes())
    return digest.hexdigest()


def dump_ppr(ppr: PprMatrix, path: PathLike) -> Path:
    """Write through a temporary file in the same directory, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f"{ppr.n} {ppr.alpha!r} {ppr.tol!r} {ppr.method} {ppr.residual_bound!r} {len(ppr.sources)}\n"
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(header.encode("ascii"))
            handle.write(np.asarray(ppr.sources, dtype="<i8").tobytes())
            handle.write(np.ascontiguousarray(ppr.rows, dtype="<f8").tobytes())
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    return path


def load_ppr(path: PathLike) -> PprMatrix:
    path = Path(path)
    with path.open("rb") as handle:
        try:
            header = handle.readline().decode("ascii").split()
            n, alpha, tol, method, residual, num_rows = (
                int(header[0]), float(header[1]), float(header[2]), header[3], float(header[4]), int(header[5])
            )
        except (IndexError, ValueError, UnicodeDecodeError):
            raise ParseError(str(path), 1, "malformed PPR cache header") from None
        sources = np.frombuffer(handle.read(8 * num_rows), dtype="<i8").astype(np.int64)
        payload = handle.read()
    rows = np.frombuffer(payload, dtype="<f8")
    if rows.size != num_rows * n or sources.size != num_rows:
        raise ParseError(str(path), 1, "truncated PPR cache")
    return PprMatrix(
        alpha=alpha,
        rows=rows.reshape(num_rows, n).copy(),
        sources=sources,
        residual_bound=residual,
        method=method,
        tol=tol,
    )


def cached_ppr(
    cache_dir: Optional[PathLike],
    norm_adj: NormalizedAdjacency,
    alpha: float,
    tol: float,
    sources: Optional[Sequence[int]],
    compute: Callable[[], PprMatrix],
) -> PprMatrix:
    """Load pi from ``cache_dir`` when present, otherwise compute and store it."""
    if cache_dir is None:
        return compute()
    path = Path(cache_dir) / f"ppr-{cache_key(norm_adj, alpha, tol, sources)}.bin"
    if path.exists():
        try:
            ppr = load_ppr(path)
        except ParseError as exc:
            logger.warning("ppr_cache_unreadable", path=str(path), error=str(exc))
        else:
            logger.info("ppr_cache_hit", path=str(path))
            return ppr
    ppr = compute()
    dump_ppr(ppr, path)
    logger.info("ppr_cache_stored", path=str(path))
    return ppr
