"""
Converters for public citation benchmarks into the canonical text format.

Two raw layouts are understood:

* Planetoid binaries ``ind.<name>.{x,tx,allx,y,ty,ally,graph}`` plus
  ``ind.<name>.test.index``, with the standard split (the labelled ``y`` rows
  train, the next 500 nodes validate, the test index tests).
* LINQS ``<name>.content`` / ``<name>.cites`` files (paper id, binary words,
  class name / citing pairs), split by a seeded permutation.
"""

import pickle
from pathlib import Path
from typing import Dict, Optional, Union

import networkx as nx
import numpy as np
import scipy.sparse as sp

from ..errors import ParseError, UsageError
from ..io.graph_files import save_graph
from ..log import get_logger
from ..models.graph import Graph
from ..services.graphs import adjacency_from_edges

logger = get_logger(__name__)

PathLike = Union[str, Path]

PLANETOID_PARTS = ("x", "y", "tx", "ty", "allx", "ally", "graph")
VALIDATION_SIZE = 500


def _load_part(raw_dir: Path, name: str, part: str):
    path = raw_dir / f"ind.{name}.{part}"
    if not path.exists():
        raise UsageError(f"missing Planetoid file {path}")
    with path.open("rb") as handle:
        return pickle.load(handle, encoding="latin1")


def _dense(matrix) -> np.ndarray:
    return matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)


def read_planetoid(raw_dir: PathLike, name: str) -> Graph:
    """Build a Graph from Planetoid binaries; test ids missing from ``tx`` get zero rows and no split."""
    raw_dir = Path(raw_dir)
    name = name.lower()
    parts = {part: _load_part(raw_dir, name, part) for part in PLANETOID_PARTS}
    index_path = raw_dir / f"ind.{name}.test.index"
    if not index_path.exists():
        raise UsageError(f"missing Planetoid file {index_path}")
    test_index = []
    for line_number, line in enumerate(index_path.read_text(encoding="utf-8").splitlines(), start=1):
        if line.strip():
            try:
                test_index.append(int(line))
            except ValueError as exc:
                raise ParseError(str(index_path), line_number, f"bad test index {line!r}") from exc
    test_index = np.asarray(test_index, dtype=np.int64)
    test_range = np.sort(test_index)

    tx, ty = _dense(parts["tx"]), np.asarray(parts["ty"])
    full_range = np.arange(test_range.min(), test_range.max() + 1)
    if full_range.size != test_range.size:
        # Some test ids have no feature row; pad them with zeros
        tx_full = np.zeros((full_range.size, tx.shape[1]))
        ty_full = np.zeros((full_range.size, ty.shape[1]))
        tx_full[test_range - test_range.min()] = tx
        ty_full[test_range - test_range.min()] = ty
        tx, ty = tx_full, ty_full

    features = np.vstack([_dense(parts["allx"]), tx]).astype(np.float64)
    onehot = np.vstack([np.asarray(parts["ally"]), ty])
    features[test_index] = features[test_range]
    onehot[test_index] = onehot[test_range]
    n, num_classes = features.shape[0], onehot.shape[1]
    labels = onehot.argmax(axis=1).astype(np.int64)
    labelled = onehot.sum(axis=1) > 0

    adjacency_lists = nx.from_dict_of_lists(parts["graph"])
    edges = np.array([(u, v) for u, v in adjacency_lists.edges() if u < n and v < n], dtype=np.int64)
    adjacency, dropped = adjacency_from_edges(n, edges)
    if dropped:
        logger.warning("self_loops_dropped", dataset=name, count=dropped)

    train_count = np.asarray(parts["y"]).shape[0]
    train_mask = np.zeros(n, dtype=bool)
    train_mask[:train_count] = True
    val_mask = np.zeros(n, dtype=bool)
    val_mask[train_count:train_count + VALIDATION_SIZE] = True
    test_mask = np.zeros(n, dtype=bool)
    test_mask[test_range] = True
    test_mask &= labelled & ~train_mask & ~val_mask

    graph = Graph(
        n=n,
        adjacency=adjacency,
        features=features,
        num_classes=num_classes,
        train_mask=train_mask,
        val_mask=val_mask,
        test_mask=test_mask,
        clean_labels=labels,
        name=name,
    )
    logger.info("planetoid_loaded", dataset=name, n=n, edges=graph.num_edges, classes=num_classes,
                train=int(train_mask.sum()), val=int(val_mask.sum()), test=int(test_mask.sum()))
    return graph


def read_linqs(raw_dir: PathLike, name: str, seed: int = 0, per_class: int = 20, val_size: int = VALIDATION_SIZE,
               test_size: int = 1000) -> Graph:
    """
    Build a Graph from LINQS ``.content``/``.cites`` files.

    Citations to unknown papers are ignored. The split takes ``per_class``
    training nodes per class, then ``val_size`` and ``test_size`` nodes from a
    seeded permutation of the rest.
    """
    raw_dir = Path(raw_dir)
    content_path = raw_dir / f"{name}.content"
    cites_path = raw_dir / f"{name}.cites"
    for path in (content_path, cites_path):
        if not path.exists():
            raise UsageError(f"missing LINQS file {path}")

    ids: Dict[str, int] = {}
    rows, classes = [], []
    for line_number, line in enumerate(content_path.read_text(encoding="utf-8").splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) < 3:
            raise ParseError(str(content_path), line_number, "expected id, features and class")
        ids[fields[0]] = len(ids)
        try:
            rows.append([float(value) for value in fields[1:-1]])
        except ValueError as exc:
            raise ParseError(str(content_path), line_number, str(exc)) from exc
        classes.append(fields[-1])

    class_names = sorted(set(classes))
    labels = np.array([class_names.index(label) for label in classes], dtype=np.int64)
    features = np.asarray(rows, dtype=np.float64)
    n = len(ids)

    edges = []
    for line in cites_path.read_text(encoding="utf-8").splitlines():
        fields = line.split()
        if len(fields) == 2 and fields[0] in ids and fields[1] in ids:
            edges.append((ids[fields[0]], ids[fields[1]]))
    adjacency, dropped = adjacency_from_edges(n, np.asarray(edges, dtype=np.int64))
    if dropped:
        logger.warning("self_loops_dropped", dataset=name, count=dropped)

    order = np.random.default_rng(seed).permutation(n)
    train_mask = np.zeros(n, dtype=bool)
    for label in range(len(class_names)):
        train_mask[order[labels[order] == label][:per_class]] = True
    rest = order[~train_mask[order]]
    val_mask = np.zeros(n, dtype=bool)
    val_mask[rest[:val_size]] = True
    test_mask = np.zeros(n, dtype=bool)
    test_mask[rest[val_size:val_size + test_size]] = True

    return Graph(
        n=n,
        adjacency=adjacency,
        features=features,
        num_classes=len(class_names),
        train_mask=train_mask,
        val_mask=val_mask,
        test_mask=test_mask,
        clean_labels=labels,
        name=name,
    )


def convert_planetoid(raw_dir: PathLike, name: str, out_dir: PathLike, seed: Optional[int] = None) -> Dict[str, Path]:
    """
    Convert a raw benchmark directory into canonical graph files.

    Planetoid binaries are preferred; LINQS files are used when they are the
    only layout present.
    """
    raw_dir = Path(raw_dir)
    if (raw_dir / f"ind.{name.lower()}.graph").exists():
        graph = read_planetoid(raw_dir, name)
    elif (raw_dir / f"{name}.content").exists():
        graph = read_linqs(raw_dir, name, seed=seed or 0)
    else:
        raise UsageError(f"no Planetoid or LINQS files for {name!r} under {raw_dir}")
    return save_graph(graph, out_dir)
