"""
Plain-text graph format.

Edge list: ``<u> <v>`` per line, 0-indexed. Features: header ``n d`` followed by
n lines of d reals. Labels: one integer per line. Splits: one code per line,
0=train, 1=val, 2=test, 3=none (the words train/val/test/none are accepted too).
"""

import hashlib
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from ..errors import GraphValidationError, ParseError
from ..log import get_logger
from ..models.graph import Graph
from ..services.graphs import adjacency_from_edges, masks_from_splits, splits_from_masks

logger = get_logger(__name__)

PathLike = Union[str, Path]

CANONICAL_FILES = {
    "edges": "edges.txt",
    "features": "features.txt",
    "labels": "labels.txt",
    "splits": "splits.txt",
}

SPLIT_WORDS = {"train": 0, "val": 1, "test": 2, "none": 3}


def file_sha256(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _content_lines(path: Path):
    with path.open("rb") as handle:
        for line_number, raw in enumerate(handle, start=1):
            try:
                stripped = raw.decode("utf-8").strip()
            except UnicodeDecodeError:
                raise ParseError(str(path), line_number, "invalid UTF-8") from None
            if stripped:
                yield line_number, stripped


def read_features(path: PathLike) -> np.ndarray:
    path = Path(path)
    lines = _content_lines(path)
    try:
        line_number, header = next(lines)
    except StopIteration:
        raise ParseError(str(path), 1, "missing 'n d' header") from None
    parts = header.split()
    try:
        n, d = int(parts[0]), int(parts[1])
        if len(parts) != 2 or n < 0 or d < 0:
            raise ValueError
    except (ValueError, IndexError):
        raise ParseError(str(path), line_number, f"expected header 'n d', got {header!r}") from None

    features = np.empty((n, d), dtype=np.float64)
    row = 0
    for line_number, line in lines:
        if row >= n:
            raise ParseError(str(path), line_number, f"more than {n} feature rows")
        values = line.split()
        if len(values) != d:
            raise ParseError(str(path), line_number, f"expected {d} values, got {len(values)}")
        try:
            features[row] = [float(value) for value in values]
        except ValueError:
            raise ParseError(str(path), line_number, "non-numeric feature value") from None
        row += 1
    if row != n:
        raise ParseError(str(path), line_number, f"expected {n} feature rows, got {row}")
    return features


def read_edges(path: PathLike, n: int) -> np.ndarray:
    path = Path(path)
    edges = []
    for line_number, line in _content_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(str(path), line_number, f"expected '<u> <v>', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(str(path), line_number, f"non-integer node id in {line!r}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(str(path), line_number, f"node id out of range [0, {n})")
        edges.append((u, v))
    return np.array(edges, dtype=np.int64).reshape(-1, 2)


def read_labels(path: PathLike, n: Optional[int] = None) -> np.ndarray:
    """Read one integer label per line."""
    path = Path(path)
    labels = []
    for line_number, line in _content_lines(path):
        try:
            labels.append(int(line))
        except ValueError:
            raise ParseError(str(path), line_number, f"expected an integer label, got {line!r}") from None
    if n is not None and len(labels) != n:
        raise ParseError(str(path), len(labels), f"expected {n} labels, got {len(labels)}")
    return np.array(labels, dtype=np.int64)


def read_splits(path: PathLike, n: int) -> np.ndarray:
    path = Path(path)
    splits = []
    for line_number, line in _content_lines(path):
        token = line.lower()
        if token in SPLIT_WORDS:
            splits.append(SPLIT_WORDS[token])
            continue
        if token not in {"0", "1", "2", "3"}:
            raise ParseError(str(path), line_number, f"unknown split code {line!r}")
        splits.append(int(token))
    if len(splits) != n:
        raise ParseError(str(path), len(splits), f"expected {n} split codes, got {len(splits)}")
    return np.array(splits, dtype=np.int64)


def load_graph(
    edge_list_path: PathLike,
    features_path: PathLike,
    labels_path: PathLike,
    splits_path: PathLike,
    num_classes: Optional[int] = None,
    noisy_labels_path: Optional[PathLike] = None,
) -> Graph:
    """
    Load and validate a graph from the four text files.

    Duplicate and reversed edges are deduplicated; a non-symmetric edge file is
    symmetrised. Self-loops are dropped with a warning.
    """
    features = read_features(features_path)
    n = features.shape[0]
    edges = read_edges(edge_list_path, n)
    labels = read_labels(labels_path, n)
    splits = read_splits(splits_path, n)

    noisy = read_labels(noisy_labels_path, n) if noisy_labels_path is not None else None
    if labels.size and labels.min() < 0:
        raise GraphValidationError("labels must be non-negative")
    if num_classes is None:
        # a noisy label file may use a class the clean labels never do
        observed = [int(values.max()) for values in (labels, noisy) if values is not None and values.size]
        num_classes = max(observed) + 1 if observed else 1
    if labels.size and labels.max() >= num_classes:
        raise GraphValidationError(f"label {int(labels.max())} >= num_classes {num_classes}")

    adjacency, dropped = adjacency_from_edges(n, edges)
    if dropped:
        logger.warning("self_loops_dropped", path=str(edge_list_path), count=dropped)

    train_mask, val_mask, test_mask = masks_from_splits(splits)
    graph = Graph(
        n=n,
        adjacency=adjacency,
        features=features,
        num_classes=num_classes,
        train_mask=train_mask,
        val_mask=val_mask,
        test_mask=test_mask,
        clean_labels=labels,
        noisy_labels=noisy,
        name=Path(edge_list_path).parent.name or "graph",
    )
    logger.info("graph_loaded", n=n, edges=graph.num_edges, classes=num_classes, features=features.shape[1])
    return graph


def load_graph_dir(
    directory: PathLike,
    noisy_labels_path: Optional[PathLike] = None,
    num_classes: Optional[int] = None,
) -> Graph:
    """Load a graph stored under the canonical file names."""
    directory = Path(directory)
    return load_graph(
        directory / CANONICAL_FILES["edges"],
        directory / CANONICAL_FILES["features"],
        directory / CANONICAL_FILES["labels"],
        directory / CANONICAL_FILES["splits"],
        num_classes=num_classes,
        noisy_labels_path=noisy_labels_path,
    )


def write_labels(path: PathLike, labels: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.writelines(f"{int(label)}\n" for label in labels)
    return path


def save_graph(graph: Graph, out_dir: PathLike) -> Dict[str, Path]:
    """Write the graph in the canonical text format; returns the written paths."""
    if graph.clean_labels is None:
        raise GraphValidationError("cannot save a graph without clean labels")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {key: out_dir / name for key, name in CANONICAL_FILES.items()}

    with paths["edges"].open("w", encoding="utf-8", newline="\n") as handle:
        handle.writelines(f"{u} {v}\n" for u, v in graph.edge_pairs())
    with paths["features"].open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"{graph.n} {graph.feature_dim}\n")
        for row in graph.features:
            handle.write(" ".join(repr(float(value)) for value in row) + "\n")
    write_labels(paths["labels"], graph.clean_labels)
    write_labels(paths["splits"], splits_from_masks(graph))
    return paths
