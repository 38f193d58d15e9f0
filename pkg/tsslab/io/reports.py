"""CSV and JSON report writers. Output carries no timestamps so reruns are byte-identical."""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from ..models.centrality import CbcScores
from ..models.graph import BoundaryTag
from ..models.trace import TrainTrace
from ..schemas.experiments import ExperimentManifest
from ..schemas.training import HistoryRow

PathLike = Union[str, Path]

CBC_COLUMNS = ["node_id", "cbc", "bc", "boundary_tag", "noisy_label", "clean_label"]
HISTORY_COLUMNS = ["epoch", "loss", "train_acc", "val_acc", "test_acc"]
MANIFEST_NAME = "manifest.json"


def _plain(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if isinstance(obj, dict):
        return {str(key): _plain(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return obj.name
    return obj


def write_json(path: PathLike, obj: Any) -> Path:
    """Write sorted, indented UTF-8 JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(obj), ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_json(path: PathLike) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: PathLike, fieldnames: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(fieldnames), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _fmt(row.get(key)) for key in fieldnames})
    return path


def write_manifest(out_dir: PathLike, manifest: ExperimentManifest) -> Path:
    """Write ``manifest.json``; commands call this before producing results."""
    return write_json(Path(out_dir) / MANIFEST_NAME, manifest)


def write_cbc_csv(
    path: PathLike,
    cbc: CbcScores,
    noisy_labels: np.ndarray,
    clean_labels: Optional[np.ndarray] = None,
    betweenness: Optional[np.ndarray] = None,
    boundary: Optional[List[BoundaryTag]] = None,
) -> Path:
    """One row per node: ``node_id, cbc, bc, boundary_tag, noisy_label, clean_label``."""
    n = cbc.scores.size
    rows = (
        {
            "node_id": i,
            "cbc": float(cbc.scores[i]),
            "bc": float(betweenness[i]) if betweenness is not None else None,
            "boundary_tag": boundary[i].value if boundary is not None else None,
            "noisy_label": int(noisy_labels[i]),
            "clean_label": int(clean_labels[i]) if clean_labels is not None else None,
        }
        for i in range(n)
    )
    return write_csv(path, CBC_COLUMNS, rows)


def read_cbc_csv(path: PathLike) -> List[Dict[str, str]]:
    with Path(path).open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


def write_history_csv(path: PathLike, history: Sequence[HistoryRow]) -> Path:
    return write_csv(path, HISTORY_COLUMNS, (row.model_dump() for row in history))


def write_trace(out_dir: PathLike, trace: TrainTrace, summary: Dict[str, Any], prefix: str = "trace") -> Dict[str, Path]:
    """
    Write ``<prefix>.jsonl`` (one record per epoch) and ``<prefix>.summary.json``.

    The summary gets the sorted order, split ids and best checkpoint merged in.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines_path = out_dir / f"{prefix}.jsonl"
    with lines_path.open("w", encoding="utf-8", newline="\n") as handle:
        for record in trace.records:
            handle.write(json.dumps(record.model_dump(mode="json"), sort_keys=True) + "\n")
    payload = dict(summary)
    payload.update(
        best_epoch=trace.best_epoch,
        best_val_acc=trace.best_val_acc,
        epochs_run=len(trace.records),
        sorted_order=trace.sorted_order,
        fit_ids=trace.fit_ids,
        noisy_val_ids=trace.noisy_val_ids,
    )
    summary_path = write_json(out_dir / f"{prefix}.summary.json", payload)
    return {"trace": lines_path, "summary": summary_path}


def read_trace_records(path: PathLike) -> List[Dict[str, Any]]:
    with Path(path).open(encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]
