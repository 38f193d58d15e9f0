"""
GCN checkpoint format: one JSON header line with shapes and a config echo,
then W1 and W2 as row-major float64.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from ..errors import ParseError
from ..models.gcn import GcnParams

PathLike = Union[str, Path]


def save_checkpoint(path: PathLike, params: GcnParams, config: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {"shapes": {name: list(block.shape) for name, block in params.blocks().items()}, "config": config or {}}
    with path.open("wb") as handle:
        handle.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        for block in params.blocks().values():
            handle.write(np.ascontiguousarray(block, dtype="<f8").tobytes())
    return path


def load_checkpoint(path: PathLike) -> Tuple[GcnParams, Dict[str, Any]]:
    """Read a checkpoint; returns parameters and the config echo."""
    path = Path(path)
    data = path.read_bytes()
    newline = data.find(b"\n")
    if newline < 0:
        raise ParseError(str(path), 1, "missing checkpoint header")
    try:
        header = json.loads(data[:newline].decode("utf-8"))
        shapes = header["shapes"]
    except (ValueError, KeyError) as exc:
        raise ParseError(str(path), 1, f"bad checkpoint header: {exc}") from exc

    offset, blocks = newline + 1, {}
    for name in ("W1", "W2"):
        shape = tuple(shapes[name])
        count = int(np.prod(shape))
        raw = data[offset:offset + 8 * count]
        if len(raw) != 8 * count:
            raise ParseError(str(path), 1, f"truncated block {name}")
        blocks[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
        offset += 8 * count
    return GcnParams(**blocks), header.get("config", {})
