"""Named-tensor checkpoint files.

Layout (little endian)::

    b"NRLGTCKP" | u32 version | u32 param count | u32 manifest length | manifest JSON
    per parameter: u16 name length | name (utf-8) | u8 ndim | u32 * ndim shape | float64 values
"""
import json
import struct
from pathlib import Path
from typing import Any, BinaryIO, Dict, Tuple, Union

import numpy as np

from app.core.exceptions import ModelError
from app.logging_config import get_logger

logger = get_logger(__name__)

MAGIC = b"NRLGTCKP"
FORMAT_VERSION = 1


def _read_exact(handle: BinaryIO, size: int) -> bytes:
    data = handle.read(size)
    if len(data) != size:
        raise ModelError("checkpoint is truncated")
    return data


def save_checkpoint(path: Union[str, Path], state: Dict[str, np.ndarray], manifest: Dict[str, Any]) -> None:
    manifest_bytes = json.dumps(manifest, sort_keys=True).encode()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<III", FORMAT_VERSION, len(state), len(manifest_bytes)))
        handle.write(manifest_bytes)
        for name, value in state.items():
            encoded = name.encode()
            value = np.asarray(value, dtype="<f8")
            handle.write(struct.pack("<H", len(encoded)))
            handle.write(encoded)
            handle.write(struct.pack("<B", value.ndim))
            handle.write(struct.pack(f"<{value.ndim}I", *value.shape))
            handle.write(value.tobytes())
    logger.info("checkpoint_saved", path=str(path), parameters=len(state))


def load_checkpoint(path: Union[str, Path]) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    """Read a checkpoint.

    Returns:
        ``(manifest, state)`` with parameters in file order.

    Raises:
        ModelError: If the file is missing, truncated or not a checkpoint.
    """
    path = Path(path)
    if not path.is_file():
        raise ModelError(f"checkpoint not found: {path}")
    with open(path, "rb") as handle:
        if handle.read(len(MAGIC)) != MAGIC:
            raise ModelError(f"{path} is not a model checkpoint")
        version, count, manifest_length = struct.unpack("<III", _read_exact(handle, 12))
        if version != FORMAT_VERSION:
            raise ModelError(f"unsupported checkpoint version {version}")
        manifest = json.loads(_read_exact(handle, manifest_length).decode())
        state: Dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_length,) = struct.unpack("<H", _read_exact(handle, 2))
            name = _read_exact(handle, name_length).decode()
            (ndim,) = struct.unpack("<B", _read_exact(handle, 1))
            shape = struct.unpack(f"<{ndim}I", _read_exact(handle, 4 * ndim))
            size = int(np.prod(shape, dtype=np.int64))
            values = np.frombuffer(_read_exact(handle, 8 * size), dtype="<f8")
            state[name] = values.reshape(shape).astype(np.float64)
    logger.debug("checkpoint_loaded", path=str(path), parameters=len(state))
    return manifest, state
