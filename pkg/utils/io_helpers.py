from typing import Any, Dict, List, Optional, Sequence
import csv
import os
import shutil
import struct
import logging
import numpy as np
from PIL import Image
from core.scene import Frame, INFINITE
from utils.errors import FrameFormatError
logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEPTH_MAGIC = b'SFDP'
_DEPTH_HEADER = struct.Struct('<4sII')


def ensure_parent_dir(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def to_uint8(color: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(color, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_ppm(frame: Frame, path: str) -> None:
    """Writes the colour of ``frame`` as a binary (P6) PPM."""
    ensure_parent_dir(path)
    Image.fromarray(to_uint8(frame.color)).save(path, format='PPM')


def read_ppm(path: str) -> np.ndarray:
    """(H, W, 3) colours in [0, 1]."""
    with Image.open(path) as image:
        return np.asarray(image.convert('RGB'), dtype=np.float64) / 255.0


def write_depth(frame: Frame, path: str) -> None:
    """
    Depth sidecar: a 12-byte header (magic, width, height) followed by
    row-major little-endian float32 z-depths; background is +inf.
    """
    ensure_parent_dir(path)
    with open(path, 'wb') as f:
        f.write(_DEPTH_HEADER.pack(DEPTH_MAGIC, frame.width, frame.height))
        f.write(frame.depth.astype('<f4').tobytes())


def read_depth(path: str) -> np.ndarray:
    with open(path, 'rb') as f:
        data = f.read()
    if len(data) < _DEPTH_HEADER.size:
        raise FrameFormatError(f'{path} is too short to be a depth file')
    magic, width, height = _DEPTH_HEADER.unpack_from(data)
    if magic != DEPTH_MAGIC:
        raise FrameFormatError(f'{path} is not a depth file')
    values = np.frombuffer(data, dtype='<f4', offset=_DEPTH_HEADER.size)
    if values.size != width * height:
        raise FrameFormatError(
            f'{path}: expected {width * height} depths, found {values.size}')
    return values.astype(np.float64).reshape(height, width)


def write_frame(frame: Frame, path: str) -> None:
    """PPM at ``path`` plus a ``.depth`` sidecar next to it."""
    write_ppm(frame, path)
    write_depth(frame, os.path.splitext(path)[0] + '.depth')


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        if value == INFINITE:
            return 'INF'
        return repr(value)
    if isinstance(value, np.floating):
        return _cell(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_csv(path: str, rows: Sequence[Dict[str, Any]], header: Optional[
    List[str]] = None, versioned: bool = True) -> None:
    """
    Writes dict rows; the first column is ``schema_version`` unless
    ``versioned`` is false. Floats use repr so output is stable.
    """
    ensure_parent_dir(path)
    if header is None:
        header = list(rows[0].keys()) if rows else []
    columns = (['schema_version'] if versioned else []) + list(header)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            values = [_cell(row.get(key, '')) for key in header]
            writer.writerow(([SCHEMA_VERSION] if versioned else []) + values)
    logger.debug(f'Wrote {len(rows)} rows to {path}')


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, 'r', newline='', encoding='utf-8') as f:
        return list(csv.DictReader(f))


def safe_write_file(file_path: str, content: str, create_backup: bool = True
    ) -> bool:
    """
    Safely writes text to a file, optionally keeping a backup of the original.

    Args:
        file_path: The path to the file to write.
        content: The text to write.
        create_backup: Whether to create a backup of the original file.

    Returns:
        True if the write was successful, False otherwise.
    """
    backup_path = f'{file_path}.backup'
    if create_backup and os.path.exists(file_path):
        try:
            shutil.copy2(file_path, backup_path)
        except OSError as e:
            logger.warning(f'Failed to create backup: {e}')
    try:
        ensure_parent_dir(file_path)
        with open(file_path, 'w', encoding='utf-8') as f:
            f.write(content)
        return True
    except OSError as e:
        logger.error(f'Failed to write to file: {e}')
        if create_backup and os.path.exists(backup_path):
            try:
                shutil.move(backup_path, file_path)
                logger.info('Restored from backup.')
            except OSError as restore_error:
                logger.error(f'Failed to restore from backup: {restore_error}')
        return False
