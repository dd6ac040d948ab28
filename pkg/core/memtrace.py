"""
MemTrace - ordered log of memory access events.

Events are stored column-wise so that a full-frame trace with hundreds of
thousands of scratchpad reads stays cheap to record and export.
"""
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence
import csv
import numpy as np
from utils.io_helpers import SCHEMA_VERSION, ensure_parent_dir

EVENT_KINDS = ('dram_stream', 'dram_random', 'sram_read', 'sram_write')
DRAM_KINDS = ('dram_stream', 'dram_random')
TRACE_HEADER = ['seq', 'kind', 'address', 'bytes', 'tag']
# 16-bit fixed-point storage; a Gaussian point is position(3), scale, opacity, colour(3)
BYTES_PER_VALUE = 2
VALUES_PER_POINT = 8


@dataclass(frozen=True)
class MemEvent:
    seq: int
    kind: str
    address: int
    bytes: int
    tag: int


class MemTrace:
    """Append-only event log; ``seq`` is the position in the log."""

    def __init__(self):
        self._kinds: List[int] = []
        self._addresses: List[int] = []
        self._sizes: List[int] = []
        self._tags: List[int] = []

    def __len__(self) -> int:
        return len(self._kinds)

    def record(self, kind: str, address: int, size: int, tag: int = -1
        ) -> None:
        self._kinds.append(EVENT_KINDS.index(kind))
        self._addresses.append(int(address))
        self._sizes.append(int(size))
        self._tags.append(int(tag))

    def record_many(self, kind: str, addresses: Sequence[int], size: int,
        tag: int = -1) -> None:
        """Records one event per address, all with the same size and tag."""
        addresses = [int(a) for a in addresses]
        code = EVENT_KINDS.index(kind)
        self._kinds.extend([code] * len(addresses))
        self._addresses.extend(addresses)
        self._sizes.extend([int(size)] * len(addresses))
        self._tags.extend([int(tag)] * len(addresses))

    def extend(self, other: 'MemTrace') -> None:
        self._kinds.extend(other._kinds)
        self._addresses.extend(other._addresses)
        self._sizes.extend(other._sizes)
        self._tags.extend(other._tags)

    def __iter__(self) -> Iterator[MemEvent]:
        for seq, (code, address, size, tag) in enumerate(zip(self._kinds,
            self._addresses, self._sizes, self._tags)):
            yield MemEvent(seq, EVENT_KINDS[code], address, size, tag)

    def events(self, kinds: Optional[Sequence[str]] = None) -> List[MemEvent]:
        if kinds is None:
            return list(self)
        return [event for event in self if event.kind in kinds]

    def arrays(self) -> Dict[str, np.ndarray]:
        return {'kind': np.array(self._kinds, dtype=np.int8), 'address': np
            .array(self._addresses, dtype=np.int64), 'bytes': np.array(self
            ._sizes, dtype=np.int64), 'tag': np.array(self._tags, dtype=np.
            int64)}

    def count(self, kind: str) -> int:
        code = EVENT_KINDS.index(kind)
        return sum(1 for k in self._kinds if k == code)

    def total_bytes(self, kinds: Sequence[str] = DRAM_KINDS) -> int:
        codes = {EVENT_KINDS.index(kind) for kind in kinds}
        return sum(size for k, size in zip(self._kinds, self._sizes) if k in
            codes)

    def write_csv(self, path: str) -> None:
        ensure_parent_dir(path)
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f)
            writer.writerow(['schema_version'] + TRACE_HEADER)
            for event in self:
                writer.writerow([SCHEMA_VERSION, event.seq, event.kind,
                    event.address, event.bytes, event.tag])
