"""
Cycle and energy model of the rendering hardware.

Three dataflows are modelled over the memory traces produced by the
renderers:

* ``baseline_pixel_centric``: the gather stream of ``core.nerf`` served by a
  cache-less random-access DRAM path, with a feature-major scratchpad.
* ``fully_streaming``: the streaming dataflow of ``core.streaming`` on a
  feature-major scratchpad without a gathering unit.
* ``potamoi``: the streaming dataflow with a channel-major scratchpad, the
  gathering unit and double-buffered MVoxel feature tables.

All energies are in abstract units (one streaming DRAM access = 1.0).
"""
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union
import logging
import math
import numpy as np
from core.exp_unit import DEFAULT_ITERATIONS
from core.memtrace import BYTES_PER_VALUE, DRAM_KINDS, EVENT_KINDS, VALUES_PER_POINT, MemTrace
from core.nerf import RenderSettings, pixel_grid, render_pixels
from core.octree import MergedOctree
from core.runtime import CostModel, RenderTask, TaskWork
from core.scene import CameraPose, Intrinsics, SceneRep
from core.streaming import Block, RayIndexTable, StreamPlan, octree_blocks, run_stream
from utils.errors import CapacityError, HardwareConfigError, LayoutError
from utils.logger import log_simulation_report
logger = logging.getLogger(__name__)

PIPELINE_MODES = ('baseline_pixel_centric', 'fully_streaming', 'potamoi')
STRUCTURED_RIT_ENTRY_BYTES = 48
UNSTRUCTURED_RIT_ENTRY_BYTES = 4
CORNERS = 8


@dataclass(frozen=True)
class EnergyTable:
    """Energy per fixed-size access."""
    dram_stream: float = 1.0
    dram_random: float = 3.0
    sram: float = 0.12

    def __post_init__(self):
        if min(self.dram_stream, self.dram_random, self.sram) <= 0:
            raise HardwareConfigError('Energy table entries must be positive')
        if not math.isclose(self.dram_random / self.dram_stream, 3.0):
            raise HardwareConfigError(
                'Random DRAM access must cost 3x a streaming access')
        if not math.isclose(self.dram_random / self.sram, 25.0):
            raise HardwareConfigError(
                'Random DRAM access must cost 25x an SRAM access')


@dataclass
class HwConfig:
    mac_rows: int = 24
    mac_cols: int = 24
    feature_buffer_bytes: int = 1536 * 1024
    feature_buffer_granularity: int = 32 * 1024
    weight_buffer_bytes: int = 96 * 1024
    rit_buffer_bytes: int = 6 * 1024
    rit_buffers: int = 2
    mft_bytes: int = 32 * 1024
    mft_buffers: int = 2
    banks: int = 32
    ports: int = 2
    burst_bytes: int = 64
    dram_bytes_per_cycle: int = 64
    bytes_per_value: int = BYTES_PER_VALUE
    gu_fill_cycles: int = 4
    clock_hz: float = 1000000000.0
    exp_iterations: int = DEFAULT_ITERATIONS
    vector_lanes: int = 24
    index_lanes: int = 32
    energy: EnergyTable = field(default_factory=EnergyTable)

    def __post_init__(self):
        if self.banks < 1 or self.ports < 1:
            raise HardwareConfigError(
                f'Need B >= 1 and M >= 1, got B={self.banks}, M={self.ports}')
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, (int, float)) and not value > 0:
                raise HardwareConfigError(f'{f.name} must be positive, got {value}')

    @property
    def rit_entries_structured(self) -> int:
        return self.rit_buffer_bytes // STRUCTURED_RIT_ENTRY_BYTES

    @property
    def rit_entries_unstructured(self) -> int:
        return self.rit_buffer_bytes // UNSTRUCTURED_RIT_ENTRY_BYTES

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> 'HwConfig':
        """Builds a config from string or typed overrides; unknown keys are rejected."""
        known = {f.name: f for f in fields(cls) if f.name != 'energy'}
        kwargs = {}
        for key, value in values.items():
            if key not in known:
                raise HardwareConfigError(f'Unknown hardware setting: {key}')
            kind = float if known[key].type in (float, 'float') else int
            kwargs[key] = kind(value)
        return cls(**kwargs)


@dataclass
class DramClassification:
    streaming_bytes: int = 0
    random_bytes: int = 0
    streaming_accesses: int = 0
    random_accesses: int = 0

    @property
    def total_bytes(self) -> int:
        return self.streaming_bytes + self.random_bytes

    @property
    def accesses(self) -> int:
        return self.streaming_accesses + self.random_accesses

    @property
    def streaming_fraction(self) -> float:
        return self.streaming_bytes / self.total_bytes if self.total_bytes else 0.0

    @property
    def random_fraction(self) -> float:
        return self.random_bytes / self.total_bytes if self.total_bytes else 0.0


def classify_dram(trace: MemTrace, burst_bytes: int = 64) -> DramClassification:
    """
    Splits DRAM events into burst-sized accesses and labels each one.

    A run is a maximal sequence of consecutive DRAM events with the same tag.
    An access is streaming iff it continues the current run at exactly the
    previous access's address plus size; every run head is random.
    """
    result = DramClassification()
    run_tag = None
    previous_end = None
    for event in trace:
        if event.kind not in DRAM_KINDS:
            continue
        if event.tag != run_tag:
            run_tag, previous_end = event.tag, None
        offset = 0
        while offset < event.bytes or (offset == 0 and event.bytes == 0):
            size = min(burst_bytes, event.bytes - offset)
            address = event.address + offset
            if previous_end is not None and address == previous_end:
                result.streaming_bytes += size
                result.streaming_accesses += 1
            else:
                result.random_bytes += size
                result.random_accesses += 1
            previous_end = address + size
            offset += burst_bytes
    return result


def count_sram_accesses(trace: MemTrace, burst_bytes: int = 64) -> int:
    arrays = trace.arrays()
    sram = np.isin(arrays['kind'], [EVENT_KINDS.index('sram_read'),
        EVENT_KINDS.index('sram_write')])
    sizes = arrays['bytes'][sram]
    return int(np.maximum(1, -(-sizes // burst_bytes)).sum())


@dataclass
class BankLayout:
    """
    Scratchpad mapping of (feature, channel) to (bank, offset).

    feature_major keeps a whole feature vector in bank ``f mod B``;
    channel_major spreads channels over banks, wrapping every B channels.
    """
    mode: str
    banks: int
    channels: int
    n_features: int

    def __post_init__(self):
        if self.mode not in ('feature_major', 'channel_major'):
            raise LayoutError(f'Unknown bank layout: {self.mode}')

    def locate(self, features, channels) -> Tuple[np.ndarray, np.ndarray]:
        features = np.asarray(features, dtype=np.int64)
        channels = np.asarray(channels, dtype=np.int64)
        bad = (features < 0) | (features >= self.n_features) | (channels < 0
            ) | (channels >= self.channels)
        if bad.any():
            index = int(np.argmax(bad))
            raise LayoutError(
                f'Location (feature {int(features.reshape(-1)[index])}, channel {int(channels.reshape(-1)[index])}) is not mapped'
                )
        if self.mode == 'feature_major':
            return features % self.banks, features // self.banks * self.channels + channels
        return channels % self.banks, channels // self.banks * self.n_features + features


@dataclass
class BankStats:
    cycles: int
    stalls: int
    requests: int
    group_cycles: np.ndarray = field(repr=False, default=None)

    @property
    def conflict_rate(self) -> float:
        return self.stalls / self.cycles if self.cycles else 0.0


def simulate_bank_arrays(group_ids: np.ndarray, features: np.ndarray,
    channels: np.ndarray, layout: BankLayout, ports: int) -> BankStats:
    """
    Vectorised bank model. Requests sharing a group id issue in the same
    cycle; a bank serves up to ``ports`` distinct offsets per cycle and
    replays the rest.
    """
    group_ids = np.asarray(group_ids, dtype=np.int64)
    if len(group_ids) == 0:
        return BankStats(0, 0, 0, np.zeros(0, dtype=np.int64))
    banks, offsets = layout.locate(features, channels)
    distinct = np.unique(np.stack([group_ids, banks, offsets], axis=1), axis=0)
    pairs, per_bank = np.unique(distinct[:, :2], axis=0, return_counts=True)
    n_groups = int(group_ids.max()) + 1
    group_cycles = np.zeros(n_groups, dtype=np.int64)
    np.maximum.at(group_cycles, pairs[:, 0], -(-per_bank // ports))
    issued = np.zeros(n_groups, dtype=bool)
    issued[group_ids] = True
    group_cycles = group_cycles[issued]
    cycles = int(group_cycles.sum())
    return BankStats(cycles, cycles - len(group_cycles), len(group_ids),
        group_cycles)


def simulate_banks(requests: Sequence[Sequence[Tuple[int, int]]], layout:
    BankLayout, ports: int) -> BankStats:
    """
    Bank conflicts of per-cycle request groups.

    Args:
        requests: One group per issue cycle, each a list of (feature, channel).
        layout: Scratchpad mapping.
        ports: Read ports per bank (M).

    Returns:
        BankStats; stalls are the replay cycles beyond one per group.
    """
    group_ids, features, channels = [], [], []
    for group, lanes in enumerate(requests):
        for feature, channel in lanes:
            group_ids.append(group)
            features.append(feature)
            channels.append(channel)
    return simulate_bank_arrays(np.array(group_ids, dtype=np.int64), np.
        array(features, dtype=np.int64), np.array(channels, dtype=np.int64),
        layout, ports)


def _chunk_ids(tags: np.ndarray, size: int) -> np.ndarray:
    """Group ids that chunk each run of equal tags into ``size``-sized groups."""
    n = len(tags)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    starts = np.concatenate([[0], np.nonzero(np.diff(tags))[0] + 1])
    lengths = np.diff(np.append(starts, n))
    within = np.arange(n) - np.repeat(starts, lengths)
    chunks = -(-lengths // size)
    first_group = np.concatenate([[0], np.cumsum(chunks)[:-1]])
    return np.repeat(first_group, lengths) + within // size


def feature_major_groups(features: np.ndarray, lanes: int, tags: Optional[
    np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    ``lanes`` samples issue together, each reading one feature; channel 0
    stands in for every channel since all channels of a feature share a bank.
    """
    features = np.asarray(features, dtype=np.int64)
    tags = np.zeros(len(features), dtype=np.int64) if tags is None else tags
    return _chunk_ids(tags, lanes), features, np.zeros(len(features), dtype
        =np.int64)


def channel_major_groups(features: np.ndarray, channels: int, banks: int,
    ports: int, tags: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.
    ndarray, np.ndarray]:
    """``ports`` features issue together, one B-channel segment per cycle."""
    features = np.asarray(features, dtype=np.int64)
    tags = np.zeros(len(features), dtype=np.int64) if tags is None else tags
    chunk = _chunk_ids(tags, ports)
    segments = -(-channels // banks)
    group_ids, feats, chans = [], [], []
    for s in range(segments):
        seg = np.arange(s * banks, min((s + 1) * banks, channels))
        group_ids.append(np.repeat(chunk * segments + s, len(seg)))
        feats.append(np.repeat(features, len(seg)))
        chans.append(np.tile(seg, len(features)))
    return np.concatenate(group_ids), np.concatenate(feats), np.concatenate(
        chans)


def gather_cycles(items: int, ports: int, structured: bool, segments: int = 1
    ) -> int:
    """GU cycles for one block: eight corner reads per structured sample."""
    per_item = CORNERS if structured else 1
    return -(-items // ports) * per_item * segments


@dataclass
class GuTiming:
    cycles: int
    load_cycles: int
    gather_cycles: int
    rit_batches: int
    per_block: List[Tuple[int, int, int]] = field(default_factory=list)
    trace: MemTrace = field(default_factory=MemTrace)


def simulate_gu(rit: RayIndexTable, blocks: Sequence[Block], cfg: HwConfig,
    channels: int = 1) -> GuTiming:
    """
    Gathering-unit timing with a double-buffered MVoxel feature table.

    Each block costs max(DRAM load, gather) because the next block loads
    while the current one is gathered; the pipeline fill is paid once.

    Raises:
        CapacityError: A block does not fit one MFT buffer.
    """
    structured = rit.kind == 'structured'
    segments = -(-channels // cfg.banks) if structured else 1
    per_batch = (cfg.rit_entries_structured if structured else cfg.
        rit_entries_unstructured)
    timing = GuTiming(0, 0, 0, 0)
    stage = 0
    for block in blocks:
        if block.block_id not in rit.entries:
            continue
        if block.nbytes > cfg.mft_bytes:
            raise CapacityError(
                f'Block {block.block_id} needs {block.nbytes} bytes, MFT holds {cfg.mft_bytes}'
                , module='memsim')
        if rit.executed:
            items = rit.executed.get(block.block_id, 0)
        else:
            items = rit.entries[block.block_id].n_items
        if items == 0:
            continue
        load = -(-block.nbytes // cfg.dram_bytes_per_cycle)
        gather = gather_cycles(items, cfg.ports, structured, segments)
        stage += max(load, gather)
        timing.load_cycles += load
        timing.gather_cycles += gather
        timing.rit_batches += -(-items // per_batch)
        timing.per_block.append((block.block_id, load, gather))
        timing.trace.record('dram_stream', block.base, block.nbytes, block.
            block_id)
        timing.trace.record_many('sram_read', range(items), CORNERS *
            channels * cfg.bytes_per_value if structured else
            VALUES_PER_POINT * cfg.bytes_per_value, block.block_id)
    timing.cycles = stage + (cfg.gu_fill_cycles if timing.per_block else 0)
    return timing


def simulate_systolic(m: int, k: int, n: int, rows: int = 24, cols: int = 24
    ) -> int:
    """Weight-stationary GEMM: ceil(M/rows) * ceil(N/cols) tiles of K + rows + cols - 1."""
    if min(m, k, n, rows, cols) < 1:
        raise ValueError(f'GEMM and array dims must be >= 1, got {(m, k, n)} on {rows}x{cols}')
    return -(-m // rows) * -(-n // cols) * (k + rows + cols - 1)


@dataclass
class SimReport:
    mode: str
    kind: str
    samples: int
    cycles_index: int
    cycles_gather: int
    cycles_compute: int
    stall_cycles: int
    conflict_rate: float
    dram: DramClassification
    sram_accesses: int
    energy_table: EnergyTable
    blocks_loaded: int = 0
    rit_batches: int = 0

    @property
    def total_cycles(self) -> int:
        return self.cycles_index + self.cycles_gather + self.cycles_compute

    @property
    def energy_dram(self) -> float:
        return (self.dram.streaming_accesses * self.energy_table.
            dram_stream + self.dram.random_accesses * self.energy_table.
            dram_random)

    @property
    def energy_sram(self) -> float:
        return self.sram_accesses * self.energy_table.sram

    @property
    def energy(self) -> float:
        return self.energy_dram + self.energy_sram

    def as_row(self) -> Dict[str, Any]:
        return {'mode': self.mode, 'kind': self.kind, 'samples': self.
            samples, 'cycles_index': self.cycles_index, 'cycles_gather':
            self.cycles_gather, 'cycles_compute': self.cycles_compute,
            'total_cycles': self.total_cycles, 'stall_cycles': self.
            stall_cycles, 'conflict_rate': self.conflict_rate,
            'dram_streaming_bytes': self.dram.streaming_bytes,
            'dram_random_bytes': self.dram.random_bytes,
            'dram_streaming_accesses': self.dram.streaming_accesses,
            'dram_random_accesses': self.dram.random_accesses,
            'sram_accesses': self.sram_accesses, 'energy_dram': self.
            energy_dram, 'energy_sram': self.energy_sram, 'energy': self.
            energy, 'blocks_loaded': self.blocks_loaded, 'rit_batches':
            self.rit_batches}


def _compute_cycles(kind: str, samples: int, channels: int, hidden: int,
    cfg: HwConfig) -> int:
    if samples == 0:
        return 0
    if kind == 'structured':
        return simulate_systolic(samples, channels, hidden + 1, cfg.
            mac_rows, cfg.mac_cols) + simulate_systolic(samples, hidden, 3,
            cfg.mac_rows, cfg.mac_cols)
    # one exp per sample; the exponent is negative, so one reciprocal each
    return -(-samples // cfg.vector_lanes) * (cfg.exp_iterations + 1)


def _scene_dims(scene: SceneRep) -> Tuple[int, int]:
    if scene.kind == 'structured':
        return scene.channels, scene.mlp.hidden
    return VALUES_PER_POINT, 0


def simulate_pipeline(scene: SceneRep, pose: CameraPose, intr: Intrinsics,
    mode: str = 'potamoi', cfg: Optional[HwConfig] = None, settings:
    Optional[RenderSettings] = None, pixels: Optional[np.ndarray] = None,
    layout: Optional[Union[StreamPlan, MergedOctree]] = None) -> SimReport:
    """
    Runs one frame (or a pixel subset) through the chosen dataflow and
    accounts cycles per stage, bank conflicts, DRAM traffic and energy.

    Args:
        scene: Scene to render.
        pose: Camera pose.
        intr: Intrinsics.
        mode: One of ``PIPELINE_MODES``.
        cfg: Hardware configuration.
        settings: Render settings; bytes per value follow ``cfg``.
        pixels: Optional (P, 2) subset of pixels.
        layout: Streaming layout to reuse.

    Returns:
        SimReport for the frame.
    """
    if mode not in PIPELINE_MODES:
        raise HardwareConfigError(f'Unknown pipeline mode: {mode}')
    cfg = cfg or HwConfig()
    settings = settings or RenderSettings()
    if settings.bytes_per_value != cfg.bytes_per_value:
        settings = RenderSettings(settings.n_samples, settings.early_stop,
            settings.opacity_threshold, cfg.bytes_per_value)
    if mode == 'baseline_pixel_centric':
        report = _simulate_baseline(scene, pose, intr, cfg, settings, pixels)
    else:
        report = _simulate_streaming(scene, pose, intr, mode, cfg, settings,
            pixels, layout)
    log_simulation_report(mode, report.total_cycles, report.energy)
    return report


def _simulate_baseline(scene: SceneRep, pose: CameraPose, intr: Intrinsics,
    cfg: HwConfig, settings: RenderSettings, pixels: Optional[np.ndarray]
    ) -> SimReport:
    trace = MemTrace()
    if pixels is None:
        pixels = pixel_grid(intr)
    _, _, samples = render_pixels(pose, intr, scene, pixels, settings, trace)
    channels, hidden = _scene_dims(scene)
    dram = classify_dram(trace, cfg.burst_bytes)
    arrays = trace.arrays()
    gathers = arrays['kind'] == EVENT_KINDS.index('dram_random')
    features = arrays['address'][gathers] // np.maximum(arrays['bytes'][
        gathers], 1)
    layout = BankLayout('feature_major', cfg.banks, 1, int(features.max()) +
        1 if len(features) else 1)
    banks = simulate_bank_arrays(*feature_major_groups(features, cfg.banks),
        layout, cfg.ports)
    return SimReport('baseline_pixel_centric', scene.kind, samples, -(-
        samples // cfg.index_lanes), dram.accesses + banks.stalls *
        channels, _compute_cycles(scene.kind, samples, channels, hidden,
        cfg), banks.stalls * channels, banks.conflict_rate, dram,
        count_sram_accesses(trace, cfg.burst_bytes), cfg.energy)


def _simulate_streaming(scene: SceneRep, pose: CameraPose, intr:
    Intrinsics, mode: str, cfg: HwConfig, settings: RenderSettings, pixels:
    Optional[np.ndarray], layout: Optional[Union[StreamPlan, MergedOctree]]
    ) -> SimReport:
    result = run_stream(pose, intr, scene, layout, cfg.mft_bytes, settings,
        pixels)
    rit, trace = result.rit, result.trace
    channels, hidden = _scene_dims(scene)
    blocks = (result.layout.blocks if scene.kind == 'structured' else
        octree_blocks(result.layout))
    dram = classify_dram(trace, cfg.burst_bytes)
    arrays = trace.arrays()
    reads = arrays['kind'] == EVENT_KINDS.index('sram_read')
    features, tags = arrays['address'][reads], arrays['tag'][reads]
    n_features = int(features.max()) + 1 if len(features) else 1
    index_cycles = -(-rit.n_samples // cfg.index_lanes)
    compute = _compute_cycles(scene.kind, rit.n_samples, channels, hidden, cfg)
    random_gathers = arrays['kind'] == EVENT_KINDS.index('dram_random')
    reverted_cycles = -(-int(arrays['bytes'][random_gathers].sum()) // cfg.
        burst_bytes)
    if mode == 'potamoi':
        layout_cm = BankLayout('channel_major', cfg.banks, channels, n_features)
        banks = simulate_bank_arrays(*channel_major_groups(features,
            channels, cfg.banks, cfg.ports, tags), layout_cm, cfg.ports)
        gu = simulate_gu(rit, blocks, cfg, channels)
        gather = gu.cycles + banks.stalls + reverted_cycles
        batches = gu.rit_batches
    else:
        layout_fm = BankLayout('feature_major', cfg.banks, 1, n_features)
        banks = simulate_bank_arrays(*feature_major_groups(features, cfg.
            banks, tags), layout_fm, cfg.ports)
        load = sum(-(-block.nbytes // cfg.dram_bytes_per_cycle) for block in
            blocks if block.block_id in rit.executed)
        gather = load + banks.cycles * channels + reverted_cycles
        batches = 0
    return SimReport(mode, scene.kind, rit.n_samples, index_cycles, gather,
        compute, banks.stalls * (1 if mode == 'potamoi' else channels),
        banks.conflict_rate, dram, count_sram_accesses(trace, cfg.
        burst_bytes), cfg.energy, result.stats.blocks_loaded, batches)


def dram_energy_split(a: SimReport, b: SimReport) -> Dict[str, float]:
    """
    Splits the DRAM energy saved going from A to B into the part due to
    fewer accesses and the part due to cheaper (streaming) accesses.
    """
    return split_dram_saving(a.energy_dram, a.dram.accesses, b.energy_dram,
        b.dram.accesses)


def split_dram_saving(energy_a: float, accesses_a: int, energy_b: float,
    accesses_b: int) -> Dict[str, float]:
    """``dram_energy_split`` over accumulated energies and access counts."""
    per_access_a = energy_a / accesses_a if accesses_a else 0.0
    per_access_b = energy_b / accesses_b if accesses_b else 0.0
    return {'dram_energy_saving': energy_a - energy_b, 'traffic_reduction':
        (accesses_a - accesses_b) * per_access_a, 'streaming_conversion':
        accesses_b * (per_access_a - per_access_b)}


class MemsimCostModel(CostModel):
    """
    Task costs from ``simulate_pipeline`` over the pixels a task renders.

    Cycles convert to seconds with ``cfg.clock_hz``; energy units are taken
    as nJ one to one.
    """

    def __init__(self, scene: SceneRep, intr: Intrinsics, cfg: Optional[
        HwConfig] = None, mode: str = 'potamoi', settings: Optional[
        RenderSettings] = None, nj_per_unit: float = 1.0):
        self.scene = scene
        self.intr = intr
        self.cfg = cfg or HwConfig()
        self.mode = mode
        self.settings = settings
        self.nj_per_unit = nj_per_unit
        self.reports: Dict[int, Optional[SimReport]] = {}
        self._cache: Dict[Tuple[Any, ...], Optional[SimReport]] = {}

    @staticmethod
    def _key(task: RenderTask, work: TaskWork) -> Tuple[Any, ...]:
        pixels = b'' if work.pixels is None else np.ascontiguousarray(work.
            pixels, dtype=np.int64).tobytes()
        return (task.task_id, work.pose.rotation.tobytes(), work.pose.
            translation.tobytes(), work.nerf_pixels, pixels)

    def report(self, task: RenderTask, work: TaskWork) -> Optional[SimReport]:
        """Cached per task and work; ``reports`` holds the latest per task id."""
        key = self._key(task, work)
        if key not in self._cache:
            if work.nerf_pixels == 0:
                self._cache[key] = None
            else:
                self._cache[key] = simulate_pipeline(self.scene, work.pose,
                    self.intr, self.mode, self.cfg, self.settings, work.pixels)
        self.reports[task.task_id] = self._cache[key]
        return self._cache[key]

    def latency(self, task: RenderTask, work: TaskWork) -> float:
        report = self.report(task, work)
        return report.total_cycles / self.cfg.clock_hz if report else 0.0

    def energy(self, task: RenderTask, work: TaskWork) -> float:
        report = self.report(task, work)
        return report.energy * self.nj_per_unit if report else 0.0
