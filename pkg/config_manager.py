"""
Experiment configuration.

A config is an INI file (``key = value`` under ``[section]`` headers) or a
JSON object of the same shape. Missing keys take their defaults and every
value is converted to the type of its field, so a config written by
``ConfigManager.save`` reproduces a run exactly.
"""
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Optional
import configparser
import json
import logging
import math
import os
from core.memsim import PIPELINE_MODES, HwConfig
from core.nerf import RenderSettings
from core.runtime import CostModel, PixelCostModel, RuntimeConfig
from core.scene import KIND_CODES, SIZE_CLASSES, Intrinsics, SceneRep, Trajectory, generate_orbit_trajectory, generate_scene, load_scene, load_trajectory
from utils.errors import ConfigError, HardwareConfigError, RuntimeConfigError
from utils.io_helpers import safe_write_file
logger = logging.getLogger(__name__)

ORBIT_CENTER = (0.0, 0.0, 0.0)


@dataclass
class SceneSection:
    kind: str = 'structured'
    seed: int = 1
    size: str = 'tiny'
    levels: int = 1
    channels: int = 8
    hidden: int = 32
    path: str = ''


@dataclass
class TrajectorySection:
    radius: float = 2.6
    fps: float = 30.0
    angular_speed: float = 0.3
    frames: int = 60
    path: str = ''


@dataclass
class CameraSection:
    width: int = 32
    height: int = 32
    fov_deg: float = 50.0


@dataclass
class RenderSection:
    samples: int = 64
    early_stop: float = 0.001
    reference_samples: int = 0


@dataclass
class RuntimeSection:
    window: int = 6
    angle_threshold_deg: float = 4.0
    mode: str = 'local'
    reference_policy: str = 'predicted'
    bandwidth: float = 10000000.0
    energy_per_byte_nj: float = 100.0
    remote_speedup: float = 10.0


@dataclass
class PipelineSection:
    mode: str = 'potamoi'


@dataclass
class OutputSection:
    directory: str = 'results'
    write_frames: bool = True


SECTIONS = {'scene': SceneSection, 'trajectory': TrajectorySection,
    'camera': CameraSection, 'render': RenderSection, 'runtime':
    RuntimeSection, 'pipeline': PipelineSection, 'output': OutputSection}


def _convert(value: Any, kind: type, where: str) -> Any:
    if isinstance(value, kind) and not (kind is int and isinstance(value, bool)):
        return value
    try:
        if kind is bool:
            text = str(value).strip().lower()
            if text in ('1', 'true', 'yes', 'on'):
                return True
            if text in ('0', 'false', 'no', 'off'):
                return False
            raise ValueError(text)
        if kind is int:
            return int(str(value).strip())
        if kind is float:
            return float(str(value).strip())
        return str(value).strip()
    except ValueError as e:
        raise ConfigError(f'{where}: cannot read {value!r} as {kind.__name__}'
            ) from e


def _section_from(cls, values: Dict[str, Any], name: str):
    known = {f.name: f.type for f in fields(cls)}
    kwargs = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f'Unknown key [{name}] {key}')
        kwargs[key] = _convert(value, known[key], f'[{name}] {key}')
    return cls(**kwargs)


@dataclass
class ExperimentConfig:
    """Everything one experiment run needs."""
    scene: SceneSection = field(default_factory=SceneSection)
    trajectory: TrajectorySection = field(default_factory=TrajectorySection)
    camera: CameraSection = field(default_factory=CameraSection)
    render: RenderSection = field(default_factory=RenderSection)
    runtime: RuntimeSection = field(default_factory=RuntimeSection)
    pipeline: PipelineSection = field(default_factory=PipelineSection)
    hardware: Dict[str, str] = field(default_factory=dict)
    output: OutputSection = field(default_factory=OutputSection)

    def validate(self) -> None:
        """
        Raises:
            ConfigError: A referenced file is missing or a value is out of range.
        """
        for what, path in (('scene', self.scene.path), ('trajectory', self
            .trajectory.path)):
            if path and not os.path.isfile(path):
                raise ConfigError(f'[{what}] path does not exist: {path}')
        if self.scene.kind not in KIND_CODES:
            raise ConfigError(f'Unknown scene kind: {self.scene.kind}')
        if self.scene.size not in SIZE_CLASSES:
            raise ConfigError(f'Unknown size class: {self.scene.size}')
        if self.runtime.window < 1:
            raise ConfigError(f'Warping window must be >= 1, got {self.runtime.window}')
        if self.runtime.angle_threshold_deg < 0:
            raise ConfigError('Angle threshold must be >= 0')
        if self.pipeline.mode not in PIPELINE_MODES:
            raise ConfigError(f'Unknown pipeline mode: {self.pipeline.mode}')
        if self.trajectory.frames < 2 and not self.trajectory.path:
            raise ConfigError('A trajectory needs at least two frames')
        if self.camera.width < 1 or self.camera.height < 1:
            raise ConfigError('Image size must be positive')
        if self.render.samples < 2:
            raise ConfigError('Need at least two samples per ray')
        if self.render.reference_samples < 0:
            raise ConfigError('reference_samples must be >= 0')
        try:
            self.hw_config()
            self.runtime_config()
        except (HardwareConfigError, RuntimeConfigError) as e:
            raise ConfigError(str(e)) from e

    def build_scene(self) -> SceneRep:
        if self.scene.path:
            return load_scene(self.scene.path)
        return generate_scene(self.scene.kind, self.scene.seed, self.scene.
            size, self.scene.levels, self.scene.channels, self.scene.hidden)

    def build_trajectory(self) -> Trajectory:
        if self.trajectory.path:
            return load_trajectory(self.trajectory.path)
        t = self.trajectory
        return generate_orbit_trajectory(ORBIT_CENTER, t.radius, t.fps, t.
            angular_speed, t.frames)

    def intrinsics(self) -> Intrinsics:
        return Intrinsics.from_fov(self.camera.width, self.camera.height,
            self.camera.fov_deg)

    def render_settings(self) -> RenderSettings:
        return RenderSettings(n_samples=self.render.samples, early_stop=self
            .render.early_stop)

    def hw_config(self) -> HwConfig:
        return HwConfig.from_dict(self.hardware)

    def runtime_config(self, cost_model: Optional[CostModel] = None
        ) -> RuntimeConfig:
        r = self.runtime
        return RuntimeConfig(window=r.window, angle_threshold=math.radians(
            r.angle_threshold_deg), mode=r.mode, reference_policy=r.
            reference_policy, remote_bandwidth=r.bandwidth,
            remote_energy_per_byte=r.energy_per_byte_nj, cost_model=
            cost_model or PixelCostModel(), remote_speedup=r.remote_speedup)

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        data = {name: asdict(getattr(self, name)) for name in SECTIONS}
        data['hardware'] = dict(self.hardware)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Dict[str, Any]]) -> 'ExperimentConfig':
        config = cls()
        for name, values in data.items():
            if name == 'hardware':
                config.hardware = {str(k): str(v) for k, v in values.items()}
            elif name in SECTIONS:
                setattr(config, name, _section_from(SECTIONS[name], values, name))
            else:
                raise ConfigError(f'Unknown config section: [{name}]')
        return config


OVERRIDES = {'kind': ('scene', 'kind'), 'seed': ('scene', 'seed'),
    'window': ('runtime', 'window'), 'phi': ('runtime',
    'angle_threshold_deg'), 'mode': ('runtime', 'mode'), 'pipeline': (
    'pipeline', 'mode'), 'frames': ('trajectory', 'frames'), 'width': (
    'camera', 'width'), 'height': ('camera', 'height'), 'samples': (
    'render', 'samples'), 'output': ('output', 'directory')}


class ConfigManager:
    """Loads, overrides and saves an ``ExperimentConfig``."""

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file
        self.config = self.load_config()

    def load_config(self) -> ExperimentConfig:
        if not self.config_file:
            return ExperimentConfig()
        if not os.path.isfile(self.config_file):
            raise ConfigError(f'Config file not found: {self.config_file}')
        try:
            if self.config_file.lower().endswith('.json'):
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    data = json.load(f)
                if not isinstance(data, dict):
                    raise ConfigError(f'{self.config_file}: expected a JSON object')
            else:
                parser = configparser.ConfigParser(interpolation=None)
                parser.read(self.config_file, encoding='utf-8')
                data = {section: dict(parser.items(section)) for section in
                    parser.sections()}
        except (json.JSONDecodeError, configparser.Error) as e:
            raise ConfigError(f'Cannot parse {self.config_file}: {e}') from e
        config = ExperimentConfig.from_dict(data)
        logger.debug(f'Loaded config from {self.config_file}')
        return config

    def apply_overrides(self, overrides: Dict[str, Any]) -> ExperimentConfig:
        """Applies CLI flag values; ``None`` means the flag was not given."""
        for flag, value in overrides.items():
            if value is None or flag not in OVERRIDES:
                continue
            section_name, key = OVERRIDES[flag]
            section = getattr(self.config, section_name)
            kind = {f.name: f.type for f in fields(section)}[key]
            setattr(section, key, _convert(value, kind, f'--{flag}'))
        return self.config

    def validated(self) -> ExperimentConfig:
        self.config.validate()
        return self.config

    def to_ini(self) -> str:
        lines = []
        for name, values in self.config.to_dict().items():
            lines.append(f'[{name}]')
            lines.extend(f'{key} = {value}' for key, value in values.items())
            lines.append('')
        return '\n'.join(lines)

    def save(self, path: str) -> None:
        """Writes the resolved config as INI."""
        if not safe_write_file(path, self.to_ini(), create_backup=False):
            raise ConfigError(f'Cannot write config to {path}')
        logger.debug(f'Saved config to {path}')


def config_from_command(command_data: Dict[str, Any]) -> ExperimentConfig:
    """Config file named by ``command_data['config']`` plus flag overrides."""
    manager = ConfigManager(command_data.get('config'))
    manager.apply_overrides(command_data)
    return manager.validated()
