"""
Exception hierarchy for StreamForge.

Every error carries the name of the module that raised it so the CLI can
print a diagnostic like ``[streaming] MVoxel of 40960 bytes exceeds ...``.
"""


class StreamForgeError(Exception):
    """Base class for all StreamForge errors."""
    module = 'streamforge'


class SceneError(StreamForgeError):
    module = 'scene'


class SceneFormatError(SceneError):
    """Malformed .scene header (magic, version, kind or dimensions)."""


class TruncatedPayloadError(SceneError):
    """The payload is shorter than the header promises."""


class SceneInvariantError(SceneError):
    """A scene or camera type invariant does not hold."""


class TrajectoryFormatError(SceneError):
    """Malformed trajectory text file."""


class RuntimeSchedulingError(StreamForgeError):
    module = 'runtime'


class InsufficientHistoryError(RuntimeSchedulingError):
    """Direction prediction needs at least two poses."""


class RuntimeConfigError(RuntimeSchedulingError):
    pass


class CapacityError(StreamForgeError):
    """A block of data does not fit the buffer it must live in."""
    module = 'streaming'

    def __init__(self, message: str, module: str = 'streaming'):
        super().__init__(message)
        self.module = module


class LayoutError(StreamForgeError):
    """A bank request names a location the layout does not map."""
    module = 'memsim'


class HarnessError(StreamForgeError):
    module = 'harness'


class DimensionMismatchError(HarnessError):
    pass


class TrajectoryMismatchError(HarnessError):
    pass


class ConfigError(HarnessError):
    pass


class HardwareConfigError(StreamForgeError):
    """HwConfig or EnergyTable values out of range."""
    module = 'memsim'


class FrameFormatError(StreamForgeError):
    """Malformed frame or depth sidecar file."""
    module = 'io'
