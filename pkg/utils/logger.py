from typing import Optional
import logging

project_logger = logging.getLogger('streamforge')
project_logger.setLevel(logging.WARNING)
if not project_logger.handlers:
    ch = logging.StreamHandler()
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    ch.setFormatter(formatter)
    project_logger.addHandler(ch)


def configure_logging(level: int = logging.WARNING) -> None:
    """
    Sets the level of the project logger and routes the per-module loggers
    (``core.*``, ``commands.*``) through the same handler.

    Args:
        level: A logging level such as ``logging.DEBUG``.
    """
    project_logger.setLevel(level)
    for name in ('core', 'commands', 'utils', 'experiment_manager',
        'config_manager'):
        module_logger = logging.getLogger(name)
        module_logger.setLevel(level)
        if not module_logger.handlers:
            for handler in project_logger.handlers:
                module_logger.addHandler(handler)
        module_logger.propagate = False


def log_render_event(kind: str, pixels: int, duration: Optional[float] = None
    ) -> None:
    """
    Logs one completed render.

    Args:
        kind: 'full', 'sparse', 'stream' or 'downsampled'.
        pixels: Number of pixels that went through the NeRF pipeline.
        duration: Optional wall-clock time in seconds.
    """
    message = f'Render [{kind}] | pixels: {pixels}'
    if duration is not None:
        message += f' | Duration: {duration:.2f}s'
    project_logger.info(message)


def log_stream_summary(mvoxels: int, items: int, skipped: int) -> None:
    project_logger.info(
        f'Stream pass | MVoxels loaded: {mvoxels} | work items: {items} | skipped after termination: {skipped}'
        )


def log_schedule_summary(frames: int, references: int, fallbacks: int,
    makespan: float) -> None:
    project_logger.info(
        f'Schedule | frames: {frames} | references: {references} | fallbacks: {fallbacks} | makespan: {makespan:.6f}s'
        )


def log_simulation_report(mode: str, cycles: int, energy: float) -> None:
    project_logger.info(
        f'Simulation [{mode}] | cycles: {cycles} | energy: {energy:.2f} units')


def log_experiment_complete(success: bool, name: Optional[str] = None,
    duration: Optional[float] = None, error: Optional[str] = None) -> None:
    """
    Logs the completion of an experiment or CLI command.

    Args:
        success: Whether the run finished.
        name: Optional experiment or command name.
        duration: Optional time taken in seconds.
        error: Error text when the run failed.
    """
    status = 'SUCCESS' if success else 'FAILED'
    message = f'Experiment [{status}]'
    if name:
        message += f' | Name: {name}'
    if duration is not None:
        message += f' | Duration: {duration:.2f}s'
    if success:
        project_logger.info(message)
    else:
        if error:
            message += f' | Error: {error}'
        project_logger.error(message)
