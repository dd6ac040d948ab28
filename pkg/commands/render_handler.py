"""
Render Handler - renders one frame of the configured trajectory.

Writes ``render_<index>.ppm`` and its ``.depth`` sidecar.
"""
from typing import Any, Dict
import logging
import os
import time
from config_manager import config_from_command
from core.nerf import render_downsampled, render_frame
from utils.errors import StreamForgeError
from utils.io_helpers import write_frame
from utils.logger import log_experiment_complete
logger = logging.getLogger(__name__)


def handle_render_command(command_data: Dict[str, Any]) -> Dict[str, Any]:
    """
    Args:
        command_data: CLI values; ``frame_index`` picks the pose and
            ``downsample`` > 1 renders the downsampled baseline instead.

    Returns:
        Dictionary with ``success`` and the written paths.
    """
    start = time.time()
    try:
        config = config_from_command(command_data)
        scene = config.build_scene()
        trajectory = config.build_trajectory()
        index = int(command_data.get('frame_index') or 0)
        if not 0 <= index < len(trajectory):
            return {'success': False, 'module': 'harness', 'error':
                f'Frame index {index} outside trajectory of {len(trajectory)} poses'
                }
        pose = trajectory.poses[index]
        intr = config.intrinsics()
        factor = int(command_data.get('downsample') or 1)
        if factor > 1:
            frame = render_downsampled(pose, intr, scene, factor, config.
                render_settings())
        else:
            frame = render_frame(pose, intr, scene, config.render_settings())
        path = os.path.join(config.output.directory, f'render_{index:04d}.ppm'
            )
        write_frame(frame, path)
        log_experiment_complete(True, 'render', time.time() - start)
        return {'success': True, 'path': path, 'depth_path': os.path.
            splitext(path)[0] + '.depth', 'pixels': intr.n_pixels,
            'valid_depth': int((frame.depth < float('inf')).sum())}
    except StreamForgeError as e:
        log_experiment_complete(False, 'render', error=str(e))
        return {'success': False, 'module': e.module, 'error': str(e)}
