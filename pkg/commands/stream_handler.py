"""
Stream Handler - renders one frame with the streaming dataflow and checks it
against the pixel-centric render.

Writes the streamed frame, its depth sidecar and ``trace.csv``.
"""
from typing import Any, Dict
import logging
import os
import numpy as np
from config_manager import config_from_command
from core.memsim import classify_dram
from core.nerf import render_frame
from core.streaming import run_stream
from utils.errors import StreamForgeError
from utils.io_helpers import write_frame
logger = logging.getLogger(__name__)

ORACLE_TOLERANCE = 0.0001


def handle_stream_command(command_data: Dict[str, Any]) -> Dict[str, Any]:
    """
    Returns:
        Dictionary with ``success``, ``max_error`` against the oracle,
        ``matches_oracle``, the DRAM streaming fraction and written paths.
    """
    try:
        config = config_from_command(command_data)
        scene = config.build_scene()
        trajectory = config.build_trajectory()
        index = int(command_data.get('frame_index') or 0)
        pose = trajectory.poses[min(max(index, 0), len(trajectory) - 1)]
        intr = config.intrinsics()
        settings = config.render_settings()
        hw = config.hw_config()
        result = run_stream(pose, intr, scene, capacity=hw.mft_bytes,
            settings=settings)
        oracle = render_frame(pose, intr, scene, settings)
        max_error = float(np.max(np.abs(result.frame.color - oracle.color)))
        out = config.output.directory
        frame_path = os.path.join(out, 'stream.ppm')
        trace_path = os.path.join(out, 'trace.csv')
        write_frame(result.frame, frame_path)
        result.trace.write_csv(trace_path)
        dram = classify_dram(result.trace, hw.burst_bytes)
        return {'success': True, 'max_error': max_error, 'matches_oracle':
            max_error <= ORACLE_TOLERANCE, 'blocks_loaded': result.stats.
            blocks_loaded, 'blocks_skipped': result.stats.blocks_skipped,
            'streaming_fraction': dram.streaming_fraction, 'files': [
            frame_path, trace_path]}
    except StreamForgeError as e:
        return {'success': False, 'module': e.module, 'error': str(e)}
