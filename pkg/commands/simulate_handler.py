"""
Simulate Handler - cycle and energy report of one frame under a pipeline mode.
"""
from typing import Any, Dict
import os
from config_manager import config_from_command
from core.memsim import PIPELINE_MODES, simulate_pipeline
from utils.errors import StreamForgeError
from utils.io_helpers import write_csv


def handle_simulate_command(command_data: Dict[str, Any]) -> Dict[str, Any]:
    """
    Simulates the configured pipeline mode, or every mode when
    ``all_modes`` is set, and writes ``sim_report.csv``.
    """
    try:
        config = config_from_command(command_data)
        scene = config.build_scene()
        trajectory = config.build_trajectory()
        index = int(command_data.get('frame_index') or 0)
        pose = trajectory.poses[min(max(index, 0), len(trajectory) - 1)]
        intr = config.intrinsics()
        cfg = config.hw_config()
        modes = PIPELINE_MODES if command_data.get('all_modes') else (config
            .pipeline.mode,)
        rows = [simulate_pipeline(scene, pose, intr, mode, cfg, config.
            render_settings()).as_row() for mode in modes]
        path = os.path.join(config.output.directory, 'sim_report.csv')
        write_csv(path, rows)
        return {'success': True, 'reports': rows, 'files': [path]}
    except StreamForgeError as e:
        return {'success': False, 'module': e.module, 'error': str(e)}
