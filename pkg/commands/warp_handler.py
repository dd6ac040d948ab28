"""
Warp Handler - runs a full warping experiment over the configured trajectory.
"""
from typing import Any, Dict
from config_manager import config_from_command
from experiment_manager import run_experiment
from utils.errors import StreamForgeError


def handle_warp_command(command_data: Dict[str, Any]) -> Dict[str, Any]:
    try:
        config = config_from_command(command_data)
        experiment = run_experiment(config)
        return {'success': True, 'summary': experiment.summary, 'rows': [
            row.as_row() for row in experiment.rows], 'files': experiment.files}
    except StreamForgeError as e:
        return {'success': False, 'module': e.module, 'error': str(e)}
