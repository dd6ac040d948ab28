"""
Compare Handler - B/A ratios between two configs over one scene and trajectory.
"""
from typing import Any, Dict
import os
from config_manager import ConfigManager, config_from_command
from experiment_manager import compare_modes
from utils.errors import ConfigError, StreamForgeError


def handle_compare_command(command_data: Dict[str, Any]) -> Dict[str, Any]:
    """
    ``config`` (plus flag overrides) is run A, ``config_b`` is run B.
    The comparison is written to A's output directory.
    """
    try:
        if not command_data.get('config_b'):
            raise ConfigError('compare needs --config-b')
        config_a = config_from_command(command_data)
        config_b = ConfigManager(command_data['config_b']).validated()
        rows = compare_modes(config_a, config_b)
        return {'success': True, 'rows': rows, 'files': [os.path.join(
            config_a.output.directory, 'comparison.csv')]}
    except StreamForgeError as e:
        return {'success': False, 'module': e.module, 'error': str(e)}
