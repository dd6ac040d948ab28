"""
Sweep Handler - warping experiments over a list of angle thresholds.
"""
from typing import Any, Dict, List
import os
from config_manager import config_from_command
from experiment_manager import sweep
from utils.errors import ConfigError, StreamForgeError

DEFAULT_PHIS = '1,2,4,8'


def parse_phis(text: str) -> List[float]:
    try:
        phis = [float(token) for token in text.split(',') if token.strip()]
    except ValueError as e:
        raise ConfigError(f'Bad --phis value: {text!r}') from e
    if not phis:
        raise ConfigError('--phis needs at least one threshold')
    if any(phi < 0 for phi in phis):
        raise ConfigError('Angle thresholds must be >= 0')
    return phis


def handle_sweep_command(command_data: Dict[str, Any]) -> Dict[str, Any]:
    try:
        config = config_from_command(command_data)
        phis = parse_phis(command_data.get('phis') or DEFAULT_PHIS)
        rows = sweep(config, phis)
        return {'success': True, 'rows': rows, 'files': [os.path.join(
            config.output.directory, 'sweep.csv')]}
    except StreamForgeError as e:
        return {'success': False, 'module': e.module, 'error': str(e)}
