#!/usr/bin/env python3
"""
StreamForge - NeRF rendering, sparse warping and accelerator memory
simulation from the command line.

Usage:
    streamforge.py <command> [--config FILE] [flags]
"""
from typing import Any, Callable, Dict, List, Optional
import argparse
import logging
import sys
from commands.compare_handler import handle_compare_command
from commands.render_handler import handle_render_command
from commands.simulate_handler import handle_simulate_command
from commands.stream_handler import handle_stream_command
from commands.sweep_handler import DEFAULT_PHIS, handle_sweep_command
from commands.warp_handler import handle_warp_command
from config_manager import ConfigManager
from ui_manager import UIManager
from utils.errors import StreamForgeError
from utils.logger import configure_logging
logger = logging.getLogger('streamforge')

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_MODULE_ERROR = 2

ui_manager = UIManager()


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', help='INI or JSON experiment config.')
    parser.add_argument('--kind', choices=['structured', 'unstructured'])
    parser.add_argument('--seed', type=int)
    parser.add_argument('--window', type=int, help='Warping window N.')
    parser.add_argument('--phi', type=float, help='Angle threshold in degrees.')
    parser.add_argument('--mode', choices=['local', 'remote'])
    parser.add_argument('--pipeline', choices=['baseline_pixel_centric',
        'fully_streaming', 'potamoi'])
    parser.add_argument('--frames', type=int)
    parser.add_argument('--width', type=int)
    parser.add_argument('--height', type=int)
    parser.add_argument('--samples', type=int)
    parser.add_argument('--output', help='Output directory.')
    parser.add_argument('-v', '--verbose', action='store_true')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='streamforge', description=
        'StreamForge - NeRF rendering, warping and memory simulation')
    sub = parser.add_subparsers(dest='command', required=True)
    render = sub.add_parser('render', help='Render one frame (.ppm + .depth).')
    _add_config_flags(render)
    render.add_argument('--frame-index', type=int, default=0)
    render.add_argument('--downsample', type=int, default=1)
    warp = sub.add_parser('warp-run', help='Warping experiment over a trajectory.')
    _add_config_flags(warp)
    stream = sub.add_parser('stream-run', help=
        'Streaming render of one frame, checked against the full render.')
    _add_config_flags(stream)
    stream.add_argument('--frame-index', type=int, default=0)
    simulate = sub.add_parser('simulate', help='Cycle/energy report of one frame.')
    _add_config_flags(simulate)
    simulate.add_argument('--frame-index', type=int, default=0)
    simulate.add_argument('--all-modes', action='store_true')
    sweep = sub.add_parser('sweep', help='Experiments over angle thresholds.')
    _add_config_flags(sweep)
    sweep.add_argument('--phis', default=DEFAULT_PHIS, help=
        'Comma-separated thresholds in degrees.')
    compare = sub.add_parser('compare', help='B/A ratios of two configs.')
    _add_config_flags(compare)
    compare.add_argument('--config-b', required=True)
    init = sub.add_parser('init-config', help='Write the default config.')
    _add_config_flags(init)
    init.add_argument('path')
    return parser


def _show_render(result: Dict[str, Any]) -> None:
    ui_manager.show_success(f"Rendered {result['pixels']} pixels")
    ui_manager.show_info(f"{result['valid_depth']} pixels hit the scene")
    ui_manager.show_files([result['path'], result['depth_path']])


def _show_warp(result: Dict[str, Any]) -> None:
    ui_manager.show_table('Frames', result['rows'], ['frame_index', 'kind',
        'psnr', 'warped_fraction', 'disoccluded_fraction', 'cycles',
        'energy'], limit=12)
    ui_manager.show_key_values('Summary', result['summary'])
    ui_manager.show_files(result['files'])


def _show_stream(result: Dict[str, Any]) -> None:
    ui_manager.show_key_values('Streaming render', {key: result[key] for
        key in ('max_error', 'matches_oracle', 'blocks_loaded',
        'blocks_skipped', 'streaming_fraction')})
    ui_manager.show_files(result['files'])


def _show_simulate(result: Dict[str, Any]) -> None:
    for row in result['reports']:
        ui_manager.show_sim_report(row)
    ui_manager.show_files(result['files'])


def _show_rows(title: str) -> Callable[[Dict[str, Any]], None]:

    def show(result: Dict[str, Any]) -> None:
        ui_manager.show_table(title, result['rows'])
        ui_manager.show_files(result['files'])
    return show


def handle_init_config_command(command_data: Dict[str, Any]) -> Dict[str, Any
    ]:
    try:
        manager = ConfigManager(command_data.get('config'))
        manager.apply_overrides(command_data)
        manager.save(command_data['path'])
        return {'success': True, 'files': [command_data['path']]}
    except StreamForgeError as e:
        return {'success': False, 'module': e.module, 'error': str(e)}


COMMANDS = {'render': (handle_render_command, _show_render), 'warp-run': (
    handle_warp_command, _show_warp), 'stream-run': (handle_stream_command,
    _show_stream), 'simulate': (handle_simulate_command, _show_simulate),
    'sweep': (handle_sweep_command, _show_rows('Sweep')), 'compare': (
    handle_compare_command, _show_rows('Comparison')), 'init-config': (
    handle_init_config_command, lambda result: ui_manager.show_files(result
    ['files']))}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(logging.DEBUG if args.verbose else logging.WARNING)
    handler, show = COMMANDS[args.command]
    command_data = vars(args)
    try:
        with ui_manager.show_spinner(f'Running {args.command}...'):
            result = handler(command_data)
    except StreamForgeError as e:
        result = {'success': False, 'module': e.module, 'error': str(e)}
    except Exception as e:
        logger.exception(f'Unexpected failure in {args.command}')
        ui_manager.show_error(f'Unexpected error: {e}')
        return EXIT_UNEXPECTED
    if not result.get('success'):
        message = f"[{result.get('module', 'harness')}] {result.get('error')}"
        logger.error(message)
        ui_manager.show_error(message)
        return EXIT_MODULE_ERROR
    show(result)
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
