from contextlib import contextmanager
from typing import Any, Dict, Iterable, List, Optional, Sequence
import math
from rich import box
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return 'INF'
        if math.isnan(value):
            return '-'
        return f'{value:.4g}'
    return str(value)


class UIManager:
    """Console output for the CLI: status spinner, tables and summary panels."""

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()
        self._spinner_active = False

    @contextmanager
    def show_spinner(self, message: str):
        """
        Context manager that displays a spinner with the given message.
        Nested spinners reuse the outer one.

        Usage:
            with ui_manager.show_spinner("Rendering..."):
                # do work here
        """
        if self._spinner_active:
            yield
            return
        self._spinner_active = True
        try:
            with self.console.status(f'[bold yellow]{escape(message)}[/]'):
                yield
        finally:
            self._spinner_active = False

    def show_success(self, message: str) -> None:
        self.console.print(f'[green]✅ {escape(str(message))}[/]')

    def show_info(self, message: str) -> None:
        self.console.print(f'[cyan]{escape(str(message))}[/]')

    def show_error(self, message: str) -> None:
        """
        Displays an error message, escaping any markup in the message.
        """
        safe_message = escape(str(message))
        self.console.print(f'[red]❌ {safe_message}[/]')

    def show_table(self, title: str, rows: Sequence[Dict[str, Any]],
        columns: Optional[List[str]] = None, limit: Optional[int] = None
        ) -> None:
        if not rows:
            self.console.print(f'[dim]{escape(title)}: no rows.[/]')
            return
        columns = columns or list(rows[0].keys())
        table = Table(title=f'[bold magenta]{escape(title)}[/]', box=box.
            ROUNDED, show_lines=False)
        for column in columns:
            table.add_column(column, justify='right' if column != 'kind' else
                'left')
        shown = rows if limit is None else rows[:limit]
        for row in shown:
            table.add_row(*[_fmt(row.get(column, '')) for column in columns])
        self.console.print(table)
        if limit is not None and len(rows) > limit:
            self.console.print(f'[dim]... {len(rows) - limit} more rows[/]')

    def show_key_values(self, title: str, values: Dict[str, Any],
        border_style: str = 'cyan') -> None:
        lines = [f'[bold]{escape(key)}:[/] {escape(_fmt(value))}' for key,
            value in values.items()]
        self.console.print(Panel('\n'.join(lines), title=
            f'[bold {border_style}]{escape(title)}[/]', border_style=
            border_style, expand=False, box=box.ROUNDED))

    def show_sim_report(self, row: Dict[str, Any]) -> None:
        """Summary block of one SimReport row."""
        keys = ('mode', 'kind', 'samples', 'cycles_index', 'cycles_gather',
            'cycles_compute', 'total_cycles', 'stall_cycles',
            'conflict_rate', 'dram_streaming_bytes', 'dram_random_bytes',
            'energy_dram', 'energy_sram', 'energy', 'blocks_loaded',
            'rit_batches')
        self.show_key_values('Simulation', {key: row[key] for key in keys if
            key in row}, border_style='green')

    def show_files(self, paths: Iterable[str]) -> None:
        paths = list(paths)
        if not paths:
            return
        self.console.print(f'[dim]Wrote {len(paths)} files:[/]')
        for path in paths[:8]:
            self.console.print(f'  [yellow]{escape(path)}[/]')
        if len(paths) > 8:
            self.console.print(f'  [dim]... {len(paths) - 8} more[/]')
