from typing import Iterable, TypeVar

from rich.columns import Columns
from rich.console import Console
from rich.markdown import Markdown
from rich.padding import Padding
from rich.panel import Panel
from rich.progress import track as rich_track
from rich.text import Text

console = Console()
_quiet = False

T = TypeVar("T")


def set_quiet(quiet: bool) -> None:
    """Silences every console helper below (the CLI --quiet flag)."""
    global _quiet
    _quiet = bool(quiet)


def print_markdown(text) -> None:
    """Prints a rich info message. Support Markdown syntax."""
    if _quiet:
        return
    md = Padding(Markdown(text), 2)
    console.print(md)


def print_step(text) -> None:
    """Prints a rich info message."""
    if _quiet:
        return
    panel = Panel(Text(text, justify="left"))
    console.print(panel)


def print_table(items) -> None:
    """Prints items in a table."""
    if _quiet:
        return
    console.print(Columns([Panel(f"[yellow]{item}", expand=True) for item in items]))


def print_substep(text, style="") -> None:
    """Prints a rich colored info message without the panelling."""
    if _quiet:
        return
    console.print(text, style=style)


def track(sequence: Iterable[T], description: str = "Working...", total=None) -> Iterable[T]:
    if _quiet:
        return sequence
    return rich_track(sequence, description=description, total=total, console=console)
