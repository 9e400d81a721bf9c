"""Logging utilities using rich"""

from typing import TypeGuard

import numpy as np
from rich.console import Console
from rich.markup import escape

console = Console()
console_err = Console(stderr=True)


class Logger:
    """Simple logger with colored output"""

    def __init__(self) -> None:
        self.quiet = False

    def info(self, msg: str):
        if not self.quiet:
            console_err.print(f"[blue][INFO][/blue] {escape(msg)}")

    def success(self, msg: str):
        if not self.quiet:
            console_err.print(f"[green][SUCCESS][/green] {escape(msg)}")

    def warn(self, msg: str):
        console_err.print(f"[yellow][WARN][/yellow] {escape(msg)}")

    def error(self, msg: str):
        console_err.print(f"[red][ERROR][/red] {escape(msg)}")

    def stream(self, msg: str):
        """Write a payload line to stdout without markup or highlighting."""
        console.print(msg, highlight=False, markup=False, soft_wrap=True)


# Global logger instance
logger = Logger()


def is_finite_array(value: object) -> TypeGuard[np.ndarray]:
    """Type guard that checks if value is a numpy array with finite entries.

    Args:
        value: The value to check

    Returns:
        True if value is an ndarray and no entry is nan or inf

    Usage:
        if not is_finite_array(jac):
            raise FrameError("jacobian is not finite")
        # jac is now typed as np.ndarray
    """
    return isinstance(value, np.ndarray) and bool(np.all(np.isfinite(value)))


def rng_for(seed: int, *salt: int) -> np.random.Generator:
    """Deterministic generator for a seed and an optional salt sequence."""
    return np.random.default_rng([seed, *salt])
