"""Shared utilities: console, logging setup, bit helpers and seeded RNGs."""

import logging
from collections.abc import Iterator

import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from katlcl.src.config import DEFAULT_SEED, LOG_LEVEL

# Shared console for all output
console = Console()
err_console = Console(stderr=True)

_logging_ready = False


def setup_logging(level: str | int = LOG_LEVEL) -> None:
    """Configure root logging once, routed through rich on stderr."""
    global _logging_ready  # noqa: PLW0603
    if _logging_ready:
        logging.getLogger().setLevel(level)
        return
    logging.basicConfig(
        level=level,
        format="%(name)s: %(message)s",
        datefmt="%H:%M:%S",
        handlers=[RichHandler(console=err_console, show_path=False, rich_tracebacks=False)],
    )
    _logging_ready = True


def make_rng(seed: int | None = None) -> np.random.Generator:
    """Create a seeded generator; None means the configured default seed."""
    return np.random.default_rng(DEFAULT_SEED if seed is None else seed)


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of set bits in ascending order."""
    index = 0
    while mask:
        if mask & 1:
            yield index
        mask >>= 1
        index += 1


def full_mask(width: int) -> int:
    """Mask with the low ``width`` bits set."""
    return (1 << width) - 1
