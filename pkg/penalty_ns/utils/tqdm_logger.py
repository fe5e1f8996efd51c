"""Logging handler that writes through tqdm so progress bars stay intact."""

from __future__ import annotations

import logging

import tqdm.auto

# Handlers added by setup_logging, replaced on the next call
_INSTALLED: list = []


class TqdmLoggingHandler(logging.Handler):
    """Emit records with tqdm.write instead of printing to the stream."""

    def __init__(self, level=logging.INFO):
        """Initialize TqdmLoggingHandler."""
        super().__init__(level)

    def emit(self, record):
        """Emit a record."""
        try:
            msg = self.format(record)
            tqdm.auto.tqdm.write(msg)
            self.flush()
        except (KeyboardInterrupt, SystemExit):
            raise
        except Exception:
            self.handleError(record)


def setup_logging(
    verbosity: int = 1, log_file: str | None = None
) -> logging.Logger:
    """Configure the root logger for a run.

    Args:
        verbosity: 0, 1 or 2 for ERROR, INFO or DEBUG.
        log_file: If given, records are also appended to this file.

    Returns:
        The root logger.
    """
    levels = {0: logging.ERROR, 1: logging.INFO, 2: logging.DEBUG}
    if verbosity not in levels:
        raise ValueError(f"verbosity must be 0, 1 or 2, but it is {verbosity}!")
    formatter = logging.Formatter(
        "[%(asctime)s - %(name)s - %(levelname)s]: %(message)s"
    )
    root = logging.getLogger()
    while _INSTALLED:
        old = _INSTALLED.pop()
        root.removeHandler(old)
        old.close()
    root.setLevel(levels[verbosity])
    handler = TqdmLoggingHandler(levels[verbosity])
    handler.setFormatter(formatter)
    root.addHandler(handler)
    _INSTALLED.append(handler)
    if log_file is not None:
        file_handler = logging.FileHandler(log_file, mode="a")
        file_handler.setFormatter(formatter)
        file_handler.setLevel(levels[verbosity])
        root.addHandler(file_handler)
        _INSTALLED.append(file_handler)
    return root
