"""
Logging configuration for the simulator.

Verbosity is read from the FEDHAP_LOG environment variable
(error | info | debug). Lines carry a wall-clock time and the level,
for example "[15:14:47] INFO Round 3/30 ...".
"""

import logging
import os
import sys
from typing import Optional

ENV_VAR = 'FEDHAP_LOG'

LEVELS = {
    'error': logging.ERROR,
    'info': logging.INFO,
    'debug': logging.DEBUG,
}

LOG_FORMAT = '[%(asctime)s] %(levelname)s %(message)s'
DATE_FORMAT = '%H:%M:%S'


def resolve_level(name: Optional[str] = None) -> int:
    """
    Map a level name (or the FEDHAP_LOG value) to a logging level.

    Args:
        name: Level name; None reads the environment variable

    Returns:
        logging level constant, INFO for unknown names
    """
    if name is None:
        name = os.environ.get(ENV_VAR, 'info')
    level = LEVELS.get(name.strip().lower())
    if level is None:
        logging.getLogger(__name__).warning(
            "Unknown %s value %r, using 'info' (valid: %s)", ENV_VAR, name, ', '.join(LEVELS))
        return logging.INFO
    return level


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Configure the 'src' logger hierarchy once.

    Args:
        level: Level name overriding FEDHAP_LOG

    Returns:
        The configured package logger
    """
    logger = logging.getLogger('src')
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(handler)
        logger.propagate = False
    logger.setLevel(resolve_level(level))
    return logger
