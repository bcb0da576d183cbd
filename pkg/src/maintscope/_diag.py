"""Line-oriented diagnostics written to standard error."""

import logging
import sys

logger = logging.getLogger("maintscope")


def warn(repo: str, commit: str, message: str) -> str:
    """Emit ``WARN <repo> <commit> <message>`` on stderr and return the line."""
    line = f"WARN {repo or '-'} {commit or '-'} {' '.join(str(message).split())}"
    print(line, file=sys.stderr)
    logger.debug(line)
    return line
