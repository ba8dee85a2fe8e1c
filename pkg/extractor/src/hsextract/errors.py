"""Error type shared across the package.

The CLI maps ExtractionError to exit code 2 (bad input or contract
violation); anything else escapes as a crash.
"""


class ExtractionError(Exception):
    """Malformed input, unloadable checkpoint, or out-of-range parameter."""
