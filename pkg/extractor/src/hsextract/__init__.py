"""Per-layer transformer hidden-state extraction to clustering-ready files."""

from .errors import ExtractionError
from .extract import ExtractionResult, extract
from .job import AGGREGATIONS, SPAN_CHOICES, ExtractionJob

__all__ = [
    "AGGREGATIONS",
    "SPAN_CHOICES",
    "ExtractionError",
    "ExtractionJob",
    "ExtractionResult",
    "extract",
]

__version__ = "0.1.0"
