"""Batch figure rendering for anofdm experiment CSVs."""

from .render import FigureJob, render
from .schema import SchemaMismatchError, load_metadata, load_results

__version__ = "0.1.0"
