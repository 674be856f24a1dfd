"""Figure renderers for seqdetect study CSVs."""

from .data import Row, SchemaError, load_rows, ratio_series, series_by_procedure
from .render import KINDS, FigureSpec, reference_a, render

__version__ = "0.1.0"
