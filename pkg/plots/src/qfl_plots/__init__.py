"""Render training-curve figures from qflsim metrics.csv files."""

from .metrics_io import MetricsSchemaError, RunSeries, read_metrics
from .render import FigureRequest, render

__version__ = "0.1.0"
