"""Figure rendering for genpml experiment outputs.

This package talks to the estimation toolkit only through its published
file formats — the sweep/phase CSV schemas and the fit/cv JSON reports —
and renders them to SVG or PNG. It never imports the estimator and never
recomputes a statistic; see the figures module for the four figure kinds.
"""

from .exceptions import FigureSpecError, PlotsError, RenderError, SchemaError
from .figures import (
    FIGURE_KINDS,
    IMAGE_FORMATS,
    STATISTIC_COLUMNS,
    FigureSpec,
    build_figure,
    render,
)
from .predictive import predictive_sample
from .readers import (
    PHASE_COLUMNS,
    SWEEP_COLUMNS,
    read_cv_json,
    read_dataset_csv,
    read_fit_json,
    read_phase_csv,
    read_sweep_csv,
)

__version__ = "0.1.0"

__all__ = [
    "FIGURE_KINDS",
    "IMAGE_FORMATS",
    "PHASE_COLUMNS",
    "STATISTIC_COLUMNS",
    "SWEEP_COLUMNS",
    "FigureSpec",
    "FigureSpecError",
    "PlotsError",
    "RenderError",
    "SchemaError",
    "build_figure",
    "predictive_sample",
    "read_cv_json",
    "read_dataset_csv",
    "read_fit_json",
    "read_phase_csv",
    "read_sweep_csv",
    "render",
]
