"""Figure construction and deterministic rendering.

Four figure kinds cover the harness outputs:

- ``sweep_panel``: one panel per coordinate from a sweep CSV, one line per
  fitted exponent with the exponent in the legend. A sweep whose axis is
  the exponent itself collapses to a single curve per panel, drawn over
  the exponent.
- ``heatmap``: the rmse-minimizing exponent over the (alpha, tau) grid of
  a phase CSV for one coordinate, colored on a fixed [-1, 1] scale with
  each cell annotated by its value.
- ``cv_curve``: the cross-validation error curve over the exponent grid
  from a cv report JSON, with the selected exponent marked.
- ``histogram_overlay``: observed outcomes from a dataset CSV binned
  against a seeded predictive simulation around the fit report's means
  (see the predictive module for the documented draw).

Rendering never computes statistics — every plotted number comes straight
from the input files — and is byte-deterministic for fixed inputs: the
object-oriented Agg/SVG backends run under a pinned hash salt, text stays
text instead of glyph outlines, and no timestamps are embedded.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .exceptions import FigureSpecError, RenderError, SchemaError
from .predictive import predictive_sample
from .readers import (
    read_cv_json,
    read_dataset_csv,
    read_fit_json,
    read_phase_csv,
    read_sweep_csv,
)

logger = logging.getLogger(__name__)

FIGURE_KINDS = ("sweep_panel", "heatmap", "cv_curve", "histogram_overlay")
STATISTIC_COLUMNS = ("bias", "std", "rmse")
IMAGE_FORMATS = ("svg", "png")

_INPUT_COUNTS = {"sweep_panel": 1, "heatmap": 1, "cv_curve": 1,
                 "histogram_overlay": 2}

# One salt for every render; together with text-as-text and a suppressed
# date this makes the SVG byte stream a pure function of the figure.
_RC_DETERMINISTIC = {"svg.hashsalt": "genpml-plots", "svg.fonttype": "none"}


@dataclass(frozen=True)
class FigureSpec:
    """What to draw, from which files, to which image.

    ``inputs`` is one path except for ``histogram_overlay``, which takes
    the dataset CSV first and the fit report JSON second. ``format`` may
    be left None when the output path ends in .svg or .png. ``value``
    selects the statistic column a sweep panel plots; ``coord`` selects
    the coordinate a heatmap shows; ``alpha``/``seed``/``bins`` control
    the histogram overlay's predictive draw and binning.
    """

    kind: str
    inputs: tuple
    out: str
    format: str | None = None
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    legend_title: str = ""
    value: str = "rmse"
    coord: int = 0
    outcome: str = "y"
    alpha: float = 1.0
    seed: int = 0
    bins: int = 40

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise FigureSpecError(
                f"unknown figure kind {self.kind!r}; expected one of "
                f"{list(FIGURE_KINDS)}")
        paths = ((self.inputs,) if isinstance(self.inputs, (str, Path))
                 else tuple(self.inputs))
        object.__setattr__(self, "inputs", tuple(str(p) for p in paths))
        want = _INPUT_COUNTS[self.kind]
        if len(self.inputs) != want:
            detail = ("the dataset CSV then the fit report JSON"
                      if self.kind == "histogram_overlay"
                      else "one input file")
            raise FigureSpecError(
                f"{self.kind} takes {want} input path(s) ({detail}); "
                f"got {len(self.inputs)}")
        object.__setattr__(self, "out", str(self.out))
        fmt = self.format
        if fmt is None:
            fmt = Path(self.out).suffix.lower().lstrip(".")
            if fmt not in IMAGE_FORMATS:
                raise FigureSpecError(
                    f"cannot infer an image format from {self.out!r}; "
                    f"pass format= one of {list(IMAGE_FORMATS)}")
            object.__setattr__(self, "format", fmt)
        elif fmt not in IMAGE_FORMATS:
            raise FigureSpecError(
                f"unsupported image format {fmt!r}; expected one of "
                f"{list(IMAGE_FORMATS)}")
        if self.value not in STATISTIC_COLUMNS:
            raise FigureSpecError(
                f"value must be one of {list(STATISTIC_COLUMNS)}, "
                f"got {self.value!r}")
        if self.coord < 0:
            raise FigureSpecError(f"coord must be >= 0, got {self.coord}")
        if self.bins < 1:
            raise FigureSpecError(f"bins must be >= 1, got {self.bins}")
        if not math.isfinite(self.alpha):
            raise FigureSpecError(f"alpha must be finite, got {self.alpha}")


def _sweep_figure(spec: FigureSpec) -> Figure:
    rows = read_sweep_csv(spec.inputs[0])
    axis_name = rows[0]["cell_param_name"]
    coords = sorted({r["coord"] for r in rows})
    kappas = sorted({r["kappa"] for r in rows})
    fig = Figure(figsize=(4.6 * len(coords), 3.6), layout="constrained")
    axes = fig.subplots(1, len(coords), squeeze=False)[0]
    single_curve = axis_name == "kappa"
    for ax, coord in zip(axes, coords):
        sub = [r for r in rows if r["coord"] == coord]
        if single_curve:
            pts = sorted((r["kappa"], r[spec.value]) for r in sub)
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                    label=spec.value)
        else:
            for kappa in kappas:
                pts = sorted((r["cell_param_value"], r[spec.value])
                             for r in sub if r["kappa"] == kappa)
                ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                        label=f"kappa = {kappa:g}")
        ax.set_title(f"coordinate {coord}")
        ax.set_xlabel(spec.xlabel or ("kappa" if single_curve else axis_name))
        ax.set_ylabel(spec.ylabel or spec.value)
        ax.grid(True, alpha=0.3)
    axes[0].legend(title=spec.legend_title or None)
    if spec.title:
        fig.suptitle(spec.title)
    return fig


def _heatmap_figure(spec: FigureSpec) -> Figure:
    path = spec.inputs[0]
    rows = [r for r in read_phase_csv(path) if r["coord"] == spec.coord]
    if not rows:
        raise SchemaError(f"{path}: no rows for coordinate {spec.coord}",
                          column="coord")
    alphas = sorted({r["alpha"] for r in rows})
    taus = sorted({r["tau"] for r in rows})
    grid = np.full((len(alphas), len(taus)), np.nan)
    seen = set()
    for r in rows:
        i = alphas.index(r["alpha"])
        j = taus.index(r["tau"])
        if (i, j) in seen:
            raise SchemaError(
                f"{path}: duplicate cell alpha={r['alpha']:g}, "
                f"tau={r['tau']:g} at coordinate {spec.coord}")
        seen.add((i, j))
        grid[i, j] = r["optimal_kappa"]
    for i, a in enumerate(alphas):
        for j, t in enumerate(taus):
            if (i, j) not in seen:
                raise SchemaError(
                    f"{path}: no row for cell alpha={a:g}, tau={t:g} at "
                    f"coordinate {spec.coord}")
            if np.isnan(grid[i, j]):
                raise RenderError(
                    f"{path}: cell alpha={a:g}, tau={t:g} has no finite "
                    "optimal exponent (nothing converged there?)")
    fig = Figure(figsize=(6.4, 4.8), layout="constrained")
    ax = fig.subplots()
    image = ax.imshow(grid, vmin=-1.0, vmax=1.0, cmap="RdBu_r",
                      origin="lower", aspect="auto")
    ax.set_xticks(range(len(taus)), [format(t, "g") for t in taus])
    ax.set_yticks(range(len(alphas)), [format(a, "g") for a in alphas])
    for i in range(len(alphas)):
        for j in range(len(taus)):
            value = grid[i, j]
            ax.text(j, i, format(value, "g"), ha="center", va="center",
                    fontsize=8,
                    color="white" if abs(value) > 0.6 else "black")
    fig.colorbar(image, ax=ax,
                 label=spec.legend_title or "optimal kappa")
    ax.set_xlabel(spec.xlabel or "tau")
    ax.set_ylabel(spec.ylabel or "alpha")
    if spec.title:
        ax.set_title(spec.title)
    return fig


def _cv_figure(spec: FigureSpec) -> Figure:
    doc = read_cv_json(spec.inputs[0])
    fig = Figure(figsize=(6.0, 4.0), layout="constrained")
    ax = fig.subplots()
    ax.plot(doc["kappa_grid"], doc["e_curve"], marker="o",
            label="cv error")
    ax.axvline(doc["selected_kappa"], color="C3", linestyle="--",
               label=f"selected = {doc['selected_kappa']:g}")
    ax.set_xlabel(spec.xlabel or "kappa")
    ax.set_ylabel(spec.ylabel or "out-of-sample mse")
    ax.grid(True, alpha=0.3)
    ax.legend(title=spec.legend_title or None)
    if spec.title:
        ax.set_title(spec.title)
    return fig


def _linear_predictor(fit: dict, X: np.ndarray, path) -> np.ndarray:
    transform = fit.get("transform")
    if transform is not None:
        theta = np.asarray(transform["theta_original"])
        intercept = transform["add_intercept"]
        expected = X.shape[1] + (1 if intercept else 0)
        if theta.shape[0] != expected:
            raise SchemaError(
                f"{path}: transform carries {theta.shape[0]} original-scale "
                f"coefficients but the dataset has {X.shape[1]} covariate "
                "columns", column="theta_original")
        eta = transform["offset"] + (
            theta[0] + X @ theta[1:] if intercept else X @ theta)
        return eta
    theta = np.asarray(fit["theta_hat"])
    if theta.shape[0] != X.shape[1]:
        raise SchemaError(
            f"{path}: 'theta_hat' has {theta.shape[0]} coefficients but the "
            f"dataset has {X.shape[1]} covariate columns",
            column="theta_hat")
    return X @ theta


def _histogram_figure(spec: FigureSpec) -> Figure:
    y, X, _ = read_dataset_csv(spec.inputs[0], spec.outcome)
    fit = read_fit_json(spec.inputs[1])
    eta = _linear_predictor(fit, X, spec.inputs[1])
    simulated = predictive_sample(np.exp(eta), spec.alpha, spec.seed)
    if not np.all(np.isfinite(simulated)):
        raise RenderError(
            "simulated outcomes are not finite; the fitted means span "
            f"[{np.exp(eta).min():.3g}, {np.exp(eta).max():.3g}]")
    edges = np.histogram_bin_edges(np.concatenate([y, simulated]),
                                   bins=spec.bins)
    fig = Figure(figsize=(6.0, 4.0), layout="constrained")
    ax = fig.subplots()
    ax.hist(y, bins=edges, density=True, alpha=0.55, label="observed")
    ax.hist(simulated, bins=edges, density=True, histtype="step",
            linewidth=1.6,
            label=f"simulated (alpha = {spec.alpha:g}, seed = {spec.seed})")
    ax.set_xlabel(spec.xlabel or spec.outcome)
    ax.set_ylabel(spec.ylabel or "density")
    ax.legend(title=spec.legend_title or None)
    if spec.title:
        ax.set_title(spec.title)
    return fig


_BUILDERS = {"sweep_panel": _sweep_figure, "heatmap": _heatmap_figure,
             "cv_curve": _cv_figure, "histogram_overlay": _histogram_figure}


def build_figure(spec: FigureSpec) -> Figure:
    """Read the inputs and assemble the figure, writing nothing."""
    return _BUILDERS[spec.kind](spec)


def render(spec: FigureSpec) -> Path:
    """Build and save the figure; returns the output path.

    All input reading and validation happens before the output file is
    touched, so a schema error never leaves a partial image behind.
    """
    fig = build_figure(spec)
    metadata = {"Date": None} if spec.format == "svg" else None
    with matplotlib.rc_context(_RC_DETERMINISTIC):
        fig.savefig(spec.out, format=spec.format, metadata=metadata, dpi=150)
    logger.info("rendered %s from %s -> %s", spec.kind,
                ", ".join(spec.inputs), spec.out)
    return Path(spec.out)
