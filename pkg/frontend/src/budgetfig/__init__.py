"""budgetfig: batch renderer for budgetlab trajectory/bound CSV files."""

from .render import PlotSpec, load_bounds_csv, load_trajectory_csv, render, render_figure

__version__ = "0.1.0"

__all__ = ["PlotSpec", "load_bounds_csv", "load_trajectory_csv", "render",
           "render_figure", "__version__"]
