"""Figure rendering for fedsparse CSV artifacts."""

from .render import FigureSpec, SchemaError, plot_convergence, plot_pareto, render

__version__ = "0.1.0"
