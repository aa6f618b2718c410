"""Figure rendering for qsbm experiment outputs.

Reads only the CSV/JSON files a run emits; never recomputes physics.
"""

from .figures import FIGURE_KINDS, FigureSpec, render
from .io import SchemaError

__version__ = "0.1.0"
