"""Figure rendering for nlisim result tables.

Consumes the CSV/JSON tables written by the `nlisim` command line tool
(recognized by their ``# nlisim-table`` metadata line) and renders
deterministic publication-style PNG/SVG figures.  This package never runs
the simulation itself; it is pure post-processing of persisted tables.
"""

from .io import Table, read_table
from .figures import FigureSpec, KINDS, render

__all__ = ["Table", "read_table", "FigureSpec", "KINDS", "render"]

__version__ = "0.1.0"
