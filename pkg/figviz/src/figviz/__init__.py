"""Static figure rendering from manifactor run directories.

The renderer is read-only over the pipeline's CSV/JSON outputs; it never
imports the pipeline package.
"""

from .io import SchemaError, read_run
from .render import FigureSpec, KINDS, render

__all__ = ["FigureSpec", "KINDS", "SchemaError", "read_run", "render"]
