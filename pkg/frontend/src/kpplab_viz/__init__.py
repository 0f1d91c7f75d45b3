"""Figure generation for kpplab run artifacts.

Read-only consumer of the solver's CSV/report files (schema `# kpplab-csv v1`):
no physics is recomputed here; every overlay line comes from values already
present in the report files.
"""

from .plots import plot_amplitude, plot_delay, plot_profile  # noqa: F401

__version__ = "0.1.0"
