"""Post-hoc rendering of simulator run directories.

Reads only the documented output files of the ``muskat`` command line
tool (snapshot CSVs, ``diagnostics.csv``, ``stability.csv``,
``manifest.json``) and produces PNG frames and diagnostic panels.
"""

from .artifacts import RunArtifacts, ArtifactError
from .render import render_snapshots, render_diagnostics

__all__ = ["RunArtifacts", "ArtifactError", "render_snapshots",
           "render_diagnostics"]
