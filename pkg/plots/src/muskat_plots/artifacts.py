"""Discovery and validation of a run directory's output files."""

import csv
import json
import re
from pathlib import Path

import numpy as np


SNAPSHOT_COLUMNS = ("alpha", "z1", "z2", "omega", "sigma")
DIAGNOSTICS_COLUMNS = ("t", "e3", "sigma_min", "chord_arc", "min_dist",
                       "mean_omega", "dt")

_SNAP_RE = re.compile(r"^(snap|phys)_(\d+)\.csv$")


class ArtifactError(RuntimeError):
    """A run directory does not match the documented output contract."""


def _read_csv(path, expected):
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = tuple(next(reader))
            rows = [[float(v) for v in row] for row in reader if row]
    except (OSError, ValueError, StopIteration) as exc:
        raise ArtifactError("cannot read %s: %s" % (path, exc)) from exc
    if header != tuple(expected):
        raise ArtifactError(
            "%s: column schema mismatch (expected %s, found %s)"
            % (path, ",".join(expected), ",".join(header)))
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ArtifactError("%s holds no data rows" % path)
    return {name: data[:, i] for i, name in enumerate(header)}


class RunArtifacts:
    """The discovered contents of one run directory.

    Attributes: snapshots and physical_snapshots as (step, columns dict)
    pairs in strictly increasing step order, the diagnostics series as a
    column dict (or None), and the parsed manifest (or None).
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise ArtifactError("run directory %s does not exist"
                                % self.directory)
        self.snapshots = self._discover("snap")
        self.physical_snapshots = self._discover("phys")
        self.diagnostics = None
        diag = self.directory / "diagnostics.csv"
        if diag.exists():
            self.diagnostics = _read_csv(diag, DIAGNOSTICS_COLUMNS)
        self.manifest = None
        manifest = self.directory / "manifest.json"
        if manifest.exists():
            try:
                self.manifest = json.loads(manifest.read_text())
            except (OSError, ValueError) as exc:
                raise ArtifactError("cannot parse %s: %s"
                                    % (manifest, exc)) from exc

    def _discover(self, prefix):
        found = []
        for path in self.directory.iterdir():
            match = _SNAP_RE.match(path.name)
            if match and match.group(1) == prefix:
                found.append((int(match.group(2)), path))
        found.sort()
        steps = [step for step, _ in found]
        if len(set(steps)) != len(steps):
            raise ArtifactError("duplicate %s_* snapshot steps" % prefix)
        return [(step, _read_csv(path, SNAPSHOT_COLUMNS))
                for step, path in found]

    @property
    def domain(self):
        if self.manifest and "domain" in self.manifest:
            return self.manifest["domain"]
        return "tilde" if self.physical_snapshots else "physical"

    def splash_report(self):
        if self.manifest:
            return self.manifest.get("splash_report")
        return None
