"""Snapshot frames and diagnostic panels from run artifacts."""

import math

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .artifacts import ArtifactError


# the five singular points of the inverse half-tangent map, drawn in
# every tilde-domain view so q-point proximity is visible at a glance
Q_POINTS = [0.0 + 0.0j,
            (1.0 + 1.0j) / math.sqrt(2.0), (-1.0 + 1.0j) / math.sqrt(2.0),
            (-1.0 - 1.0j) / math.sqrt(2.0), (1.0 - 1.0j) / math.sqrt(2.0)]

DEFAULT_SIZE = (1600, 1200)
_DPI = 100


def _figure(size):
    return plt.subplots(figsize=(size[0] / _DPI, size[1] / _DPI), dpi=_DPI)


def _draw_curve(ax, columns, tilde, **kwargs):
    z1, z2 = columns["z1"], columns["z2"]
    if tilde:
        # closed image curve: repeat the seam point so the outline closes
        ax.plot(np.append(z1, z1[0]), np.append(z2, z2[0]), **kwargs)
    else:
        ax.plot(z1, z2, **kwargs)


def _draw_q_points(ax):
    ax.plot([q.real for q in Q_POINTS], [q.imag for q in Q_POINTS],
            "x", color="crimson", markersize=8, label="singular points")


def _frame(columns, tilde, title, path, size, zoom_center=None):
    fig, ax = _figure(size)
    _draw_curve(ax, columns, tilde, color="steelblue", linewidth=1.2)
    if tilde:
        _draw_q_points(ax)
        ax.legend(loc="upper right")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("z1")
    ax.set_ylabel("z2")
    ax.set_title(title)
    if zoom_center is not None:
        inset = ax.inset_axes([0.62, 0.08, 0.33, 0.33])
        _draw_curve(inset, columns, tilde, color="steelblue", linewidth=1.0)
        cx, cy = zoom_center
        span = _zoom_span(columns, cx, cy)
        inset.set_xlim(cx - span, cx + span)
        inset.set_ylim(cy - span, cy + span)
        inset.set_aspect("equal", adjustable="box")
        inset.set_title("contact zone", fontsize=9)
        ax.plot([cx], [cy], "o", fillstyle="none", color="darkorange",
                markersize=12)
        ax.indicate_inset_zoom(inset, edgecolor="darkorange")
    fig.savefig(path)
    plt.close(fig)


def _zoom_span(columns, cx, cy):
    # a window a few curve samples wide around the marked point
    d = np.hypot(columns["z1"] - cx, columns["z2"] - cy)
    near = np.sort(d)[:max(8, d.size // 32)]
    return max(float(near[-1]) * 1.5, 1e-6)


def render_snapshots(artifacts, outdir, zoom=False, size=DEFAULT_SIZE):
    """One frame per snapshot plus a first/middle/last overlay.

    The zoom flag adds a contact-zone inset to the final frame, centered
    at the minimizing pair recorded in the manifest.  Returns the list
    of files written.
    """
    if not artifacts.snapshots:
        raise ArtifactError("no snapshots found in %s" % artifacts.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    tilde = artifacts.domain == "tilde"
    written = []
    last_index = len(artifacts.snapshots) - 1
    report = artifacts.splash_report()
    for i, (step, columns) in enumerate(artifacts.snapshots):
        center = None
        if zoom and i == last_index and report is not None \
                and all(np.isfinite(report.get("x_s", [np.nan]))):
            center = report["x_s"]
            if tilde:
                # x_s is recorded in physical coordinates; the zoom on a
                # tilde frame centers on the curve point nearest contact
                phys = dict(artifacts.physical_snapshots).get(step)
                if phys is not None:
                    j = int(np.argmin(np.hypot(phys["z1"] - center[0],
                                               phys["z2"] - center[1])))
                    center = (columns["z1"][j], columns["z2"][j])
        path = outdir / ("frame_%06d.png" % step)
        _frame(columns, tilde, "step %d" % step, path, size,
               zoom_center=center)
        written.append(path)
    picks = sorted({0, last_index // 2, last_index})
    fig, ax = _figure(size)
    for i in picks:
        step, columns = artifacts.snapshots[i]
        _draw_curve(ax, columns, tilde, linewidth=1.2,
                    label="step %d" % step)
    if tilde:
        _draw_q_points(ax)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("z1")
    ax.set_ylabel("z2")
    ax.set_title("first / middle / last")
    ax.legend(loc="upper right")
    overlay = outdir / "overlay.png"
    fig.savefig(overlay)
    plt.close(fig)
    written.append(overlay)
    return written


def _panel(ax, t, series, label, marker_t=None):
    positive = np.all(series > 0.0) and np.all(np.isfinite(series))
    ax.plot(t, series, color="steelblue", linewidth=1.2)
    if positive:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(label)
    if marker_t is not None and np.isfinite(marker_t):
        ax.axvline(marker_t, color="crimson", linestyle="--",
                   linewidth=1.0, label="estimated contact time")
        ax.legend(loc="best", fontsize=8)


def render_diagnostics(artifacts, outdir, size=DEFAULT_SIZE):
    """Four time-series panels; returns the list of files written."""
    if artifacts.diagnostics is None:
        raise ArtifactError("no diagnostics.csv in %s" % artifacts.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    diag = artifacts.diagnostics
    t = diag["t"]
    report = artifacts.splash_report()
    t_s = None
    if report is not None and report.get("is_splash"):
        t_s = report.get("t_s")
    fig, axes = plt.subplots(2, 2, figsize=(size[0] / _DPI, size[1] / _DPI),
                             dpi=_DPI)
    _panel(axes[0, 0], t, diag["min_dist"], "interface min distance", t_s)
    _panel(axes[0, 1], t, diag["chord_arc"], "chord-arc constant", t_s)
    _panel(axes[1, 0], t, diag["sigma_min"], "min sigma")
    _panel(axes[1, 1], t, diag["e3"], "energy E3")
    fig.tight_layout()
    path = outdir / "diagnostics.png"
    fig.savefig(path)
    plt.close(fig)
    written = [path]
    written.extend(_render_decay(artifacts, outdir, size))
    return written


def _render_decay(artifacts, outdir, size):
    """Log-amplitude plot with the fitted slope, for decay runs."""
    manifest = artifacts.manifest
    if not manifest or "decay_rate" not in manifest:
        return []
    diag = artifacts.diagnostics
    t = diag["t"]
    # the first-mode amplitude is reconstructed from the snapshots (the
    # diagnostics CSV does not carry it); fall back to nothing if the
    # run saved fewer than two snapshots
    amps, times = [], []
    for step, columns in artifacts.snapshots:
        z2 = columns["z2"]
        c = np.fft.fft(z2) / z2.size
        amps.append(2.0 * abs(c[1]))
        row = min(step, t.size - 1)
        times.append(t[row])
    if len(amps) < 2 or min(amps) <= 0.0:
        return []
    rate = float(manifest["decay_rate"])
    fig, ax = _figure(size)
    ax.semilogy(times, amps, "o-", color="steelblue", label="mode-1 amplitude")
    ax.semilogy(times, amps[0] * np.exp(rate * (np.asarray(times) - times[0])),
                "--", color="crimson",
                label="fitted rate %.4f" % rate)
    ax.set_xlabel("t")
    ax.set_ylabel("amplitude")
    ax.legend(loc="best")
    path = outdir / "decay.png"
    fig.savefig(path)
    plt.close(fig)
    return [path]
