"""CSV logs and dependency-free SVG plots of a simulation log."""
from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .simulate import COLUMNS, SimLog

PLOT_KINDS = ("angles", "velocities", "torque", "trace")
WIDTH, HEIGHT = 720, 440
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 130, 40, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")

_SERIES = {
    "angles": ("t", [("q1", "q1"), ("q2", "q2"), ("q3", "q3")], "time [s]", "angle [rad]"),
    "velocities": ("t", [("w1", "w1"), ("w2", "w2"), ("w3", "w3")], "time [s]", "angular velocity [rad/s]"),
    "torque": ("t", [("tau", "tau")], "time [s]", "motor torque [N m]"),
}


def atomic_write(destination, data: bytes) -> int:
    """Write via a temporary file in the same directory, then rename."""
    destination = Path(destination)
    fd, tmp = tempfile.mkstemp(dir=destination.parent, prefix=f".{destination.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, destination)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return len(data)


def format_csv(log: SimLog) -> str:
    if len(log) == 0:
        raise ValueError("empty log")
    data = np.column_stack([log[name] for name in COLUMNS])
    lines = [",".join(COLUMNS)]
    lines += [",".join(format(float(v) + 0.0, ".12g") for v in row) for row in data]
    return "\n".join(lines) + "\n"


def emit_csv(log: SimLog, destination) -> int:
    """Write the log as CSV and return the number of bytes written."""
    return atomic_write(destination, format_csv(log).encode("ascii"))


def read_csv(source) -> SimLog:
    lines = Path(source).read_text(encoding="ascii").splitlines()
    header = tuple(lines[0].split(","))
    if header != COLUMNS:
        raise ValueError(f"unexpected CSV header {lines[0]!r}")
    return SimLog.from_rows([[float(v) for v in line.split(",")] for line in lines[1:]])


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    span = hi - lo
    raw = span / max(target - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v = first + len(ticks) * step
    return ticks


def _limits(values: np.ndarray) -> tuple[float, float]:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return -1.0, 1.0
    lo, hi = float(finite.min()), float(finite.max())
    if hi - lo < 1e-12 * max(1.0, abs(lo), abs(hi)):
        pad = max(abs(lo) * 0.05, 1.0)
    else:
        pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.6g}"


def render_svg(title: str, series, x_label: str, y_label: str, equal_aspect: bool = False) -> str:
    """``series`` is a list of ``(name, x, y)``; NaN samples break a line."""
    xs = np.concatenate([np.asarray(x, dtype=float) for _, x, _ in series])
    ys = np.concatenate([np.asarray(y, dtype=float) for _, _, y in series])
    x0, x1 = _limits(xs)
    y0, y1 = _limits(ys)
    pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    if equal_aspect:
        scale = min(pw / (x1 - x0), ph / (y1 - y0))
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        x0, x1 = cx - pw / scale / 2, cx + pw / scale / 2
        y0, y1 = cy - ph / scale / 2, cy + ph / scale / 2

    def sx(v):
        return MARGIN_LEFT + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN_TOP + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in nice_ticks(x0, x1):
        x = _fmt(sx(v))
        out.append(f'<line x1="{x}" y1="{MARGIN_TOP + ph}" x2="{x}" y2="{MARGIN_TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{MARGIN_TOP + ph + 18}" text-anchor="middle">{_tick_label(v)}</text>')
    for v in nice_ticks(y0, y1):
        y = _fmt(sy(v))
        out.append(f'<line x1="{MARGIN_LEFT - 5}" y1="{y}" x2="{MARGIN_LEFT}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_LEFT - 8}" y="{y}" text-anchor="end" dominant-baseline="middle">{_tick_label(v)}</text>')
    out.append(f'<text x="{MARGIN_LEFT + pw / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(x_label)}</text>')
    out.append(
        f'<text x="16" y="{MARGIN_TOP + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {MARGIN_TOP + ph / 2})">{escape(y_label)}</text>'
    )
    for i, (name, x, y) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        # one polyline per run of finite samples
        breaks = np.flatnonzero(np.diff(ok.astype(int)) != 0) + 1
        for chunk in np.split(np.arange(len(x)), breaks):
            if chunk.size == 0 or not ok[chunk[0]]:
                continue
            pts = " ".join(f"{_fmt(sx(x[j]))},{_fmt(sy(y[j]))}" for j in chunk)
            out.append(f'<polyline id="{escape(name)}" fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = MARGIN_TOP + 16 + 18 * i
        lx = WIDTH - MARGIN_RIGHT + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}" dominant-baseline="middle">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_svg(log: SimLog, kind: str) -> str:
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    if len(log) == 0:
        raise ValueError("empty log")
    if kind == "trace":
        series = [("ankle_A", log["xA"], log["yA"]), ("knee_B", log["xB"], log["yB"])]
        return render_svg("trace: ankle and knee paths", series, "x [m]", "y [m]", equal_aspect=True)
    xcol, cols, x_label, y_label = _SERIES[kind]
    series = [(name, log[xcol], log[col]) for name, col in cols]
    return render_svg(kind, series, x_label, y_label)


def emit_plot(log: SimLog, kind: str, destination=None) -> str:
    """Render one plot kind; also write it when ``destination`` is given."""
    svg = plot_svg(log, kind)
    if destination is not None:
        atomic_write(destination, svg.encode("utf-8"))
    return svg
