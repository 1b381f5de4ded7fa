"""Experiment reports: the common CSV schema and optional native SVG plots.

CSV layout: '#'-prefixed metadata lines, a documenting header row, then rows
(parameter, quantity, value).  Fit results appear as rows with parameter
'fit' and quantities 'slope:<name>' / 'residual:<name>'.  All numbers are
written with %.17g so identical runs are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import math


def _fmt(x):
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


@dataclass
class ExperimentReport:
    """Tabular record of a parameter sweep plus fitted rates."""

    name: str
    metadata: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    fits: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def add(self, parameter, quantity, value):
        self.rows.append((parameter, quantity, float(value)))

    def add_fit(self, quantity, slope, residual):
        self.fits.append((quantity, float(slope), float(residual)))

    def series(self, quantity):
        params, values = [], []
        for p, q, v in self.rows:
            if q == quantity:
                params.append(float(p))
                values.append(v)
        return params, values

    def fitted_slope(self, quantity):
        for q, slope, _ in self.fits:
            if q == quantity:
                return slope
        raise KeyError(f"no fit recorded for {quantity!r}")

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(f"# report = {self.name}\n")
            for key, value in self.metadata.items():
                fh.write(f"# {key} = {_fmt(value)}\n")
            for w in self.warnings:
                fh.write(f"# warning = {w}\n")
            fh.write("parameter,quantity,value\n")
            for p, q, v in self.rows:
                fh.write(f"{_fmt(p)},{q},{_fmt(v)}\n")
            for q, slope, resid in self.fits:
                fh.write(f"fit,slope:{q},{_fmt(slope)}\n")
                fh.write(f"fit,residual:{q},{_fmt(resid)}\n")

    def to_svg(self, path, quantities=None):
        write_loglog_svg(self, path, quantities=quantities)


def write_loglog_svg(report, path, quantities=None, width=640, height=440):
    """Minimal deterministic log-log polyline plot of report series."""
    if quantities is None:
        quantities = []
        for _, q, _ in report.rows:
            if q not in quantities:
                quantities.append(q)
    series = []
    for q in quantities:
        params, values = report.series(q)
        pts = [(p, v) for p, v in zip(params, values) if p > 0 and v > 0]
        if len(pts) >= 2:
            series.append((q, pts))
    margin = 60
    if not series:
        body = ['<text x="20" y="30">no positive series to plot</text>']
        _write_svg(path, width, height, body)
        return
    xs = [math.log10(p) for _, pts in series for p, _ in pts]
    ys = [math.log10(v) for _, pts in series for _, v in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1 += 1e-9 + 0.05 * (x1 - x0)
    x0 -= 1e-9 + 0.05 * (x1 - x0)
    y1 += 1e-9 + 0.05 * (y1 - y0)
    y0 -= 1e-9 + 0.05 * (y1 - y0)

    def to_px(lx, ly):
        px = margin + (lx - x0) / (x1 - x0) * (width - 2 * margin)
        py = height - margin - (ly - y0) / (y1 - y0) * (height - 2 * margin)
        return px, py

    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    body = [
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 15}" text-anchor="middle">log10(parameter)</text>',
        f'<text x="15" y="{height // 2}" transform="rotate(-90 15 {height // 2})" '
        f'text-anchor="middle">log10(value)</text>',
        f'<text x="{width // 2}" y="25" text-anchor="middle">{report.name}</text>',
    ]
    for i, (q, pts) in enumerate(series):
        color = palette[i % len(palette)]
        coords = [to_px(math.log10(p), math.log10(v)) for p, v in pts]
        path_d = " ".join(f"{px:.2f},{py:.2f}" for px, py in coords)
        body.append(f'<polyline points="{path_d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for px, py in coords:
            body.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="{color}"/>')
        body.append(
            f'<text x="{width - margin + 5}" y="{margin + 16 * i + 12}" fill="{color}" '
            f'font-size="11">{q}</text>'
        )
    _write_svg(path, width, height, body)


def _write_svg(path, width, height, body):
    with open(path, "w") as fh:
        fh.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'font-family="monospace" font-size="12">\n'
        )
        for line in body:
            fh.write(line + "\n")
        fh.write("</svg>\n")
