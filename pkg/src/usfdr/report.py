"""Results tables: deterministic CSV output and plain SVG line plots."""
import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

CSV_HEADER = (
    "model", "method", "alpha", "e_fdr", "e_power", "e_fdr_over_alpha",
    "n_reps", "mean_lambda_hat", "mean_rejections",
)
Y_AXES = {"power": "power", "e_fdr_over_alpha": "eFDR/α"}


@dataclass(frozen=True)
class ResultRow:
    model: str
    method: str
    alpha: float
    e_fdr: float
    e_power: float
    n_reps: int
    mean_lambda_hat: float
    mean_rejections: float

    @property
    def e_fdr_over_alpha(self):
        return self.e_fdr / self.alpha

    @property
    def key(self):
        return (self.model, self.method, self.alpha)


class ResultsTable:
    """Rows keyed by ``(model, method, alpha)``; a later row replaces an earlier one."""

    def __init__(self, rows=()):
        self._rows = {}
        for row in rows:
            self.add(row)

    def add(self, row):
        self._rows[row.key] = row

    @classmethod
    def from_summaries(cls, summaries):
        return cls(
            ResultRow(
                model=s.model, method=s.method, alpha=s.alpha, e_fdr=s.e_fdr,
                e_power=s.e_power, n_reps=s.n_replications,
                mean_lambda_hat=s.mean_lambda_hat, mean_rejections=s.mean_rejections,
            )
            for s in summaries
        )

    def extend(self, other):
        for row in other:
            self.add(row)
        return self

    def __iter__(self):
        return iter(sorted(self._rows.values(), key=lambda r: r.key))

    def __len__(self):
        return len(self._rows)

    def get(self, model, method, alpha):
        return self._rows[(model, method, alpha)]

    @property
    def models(self):
        return sorted({r.model for r in self._rows.values()})

    @property
    def methods(self):
        return list(dict.fromkeys(r.method for r in self))


def _fmt(x):
    if isinstance(x, int):
        return str(x)
    return "nan" if math.isnan(x) else f"{x:.6g}"


def csv_text(table):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in table:
        writer.writerow([
            r.model, r.method, _fmt(r.alpha), _fmt(r.e_fdr), _fmt(r.e_power),
            _fmt(r.e_fdr_over_alpha), _fmt(int(r.n_reps)), _fmt(r.mean_lambda_hat),
            _fmt(r.mean_rejections),
        ])
    return buf.getvalue()


def emit_csv(table, path):
    path = Path(path)
    path.write_bytes(csv_text(table).encode("utf-8"))
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return ResultsTable(
            ResultRow(
                model=row["model"], method=row["method"], alpha=float(row["alpha"]),
                e_fdr=float(row["e_fdr"]), e_power=float(row["e_power"]),
                n_reps=int(row["n_reps"]), mean_lambda_hat=float(row["mean_lambda_hat"]),
                mean_rejections=float(row["mean_rejections"]),
            )
            for row in reader
        )


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#17becf")
_PANEL_W, _PANEL_H = 320, 260
_MARGIN = dict(left=55, right=15, top=30, bottom=45)


def _nice_max(v):
    if v <= 0 or math.isnan(v):
        return 1.0
    mag = 10 ** math.floor(math.log10(v))
    for step in (1, 2, 2.5, 5, 10):
        if v <= step * mag:
            return step * mag
    return 10 * mag


def svg_text(table, y_axis):
    if y_axis not in Y_AXES:
        raise ValueError(f"y_axis must be one of {tuple(Y_AXES)}")
    rows = list(table)
    if not rows:
        raise ValueError("cannot plot an empty table (no alpha values)")
    models = table.models
    methods = table.methods
    color = {m: _COLORS[i % len(_COLORS)] for i, m in enumerate(methods)}
    value = (lambda r: r.e_power) if y_axis == "power" else (lambda r: r.e_fdr_over_alpha)
    legend_h = 20 * len(methods) + 10
    width = _PANEL_W * len(models)
    height = _PANEL_H + legend_h
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    x_max = max(r.alpha for r in rows)
    finite = [value(r) for r in rows if not math.isnan(value(r))]
    y_max = 1.0 if y_axis == "power" else _nice_max(max(finite + [1.0]) * 1.05)
    for p, model in enumerate(models):
        x0 = p * _PANEL_W + _MARGIN["left"]
        y0 = _MARGIN["top"]
        w = _PANEL_W - _MARGIN["left"] - _MARGIN["right"]
        h = _PANEL_H - _MARGIN["top"] - _MARGIN["bottom"]

        def sx(a, x0=x0, w=w):
            return x0 + w * a / x_max

        def sy(v, y0=y0, h=h):
            return y0 + h * (1.0 - v / y_max)

        out.append(f'<text x="{x0 + w / 2:.1f}" y="{y0 - 10}" text-anchor="middle" '
                   f'font-weight="bold">{escape(model)}</text>')
        out.append(f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" '
                   'stroke="black"/>')
        for i in range(5):
            a = x_max * i / 4
            v = y_max * i / 4
            out.append(f'<text x="{sx(a):.1f}" y="{y0 + h + 14}" '
                       f'text-anchor="middle">{a:.3g}</text>')
            out.append(f'<text x="{x0 - 5}" y="{sy(v) + 4:.1f}" '
                       f'text-anchor="end">{v:.3g}</text>')
        out.append(f'<text x="{x0 + w / 2:.1f}" y="{y0 + h + 32}" '
                   'text-anchor="middle">α</text>')
        out.append(f'<text x="{x0 - 40}" y="{y0 + h / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 {x0 - 40} {y0 + h / 2:.1f})">'
                   f'{escape(Y_AXES[y_axis])}</text>')
        if y_axis == "e_fdr_over_alpha":
            out.append(f'<line class="reference" x1="{x0}" y1="{sy(1.0):.2f}" '
                       f'x2="{x0 + w}" y2="{sy(1.0):.2f}" stroke="gray" '
                       'stroke-dasharray="4 3"/>')
        for method in methods:
            pts = [(r.alpha, value(r)) for r in rows
                   if r.model == model and r.method == method and not math.isnan(value(r))]
            if not pts:
                continue
            coords = " ".join(f"{sx(a):.2f},{sy(v):.2f}" for a, v in pts)
            out.append(f'<polyline data-method="{escape(method)}" points="{coords}" '
                       f'fill="none" stroke="{color[method]}" stroke-width="1.5"/>')
    for i, method in enumerate(methods):
        y = _PANEL_H + 15 + 20 * i
        out.append(f'<line x1="20" y1="{y}" x2="45" y2="{y}" stroke="{color[method]}" '
                   'stroke-width="2"/>')
        out.append(f'<text x="52" y="{y + 4}">{escape(method)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(table, y_axis, path):
    path = Path(path)
    path.write_text(svg_text(table, y_axis), encoding="utf-8")
    return path
