"""Backtest output files: metrics JSON, per-day CSV and a cumulative-wealth SVG."""
from __future__ import annotations

import csv
import json
from html import escape
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .backtest import BacktestReport

SERIES_LABELS = {
    "strategy": "Proposed Strategy",
    "equal_weight": "Equal-Weighted Portfolio",
    "btc": "Bitcoin (BTC)",
}
_COLORS = {"strategy": "#2563EB", "equal_weight": "#16A34A", "btc": "#EAB308"}


def metrics_document(report: BacktestReport, extra: Mapping | None = None) -> dict:
    doc = {
        "cumulative_return_units": "final wealth multiple minus one (0.5 means +50%)",
        "n_days": len(report),
        "start": report.dates[0].isoformat(),
        "end": report.dates[-1].isoformat(),
        "series": {name: m.to_dict() for name, m in report.metrics.items()},
    }
    if extra:
        doc.update(extra)
    return doc


def write_metrics_json(report: BacktestReport, path: str | Path, extra: Mapping | None = None) -> None:
    Path(path).write_text(json.dumps(metrics_document(report, extra), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def write_daily_csv(report: BacktestReport, path: str | Path) -> None:
    """``date,strategy_ret,btc_ret,ew_ret,w_<ASSET>...``; ``btc_ret`` is blank without BTC."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "strategy_ret", "btc_ret", "ew_ret", *(f"w_{a}" for a in report.assets)])
        for k, d in enumerate(report.dates):
            btc = "" if report.btc_returns is None else repr(float(report.btc_returns[k]))
            writer.writerow([
                d.isoformat(),
                repr(float(report.strategy_returns[k])),
                btc,
                repr(float(report.equal_weight_returns[k])),
                *(repr(float(w)) for w in report.weights[k]),
            ])


def _wealth(returns: np.ndarray) -> np.ndarray:
    return np.concatenate(([1.0], np.cumprod(1.0 + np.asarray(returns))))


def render_wealth_svg(series: Mapping[str, Sequence[float]], labels: Sequence[str],
                      title: str = "Proposed Strategy VS. Benchmark",
                      width: int = 900, height: int = 480) -> str:
    """Line chart of cumulative wealth (starting at 1) for each return series.

    ``labels`` are the x-axis tick labels, one per return plus the start point.
    """
    left, right, top, bottom = 70, 20, 50, 60
    plot_w, plot_h = width - left - right, height - top - bottom
    curves = {name: _wealth(r) for name, r in series.items()}
    n = max(len(c) for c in curves.values())
    lo = min(float(c.min()) for c in curves.values())
    hi = max(float(c.max()) for c in curves.values())
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def x(i: int) -> float:
        return left + plot_w * (i / max(n - 1, 1))

    def y(v: float) -> float:
        return top + plot_h * (1 - (v - lo) / (hi - lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="Arial, sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="#FFFFFF"/>',
        f'<text x="{width / 2:.1f}" y="28" text-anchor="middle" font-size="16" '
        f'font-weight="bold">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="#334155"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="#334155"/>',
    ]
    for k in range(6):
        v = lo + (hi - lo) * k / 5
        parts.append(f'<line x1="{left}" y1="{y(v):.2f}" x2="{left + plot_w}" y2="{y(v):.2f}" stroke="#E2E8F0"/>')
        parts.append(f'<text x="{left - 8}" y="{y(v) + 4:.2f}" text-anchor="end">{v:.2f}</text>')
    n_ticks = min(6, n)
    for k in range(n_ticks):
        i = round(k * (n - 1) / max(n_ticks - 1, 1))
        label = escape(str(labels[i])) if i < len(labels) else ""
        parts.append(f'<text x="{x(i):.2f}" y="{top + plot_h + 20}" text-anchor="middle">{label}</text>')
    parts.append(f'<text x="{left + plot_w / 2:.1f}" y="{height - 15}" text-anchor="middle">Date</text>')
    parts.append(f'<text x="18" y="{top + plot_h / 2:.1f}" text-anchor="middle" '
                 f'transform="rotate(-90 18 {top + plot_h / 2:.1f})">Cumulative wealth</text>')
    for k, (name, curve) in enumerate(curves.items()):
        color = _COLORS.get(name, "#64748B")
        points = " ".join(f"{x(i):.2f},{y(float(v)):.2f}" for i, v in enumerate(curve))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>')
        ly = top + 10 + 18 * k
        parts.append(f'<line x1="{left + 12}" y1="{ly}" x2="{left + 36}" y2="{ly}" stroke="{color}" stroke-width="3"/>')
        parts.append(f'<text x="{left + 42}" y="{ly + 4}">{escape(SERIES_LABELS.get(name, name))}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_wealth_svg(report: BacktestReport, path: str | Path) -> None:
    series = {"strategy": report.strategy_returns, "equal_weight": report.equal_weight_returns}
    if report.btc_returns is not None:
        series["btc"] = report.btc_returns
    labels = ["start"] + [d.isoformat() for d in report.dates]
    Path(path).write_text(render_wealth_svg(series, labels), encoding="utf-8")


def write_report(report: BacktestReport, out_dir: str | Path, extra: Mapping | None = None) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"metrics": out / "metrics.json", "daily": out / "backtest.csv", "chart": out / "wealth.svg"}
    write_metrics_json(report, paths["metrics"], extra)
    write_daily_csv(report, paths["daily"])
    write_wealth_svg(report, paths["chart"])
    return paths
