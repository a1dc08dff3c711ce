"""Serialized outputs: profile/sweep CSV, report JSON, profile SVG.

Floats are written with ``repr`` (shortest string that round-trips exactly),
so re-running the same configuration gives byte-identical files and reading
a file back gives the same values.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from resilnet.metrics import ResilienceProfile, ResilienceReport, resilience
from resilnet.montecarlo import SweepRow, SweepTable

PROFILE_COLUMNS = ("t_norm", "cf_mean", "cf_std", "n_runs")
REPORT_KEYS = ("resilience", "robustness", "risk", "runs", "seed", "config_digest")
SWEEP_COLUMNS = ("p_m", "p_s", "t_r", "resilience", "robustness", "risk", "runs")


def fmt(x: float) -> str:
    return repr(float(x))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write(text: str, path: str | Path | None) -> str:
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def emit_profile_csv(profile: ResilienceProfile, path: str | Path | None = None) -> str:
    rows = [
        (fmt(t), fmt(m), fmt(s), profile.runs)
        for t, m, s in zip(profile.t_norm, profile.mean_cf, profile.std_cf)
    ]
    return _write(_csv_text(PROFILE_COLUMNS, rows), path)


def read_profile_csv(text: str) -> ResilienceProfile:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or tuple(rows[0].keys()) != PROFILE_COLUMNS:
        raise ValueError(f"profile CSV must have columns {','.join(PROFILE_COLUMNS)}")
    return ResilienceProfile(
        tuple(float(r["cf_mean"]) for r in rows),
        tuple(float(r["cf_std"]) for r in rows),
        int(rows[0]["n_runs"]),
    )


def report_dict(report: ResilienceReport) -> dict:
    return {
        "resilience": float(report.resilience),
        "robustness": float(report.robustness),
        "risk": float(report.risk),
        "runs": int(report.runs),
        "seed": int(report.seed),
        "config_digest": report.config_digest,
    }


def emit_report_json(report: ResilienceReport, path: str | Path | None = None) -> str:
    return _write(json.dumps(report_dict(report), indent=2) + "\n", path)


def read_report_json(text: str) -> ResilienceReport:
    doc = json.loads(text)
    if tuple(doc.keys()) != REPORT_KEYS:
        raise ValueError(f"report JSON must have keys {', '.join(REPORT_KEYS)}")
    return ResilienceReport(**doc)


def emit_sweep_csv(table: SweepTable, path: str | Path | None = None) -> str:
    rows = [
        (fmt(r.p_m), fmt(r.p_s), r.t_r, fmt(r.resilience), fmt(r.robustness), fmt(r.risk), r.runs)
        for r in table.rows
    ]
    return _write(_csv_text(SWEEP_COLUMNS, rows), path)


def read_sweep_csv(text: str) -> SweepTable:
    rows = list(csv.DictReader(io.StringIO(text)))
    if rows and tuple(rows[0].keys()) != SWEEP_COLUMNS:
        raise ValueError(f"sweep CSV must have columns {','.join(SWEEP_COLUMNS)}")
    return SweepTable(
        [
            SweepRow(
                float(r["p_m"]),
                float(r["p_s"]),
                int(r["t_r"]),
                float(r["resilience"]),
                float(r["robustness"]),
                float(r["risk"]),
                int(r["runs"]),
            )
            for r in rows
        ]
    )


def emit_plot_svg(profile: ResilienceProfile, path: str | Path | None = None, width: int = 480, height: int = 300) -> str:
    """Resilience profile over normalized time with the area under it shaded."""
    margin = 40
    pw, ph = width - 2 * margin, height - 2 * margin

    def xy(t, v):
        return f"{margin + t * pw:.3f},{margin + (1.0 - v) * ph:.3f}"

    pts = [xy(t, v) for t, v in zip(profile.t_norm, profile.mean_cf)]
    area = [xy(0.0, 0.0), *pts, xy(1.0, 0.0)]
    r = resilience(profile)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'  <rect x="{margin}" y="{margin}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>',
        f'  <polygon class="area" points="{" ".join(area)}" fill="#f5d142" fill-opacity="0.6" stroke="none"/>',
        f'  <polyline class="cf-mean" points="{" ".join(pts)}" fill="none" stroke="#1f4e9c" stroke-width="2"/>',
        f'  <text x="{margin}" y="{height - 12}" font-size="12" font-family="sans-serif">normalized time</text>',
        f'  <text x="{margin}" y="{margin - 10}" font-size="12" font-family="sans-serif">critical functionality (R = {r:.4f})</text>',
        "</svg>",
    ]
    return _write("\n".join(lines) + "\n", path)
