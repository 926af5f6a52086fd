"""CSV persistence for trajectory records, ensemble summaries and regime
tables.  Floats are written with repr (shortest round-trip form), so files
are byte-identical for identical runs regardless of worker count.
"""

from __future__ import annotations

from pathlib import Path

from .diagnostics import EnsembleStats, RegimeVerdict
from .integrator import TrajectoryRecord

INCOMPLETE_MARKER = "INCOMPLETE"


def _fmt(x: float) -> str:
    return repr(float(x))


def series_header(record: TrajectoryRecord) -> list[str]:
    cols = [
        "t",
        "norm_L2",
        "norm_H1",
        "norm_Htheta2",
        "norm_Htheta2p1",
        "int_diss_theta2",
        "int_diss_theta2p1",
        "injection_cum",
    ]
    cols += [f"flag_{mon.kind}" for mon in record.cfg.monitors]
    return cols


def write_series_csv(record: TrajectoryRecord, path: str | Path) -> None:
    lines = [",".join(series_header(record))]
    hits = [h.hit_time if h is not None else None for h in record.hits]
    for i in range(len(record.t)):
        row = [
            _fmt(record.t[i]),
            _fmt(record.norm_l2[i]),
            _fmt(record.norm_h1[i]),
            _fmt(record.norm_th2[i]),
            _fmt(record.norm_th2p1[i]),
            _fmt(record.int_diss_th2[i]),
            _fmt(record.int_diss_th2p1[i]),
            _fmt(record.injection_cum[i]),
        ]
        for hit in hits:
            row.append("1" if hit is not None and record.t[i] >= hit else "0")
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_csv(stats: EnsembleStats, path: str | Path) -> None:
    lines = ["statistic,value,stderr"]
    rows = [
        (f"E_sup_norm_L2_p{stats.p:g}", stats.sup_l2),
        (f"E_sup_norm_H1_p{stats.p:g}", stats.sup_h1),
        (f"E_int_dissipation_L2_p{stats.p:g}", stats.diss_l2),
        (f"E_int_dissipation_H1_p{stats.p:g}", stats.diss_h1),
        ("E_final_norm_L2_sq", stats.final_l2_sq),
    ]
    for name, (value, stderr) in rows:
        lines.append(f"{name},{_fmt(value)},{_fmt(stderr)}")
    lines.append(f"count,{stats.count},0")
    Path(path).write_text("\n".join(lines) + "\n")


def write_regime_csv(rows: list[RegimeVerdict], path: str | Path) -> None:
    lines = ["theta1,theta2,verdict"]
    for row in rows:
        lines.append(f"{_fmt(row.theta1)},{_fmt(row.theta2)},{row.verdict}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_incomplete_marker(directory: str | Path, reason: str) -> None:
    Path(directory, INCOMPLETE_MARKER).write_text(reason + "\n")
