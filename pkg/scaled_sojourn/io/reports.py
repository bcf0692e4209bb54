"""
CSV writers for run results.

All files are UTF-8, comma separated with a header row and '\\n' line
endings. Integers are written as is, floats with six decimals, missing
values as empty fields.
"""
import csv
import logging
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from scaled_sojourn.aqm.marker import ApplicationPoint
from scaled_sojourn.exceptions import ConfigError
from scaled_sojourn.sim.metrics import (LAG_ESTIMATORS, SignalLagReport, error_stats,
                                        idle_tail_report, lag_matrix, mark_spacing,
                                        shift_factors)
from scaled_sojourn.sim.trace import TRACE_COLUMNS, Trace

log = logging.getLogger(__name__)


class Report(Enum):
    Trace = "trace"
    LagMatrix = "lag_matrix"
    IdleTail = "idle_tail"
    MarkSpacing = "mark_spacing"
    ErrorStats = "error_stats"


LAG_COLUMNS = ("applied_at", "estimator", "t_true", "t_decision", "measurement",
               "application", "s_detect", "s_carrier", "rate_window", "normalized")
TAIL_COLUMNS = ("label", "tail_packets", "marks", "below_target_from", "marks_after_below_target",
                "restart_packets", "restart_marks")
SPACING_COLUMNS = ("flow", "packets", "marks", "mean_gap", "gap_variance")
ERROR_COLUMNS = ("estimator", "n", "rms", "mean")
FACTOR_COLUMNS = ("variant", "n", "min", "max", "mean")

_HEADINGS = {
    "drain_rate": "backlog/rate",
    "raw": "sojourn",
    "scaled_exact": "scaled sojourn",
}


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Enum):
        return str(v.value)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "nan" if np.isnan(v) else f"{v:.6f}"
    return str(v)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    log.debug(f"wrote {path}")
    return path


def lag_table(report: SignalLagReport) -> str:
    """
    Normalized lags as an aligned text table, application points down and
    estimators across.
    """
    estimators = sorted({est for _, est in report.lags}, key=LAG_ESTIMATORS.index)
    header = ["", *(_HEADINGS.get(e.value, e.value) for e in estimators)]
    rows = [header]
    for point in (ApplicationPoint.Enqueue, ApplicationPoint.Dequeue):
        cells = [f"at {point.value[:3]}"]
        for est in estimators:
            lag = report.lags.get((point, est))
            cells.append("-" if lag is None else f"{lag.normalized:.2f}")
        rows.append(cells)

    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths)))
             for r in rows]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _lag_rows(report: SignalLagReport):
    for (point, est), lag in report.lags.items():
        if lag is None:
            yield (point, est) + (None,) * (len(LAG_COLUMNS) - 2)
        else:
            yield (point, est, lag.t_true, lag.t_decision, lag.measurement, lag.application,
                   lag.s_detect, lag.s_carrier, lag.rate_window, lag.normalized)


def emit_reports(trace: Trace, out_dir: Path, reports: Iterable[Report],
                 label: Optional[str] = None) -> List[Path]:
    """
    Write the requested reports for one run into out_dir.

    :return: the files written; the lag matrix also yields a .txt table
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sc = trace.scenario
    written = []

    for report in reports:
        if report is Report.Trace:
            rows = ([getattr(r, c) for c in TRACE_COLUMNS] for r in trace)
            written.append(write_csv(out_dir / "trace.csv", TRACE_COLUMNS, rows))

        elif report is Report.LagMatrix:
            lags = lag_matrix(trace.records, sc.lag_threshold, sc.lag_onset,
                              min_window_packets=sc.min_window_packets)
            written.append(write_csv(out_dir / "lag_matrix.csv", LAG_COLUMNS, _lag_rows(lags)))
            table = out_dir / "lag_matrix.txt"
            table.write_text(lag_table(lags), encoding="utf-8")
            written.append(table)

        elif report is Report.IdleTail:
            tails = idle_tail_report({label or "run": trace})
            rows = ((t.label, t.tail_packets, t.marks, t.below_target_from,
                     t.marks_after_below_target, t.restart_packets, t.restart_marks)
                    for t in tails.values())
            written.append(write_csv(out_dir / "idle_tail.csv", TAIL_COLUMNS, rows))

        elif report is Report.MarkSpacing:
            spacing = mark_spacing(trace.records) if len(trace) else {}
            rows = ((s.flow, s.packets, s.marks, s.mean_gap, s.gap_variance)
                    for s in spacing.values())
            written.append(write_csv(out_dir / "mark_spacing.csv", SPACING_COLUMNS, rows))

        elif report is Report.ErrorStats:
            stats = error_stats(trace.records)
            rows = ((s.estimator, s.n, s.rms, s.mean) for s in stats.values())
            written.append(write_csv(out_dir / "error_stats.csv", ERROR_COLUMNS, rows))
            written.append(write_csv(out_dir / "shift_factors.csv", FACTOR_COLUMNS,
                                     _factor_rows(trace)))

    return written


def _factor_rows(trace: Trace):
    if not len(trace):
        return
    for variant, factors in zip(("scaled_lg", "scaled_clz"), shift_factors(trace.records)):
        yield variant, factors.size, float(factors.min()), float(factors.max()), \
            float(factors.mean())


def parse_reports(text: str) -> List[Report]:
    names = [n.strip() for n in text.split(",") if n.strip()]
    try:
        return [Report(n) for n in names]
    except ValueError:
        choices = ", ".join(r.value for r in Report)
        raise ConfigError(f"unknown report in '{text}', choose from {choices}", key="--report")
