"""Report emission: CSV tables, summaries, plot data and a small SVG plot."""

from __future__ import annotations

import csv
import io
import logging
import math
from collections.abc import Callable, Sequence
from pathlib import Path

import numpy as np

from ..convergence import ConvergenceTable
from ..integrator import IntegrationResult, NormTracker
from ..types import ConvergenceRow, DofVector, StudyKind
from ..utils import fmt17

logger = logging.getLogger(__name__)

CSV_HEADER = ("study", "problem", "h", "dt", "t", "error")
SINGLE_RUN_HEADER = ("study", "problem", "h", "dt", "t", "l2_norm")
_SVG_SIZE = (480, 360)
_SVG_MARGIN = 48


def _optional(value: float | None) -> str:
    return "n/a" if value is None else fmt17(value)


def summary_lines(table: ConvergenceTable) -> list[str]:
    """Deterministic key=value lines describing a study (no timings)."""

    regime = table.regime
    lines = [
        f"problem={table.problem}",
        f"study={table.study_kind.value}",
        f"regime={regime.label}",
        f"expected_order={fmt17(regime.expected_order)}",
        f"band=[{fmt17(regime.lower)}, {fmt17(regime.upper)}]",
        f"fitted_order={_optional(table.fitted_order)}",
        f"verdict={table.verdict}",
        f"monotone={'yes' if table.monotone else 'no'}",
    ]
    if table.exact:
        lines.append("note=exact - no order fit")
    if table.log_factor_order is not None:
        lines.append(f"log_factor_order={fmt17(table.log_factor_order)}")
    if table.spot_check_ratio is not None:
        lines.append(f"temporal_spot_check_ratio={fmt17(table.spot_check_ratio)}")
    if table.order_reduction is not None:
        lines.append(f"order_reduction={fmt17(table.order_reduction)}")
        lines.append(f"reduction_verdict={table.reduction_verdict}")
    return lines


def table_csv(table: ConvergenceTable) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in [*table.rows, *table.transient_rows]:
        writer.writerow(
            (
                table.study_kind.value,
                table.problem,
                fmt17(row.h),
                fmt17(row.dt),
                fmt17(row.t),
                fmt17(row.error),
            )
        )
    for line in summary_lines(table):
        buffer.write(f"# {line}\n")
    return buffer.getvalue()


def summary_text(table: ConvergenceTable) -> str:
    """Human-readable summary; includes wall-clock time for information only."""

    lines = [f"{table.study_kind.value.capitalize()} study of {table.problem}", ""]
    width = max(len(table.parameter), 2)
    lines.append(f"{table.parameter:>{width}}  {'error':>24}  rate")
    previous: ConvergenceRow | None = None
    for row in table.rows:
        param = row.dt if table.study_kind is StudyKind.TEMPORAL else row.h
        rate = ""
        if previous is not None and previous.error > 0 and row.error > 0:
            prev_param = previous.dt if table.study_kind is StudyKind.TEMPORAL else previous.h
            rate = f"{math.log(previous.error / row.error) / math.log(prev_param / param):.3f}"
        lines.append(f"{param:>{width}.6g}  {row.error:>24.17g}  {rate}")
        previous = row
    lines.append("")
    lines.extend(summary_lines(table))
    lines.append(f"wall_seconds={table.wall_seconds:.2f}")
    return "\n".join(lines) + "\n"


def plot_data(table: ConvergenceTable) -> str:
    """Two columns (parameter, error) for a log-log plot."""

    lines = [f"# {table.parameter} error"]
    for row in table.rows:
        param = row.dt if table.study_kind is StudyKind.TEMPORAL else row.h
        lines.append(f"{fmt17(param)} {fmt17(row.error)}")
    return "\n".join(lines) + "\n"


def svg_loglog(xs: Sequence[float], ys: Sequence[float], *, title: str = "") -> str:
    """Minimal log-log polyline plot; points with nonpositive values are skipped."""

    points = [(math.log10(x), math.log10(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
    width, height = _SVG_SIZE
    m = _SVG_MARGIN
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{m}" y="{m}" width="{width - 2 * m}" height="{height - 2 * m}" '
        'fill="none" stroke="black"/>',
        f'<text x="{width / 2}" y="{m / 2}" text-anchor="middle">{title}</text>',
    ]
    if points:
        lx, ly = np.array(points).T
        span_x = max(float(np.ptp(lx)), 1e-12)
        span_y = max(float(np.ptp(ly)), 1e-12)
        sx = (lx - lx.min()) / span_x * (width - 2 * m) + m
        sy = height - m - (ly - ly.min()) / span_y * (height - 2 * m)
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(sx, sy))
        parts.append(f'<polyline points="{coords}" fill="none" stroke="steelblue"/>')
        parts.extend(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="steelblue"/>'
            for x, y in zip(sx, sy)
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_study(table: ConvergenceTable, out_dir: Path) -> list[Path]:
    """Write CSV, summary, plot data and SVG; returns the written paths."""

    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{table.problem}_{table.study_kind.value}"
    params = [row.dt if table.study_kind is StudyKind.TEMPORAL else row.h for row in table.rows]
    files = {
        out_dir / f"{stem}.csv": table_csv(table),
        out_dir / f"{stem}_summary.txt": summary_text(table),
        out_dir / f"{stem}_plot.dat": plot_data(table),
        out_dir / f"{stem}_plot.svg": svg_loglog(params, table.errors, title=stem),
    }
    for path, content in files.items():
        path.write_text(content, encoding="utf-8")
        logger.info("Wrote %s", path)
    return list(files)


def write_single_run(
    problem: str,
    h: float,
    result: IntegrationResult,
    tracker: NormTracker,
    out_dir: Path,
    nodes: np.ndarray,
    expand: Callable[[DofVector], np.ndarray],
) -> list[Path]:
    """Norm history CSV, summary, and one nodal snapshot file per recorded time."""

    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{problem}_single-run"
    dt = result.final_time / result.n_steps

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SINGLE_RUN_HEADER)
    for step, norm in enumerate(tracker.norms):
        writer.writerow(("single-run", problem, fmt17(h), fmt17(dt), fmt17(step * dt), fmt17(norm)))
    buffer.write(f"# final_l2_norm={fmt17(tracker.norms[-1])}\n")
    buffer.write(f"# growth_constant={fmt17(tracker.growth_constant)}\n")

    paths = {out_dir / f"{stem}.csv": buffer.getvalue()}
    paths[out_dir / f"{stem}_summary.txt"] = (
        f"Single run of {problem}\n\n"
        f"h={fmt17(h)}\ndt={fmt17(dt)}\nsteps={result.n_steps}\n"
        f"final_time={fmt17(result.final_time)}\n"
        f"final_l2_norm={fmt17(tracker.norms[-1])}\n"
        f"sup_l2_norm={fmt17(tracker.sup_norm)}\n"
        f"growth_constant={fmt17(tracker.growth_constant)}\n"
        f"wall_seconds={result.wall_seconds:.2f}\n"
    )
    for snap in result.snapshots:
        values = expand(snap.state)
        lines = [f"# t={fmt17(snap.time)} step={snap.step}"]
        lines.extend(
            " ".join(fmt17(c) for c in (*coords, value)) for coords, value in zip(nodes, values)
        )
        paths[out_dir / f"{stem}_t{snap.time:.6g}.dat"] = "\n".join(lines) + "\n"

    for path, content in paths.items():
        path.write_text(content, encoding="utf-8")
        logger.info("Wrote %s", path)
    return list(paths)
