"""
Result Files

CSV writers for suite tables, rate probes, error reports and histograms.

Every file starts with comment lines (``# ...``) carrying the fingerprint of
the configuration that produced it and every configuration value used,
followed by a header row. Values are written with Python's shortest
round-trip float repr, so identical runs give byte-identical files.
"""

import csv
import hashlib
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Mapping, Sequence

from qmc_dbdp.core.config import ExperimentConfig, resolve_config
from qmc_dbdp.evaluation.metrics import ErrorReport, Histogram, pointwise_histogram
from qmc_dbdp.evaluation.rates import RateProbeResult
from qmc_dbdp.evaluation.suite import CellResult, SuiteResult

logger = logging.getLogger(__name__)

SUITE_COLUMNS = ["problem", "d", "N", "m", "sampler", "n_runs", "mean_rel_l2", "std_rel_l2"]
RATE_COLUMNS = ["sampler", "m", "rmse"]
HISTOGRAM_COLUMNS = ["bin_left", "bin_right", "density"]
REPORT_COLUMNS = ["relative_l2", "stderr", "reference_stderr", "m_eval", "out_of_range_count"]

RATE_PROXY_NOTE = "fixed-parameter quadrature RMSE of the step risk (generalization error proxy)"


def fingerprint(data: Mapping[str, Any]) -> str:
    """SHA-256 of the canonical JSON of ``data``."""
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _flatten(data: Mapping[str, Any], prefix: str = "") -> List[tuple]:
    items = []
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            items.extend(_flatten(value, name + "."))
        elif isinstance(value, (list, tuple)) and any(isinstance(v, Mapping) for v in value):
            items.extend(_flatten({str(i): v for i, v in enumerate(value)}, name + "."))
        elif isinstance(value, (list, tuple)):
            items.append((name, " ".join(str(v) for v in value)))
        else:
            items.append((name, "null" if value is None else str(value)))
    return items


def provenance(data: Mapping[str, Any], notes: Sequence[str] = ()) -> List[str]:
    """
    Comment header for a result file.

    Args:
        data (Mapping[str, Any]): JSON-compatible settings that produced the file
        notes (Sequence[str]): Extra free-text comment lines
    """
    lines = [f"# config_fingerprint,{fingerprint(data)}"]
    lines.extend(f"# {note}" for note in notes)
    lines.extend(f"# config,{key},{value}" for key, value in _flatten(data))
    return lines


def config_provenance(config: ExperimentConfig, notes: Sequence[str] = ()) -> List[str]:
    """Comment header for files produced from an experiment configuration."""
    data = resolve_config(config).model_dump(mode="json")
    notes = list(notes)
    if config.experiment.scale == "full":
        notes.append("scale,full (long-running)")
    return provenance(data, notes)


def _write(path: str, header: Iterable[str], columns: Sequence[str], rows: Iterable[Sequence[Any]], trailer=()):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        for line in header:
            f.write(line + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
        writer.writerows(trailer)
    logger.info("Wrote %s", path)


def _number(value: float) -> str:
    return repr(float(value))


def suite_rows(suite: SuiteResult) -> List[List[str]]:
    return [
        [
            cell.problem,
            str(cell.d),
            str(cell.N),
            str(cell.m),
            cell.sampler,
            str(len(cell.runs)),
            _number(cell.mean),
            _number(cell.std),
        ]
        for cell in suite.cells
    ]


def write_suite_table(path: str, suite: SuiteResult, header: Sequence[str]):
    """
    Suite table with one row per cell.

    Incomplete cells and variance reduction factors follow the header as
    ``# incomplete,...`` and ``# variance_reduction,...`` comment lines.
    """
    lines = list(header)
    for cell in suite.cells:
        if not cell.complete:
            lines.append(
                f"# incomplete,{cell.problem},{cell.d},{cell.m},{cell.sampler},"
                f"{len(cell.runs)}/{cell.requested_runs}"
            )
    for d, m, factor in suite.variance_reduction():
        lines.append(f"# variance_reduction,{suite.problem},{d},{m},{_number(factor)}")
    _write(path, lines, SUITE_COLUMNS, suite_rows(suite))


def write_rate_probe(path: str, results: Mapping[str, RateProbeResult], header: Sequence[str]):
    """Rate-probe RMSE per (sampler, m); fitted slopes go to comment lines."""
    lines = list(header) + [f"# quantity,{RATE_PROXY_NOTE}"]
    rows = []
    for kind in sorted(results):
        result = results[kind]
        slope = "degenerate" if result.degenerate else _number(result.fitted_slope)
        lines.append(f"# fitted_slope,{kind},{slope}")
        lines.append(f"# oracle_value,{kind},{_number(result.oracle_value)}")
        rows.extend([kind, str(m), _number(r)] for m, r in zip(result.m_values, result.rmse_values))
    _write(path, lines, RATE_COLUMNS, rows)


def write_histogram(path: str, histogram: Histogram, header: Sequence[str]):
    """Density histogram with an ``out_of_range,<count>`` trailer line."""
    rows = [
        [_number(lo), _number(hi), _number(density)]
        for lo, hi, density in zip(histogram.edges[:-1], histogram.edges[1:], histogram.densities)
    ]
    _write(path, header, HISTOGRAM_COLUMNS, rows, trailer=[["out_of_range", str(histogram.out_of_range_count)]])


def write_error_report(path: str, report: ErrorReport, header: Sequence[str]):
    """Single-row summary of an error report."""
    row = [
        _number(report.relative_l2),
        _number(report.stderr),
        _number(report.reference_stderr),
        str(report.m_eval),
        str(report.out_of_range_count),
    ]
    _write(path, header, REPORT_COLUMNS, [row])


def histogram_name(cell: CellResult, which: str) -> str:
    return f"histogram_{cell.problem}_d{cell.d}_m{cell.m}_{cell.sampler}_{which}.csv"


def write_suite_outputs(
    directory: str, suite: SuiteResult, config: ExperimentConfig, histogram_fn=None
) -> Dict[str, str]:
    """
    Suite table plus best-run and worst-run histograms of every cell.

    Args:
        directory (str): Output directory
        suite (SuiteResult): Aggregated suite
        config (ExperimentConfig): Configuration that produced the suite
        histogram_fn: Builds a ``Histogram`` from pointwise errors

    Returns:
        Dict[str, str]: Written file paths keyed by a short label
    """
    ev = config.evaluation
    histogram_fn = histogram_fn or (
        lambda errors: pointwise_histogram(errors, tuple(ev.histogram_range), ev.histogram_bins)
    )
    header = config_provenance(config)
    written = {"table": os.path.join(directory, f"table_{suite.problem}.csv")}
    write_suite_table(written["table"], suite, header)

    for cell in suite.cells:
        for which, run in (("best", cell.best()), ("worst", cell.worst())):
            if run is None:
                continue
            path = os.path.join(directory, histogram_name(cell, which))
            notes = [f"run,{run.run},relative_l2,{_number(run.relative_l2)}"]
            write_histogram(path, histogram_fn(run.pointwise_errors), list(header) + [f"# {n}" for n in notes])
            written[f"{cell.d}/{cell.m}/{cell.sampler}/{which}"] = path
    return written
