"""
CSV files for convergence histories and oracle reports.

Floats are written with repr() so the files reload bitwise and are
byte-identical for identical runs.
"""

import csv
import os
from typing import List, Union

from blockminres.core.exceptions import ParseError
from blockminres.solver.history import ConvergenceHistory, HistoryRow, TerminationReason
from blockminres.verify.oracle import OracleReport
from blockminres.utils.logging_config import get_logger

logger = get_logger("io.csv")

PathLike = Union[str, os.PathLike]


def convergence_header(labels: List[str], monitored: bool = True) -> List[str]:
    header = ["iter", "eta", "eta_rel"]
    if monitored:
        header += [f"eta_{label}" for label in labels]
        header += [f"mu_{label}" for label in labels]
    return header


def write_convergence_csv(history: ConvergenceHistory, path: PathLike) -> None:
    """
    Write iter, eta, eta_rel, eta_<label>..., mu_<label>... per history row.

    Unmonitored histories carry only the first three columns.
    """
    path = os.fspath(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(convergence_header(history.labels, history.monitored))
        for row in history.rows:
            values = [str(row.j), repr(row.eta), repr(row.eta_rel)]
            if history.monitored:
                values += [repr(v) for v in row.eta_blocks]
                values += [repr(v) for v in row.mu]
            writer.writerow(values)
    logger.info(f"Wrote {len(history.rows)} history rows to {path}")


def read_convergence_csv(path: PathLike, reason: TerminationReason = TerminationReason.CONVERGED) -> ConvergenceHistory:
    """
    Reload a history written by write_convergence_csv.

    The CSV does not hold the termination reason; pass it in (run.yaml has it).

    Raises:
        ParseError: On a malformed header or row.
    """
    path = os.fspath(path)
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty CSV file", path, 1) from None
        if header[:3] != ["iter", "eta", "eta_rel"]:
            raise ParseError(f"unexpected header {header}", path, 1)
        block_columns = header[3:]
        if len(block_columns) % 2:
            raise ParseError("eta_ and mu_ columns do not pair up", path, 1)
        k = len(block_columns) // 2
        labels = [c[len("eta_"):] for c in block_columns[:k]]
        if block_columns[:k] != [f"eta_{l}" for l in labels] or block_columns[k:] != [f"mu_{l}" for l in labels]:
            raise ParseError(f"unexpected block columns {block_columns}", path, 1)

        rows = []
        for number, record in enumerate(reader, start=2):
            if len(record) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(record)}", path, number)
            try:
                values = [float(v) for v in record[1:]]
                j = int(record[0])
            except ValueError:
                raise ParseError(f"non-numeric field in {record}", path, number) from None
            rows.append(HistoryRow(
                j=j,
                eta=values[0],
                eta_rel=values[1],
                eta_blocks=tuple(values[2:2 + k]),
                mu=tuple(values[2 + k:]),
            ))
    if not rows:
        raise ParseError("history has no rows", path)
    return ConvergenceHistory(labels=labels, rows=rows, reason=reason, monitored=k > 0)


def write_oracle_csv(report: OracleReport, path: PathLike) -> None:
    """One line per compared row: progressive and explicit norms, deviations."""
    path = os.fspath(path)
    header = ["iter", "eta", "eta_explicit"]
    for label in report.labels:
        header += [f"eta_{label}", f"explicit_{label}", f"deviation_{label}", f"relative_{label}"]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in report.rows:
            values = [str(row.j), repr(row.progressive_eta), repr(row.explicit_eta)]
            if row.deviation_blocks:
                for p, e, d, r in zip(row.progressive_blocks, row.explicit_blocks, row.deviation_blocks, row.relative_blocks):
                    values += [repr(p), repr(e), repr(d), repr(r)]
            else:
                for e in row.explicit_blocks:
                    values += ["", repr(e), "", ""]
            writer.writerow(values)
    logger.info(f"Wrote oracle report to {path}")
