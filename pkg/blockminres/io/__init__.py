"""
File formats: Matrix Market, partition files, convergence CSV and run
directories.
"""

from blockminres.io.convergence_csv import (
    convergence_header,
    read_convergence_csv,
    write_convergence_csv,
    write_oracle_csv,
)
from blockminres.io.matrix_market import read_matrix_market, read_vector, write_matrix_market, write_vector
from blockminres.io.partition_file import parse_partition, read_partition, write_partition
from blockminres.io.run_dir import (
    load_iterates,
    read_manifest,
    save_iterates,
    write_manifest,
    write_problem,
)

__all__ = [
    "convergence_header",
    "read_convergence_csv",
    "write_convergence_csv",
    "write_oracle_csv",
    "read_matrix_market",
    "read_vector",
    "write_matrix_market",
    "write_vector",
    "parse_partition",
    "read_partition",
    "write_partition",
    "load_iterates",
    "read_manifest",
    "save_iterates",
    "write_manifest",
    "write_problem",
]
