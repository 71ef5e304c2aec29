"""CSV serialization of matrices, states, and experiment records.

Formats (all plain text, spreadsheet-friendly):

* matrix: one header line ``n,rows,cols`` then the entries, one CSV line
  per row;
* state: a header line with the mode count ``n``, one CSV line with the
  mean vector, then the 2n covariance rows;
* records: a ``# schema=1`` comment line, a header row, then one row per
  (cell, trial) with repr-formatted floats so reruns are byte-identical.
"""

import io

import numpy as np

from .errors import DomainError
from .states import GaussianState

RECORD_SCHEMA = 1
RECORD_FIELDS = (
    "experiment",
    "strategy",
    "n",
    "E",
    "eps",
    "N",
    "trial",
    "error",
    "error_metric",
    "success",
    "branch",
    "seed",
    "wall_ms",
)


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def dump_matrix(matrix):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise DomainError("expected a 2-D matrix")
    n = matrix.shape[0] // 2 if matrix.shape[0] == matrix.shape[1] else 0
    out = io.StringIO()
    out.write(f"{n},{matrix.shape[0]},{matrix.shape[1]}\n")
    for row in matrix:
        out.write(",".join(repr(float(x)) for x in row) + "\n")
    return out.getvalue()


def load_matrix(text):
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    header = lines[0].split(",")
    if len(header) != 3:
        raise DomainError("matrix header must be 'n,rows,cols'")
    rows, cols = int(header[1]), int(header[2])
    if len(lines) - 1 != rows:
        raise DomainError(f"expected {rows} matrix rows, found {len(lines) - 1}")
    data = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    matrix = np.array(data)
    if matrix.shape != (rows, cols):
        raise DomainError("matrix body does not match the declared shape")
    return matrix


def save_matrix(path, matrix):
    with open(path, "w") as fh:
        fh.write(dump_matrix(matrix))


def dump_state(state):
    out = io.StringIO()
    out.write(f"{state.n}\n")
    out.write(",".join(repr(float(x)) for x in state.mu) + "\n")
    for row in state.sigma:
        out.write(",".join(repr(float(x)) for x in row) + "\n")
    return out.getvalue()


def load_state(text):
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    n = int(lines[0])
    mu = np.array([float(x) for x in lines[1].split(",")])
    if len(lines) != 2 + 2 * n:
        raise DomainError(f"expected {2 * n} covariance rows for n = {n}")
    sigma = np.array([[float(x) for x in ln.split(",")] for ln in lines[2:]])
    return GaussianState(mu, sigma)


def save_state(path, state):
    with open(path, "w") as fh:
        fh.write(dump_state(state))


def load_state_file(path):
    with open(path) as fh:
        return load_state(fh.read())


def dump_records(records):
    """Serialize experiment records; output is a pure function of the rows."""
    out = io.StringIO()
    out.write(f"# schema={RECORD_SCHEMA}\n")
    out.write(",".join(RECORD_FIELDS) + "\n")
    for rec in records:
        out.write(",".join(_fmt(rec[f]) for f in RECORD_FIELDS) + "\n")
    return out.getvalue()


def save_records(path, records):
    with open(path, "w") as fh:
        fh.write(dump_records(records))


def load_records(text):
    lines = text.strip().splitlines()
    if not lines or not lines[0].startswith("# schema="):
        raise DomainError("missing '# schema=' header line")
    header = lines[1].split(",")
    rows = []
    for ln in lines[2:]:
        parts = ln.split(",")
        rows.append(dict(zip(header, parts)))
    return rows
