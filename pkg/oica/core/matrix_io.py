"""Matrix and table files (:mod:`oica.core.matrix_io`)
=====================================================

Bases and data matrices are stored as CSV files, one matrix row per line,
with an optional header line ``# k=<k> n=<n>``. All the writers in this
module are atomic: the content is written to a temporary file in the target
directory, which is then renamed.

.. autofunction:: atomic_write

.. autofunction:: write_matrix_csv

.. autofunction:: read_matrix_csv

.. autofunction:: write_table_csv

.. autofunction:: write_json

"""

import os
import json
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from oica.core.errors import ShapeMismatch

__all__ = [
    "atomic_write",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_table_csv",
    "write_json",
]


@contextmanager
def atomic_write(path, mode="w"):
    """Context manager yielding a file object; on success the file is
    moved to ``path``, on failure it is removed.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmpname = tempfile.mkstemp(dir=path.parent, prefix="." + path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as f:
            yield f
        os.replace(tmpname, path)
    except BaseException:
        try:
            os.remove(tmpname)
        except FileNotFoundError:
            pass
        raise


def write_matrix_csv(path, matrix):
    """Writes a 2D array with its ``# k=<k> n=<n>`` header.

    :param path: output file
    :type path: str or :class:`pathlib.Path`
    :param matrix: 2D array
    :type matrix: :class:`numpy.ndarray`
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    k, n = matrix.shape
    with atomic_write(path) as f:
        f.write("# k={:d} n={:d}\n".format(k, n))
        np.savetxt(f, matrix, delimiter=",", fmt="%.17g")


def read_matrix_csv(path):
    """Reads a matrix written by :func:`write_matrix_csv`, or a plain
    comma-separated file without header.

    :raises ShapeMismatch: if the header disagrees with the content
    :rtype: :class:`numpy.ndarray`
    """
    path = Path(path)
    header = None
    with path.open() as f:
        first = f.readline().strip()
    if first.startswith("#"):
        fields = dict(
            item.split("=", 1) for item in first.lstrip("#").split() if "=" in item
        )
        if "k" in fields and "n" in fields:
            header = (int(fields["k"]), int(fields["n"]))
    matrix = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if header is not None and matrix.shape != header:
        raise ShapeMismatch(
            "{:}: header says {:}, content is {:}".format(path, header, matrix.shape)
        )
    return matrix


def write_table_csv(path, columns, names, fmt="%.17g"):
    """Writes equally long columns with a header line of column names.

    :param columns: sequence of 1D arrays
    :param names: column names
    :param fmt: format (single or per column) passed to :func:`numpy.savetxt`
    """
    table = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with atomic_write(path) as f:
        f.write(",".join(names) + "\n")
        np.savetxt(f, table, delimiter=",", fmt=fmt)


def write_json(path, content):
    """Writes a JSON document with sorted keys (stable output)."""
    with atomic_write(path) as f:
        json.dump(content, f, indent=2, sort_keys=True)
        f.write("\n")
