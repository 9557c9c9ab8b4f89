"""Text formats for graphs, label vectors and numeric tables.

Edge list::

    # comment lines start with '#'
    <n> <S> <directed 0|1>
    <modality> <i> <j>        # one line per edge, 0-based indices

Undirected graphs list each edge once with ``i < j``.

Dense::

    <n> <S> <directed 0|1>
    <n rows of n space-separated 0/1 values>   # modality 0
    <blank line>
    ...                                         # modality 1, ...

Labels: one integer per line. Tables: comma-separated with a header row;
floats are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .sampler import GraphSample


def _data_lines(path):
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                yield line


def write_edgelist(sample: GraphSample, path) -> None:
    with open(path, "w") as fh:
        fh.write("# blockspec edge list: n S directed / modality i j\n")
        fh.write(f"{sample.n} {sample.S} {int(sample.directed)}\n")
        for s, A in enumerate(sample.adjacency):
            src = A if sample.directed else np.triu(A, 1)
            for i, j in zip(*np.nonzero(src)):
                fh.write(f"{s} {i} {j}\n")


def read_edgelist(path, tau=None) -> GraphSample:
    lines = _data_lines(path)
    n, S, directed = (int(x) for x in next(lines).split())
    mats = [np.zeros((n, n), dtype=np.uint8) for _ in range(S)]
    for line in lines:
        s, i, j = (int(x) for x in line.split())
        mats[s][i, j] = 1
        if not directed:
            mats[s][j, i] = 1
    return GraphSample(_tau_or_blank(tau, n), tuple(mats), bool(directed))


def write_dense(sample: GraphSample, path) -> None:
    with open(path, "w") as fh:
        fh.write("# blockspec dense: n S directed / n rows per modality\n")
        fh.write(f"{sample.n} {sample.S} {int(sample.directed)}\n")
        for s, A in enumerate(sample.adjacency):
            if s:
                fh.write("\n")
            for row in A:
                fh.write(" ".join(map(str, row.tolist())) + "\n")


def read_dense(path, tau=None) -> GraphSample:
    lines = list(_data_lines(path))
    n, S, directed = (int(x) for x in lines[0].split())
    rows = np.array([[int(v) for v in line.split()] for line in lines[1:]], dtype=np.uint8).reshape(S, n, n)
    return GraphSample(_tau_or_blank(tau, n), tuple(rows), bool(directed))


def read_graph(path, tau=None) -> GraphSample:
    """Read either format, recognized by the marker comment ``write_*`` emits
    or, failing that, by the width of the first data row."""
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("# blockspec dense"):
        return read_dense(path, tau)
    if first.startswith("# blockspec edge list"):
        return read_edgelist(path, tau)
    lines = _data_lines(path)
    next(lines)
    row = next(lines, None)
    if row is not None and len(row.split()) != 3:
        return read_dense(path, tau)
    return read_edgelist(path, tau)


def write_graph(sample: GraphSample, path, fmt: str = "edgelist") -> None:
    {"edgelist": write_edgelist, "dense": write_dense}[fmt](sample, path)


def _tau_or_blank(tau, n):
    if tau is None:
        return np.full(n, -1, dtype=np.int64)
    tau = np.asarray(tau, dtype=np.int64)
    if tau.shape != (n,):
        raise ValueError(f"label vector has length {tau.shape[0]}, graph has {n} vertices")
    return tau


def write_labels(labels, path) -> None:
    np.savetxt(path, np.asarray(labels, dtype=np.int64), fmt="%d")


def read_labels(path) -> np.ndarray:
    return np.loadtxt(path, dtype=np.int64, ndmin=1)


def write_matrix(Z, path, header: Sequence[str] | None = None) -> None:
    """Numeric table at full precision (``%.17g`` round-trips float64)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    if header is None:
        header = [f"z{j}" for j in range(Z.shape[1])]
    np.savetxt(path, Z, fmt="%.17g", delimiter=",", header=",".join(header), comments="")


def read_matrix(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(format_value(x) for x in v)
    return str(v)


def write_table(rows: Iterable[Mapping], path, columns: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(c)) for c in columns])


def read_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
