"""CSV and parameter-file persistence.

Every CSV starts with one ``# `` line holding the full parameter set and the
package version as ``key=value`` pairs, then the column header, then rows
written with 17 significant digits so values round-trip exactly.  Timestamps
go to ``params.txt`` only, so CSV payloads are byte-identical across reruns.
"""
from __future__ import annotations

import os
import time
from pathlib import Path

import numpy as np

from . import __version__

OUTDIR_ENV = "KSLAB_OUTDIR"


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (list, tuple)):
        return ";".join(_fmt(v) for v in value)
    return str(value).replace(" ", "_")


def header_line(params: dict) -> str:
    items = [f"kslab_version={__version__}"] + [f"{k}={_fmt(v)}" for k, v in params.items()]
    return "# " + " ".join(items)


def write_csv(path, params: dict, columns: str, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        fh.write(header_line(params) + "\n")
        fh.write(columns + "\n")
        for row in rows:
            fh.write(row + "\n")
    return path


def columns_csv(path, params: dict, **cols) -> Path:
    names = ",".join(cols)
    data = [np.asarray(c, float) for c in cols.values()]
    rows = (",".join(f"{x:.17g}" for x in row) for row in zip(*data))
    return write_csv(path, params, names, rows)


def read_csv(path) -> tuple[dict, list[str], np.ndarray]:
    """Parameters from the header line, column names, and the data as a 2-D array."""
    with Path(path).open() as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ValueError(f"{path}: missing parameter header")
        params = dict(item.split("=", 1) for item in first[2:].split())
        names = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return params, names, data


def output_root(explicit: str | None = None) -> Path:
    return Path(explicit or os.environ.get(OUTDIR_ENV) or "kslab-out")


def make_run_dir(root: Path, command: str) -> Path:
    """``<root>/<command>-<timestamp>/``, suffixed if a run already claimed that second."""
    stamp = time.strftime("%Y%m%dT%H%M%S")
    base = Path(root) / f"{command}-{stamp}"
    path, k = base, 1
    while path.exists():
        path = base.with_name(f"{base.name}-{k}")
        k += 1
    path.mkdir(parents=True)
    return path


def write_params(run_dir: Path, command: str, params: dict) -> Path:
    lines = [f"# kslab {__version__} {command} {time.strftime('%Y-%m-%dT%H:%M:%S')}"]
    lines += [f"{k} = {_fmt(v)}" for k, v in params.items()]
    path = run_dir / "params.txt"
    path.write_text("\n".join(lines) + "\n")
    return path
