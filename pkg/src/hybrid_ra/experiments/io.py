"""Result tables and run metadata on disk.

Floats are written with ``repr`` so that reading a file back yields the exact
values that were written.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict
from pathlib import Path

from ..exceptions import InvalidInputError
from .runner import ResultRow

CSV_HEADER = ["scheme", "R", "num_preambles", "Na", "trials", "mean_success", "ci95", "mean_urllc_success"]
FIG2_HEADER = ["seed", "model", "test_rmse", "coverage", "best_epoch"]


def _cell(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def write_rows_csv(rows, path, header):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            d = asdict(row)
            w.writerow([_cell(d[k]) for k in header])


def write_results_csv(rows, path):
    write_rows_csv(rows, path, CSV_HEADER)


def read_results_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise InvalidInputError(f"{path}: unexpected header {header}")
        return [
            ResultRow(s, float(R), int(tp), int(na), int(tr), float(m), float(ci), float(mu))
            for s, R, tp, na, tr, m, ci, mu in reader
        ]


def write_results_json(rows, path):
    with open(path, "w") as fh:
        json.dump([asdict(r) for r in rows], fh, indent=1)
        fh.write("\n")


def read_results_json(path):
    with open(path) as fh:
        return [ResultRow(**d) for d in json.load(fh)]


def build_id():
    """Content hash of the installed package sources, git-style short form."""
    root = Path(__file__).resolve().parent.parent
    h = hashlib.sha1()
    for p in sorted(root.rglob("*.py")):
        h.update(p.relative_to(root).as_posix().encode())
        h.update(p.read_bytes())
    return h.hexdigest()[:12]


def write_metadata(path, spec_dict, extra=None):
    doc = {"build": build_id(), "spec": spec_dict}
    doc.update(extra or {})
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
