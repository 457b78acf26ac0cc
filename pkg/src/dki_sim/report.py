"""CSV output: ``#`` comment header, comma separated, floats at 17 digits."""

from __future__ import annotations

import csv
import io
import os


def fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def render_csv(columns, rows, comments=()):
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


class OutputSet:
    """Tracks files written by one command; removes them all if the command fails."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.paths = []

    def __enter__(self):
        os.makedirs(self.out_dir, exist_ok=True)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            for p in self.paths:
                if os.path.exists(p):
                    os.remove(p)
        return False

    def path(self, name):
        p = os.path.join(self.out_dir, name)
        self.paths.append(p)
        return p

    def write_csv(self, name, columns, rows, comments=()):
        p = self.path(name)
        with open(p, "w", newline="") as fh:
            fh.write(render_csv(columns, rows, comments))
        return p
