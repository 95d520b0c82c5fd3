"""Delimited output and run configuration.

CSV output follows RFC 4180 conventions: header row, comma separated,
decimal point.  Config files are plain text, one ``key = value`` per line;
blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .errors import DomainError


def rows_to_csv(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def write_csv(path, rows: Sequence[Sequence[str]]) -> None:
    Path(path).write_text(rows_to_csv(rows), encoding="utf-8")


def check_rows_csv(check_rows) -> List[List[str]]:
    out = [["check", "param_json", "value", "bound", "pass"]]
    out.extend(r.csv() for r in check_rows)
    return out


@dataclass
class RunConfig:
    """Run parameters shared by the CLI commands."""

    slope: str = "2"
    seed: int = 0
    outdir: Optional[str] = None
    depth: int = 64
    burn: int = 64
    tol: float = 1e-9
    tail_depth: int = 8

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        cfg = cls()
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (part.strip() for part in line.split("=", 1))
            if not hasattr(cfg, key):
                raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
            current = getattr(cfg, key)
            if isinstance(current, bool):
                setattr(cfg, key, val.lower() in ("1", "true", "yes"))
            elif isinstance(current, int):
                setattr(cfg, key, int(val))
            elif isinstance(current, float):
                setattr(cfg, key, float(val))
            else:
                setattr(cfg, key, val)
        return cfg

    def as_dict(self) -> Dict[str, object]:
        return {
            "slope": self.slope,
            "seed": self.seed,
            "outdir": self.outdir,
            "depth": self.depth,
            "burn": self.burn,
            "tol": self.tol,
            "tail_depth": self.tail_depth,
        }
