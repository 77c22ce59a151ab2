"""Report records and byte-deterministic serialization.

Reports carry one row per check (name, lhs, rhs, ratio, stderr, verdict)
plus run metadata; identical (config, seed, version) inputs must serialize
to identical bytes, so JSON uses sorted keys and the shortest round-trip
float representation, and CSV columns are fixed.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from typing import Optional

from . import __version__

CSV_COLUMNS = ("name", "lhs", "rhs", "ratio", "stderr", "verdict")
SWEEP_CSV_COLUMNS = ("R", "lhs", "rhs", "ratio")


@dataclass(frozen=True)
class CheckRecord:
    name: str
    lhs: float
    rhs: float
    ratio: float
    stderr: float
    verdict: str

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "ratio": float(self.ratio),
            "stderr": float(self.stderr),
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class Report:
    command: str
    config_sha256: str
    seed: int
    checks: tuple
    verdict: str
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> dict:
        body = {
            "schema": 1,
            "tool": {"name": "bltk", "version": __version__},
            "command": self.command,
            "config_sha256": self.config_sha256,
            "seed": int(self.seed),
            "checks": [c.as_dict() for c in self.checks],
            "verdict": self.verdict,
        }
        body.update(self.extra)
        return body

    def to_json_bytes(self) -> bytes:
        text = json.dumps(self.as_dict(), sort_keys=True, indent=2,
                          allow_nan=False)
        return (text + "\n").encode("utf-8")

    def to_csv_bytes(self) -> bytes:
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        if self.command == "sweep" and "rows" in self.extra:
            writer.writerow(SWEEP_CSV_COLUMNS)
            for row in self.extra["rows"]:
                writer.writerow([repr(float(row["R"])), repr(float(row["lhs"])),
                                 repr(float(row["rhs"])),
                                 repr(float(row["ratio"]))])
        else:
            writer.writerow(CSV_COLUMNS)
            for c in self.checks:
                writer.writerow([c.name, repr(float(c.lhs)), repr(float(c.rhs)),
                                 repr(float(c.ratio)), repr(float(c.stderr)),
                                 c.verdict])
        return buf.getvalue().encode("utf-8")

    def to_bytes(self, fmt: str) -> bytes:
        if fmt == "json":
            return self.to_json_bytes()
        if fmt == "csv":
            return self.to_csv_bytes()
        raise ValueError(f"unknown format {fmt!r}")


def config_hash(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def overall_verdict(checks) -> str:
    return "pass" if all(c.verdict in ("pass", "finite") for c in checks) \
        else "fail"


def make_check(name: str, lhs: float, rhs: float, stderr: float,
               passed: bool, ratio: Optional[float] = None) -> CheckRecord:
    if ratio is None:
        ratio = lhs / rhs if rhs not in (0, 0.0) else (1.0 if lhs == 0 else 0.0)
    return CheckRecord(name=name, lhs=float(lhs), rhs=float(rhs),
                       ratio=float(ratio), stderr=float(stderr),
                       verdict="pass" if passed else "fail")
