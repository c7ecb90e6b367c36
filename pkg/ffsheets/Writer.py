#   Copyright (c) 2026 ffsheets developers
#  #
#   This module is part of ffsheets.
#  #
#   ffsheets is licensed under the BSD-3-Clause license.
#   For further information see LICENSE in the project's root directory.
#

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Union

import pandas as pd

from ffsheets.auxiliary import get_logger, json_default

log = get_logger(__name__)

# Round-trip formatting for every float written to CSV
FLOAT_FORMAT = "%.17g"


class ReportWriter:
    def __init__(self, out_dir: Union[str, Path]):
        """
        Collects the data files of one run in an output directory.

        :param out_dir: Output directory, created if missing.
        """
        self.out_dir = Path(out_dir)
        os.makedirs(self.out_dir, exist_ok=True)
        self.outputs: List[str] = []

    def _register(self, name: str) -> Path:
        path = self.out_dir / name
        if str(path) not in self.outputs:
            self.outputs.append(str(path))
        return path

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        path = self._register(name)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        log.info(f"Wrote {len(frame)} rows to {path}.")
        return path

    def write_json(self, name: str, obj) -> Path:
        path = self._register(name)
        with open(path, "w", encoding="utf-8") as file:
            json.dump(obj, file, sort_keys=True, indent=2, default=json_default)
            file.write("\n")
        log.info(f"Wrote {path}.")
        return path


@dataclass
class RunReport:
    """
    Summary of one CLI run. Written as run_report.json next to the data files; it carries the
    wall time and is therefore not byte-stable between runs.
    """
    command: str
    config_digest: str
    version: str
    wall_time: float = 0.0
    outputs: List[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    excluded_points: int = 0
    status: str = "ok"

    def to_dict(self) -> dict:
        return {"command": self.command, "config_digest": self.config_digest,
                "version": self.version, "wall_time": self.wall_time,
                "outputs": list(self.outputs), "diagnostics": self.diagnostics,
                "excluded_points": self.excluded_points, "status": self.status}

    def summary(self) -> List[tuple]:
        """Flat (key, value) rows for console tables."""
        rows = [("command", self.command), ("status", self.status),
                ("config digest", self.config_digest[:16]),
                ("wall time [s]", f"{self.wall_time:.2f}"),
                ("excluded points", self.excluded_points)]
        rows += [(key, value) for key, value in sorted(self.diagnostics.items())
                 if not isinstance(value, (dict, list))]
        rows += [("output", path) for path in self.outputs]
        return rows

    def write(self, writer: ReportWriter) -> Path:
        self.outputs = [path for path in writer.outputs if not path.endswith("run_report.json")]
        return writer.write_json("run_report.json", self.to_dict())
