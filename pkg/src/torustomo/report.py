"""Experiment reports: typed rows, margins, CSV and JSON summary output.

Every asserted inequality row carries both sides and its margin; a report
passes iff every margin is nonnegative.  CSV output uses repr-formatted
floats so runs with a fixed seed are bit-reproducible.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


@dataclass
class Report:
    experiment: str
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add_info(self, case, **cols):
        """Informational row, no verdict."""
        self.rows.append({"case": case, "check": "info", "passed": "", "margin": "", **cols})

    def check_ge(self, case, lhs, rhs, tol=0.0, **extra):
        """Assert lhs >= rhs - tol; margin is lhs - rhs."""
        margin = lhs - rhs
        ok = margin >= -tol
        self.rows.append({"case": case, "check": ">=", "lhs": lhs, "rhs": rhs,
                          "margin": margin, "passed": ok, **extra})
        return ok

    def check_le(self, case, lhs, rhs, tol=0.0, **extra):
        """Assert lhs <= rhs + tol; margin is rhs - lhs."""
        margin = rhs - lhs
        ok = margin >= -tol
        self.rows.append({"case": case, "check": "<=", "lhs": lhs, "rhs": rhs,
                          "margin": margin, "passed": ok, **extra})
        return ok

    def check_eq(self, case, lhs, rhs, **extra):
        """Exact (integer or identical float) equality."""
        ok = lhs == rhs
        margin = 0.0 if ok else -abs(float(lhs) - float(rhs))
        self.rows.append({"case": case, "check": "==", "lhs": lhs, "rhs": rhs,
                          "margin": margin, "passed": ok, **extra})
        return ok

    def check_close(self, case, lhs, rhs, rel_tol, abs_floor=1e-12, **extra):
        """Relative agreement |lhs - rhs| <= rel_tol * |rhs|, absolute below the floor."""
        err = abs(lhs - rhs)
        if abs(rhs) > abs_floor:
            rel = err / abs(rhs)
            margin = rel_tol - rel
        else:
            margin = rel_tol - err
        ok = margin >= 0.0
        self.rows.append({"case": case, "check": "close", "lhs": lhs, "rhs": rhs,
                          "margin": margin, "passed": ok, "rel_tol": rel_tol, **extra})
        return ok

    def check_true(self, case, condition, **extra):
        ok = bool(condition)
        self.rows.append({"case": case, "check": "bool", "lhs": ok, "rhs": True,
                          "margin": 0.0 if ok else -1.0, "passed": ok, **extra})
        return ok

    @property
    def passed(self):
        return all(r["passed"] is not False for r in self.rows)

    @property
    def worst_margin(self):
        margins = [r["margin"] for r in self.rows if isinstance(r.get("margin"), (int, float)) and r["margin"] != ""]
        return float(min(margins)) if margins else math.inf

    def summary(self):
        return {
            "experiment": self.experiment,
            "pass": self.passed,
            "rows": len(self.rows),
            "worst_margin": self.worst_margin,
            "meta": self.meta,
        }

    def write(self, out_dir):
        """Write <experiment>.csv and <experiment>.summary.json into out_dir."""
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, f"{self.experiment}.csv")
        columns = []
        for row in self.rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
        with open(csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns, restval="")
            writer.writeheader()
            for row in self.rows:
                writer.writerow({k: _fmt(v) for k, v in row.items()})
        json_path = os.path.join(out_dir, f"{self.experiment}.summary.json")
        with open(json_path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return csv_path, json_path
