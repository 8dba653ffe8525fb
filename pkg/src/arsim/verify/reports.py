"""Report records shared by every check, with JSON and CSV projections."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

PASS, FAIL, INFORMATIONAL = "pass", "fail", "informational"
UPPER, LOWER = "upper", "lower"
Z = 3.0


def decide(estimate: float, stderr: float, bound: float, kind: str) -> str:
    """Verdict at ``Z`` standard errors against an upper or lower bound claim."""
    if kind == UPPER:
        return PASS if estimate + Z * stderr <= bound else FAIL
    if kind == LOWER:
        return PASS if estimate - Z * stderr >= bound else FAIL
    raise ValueError(f"unknown claim kind {kind!r}")


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item"):
        return value.item()
    return value


@dataclass
class LemmaReport:
    lemma_id: str
    params: dict
    estimate: float
    stderr: float
    bound: float
    kind: str
    verdict: str
    trials: int
    seed: str
    method: str = "monte_carlo"
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict != FAIL

    def to_dict(self) -> dict:
        return _clean(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self) -> dict:
        return {"id": self.lemma_id, "params": format_params(self.params),
                "estimate": repr(float(self.estimate)), "stderr": repr(float(self.stderr)),
                "bound": repr(float(self.bound)), "kind": self.kind, "verdict": self.verdict,
                "method": self.method, "trials": self.trials, "seed": self.seed}


@dataclass
class HybridStepReport:
    step: str
    params: dict
    estimate: float
    stderr: float
    bound: float
    method: str
    verdict: str
    trials: int = 0
    seed: str = ""
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict != FAIL

    def to_dict(self) -> dict:
        return _clean(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self) -> dict:
        return {"id": self.step, "params": format_params(self.params),
                "estimate": repr(float(self.estimate)), "stderr": repr(float(self.stderr)),
                "bound": repr(float(self.bound)), "kind": UPPER, "verdict": self.verdict,
                "method": self.method, "trials": self.trials, "seed": self.seed}


CSV_COLUMNS = ["id", "params", "estimate", "stderr", "bound", "kind", "verdict", "method",
               "trials", "seed"]


def format_params(params: dict) -> str:
    return ";".join(f"{k}={params[k]}" for k in sorted(params))


def to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.csv_row())
    return buf.getvalue()
