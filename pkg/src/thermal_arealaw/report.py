"""CSV and JSON emission of result records.

CSV column order (frozen)::

    suite, model, beta, window, region, pass, truncated, converged, skipped,
    tolerance, quantities, slacks, note, error

``quantities`` and ``slacks`` are ``name=value`` pairs joined by ``;``. Floats are
written with 17 significant digits; ``inf`` and ``nan`` are spelled out. The first
line of each file states the units.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, TextIO

from .runner import ResultRecord

UNITS = "entropy_nats, beta_inverse_energy"
UNITS_BITS = "entropy_bits (quantities; slacks in nats), beta_inverse_energy"
COLUMNS = (
    "suite",
    "model",
    "beta",
    "window",
    "region",
    "pass",
    "truncated",
    "converged",
    "skipped",
    "tolerance",
    "quantities",
    "slacks",
    "note",
    "error",
)
ENTROPIC_PREFIXES = ("I_", "S_", "D_")


def fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def rescale_bits(records: list[ResultRecord]) -> list[ResultRecord]:
    """Copy of ``records`` with entropic quantities (names ``I_*``, ``S_*``, ``D_*``) in bits.

    Slacks stay in nats so pass/fail is unaffected by the display unit.
    """
    out = []
    for r in records:
        conv = lambda d: {k: (v / math.log(2) if k.startswith(ENTROPIC_PREFIXES) else v) for k, v in d.items()}
        out.append(
            ResultRecord(r.suite, r.model, r.beta, r.window, r.region, conv(r.quantities), dict(r.slacks),
                         dict(r.flags), r.tolerance, r.note, r.error)
        )
    return out


def _pairs(d: dict[str, float]) -> str:
    return ";".join(f"{k}={fmt(v)}" for k, v in d.items())


def _unpairs(s: str) -> dict[str, float]:
    if not s:
        return {}
    return {k: float(v) for k, v in (item.split("=", 1) for item in s.split(";"))}


def _row(r: ResultRecord) -> list[str]:
    return [
        r.suite,
        r.model,
        fmt(r.beta),
        str(r.window),
        r.region,
        str(r.passed).lower(),
        str(r.flags.get("truncated", False)).lower(),
        str(r.flags.get("converged", True)).lower(),
        str(r.flags.get("skipped", False)).lower(),
        fmt(r.tolerance),
        _pairs(r.quantities),
        _pairs(r.slacks),
        r.note,
        r.error,
    ]


def to_dict(r: ResultRecord) -> dict[str, Any]:
    return {
        "suite": r.suite,
        "model": r.model,
        "beta": fmt(r.beta) if not math.isfinite(r.beta) else r.beta,
        "window": r.window,
        "region": r.region,
        "pass": r.passed,
        "flags": dict(r.flags),
        "tolerance": r.tolerance,
        "quantities": {k: (v if math.isfinite(v) else fmt(v)) for k, v in r.quantities.items()},
        "slacks": {k: (v if math.isfinite(v) else fmt(v)) for k, v in r.slacks.items()},
        "note": r.note,
        "error": r.error,
    }


def from_dict(d: dict[str, Any]) -> ResultRecord:
    return ResultRecord(
        d["suite"], d["model"], float(d["beta"]), int(d["window"]), d["region"],
        {k: float(v) for k, v in d["quantities"].items()},
        {k: float(v) for k, v in d["slacks"].items()},
        dict(d["flags"]), float(d["tolerance"]), d.get("note", ""), d.get("error", ""),
    )


def write_csv(records: list[ResultRecord], fh: TextIO, units: str = UNITS) -> None:
    fh.write(f"# units: {units}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow(_row(r))


def read_csv(fh: TextIO) -> list[ResultRecord]:
    lines = [ln for ln in fh if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        flags = {k: row[k] == "true" for k in ("truncated", "converged", "skipped")}
        out.append(
            ResultRecord(row["suite"], row["model"], float(row["beta"]), int(row["window"]), row["region"],
                         _unpairs(row["quantities"]), _unpairs(row["slacks"]), flags,
                         float(row["tolerance"]), row["note"], row["error"])
        )
    return out


def write_json(records: list[ResultRecord], fh: TextIO, units: str = UNITS) -> None:
    """``{"units": ..., "records": [...]}``; floats round-trip exactly through Python's repr."""
    json.dump({"units": units, "records": [to_dict(r) for r in records]}, fh, indent=1)
    fh.write("\n")


def read_json(fh: TextIO) -> list[ResultRecord]:
    return [from_dict(d) for d in json.load(fh)["records"]]


def emit(records: list[ResultRecord], fmt_name: str = "csv", path: str | None = None, bits: bool = False) -> str:
    """Serialize to ``path`` (or return the text when ``path`` is None). ``OSError`` propagates."""
    if bits:
        records = rescale_bits(records)
    units = UNITS_BITS if bits else UNITS
    buf = io.StringIO()
    if fmt_name == "csv":
        write_csv(records, buf, units)
    elif fmt_name == "json":
        write_json(records, buf, units)
    else:
        raise ValueError(f"unknown format {fmt_name!r}")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
