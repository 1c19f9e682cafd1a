"""File formats: counts CSV, HOM scan CSV, versioned JSON reports.

Counts CSV (UTF-8, comma separated, ``#`` comment lines ignored)::

    signature,a_deg,b_deg,outcome_a,outcome_b,fourfold,twofold_1,twofold_4,pulses
    psi-,0,22.5,+1,+1,235,91000,90500,

One row per measurement. ``twofold_1``/``twofold_4`` and ``pulses`` may be
left empty. Analyzer settings are taken in order of first appearance.

HOM scan CSV::

    delay_fs,fourfolds,error
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from pathlib import Path
from typing import Iterable

import jsonschema
import numpy as np

from .bsm import Signature
from .chsh import AngleSettings, ChshResult, NoDataError
from .config import REPORT_SCHEMA
from .mcsim import SIGNATURES, CountsTable

SCHEMA_VERSION = "1.0"
COUNTS_COLUMNS = (
    "signature", "a_deg", "b_deg", "outcome_a", "outcome_b",
    "fourfold", "twofold_1", "twofold_4", "pulses",
)
HOM_COLUMNS = ("delay_fs", "fourfolds", "error")
_OUTCOME = {"+1": 0, "1": 0, "+": 0, "-1": 1, "-": 1}
_OUTCOME_TEXT = ("+1", "-1")


class CsvFormatError(ValueError):
    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


def _data_lines(text: str) -> list[tuple[int, str]]:
    return [
        (i + 1, line)
        for i, line in enumerate(text.splitlines())
        if line.strip() and not line.lstrip().startswith("#")
    ]


def _fmt_angle(x: float) -> str:
    return repr(float(x))


def write_counts_csv(table: CountsTable, path: str | os.PathLike | None = None) -> str:
    buf = io.StringIO()
    buf.write("# swapsim counts table; one row per four-fold measurement\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COUNTS_COLUMNS)
    for s, sig in enumerate(SIGNATURES):
        for pair, (a, b) in enumerate(table.settings.pairs()):
            for ia in range(2):
                for ib in range(2):
                    idx = (s, pair, ia, ib)
                    w.writerow([
                        sig.value, _fmt_angle(a), _fmt_angle(b),
                        _OUTCOME_TEXT[ia], _OUTCOME_TEXT[ib],
                        int(table.fourfold[idx]), int(table.twofold_1[idx]),
                        int(table.twofold_4[idx]), int(table.pulses[pair]),
                    ])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _to_int(value: str, name: str, row: int, optional: bool = False) -> int | None:
    value = value.strip()
    if value == "" and optional:
        return None
    try:
        f = float(value)
    except ValueError:
        raise CsvFormatError(f"{name} is not a number: {value!r}", row) from None
    if not math.isfinite(f) or f < 0 or f != int(f):
        raise CsvFormatError(f"{name} must be a non-negative integer, got {value!r}", row)
    return int(f)


def parse_counts_csv(text: str) -> CountsTable:
    lines = _data_lines(text)
    if not lines:
        raise NoDataError("no data: counts file is empty")
    header_row, header = lines[0]
    cols = [c.strip() for c in next(csv.reader([header]))]
    required = COUNTS_COLUMNS[:6]
    missing = [c for c in required if c not in cols]
    if missing:
        raise CsvFormatError(f"header lacks columns {missing}", header_row)
    if len(lines) == 1:
        raise NoDataError("no data: counts file has a header but no rows")

    records = []
    a_order: list[float] = []
    b_order: list[float] = []
    for row_no, line in lines[1:]:
        fields = next(csv.reader([line]))
        if len(fields) != len(cols):
            raise CsvFormatError(f"expected {len(cols)} fields, got {len(fields)}", row_no)
        rec = dict(zip(cols, (f.strip() for f in fields)))
        try:
            sig = Signature(rec["signature"])
            if sig is Signature.NONE:
                raise ValueError
            a = float(rec["a_deg"])
            b = float(rec["b_deg"])
        except ValueError:
            raise CsvFormatError("bad signature or angle", row_no) from None
        if rec["outcome_a"] not in _OUTCOME or rec["outcome_b"] not in _OUTCOME:
            raise CsvFormatError("outcomes must be +1 or -1", row_no)
        four = _to_int(rec["fourfold"], "fourfold", row_no)
        t1 = _to_int(rec.get("twofold_1", ""), "twofold_1", row_no, optional=True)
        t4 = _to_int(rec.get("twofold_4", ""), "twofold_4", row_no, optional=True)
        pulses = _to_int(rec.get("pulses", ""), "pulses", row_no, optional=True)
        for val, order in ((a, a_order), (b, b_order)):
            if val not in order:
                order.append(val)
        records.append((row_no, sig, a, b, _OUTCOME[rec["outcome_a"]], _OUTCOME[rec["outcome_b"]],
                        four, t1, t4, pulses))
    if len(a_order) != 2 or len(b_order) != 2:
        raise CsvFormatError(
            f"need exactly two angles per photon, got a={a_order} b={b_order}"
        )
    settings = AngleSettings(a_order[0], a_order[1], b_order[0], b_order[1])
    pairs = settings.pairs()
    shape = CountsTable.SHAPE
    four_arr = np.zeros(shape, dtype=np.int64)
    t1_arr = np.zeros(shape, dtype=np.int64)
    t4_arr = np.zeros(shape, dtype=np.int64)
    pulses_arr = np.zeros(4, dtype=np.int64)
    seen = set()
    for row_no, sig, a, b, ia, ib, four, t1, t4, pulses in records:
        idx = (SIGNATURES.index(sig), pairs.index((a, b)), ia, ib)
        if idx in seen:
            raise CsvFormatError("duplicate measurement", row_no)
        seen.add(idx)
        four_arr[idx] = four
        t1_arr[idx] = t1 or 0
        t4_arr[idx] = t4 or 0
        if pulses is not None:
            pulses_arr[idx[1]] = pulses
    return CountsTable(settings, four_arr, t1_arr, t4_arr, pulses_arr)


def read_counts_csv(path: str | os.PathLike) -> CountsTable:
    return parse_counts_csv(Path(path).read_text(encoding="utf-8"))


def write_hom_csv(delays, counts, errors, path: str | os.PathLike | None = None) -> str:
    buf = io.StringIO()
    buf.write("# swapsim HOM scan; four-fold counts per relative delay\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HOM_COLUMNS)
    for d, c, e in zip(delays, counts, errors):
        w.writerow([repr(float(d)), int(c), repr(float(e))])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def parse_hom_csv(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lines = _data_lines(text)
    if not lines or [c.strip() for c in lines[0][1].split(",")] != list(HOM_COLUMNS):
        raise CsvFormatError(f"HOM CSV must start with header {','.join(HOM_COLUMNS)}")
    d, c, e = [], [], []
    for row_no, line in lines[1:]:
        parts = line.split(",")
        if len(parts) != 3:
            raise CsvFormatError("expected 3 fields", row_no)
        try:
            d.append(float(parts[0]))
            c.append(int(parts[1]))
            e.append(float(parts[2]))
        except ValueError:
            raise CsvFormatError("non-numeric field", row_no) from None
    return np.array(d), np.array(c, dtype=np.int64), np.array(e)


# ---------------------------------------------------------------------------
# JSON


def chsh_record(result: ChshResult, settings: AngleSettings) -> dict:
    sig = None
    if result.std_error > 0:
        sig = (result.S - 2.0) / result.std_error
    rows = []
    for (a, b), est in zip(settings.pairs(), result.estimates):
        row = {"a_deg": a, "b_deg": b, "E": est.E, "std_error": est.std_error}
        if est.counts is not None:
            row["counts"] = list(est.counts)
        rows.append(row)
    return {
        "variant": result.variant.value,
        "S": result.S,
        "std_error": result.std_error,
        "significance": sig,
        "correlations": rows,
    }


def validate_report(report: dict) -> None:
    jsonschema.Draft202012Validator(REPORT_SCHEMA).validate(report)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dump_report(report: dict, path: str | os.PathLike | None = None) -> str:
    report = {"schema_version": SCHEMA_VERSION, **report}
    text = json.dumps(report, indent=2, default=_json_default)
    validate_report(json.loads(text))
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text


def load_report(path: str | os.PathLike) -> dict:
    report = json.loads(Path(path).read_text(encoding="utf-8"))
    validate_report(report)
    return report


def rows_to_csv(columns: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(columns))
    w.writerows(rows)
    return buf.getvalue()
