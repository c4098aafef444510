"""Matrix file parsing/serialization and the analysis report schema.

Two accepted matrix formats:

* canonical object format (always emitted)::

    {"schema":1,"m":2,"n":3,"entries":[[re,im],[re,im],...]}

  with ``entries`` row-major, one ``[re, im]`` pair per entry;

* CSV of complex literals, one matrix row per line, e.g. ``1+0j, 0-2.5i``.

Reals are rendered with 17 significant digits, which round-trips doubles
exactly; identical inputs always serialize to identical bytes.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

import numpy as np

from .core import DenseMatrix
from .matrix_metrics import ETFVerdict
from .row_ensemble import BoundCheck, RowMeanStats

__all__ = [
    "SCHEMA_VERSION",
    "ParseError",
    "AnalysisReport",
    "format_real",
    "format_complex",
    "parse_complex_literal",
    "parse_matrix_file",
    "serialize_matrix",
    "emit_report",
]

SCHEMA_VERSION = 1


class ParseError(ValueError):
    """Malformed input; carries the byte offset or the row/column location."""

    def __init__(self, message: str, offset: int | None = None,
                 row: int | None = None, col: int | None = None):
        where = []
        if offset is not None:
            where.append(f"offset {offset}")
        if row is not None:
            where.append(f"row {row}")
        if col is not None:
            where.append(f"column {col}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.offset = offset
        self.row = row
        self.col = col


def format_real(x: float) -> str:
    """17-significant-digit decimal text; always parses back as a float."""
    s = f"{x:.17g}"
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def format_complex(z: complex) -> str:
    """Canonical ``re+imj`` form, both parts always present."""
    im = format_real(z.imag)
    sign = "" if im.startswith("-") else "+"
    return f"{format_real(z.real)}{sign}{im}j"


_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_LITERAL = re.compile(
    rf"(?:(?P<re>[+-]?{_NUM})(?:(?P<imsign>[+-])(?P<immag>{_NUM})?[ij])?"
    rf"|(?P<lsign>[+-])?(?P<lmag>{_NUM})?[ij])\Z"
)
_LEXICAL_PREFIXES = (
    re.compile(rf"[+-]?{_NUM}(?:[+-](?:{_NUM})?)?[ij]?"),
    re.compile(r"[+-]"),  # a bare sign is a valid start
)


def _failure_offset(text: str) -> int:
    # End of the longest prefix that could still extend to a valid literal.
    ends = [m.end() for m in (p.match(text) for p in _LEXICAL_PREFIXES) if m]
    return max(ends, default=0)


def parse_complex_literal(text: str) -> complex:
    """Parse ``1+2j``, ``2.5-0.5i``, ``3``, ``-j`` and the like.

    A lone ``i``/``j`` (optionally signed) means a unit imaginary part.  Both
    suffix letters are accepted; ``j`` is what the canonical formatter emits.
    """
    match = _LITERAL.fullmatch(text)
    if match is None:
        raise ParseError(f"malformed complex literal {text!r}", offset=_failure_offset(text))
    if match.group("re") is not None:
        re_part = float(match.group("re"))
        im_part = 0.0
        if match.group("imsign") is not None:
            magnitude = match.group("immag")
            im_part = float(magnitude) if magnitude is not None else 1.0
            if match.group("imsign") == "-":
                im_part = -im_part
    else:
        magnitude = match.group("lmag")
        re_part = 0.0
        im_part = float(magnitude) if magnitude is not None else 1.0
        if match.group("lsign") == "-":
            im_part = -im_part
    if not (math.isfinite(re_part) and math.isfinite(im_part)):
        raise ParseError(f"complex literal {text!r} overflows a double", offset=0)
    return complex(re_part, im_part)


def _decode(data: bytes | str) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}", offset=exc.start) from None


def _parse_object_format(text: str) -> DenseMatrix:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", offset=exc.pos) from None
    if not isinstance(payload, dict):
        raise ParseError("matrix file must be a JSON object")
    schema = payload.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema {schema!r}, expected {SCHEMA_VERSION}")
    try:
        m = int(payload["m"])
        n = int(payload["n"])
        entries = payload["entries"]
    except KeyError as exc:
        raise ParseError(f"matrix file missing key {exc.args[0]!r}") from None
    if m < 1 or n < 1:
        raise ParseError(f"matrix shape must be positive, got {m}x{n}")
    if not isinstance(entries, list) or len(entries) != m * n:
        got = len(entries) if isinstance(entries, list) else "non-list"
        raise ParseError(f"expected {m * n} entries for a {m}x{n} matrix, got {got}")
    values = np.empty((m, n), dtype=np.complex128)
    for idx, pair in enumerate(entries):
        r, c = divmod(idx, n)
        if (not isinstance(pair, list)) or len(pair) != 2 \
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair):
            raise ParseError("entry must be a [re, im] pair of numbers", row=r, col=c)
        if not (math.isfinite(pair[0]) and math.isfinite(pair[1])):
            raise ParseError("entry must be finite", row=r, col=c)
        values[r, c] = complex(pair[0], pair[1])
    return DenseMatrix(values)


def _parse_csv_format(text: str) -> DenseMatrix:
    rows: list[list[complex]] = []
    for lineno, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        row = []
        for col, cell in enumerate(line.split(",")):
            try:
                row.append(parse_complex_literal(cell.strip()))
            except ParseError as exc:
                raise ParseError(str(exc), row=lineno, col=col) from None
        rows.append(row)
    if not rows:
        raise ParseError("matrix file contains no rows")
    width = len(rows[0])
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"expected {width} entries per row, got {len(row)}", row=r)
    return DenseMatrix(np.array(rows, dtype=np.complex128))


def parse_matrix_file(data: bytes | str, format_hint: str | None = None) -> DenseMatrix:
    """Parse a matrix file in either accepted format.

    ``format_hint`` may be ``"json"`` or ``"csv"``; without it the object
    format is assumed when the first non-space character is ``{``.
    """
    text = _decode(data)
    if format_hint is None:
        format_hint = "json" if text.lstrip()[:1] == "{" else "csv"
    if format_hint == "json":
        return _parse_object_format(text)
    if format_hint == "csv":
        return _parse_csv_format(text)
    raise ParseError(f"unknown format hint {format_hint!r}")


def serialize_matrix(a: DenseMatrix) -> bytes:
    """Canonical object-format bytes; parse_matrix_file inverts this exactly."""
    pairs = ",".join(
        f"[{format_real(z.real)},{format_real(z.imag)}]" for z in a.array.ravel()
    )
    text = f'{{"schema":{SCHEMA_VERSION},"m":{a.m},"n":{a.n},"entries":[{pairs}]}}'
    return text.encode("ascii")


@dataclass(frozen=True)
class AnalysisReport:
    """Machine-readable summary of one matrix analysis.

    ``coherence`` and ``slack`` are None when the columns were not normalized
    and auto-normalization was off.
    """

    shape: tuple[int, int]
    frobenius: float
    sigma_max: float
    lambda_max: float
    coherence: float | None
    welch: float
    slack: float | None
    etf: ETFVerdict
    row_mean: RowMeanStats
    bounds: tuple[BoundCheck, ...]
    tool_version: str
    seed: int | None = None


def _real_field(x: float | None) -> str:
    return "null" if x is None else format_real(x)


def _bool_field(b: bool) -> str:
    return "true" if b else "false"


def _complex_field(z: complex) -> str:
    return f"[{format_real(z.real)},{format_real(z.imag)}]"


def _etf_field(v: ETFVerdict) -> str:
    return (
        f'{{"is_etf":{_bool_field(v.is_etf)},'
        f'"equiangular_spread":{format_real(v.equiangular_spread)},'
        f'"tightness_residual":{format_real(v.tightness_residual)},'
        f'"columns_normalized":{_bool_field(v.columns_normalized)}}}'
    )


def _row_mean_field(s: RowMeanStats) -> str:
    sums = ",".join(format_real(v) for v in s.row_sum_abs_sq)
    return (
        f'{{"mean":{_complex_field(s.mean)},'
        f'"variance":{format_real(s.variance)},'
        f'"std_dev":{format_real(s.std_dev)},'
        f'"row_sum_abs_sq":[{sums}]}}'
    )


def _bound_field(b: BoundCheck) -> str:
    return (
        f'{{"label":{json.dumps(b.label)},'
        f'"lhs":{format_real(b.lhs)},'
        f'"rhs":{format_real(b.rhs)},'
        f'"holds":{_bool_field(b.holds)},'
        f'"equality":{_bool_field(b.equality)}}}'
    )


def emit_report(report: AnalysisReport) -> bytes:
    """Serialize a report with fixed key order; byte-identical for equal inputs."""
    bounds = ",".join(_bound_field(b) for b in report.bounds)
    seed = "null" if report.seed is None else str(report.seed)
    text = (
        f'{{"schema":{SCHEMA_VERSION},'
        f'"shape":[{report.shape[0]},{report.shape[1]}],'
        f'"frobenius":{format_real(report.frobenius)},'
        f'"sigma_max":{format_real(report.sigma_max)},'
        f'"lambda_max":{format_real(report.lambda_max)},'
        f'"coherence":{_real_field(report.coherence)},'
        f'"welch":{format_real(report.welch)},'
        f'"slack":{_real_field(report.slack)},'
        f'"etf":{_etf_field(report.etf)},'
        f'"row_mean":{_row_mean_field(report.row_mean)},'
        f'"bounds":[{bounds}],'
        f'"tool_version":{json.dumps(report.tool_version)},'
        f'"seed":{seed}}}'
    )
    return text.encode("ascii")
