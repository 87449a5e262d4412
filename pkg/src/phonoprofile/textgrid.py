"""Praat TextGrid parsing and phone-interval extraction.

Handles the two text serialisations Praat emits ("long" and "short"),
UTF-8 with or without BOM, and UTF-16 (BOM required).  Binary TextGrids
are rejected.  Point tiers are represented as zero-length intervals so a
single tier type covers every file we see; forced aligners only emit
interval tiers in practice.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import EmptyFile, MalformedTextGrid, TierNotFound, UnsupportedEncoding

#: Labels treated as silence/non-speech when extracting phone intervals.
DEFAULT_SILENCE_LABELS = frozenset({"", "sil", "sp", "spn", "<eps>"})

#: Bound checks allow this much slack (seconds) for rounding in the file.
_BOUNDS_TOLERANCE = 0.001


@dataclass(frozen=True)
class Interval:
    start: float
    end: float
    label: str


@dataclass
class Tier:
    name: str
    intervals: list[Interval] = field(default_factory=list)


@dataclass
class TextGrid:
    xmin: float
    xmax: float
    tiers: list[Tier] = field(default_factory=list)

    def tier_names(self) -> list[str]:
        return [t.name for t in self.tiers]


@dataclass(frozen=True)
class PhoneInterval:
    phone: str
    start: float
    end: float
    utterance_id: str

    @property
    def duration(self) -> float:
        return self.end - self.start


class _Cursor:
    """Line stream with 1-based line numbers for error reporting."""

    def __init__(self, lines: list[str]):
        self._lines = lines
        self._pos = 0

    def next_content_line(self) -> tuple[str, int]:
        while self._pos < len(self._lines):
            line = self._lines[self._pos].strip()
            self._pos += 1
            if line:
                return line, self._pos
        raise MalformedTextGrid("unexpected end of file", len(self._lines))

    def assert_exhausted(self) -> None:
        while self._pos < len(self._lines):
            if self._lines[self._pos].strip():
                raise MalformedTextGrid("trailing content after declared tiers", self._pos + 1)
            self._pos += 1

    @property
    def line_no(self) -> int:
        return self._pos


def _decode(content: bytes) -> str:
    if content.startswith(b"\xff\xfe") or content.startswith(b"\xfe\xff"):
        try:
            return content.decode("utf-16")
        except UnicodeDecodeError as exc:
            raise UnsupportedEncoding(f"invalid UTF-16 content: {exc}") from exc
    if content.startswith(b"\xef\xbb\xbf"):
        content = content[3:]
    try:
        return content.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise UnsupportedEncoding(f"not valid UTF-8 and no UTF-16 BOM found: {exc}") from exc


def _unquote(raw: str, line_no: int) -> str:
    raw = raw.strip()
    if len(raw) < 2 or not raw.startswith('"') or not raw.endswith('"'):
        raise MalformedTextGrid(f"expected quoted string, got {raw!r}", line_no)
    return raw[1:-1].replace('""', '"')


def _parse_number(raw: str, line_no: int) -> float:
    try:
        return float(raw.strip())
    except ValueError:
        raise MalformedTextGrid(f"expected a number, got {raw.strip()!r}", line_no) from None


def _split_assignment(line: str) -> tuple[str, str] | None:
    """Split 'key = value' at the first '=', normalising key whitespace."""
    if "=" not in line:
        return None
    key, value = line.split("=", 1)
    return " ".join(key.split()), value.strip()


def _long_value(cursor: _Cursor, key: str) -> tuple[str, int]:
    line, no = cursor.next_content_line()
    parsed = _split_assignment(line)
    if parsed is None or parsed[0] != key:
        raise MalformedTextGrid(f"expected '{key} = ...', got {line!r}", no)
    return parsed[1], no


def _long_number(cursor: _Cursor, key: str) -> float:
    raw, no = _long_value(cursor, key)
    return _parse_number(raw, no)


def _long_string(cursor: _Cursor, key: str) -> str:
    raw, no = _long_value(cursor, key)
    return _unquote(raw, no)


_BLOCK_RE = re.compile(r"^\s*(item|intervals|points)\s*\[\d*\]\s*:\s*$")


def _expect_block(cursor: _Cursor, kind: str) -> None:
    line, no = cursor.next_content_line()
    m = _BLOCK_RE.match(line)
    if m is None or m.group(1) != kind:
        raise MalformedTextGrid(f"expected '{kind} [..]:' block header, got {line!r}", no)


def parse_textgrid(content: bytes) -> TextGrid:
    """Parse a TextGrid file (long or short text format) from raw bytes."""
    if not isinstance(content, (bytes, bytearray)):
        raise TypeError("parse_textgrid expects raw bytes")
    if not content.strip():
        raise EmptyFile("TextGrid file is empty")
    if b"ooBinaryFile" in content[:32]:
        raise MalformedTextGrid("binary TextGrid format is not supported; re-save as text", 1)

    text = _decode(bytes(content))
    if not text.strip():
        raise EmptyFile("TextGrid file is empty")
    cursor = _Cursor(text.splitlines())

    header, no = cursor.next_content_line()
    if "ooTextFile" not in header:
        raise MalformedTextGrid(f"missing 'File type = \"ooTextFile\"' header, got {header!r}", no)
    klass, no = cursor.next_content_line()
    if "TextGrid" not in klass:
        raise MalformedTextGrid(f"object class is not TextGrid: {klass!r}", no)

    probe, probe_no = cursor.next_content_line()
    if "=" in probe:
        grid = _parse_long(cursor, probe, probe_no)
    else:
        grid = _parse_short(cursor, probe, probe_no)
    cursor.assert_exhausted()
    _validate(grid)
    return grid


def _parse_long(cursor: _Cursor, first_line: str, first_no: int) -> TextGrid:
    parsed = _split_assignment(first_line)
    if parsed is None or parsed[0] != "xmin":
        raise MalformedTextGrid(f"expected 'xmin = ...', got {first_line!r}", first_no)
    xmin = _parse_number(parsed[1], first_no)
    xmax = _long_number(cursor, "xmax")

    flag, no = cursor.next_content_line()
    if "<absent>" in flag:
        return TextGrid(xmin, xmax, [])
    if not flag.startswith("tiers?") or "<exists>" not in flag:
        raise MalformedTextGrid(f"expected 'tiers? <exists>', got {flag!r}", no)
    n_tiers = int(_long_number(cursor, "size"))

    # Optional "item []:" umbrella header.
    line, no = cursor.next_content_line()
    if not re.match(r"^\s*item\s*\[\]\s*:\s*$", line):
        cursor._pos -= 1  # first tier header, push back

    tiers = []
    for _ in range(n_tiers):
        _expect_block(cursor, "item")
        tier_class = _long_string(cursor, "class")
        name = _long_string(cursor, "name")
        _long_number(cursor, "xmin")
        _long_number(cursor, "xmax")
        if tier_class == "IntervalTier":
            count_raw, no = _long_value(cursor, "intervals: size")
            count = int(_parse_number(count_raw, no))
            intervals = []
            for _ in range(count):
                _expect_block(cursor, "intervals")
                istart = _long_number(cursor, "xmin")
                iend = _long_number(cursor, "xmax")
                label = _long_string(cursor, "text")
                intervals.append(Interval(istart, iend, label))
            tiers.append(Tier(name, intervals))
        elif tier_class in ("TextTier", "PointTier"):
            count_raw, no = _long_value(cursor, "points: size")
            count = int(_parse_number(count_raw, no))
            intervals = []
            for _ in range(count):
                _expect_block(cursor, "points")
                line, no = cursor.next_content_line()
                parsed = _split_assignment(line)
                if parsed is None or parsed[0] not in ("time", "number"):
                    raise MalformedTextGrid(f"expected point time, got {line!r}", no)
                t = _parse_number(parsed[1], no)
                mark = _long_string(cursor, "mark")
                intervals.append(Interval(t, t, mark))
            tiers.append(Tier(name, intervals))
        else:
            raise MalformedTextGrid(f"unknown tier class {tier_class!r}", cursor.line_no)
    return TextGrid(xmin, xmax, tiers)


def _parse_short(cursor: _Cursor, first_line: str, first_no: int) -> TextGrid:
    xmin = _parse_number(first_line, first_no)
    raw, no = cursor.next_content_line()
    xmax = _parse_number(raw, no)

    flag, no = cursor.next_content_line()
    if "<absent>" in flag:
        return TextGrid(xmin, xmax, [])
    if "<exists>" not in flag:
        raise MalformedTextGrid(f"expected '<exists>' flag, got {flag!r}", no)
    raw, no = cursor.next_content_line()
    n_tiers = int(_parse_number(raw, no))

    tiers = []
    for _ in range(n_tiers):
        raw, no = cursor.next_content_line()
        tier_class = _unquote(raw, no)
        raw, no = cursor.next_content_line()
        name = _unquote(raw, no)
        raw, no = cursor.next_content_line()
        _parse_number(raw, no)  # tier xmin
        raw, no = cursor.next_content_line()
        _parse_number(raw, no)  # tier xmax
        raw, no = cursor.next_content_line()
        count = int(_parse_number(raw, no))
        intervals = []
        if tier_class == "IntervalTier":
            for _ in range(count):
                raw, no = cursor.next_content_line()
                istart = _parse_number(raw, no)
                raw, no = cursor.next_content_line()
                iend = _parse_number(raw, no)
                raw, no = cursor.next_content_line()
                label = _unquote(raw, no)
                intervals.append(Interval(istart, iend, label))
        elif tier_class in ("TextTier", "PointTier"):
            for _ in range(count):
                raw, no = cursor.next_content_line()
                t = _parse_number(raw, no)
                raw, no = cursor.next_content_line()
                mark = _unquote(raw, no)
                intervals.append(Interval(t, t, mark))
        else:
            raise MalformedTextGrid(f"unknown tier class {tier_class!r}", no)
        tiers.append(Tier(name, intervals))
    return TextGrid(xmin, xmax, tiers)


def _validate(grid: TextGrid) -> None:
    if grid.xmin > grid.xmax:
        raise MalformedTextGrid(f"grid xmin {grid.xmin} exceeds xmax {grid.xmax}")
    lo = grid.xmin - _BOUNDS_TOLERANCE
    hi = grid.xmax + _BOUNDS_TOLERANCE
    for tier in grid.tiers:
        prev_end = None
        for iv in tier.intervals:
            if iv.end < iv.start:
                raise MalformedTextGrid(
                    f"tier {tier.name!r}: interval end {iv.end} precedes start {iv.start}")
            if iv.start < lo or iv.end > hi:
                raise MalformedTextGrid(
                    f"tier {tier.name!r}: interval [{iv.start}, {iv.end}] outside grid bounds "
                    f"[{grid.xmin}, {grid.xmax}]")
            if prev_end is not None:
                if iv.start < prev_end - 1e-9:
                    raise MalformedTextGrid(
                        f"tier {tier.name!r}: overlapping intervals at {iv.start}")
            prev_end = max(iv.end, prev_end) if prev_end is not None else iv.end


def format_textgrid(grid: TextGrid) -> str:
    """Serialise to long text format with 6-decimal fixed-point seconds.

    Used for test fixtures and debugging; Praat and MFA both read it.
    """
    out = ['File type = "ooTextFile"', 'Object class = "TextGrid"', ""]
    out.append(f"xmin = {grid.xmin:.6f}")
    out.append(f"xmax = {grid.xmax:.6f}")
    out.append("tiers? <exists>")
    out.append(f"size = {len(grid.tiers)}")
    out.append("item []:")
    for i, tier in enumerate(grid.tiers, 1):
        out.append(f"    item [{i}]:")
        out.append('        class = "IntervalTier"')
        out.append(f'        name = "{tier.name.replace(chr(34), chr(34) * 2)}"')
        out.append(f"        xmin = {grid.xmin:.6f}")
        out.append(f"        xmax = {grid.xmax:.6f}")
        out.append(f"        intervals: size = {len(tier.intervals)}")
        for j, iv in enumerate(tier.intervals, 1):
            out.append(f"        intervals [{j}]:")
            out.append(f"            xmin = {iv.start:.6f}")
            out.append(f"            xmax = {iv.end:.6f}")
            out.append(f'            text = "{iv.label.replace(chr(34), chr(34) * 2)}"')
    return "\n".join(out) + "\n"


def extract_phone_intervals(
    grid: TextGrid,
    tier_selector: str | None = None,
    utterance_id: str = "",
    silence_labels: frozenset[str] = DEFAULT_SILENCE_LABELS,
) -> list[PhoneInterval]:
    """Pull non-silence intervals from a phone tier, in temporal order.

    With no explicit selector the first tier whose lowercase name contains
    "phone" is used.  Labels are passed through verbatim; whitespace-only
    labels count as silence.
    """
    tier = None
    if tier_selector is not None:
        for t in grid.tiers:
            if t.name == tier_selector:
                tier = t
                break
        if tier is None:
            raise TierNotFound(
                f"no tier named {tier_selector!r}; available: {grid.tier_names()}")
    else:
        for t in grid.tiers:
            if "phone" in t.name.lower():
                tier = t
                break
        if tier is None:
            raise TierNotFound(
                f"no tier with 'phone' in its name; available: {grid.tier_names()}")

    result = []
    for iv in sorted(tier.intervals, key=lambda v: v.start):
        if iv.label.strip() in silence_labels:
            continue
        result.append(PhoneInterval(iv.label, iv.start, iv.end, utterance_id))
    return result
