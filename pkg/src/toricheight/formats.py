"""Polytope file formats.

Native format (rationals written ``a`` or ``a/b``, no decimals)::

    # comment
    dim: 2
    name: P2
    tags: k-semistable smooth
    vertices:
    -1 -1
    2 -1
    -1 2

Several polytopes may share a file, separated by a line ``---``.

Matrix format (PALP style): a header ``m n`` followed by m rows of n
integers.  With more rows than columns the rows are vertices, otherwise the
columns are; ``orientation`` overrides the rule.  Blocks may follow each other.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .polytope import PolytopeError, RationalPolytope, from_vertices

_RATIONAL = re.compile(r"[+-]?\d+(?:/\d+)?\Z")
_INTEGER = re.compile(r"[+-]?\d+\Z")
FORMATS = ("auto", "native", "matrix")


class ParseError(PolytopeError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class PolytopeFile:
    polytope: RationalPolytope
    name: str = ""
    tags: tuple = field(default=())


def _tokens(line: str):
    """Whitespace-separated tokens with their 1-based columns."""
    for m in re.finditer(r"\S+", line):
        yield m.group(), m.start() + 1


def _rational(tok: str, line: int, col: int) -> Fraction:
    if not _RATIONAL.match(tok):
        raise ParseError(f"not a rational number: {tok!r}", line, col)
    num, _, den = tok.partition("/")
    if den and int(den) == 0:
        raise ParseError(f"zero denominator in {tok!r}", line, col)
    return Fraction(int(num), int(den) if den else 1)


def _strip(raw: str) -> str:
    return raw.split("#", 1)[0].rstrip()


def _decode(data: bytes | str) -> str:
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("input is not UTF-8 text", 1, 1) from exc
    return data


def detect_format(text: str) -> str:
    for raw in text.splitlines():
        line = _strip(raw).strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) >= 2 and all(_INTEGER.match(t) for t in toks[:2]):
            return "matrix"
        return "native"
    return "native"


# ---------------------------------------------------------------------------
# native


def _build(rows, dim, first_line) -> RationalPolytope:
    if dim is not None and any(len(r) != dim for r, _ in rows):
        bad = next(ln for r, ln in rows if len(r) != dim)
        raise ParseError(f"expected {dim} coordinates", bad, 1)
    if not rows:
        raise ParseError("no vertices", first_line, 1)
    return from_vertices([r for r, _ in rows])


def _parse_native_block(lines: list[tuple[int, str]]) -> PolytopeFile:
    dim = None
    name = ""
    tags: tuple = ()
    rows: list = []
    in_vertices = False
    first = lines[0][0] if lines else 1
    for ln, raw in lines:
        line = _strip(raw)
        if not line.strip():
            continue
        if ":" in line and not in_vertices or line.strip().lower() == "vertices:":
            key, _, value = line.partition(":")
            key = key.strip().lower()
            col = raw.index(value.strip()) + 1 if value.strip() else len(raw) + 1
            if key == "dim":
                if not _INTEGER.match(value.strip()) or int(value) < 1:
                    raise ParseError(f"bad dimension {value.strip()!r}", ln, col)
                dim = int(value)
            elif key == "name":
                name = value.strip()
            elif key == "tags":
                tags = tuple(value.split())
            elif key == "vertices":
                in_vertices = True
            else:
                raise ParseError(f"unknown key {key!r}", ln, raw.index(key) + 1 if key in raw else 1)
            continue
        if not in_vertices:
            tok, col = next(_tokens(raw))
            raise ParseError(f"unexpected {tok!r} before 'vertices:'", ln, col)
        rows.append((tuple(_rational(t, ln, c) for t, c in _tokens(line)), ln))
    if dim is None:
        raise ParseError("missing 'dim:'", first, 1)
    return PolytopeFile(_build(rows, dim, first), name, tags)


def parse_native(text: str) -> list[PolytopeFile]:
    blocks: list[list[tuple[int, str]]] = [[]]
    for ln, raw in enumerate(text.splitlines(), 1):
        if _strip(raw).strip() == "---":
            blocks.append([])
        else:
            blocks[-1].append((ln, raw))
    return [_parse_native_block(b) for b in blocks if any(_strip(r).strip() for _, r in b)]


# ---------------------------------------------------------------------------
# matrix


def parse_matrix(text: str, orientation: str = "auto") -> list[PolytopeFile]:
    if orientation not in ("auto", "rows", "columns"):
        raise ValueError(f"unknown orientation {orientation!r}")
    lines = [(ln, _strip(raw)) for ln, raw in enumerate(text.splitlines(), 1)]
    lines = [(ln, s) for ln, s in lines if s.strip()]
    out = []
    i = 0
    while i < len(lines):
        ln, header = lines[i]
        toks = list(_tokens(header))
        if len(toks) < 2 or not all(_INTEGER.match(t) for t, _ in toks[:2]):
            tok, col = toks[0]
            raise ParseError(f"expected a header 'm n', got {tok!r}", ln, col)
        m, n = int(toks[0][0]), int(toks[1][0])
        if m < 1 or n < 1:
            raise ParseError("matrix dimensions must be positive", ln, toks[0][1])
        body = lines[i + 1: i + 1 + m]
        if len(body) < m:
            raise ParseError(f"expected {m} rows, found {len(body)}", ln, 1)
        matrix = []
        for bl, row in body:
            rt = list(_tokens(row))
            if len(rt) != n:
                raise ParseError(f"expected {n} integers, found {len(rt)}", bl, rt[-1][1] if rt else 1)
            for t, c in rt:
                if not _INTEGER.match(t):
                    raise ParseError(f"not an integer: {t!r}", bl, c)
            matrix.append([int(t) for t, _ in rt])
        if orientation == "auto":
            if m == n:
                raise ParseError("square matrix: orientation is ambiguous, pass it explicitly", ln, 1)
            rows_are_vertices = m > n
        else:
            rows_are_vertices = orientation == "rows"
        verts = matrix if rows_are_vertices else [list(col) for col in zip(*matrix)]
        name = " ".join(t for t, _ in toks[2:])
        out.append(PolytopeFile(from_vertices(verts), name, ()))
        i += 1 + m
    return out


# ---------------------------------------------------------------------------
# public entry points


def parse_polytopes(data: bytes | str, format: str = "auto", orientation: str = "auto") -> list[PolytopeFile]:
    text = _decode(data)
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}")
    if format == "auto":
        format = detect_format(text)
    if format == "matrix":
        return parse_matrix(text, orientation)
    return parse_native(text)


def parse_polytope(data: bytes | str, format: str = "auto", orientation: str = "auto") -> RationalPolytope:
    """Parse exactly one polytope."""
    items = parse_polytopes(data, format, orientation)
    if len(items) != 1:
        raise ParseError(f"expected one polytope, found {len(items)}", 1, 1)
    return items[0].polytope


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def serialize(P: RationalPolytope, format: str = "native", name: str = "", tags=()) -> str:
    """Canonical text for P; parsing it back gives an equal polytope."""
    if format == "native":
        head = [f"dim: {P.dim}"]
        if name:
            head.append(f"name: {name}")
        if tags:
            head.append("tags: " + " ".join(tags))
        head.append("vertices:")
        body = [" ".join(_fmt(x) for x in v) for v in P.vertices]
        return "\n".join(head + body) + "\n"
    if format == "matrix":
        if any(x.denominator != 1 for v in P.vertices for x in v):
            raise ValueError("matrix format needs lattice vertices")
        header = f"{len(P.vertices)} {P.dim}" + (f" {name}" if name else "")
        return "\n".join([header] + [" ".join(str(x.numerator) for x in v) for v in P.vertices]) + "\n"
    raise ValueError(f"unknown format {format!r}")
