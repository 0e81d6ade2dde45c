"""Line-oriented text format for generating sequences.

::

    cpm 1
    # comments run to the end of the line
    var X1 2
    var X2 3
    dist P1 X2 X1
    0.1 0.2
    0.1 0.2
    0.2 0.2
    end

Variables are declared before use; their declaration order is the canonical
order.  A ``dist`` line names a factor and its scope; the whitespace-separated
values that follow (over any number of lines) are row-major in the *declared*
scope order, last variable fastest, and are permuted to canonical layout on
load.  Factors appear in sequence order.  A scope-less ``dist`` holds the
single value 1.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .errors import (
    ModelNotNormalized,
    ModelShapeMismatch,
    NegativeEntry,
    NotNormalized,
    ParseError,
    ShapeMismatch,
    UndeclaredVariable,
)
from .sequence import GeneratingSequence
from .tables import VariableRegistry, make_factor

__all__ = ["INPUT_NORM_TOL", "parse_model", "read_model", "serialize_model", "write_model"]

FORMAT_TAG = "cpm"
FORMAT_VERSION = 1
INPUT_NORM_TOL = 1e-6

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*\Z")
_KEYWORDS = {"cpm", "var", "dist", "end"}


def _tokens(text: str):
    """Yield ``(line_no, [(column, token), ...])`` for non-blank lines."""
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", line)]
        if toks:
            yield n, toks


def _name(tok, line, what):
    col, s = tok
    if not _NAME.match(s) or s in _KEYWORDS:
        raise ParseError(f"invalid {what} name {s!r}", line, col)
    return s


def parse_model(
    text: str, renormalize: bool = False, norm_tol: float = INPUT_NORM_TOL
) -> tuple[VariableRegistry, GeneratingSequence]:
    """Parse a model file.

    Raises
    ------
    ParseError
        For any malformed input; the subclasses :class:`UndeclaredVariable`,
        ``ModelShapeMismatch`` and ``ModelNotNormalized`` (which are also
        ``ShapeMismatch`` / ``NotNormalized``) carry the offending line.
    """
    lines = list(_tokens(text))
    if not lines:
        raise ParseError("empty model file", 1)
    n, toks = lines[0]
    if toks[0][1] != FORMAT_TAG or len(toks) != 2:
        raise ParseError(f"expected header '{FORMAT_TAG} {FORMAT_VERSION}'", n, toks[0][0])
    if toks[1][1] != str(FORMAT_VERSION):
        raise ParseError(f"unsupported format version {toks[1][1]!r}", n, toks[1][0])

    cards: dict[str, int] = {}
    blocks: list[tuple[int, str, list[str], list[tuple[int, int, str]]]] = []
    ended = False
    for n, toks in lines[1:]:
        if ended:
            raise ParseError("content after 'end'", n, toks[0][0])
        col, head = toks[0]
        if head == "var":
            if blocks:
                raise ParseError("variables must be declared before the first dist", n, col)
            if len(toks) != 3:
                raise ParseError("expected 'var <name> <cardinality>'", n, col)
            name = _name(toks[1], n, "variable")
            if name in cards:
                raise ParseError(f"variable {name!r} declared twice", n, toks[1][0])
            try:
                card = int(toks[2][1])
            except ValueError:
                raise ParseError(f"cardinality {toks[2][1]!r} is not an integer", n, toks[2][0]) from None
            if card < 1:
                raise ParseError(f"cardinality must be >= 1, got {card}", n, toks[2][0])
            cards[name] = card
        elif head == "dist":
            if len(toks) < 2:
                raise ParseError("expected 'dist <name> <var>...'", n, col)
            name = _name(toks[1], n, "dist")
            if any(b[1] == name for b in blocks):
                raise ParseError(f"dist {name!r} defined twice", n, toks[1][0])
            scope = []
            for c, v in toks[2:]:
                if v not in cards:
                    raise UndeclaredVariable(f"variable {v!r} used before declaration", n, c)
                if v in scope:
                    raise ParseError(f"variable {v!r} repeated in scope", n, c)
                scope.append(v)
            blocks.append((n, name, scope, []))
        elif head == "end":
            if len(toks) != 1:
                raise ParseError("unexpected tokens after 'end'", n, toks[1][0])
            ended = True
        elif head == "cpm":
            raise ParseError("duplicate header", n, col)
        else:
            if not blocks:
                raise ParseError(f"unexpected token {head!r}", n, col)
            blocks[-1][3].extend((n, c, t) for c, t in toks)
    if not ended:
        raise ParseError("missing 'end'", lines[-1][0] + 1)
    if not blocks:
        raise ParseError("model defines no dist", lines[-1][0])

    registry = VariableRegistry(cards.items())
    factors = []
    for line, name, scope, raw in blocks:
        values = []
        for ln, c, t in raw:
            try:
                x = float(t)
            except ValueError:
                raise ParseError(f"invalid number {t!r}", ln, c) from None
            if not math.isfinite(x):
                raise ParseError(f"non-finite value {t!r}", ln, c)
            if x < 0:
                raise ParseError(f"negative probability {t!r}", ln, c)
            values.append(x)
        expected = math.prod(registry.card(v) for v in scope)
        if len(values) != expected:
            raise ModelShapeMismatch(
                f"dist {name!r} needs {expected} values, got {len(values)}", line
            )
        arr = np.array(values, dtype=np.float64)
        if renormalize:
            total = arr.sum()
            if total <= 0:
                raise ModelNotNormalized(f"dist {name!r} has zero total mass", line)
            arr = arr / total
        try:
            factors.append(make_factor(scope, arr, registry, norm_tol=norm_tol))
        except NotNormalized as exc:
            raise ModelNotNormalized(f"dist {name!r}: {exc}", line) from None
        except (ShapeMismatch, NegativeEntry) as exc:  # pragma: no cover - screened above
            raise ParseError(f"dist {name!r}: {exc}", line) from None
    names = tuple(b[1] for b in blocks)
    return registry, GeneratingSequence(tuple(factors), registry, names)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def serialize_model(registry: VariableRegistry, seq: GeneratingSequence, names=None) -> str:
    """Canonical text for ``seq``; values use 17 significant digits, so
    ``parse_model(serialize_model(r, s))`` reproduces every float exactly."""
    names = tuple(names) if names is not None else seq.factor_names()
    out = [f"{FORMAT_TAG} {FORMAT_VERSION}"]
    out += [f"var {name} {card}" for name, card in registry.items()]
    for name, f in zip(names, seq.factors):
        out.append(" ".join(["dist", name, *f.scope]))
        flat = f.flat
        width = f.values.shape[-1] if f.scope else 1
        for start in range(0, flat.size, max(width, 1)):
            out.append(" ".join(_fmt(x) for x in flat[start:start + width]))
    out.append("end")
    return "\n".join(out) + "\n"


def decode_model(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data[: exc.start].count(b"\n") + 1
        raise ParseError("file is not valid UTF-8 text", line) from None


def read_model(path, **kwargs) -> tuple[VariableRegistry, GeneratingSequence]:
    with open(path, "rb") as fh:
        return parse_model(decode_model(fh.read()), **kwargs)


def write_model(path, registry: VariableRegistry, seq: GeneratingSequence, names=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_model(registry, seq, names))
