"""A strict YAML subset: two-space indentation, maps, lists and scalars.

Only what ``metadata.yaml`` needs.  Output is valid YAML, but the reader only
accepts the shapes :func:`dump` writes::

    file_structure:
      src:
        - io.py
      "weird key": "3.11"
    env_config: {}
    nested_lists:
      -
        - a

No anchors, flow collections (other than ``{}`` and ``[]``), comments or
multi-document streams.
"""

from __future__ import annotations

import json
import math
import re
from typing import Any

from .errors import ParseError

_PLAIN_RE = re.compile(r"^[A-Za-z_/][A-Za-z0-9_./-]*( [A-Za-z0-9_./-]+)*\Z")
_RESERVED = frozenset(
    {"true", "false", "null", "yes", "no", "on", "off", "y", "n", "~"}
)
_INT_RE = re.compile(r"^-?\d+\Z")
_FLOAT_RE = re.compile(r"^-?(\d+\.\d*|\d*\.\d+|\d+)([eE][-+]?\d+)?\Z")

_decoder = json.JSONDecoder()


def _string(s: str) -> str:
    if _PLAIN_RE.fullmatch(s) and s.lower() not in _RESERVED:
        return s
    return json.dumps(s, ensure_ascii=False)


def _scalar(value: Any) -> str:
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("non-finite floats are not representable")
        return repr(value)
    if isinstance(value, str):
        return _string(value)
    raise ValueError(f"unsupported value type {type(value).__name__}")


def _is_container(value: Any) -> bool:
    return isinstance(value, (dict, list))


def _inline(value: Any) -> str | None:
    """Inline form of a value, or None if it needs a nested block."""
    if isinstance(value, dict):
        return "{}" if not value else None
    if isinstance(value, list):
        return "[]" if not value else None
    return _scalar(value)


def _dump_block(value: Any, indent: int, out: list[str]) -> None:
    pad = " " * indent
    if isinstance(value, dict):
        for key, child in value.items():
            if not isinstance(key, str):
                raise ValueError("mapping keys must be strings")
            inline = _inline(child)
            if inline is None:
                out.append(f"{pad}{_string(key)}:")
                _dump_block(child, indent + 2, out)
            else:
                out.append(f"{pad}{_string(key)}: {inline}")
    else:
        for child in value:
            inline = _inline(child)
            if inline is None:
                out.append(f"{pad}-")
                _dump_block(child, indent + 2, out)
            else:
                out.append(f"{pad}- {inline}")


def dump(tree: dict[str, Any]) -> str:
    if not isinstance(tree, dict):
        raise ValueError("top level must be a mapping")
    out: list[str] = []
    _dump_block(tree, 0, out)
    return "".join(line + "\n" for line in out)


# -- reader --------------------------------------------------------------------


def _read_scalar(text: str, lineno: int) -> Any:
    if text.startswith('"'):
        try:
            value, end = _decoder.raw_decode(text)
        except json.JSONDecodeError:
            raise ParseError("bad quoted string", line=lineno) from None
        if end != len(text) or not isinstance(value, str):
            raise ParseError("trailing text after quoted string", line=lineno)
        return value
    if text == "null":
        return None
    if text == "true":
        return True
    if text == "false":
        return False
    if text == "{}":
        return {}
    if text == "[]":
        return []
    if _INT_RE.fullmatch(text):
        return int(text)
    if _FLOAT_RE.fullmatch(text):
        return float(text)
    if _PLAIN_RE.fullmatch(text) and text.lower() not in _RESERVED:
        return text
    raise ParseError(f"unsupported scalar {text!r}", line=lineno)


def _read_key(text: str, lineno: int) -> tuple[str, str]:
    """Split ``key: rest`` or ``key:``; returns (key, rest-or-empty)."""
    if text.startswith('"'):
        try:
            key, end = _decoder.raw_decode(text)
        except json.JSONDecodeError:
            raise ParseError("bad quoted key", line=lineno) from None
        if not isinstance(key, str):
            raise ParseError("bad quoted key", line=lineno)
        rest = text[end:]
    else:
        colon = text.find(":")
        if colon < 0:
            raise ParseError("expected 'key:'", line=lineno)
        key, rest = text[:colon], text[colon:]
        if not _PLAIN_RE.fullmatch(key) or key.lower() in _RESERVED:
            raise ParseError(f"bad key {key!r}", line=lineno)
    if rest == ":":
        return key, ""
    if rest.startswith(": ") and len(rest) > 2:
        return key, rest[2:]
    raise ParseError("expected ': ' after key", line=lineno)


class _Reader:
    def __init__(self, text: str) -> None:
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        self.items: list[tuple[int, str, int]] = []
        for no, raw in enumerate(lines, start=1):
            if raw.strip() == "":
                raise ParseError("blank lines are not allowed", line=no)
            if "\t" in raw[: len(raw) - len(raw.lstrip())]:
                raise ParseError("tab in indentation", line=no)
            body = raw.lstrip(" ")
            indent = len(raw) - len(body)
            if indent % 2:
                raise ParseError("indentation must be a multiple of two spaces", line=no)
            self.items.append((indent, body, no))
        self.pos = 0

    def peek(self) -> tuple[int, str, int] | None:
        return self.items[self.pos] if self.pos < len(self.items) else None

    def block(self, indent: int, lineno: int) -> Any:
        nxt = self.peek()
        if nxt is None or nxt[0] != indent:
            raise ParseError("expected an indented block", line=lineno)
        if nxt[1] == "-" or nxt[1].startswith("- "):
            return self.seq(indent)
        return self.mapping(indent)

    def value_after(self, rest: str, indent: int, lineno: int) -> Any:
        if rest == "":
            return self.block(indent + 2, lineno)
        return _read_scalar(rest, lineno)

    def mapping(self, indent: int) -> dict[str, Any]:
        out: dict[str, Any] = {}
        while (nxt := self.peek()) is not None and nxt[0] >= indent:
            ind, body, no = nxt
            if ind != indent:
                raise ParseError("unexpected indentation", line=no)
            if body == "-" or body.startswith("- "):
                raise ParseError("list item inside a mapping", line=no)
            key, rest = _read_key(body, no)
            if key in out:
                raise ParseError(f"duplicate key {key!r}", line=no)
            self.pos += 1
            out[key] = self.value_after(rest, indent, no)
        return out

    def seq(self, indent: int) -> list[Any]:
        out: list[Any] = []
        while (nxt := self.peek()) is not None and nxt[0] >= indent:
            ind, body, no = nxt
            if ind != indent:
                raise ParseError("unexpected indentation", line=no)
            if body == "-":
                rest = ""
            elif body.startswith("- "):
                rest = body[2:]
                if rest == "":
                    raise ParseError("empty list item", line=no)
            else:
                raise ParseError("mapping key inside a list", line=no)
            self.pos += 1
            out.append(self.value_after(rest, indent, no))
        return out


def load(text: str) -> dict[str, Any]:
    reader = _Reader(text)
    if reader.peek() is None:
        return {}
    first = reader.peek()
    if first[0] != 0:
        raise ParseError("top level must start at column 0", line=first[2])
    tree = reader.mapping(0)
    leftover = reader.peek()
    if leftover is not None:
        raise ParseError("unexpected content", line=leftover[2])
    return tree
