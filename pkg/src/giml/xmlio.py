"""Raw XML reading and writing.

The parser needs more than a stock element tree: line numbers for
diagnostics, attribute order for faithful translation output, and a
side channel that keeps unknown markup verbatim.  This thin layer reads
XML through expat into plain records and serialises such records back
to text deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional
from xml.parsers import expat


class XmlSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.line = line
        self.col = col


@dataclass
class RawAttr:
    name: str
    value: str
    line: int = 0
    col: int = 0


@dataclass
class RawElement:
    name: str
    attrs: list[RawAttr] = field(default_factory=list)
    children: list["RawElement"] = field(default_factory=list)
    text: str = ""
    line: int = 0
    col: int = 0

    def get(self, name: str) -> Optional[str]:
        folded = name.casefold()
        for attr in self.attrs:
            if attr.name.casefold() == folded:
                return attr.value
        return None


@dataclass
class RawDocument:
    root: RawElement
    had_declaration: bool = False


def parse_xml(data) -> RawDocument:
    """Parse bytes or text into a raw element tree.

    A UTF-8 byte order mark is tolerated.  Raises XmlSyntaxError with
    the offending position on malformed input.
    """
    if isinstance(data, str):
        payload = data.lstrip("﻿").encode("utf-8")
    else:
        payload = data[3:] if data[:3] == b"\xef\xbb\xbf" else data

    parser = expat.ParserCreate()
    parser.ordered_attributes = True
    parser.buffer_text = True

    root: list[RawElement] = []
    stack: list[RawElement] = []
    state = {"decl": False}

    def xml_decl(version, encoding, standalone):
        state["decl"] = True

    def start(name, attr_list):
        element = RawElement(
            name=name,
            attrs=[RawAttr(attr_list[i], attr_list[i + 1],
                           parser.CurrentLineNumber,
                           parser.CurrentColumnNumber + 1)
                   for i in range(0, len(attr_list), 2)],
            line=parser.CurrentLineNumber,
            col=parser.CurrentColumnNumber + 1,
        )
        if stack:
            stack[-1].children.append(element)
        else:
            root.append(element)
        stack.append(element)

    def end(name):
        stack.pop()

    def chars(text):
        if stack:
            stack[-1].text += text

    parser.XmlDeclHandler = xml_decl
    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(payload, True)
    except expat.ExpatError as exc:
        raise XmlSyntaxError(expat.errors.messages[exc.code],
                             exc.lineno, exc.offset + 1) from None
    if not root:
        raise XmlSyntaxError("no root element", 1, 1)
    return RawDocument(root=root[0], had_declaration=state["decl"])


def escape_attr(value: str) -> str:
    return (value.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


def escape_text(value: str) -> str:
    return value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def serialize(document: RawDocument) -> str:
    """Write a raw tree back to XML text, two-space indented.

    Output is a pure function of the tree: same tree, same bytes.
    """
    lines: list[str] = []
    if document.had_declaration:
        lines.append('<?xml version="1.0" encoding="utf-8"?>')
    _write(document.root, lines, 0)
    return "\n".join(lines) + "\n"


def _write(element: RawElement, lines: list[str], depth: int) -> None:
    pad = "  " * depth
    attrs = "".join(' %s="%s"' % (a.name, escape_attr(a.value))
                    for a in element.attrs)
    text = element.text.strip()
    if not element.children and not text:
        lines.append("%s<%s%s />" % (pad, element.name, attrs))
        return
    if not element.children:
        lines.append("%s<%s%s>%s</%s>" % (pad, element.name, attrs,
                                          escape_text(text), element.name))
        return
    lines.append("%s<%s%s>" % (pad, element.name, attrs))
    for child in element.children:
        _write(child, lines, depth + 1)
    lines.append("%s</%s>" % (pad, element.name))
