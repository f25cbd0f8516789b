"""Highlight common patterns in article text and draw word/block diagrams.

Cleaning replaces characters one-for-one, so token character offsets in the
cleaned text are also offsets into the raw text.  Highlights are therefore
drawn over the raw article, punctuation and capitalisation intact.
"""

from __future__ import annotations

import html
import re
from dataclasses import dataclass
from typing import Sequence

from provkit.corpus import TokenSequence, clean_text
from provkit.patterns import CommonPatternSet
from provkit.similarity import coverage

BLOCK = "█"
GAP = "-"

# Fixed pair order O-S, R-O, R-S.
PAIR_COLORS = {
    "OS": "#4a90d9",
    "RO": "#f5a623",
    "RS": "#2e9d3a",
}
ANSI_CODES = {
    "OS": "\x1b[44m",
    "RO": "\x1b[43m",
    "RS": "\x1b[32;1m",
}
_ANSI_RESET = "\x1b[0m"
_HTML_STYLE = {
    "OS": "background-color:{c}",
    "RO": "background-color:{c}",
    "RS": "color:{c};font-weight:bold",
}

_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class Highlight:
    """Positions of one document to mark with a pair tag (``OS``, ``RO``, ``RS``)."""

    tag: str
    positions: frozenset[int]


def token_spans(raw: str, **clean_opts) -> list[tuple[int, int]]:
    """Character ``(start, end)`` of every token of ``raw`` after cleaning."""
    return [m.span() for m in _TOKEN.finditer(clean_text(raw, **clean_opts))]


def _segments(n_tokens: int, highlights: Sequence[Highlight]) -> list[tuple[int, int, tuple[str, ...]]]:
    """Maximal runs of tokens sharing the same tag set: (first, last, tags)."""
    tags_at = [tuple(h.tag for h in highlights if i in h.positions) for i in range(n_tokens)]
    segs = []
    i = 0
    while i < n_tokens:
        j = i
        while j + 1 < n_tokens and tags_at[j + 1] == tags_at[i]:
            j += 1
        segs.append((i, j, tags_at[i]))
        i = j + 1
    return segs


def _wrap(text: str, tags: tuple[str, ...], fmt: str) -> str:
    if fmt == "html":
        text = html.escape(text, quote=False)
        if not tags:
            return text
        style = ";".join(_HTML_STYLE[t].format(c=PAIR_COLORS[t]) for t in tags)
        return f'<span class="pair-{"-".join(t.lower() for t in tags)}" style="{style}">{text}</span>'
    if fmt == "ansi":
        if not tags:
            return text
        return "".join(ANSI_CODES[t] for t in tags) + text + _ANSI_RESET
    raise ValueError(f"unknown markup format {fmt!r}")


def markup(
    tokens: TokenSequence,
    highlights: Sequence[Highlight],
    fmt: str = "html",
    raw: str | None = None,
) -> str:
    """Render a document with highlighted token positions.

    Without ``raw`` the cleaned tokens are joined by single spaces.
    Whitespace and punctuation between two tokens with the same tags sit
    inside the highlight.
    """
    n = tokens.word_count
    if raw is None:
        text = " ".join(tokens.tokens)
        spans, pos = [], 0
        for tok in tokens.tokens:
            spans.append((pos, pos + len(tok)))
            pos += len(tok) + 1
    else:
        text = raw
        spans = token_spans(raw)
        if len(spans) != n:
            raise ValueError(f"raw text has {len(spans)} tokens, sequence has {n}")
    if n == 0:
        return _wrap(text, (), fmt)

    out = [_wrap(text[: spans[0][0]], (), fmt)]
    segs = _segments(n, highlights)
    for k, (first, last, tags) in enumerate(segs):
        out.append(_wrap(text[spans[first][0]: spans[last][1]], tags, fmt))
        tail_end = spans[segs[k + 1][0]][0] if k + 1 < len(segs) else len(text)
        out.append(_wrap(text[spans[last][1]: tail_end], (), fmt))
    return "".join(out)


def render_pair_markup(
    base: TokenSequence,
    patterns: CommonPatternSet,
    min_len: int,
    fmt: str = "html",
    raw: str | None = None,
    tag: str = "OS",
) -> str:
    """Base text with every position covered by a common pattern highlighted."""
    covered = frozenset(coverage(base, patterns, min_len))
    return markup(base, [Highlight(tag, covered)], fmt, raw)


def block_line(doc: TokenSequence, covered: set[int] | frozenset[int]) -> str:
    return "".join(BLOCK if i in covered else GAP for i in range(doc.word_count))


def render_block_diagram(
    pairs: Sequence[tuple[TokenSequence, TokenSequence, CommonPatternSet]],
    length: int,
) -> list[tuple[str, str]]:
    """Two ``(label, line)`` rows per pair: the first document, then the second.

    Each line holds one glyph per word: a block for words covered at
    ``length``, a dash otherwise.
    """
    rows = []
    for a, b, patterns in pairs:
        for doc, partner in ((a, b), (b, a)):
            rows.append((f"{doc.doc_id} vs {partner.doc_id}", block_line(doc, coverage(doc, patterns, length))))
    return rows


_HTML_HEAD = """<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>{title}</title>
<style>body{{font-family:sans-serif}} table{{border-collapse:collapse}}
td{{vertical-align:top;padding:8px;border:1px solid #ccc;width:33%}}</style></head><body>
"""


def html_page(title: str, columns: Sequence[tuple[str, str]]) -> str:
    """A standalone HTML page with one table column per ``(heading, body_html)``."""
    head = "".join(f"<th>{html.escape(h)}</th>" for h, _ in columns)
    body = "".join(f"<td>{b}</td>" for _, b in columns)
    return (
        _HTML_HEAD.format(title=html.escape(title))
        + f"<h2>{html.escape(title)}</h2>\n<table><tr>{head}</tr><tr>{body}</tr></table>\n</body></html>\n"
    )
