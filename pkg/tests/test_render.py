import re

from provkit.corpus import TokenSequence, prepare
from provkit.patterns import build_index, common_patterns, pair_patterns
from provkit.plotting import plot_block_diagram, plot_confusion_matrices
from provkit.render import (
    BLOCK,
    Highlight,
    block_line,
    html_page,
    markup,
    render_block_diagram,
    render_pair_markup,
    token_spans,
)
from provkit.similarity import coverage, profile_triple

from .conftest import load_article, raw_article
from .paper_tables import FIG20

ANSI = re.compile(r"\x1b\[[0-9;]*m")


def test_block_line():
    doc = TokenSequence("d", ("a", "b", "c", "d"))
    assert block_line(doc, {0, 1, 2}) == "███-"


def test_block_diagram_disjoint_and_lengths():
    a = TokenSequence("a", ("p", "q", "r", "s"))
    b = TokenSequence("b", ("w", "x", "y"))
    rows = render_block_diagram([(a, b, pair_patterns(a, b))], 3)
    assert [line for _, line in rows] == ["----", "---"]


def test_block_diagram_glyphs_equal_coverage(article183):
    o, s, r = article183["original"], article183["suspicious"], article183["reference"]
    index = build_index([o, s, r])
    pairs = [(o, s, common_patterns(index, "original", "suspicious")),
             (r, o, common_patterns(index, "reference", "original")),
             (r, s, common_patterns(index, "reference", "suspicious"))]
    rows = render_block_diagram(pairs, 3)
    assert len(rows) == 6
    for (label, line), doc in zip(rows, [o, s, r, o, r, s]):
        assert len(line) == doc.word_count
    triple = profile_triple(o, s, r)
    ref_vs_orig = rows[2][1]
    assert rows[2][0] == "reference vs original"
    assert ref_vs_orig.count(BLOCK) == triple.reference_original.covered(3)
    assert abs(ref_vs_orig.count(BLOCK) - 89) <= 4


def test_markup_identical_and_disjoint():
    a = prepare("Alpha beta gamma, delta.", "a")
    b = prepare("alpha beta gamma delta", "b")
    html = render_pair_markup(a, pair_patterns(a, b), 3, raw="Alpha beta gamma, delta.")
    assert html.startswith('<span class="pair-os"')
    assert "Alpha beta gamma, delta</span>." in html
    c = prepare("one two three four", "c")
    assert render_pair_markup(a, pair_patterns(a, c), 3, raw="Alpha beta gamma, delta.") == "Alpha beta gamma, delta."


def test_markup_ansi_roundtrip_text():
    raw = "Deutsche Telekom saw strong profits & more"
    a = prepare(raw, "a")
    b = prepare("Deutsche Telekom saw weak profits", "b")
    out = render_pair_markup(a, pair_patterns(a, b), 3, fmt="ansi", raw=raw)
    assert ANSI.sub("", out) == raw
    assert out.startswith("\x1b[44mDeutsche Telekom saw\x1b[0m")


def test_markup_html_escapes():
    raw = "a < b & c"
    seq = prepare(raw, "x")
    assert markup(seq, [], "html", raw) == "a &lt; b &amp; c"


def test_token_spans_follow_raw_offsets():
    raw = "Marsh (AIG) agreed-to pay"
    spans = token_spans(raw)
    assert [raw[s:e] for s, e in spans] == ["Marsh", "AIG", "agreed", "to", "pay"]


def test_insurance_example_highlights_names():
    raw_o, raw_s = raw_article("insurance", "original"), raw_article("insurance", "suspicious")
    o, s = load_article("insurance", "original"), load_article("insurance", "suspicious")
    pats = pair_patterns(o, s)
    html = render_pair_markup(o, pats, 3, raw=raw_o)
    highlighted = " ".join(re.findall(r"<span[^>]*>(.*?)</span>", html))
    for phrase in ("American International Group", "Eliot Spitzer", "Marsh &amp; McLennan"):
        assert phrase in highlighted
    assert ANSI.sub("", render_pair_markup(o, pats, 3, fmt="ansi", raw=raw_o)) == raw_o


def test_reference_column_shows_both_pairs(article038):
    o, s, r = article038["original"], article038["suspicious"], article038["reference"]
    index = build_index([o, s, r])
    ro = Highlight("RO", frozenset(coverage(r, common_patterns(index, "reference", "original"), 3)))
    rs = Highlight("RS", frozenset(coverage(r, common_patterns(index, "reference", "suspicious"), 3)))
    html = markup(r, [ro, rs], "html", raw_article("business_038", "reference"))
    assert "pair-ro-rs" in html and "pair-rs" in html
    page = html_page("038", [("reference", html)])
    assert page.startswith("<!DOCTYPE html>") and "</table>" in page


def test_figures_written(tmp_path):
    rows = [("a vs b", "--███--"), ("b vs a", "███----")]
    png = plot_block_diagram(rows, tmp_path / "blocks.png", title="t")
    assert png.stat().st_size > 1000
    cm_png = plot_confusion_matrices(FIG20, tmp_path / "cm.png")
    assert cm_png.read_bytes()[:4] == b"\x89PNG"
