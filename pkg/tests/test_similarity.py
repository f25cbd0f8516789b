import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from provkit.corpus import TokenSequence
from provkit.patterns import build_index, common_patterns, pair_patterns
from provkit.similarity import (
    SimilarityError,
    coverage,
    profile,
    profile_triple,
    read_profiles_csv,
    write_profiles_csv,
)

from . import oracles
from .conftest import random_doc


def seq(doc_id, text):
    return TokenSequence(doc_id, tuple(text.split()))


def words(prefix, n):
    return tuple(f"{prefix}{i}" for i in range(n))


def test_coverage_single_trigram():
    base, other = seq("b", "a b c d"), seq("o", "a b c x")
    pats = pair_patterns(base, other)
    assert coverage(base, pats, 3) == {0, 1, 2}
    prof = profile(base, other, pats)
    assert prof.covered(3) == 3
    assert prof.ratio(3) == 0.75


def test_coverage_identical_texts():
    text = " ".join(words("t", 10))
    a, b = seq("a", text), seq("b", text)
    assert coverage(a, pair_patterns(a, b), 3) == set(range(10))


def test_coverage_rejects_foreign_pattern_set():
    a, b, c = seq("a", "x y z"), seq("b", "x y z"), seq("c", "x y z")
    with pytest.raises(SimilarityError):
        coverage(c, pair_patterns(a, b), 3)


def test_profile_disjoint_and_identical():
    a = TokenSequence("a", words("p", 20))
    b = TokenSequence("b", words("q", 20))
    c = TokenSequence("c", words("p", 20))
    assert all(r.ratio == 0 for r in profile(a, b).rows)
    prof = profile(a, c)
    assert [r.length for r in prof.rows] == list(range(3, 16))
    assert all(r.ratio == 1.0 for r in prof.rows)


def test_profile_empty_base():
    with pytest.raises(SimilarityError):
        profile(TokenSequence("a", ()), seq("b", "x y z"))


def test_base_dependent_ratio_worked_example():
    # 100- and 200-word texts sharing one 30-word block: 30% vs 15%.
    block = words("shared", 30)
    a = TokenSequence("orig", words("a", 35) + block + words("a_tail", 35))
    b = TokenSequence("susp", words("b", 100) + block + words("b_tail", 70))
    assert (a.word_count, b.word_count) == (100, 200)
    pats = pair_patterns(a, b)
    assert profile(a, b, pats).ratio(3) == 0.30
    assert profile(b, a, pats).ratio(3) == 0.15
    assert profile(a, b, pats).ratio(15) == 0.30


def test_profile_matches_oracle_seeded():
    rng = random.Random(99)
    for _ in range(100):
        a, b = random_doc(rng, "A"), random_doc(rng, "B")
        pats = pair_patterns(a, b)
        prof = profile(a, b, pats)
        for L in range(3, 16):
            expected = oracles.covered_positions(list(a.tokens), list(b.tokens), L, 15)
            assert coverage(a, pats, L) == expected
            assert prof.covered(L) == len(expected)


def test_profile_triple_directions():
    o = TokenSequence("o", words("o", 30))
    s = TokenSequence("s", words("s", 25))
    r = TokenSequence("r", words("s", 25))
    t = profile_triple(o, s, r)
    assert (t.original_suspicious.base, t.original_suspicious.other) == ("o", "s")
    assert (t.reference_original.base, t.reference_original.other) == ("r", "o")
    assert (t.reference_suspicious.base, t.reference_suspicious.other) == ("r", "s")
    assert all(x.ratio == 1.0 for x in t.reference_suspicious.rows)
    assert all(x.ratio == 0.0 for x in t.reference_original.rows)


def test_profile_triple_all_identical():
    text = words("x", 18)
    t = profile_triple(TokenSequence("o", text), TokenSequence("s", text), TokenSequence("r", text))
    assert all(r.ratio == 1.0 for prof in t for r in prof.rows)


def test_profile_triple_requires_distinct_ids():
    a = seq("a", "x y z")
    with pytest.raises(SimilarityError):
        profile_triple(a, a, seq("r", "x y z"))


def test_article_183_reference_ratios(article183):
    t = profile_triple(article183["original"], article183["suspicious"], article183["reference"])
    ro, rs = t.reference_original, t.reference_suspicious
    assert abs(ro.covered(3) - 89) <= 4
    assert abs(rs.covered(3) - 59) <= 4
    assert abs(100 * ro.ratio(3) - 22.53) <= 1.0
    assert abs(100 * rs.ratio(3) - 14.94) <= 1.0


def test_article_038_reference_closer_to_suspicious(article038):
    t = profile_triple(article038["original"], article038["suspicious"], article038["reference"])
    assert t.reference_suspicious.ratio(3) > t.reference_original.ratio(3)
    r = article038["reference"]
    for prof, partner in ((t.reference_original, "original"), (t.reference_suspicious, "suspicious")):
        expected = oracles.covered_positions(list(r.tokens), list(article038[partner].tokens), 3, 15)
        assert prof.covered(3) == len(expected)


def test_profile_csv_roundtrip():
    a, b = seq("a", "p q r s t u"), seq("b", "p q r x y")
    pats = pair_patterns(a, b)
    profs = [profile(a, b, pats), profile(b, a, pats)]
    buf = io.StringIO()
    write_profiles_csv(profs, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "base_id,other_id,L,covered_words,ratio"
    assert lines[1] == "a,b,3,3,0.500000"
    back = read_profiles_csv(io.StringIO(buf.getvalue()))
    assert [p.base for p in back] == ["a", "b"]
    assert back[0].base_word_count == 6
    assert back[1].ratio(3) == pytest.approx(0.6)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.sampled_from("abc"), min_size=1, max_size=50),
    st.lists(st.sampled_from("abc"), min_size=1, max_size=50),
)
def test_profile_invariants(ta, tb):
    a, b = TokenSequence("A", tuple(ta)), TokenSequence("B", tuple(tb))
    prof = profile(a, b)
    ratios = [r.ratio for r in prof.rows]
    assert all(0.0 <= x <= 1.0 for x in ratios)
    assert all(x >= y for x, y in zip(ratios, ratios[1:]))
    for r in prof.rows:
        assert r.ratio == r.covered_words / a.word_count
    twin = TokenSequence("A2", a.tokens)
    self_prof = profile(a, twin)
    for r in self_prof.rows:
        if r.length <= a.word_count:
            assert r.ratio == 1.0
