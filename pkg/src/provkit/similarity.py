"""Directed, base-dependent similarity ratios per pattern length.

The similarity of ``base`` to ``other`` at length ``L`` is the share of the
base text's word positions that lie inside at least one base-side
occurrence of a common pattern of length ``L`` or longer.  Overlapping
occurrences are unioned, so every position counts once.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterable, NamedTuple

from provkit.corpus import TokenSequence
from provkit.patterns import (
    DEFAULT_CAP,
    DEFAULT_MIN_LEN,
    CommonPatternSet,
    build_index,
    common_patterns,
)


class SimilarityError(ValueError):
    pass


@dataclass(frozen=True)
class ProfileRow:
    length: int
    covered_words: int
    ratio: float


@dataclass(frozen=True)
class SimilarityProfile:
    base: str
    other: str
    base_word_count: int
    rows: tuple[ProfileRow, ...]

    @property
    def lengths(self) -> list[int]:
        return [r.length for r in self.rows]

    def ratio(self, length: int) -> float:
        return self.row(length).ratio

    def covered(self, length: int) -> int:
        return self.row(length).covered_words

    def row(self, length: int) -> ProfileRow:
        for r in self.rows:
            if r.length == length:
                return r
        raise KeyError(length)

    @property
    def ratios(self) -> dict[int, float]:
        return {r.length: r.ratio for r in self.rows}


class TripleProfiles(NamedTuple):
    original_suspicious: SimilarityProfile
    reference_original: SimilarityProfile
    reference_suspicious: SimilarityProfile


def _longest_at(base: TokenSequence, patterns: CommonPatternSet) -> list[int]:
    """Length of the longest common pattern starting at each base position."""
    longest = [0] * base.word_count
    for p in patterns:
        n = len(p.words)
        for start in p.occurrences.get(base.doc_id, ()):
            if n > longest[start]:
                longest[start] = n
    return longest


def _covered_by_threshold(longest: list[int], length: int) -> int:
    covered = 0
    reach = 0
    for pos, n in enumerate(longest):
        if n >= length:
            reach = max(reach, pos + n)
        if pos < reach:
            covered += 1
    return covered


def coverage(base: TokenSequence, patterns: CommonPatternSet, length: int) -> set[int]:
    """Positions of ``base`` covered by common patterns of length >= ``length``."""
    if base.doc_id not in patterns.pair:
        raise SimilarityError(f"pattern set {patterns.pair} does not involve {base.doc_id!r}")
    positions: set[int] = set()
    for start, n in enumerate(_longest_at(base, patterns)):
        if n >= length:
            positions.update(range(start, start + n))
    return positions


def profile(
    base: TokenSequence,
    other: TokenSequence,
    patterns: CommonPatternSet | None = None,
    min_len: int = DEFAULT_MIN_LEN,
    cap: int = DEFAULT_CAP,
) -> SimilarityProfile:
    """One row per length in ``min_len..cap``; patterns are computed if omitted."""
    if base.word_count == 0:
        raise SimilarityError(f"base document {base.doc_id!r} is empty")
    if patterns is None:
        patterns = common_patterns(build_index([base, other], min_len, cap), base.doc_id, other.doc_id)
    elif set(patterns.pair) != {base.doc_id, other.doc_id}:
        raise SimilarityError(f"pattern set {patterns.pair} is not for ({base.doc_id}, {other.doc_id})")
    longest = _longest_at(base, patterns)
    rows = []
    for length in range(min_len, cap + 1):
        n = _covered_by_threshold(longest, length)
        rows.append(ProfileRow(length, n, n / base.word_count))
    return SimilarityProfile(base.doc_id, other.doc_id, base.word_count, tuple(rows))


def profile_triple(
    original: TokenSequence,
    suspicious: TokenSequence,
    reference: TokenSequence,
    min_len: int = DEFAULT_MIN_LEN,
    cap: int = DEFAULT_CAP,
) -> TripleProfiles:
    """Original-Suspicious, Reference-Original and Reference-Suspicious profiles.

    All three pair sets come from one shared three-document index.  The
    first profile uses the Original as base, the other two the Reference.
    """
    ids = {original.doc_id, suspicious.doc_id, reference.doc_id}
    if len(ids) != 3:
        raise SimilarityError("profile_triple needs three distinct document ids")
    index = build_index([original, suspicious, reference], min_len, cap)
    o, s, r = original.doc_id, suspicious.doc_id, reference.doc_id
    return TripleProfiles(
        profile(original, suspicious, common_patterns(index, o, s), min_len, cap),
        profile(reference, original, common_patterns(index, r, o), min_len, cap),
        profile(reference, suspicious, common_patterns(index, r, s), min_len, cap),
    )


PROFILE_COLUMNS = ("base_id", "other_id", "L", "covered_words", "ratio")


def write_profiles_csv(profiles: Iterable[SimilarityProfile], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(PROFILE_COLUMNS)
    for prof in profiles:
        for r in prof.rows:
            writer.writerow([prof.base, prof.other, r.length, r.covered_words, f"{r.ratio:.6f}"])


def read_profiles_csv(fh: IO[str]) -> list[SimilarityProfile]:
    """Inverse of :func:`write_profiles_csv` (ratios come back at 6 digits).

    ``base_word_count`` is not stored in the CSV; it is recovered from the
    first row with non-zero coverage, or left at 0 when every row is empty.
    """
    grouped: dict[tuple[str, str], list[ProfileRow]] = {}
    for rec in csv.DictReader(fh):
        grouped.setdefault((rec["base_id"], rec["other_id"]), []).append(
            ProfileRow(int(rec["L"]), int(rec["covered_words"]), float(rec["ratio"]))
        )
    out = []
    for (base, other), rows in grouped.items():
        rows.sort(key=lambda r: r.length)
        count = next((round(r.covered_words / r.ratio) for r in rows if r.ratio > 0), 0)
        out.append(SimilarityProfile(base, other, count, tuple(rows)))
    return out
