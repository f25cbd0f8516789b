"""Word-level length-capped suffix array and all-repeated-pattern detection.

Every word position of every member document contributes one suffix whose
key is truncated at ``cap`` words (LERP-RSA).  Sorting those keys places all
occurrences of any pattern next to each other, so every repeated pattern of
length ``L`` is a maximal run of adjacent entries whose longest common prefix
is at least ``L`` (ARPaD).  Patterns shared by two documents are the repeated
patterns with occurrences in both.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from itertools import groupby
from typing import IO, Iterator, Sequence

from provkit.corpus import TokenSequence

DEFAULT_MIN_LEN = 3
DEFAULT_CAP = 15


class PatternIndexError(ValueError):
    """Invalid index construction or query."""


@dataclass(frozen=True)
class SuffixEntry:
    doc_id: str
    start: int
    key: tuple[str, ...]


@dataclass(frozen=True)
class CommonPattern:
    words: tuple[str, ...]
    occurrences: dict[str, tuple[int, ...]]

    def __len__(self) -> int:
        return len(self.words)

    @property
    def count(self) -> int:
        return sum(len(v) for v in self.occurrences.values())


@dataclass(frozen=True)
class CommonPatternSet:
    pair: tuple[str, str]
    patterns: tuple[CommonPattern, ...]

    def __len__(self) -> int:
        return len(self.patterns)

    def __iter__(self) -> Iterator[CommonPattern]:
        return iter(self.patterns)

    def word_sequences(self) -> set[tuple[str, ...]]:
        return {p.words for p in self.patterns}


class PatternIndex:
    """Sorted, cap-truncated suffixes of a small document collection.

    Build with :func:`build_index`.  The index is immutable; detection
    results are computed once and memoized.
    """

    def __init__(self, docs: Sequence[TokenSequence], min_len: int, cap: int):
        self.min_len = min_len
        self.cap = cap
        self.member_docs = tuple(docs)
        self._doc_ids = tuple(d.doc_id for d in docs)

        vocab = sorted({w for d in docs for w in d.tokens})
        self._vocab = vocab
        code = {w: i for i, w in enumerate(vocab)}
        doc_rank = {doc_id: r for r, doc_id in enumerate(sorted(self._doc_ids))}

        rows = []
        for d in docs:
            ids = [code[w] for w in d.tokens]
            r = doc_rank[d.doc_id]
            n = len(ids)
            for start in range(n):
                rows.append((tuple(ids[start:start + cap]), r, start, d.doc_id))
        rows.sort()

        self._keys = [row[0] for row in rows]
        self._starts = [row[2] for row in rows]
        self._owners = [row[3] for row in rows]
        self._lcp = _adjacent_lcp(self._keys)

    def __len__(self) -> int:
        return len(self._keys)

    @property
    def doc_ids(self) -> tuple[str, ...]:
        return self._doc_ids

    @property
    def entries(self) -> list[SuffixEntry]:
        vocab = self._vocab
        return [
            SuffixEntry(doc, start, tuple(vocab[i] for i in key))
            for key, doc, start in zip(self._keys, self._owners, self._starts)
        ]

    def shard_bounds(self) -> list[tuple[int, int]]:
        """Entry ranges grouped by the leading character of the first word."""
        vocab = self._vocab
        bounds, pos = [], 0
        for _, grp in groupby(self._keys, key=lambda k: vocab[k[0]][0]):
            size = sum(1 for _ in grp)
            bounds.append((pos, pos + size))
            pos += size
        return bounds

    def _scan(self, lo: int, hi: int) -> list[CommonPattern]:
        keys, lcp, owners, starts = self._keys, self._lcp, self._owners, self._starts
        vocab = self._vocab
        found = []
        for length in range(self.min_len, self.cap + 1):
            i = lo
            while i < hi:
                j = i
                while j + 1 < hi and lcp[j + 1] >= length:
                    j += 1
                if j > i:
                    occ: dict[str, list[int]] = {}
                    for k in range(i, j + 1):
                        occ.setdefault(owners[k], []).append(starts[k])
                    found.append(CommonPattern(
                        tuple(vocab[t] for t in keys[i][:length]),
                        {doc: tuple(sorted(pos)) for doc, pos in sorted(occ.items())},
                    ))
                i = j + 1
        return found

    @cached_property
    def repeated(self) -> tuple[CommonPattern, ...]:
        return tuple(detect_repeated(self))


def _adjacent_lcp(keys: list[tuple[int, ...]]) -> list[int]:
    lcp = [0] * len(keys)
    for i in range(1, len(keys)):
        a, b = keys[i - 1], keys[i]
        n = min(len(a), len(b))
        k = 0
        while k < n and a[k] == b[k]:
            k += 1
        lcp[i] = k
    return lcp


def build_index(
    docs: Sequence[TokenSequence],
    min_len: int = DEFAULT_MIN_LEN,
    cap: int = DEFAULT_CAP,
) -> PatternIndex:
    if not docs:
        raise PatternIndexError("build_index needs at least one document")
    if min_len < 1 or cap < min_len:
        raise PatternIndexError(f"need 1 <= min_len <= cap, got min_len={min_len}, cap={cap}")
    ids = [d.doc_id for d in docs]
    if len(set(ids)) != len(ids):
        raise PatternIndexError(f"duplicate doc ids in index: {ids}")
    for d in docs:
        if not d.tokens:
            raise PatternIndexError(f"document {d.doc_id!r} has no tokens")
    return PatternIndex(docs, min_len, cap)


def _pattern_order(p: CommonPattern):
    return (len(p.words), p.words)


def detect_repeated(index: PatternIndex, *, sharded: bool = False, workers: int = 1) -> list[CommonPattern]:
    """All word sequences of length ``min_len..cap`` occurring at least twice.

    The two occurrences may sit in the same document or in different ones.
    With ``sharded`` the sorted entries are split by the first word's
    leading character and each shard is scanned independently; the merged
    output is identical to the unsharded scan.
    """
    if sharded:
        bounds = index.shard_bounds()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda b: index._scan(*b), bounds))
        else:
            parts = [index._scan(lo, hi) for lo, hi in bounds]
        found = [p for part in parts for p in part]
    else:
        found = index._scan(0, len(index))
    found.sort(key=_pattern_order)
    return found


def common_patterns(index: PatternIndex, a: str, b: str) -> CommonPatternSet:
    """Repeated patterns occurring at least once in ``a`` and once in ``b``.

    Occurrence lists are restricted to the two documents of the pair.
    """
    if a == b:
        raise PatternIndexError("common_patterns needs two distinct documents")
    for doc in (a, b):
        if doc not in index.doc_ids:
            raise PatternIndexError(f"document {doc!r} is not in the index")
    pats = []
    for p in index.repeated:
        if a in p.occurrences and b in p.occurrences:
            pats.append(CommonPattern(p.words, {a: p.occurrences[a], b: p.occurrences[b]}))
    return CommonPatternSet((a, b), tuple(pats))


def pair_patterns(
    a: TokenSequence,
    b: TokenSequence,
    min_len: int = DEFAULT_MIN_LEN,
    cap: int = DEFAULT_CAP,
) -> CommonPatternSet:
    """Shortcut: index two documents and return their common patterns."""
    return common_patterns(build_index([a, b], min_len, cap), a.doc_id, b.doc_id)


def dump_index(index: PatternIndex, fh: IO[str]) -> None:
    """Write one tab-separated ``doc_id, start, key`` line per entry (debug aid)."""
    for e in index.entries:
        fh.write(f"{e.doc_id}\t{e.start}\t{' '.join(e.key)}\n")
