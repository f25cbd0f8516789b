"""Brute-force references that share no code with the suffix-array path."""

from collections import defaultdict


def ngram_occurrences(docs, min_len, cap):
    """{words: {doc_id: [starts]}} for every n-gram of every doc, n in [min_len, cap]."""
    occ = defaultdict(lambda: defaultdict(list))
    for doc_id, tokens in docs.items():
        for n in range(min_len, cap + 1):
            for i in range(len(tokens) - n + 1):
                occ[tuple(tokens[i:i + n])][doc_id].append(i)
    return occ


def repeated_patterns(docs, min_len, cap):
    """Every n-gram occurring at least twice across all documents."""
    return {
        words: {d: tuple(v) for d, v in sorted(per_doc.items())}
        for words, per_doc in ngram_occurrences(docs, min_len, cap).items()
        if sum(len(v) for v in per_doc.values()) >= 2
    }


def shared_patterns(docs, a, b, min_len, cap):
    occ = ngram_occurrences({a: docs[a], b: docs[b]}, min_len, cap)
    return {
        words: {a: tuple(per_doc[a]), b: tuple(per_doc[b])}
        for words, per_doc in occ.items()
        if per_doc.get(a) and per_doc.get(b)
    }


def covered_positions(base, other, length, cap):
    """Mark every base position inside any n-gram (length <= n <= cap) also found in other."""
    other_grams = set()
    for n in range(length, cap + 1):
        for i in range(len(other) - n + 1):
            other_grams.add(tuple(other[i:i + n]))
    marked = set()
    for n in range(length, cap + 1):
        for i in range(len(base) - n + 1):
            if tuple(base[i:i + n]) in other_grams:
                marked.update(range(i, i + n))
    return marked
