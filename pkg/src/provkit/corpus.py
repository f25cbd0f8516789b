"""Article ingestion, cleaning and tokenization.

Documents carry one of four roles: the authentic ``Original``, the
``Suspicious`` text under investigation, a temperature-0 ``Reference``
paraphrase produced on purpose, and an ``Other`` text from a non-ChatGPT
source used as the negative class.
"""

from __future__ import annotations

import csv
import enum
import logging
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

log = logging.getLogger(__name__)

# Characters replaced by a single space before tokenization.
CLEANING_SET = frozenset('.,;!?:()-*[]{}\\/"#')

_TYPOGRAPHIC = str.maketrans({
    "“": '"',
    "”": '"',
    "„": '"',
    "‘": "'",
    "’": "'",
})
_CLEAN_TABLE = {ord(c): " " for c in CLEANING_SET}

ROLE_SUFFIXES = {"suspicious": "-suspicious", "reference": "-reference", "other": "-other"}


class Role(str, enum.Enum):
    ORIGINAL = "Original"
    SUSPICIOUS = "Suspicious"
    REFERENCE = "Reference"
    OTHER = "Other"

    @classmethod
    def parse(cls, value: str) -> "Role":
        for role in cls:
            if role.value.lower() == value.strip().lower():
                return role
        raise ValueError(f"unknown role: {value!r}")


class CorpusError(Exception):
    """Raised for unrecoverable ingestion problems (duplicate ids, bad manifests)."""


@dataclass(frozen=True)
class Document:
    id: str
    category: str
    role: Role
    raw_text: str
    article: str = ""
    label: str | None = None


@dataclass(frozen=True)
class TokenSequence:
    doc_id: str
    tokens: tuple[str, ...]

    @property
    def word_count(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class CategoryStats:
    count: int
    max: int
    min: int
    mean: float
    stdev: float


@dataclass
class IngestError:
    path: str
    reason: str


@dataclass
class Corpus:
    documents: list[Document] = field(default_factory=list)
    errors: list[IngestError] = field(default_factory=list)

    def __iter__(self):
        return iter(self.documents)

    def __len__(self) -> int:
        return len(self.documents)

    def by_role(self, role: Role) -> list[Document]:
        return [d for d in self.documents if d.role is role]


def clean_text(raw: str, *, strip_apostrophes: bool = False) -> str:
    """Replace every cleaning-set character with a space.

    Typographic quotes are first folded to their straight forms, so curly
    double quotes are cleaned like ``"``.  Apostrophes survive unless
    ``strip_apostrophes`` is set.
    """
    text = raw.translate(_TYPOGRAPHIC).translate(_CLEAN_TABLE)
    if strip_apostrophes:
        text = text.replace("'", " ")
    return text


def tokenize(cleaned: str, doc_id: str = "", *, lowercase: bool = True) -> TokenSequence:
    words = cleaned.split()
    if lowercase:
        words = [w.lower() for w in words]
    return TokenSequence(doc_id, tuple(words))


def prepare(
    raw: str,
    doc_id: str = "",
    *,
    lowercase: bool = True,
    strip_apostrophes: bool = False,
) -> TokenSequence:
    """clean_text followed by tokenize."""
    return tokenize(clean_text(raw, strip_apostrophes=strip_apostrophes), doc_id, lowercase=lowercase)


def _doc_id(role: Role, category: str, article: str) -> str:
    if role is Role.ORIGINAL:
        return f"{category}/{article}"
    return f"{category}/{article}#{role.value.lower()}"


def _read(path: Path, errors: list[IngestError]) -> str | None:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        log.warning("skipping unreadable file %s: %s", path, exc)
        errors.append(IngestError(str(path), str(exc)))
        return None


def _scan_root(root: Path, role: Role, corpus: Corpus, seen: set[str]) -> None:
    for cat_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for path in sorted(cat_dir.glob("*.txt")):
            text = _read(path, corpus.errors)
            if text is None:
                continue
            doc = Document(_doc_id(role, cat_dir.name, path.stem), cat_dir.name, role, text, path.stem)
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
            corpus.documents.append(doc)


def ingest_corpus(root: str | Path, *, companions: bool = True) -> Corpus:
    """Load ``<root>/<category>/<article>.txt`` files as Original documents.

    With ``companions`` set, sibling roots named ``<root>-suspicious``,
    ``<root>-reference`` and ``<root>-other`` are scanned too and their files
    get the matching role.  Documents come back ordered by (category, file
    name) within each role, roles in the order Original, Suspicious,
    Reference, Other.
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"dataset root {root} is not a directory")
    corpus = Corpus()
    seen: set[str] = set()
    _scan_root(root, Role.ORIGINAL, corpus, seen)
    if companions:
        for name, suffix in ROLE_SUFFIXES.items():
            sibling = root.with_name(root.name + suffix)
            if sibling.is_dir():
                _scan_root(sibling, Role.parse(name), corpus, seen)
    corpus.documents.sort(key=lambda d: (list(Role).index(d.role), d.category, d.article))
    return corpus


def load_manifest(path: str | Path) -> Corpus:
    """Load documents listed in a CSV manifest.

    Required columns: ``id, category, role, path``.  Optional columns:
    ``article`` (groups an Original with its companions; defaults to the
    file stem) and ``label`` (true class for evaluation).  Relative paths
    resolve against the manifest's directory.
    """
    path = Path(path)
    corpus = Corpus()
    seen: set[str] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"id", "category", "role", "path"} - set(reader.fieldnames or ())
        if missing:
            raise CorpusError(f"manifest {path} lacks columns: {', '.join(sorted(missing))}")
        has_label = "label" in (reader.fieldnames or ())
        for row in reader:
            doc_path = Path(row["path"])
            if not doc_path.is_absolute():
                doc_path = path.parent / doc_path
            if row["id"] in seen:
                raise CorpusError(f"duplicate document id {row['id']!r}")
            seen.add(row["id"])
            text = _read(doc_path, corpus.errors)
            if text is None:
                continue
            try:
                role = Role.parse(row["role"])
            except ValueError as exc:
                raise CorpusError(str(exc)) from None
            label = (row.get("label") or "").strip() if has_label else None
            corpus.documents.append(Document(
                id=row["id"],
                category=row["category"],
                role=role,
                raw_text=text,
                article=(row.get("article") or "").strip() or doc_path.stem,
                label=label,
            ))
    corpus.documents.sort(key=lambda d: (d.category, d.article, list(Role).index(d.role), d.id))
    return corpus


def corpus_stats(
    docs: Mapping[str, Sequence[TokenSequence]] | Iterable[tuple[str, TokenSequence]],
) -> dict[str, CategoryStats]:
    """Per-category word-count summary (sample standard deviation).

    Accepts either a ``{category: [TokenSequence, ...]}`` mapping or an
    iterable of ``(category, TokenSequence)`` pairs.  Empty categories are
    left out.
    """
    if isinstance(docs, Mapping):
        grouped = {k: list(v) for k, v in docs.items()}
    else:
        grouped = defaultdict(list)
        for category, seq in docs:
            grouped[category].append(seq)
    if not grouped:
        raise ValueError("corpus_stats needs at least one document")

    out = {}
    for category in sorted(grouped):
        counts = [s.word_count for s in grouped[category]]
        if not counts:
            continue
        out[category] = CategoryStats(
            count=len(counts),
            max=max(counts),
            min=min(counts),
            mean=statistics.fmean(counts),
            stdev=statistics.stdev(counts) if len(counts) > 1 else 0.0,
        )
    return out
