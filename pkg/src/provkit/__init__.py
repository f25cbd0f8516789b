"""Pattern-similarity detection of ChatGPT paraphrases of news articles."""

from provkit.classifier import ClassifierConfig, Label, Verdict, classify, phase1, phase2
from provkit.corpus import Document, Role, TokenSequence, clean_text, prepare, tokenize
from provkit.patterns import build_index, common_patterns, detect_repeated
from provkit.similarity import SimilarityProfile, coverage, profile, profile_triple

__version__ = "0.1.0"

__all__ = [
    "ClassifierConfig",
    "Document",
    "Label",
    "Role",
    "SimilarityProfile",
    "TokenSequence",
    "Verdict",
    "build_index",
    "classify",
    "clean_text",
    "common_patterns",
    "coverage",
    "detect_repeated",
    "phase1",
    "phase2",
    "prepare",
    "profile",
    "profile_triple",
    "tokenize",
]
