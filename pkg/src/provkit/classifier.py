"""Two-phase waterfall classification.

Phase I compares the Original-Suspicious similarity at every pattern length
with a threshold and votes ``+weight`` above it and ``-weight`` otherwise; a
positive sum marks the Suspicious text as a near copy and stops.  Phase II
only runs when Phase I is inconclusive: a Reference paraphrase of the
Original is produced and, per length, the vote is ``+weight`` when the
Reference is more similar to the Suspicious than to the Original.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Any, Callable, Mapping

from provkit.corpus import TokenSequence
from provkit.patterns import DEFAULT_CAP, DEFAULT_MIN_LEN
from provkit.similarity import SimilarityProfile, profile, profile_triple


class ConfigError(ValueError):
    pass


class ReferenceUnavailable(RuntimeError):
    """The reference provider failed; the original exception is ``__cause__``."""


class Label(str, enum.Enum):
    NEAR_COPY = "NearCopy"
    CHATGPT = "ChatGPTParaphrase"
    OTHER = "Other"
    INCONCLUSIVE = "Inconclusive"  # Phase I only; never returned by classify


PHASE1_BASES = ("original", "suspicious", "min")


@dataclass
class ClassifierConfig:
    min_len: int = DEFAULT_MIN_LEN
    cap: int = DEFAULT_CAP
    weights: dict[int, float] = field(default_factory=dict)
    phase1_thresholds: dict[int, float] = field(default_factory=dict)
    phase1_base: str = "original"

    def __post_init__(self):
        if not 1 <= self.min_len <= self.cap:
            raise ConfigError(f"need 1 <= min_len <= cap, got {self.min_len}, {self.cap}")
        self.weights = {int(k): float(v) for k, v in self.weights.items()}
        self.phase1_thresholds = {int(k): float(v) for k, v in self.phase1_thresholds.items()}
        for length in self.lengths:
            self.weights.setdefault(length, 1.0)
            self.phase1_thresholds.setdefault(length, 0.80)
        if any(w <= 0 for w in self.weights.values()):
            raise ConfigError("weights must be strictly positive")
        if any(not 0.0 <= t <= 1.0 for t in self.phase1_thresholds.values()):
            raise ConfigError("phase1 thresholds must lie in [0, 1]")
        if self.phase1_base not in PHASE1_BASES:
            raise ConfigError(f"phase1_base must be one of {PHASE1_BASES}")

    @property
    def lengths(self) -> range:
        return range(self.min_len, self.cap + 1)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ClassifierConfig":
        """Build from a parsed JSON object; unknown keys are ignored.

        ``weights`` and ``phase1_thresholds`` may be maps keyed by pattern
        length, arrays aligned with ``min_len..cap``, or a single number.
        """
        min_len = int(data.get("min_len", DEFAULT_MIN_LEN))
        cap = int(data.get("cap", DEFAULT_CAP))

        def per_length(name):
            value = data.get(name)
            if value is None:
                return {}
            if isinstance(value, (int, float)):
                return {L: value for L in range(min_len, cap + 1)}
            if isinstance(value, list):
                if len(value) != cap - min_len + 1:
                    raise ConfigError(f"{name} array needs {cap - min_len + 1} entries")
                return dict(zip(range(min_len, cap + 1), value))
            if isinstance(value, Mapping):
                return {int(k): v for k, v in value.items()}
            raise ConfigError(f"cannot interpret {name}={value!r}")

        try:
            return cls(
                min_len=min_len,
                cap=cap,
                weights=per_length("weights"),
                phase1_thresholds=per_length("phase1_thresholds"),
                phase1_base=str(data.get("phase1_base", "original")).lower(),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> "ClassifierConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_mapping(data)

    def to_dict(self) -> dict:
        return {
            "min_len": self.min_len,
            "cap": self.cap,
            "weights": {str(k): self.weights[k] for k in self.lengths},
            "phase1_thresholds": {str(k): self.phase1_thresholds[k] for k in self.lengths},
            "phase1_base": self.phase1_base,
        }


@dataclass(frozen=True)
class Verdict:
    label: Label
    phase: int
    score: float
    contributions: dict[int, float]
    spread: float | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "phase": self.phase,
            "score": self.score,
            "contributions": {str(k): v for k, v in sorted(self.contributions.items())},
            "spread": self.spread,
        }


def _check_lengths(prof: SimilarityProfile, config: ClassifierConfig) -> None:
    if prof.lengths != list(config.lengths):
        raise ConfigError(
            f"profile covers lengths {prof.lengths[:1]}..{prof.lengths[-1:]}, "
            f"config expects {config.min_len}..{config.cap}"
        )


def _phase1_vote(ratios: Mapping[int, float], config: ClassifierConfig) -> Verdict:
    contributions = {}
    for L in config.lengths:
        w = config.weights[L]
        contributions[L] = w if ratios[L] > config.phase1_thresholds[L] else -w
    score = sum(contributions.values())
    label = Label.NEAR_COPY if score > 0 else Label.INCONCLUSIVE
    return Verdict(label, 1, score, contributions)


def phase1(profile_os: SimilarityProfile, config: ClassifierConfig) -> Verdict:
    """Threshold vote on the Original-Suspicious profile.

    Returns a NearCopy verdict, or one labelled Inconclusive when the
    waterfall has to continue with Phase II.
    """
    _check_lengths(profile_os, config)
    return _phase1_vote(profile_os.ratios, config)


def phase2(profile_ro: SimilarityProfile, profile_rs: SimilarityProfile, config: ClassifierConfig) -> Verdict:
    if profile_ro.base != profile_rs.base:
        raise ConfigError(
            f"Phase II profiles need a shared Reference base, got {profile_ro.base!r} and {profile_rs.base!r}"
        )
    _check_lengths(profile_ro, config)
    _check_lengths(profile_rs, config)

    contributions: dict[int, float] = {}
    gaps = []
    for L in config.lengths:
        ro, rs = profile_ro.ratio(L), profile_rs.ratio(L)
        if ro == 0 and rs == 0:
            contributions[L] = 0.0
            continue
        w = config.weights[L]
        contributions[L] = w if rs > ro else -w
        gaps.append(rs - ro)
    score = sum(contributions.values())
    label = Label.CHATGPT if score > 0 else Label.OTHER
    return Verdict(label, 2, score, contributions, fmean(gaps) if gaps else None)


ReferenceProvider = Callable[[], TokenSequence]


def classify(
    original: TokenSequence,
    suspicious: TokenSequence,
    config: ClassifierConfig | None = None,
    reference_provider: ReferenceProvider | None = None,
) -> Verdict:
    """Run the waterfall; the provider is only called if Phase I is inconclusive.

    Raises :class:`ReferenceUnavailable` when Phase II is needed and the
    provider is missing or fails.
    """
    config = config or ClassifierConfig()
    lo, hi = config.min_len, config.cap

    if config.phase1_base == "original":
        first = phase1(profile(original, suspicious, None, lo, hi), config)
    elif config.phase1_base == "suspicious":
        first = phase1(profile(suspicious, original, None, lo, hi), config)
    else:
        a = profile(original, suspicious, None, lo, hi).ratios
        b = profile(suspicious, original, None, lo, hi).ratios
        first = _phase1_vote({L: min(a[L], b[L]) for L in config.lengths}, config)
    if first.label is Label.NEAR_COPY:
        return first

    if reference_provider is None:
        raise ReferenceUnavailable("Phase II needs a Reference text but no provider was given")
    try:
        reference = reference_provider()
    except Exception as exc:
        raise ReferenceUnavailable(f"reference provider failed: {exc}") from exc

    triple = profile_triple(original, suspicious, reference, lo, hi)
    return phase2(triple.reference_original, triple.reference_suspicious, config)
