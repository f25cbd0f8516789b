"""Bootstrap-of-means and two-sample t-tests between similarity classes.

Round ``r`` of a bootstrap draws its sample with a SplitMix64 generator
seeded with ``seed_base + r``.  SplitMix64 is pure 64-bit integer
arithmetic and the round mean uses ``math.fsum`` (correctly rounded), so
the output is bit-identical on every platform.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import combinations
from typing import IO, Iterable, Mapping, Sequence

from scipy.special import betainc

from provkit.similarity import SimilarityProfile

_MASK64 = (1 << 64) - 1


class StatsError(ValueError):
    pass


class SplitMix64:
    """Steele, Lea & Flood's SplitMix64 generator."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def sample_indices(self, population: int, k: int, replacement: bool = False) -> list[int]:
        if replacement:
            return [self.randbelow(population) for _ in range(k)]
        if k > population:
            raise StatsError(f"cannot draw {k} of {population} without replacement")
        idx = list(range(population))
        for i in range(k):
            j = i + self.randbelow(population - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]


@dataclass(frozen=True)
class BootstrapSpec:
    rounds: int = 100
    sample_size: int = 30
    replacement: bool = False
    seed_base: int = 0

    def __post_init__(self):
        if self.rounds < 2:
            raise StatsError("bootstrap needs at least 2 rounds")
        if self.sample_size < 2:
            raise StatsError("bootstrap sample size must be at least 2")


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    p_value: float
    df: float
    mean_a: float
    mean_b: float
    n_a: int
    n_b: int


def bootstrap_means(values: Sequence[float], spec: BootstrapSpec | None = None) -> list[float]:
    spec = spec or BootstrapSpec()
    if not values:
        raise StatsError("bootstrap_means needs a non-empty population")
    if not spec.replacement and spec.sample_size > len(values):
        raise StatsError(
            f"sample size {spec.sample_size} exceeds population {len(values)} without replacement"
        )
    means = []
    for r in range(spec.rounds):
        rng = SplitMix64(spec.seed_base + r)
        picks = rng.sample_indices(len(values), spec.sample_size, spec.replacement)
        means.append(math.fsum(values[i] for i in picks) / spec.sample_size)
    return means


def _mean_var(xs: Sequence[float]) -> tuple[float, float]:
    m = math.fsum(xs) / len(xs)
    return m, math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1)


def welch_t_test(a: Sequence[float], b: Sequence[float], *, equal_var: bool = False) -> TTestResult:
    """Two-sided two-sample t-test; Welch's unequal-variance form by default.

    With ``equal_var`` the pooled-variance Student test is used instead.
    """
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise StatsError("each sample needs at least two values")
    ma, va = _mean_var(a)
    mb, vb = _mean_var(b)

    if equal_var:
        df = float(na + nb - 2)
        pooled = ((na - 1) * va + (nb - 1) * vb) / df
        se2 = pooled * (1 / na + 1 / nb)
    else:
        qa, qb = va / na, vb / nb
        se2 = qa + qb
        denom = qa * qa / (na - 1) + qb * qb / (nb - 1)
        df = se2 * se2 / denom if denom > 0 else float(na + nb - 2)

    if se2 == 0:
        if ma == mb:
            return TTestResult(0.0, 1.0, df, ma, mb, na, nb)
        raise StatsError("both samples have zero variance but different means")
    if not math.isfinite(df) or df <= 0:
        raise StatsError(f"degenerate degrees of freedom: {df}")

    t = (ma - mb) / math.sqrt(se2)
    p = float(betainc(df / 2, 0.5, df / (df + t * t)))
    return TTestResult(t, min(max(p, 0.0), 1.0), df, ma, mb, na, nb)


def format_p(p: float) -> str:
    return "<10 ⁻⁴" if p < 1e-4 else f"{p:.4f}"


def class_comparison(
    profiles: Mapping[str, Sequence[SimilarityProfile]],
    class_a: str,
    class_b: str,
    length: int,
    spec: BootstrapSpec | None = None,
    *,
    equal_var: bool = False,
) -> TTestResult:
    """Bootstrap the ratio at ``length`` for two classes, then t-test the round means."""
    spec = spec or BootstrapSpec()
    samples = []
    for name in (class_a, class_b):
        profs = profiles.get(name) or []
        if not profs:
            raise StatsError(f"class {name!r} has no profiles")
        values = [p.ratio(length) for p in profs]
        samples.append(bootstrap_means(values, spec))
    return welch_t_test(samples[0], samples[1], equal_var=equal_var)


@dataclass(frozen=True)
class ComparisonRow:
    category: str
    pattern_length: int
    comparison: str
    result: TTestResult


def comparison_table(
    profiles: Mapping[str, Sequence[SimilarityProfile]],
    lengths: Iterable[int],
    *,
    category: str = "all",
    pairs: Sequence[tuple[str, str]] | None = None,
    spec: BootstrapSpec | None = None,
    equal_var: bool = False,
) -> list[ComparisonRow]:
    pairs = list(pairs) if pairs is not None else list(combinations(list(profiles), 2))
    rows = []
    for L in lengths:
        for a, b in pairs:
            res = class_comparison(profiles, a, b, L, spec, equal_var=equal_var)
            rows.append(ComparisonRow(category, L, f"{a} vs {b}", res))
    return rows


TABLE2_COLUMNS = ("category", "pattern_length", "comparison", "t_statistic", "p_value")


def write_table2_csv(rows: Iterable[ComparisonRow], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TABLE2_COLUMNS)
    for row in rows:
        writer.writerow([
            row.category,
            row.pattern_length,
            row.comparison,
            f"{row.result.t_statistic:.3f}",
            format_p(row.result.p_value),
        ])
