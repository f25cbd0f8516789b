"""``provkit`` command line.

Exit codes: 0 success, 2 input error, 3 provider error, 4 config error.
Errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import threading
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

from provkit import __version__
from provkit.classifier import ClassifierConfig, ConfigError, ReferenceUnavailable, classify
from provkit.corpus import Corpus, CorpusError, Role, TokenSequence, corpus_stats, ingest_corpus, load_manifest, prepare
from provkit.evaluation import (
    EvaluationError,
    Label,
    aggregate,
    build_report,
    pct,
    score_run,
    write_metrics_csv,
    write_report_json,
)
from provkit.llmclient import (
    SUSPICIOUS_TEMPERATURE,
    DiskCache,
    LLMSettings,
    ParaphraseRequest,
    ProviderError,
    StubBackend,
    paraphrase,
)
from provkit.patterns import build_index, common_patterns, pair_patterns
from provkit.render import Highlight, html_page, markup, render_block_diagram
from provkit.similarity import SimilarityProfile, coverage, profile, profile_triple, read_profiles_csv, write_profiles_csv
from provkit.stats import BootstrapSpec, StatsError, comparison_table, write_table2_csv

log = logging.getLogger("provkit")

EXIT_OK, EXIT_INPUT, EXIT_PROVIDER, EXIT_CONFIG = 0, 2, 3, 4


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# -- shared helpers -----------------------------------------------------------

def _load_settings(args) -> tuple[ClassifierConfig, LLMSettings]:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise CLIError(f"cannot read config: {exc}", EXIT_INPUT) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    if args.min_len is not None:
        data["min_len"] = args.min_len
    if args.cap is not None:
        data["cap"] = args.cap
    config = ClassifierConfig.from_mapping(data)

    llm_data = dict(data.get("llm", {}))
    llm_data.update({k: data[k] for k in ("endpoint_url", "model", "rpm_limit", "cache_dir") if k in data})
    for flag in ("endpoint_url", "model", "cache_dir"):
        if getattr(args, flag, None):
            llm_data[flag] = getattr(args, flag)
    try:
        llm = LLMSettings.from_mapping(llm_data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return config, llm


def _backend(args, llm: LLMSettings):
    if args.backend == "echo":
        return StubBackend(echo=True)
    if args.backend == "table":
        if not args.stub_table:
            raise ConfigError("--backend table needs --stub-table")
        table = json.loads(_read(args.stub_table))
        return StubBackend(table=table)
    return llm.backend()


def _cache(args, llm: LLMSettings) -> DiskCache | None:
    return DiskCache(args.cache_dir) if args.cache_dir else llm.cache()


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CLIError(f"cannot read {path}: {exc}", EXIT_INPUT) from exc


def _tokens(args, raw: str, doc_id: str) -> TokenSequence:
    return prepare(raw, doc_id, lowercase=not args.keep_case, strip_apostrophes=args.strip_apostrophes)


@contextmanager
def _output(path) -> Iterator:
    if path in (None, "-"):
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _reference_provider(args, llm: LLMSettings, raw_original: str, doc_id: str):
    """Callable producing the Reference tokens via the configured backend (memoized)."""
    state: dict = {}
    lock = threading.Lock()

    def provide() -> TokenSequence:
        with lock:
            if "ref" not in state:
                if "backend" not in state:
                    state["backend"] = _backend(args, llm)
                req = ParaphraseRequest(raw_original, llm.temperature, llm.model, llm.prompt_template)
                result = paraphrase(req, state["backend"], _cache(args, llm))
                state["ref"] = _tokens(args, result.text, doc_id)
            return state["ref"]

    return provide


# -- subcommands --------------------------------------------------------------

def cmd_classify(args) -> int:
    config, llm = _load_settings(args)
    raw_o = _read(args.original)
    original = _tokens(args, raw_o, "original")
    suspicious = _tokens(args, _read(args.suspicious), "suspicious")
    _require_tokens(original, suspicious)
    if args.reference:
        reference = _tokens(args, _read(args.reference), "reference")
        _require_tokens(reference)
        provider = lambda: reference  # noqa: E731
    else:
        provider = _reference_provider(args, llm, raw_o, "reference")
    verdict = classify(original, suspicious, config, provider)
    json.dump(verdict.to_dict(), sys.stdout)
    sys.stdout.write("\n")
    return EXIT_OK


def _require_tokens(*seqs: TokenSequence) -> None:
    for s in seqs:
        if not s.tokens:
            raise CLIError(f"{s.doc_id} text has no words after cleaning", EXIT_INPUT)


def _load_docs(args, paths: list[str], names: list[str]) -> list[tuple[str, TokenSequence]]:
    out = []
    for path, name in zip(paths, names):
        raw = _read(path)
        seq = _tokens(args, raw, name)
        _require_tokens(seq)
        out.append((raw, seq))
    return out


def _profiles_for(args, config: ClassifierConfig) -> list[SimilarityProfile]:
    paths = [args.a, args.b] + ([args.c] if args.c else [])
    if len(paths) == 3:
        docs = _load_docs(args, paths, ["original", "suspicious", "reference"])
        return list(profile_triple(*(d[1] for d in docs), config.min_len, config.cap))
    names = [Path(args.a).stem, Path(args.b).stem]
    if names[0] == names[1]:
        names = [args.a, args.b] if args.a != args.b else ["a", "b"]
    (_, a), (_, b) = _load_docs(args, paths, names)
    pats = pair_patterns(a, b, config.min_len, config.cap)
    return [profile(a, b, pats, config.min_len, config.cap), profile(b, a, pats, config.min_len, config.cap)]


def cmd_profile(args) -> int:
    config, _ = _load_settings(args)
    profiles = _profiles_for(args, config)
    with _output(args.output) as fh:
        if args.format == "json":
            json.dump([asdict(p) for p in profiles], fh, indent=2)
            fh.write("\n")
        else:
            write_profiles_csv(profiles, fh)
    return EXIT_OK


def cmd_render(args) -> int:
    config, _ = _load_settings(args)
    paths = [args.a, args.b] + ([args.c] if args.c else [])
    names = ["original", "suspicious", "reference"][: len(paths)]
    docs = _load_docs(args, paths, names)
    seqs = [d[1] for d in docs]
    index = build_index(seqs, config.min_len, config.cap)
    length = args.length or config.min_len

    if len(seqs) == 3:
        o, s, r = (q.doc_id for q in seqs)
        pairs = [(seqs[0], seqs[1], common_patterns(index, o, s)),
                 (seqs[2], seqs[0], common_patterns(index, r, o)),
                 (seqs[2], seqs[1], common_patterns(index, r, s))]
    else:
        pairs = [(seqs[0], seqs[1], common_patterns(index, seqs[0].doc_id, seqs[1].doc_id))]

    if args.mode == "blocks":
        rows = render_block_diagram(pairs, length)
        with _output(args.output) as fh:
            width = max(len(label) for label, _ in rows)
            for label, line in rows:
                fh.write(f"{label:<{width}}  {line}\n")
        if args.figure:
            from provkit.plotting import plot_block_diagram

            plot_block_diagram(rows, args.figure, title=f"common patterns of length >= {length}")
        return EXIT_OK

    fmt = "ansi" if args.format == "ansi" else "html"
    raw = {seq.doc_id: d[0] for d, seq in zip(docs, seqs)}
    cover = {}
    tag_of = {}
    for a, b, pats in pairs:
        tag = {("original", "suspicious"): "OS", ("reference", "original"): "RO",
               ("reference", "suspicious"): "RS"}.get((a.doc_id, b.doc_id), "OS")
        for doc in (a, b):
            cover.setdefault(doc.doc_id, []).append(Highlight(tag, frozenset(coverage(doc, pats, length))))
        tag_of[(a.doc_id, b.doc_id)] = tag

    if len(seqs) == 3:
        # Original shows R-O, Suspicious shows R-S, Reference shows both.
        shown = {"original": ["RO"], "suspicious": ["RS"], "reference": ["RO", "RS"]}
    else:
        shown = {seq.doc_id: ["OS"] for seq in seqs}
    columns = []
    for seq in seqs:
        hls = [h for h in cover[seq.doc_id] if h.tag in shown[seq.doc_id]]
        columns.append((seq.doc_id, markup(seq, hls, fmt, raw[seq.doc_id])))

    with _output(args.output) as fh:
        if fmt == "html":
            fh.write(html_page(f"common patterns of length >= {length}", columns))
        else:
            for heading, body in columns:
                fh.write(f"== {heading} ==\n{body}\n\n")
    return EXIT_OK


def _parse_lengths(spec: str) -> list[int]:
    out = []
    for part in spec.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def cmd_stats(args) -> int:
    classes: dict[str, list[SimilarityProfile]] = {}
    for item in args.profiles:
        name, _, path = item.rpartition("=") if "=" in item else ("", "", item)
        name = name or Path(path).stem
        try:
            with open(path, encoding="utf-8") as fh:
                classes[name] = read_profiles_csv(fh)
        except (OSError, KeyError, ValueError) as exc:
            raise CLIError(f"cannot read profile CSV {path}: {exc}", EXIT_INPUT) from exc
    if len(classes) < 2:
        raise CLIError("stats needs at least two profile classes", EXIT_INPUT)
    try:
        spec = BootstrapSpec(args.rounds, args.sample_size, args.replacement, args.seed_base)
    except StatsError as exc:
        raise ConfigError(str(exc)) from exc
    rows = comparison_table(classes, _parse_lengths(args.lengths), category=args.category,
                            spec=spec, equal_var=args.pooled)
    with _output(args.output) as fh:
        write_table2_csv(rows, fh)
    return EXIT_OK


def cmd_paraphrase(args) -> int:
    _, llm = _load_settings(args)
    src, dst = Path(args.input_root), Path(args.output_root)
    if not src.is_dir():
        raise CLIError(f"{src} is not a directory", EXIT_INPUT)
    backend = _backend(args, llm)
    cache = _cache(args, llm)
    files = sorted(p for p in src.glob("*/*.txt"))

    def one(path: Path):
        req = ParaphraseRequest(_read(path), args.temperature, llm.model, llm.prompt_template)
        return path, paraphrase(req, backend, cache).text

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(one, files))
    for path, text in results:
        out = dst / path.parent.name / path.name
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    print(json.dumps({"written": len(results), "output_root": str(dst)}))
    return EXIT_OK


def _load_corpus(args) -> Corpus:
    try:
        if args.manifest:
            return load_manifest(args.manifest)
        if args.dataset_root:
            return ingest_corpus(args.dataset_root)
    except (CorpusError, OSError) as exc:
        raise CLIError(str(exc), EXIT_INPUT) from exc
    raise CLIError("need --dataset-root or --manifest", EXIT_INPUT)


def cmd_ingest_check(args) -> int:
    config, _ = _load_settings(args)
    corpus = _load_corpus(args)
    by_cat = defaultdict(list)
    for d in corpus.by_role(Role.ORIGINAL):
        by_cat[d.category].append(_tokens(args, d.raw_text, d.id))
    stats = corpus_stats(by_cat) if by_cat else {}
    with _output(args.output) as fh:
        fh.write("category,count,max,min,mean,stdev\n")
        for cat, st in stats.items():
            fh.write(f"{cat},{st.count},{st.max},{st.min},{st.mean:.2f},{st.stdev:.2f}\n")
    roles = {r.value: len(corpus.by_role(r)) for r in Role}
    print(json.dumps({"documents": len(corpus), "roles": roles, "errors": [asdict(e) for e in corpus.errors]}),
          file=sys.stderr)
    return EXIT_OK


def _truth(doc) -> str | None:
    if doc.label is not None:
        return doc.label or None
    return "ChatGPT" if doc.role is Role.SUSPICIOUS else "Other"


def cmd_evaluate(args) -> int:
    config, llm = _load_settings(args)
    started = datetime.now(timezone.utc).isoformat()
    corpus = _load_corpus(args)

    groups: dict[tuple[str, str], dict] = defaultdict(lambda: {"candidates": []})
    for d in corpus:
        g = groups[(d.category, d.article)]
        if d.role is Role.ORIGINAL:
            g["original"] = d
        elif d.role is Role.REFERENCE:
            g["reference"] = d
        else:
            g["candidates"].append(d)

    jobs, rejected = [], 0
    for key in sorted(groups):
        g = groups[key]
        for cand in g["candidates"]:
            truth = _truth(cand)
            if truth is None:
                rejected += 1
                continue
            if "original" not in g:
                rejected += 1
                log.warning("no Original for %s; skipped", cand.id)
                continue
            jobs.append((g, cand, truth))
    if rejected:
        print(json.dumps({"warning": "records rejected", "count": rejected}), file=sys.stderr)
    if not jobs:
        raise CLIError("no labelled records to evaluate", EXIT_INPUT)

    providers = {}
    for g, _, _ in jobs:
        orig = g["original"]
        if id(g) in providers:
            continue
        if "reference" in g:
            ref = _tokens(args, g["reference"].raw_text, g["reference"].id)
            providers[id(g)] = (lambda r: (lambda: r))(ref)
        else:
            providers[id(g)] = _reference_provider(args, llm, orig.raw_text, orig.id + "#reference")

    def run(job):
        g, cand, truth = job
        orig = g["original"]
        try:
            v = classify(_tokens(args, orig.raw_text, orig.id), _tokens(args, cand.raw_text, cand.id),
                         config, providers[id(g)])
            return {"id": cand.id, "category": cand.category, "truth": truth, "label": v.label.value,
                    "phase": v.phase, "score": v.score, "spread": v.spread}
        except (ReferenceUnavailable, ProviderError) as exc:
            return {"id": cand.id, "category": cand.category, "truth": truth, "error": str(exc)}

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        outcomes = list(pool.map(run, jobs))

    scored = [o for o in outcomes if "label" in o]
    errors = [o for o in outcomes if "error" in o]
    if not scored:
        raise CLIError(f"every record failed ({len(errors)} provider errors)", EXIT_PROVIDER)

    per_cat = {}
    for cat in sorted({o["category"] for o in scored}):
        per_cat[cat] = score_run((o["label"], o["truth"]) for o in scored if o["category"] == cat)
    near_copies = sum(o["label"] == Label.NEAR_COPY.value for o in scored)

    digest = hashlib.sha256(json.dumps(
        [config.to_dict(), [(o["id"], o["truth"]) for o in outcomes]], sort_keys=True
    ).encode()).hexdigest()[:12]
    report = build_report(digest, config.to_dict(), per_cat, near_copy_count=near_copies,
                          error_count=len(errors), rejected_count=rejected)

    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        write_report_json(report, fh)
    with open(out_dir / "metrics.csv", "w", encoding="utf-8", newline="") as fh:
        write_metrics_csv(per_cat, fh)
    if not args.no_figures:
        from provkit.plotting import plot_confusion_matrices

        plot_confusion_matrices(per_cat, out_dir / "confusion.png")
    manifest = {
        "run_id": digest,
        "config": config.to_dict(),
        "inputs": {"dataset_root": args.dataset_root, "manifest": args.manifest},
        "started_at": started,
        "finished_at": datetime.now(timezone.utc).isoformat(),
        "outcomes": outcomes,
    }
    with open(out_dir / "run_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)

    overall = aggregate(per_cat)
    if near_copies:
        print(f"note: {near_copies} NearCopy verdicts counted as positive")
    print("overall " + " ".join(f"{k}={v}%" for k, v in overall.as_percent().items()))
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (flags override it)")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--seed-base", type=int, default=0, help="first bootstrap seed")
    common.add_argument("--format", choices=["json", "csv", "html", "ansi"])
    common.add_argument("--min-len", type=int)
    common.add_argument("--cap", type=int)
    common.add_argument("--keep-case", action="store_true", help="disable lower-case folding")
    common.add_argument("--strip-apostrophes", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    llm = argparse.ArgumentParser(add_help=False)
    llm.add_argument("--backend", choices=["http", "echo", "table"], default="http")
    llm.add_argument("--stub-table", help="JSON object mapping source text to paraphrase")
    llm.add_argument("--endpoint-url")
    llm.add_argument("--model")
    llm.add_argument("--cache-dir")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--dataset-root")
    data.add_argument("--manifest", help="CSV manifest; overrides --dataset-root")

    parser = argparse.ArgumentParser(prog="provkit", description="Pattern-similarity paraphrase provenance")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common, llm], help="classify one Suspicious text")
    p.add_argument("original")
    p.add_argument("suspicious")
    p.add_argument("--reference", help="pre-generated Reference text")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("profile", parents=[common], help="similarity profile CSV")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("c", nargs="?", help="third file: arguments are then Original Suspicious Reference")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("render", parents=[common], help="highlighted text or block diagram")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("c", nargs="?")
    p.add_argument("--mode", choices=["markup", "blocks"], default="markup")
    p.add_argument("--length", type=int, help="pattern length (default min_len)")
    p.add_argument("--figure", help="also write a PNG block diagram")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("stats", parents=[common], help="bootstrap t-tests between profile classes")
    p.add_argument("profiles", nargs="+", help="profile CSVs, one per class, optionally NAME=PATH")
    p.add_argument("--lengths", default="3-7")
    p.add_argument("--category", default="all")
    p.add_argument("--rounds", type=int, default=100)
    p.add_argument("--sample-size", type=int, default=30)
    p.add_argument("--replacement", action="store_true")
    p.add_argument("--pooled", action="store_true", help="equal-variance t-test")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("paraphrase", parents=[common, llm], help="generate a paraphrased corpus")
    p.add_argument("input_root")
    p.add_argument("output_root")
    p.add_argument("--temperature", type=float, default=SUSPICIOUS_TEMPERATURE)
    p.set_defaults(func=cmd_paraphrase)

    p = sub.add_parser("evaluate", parents=[common, llm, data], help="batch classification report")
    p.add_argument("--output-dir", default="provkit-report")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ingest-check", parents=[common, data], help="dataset word-count summary")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_ingest_check)
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CLIError as exc:
        return _fail("input" if exc.code == EXIT_INPUT else "error", str(exc), exc.code)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    except (ReferenceUnavailable, ProviderError) as exc:
        return _fail("provider", str(exc), EXIT_PROVIDER)
    except (CorpusError, EvaluationError, StatsError) as exc:
        return _fail("input", str(exc), EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
