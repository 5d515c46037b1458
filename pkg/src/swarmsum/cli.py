"""Command-line harness: preprocess, analyze, train, decode, rouge.

Data goes to files, logs to stderr, and nothing nondeterministic is written,
so identical inputs and seed give byte-identical outputs.  On failure the
process exits nonzero after printing one ``ERROR <Category>: <detail>`` line.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import analyze as analyze_mod
from . import corpus as corpus_mod
from . import optim as optim_mod
from . import rouge as rouge_mod
from . import vocab as vocab_mod
from .errors import (
    EmptyArticleError,
    IoFailureError,
    LineCountMismatchError,
    MalformedStoryError,
    NoDocumentsError,
    SwarmSumError,
)
from .experiment import ExperimentConfig, load_experiment
from .models import greedy_decode, load_params, param_count, save_params

log = logging.getLogger("swarmsum")


def cmd_preprocess(input_dir, output_dir) -> tuple[int, int]:
    """Parse and clean every story file; returns (parsed, skipped) counts."""
    input_dir = Path(input_dir)
    if not input_dir.is_dir():
        raise IoFailureError(f"not a directory: {input_dir}")
    docs = []
    skipped = 0
    for path in sorted(p for p in input_dir.iterdir() if p.is_file()):
        try:
            doc = corpus_mod.parse_story(path.read_text(encoding="utf-8"), doc_id=path.stem)
            docs.append(corpus_mod.clean_document(doc))
        except (MalformedStoryError, EmptyArticleError) as exc:
            skipped += 1
            log.warning("skipping %s: %s", path.name, exc)
    if not docs:
        raise NoDocumentsError(f"no parseable stories under {input_dir}")
    corpus_mod.write_clean_corpus(docs, output_dir)
    return len(docs), skipped


def cmd_analyze(corpus_dir, out_dir, bin_width: int = 10, top_k: int = 100) -> None:
    """Length histograms for both fields plus the summary word-frequency table."""
    docs = corpus_mod.read_clean_corpus(corpus_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    analyze_mod.write_histogram_csv(
        analyze_mod.length_histogram(docs, "article", bin_width), out / "article_length_hist.csv")
    analyze_mod.write_histogram_csv(
        analyze_mod.length_histogram(docs, "summary", bin_width), out / "summary_length_hist.csv")
    analyze_mod.write_frequency_csv(
        analyze_mod.word_frequencies(docs, "summary", top_k), out / "word_frequencies.csv")


def _tag_splits(docs, gaz):
    for doc in docs:
        doc.article_clean = " ".join(vocab_mod.tag_entities(doc.article_clean.split(), gaz))
        doc.summary_clean = " ".join(vocab_mod.tag_entities(doc.summary_clean.split(), gaz))


def _encode_pair(doc, vocab, src_maxlen, tgt_maxlen):
    src = vocab_mod.encode(doc.article_clean.split(), vocab, src_maxlen, add_markers=True)
    tgt = vocab_mod.encode(doc.summary_clean.split(), vocab, tgt_maxlen + 1, add_markers=True)
    return src, tgt


def cmd_train(config_path, seed: int = 0) -> dict:
    """Build vocab and batches per the config, run the optimizer, write artifacts."""
    exp = load_experiment(config_path)
    splits = corpus_mod.load_corpus(
        exp.path("data.stories"), exp["data.fractions"], exp["data.split_seed"])
    gaz_path = exp.path("data.gazetteer")
    if gaz_path is not None:
        gaz = vocab_mod.load_gazetteer(gaz_path)
        _tag_splits(splits.all_documents(), gaz)

    vocab = vocab_mod.build_vocabulary(splits.train, exp["data.min_count"])
    model_cfg = exp.model_config(len(vocab))
    emb_path = exp.path("data.embeddings")
    if emb_path is not None:
        emb = vocab_mod.load_embeddings(emb_path, vocab, model_cfg.embed_dim, seed)
    else:
        emb = vocab_mod.random_embeddings(vocab, model_cfg.embed_dim, seed,
                                          exp["data.embed_scale"])

    src_maxlen, tgt_maxlen = exp["data.src_maxlen"], exp["data.tgt_maxlen"]
    batch = [_encode_pair(d, vocab, src_maxlen, tgt_maxlen)
             for d in splits.train[: exp["data.batch_size"]]]
    # First 8 validation documents, fixed; falls back to the training batch
    # when the validation split is empty.
    val_docs = splits.validation[:8]
    val_batch = ([_encode_pair(d, vocab, src_maxlen, tgt_maxlen) for d in val_docs]
                 if val_docs else batch)

    objective = optim_mod.make_objective(model_cfg, batch, emb)
    val_objective = optim_mod.make_objective(model_cfg, val_batch, emb)
    minimize = optim_mod.MINIMIZERS[exp["optimizer.algorithm"]]
    opt_cfg = exp.opt_config(seed)

    val_trace: list[float] = []

    def on_iteration(_it, best_point, _best_value):
        val_trace.append(val_objective.evaluate(best_point))

    result = minimize(objective, opt_cfg, on_iteration=on_iteration)

    out_dir = exp.path("out.dir")
    out_dir.mkdir(parents=True, exist_ok=True)
    params_path = exp.out_path("params", "params.bin")
    save_params(params_path, result.best_point, model_cfg)
    vocab_mod.save_vocabulary(vocab, exp.out_path("vocab", "vocab.tsv"))
    optim_mod.write_trace_csv(result, exp.out_path("trace", "trace.csv"), val_trace)

    summary = {
        "model": model_cfg.kind,
        "optimizer": exp["optimizer.algorithm"],
        "arity": param_count(model_cfg),
        "evals_used": result.evals_used,
        "initial_best": result.initial_best,
        "final_train_loss": result.best_value,
        "final_val_loss": val_trace[-1],
        "vocab_size": len(vocab),
        "train_docs": len(splits.train),
        "validation_docs": len(splits.validation),
        "test_docs": len(splits.test),
    }
    report = "\n".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}"
                       for k, v in summary.items())
    exp.out_path("report", "report.txt").write_text(report + "\n", encoding="utf-8")
    return summary


def cmd_decode(config_path, corpus_path, out_path, params_path=None, seed: int = 0) -> int:
    """Greedy-decode every document; one summary per line in sorted-id order."""
    exp = load_experiment(config_path)
    vocab = vocab_mod.load_vocabulary(exp.out_path("vocab", "vocab.tsv"))
    model_cfg = exp.model_config(len(vocab))
    if params_path is None:
        params_path = exp.out_path("params", "params.bin")
    params = load_params(params_path, model_cfg)  # digest checked before any write

    docs = corpus_mod.read_clean_corpus(corpus_path)
    gaz_path = exp.path("data.gazetteer")
    if gaz_path is not None:
        _tag_splits(docs, vocab_mod.load_gazetteer(gaz_path))
    emb_path = exp.path("data.embeddings")
    if emb_path is not None:
        emb = vocab_mod.load_embeddings(emb_path, vocab, model_cfg.embed_dim, seed)
    else:
        emb = vocab_mod.random_embeddings(vocab, model_cfg.embed_dim, seed,
                                          exp["data.embed_scale"])

    lines = []
    for doc in sorted(docs, key=lambda d: d.id):
        src = vocab_mod.encode(doc.article_clean.split(), vocab,
                               exp["data.src_maxlen"], add_markers=True)
        out_ids = greedy_decode(params, src, emb, model_cfg, exp["data.tgt_maxlen"])
        lines.append(" ".join(vocab_mod.decode_ids(out_ids, vocab)))
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return len(lines)


_ROUGE_HEADER = "id,r1_p,r1_r,r1_f,r2_p,r2_r,r2_f,rl_p,rl_r,rl_f"


def cmd_rouge(candidates_path, references_path, report_path) -> None:
    """Per-line and mean ROUGE-1/2/L table for two parallel summary files."""
    cand_lines = Path(candidates_path).read_text(encoding="utf-8").splitlines()
    ref_lines = Path(references_path).read_text(encoding="utf-8").splitlines()
    if len(cand_lines) != len(ref_lines):
        raise LineCountMismatchError(
            f"{len(cand_lines)} candidates vs {len(ref_lines)} references")
    log.info("columns report precision, recall and F1 per metric; pick the "
             "reading you need when comparing against published tables")
    rows = []
    for i, (cand, ref) in enumerate(zip(cand_lines, ref_lines), start=1):
        scores = rouge_mod.score_pair(cand, ref)
        rows.append([float(x) for m in ("rouge1", "rouge2", "rougeL")
                     for x in (scores[m].precision, scores[m].recall, scores[m].f1)])
    mean = [sum(col) / len(rows) for col in zip(*rows)]
    lines = [_ROUGE_HEADER]
    for i, row in enumerate(rows, start=1):
        lines.append(",".join([str(i)] + [repr(x) for x in row]))
    lines.append(",".join(["mean"] + [repr(x) for x in mean]))
    Path(report_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmsum",
        description="Abstractive summarization lab trained with swarm optimizers")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="clean raw story files into a corpus dir")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("analyze", help="emit length histograms and word frequencies")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bin-width", type=int, default=10)
    p.add_argument("--top-k", type=int, default=100)

    p = sub.add_parser("train", help="run one model x optimizer experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("decode", help="greedy-decode summaries with trained params")
    p.add_argument("--config", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--params", default=None)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("rouge", help="score candidate summaries against references")
    p.add_argument("--candidates", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "preprocess":
            parsed, skipped = cmd_preprocess(args.input, args.out)
            print(f"parsed={parsed} skipped={skipped}")
        elif args.command == "analyze":
            cmd_analyze(args.corpus, args.out, args.bin_width, args.top_k)
        elif args.command == "train":
            summary = cmd_train(args.config, args.seed)
            print(" ".join(f"{k}={v}" for k, v in summary.items()))
        elif args.command == "decode":
            n = cmd_decode(args.config, args.corpus, args.out, args.params, args.seed)
            print(f"decoded={n}")
        elif args.command == "rouge":
            cmd_rouge(args.candidates, args.references, args.out)
    except SwarmSumError as exc:
        print(f"ERROR {exc.category}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ERROR IoFailure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
