"""Batch command-line pipeline: train models, realize sentences, evaluate.

Subcommands: train-lm, train-reinflector, reinflect, reorder, realize,
evaluate.  Exit codes: 0 success, 1 usage error, 2 data error,
3 internal error.  All files are UTF-8.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

from . import conllu, lm, metrics, morphmap, order, reinflect

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class PipelineConfig:
    """Tunables shared by the ordering and reinflection stages."""

    lm_order: int = 3
    threshold: int = 23
    exhaustive_limit: int = 4
    arrangement_cap: int = 362880
    hidden_size: int = 128
    epochs: int = 20
    lr: float = 1e-3
    batch_size: int = 32
    max_len: int = 40
    seed: int = 0
    capitalize: bool = True
    append_full_stop: bool = True
    jobs: int = 1

    def validate(self) -> None:
        numeric = (
            "lm_order", "threshold", "exhaustive_limit", "arrangement_cap",
            "hidden_size", "epochs", "batch_size", "max_len", "jobs",
        )
        for name in numeric:
            if getattr(self, name) < 1:
                raise UsageError(f"config field {name} must be positive")
        if self.lr <= 0:
            raise UsageError("config field lr must be positive")
        if self.threshold < self.exhaustive_limit:
            raise UsageError("threshold must be >= exhaustive_limit")

    def order_config(self) -> order.OrderConfig:
        return order.OrderConfig(
            threshold=self.threshold,
            exhaustive_limit=self.exhaustive_limit,
            arrangement_cap=self.arrangement_cap,
            capitalize=self.capitalize,
            append_full_stop=self.append_full_stop,
        )


def _load_config(args) -> PipelineConfig:
    """Start from defaults, apply --config file values, let explicit flags win."""
    cfg = PipelineConfig()
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            raw = json.loads(_read_text(config_path))
        except json.JSONDecodeError as exc:
            raise DataError(f"{config_path}: invalid JSON ({exc})") from None
        known = {f.name for f in fields(PipelineConfig)}
        for key, value in raw.items():
            if key not in known:
                raise UsageError(f"{config_path}: unknown config key {key!r}")
            setattr(cfg, key, value)
    overrides = {
        "order": "lm_order",
        "threshold": "threshold",
        "seed": "seed",
        "jobs": "jobs",
        "hidden_size": "hidden_size",
        "epochs": "epochs",
        "lr": "lr",
        "batch_size": "batch_size",
        "max_len": "max_len",
    }
    for flag, name in overrides.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "no_full_stop", False):
        cfg.append_full_stop = False
    if getattr(args, "no_capitalize", False):
        cfg.capitalize = False
    cfg.validate()
    return cfg


def _read_text(path) -> str:
    p = Path(path)
    if not p.exists():
        raise DataError(f"{path}: no such file")
    return p.read_text(encoding="utf-8", errors="replace")


def _report(lines, label: str) -> None:
    for line in lines:
        print(f"{label}: {line}", file=sys.stderr)


def cmd_train_lm(args) -> int:
    cfg = _load_config(args)
    sentences = [line for line in _read_text(args.corpus).splitlines() if line.strip()]
    try:
        vocab = lm.build_vocab(sentences)
        model = lm.train_lm(sentences, order=cfg.lm_order, vocab=vocab)
    except lm.EmptyCorpusError as exc:
        raise DataError(f"{args.corpus}: {exc}") from None
    Path(args.vocab_out).write_text(vocab.to_text(), encoding="utf-8")
    Path(args.lm_out).write_text(lm.emit_arpa(model), encoding="utf-8")
    counts = " ".join(f"{n + 1}-grams={len(t)}" for n, t in enumerate(model.tables))
    print(f"trained order-{model.order} model on {len(sentences)} sentences: {counts}")
    print(f"vocabulary: {len(vocab)} words -> {args.vocab_out}")
    print(f"model -> {args.lm_out}")
    return EXIT_OK


def cmd_train_reinflector(args) -> int:
    cfg = _load_config(args)
    examples, warnings = reinflect.load_training_file(_read_text(args.data))
    _report(warnings, "warning")
    if warnings:
        print(f"skipped {len(warnings)} bad lines", file=sys.stderr)
    if not examples:
        raise DataError(f"{args.data}: no usable training examples")
    examples = [ex for ex in examples if len(ex.lemma) <= cfg.max_len and len(ex.target) < cfg.max_len]
    model = reinflect.build_model(
        examples, hidden_size=cfg.hidden_size, max_len=cfg.max_len, seed=cfg.seed
    )
    model, trace = reinflect.train(
        model,
        examples,
        epochs=cfg.epochs,
        lr=cfg.lr,
        seed=cfg.seed,
        batch_size=cfg.batch_size,
        log=print,
    )
    reinflect.save_model(model, args.model_out)
    print(f"trained on {len(examples)} examples, final loss {trace[-1]:.6f}" if trace else "no epochs run")
    print(f"checkpoint -> {args.model_out}")
    return EXIT_OK


def _load_corpus(path) -> conllu.Corpus:
    corpus = conllu.parse_conllu(_read_text(path))
    _report(corpus.diagnostics, "conllu")
    return corpus


def _sorted_tokens(sentence: conllu.UdSentence) -> list[conllu.Token]:
    return sorted(sentence.tokens, key=lambda t: t.id)


def predict_surface(model, token: conllu.Token, table=None) -> str:
    """Surface form of one token; punctuation passes through unchanged."""
    if token.upos == "PUNCT" or order.is_punct(token.lemma):
        return token.lemma
    tag = morphmap.convert(token.upos, token.feats, table)
    return reinflect.predict(model, token.lemma, tag) or token.lemma


def cmd_reinflect(args) -> int:
    corpus = _load_corpus(args.conllu)
    model = reinflect.load_model(args.model)
    table = morphmap.default_table()
    filled = 0
    for sentence in corpus.sentences:
        for tok in sentence.tokens:
            try:
                tok.form = predict_surface(model, tok, table)
            except ValueError:
                tok.form = tok.lemma
            filled += 1
    Path(args.out).write_text(conllu.emit_conllu(corpus), encoding="utf-8")
    print(f"reinflected {filled} tokens in {len(corpus.sentences)} sentences -> {args.out}")
    return EXIT_OK


def _realize_one(sentence, lm_model, reinf_model, table, order_cfg):
    """Realize a single sentence; falls back to id-ordered lemmas on failure."""
    tokens = _sorted_tokens(sentence)
    try:
        words = []
        for tok in tokens:
            if reinf_model is None:
                words.append(tok.form or tok.lemma)
            else:
                words.append(predict_surface(reinf_model, tok, table))
        result = order.order_words(order.preprocess(words), lm_model, order_cfg)
        text = " ".join(result.sequence)
        if order_cfg.capitalize and text:
            text = text[0].upper() + text[1:]
        if order_cfg.append_full_stop:
            text += " ."
        note = f"{sentence.sent_id}: method={result.method.value} lm_score={result.lm_score.total:.4f}"
        return sentence.sent_id, text, note, False
    except Exception as exc:  # per-sentence degradation keeps the batch going
        text = " ".join(tok.lemma for tok in tokens if tok.lemma)
        note = f"{sentence.sent_id}: realization failed ({exc}), emitted lemmas in id order"
        return sentence.sent_id, text, note, True


def cmd_realize(args) -> int:
    cfg = _load_config(args)
    corpus = _load_corpus(args.conllu)
    lm_model = _parse_lm(args.lm)
    reinf_model = reinflect.load_model(args.reinflector) if args.reinflector else None
    table = morphmap.default_table()
    order_cfg = cfg.order_config()

    def work(sentence):
        return _realize_one(sentence, lm_model, reinf_model, table, order_cfg)

    if cfg.jobs > 1 and len(corpus.sentences) > 1:
        # NGramModel and Seq2SeqModel are immutable after loading, so worker
        # threads share them; results keep input order.
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(work, corpus.sentences))
    else:
        rows = [work(s) for s in corpus.sentences]

    failures = 0
    out_lines = []
    for sent_id, text, note, failed in rows:
        out_lines.append(f"{sent_id}\t{text}")
        print(note, file=sys.stderr)
        failures += int(failed)
    Path(args.out).write_text("\n".join(out_lines) + ("\n" if out_lines else ""), encoding="utf-8")
    print(f"realized {len(rows)} sentences ({failures} degraded) -> {args.out}")
    if rows and failures == len(rows):
        raise DataError("every sentence failed to realize")
    return EXIT_OK


def cmd_reorder(args) -> int:
    args.reinflector = None
    return cmd_realize(args)


def _parse_lm(path) -> lm.NGramModel:
    try:
        return lm.parse_arpa(_read_text(path))
    except lm.ArpaFormatError as exc:
        raise DataError(f"{path}: {exc}") from None


def cmd_evaluate(args) -> int:
    diags: list[str] = []
    pred = dict(conllu.parse_reference_text(_read_text(args.pred), diags))
    refs = dict(conllu.parse_reference_text(_read_text(args.refs), diags))
    _report(diags, "warning")
    shared = sorted(set(pred) & set(refs))
    if not shared:
        raise DataError("prediction and reference files share no sentence ids")
    missing = len(set(pred) ^ set(refs))
    if missing:
        print(f"warning: {missing} ids present on one side only", file=sys.stderr)
    report = metrics.evaluate_pairs([pred[i] for i in shared], [refs[i] for i in shared])
    print(report.table())
    print(report.machine_lines(), end="")
    return EXIT_OK


def _add_config_flags(sub) -> None:
    sub.add_argument("--config", help="JSON config file; explicit flags win")
    sub.add_argument("--seed", type=int, help="RNG seed (default 0)")


def build_parser() -> _Parser:
    parser = _Parser(prog="udrealize", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("train-lm", help="train the backoff n-gram model, write vocab + ARPA")
    p.add_argument("corpus", help="ordered sentences, one per line")
    p.add_argument("--lm-out", required=True)
    p.add_argument("--vocab-out", required=True)
    p.add_argument("--order", type=int, help="n-gram order (default 3)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train_lm)

    p = subs.add_parser("train-reinflector", help="train the character reinflection model")
    p.add_argument("data", help="training triples: lemma<TAB>tag<TAB>target")
    p.add_argument("--model-out", required=True)
    p.add_argument("--hidden-size", type=int, dest="hidden_size")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--max-len", type=int, dest="max_len")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train_reinflector)

    p = subs.add_parser("reinflect", help="fill surface forms into a CoNLL-U file")
    p.add_argument("conllu")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_reinflect)

    for name, helptext in (
        ("realize", "reinflect + order: the full pipeline"),
        ("reorder", "order only, using lemmas (or present forms) as words"),
    ):
        p = subs.add_parser(name, help=helptext)
        p.add_argument("conllu")
        p.add_argument("--lm", required=True, help="ARPA model from train-lm")
        if name == "realize":
            p.add_argument("--reinflector", help="checkpoint from train-reinflector")
        p.add_argument("--out", required=True)
        p.add_argument("--threshold", type=int, help="max length handled by method2 (default 23)")
        p.add_argument("--no-full-stop", action="store_true")
        p.add_argument("--no-capitalize", action="store_true")
        p.add_argument("--jobs", type=int, help="worker threads (default 1)")
        _add_config_flags(p)
        p.set_defaults(func=cmd_realize if name == "realize" else cmd_reorder)

    p = subs.add_parser("evaluate", help="score predictions against references")
    p.add_argument("pred", help="id<TAB>sentence predictions")
    p.add_argument("refs", help="id<TAB>sentence references")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (lm.EmptyCorpusError, lm.ArpaFormatError, UnicodeDecodeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
