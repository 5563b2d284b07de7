"""Command-line surface tying the toolkit together.

Commands print a short human summary by default and machine-readable JSON
with --json; JSON payloads are validated against the schemas shipped in
qasrl/schemas before printing.  Exit status: 0 on success, 2 on input or
validation problems, 1 on internal errors (including a failed gradient
audit).

Relative data paths resolve against $QASRL_DATA_DIR when it is set,
except paths starting with "." which always stay relative to the working
directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from importlib import resources

import jsonschema

from .annosvc import AnnotationService, ServiceError, create_app
from .corpus import (
    CorpusError,
    Judgment,
    corpus_stats,
    identify_verbs,
    load_corpus,
    question_is_valid,
    save_corpus,
)
from .diagnostics import HEADS, check_all_heads, check_head
from .expand import (
    CandidateQA,
    filter_candidates,
    jackknife_folds,
    load_candidates,
    merge_validated,
    overgenerate,
    save_candidates,
)
from .grammar import GrammarError
from .metrics import EXACT, IOU, joint_prf_micro, span_detection_prf_micro
from .parser import load_predictions, parse, write_predictions
from .qgen import QuestionGenerator, train_question_model
from .spandet import (
    SpanDetector,
    gold_question_spans,
    train_span_model,
    tune_threshold,
)

_SCHEMA_BY_COMMAND = {
    "train-span": "train",
    "train-qgen": "train",
    "parse": "parse",
    "evaluate": "evaluate",
    "tune-tau": "tune-tau",
    "expand": "expand",
    "jackknife": "jackknife",
    "merge": "merge",
    "stats": "stats",
    "grad-check": "grad-check",
}

_USER_ERRORS = (CorpusError, GrammarError, ServiceError, ValueError,
                FileNotFoundError, IsADirectoryError, NotADirectoryError,
                PermissionError)


def _data_path(path: str) -> str:
    root = os.environ.get("QASRL_DATA_DIR")
    if root and path and not os.path.isabs(path) and not path.startswith("."):
        return os.path.join(root, path)
    return path


def _schema(command: str) -> dict:
    name = _SCHEMA_BY_COMMAND[command]
    text = resources.files("qasrl").joinpath(
        f"schemas/{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _matcher(args):
    return IOU if getattr(args, "iou", False) else EXACT


def _training_kwargs(args, names):
    out = {}
    for name in names:
        value = getattr(args, name.replace("-", "_"))
        if value is not None:
            out[name.replace("-", "_")] = value
    return out


# -- command handlers -----------------------------------------------------


def _cmd_train_span(args) -> dict:
    corpus = load_corpus(_data_path(args.corpus))
    dev = load_corpus(_data_path(args.dev)) if args.dev else None
    kwargs = _training_kwargs(args, (
        "layers", "hidden", "embedding", "mlp-hidden", "epochs", "patience",
        "batch-size", "threshold"))
    detector, history = train_span_model(
        corpus, args.mode, dev=dev, seed=args.seed, **kwargs)
    out = _data_path(args.out)
    detector.save(out)
    return {"command": "train-span", "mode": args.mode, "checkpoint": out,
            "instances": sum(len(r.verb_entries) for r in corpus),
            "seed": args.seed, "history": history.to_json()}


def _cmd_train_qgen(args) -> dict:
    corpus = load_corpus(_data_path(args.corpus))
    dev = load_corpus(_data_path(args.dev)) if args.dev else None
    kwargs = _training_kwargs(args, (
        "layers", "hidden", "embedding", "decoder-layers", "decoder-hidden",
        "token-embedding", "mlp-hidden", "epochs", "patience", "batch-size"))
    generator, history = train_question_model(
        corpus, args.kind, dev=dev, seed=args.seed, **kwargs)
    out = _data_path(args.out)
    generator.save(out)
    instances = sum(
        1 for r in corpus for e in r.verb_entries for p in e.qa_pairs
        if question_is_valid(p))
    return {"command": "train-qgen", "mode": args.kind, "checkpoint": out,
            "instances": instances, "seed": args.seed,
            "history": history.to_json()}


def _cmd_parse(args) -> dict:
    corpus = load_corpus(_data_path(args.corpus))
    detector = SpanDetector.load(_data_path(args.span_model))
    generator = QuestionGenerator.load(_data_path(args.qgen_model))
    outputs = []
    verbs = items = dropped = 0
    for record in corpus:
        result = parse(record.tokens, record.pos_tags, detector, generator,
                       tau=args.tau)
        verbs += len(identify_verbs(record.tokens, record.pos_tags))
        items += len(result.items)
        dropped += len(result.dropped)
        outputs.append((record.sentence_id, result))
    out = _data_path(args.out)
    write_predictions(out, outputs)
    return {"command": "parse", "output": out, "tau": args.tau,
            "sentences": len(corpus), "verbs": verbs, "items": items,
            "dropped": dropped}


def _gold_pairs(entry):
    out = []
    for pair in entry.qa_pairs:
        if question_is_valid(pair):
            spans = {s for j in pair.judgments if j.is_valid for s in j.spans}
            out.append((pair.slots, spans))
    return out


def _cmd_evaluate(args) -> dict:
    predictions = load_predictions(_data_path(args.predictions))
    gold = load_corpus(_data_path(args.gold))
    entries = {(r.sentence_id, e.verb_index): e
               for r in gold for e in r.verb_entries}
    by_verb = {}
    for sentence_id, item in predictions:
        key = (sentence_id, item.verb_index)
        if key not in entries:
            raise CorpusError(
                f"prediction references unknown verb {key[1]} in "
                f"sentence {key[0]!r}")
        by_verb.setdefault(key, []).append(item)

    span_instances = []
    joint_instances = []
    for key, entry in entries.items():
        predicted = by_verb.get(key, [])
        spans = {s for item in predicted for s in item.spans}
        span_instances.append((spans, gold_question_spans(entry)))
        if args.joint:
            pred_items = [(item.slots, s)
                          for item in predicted for s in item.spans]
            joint_instances.append((pred_items, _gold_pairs(entry)))

    matcher = _matcher(args)
    payload = {"command": "evaluate", "matcher": matcher.kind,
               "verbs": len(entries),
               "span": span_detection_prf_micro(span_instances,
                                                matcher).to_json()}
    if args.joint:
        payload["joint"] = joint_prf_micro(joint_instances).to_json()
    return payload


def _cmd_tune_tau(args) -> dict:
    detector = SpanDetector.load(_data_path(args.span_model))
    dev = load_corpus(_data_path(args.dev))
    tau = tune_threshold(detector, dev, _matcher(args), step=args.step)
    if args.save:
        detector.save(_data_path(args.span_model))
    return {"command": "tune-tau", "tau": tau, "matcher": _matcher(args).kind,
            "step": args.step, "saved": bool(args.save)}


def _cmd_expand(args) -> dict:
    corpus = load_corpus(_data_path(args.corpus))
    detector = SpanDetector.load(_data_path(args.span_model))
    generator = QuestionGenerator.load(_data_path(args.qgen_model))
    candidates = overgenerate(detector, generator, corpus, tau=args.tau,
                              model_id=args.model_id, fold_id=args.fold_id)
    kept = filter_candidates(candidates, corpus)
    out = _data_path(args.out)
    save_candidates(out, kept)
    return {"command": "expand", "output": out, "tau": args.tau,
            "overgenerated": len(candidates), "kept": len(kept),
            "modelId": args.model_id, "foldId": args.fold_id}


def _cmd_jackknife(args) -> dict:
    corpus = load_corpus(_data_path(args.corpus))
    partitions = jackknife_folds(corpus, k=args.k, seed=args.seed)
    out_dir = _data_path(args.out_dir)
    os.makedirs(out_dir, exist_ok=True)
    files = []
    for i, (train, heldout) in enumerate(partitions):
        train_path = os.path.join(out_dir, f"fold{i}.train.jsonl")
        heldout_path = os.path.join(out_dir, f"fold{i}.heldout.jsonl")
        save_corpus(train, train_path)
        save_corpus(heldout, heldout_path)
        files.append({"train": train_path, "heldout": heldout_path,
                      "trainSentences": len(train),
                      "heldoutSentences": len(heldout)})
    return {"command": "jackknife", "folds": args.k, "seed": args.seed,
            "outputDir": out_dir, "files": files}


def load_judged(path) -> list:
    """Read judged candidates: {candidate, judgments} JSON lines."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
                candidate = CandidateQA.from_json(d["candidate"])
                judgments = tuple(Judgment.from_json(j)
                                  for j in d["judgments"])
            except (KeyError, ValueError, TypeError, CorpusError) as exc:
                raise CorpusError(f"judged line {number}: {exc}") from exc
            out.append((candidate, judgments))
    return out


def save_judged(path, judged) -> None:
    """Write (candidate, judgments) pairs in the format load_judged reads."""
    with open(path, "w", encoding="utf-8") as fh:
        for candidate, judgments in judged:
            fh.write(json.dumps(
                {"candidate": candidate.to_json(),
                 "judgments": [j.to_json() for j in judgments]},
                ensure_ascii=False))
            fh.write("\n")


def _cmd_merge(args) -> dict:
    corpus = load_corpus(_data_path(args.corpus))
    judged = load_judged(_data_path(args.judged))
    merged, negatives = merge_validated(corpus, judged)
    out = _data_path(args.out)
    save_corpus(merged, out)
    negatives_out = None
    if args.negatives:
        negatives_out = _data_path(args.negatives)
        save_corpus(negatives, negatives_out)
    before = sum(len(e.qa_pairs) for r in corpus for e in r.verb_entries)
    after = sum(len(e.qa_pairs) for r in merged for e in r.verb_entries)
    negative_count = sum(len(e.qa_pairs)
                         for r in negatives for e in r.verb_entries)
    return {"command": "merge", "output": out,
            "addedQuestions": after - before,
            "negativeQuestions": negative_count,
            "negativesOutput": negatives_out}


def _cmd_stats(args) -> dict:
    corpus = load_corpus(_data_path(args.corpus))
    return {"command": "stats", "stats": corpus_stats(corpus).to_json()}


def _cmd_grad_check(args) -> dict:
    if args.head:
        report = check_head(args.head, instances=args.instances,
                            seed=args.seed, tolerance=args.tolerance)
        return {"command": "grad-check", "heads": [report],
                "passed": report["passed"]}
    out = check_all_heads(instances=args.instances, seed=args.seed,
                          tolerance=args.tolerance)
    return {"command": "grad-check", "heads": out["heads"],
            "passed": out["passed"]}


def build_service(args) -> AnnotationService:
    """Service for `serve`: recover from the event log when it has state."""
    log = _data_path(args.log) if args.log else None
    kwargs = {"validators": args.validators,
              "lease_seconds": args.lease_seconds}
    if log and os.path.exists(log) and os.path.getsize(log) > 0:
        return AnnotationService.recover(log, **kwargs)
    records = load_corpus(_data_path(args.corpus)) if args.corpus else []
    if not records and not log:
        raise ValueError("serve needs a corpus file or an existing event log")
    return AnnotationService(records, log_path=log, **kwargs)


def _cmd_serve(args):
    import uvicorn

    app = create_app(build_service(args))
    print(f"annotation service on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return None


# -- human-readable rendering ---------------------------------------------


def _prf_line(name: str, prf: dict) -> str:
    return (f"{name}: P {prf['precision']:.3f}  R {prf['recall']:.3f}  "
            f"F1 {prf['f1']:.3f}")


def _human(payload: dict) -> list[str]:
    command = payload["command"]
    if command in ("train-span", "train-qgen"):
        history = payload["history"]
        final = history["epochLosses"][-1] if history["epochLosses"] else 0.0
        return [f"trained {payload['mode']} model on "
                f"{payload['instances']} instances",
                f"best epoch {history['bestEpoch']} of "
                f"{history['stoppedEpoch']}, final loss {final:.4f}",
                f"checkpoint written to {payload['checkpoint']}"]
    if command == "parse":
        return [f"parsed {payload['sentences']} sentences "
                f"({payload['verbs']} verbs) at tau {payload['tau']}",
                f"{payload['items']} questions kept, "
                f"{payload['dropped']} dropped by the grammar",
                f"predictions written to {payload['output']}"]
    if command == "evaluate":
        lines = [f"evaluated {payload['verbs']} verbs "
                 f"({payload['matcher']} matching)",
                 _prf_line("span detection", payload["span"])]
        if "joint" in payload:
            lines.append(_prf_line("joint question+span", payload["joint"]))
        return lines
    if command == "tune-tau":
        saved = "stored in checkpoint" if payload["saved"] else "not saved"
        return [f"best threshold {payload['tau']:.2f} "
                f"({payload['matcher']} matching, step {payload['step']}, "
                f"{saved})"]
    if command == "expand":
        return [f"overgenerated {payload['overgenerated']} candidates "
                f"at tau {payload['tau']}",
                f"{payload['kept']} kept after filtering against existing "
                f"annotations",
                f"candidates written to {payload['output']}"]
    if command == "jackknife":
        return [f"wrote {payload['folds']} folds to {payload['outputDir']}"]
    if command == "merge":
        lines = [f"merged {payload['addedQuestions']} validated questions "
                 f"into {payload['output']}",
                 f"{payload['negativeQuestions']} rejected questions"]
        if payload["negativesOutput"]:
            lines.append(f"negatives written to {payload['negativesOutput']}")
        return lines
    if command == "stats":
        s = payload["stats"]
        lines = [f"{s['sentences']} sentences, {s['verbs']} verbs, "
                 f"{s['questions']} questions "
                 f"({s['validQuestions']} valid)",
                 f"{s['validPerVerb']:.2f} valid per verb, "
                 f"{s['validPerSentence']:.2f} per sentence"]
        for domain, d in sorted(s["byDomain"].items()):
            lines.append(f"  {domain}: {d['sentences']} sentences, "
                         f"{d['validQuestions']} valid questions")
        return lines
    if command == "grad-check":
        lines = []
        for r in payload["heads"]:
            verdict = "ok" if r["passed"] else "FAILED"
            lines.append(f"{r['head']}: max relative error "
                         f"{r['maxRelativeError']:.2e} over "
                         f"{r['instances']} instances ({verdict})")
        lines.append("all heads passed" if payload["passed"]
                     else "gradient audit FAILED")
        return lines
    return [json.dumps(payload)]


# -- argument parsing -----------------------------------------------------


def _add_json_flag(sub):
    sub.add_argument("--json", action="store_true",
                     help="print a machine-readable JSON report")


def _add_matcher_flags(sub):
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--exact", dest="iou", action="store_false",
                       help="exact span matching (default)")
    group.add_argument("--iou", dest="iou", action="store_true",
                       help="intersection-over-union matching at 0.5")
    sub.set_defaults(iou=False)


def _add_train_flags(sub):
    sub.add_argument("--dev", help="held-out corpus for early stopping")
    sub.add_argument("--layers", type=int, help="encoder layers")
    sub.add_argument("--hidden", type=int, help="encoder hidden size")
    sub.add_argument("--embedding", type=int, help="token embedding size")
    sub.add_argument("--mlp-hidden", type=int, help="prediction head width")
    sub.add_argument("--epochs", type=int, help="training epochs")
    sub.add_argument("--patience", type=int, help="early stopping patience")
    sub.add_argument("--batch-size", type=int, help="minibatch size")
    sub.add_argument("--seed", type=int, default=0, help="random seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qasrl",
        description="QA-SRL toolkit: train, parse, evaluate, expand, serve.",
        epilog="Relative data paths resolve against $QASRL_DATA_DIR when "
               "set; paths starting with '.' always stay local.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-span", help="train a span detection model")
    p.add_argument("corpus", help="training corpus (JSON lines)")
    p.add_argument("--out", required=True, help="checkpoint path to write")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--span", dest="mode", action="store_const",
                      const="span", help="per-span scorer (default)")
    mode.add_argument("--bio", dest="mode", action="store_const",
                      const="bio", help="BIO tagger with Viterbi decoding")
    p.set_defaults(mode="span", func=_cmd_train_span)
    _add_train_flags(p)
    p.add_argument("--threshold", type=float,
                   help="span selection threshold stored in the checkpoint")
    _add_json_flag(p)

    p = sub.add_parser("train-qgen", help="train a question generation model")
    p.add_argument("corpus", help="training corpus (JSON lines)")
    p.add_argument("--out", required=True, help="checkpoint path to write")
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--seq", dest="kind", action="store_const",
                      const="seq", help="sequential slot decoder (default)")
    kind.add_argument("--local", dest="kind", action="store_const",
                      const="local", help="independent per-slot classifier")
    p.set_defaults(kind="seq", func=_cmd_train_qgen)
    _add_train_flags(p)
    p.add_argument("--decoder-layers", type=int, help="decoder stack depth")
    p.add_argument("--decoder-hidden", type=int, help="decoder hidden size")
    p.add_argument("--token-embedding", type=int,
                   help="decoder slot-value embedding size")
    _add_json_flag(p)

    p = sub.add_parser("parse", help="run the full parser over sentences")
    p.add_argument("corpus", help="sentences to parse (JSON lines)")
    p.add_argument("--span-model", required=True, help="span checkpoint")
    p.add_argument("--qgen-model", required=True, help="question checkpoint")
    p.add_argument("--out", required=True, help="predictions path to write")
    p.add_argument("--tau", type=float, default=0.5,
                   help="span selection threshold (default 0.5)")
    p.set_defaults(func=_cmd_parse)
    _add_json_flag(p)

    p = sub.add_parser("evaluate", help="score predictions against gold")
    p.add_argument("predictions", help="parser output (JSON lines)")
    p.add_argument("gold", help="gold corpus (JSON lines)")
    _add_matcher_flags(p)
    p.add_argument("--joint", action="store_true",
                   help="also score exact question+span items")
    p.set_defaults(func=_cmd_evaluate)
    _add_json_flag(p)

    p = sub.add_parser("tune-tau",
                       help="grid-search the span threshold on a dev set")
    p.add_argument("dev", help="development corpus (JSON lines)")
    p.add_argument("--span-model", required=True, help="span checkpoint")
    _add_matcher_flags(p)
    p.add_argument("--step", type=float, default=0.01,
                   help="grid step (default 0.01)")
    p.add_argument("--save", action="store_true",
                   help="store the tuned threshold in the checkpoint")
    p.set_defaults(func=_cmd_tune_tau)
    _add_json_flag(p)

    p = sub.add_parser("expand",
                       help="overgenerate and filter expansion candidates")
    p.add_argument("corpus", help="annotated corpus (JSON lines)")
    p.add_argument("--span-model", required=True, help="span checkpoint")
    p.add_argument("--qgen-model", required=True, help="question checkpoint")
    p.add_argument("--out", required=True, help="candidates path to write")
    p.add_argument("--tau", type=float, default=0.2,
                   help="recall-oriented threshold (default 0.2)")
    p.add_argument("--model-id", default="model",
                   help="provenance tag for the candidates")
    p.add_argument("--fold-id", type=int, help="jackknife fold tag")
    p.set_defaults(func=_cmd_expand)
    _add_json_flag(p)

    p = sub.add_parser("jackknife",
                       help="write leave-fold-out training partitions")
    p.add_argument("corpus", help="corpus to partition (JSON lines)")
    p.add_argument("-k", type=int, default=5, help="fold count (default 5)")
    p.add_argument("--out-dir", required=True, help="directory for the folds")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed")
    p.set_defaults(func=_cmd_jackknife)
    _add_json_flag(p)

    p = sub.add_parser("merge",
                       help="fold validated candidates into a corpus")
    p.add_argument("corpus", help="base corpus (JSON lines)")
    p.add_argument("judged", help="judged candidates (JSON lines)")
    p.add_argument("--out", required=True, help="merged corpus to write")
    p.add_argument("--negatives", help="where to write rejected questions")
    p.set_defaults(func=_cmd_merge)
    _add_json_flag(p)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("corpus", help="corpus (JSON lines)")
    p.set_defaults(func=_cmd_stats)
    _add_json_flag(p)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("corpus", nargs="?",
                   help="sentences to annotate (JSON lines)")
    p.add_argument("--port", type=int, default=8000, help="port to bind")
    p.add_argument("--host", default="127.0.0.1", help="host to bind")
    p.add_argument("--log", help="append-only event log (enables recovery)")
    p.add_argument("--validators", type=int, default=2,
                   help="judgments required per question (default 2)")
    p.add_argument("--lease-seconds", type=float, default=1800.0,
                   help="task lease duration (default 1800)")
    p.set_defaults(func=_cmd_serve, json=False)

    p = sub.add_parser("grad-check",
                       help="audit analytic gradients for every head")
    p.add_argument("--head", choices=HEADS, help="audit one head only")
    p.add_argument("--instances", type=int, default=20,
                   help="micro-instances per head (default 20)")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--tolerance", type=float, default=1e-4,
                   help="max relative error allowed (default 1e-4)")
    p.set_defaults(func=_cmd_grad_check)
    _add_json_flag(p)

    return parser


def run(argv=None) -> int:
    """Parse arguments, run the command, return the exit status."""
    args = build_parser().parse_args(argv)
    try:
        payload = args.func(args)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1
    if payload is None:
        return 0
    if args.json:
        jsonschema.validate(payload, _schema(payload["command"]))
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in _human(payload):
            print(line)
    return 0 if payload.get("passed", True) else 1


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
