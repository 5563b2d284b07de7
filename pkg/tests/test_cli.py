"""Command-line behavior: pipelines, JSON reports, exit codes."""

import json
import subprocess
import sys
from dataclasses import replace

import jsonschema
import pytest

from qasrl.cli import _schema, build_service, load_judged, run, save_judged
from qasrl.corpus import Judgment, load_corpus, question_is_valid, save_corpus
from qasrl.expand import CandidateQA
from qasrl.metrics import EXACT
from qasrl.parser import ParseItem, ParseOutput, load_predictions, \
    write_predictions
from qasrl.spandet import SpanDetector, tune_threshold
from qasrl.synthetic import synthetic_corpus

TINY_SPAN = ["--layers", "1", "--hidden", "16", "--embedding", "12",
             "--mlp-hidden", "16", "--epochs", "4", "--batch-size", "5"]
TINY_QGEN = ["--layers", "1", "--hidden", "16", "--embedding", "12",
             "--decoder-layers", "1", "--decoder-hidden", "16",
             "--token-embedding", "8", "--mlp-hidden", "16",
             "--epochs", "4", "--batch-size", "5"]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    save_corpus(synthetic_corpus(10), root / "corpus.jsonl")
    return root


@pytest.fixture(scope="module")
def span_model(workdir):
    path = workdir / "span.ckpt"
    code = run(["train-span", str(workdir / "corpus.jsonl"),
                "--out", str(path), "--span", "--seed", "0"] + TINY_SPAN)
    assert code == 0
    return path


@pytest.fixture(scope="module")
def qgen_model(workdir):
    path = workdir / "qgen.ckpt"
    code = run(["train-qgen", str(workdir / "corpus.jsonl"),
                "--out", str(path), "--seq", "--seed", "0"] + TINY_QGEN)
    assert code == 0
    return path


def run_json(capsys, argv):
    """Run the CLI, assert success, parse and schema-check the report."""
    code = run(argv + ["--json"])
    out = capsys.readouterr().out
    assert code == 0, out
    payload = json.loads(out)
    jsonschema.validate(payload, _schema(payload["command"]))
    return payload


# -- training and reports -------------------------------------------------


def test_train_span_reports_history(workdir, capsys):
    out = workdir / "span-report.ckpt"
    payload = run_json(capsys, [
        "train-span", str(workdir / "corpus.jsonl"), "--out", str(out),
        "--span", "--seed", "0"] + TINY_SPAN)
    assert out.exists()
    assert payload["mode"] == "span"
    assert payload["instances"] == 10
    history = payload["history"]
    assert len(history["epochLosses"]) == history["stoppedEpoch"] == 4
    assert 1 <= history["bestEpoch"] <= 4


def test_train_qgen_counts_valid_questions(workdir, capsys):
    out = workdir / "qgen-report.ckpt"
    payload = run_json(capsys, [
        "train-qgen", str(workdir / "corpus.jsonl"), "--out", str(out),
        "--seq", "--seed", "0"] + TINY_QGEN)
    corpus = load_corpus(workdir / "corpus.jsonl")
    expected = sum(1 for r in corpus for e in r.verb_entries
                   for p in e.qa_pairs if question_is_valid(p))
    assert payload["instances"] == expected
    assert payload["mode"] == "seq"


def test_training_is_deterministic_under_seed(workdir):
    a = workdir / "det-a.ckpt"
    b = workdir / "det-b.ckpt"
    c = workdir / "det-c.ckpt"
    base = ["train-span", str(workdir / "corpus.jsonl"), "--span"] + TINY_SPAN
    assert run(base + ["--out", str(a), "--seed", "7"]) == 0
    assert run(base + ["--out", str(b), "--seed", "7"]) == 0
    assert run(base + ["--out", str(c), "--seed", "8"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


# -- parse and evaluate ---------------------------------------------------


def test_parse_at_threshold_one_emits_nothing(workdir, span_model,
                                              qgen_model, capsys):
    out = workdir / "empty-preds.jsonl"
    payload = run_json(capsys, [
        "parse", str(workdir / "corpus.jsonl"),
        "--span-model", str(span_model), "--qgen-model", str(qgen_model),
        "--out", str(out), "--tau", "1.0"])
    assert payload["items"] == 0
    assert payload["sentences"] == 10
    assert payload["verbs"] == 10
    assert load_predictions(out) == []


def test_parse_low_threshold_emits_items(workdir, span_model, qgen_model,
                                         capsys):
    out = workdir / "loose-preds.jsonl"
    payload = run_json(capsys, [
        "parse", str(workdir / "corpus.jsonl"),
        "--span-model", str(span_model), "--qgen-model", str(qgen_model),
        "--out", str(out), "--tau", "0.0"])
    assert payload["items"] + payload["dropped"] > 0
    assert len(load_predictions(out)) == payload["items"]


def gold_predictions(corpus):
    """Predictions reconstructed from the gold annotations themselves."""
    outputs = []
    for record in corpus:
        items = []
        for entry in record.verb_entries:
            for pair in entry.qa_pairs:
                if not question_is_valid(pair):
                    continue
                spans = frozenset(s for j in pair.judgments if j.is_valid
                                  for s in j.spans)
                items.append(ParseItem(entry.verb_index, pair.slots,
                                       spans, 1.0))
        outputs.append((record.sentence_id, ParseOutput(items)))
    return outputs


def test_evaluate_gold_against_itself_is_perfect(workdir, capsys):
    corpus = load_corpus(workdir / "corpus.jsonl")
    preds = workdir / "gold-preds.jsonl"
    write_predictions(preds, gold_predictions(corpus))
    payload = run_json(capsys, [
        "evaluate", str(preds), str(workdir / "corpus.jsonl"), "--joint"])
    assert payload["span"]["f1"] == 1.0
    assert payload["joint"]["f1"] == 1.0
    assert payload["matcher"] == "exact"


def test_evaluate_empty_predictions_has_zero_recall(workdir, capsys):
    preds = workdir / "none-preds.jsonl"
    preds.write_text("")
    payload = run_json(capsys, [
        "evaluate", str(preds), str(workdir / "corpus.jsonl"), "--iou"])
    assert payload["span"]["recall"] == 0.0
    assert payload["span"]["precision"] == 1.0
    assert payload["matcher"] == "iou"


def test_evaluate_rejects_unknown_verb_reference(workdir, capsys):
    corpus = load_corpus(workdir / "corpus.jsonl")
    item = gold_predictions(corpus)[0]
    preds = workdir / "bogus-preds.jsonl"
    write_predictions(preds, [("no-such-sentence", item[1])])
    code = run(["evaluate", str(preds), str(workdir / "corpus.jsonl")])
    assert code == 2
    assert "unknown verb" in capsys.readouterr().err


def test_matcher_flags_are_mutually_exclusive(workdir):
    with pytest.raises(SystemExit) as exc:
        run(["evaluate", "a.jsonl", "b.jsonl", "--exact", "--iou"])
    assert exc.value.code == 2


# -- threshold tuning -----------------------------------------------------


def test_tune_tau_agrees_with_library_call(workdir, span_model, capsys):
    payload = run_json(capsys, [
        "tune-tau", str(workdir / "corpus.jsonl"),
        "--span-model", str(span_model), "--step", "0.25"])
    detector = SpanDetector.load(span_model)
    dev = load_corpus(workdir / "corpus.jsonl")
    expected = tune_threshold(detector, dev, EXACT, step=0.25)
    assert payload["tau"] == pytest.approx(expected)
    assert payload["saved"] is False


def test_tune_tau_save_persists_threshold(workdir, span_model, capsys):
    payload = run_json(capsys, [
        "tune-tau", str(workdir / "corpus.jsonl"),
        "--span-model", str(span_model), "--save"])
    assert payload["step"] == 0.01
    assert payload["saved"] is True
    reloaded = SpanDetector.load(span_model)
    assert reloaded.threshold == pytest.approx(payload["tau"])


# -- expansion, folds, merge ----------------------------------------------


def test_expand_filters_existing_annotations(workdir, span_model, qgen_model,
                                             capsys):
    out = workdir / "cands.jsonl"
    payload = run_json(capsys, [
        "expand", str(workdir / "corpus.jsonl"),
        "--span-model", str(span_model), "--qgen-model", str(qgen_model),
        "--out", str(out), "--tau", "0.01",
        "--model-id", "m1", "--fold-id", "3"])
    assert payload["kept"] <= payload["overgenerated"]
    assert payload["modelId"] == "m1"
    assert payload["foldId"] == 3
    assert payload["tau"] == 0.01


def test_jackknife_partitions_cover_the_corpus(workdir, capsys):
    out_dir = workdir / "folds"
    payload = run_json(capsys, [
        "jackknife", str(workdir / "corpus.jsonl"), "-k", "5",
        "--out-dir", str(out_dir), "--seed", "3"])
    assert payload["folds"] == 5
    assert len(payload["files"]) == 5
    all_ids = {r.sentence_id for r in load_corpus(workdir / "corpus.jsonl")}
    heldout_ids = []
    for entry in payload["files"]:
        train = load_corpus(entry["train"])
        heldout = load_corpus(entry["heldout"])
        assert len(train) == entry["trainSentences"]
        assert len(heldout) == entry["heldoutSentences"]
        ids = {r.sentence_id for r in heldout}
        assert {r.sentence_id for r in train} == all_ids - ids
        heldout_ids.extend(ids)
    assert sorted(heldout_ids) == sorted(all_ids)


def judged_fixture(corpus):
    record = corpus[0]
    entry = record.verb_entries[0]
    pair = next(p for p in entry.qa_pairs if p.slots.wh == "who"
                and p.slots.aux == "did")
    span = pair.judgments[0].spans[0]
    kept = CandidateQA(record.sentence_id, entry.verb_index,
                       replace(pair.slots, wh="when"), (), "m", None)
    rejected = CandidateQA(record.sentence_id, entry.verb_index,
                           replace(pair.slots, wh="where"), (), "m", None)
    valid = tuple(Judgment(w, True, (span,)) for w in ("a", "b", "c"))
    invalid = (Judgment("a", True, (span,)), Judgment("b", False, ()),
               Judgment("c", False, ()))
    return [(kept, valid), (rejected, invalid)]


def test_merge_splits_validated_from_negatives(workdir, capsys):
    corpus = load_corpus(workdir / "corpus.jsonl")
    judged_path = workdir / "judged.jsonl"
    save_judged(judged_path, judged_fixture(corpus))
    payload = run_json(capsys, [
        "merge", str(workdir / "corpus.jsonl"), str(judged_path),
        "--out", str(workdir / "merged.jsonl"),
        "--negatives", str(workdir / "negs.jsonl")])
    assert payload["addedQuestions"] == 1
    assert payload["negativeQuestions"] == 1
    merged = load_corpus(workdir / "merged.jsonl")
    total = sum(len(e.qa_pairs) for r in merged for e in r.verb_entries)
    before = sum(len(e.qa_pairs) for r in corpus for e in r.verb_entries)
    assert total == before + 1
    negatives = load_corpus(workdir / "negs.jsonl")
    assert sum(len(e.qa_pairs) for r in negatives
               for e in r.verb_entries) == 1


def test_judged_file_round_trip(workdir, tmp_path):
    corpus = load_corpus(workdir / "corpus.jsonl")
    judged = judged_fixture(corpus)
    path = tmp_path / "round.jsonl"
    save_judged(path, judged)
    back = load_judged(path)
    assert [(c.slots, js) for c, js in back] == \
        [(c.slots, js) for c, js in judged]


def test_corrupt_judged_line_is_located(workdir, tmp_path, capsys):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"candidate": 5}\n')
    code = run(["merge", str(workdir / "corpus.jsonl"), str(path),
                "--out", str(tmp_path / "out.jsonl")])
    assert code == 2
    assert "judged line 1" in capsys.readouterr().err


# -- stats, gradient audit, service construction --------------------------


def test_stats_human_output(workdir, capsys):
    assert run(["stats", str(workdir / "corpus.jsonl")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("10 sentences")
    assert "wikipedia" in out


def test_stats_json(workdir, capsys):
    payload = run_json(capsys, ["stats", str(workdir / "corpus.jsonl")])
    assert payload["stats"]["sentences"] == 10
    assert payload["stats"]["questions"] >= 20


def test_grad_check_single_head(capsys):
    payload = run_json(capsys, [
        "grad-check", "--head", "bio", "--instances", "2"])
    assert payload["passed"] is True
    assert payload["heads"][0]["head"] == "bio"
    assert payload["heads"][0]["instances"] == 2
    assert payload["heads"][0]["maxRelativeError"] < 1e-4


def make_serve_args(corpus=None, log=None):
    import argparse
    return argparse.Namespace(corpus=corpus, log=log, validators=2,
                              lease_seconds=1800.0)


def test_serve_recovers_from_existing_log(workdir, tmp_path):
    log = tmp_path / "events.jsonl"
    first = build_service(make_serve_args(str(workdir / "corpus.jsonl"),
                                          str(log)))
    assert log.exists() and log.stat().st_size > 0
    second = build_service(make_serve_args(str(workdir / "corpus.jsonl"),
                                           str(log)))
    assert [r.to_json() for r in second.export()] == \
        [r.to_json() for r in first.export()]


def test_serve_requires_corpus_or_log():
    with pytest.raises(ValueError):
        build_service(make_serve_args())


# -- path resolution and exit codes ---------------------------------------


def test_data_dir_resolves_relative_paths(workdir, monkeypatch, capsys):
    monkeypatch.setenv("QASRL_DATA_DIR", str(workdir))
    monkeypatch.chdir(workdir.parent)
    assert run(["stats", "corpus.jsonl"]) == 0
    assert capsys.readouterr().out.startswith("10 sentences")


def test_dot_paths_stay_local(workdir, monkeypatch, capsys):
    monkeypatch.setenv("QASRL_DATA_DIR", str(workdir))
    monkeypatch.chdir(workdir.parent)
    assert run(["stats", "./corpus.jsonl"]) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path, capsys):
    assert run(["stats", str(tmp_path / "absent.jsonl")]) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate"])
    assert exc.value.code == 2


def test_missing_required_flag_exits_2(workdir):
    with pytest.raises(SystemExit) as exc:
        run(["train-span", str(workdir / "corpus.jsonl")])
    assert exc.value.code == 2


def test_console_script_is_wired(workdir):
    proc = subprocess.run(
        [sys.executable, "-m", "qasrl.cli", "stats",
         str(workdir / "corpus.jsonl"), "--json"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["stats"]["sentences"] == 10
