"""Train tiny models on the deterministic toy corpus, then parse.

Uses reduced sizes so the whole run stays under a minute.

Run: python demos/train_and_parse.py
"""

from qasrl import render, train_question_model, train_span_model
from qasrl.metrics import EXACT, span_detection_prf_micro
from qasrl.parser import parse
from qasrl.spandet import gold_question_spans
from qasrl.synthetic import synthetic_corpus

corpus = synthetic_corpus(50)
questions = sum(len(e.qa_pairs) for r in corpus for e in r.verb_entries)
print(f"toy corpus: {len(corpus)} sentences, {questions} questions")

print("\ntraining span detector (25 epochs)...")
detector, history = train_span_model(
    corpus, "span", layers=2, hidden=64, embedding=32, mlp_hidden=64,
    epochs=25, batch_size=10, seed=0)
print(f"  final loss {history.epoch_losses[-1]:.4f}")

instances = [(detector.detect(r.tokens, e.verb_index),
              gold_question_spans(e))
             for r in corpus for e in r.verb_entries]
prf = span_detection_prf_micro(instances, EXACT)
print(f"  training-set span F1: {prf.f1:.3f}")

print("\ntraining sequential question generator (25 epochs)...")
generator, history = train_question_model(
    corpus, "seq", layers=2, hidden=64, embedding=32, decoder_layers=1,
    decoder_hidden=64, token_embedding=16, mlp_hidden=64,
    epochs=25, batch_size=10, seed=0)
print(f"  final loss {history.epoch_losses[-1]:.4f}")

record = corpus[0]
entry = record.verb_entries[0]
print(f"\nparsing: {' '.join(record.tokens)}")
output = parse(record.tokens, record.pos_tags, detector, generator, tau=0.5)
for item in output.items:
    spans = [" ".join(record.tokens[s.start:s.end + 1])
             for s in sorted(item.spans)]
    print(f"  {render(item.slots, entry.inflections):40s} -> {spans}")
