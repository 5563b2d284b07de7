"""QA-SRL toolkit: question grammar, span detection, question generation,
evaluation metrics, data expansion, and a self-hosted annotation service.

The named modules are the public surface:

- ``qasrl.corpus``: domain types, JSONL serialization, statistics.
- ``qasrl.grammar``: the 7-slot question template, acceptor automaton,
  autocomplete, suggestion ranking, rendering, and inflection.
- ``qasrl.nn``: the numpy autograd substrate the models are built on.
- ``qasrl.spandet`` / ``qasrl.qgen``: span detection and question
  generation models with their training loops.
- ``qasrl.parser``: the end-to-end pipeline and prediction files.
- ``qasrl.metrics``: span, question, and joint evaluation plus
  agreement statistics.
- ``qasrl.expand``: data expansion (overgenerate, filter, jackknife,
  merge).
- ``qasrl.annosvc``: the crowdsourcing annotation service and its HTTP
  API.
- ``qasrl.cli``: the ``qasrl`` command.

``qasrl.grammar.parse`` reads a question string back into slots;
``qasrl.parser.parse`` runs the neural pipeline over a sentence.  They
are intentionally not re-exported here.
"""

from .corpus import (
    AnswerSpan,
    CorpusError,
    Judgment,
    QAPair,
    QuestionSlots,
    SentenceRecord,
    VerbEntry,
    load_corpus,
    save_corpus,
)
from .grammar import (
    GrammarError,
    VerbSlot,
    auto_suggest,
    autocomplete,
    inflect,
    nfa_accepts,
    render,
)
from .metrics import EXACT, IOU, agreement_kappa
from .qgen import QuestionGenerator, train_question_model
from .spandet import SpanDetector, train_span_model, tune_threshold

__version__ = "0.1.0"

__all__ = [
    "AnswerSpan",
    "CorpusError",
    "EXACT",
    "GrammarError",
    "IOU",
    "Judgment",
    "QAPair",
    "QuestionGenerator",
    "QuestionSlots",
    "SentenceRecord",
    "SpanDetector",
    "VerbEntry",
    "VerbSlot",
    "__version__",
    "agreement_kappa",
    "auto_suggest",
    "autocomplete",
    "inflect",
    "load_corpus",
    "nfa_accepts",
    "render",
    "save_corpus",
    "train_question_model",
    "train_span_model",
    "tune_threshold",
]
