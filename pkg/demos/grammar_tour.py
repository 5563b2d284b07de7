"""Walk the question grammar: inflection, autocomplete, rendering.

Run: python demos/grammar_tour.py
"""

from qasrl import auto_suggest, autocomplete, inflect, nfa_accepts, render
from qasrl.grammar import QuestionSlots, VerbSlot, parse

table = inflect("blame")
print("inflections for 'blame':", table.to_json())

print("\nBuilding a question slot by slot; autocomplete narrows each step.")
prefix = []
for value in ["who", "", ""]:
    options = autocomplete(prefix)
    print(f"  after {prefix}: {len(options)} options")
    prefix.append(value)

verb_options = autocomplete(prefix)
print(f"  verb slot options with no auxiliary and no subject: "
      f"{verb_options}")
print("  ('stem' is absent: 'Who blame someone?' is not a question)")

slots = QuestionSlots("who", "", "", VerbSlot("", "past"),
                      "someone", "", "")
text = render(slots, table)
print(f"\nrender: {text}")
print(f"parse back: {parse(text, table) == slots}")
print(f"acceptor agrees it is grammatical: {nfa_accepts(slots)}")

bad = QuestionSlots("what", "did", "", VerbSlot("been", "pastParticiple"),
                    "", "", "")
print(f"\n'What did been appeared?' accepted: {nfa_accepts(bad)}")

print("\nSuggestions reuse the sentence's earlier questions:")
prior = [slots]
for suggestion in auto_suggest(prior, table)[:3]:
    print(" ", render(suggestion, table))
