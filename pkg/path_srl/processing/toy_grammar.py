"""
Synthetic CoNLL-2009 corpus from a scripted toy grammar

Constructions: transitive and ditransitive verbs, "run" with a transitive
and an intransitive sense, control sentences of the forms "He had trouble
raising funds", "Mary promised John to sell cars" and "Mary persuaded John
to sell cars", and nominal predicates ("the sale of books by Mary") whose
arguments are headed by prepositions. Temporal and locative modifiers
attach to the main verb. Roles: A0, A1, A2, AM-TMP, AM-LOC.
Predicted columns equal the gold columns.
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from path_srl.processing.conll_io import Sentence, Token, write_corpus_file

logger = logging.getLogger(__name__)

PEOPLE = (("he", "he"), ("she", "she"), ("they", "they"), ("John", "john"), ("Mary", "mary"), ("Anna", "anna"), ("Peter", "peter"))
THINGS = (("funds", "fund"), ("books", "book"), ("cars", "car"), ("shares", "share"), ("houses", "house"), ("tickets", "ticket"))
COMPANIES = (("companies", "company"), ("shops", "shop"), ("banks", "bank"))
TRANSITIVE = (("bought", "buy"), ("sold", "sell"), ("found", "find"), ("raised", "raise"), ("wanted", "want"))
GERUNDS = (("buying", "buy"), ("selling", "sell"), ("finding", "find"), ("raising", "raise"))
INFINITIVES = (("buy", "buy"), ("sell", "sell"), ("find", "find"), ("raise", "raise"))
# controller of the infinitive: the subject for promise, the object for persuade
CONTROL_VERBS = ((("promised", "promise"), "subject"), (("persuaded", "persuade"), "object"))
DITRANSITIVE = (("gave", "give"), ("sent", "send"), ("showed", "show"))
NOMINALS = (("sale", "sale"), ("purchase", "purchase"))
REPORTING = (("announced", "announce"), ("reported", "report"))
TIMES = (("yesterday", "yesterday"), ("today", "today"))
CITIES = (("London", "london"), ("Paris", "paris"), ("Berlin", "berlin"))

ROLES = ("A0", "A1", "A2", "AM-LOC", "AM-TMP")
TRAIN_SIZE, HELDOUT_SIZE = 200, 50
HELDOUT_SEED_OFFSET = 1000


def _pick(rng: np.random.Generator, items):
    return items[int(rng.integers(len(items)))]


class _Builder:
    def __init__(self):
        self.rows: list[list] = []
        self.predicates: list[tuple[int, str, dict[int, str]]] = []

    def add(self, word: tuple[str, str], pos: str) -> int:
        form, lemma = word
        self.rows.append([form, lemma, pos, 0, "ROOT"])
        return len(self.rows)

    def link(self, token: int, head: int, deprel: str) -> int:
        self.rows[token - 1][3] = head
        self.rows[token - 1][4] = deprel
        return token

    def modifiers(self, rng: np.random.Generator, verb: int, args: dict[int, str]) -> None:
        if rng.random() < 0.3:
            args[self.link(self.add(_pick(rng, TIMES), "RB"), verb, "TMP")] = "AM-TMP"
        if rng.random() < 0.3:
            preposition = self.link(self.add(("in", "in"), "IN"), verb, "LOC")
            self.link(self.add(_pick(rng, CITIES), "N"), preposition, "PMOD")
            args[preposition] = "AM-LOC"

    def finish(self, root: int) -> Sentence:
        self.link(self.add((".", "."), "."), root, "P")
        tokens = []
        for k, (form, lemma, pos, head, deprel) in enumerate(self.rows, start=1):
            if k == 1:
                form = form[:1].upper() + form[1:]
            tokens.append(Token(k, form, lemma, lemma, pos, pos, "_", "_", head, head, deprel, deprel, False, ""))
        return Sentence(tuple(tokens)).with_annotation(self.predicates)


def _transitive(rng: np.random.Generator) -> Sentence:
    s = _Builder()
    form, lemma = _pick(rng, TRANSITIVE)
    subject = s.add(_pick(rng, PEOPLE), "N")
    verb = s.add((form, lemma), "V")
    s.link(subject, verb, "SBJ")
    obj = s.link(s.add(_pick(rng, THINGS), "N"), verb, "OBJ")
    args = {subject: "A0", obj: "A1"}
    s.modifiers(rng, verb, args)
    s.predicates.append((verb, f"{lemma}.01", args))
    return s.finish(verb)


def _ditransitive(rng: np.random.Generator) -> Sentence:
    s = _Builder()
    form, lemma = _pick(rng, DITRANSITIVE)
    subject = s.add(_pick(rng, PEOPLE), "N")
    verb = s.add((form, lemma), "V")
    s.link(subject, verb, "SBJ")
    recipient = s.link(s.add(_pick(rng, PEOPLE), "N"), verb, "IOBJ")
    obj = s.link(s.add(_pick(rng, THINGS), "N"), verb, "OBJ")
    args = {subject: "A0", obj: "A1", recipient: "A2"}
    s.modifiers(rng, verb, args)
    s.predicates.append((verb, f"{lemma}.01", args))
    return s.finish(verb)


def _run(rng: np.random.Generator) -> Sentence:
    """run.01 'operate' takes an object, run.02 'move fast' does not"""
    s = _Builder()
    subject = s.add(_pick(rng, PEOPLE), "N")
    verb = s.add(("runs", "run"), "V")
    s.link(subject, verb, "SBJ")
    args = {subject: "A0"}
    sense = "run.02"
    if rng.random() < 0.5:
        args[s.link(s.add(_pick(rng, COMPANIES), "N"), verb, "OBJ")] = "A1"
        sense = "run.01"
    s.modifiers(rng, verb, args)
    s.predicates.append((verb, sense, args))
    return s.finish(verb)


def _control(rng: np.random.Generator) -> Sentence:
    """X had trouble V-ing Y: X is also the A0 of the gerund"""
    s = _Builder()
    subject = s.add(_pick(rng, PEOPLE), "N")
    have = s.add(("had", "have"), "V")
    s.link(subject, have, "SBJ")
    trouble = s.link(s.add(("trouble", "trouble"), "N"), have, "OBJ")
    form, lemma = _pick(rng, GERUNDS)
    gerund = s.link(s.add((form, lemma), "V"), trouble, "NMOD")
    obj = s.link(s.add(_pick(rng, THINGS), "N"), gerund, "OBJ")
    args = {subject: "A0", trouble: "A1"}
    s.modifiers(rng, have, args)
    s.predicates.append((have, "have.03", args))
    s.predicates.append((gerund, f"{lemma}.01", {subject: "A0", obj: "A1"}))
    return s.finish(have)


def _infinitival_control(rng: np.random.Generator) -> Sentence:
    """
    X promised/persuaded Y to V Z. Both sentences have the same shape, so
    which of X and Y is the A0 of V depends only on the word at the top of
    the path from V.
    """
    s = _Builder()
    subject = s.add(_pick(rng, PEOPLE), "N")
    (form, lemma), controller = _pick(rng, CONTROL_VERBS)
    verb = s.add((form, lemma), "V")
    s.link(subject, verb, "SBJ")
    obj = s.link(s.add(_pick(rng, PEOPLE), "N"), verb, "OBJ")
    to = s.link(s.add(("to", "to"), "TO"), verb, "OPRD")
    inf_form, inf_lemma = _pick(rng, INFINITIVES)
    infinitive = s.link(s.add((inf_form, inf_lemma), "V"), to, "IM")
    thing = s.link(s.add(_pick(rng, THINGS), "N"), infinitive, "OBJ")
    if controller == "subject":
        args = {subject: "A0", obj: "A2", to: "A1"}
    else:
        args = {subject: "A0", obj: "A1", to: "A2"}
    s.modifiers(rng, verb, args)
    s.predicates.append((verb, f"{lemma}.01", args))
    s.predicates.append((infinitive, f"{inf_lemma}.01", {subject if controller == "subject" else obj: "A0", thing: "A1"}))
    return s.finish(verb)


def _nominal(rng: np.random.Generator) -> Sentence:
    """X announced the sale of Y [by Z]: the nominal's arguments are its prepositions"""
    s = _Builder()
    subject = s.add(_pick(rng, PEOPLE), "N")
    form, lemma = _pick(rng, REPORTING)
    verb = s.add((form, lemma), "V")
    s.link(subject, verb, "SBJ")
    determiner = s.add(("the", "the"), "DT")
    noun_form, noun_lemma = _pick(rng, NOMINALS)
    noun = s.link(s.add((noun_form, noun_lemma), "N"), verb, "OBJ")
    s.link(determiner, noun, "NMOD")
    of = s.link(s.add(("of", "of"), "IN"), noun, "NMOD")
    s.link(s.add(_pick(rng, THINGS), "N"), of, "PMOD")
    noun_args = {of: "A1"}
    if rng.random() < 0.6:
        by = s.link(s.add(("by", "by"), "IN"), noun, "NMOD")
        s.link(s.add(_pick(rng, PEOPLE), "N"), by, "PMOD")
        noun_args[by] = "A0"
    args = {subject: "A0", noun: "A1"}
    s.modifiers(rng, verb, args)
    s.predicates.append((verb, f"{lemma}.01", args))
    s.predicates.append((noun, f"{noun_lemma}.01", noun_args))
    return s.finish(verb)


CONSTRUCTIONS = (
    (_transitive, 0.20),
    (_control, 0.15),
    (_infinitival_control, 0.25),
    (_ditransitive, 0.10),
    (_run, 0.12),
    (_nominal, 0.18),
)


def generate_corpus(n_sentences: int, seed: int = 1) -> list[Sentence]:
    rng = np.random.default_rng(seed)
    builders = [b for b, _ in CONSTRUCTIONS]
    weights = np.array([w for _, w in CONSTRUCTIONS])
    picks = rng.choice(len(builders), size=n_sentences, p=weights / weights.sum())
    return [builders[k](rng) for k in picks]


def main(argv=None):
    """Writes train.conll and heldout.conll for the synthetic corpus"""
    parser = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    parser.add_argument("--output-dir", default="data", type=Path)
    parser.add_argument("--train-size", default=TRAIN_SIZE, type=int)
    parser.add_argument("--heldout-size", default=HELDOUT_SIZE, type=int)
    parser.add_argument("--seed", default=1, type=int)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    args.output_dir.mkdir(parents=True, exist_ok=True)
    splits = {
        "train.conll": generate_corpus(args.train_size, args.seed),
        "heldout.conll": generate_corpus(args.heldout_size, args.seed + HELDOUT_SEED_OFFSET),
    }
    for name, corpus in splits.items():
        write_corpus_file(corpus, args.output_dir / name)
        logger.info("Wrote %d sentences to %s", len(corpus), args.output_dir / name)


if __name__ == "__main__":
    main()
