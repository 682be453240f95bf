"""
Labeled semantic precision, recall and F1 with CoNLL-2009 scorer semantics

Scored units are predicate senses (correct when the same token carries the
same PRED string) and (predicate, argument, role) triples (correct on exact
match). The diagnostic breakdowns partition the same units.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import pandas as pd

from path_srl.errors import AlignmentError, NoPathError
from path_srl.processing.conll_io import Sentence
from path_srl.processing.dep_graph import build_tree, tree_path
from path_srl.srl_models import predicate_category

FREQUENCY_BUCKETS = (
    ("0", 0, 0),
    ("1-10", 1, 10),
    ("<=1e2", 11, 100),
    ("<=1e3", 101, 1000),
    ("<=1e4", 1001, 10000),
    (">1e4", 10001, None),
)
LENGTH_BUCKETS = (
    ("1-10", 1, 10),
    ("11-15", 11, 15),
    ("16-20", 16, 20),
    ("21-25", 21, 25),
    ("26-30", 26, 30),
    ("31-", 31, None),
)
ROLE_GROUPS = ("A0", "A1", "A2", "AM", "other")


@dataclass
class ScoreReport:
    correct: int = 0
    predicted: int = 0
    gold: int = 0
    buckets: dict[str, "ScoreReport"] = field(default_factory=dict)

    @property
    def precision(self) -> float:
        return 100.0 * self.correct / self.predicted if self.predicted else 0.0

    @property
    def recall(self) -> float:
        return 100.0 * self.correct / self.gold if self.gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def count(self, predicted: set, gold: set) -> "ScoreReport":
        self.correct += len(predicted & gold)
        self.predicted += len(predicted)
        self.gold += len(gold)
        return self

    def bucket(self, name: str) -> "ScoreReport":
        return self.buckets.setdefault(name, ScoreReport())

    def row(self) -> dict:
        return {
            "correct": self.correct,
            "predicted": self.predicted,
            "gold": self.gold,
            "precision": round(self.precision, 2),
            "recall": round(self.recall, 2),
            "f1": round(self.f1, 2),
        }

    def to_frame(self) -> pd.DataFrame:
        rows = [{"bucket": "all", **self.row()}]
        rows += [{"bucket": name, **report.row()} for name, report in self.buckets.items()]
        return pd.DataFrame(rows).set_index("bucket")

    def records(self, report: str) -> list[str]:
        """Stable machine-readable lines: report, bucket, then the counts and scores"""
        lines = []
        for name, values in self.to_frame().iterrows():
            fields = [f"report={report}", f"bucket={name}"]
            fields += [f"{key}={values[key]:.2f}" if key in ("precision", "recall", "f1") else f"{key}={int(values[key])}" for key in values.index]
            lines.append(" ".join(fields))
        return lines


def _check_alignment(gold: Sequence[Sentence], predicted: Sequence[Sentence]) -> None:
    if len(gold) != len(predicted):
        raise AlignmentError(f"gold has {len(gold)} sentences, predicted has {len(predicted)}")
    for k, (g, p) in enumerate(zip(gold, predicted), start=1):
        if [t.form for t in g.tokens] != [t.form for t in p.tokens]:
            raise AlignmentError(f"sentence {k}: token forms differ between gold and predicted")


def sense_units(sentence: Sentence) -> set[tuple]:
    return {(t.id, t.pred) for t in sentence.tokens if t.fillpred}


def argument_units(sentence: Sentence) -> set[tuple]:
    return {
        (predicate, token, role)
        for column, predicate in enumerate(sentence.predicate_ids)
        for token, role in sentence.arguments_of(column)
    }


def score(gold: Sequence[Sentence], predicted: Sequence[Sentence]) -> ScoreReport:
    _check_alignment(gold, predicted)
    report = ScoreReport()
    senses, arguments = report.bucket("senses"), report.bucket("arguments")
    for g, p in zip(gold, predicted):
        g_senses, p_senses = sense_units(g), sense_units(p)
        g_args, p_args = argument_units(g), argument_units(p)
        senses.count(p_senses, g_senses)
        arguments.count(p_args, g_args)
        report.count(p_senses | p_args, g_senses | g_args)
    return report


def _bucketed(
    gold: Sequence[Sentence],
    predicted: Sequence[Sentence],
    bucket_names: Iterable[str],
    assign: Callable[[int, Sentence, tuple], str | None],
    units: Callable[[Sentence], set] = argument_units,
) -> ScoreReport:
    _check_alignment(gold, predicted)
    report = ScoreReport()
    for name in bucket_names:
        report.bucket(name)
    for k, (g, p) in enumerate(zip(gold, predicted)):
        g_units, p_units = units(g), units(p)
        report.count(p_units, g_units)
        grouped: dict[str, tuple[set, set]] = {}
        for side, unit_set in ((0, p_units), (1, g_units)):
            for unit in unit_set:
                name = assign(k, g, unit)
                grouped.setdefault(name, (set(), set()))[side].add(unit)
        for name, (p_part, g_part) in grouped.items():
            report.bucket(name).count(p_part, g_part)
    return report


def _frequency_bucket(count: int) -> str:
    for name, low, high in FREQUENCY_BUCKETS:
        if count >= low and (high is None or count <= high):
            return name
    raise ValueError(count)


def _path_string(tree, predicate: int, argument: int) -> str:
    try:
        return tree_path(tree, predicate, argument).relations
    except NoPathError:
        return ""


def path_frequencies(training: Iterable[Sentence]) -> Counter:
    """Training counts of the direction-tagged relation path of each gold argument"""
    counts = Counter()
    for sentence in training:
        tree = build_tree(sentence)
        for predicate, token, _ in argument_units(sentence):
            path = _path_string(tree, predicate, token)
            if path:
                counts[path] += 1
    return counts


def recall_by_path_frequency(
    gold: Sequence[Sentence], predicted: Sequence[Sentence], training: Iterable[Sentence]
) -> ScoreReport:
    counts = path_frequencies(training)
    trees = [build_tree(s) for s in gold]

    def assign(k, sentence, unit):
        predicate, token, _ = unit
        path = _path_string(trees[k], predicate, token)
        return _frequency_bucket(counts[path] if path else 0)

    return _bucketed(gold, predicted, [name for name, _, _ in FREQUENCY_BUCKETS], assign)


def _length_bucket(length: int) -> str:
    for name, low, high in LENGTH_BUCKETS:
        if length >= low and (high is None or length <= high):
            return name
    raise ValueError(length)


def f1_by_sentence_length(gold: Sequence[Sentence], predicted: Sequence[Sentence]) -> ScoreReport:
    report = _bucketed(
        gold,
        predicted,
        [],
        lambda k, sentence, unit: _length_bucket(len(sentence)),
        units=lambda s: {("sense",) + u for u in sense_units(s)} | {("arg",) + u for u in argument_units(s)},
    )
    present = {_length_bucket(len(s)) for s in gold}
    report.buckets = {name: report.buckets.get(name, ScoreReport()) for name, _, _ in LENGTH_BUCKETS if name in present}
    return report


def role_group(label: str) -> str:
    if label in ("A0", "A1", "A2"):
        return label
    return "AM" if label.startswith("AM") else "other"


def report_by_category_and_role(gold: Sequence[Sentence], predicted: Sequence[Sentence]) -> ScoreReport:
    """Arguments split by predicate category (from the predicate's PPOS) and role group"""
    names = [f"{category}/{group}" for category in ("verb", "noun") for group in ROLE_GROUPS]

    def assign(k, sentence, unit):
        predicate, _, role = unit
        return f"{predicate_category(sentence.token(predicate).ppos)}/{role_group(role)}"

    return _bucketed(gold, predicted, names, assign)
