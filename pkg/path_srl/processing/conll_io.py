"""
CoNLL-2009 corpus reading and writing

Columns: ID FORM LEMMA PLEMMA POS PPOS FEAT PFEAT HEAD PHEAD DEPREL PDEPREL
FILLPRED PRED APRED1..APREDn, tab separated, one blank line after each
sentence. `_` marks an empty PRED/APRED field and every empty field is
written back as `_`; a field with no text at all is rejected on reading.
"""

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence, TextIO

from path_srl.errors import CorpusFormatError

logger = logging.getLogger(__name__)

EMPTY = "_"
FIXED_COLUMNS = 14
COLUMN_NAMES = (
    "ID", "FORM", "LEMMA", "PLEMMA", "POS", "PPOS", "FEAT", "PFEAT",
    "HEAD", "PHEAD", "DEPREL", "PDEPREL", "FILLPRED", "PRED",
)


@dataclass(frozen=True)
class Token:
    id: int
    form: str
    lemma: str
    plemma: str
    pos: str
    ppos: str
    feat: str
    pfeat: str
    head: int
    phead: int
    deprel: str
    pdeprel: str
    fillpred: bool
    pred: str
    apreds: tuple[str, ...] = ()


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]

    def __len__(self):
        return len(self.tokens)

    def token(self, token_id: int) -> Token:
        return self.tokens[token_id - 1]

    @property
    def predicate_ids(self) -> tuple[int, ...]:
        return tuple(t.id for t in self.tokens if t.fillpred)

    def arguments_of(self, column: int) -> list[tuple[int, str]]:
        """(token id, role) pairs annotated in APRED column `column` (0-based)"""
        return [(t.id, t.apreds[column]) for t in self.tokens if t.apreds[column]]

    def with_annotation(self, predicates: Sequence[tuple[int, str, Mapping[int, str]]]) -> "Sentence":
        """
        Copy of the sentence with PRED/APRED replaced.

        `predicates` lists (token id, sense, {argument id: role}) in any order;
        APRED columns follow token order as the format requires.
        """
        ordered = sorted(predicates, key=lambda p: p[0])
        senses = {token_id: sense for token_id, sense, _ in ordered}
        tokens = []
        for t in self.tokens:
            apreds = tuple(args.get(t.id, "") for _, _, args in ordered)
            sense = senses.get(t.id, "")
            tokens.append(replace(t, fillpred=t.id in senses, pred=sense, apreds=apreds))
        return Sentence(tuple(tokens))


def _field(value: str) -> str:
    return value if value else EMPTY


def _optional(value: str) -> str:
    return "" if value == EMPTY else value


def _integer(value: str, name: str, line_number: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise CorpusFormatError(f"{name} field is not an integer: {value!r}", line_number) from None


def _parse_row(line: str, line_number: int) -> tuple[Token, int]:
    columns = line.split("\t")
    if len(columns) < FIXED_COLUMNS:
        raise CorpusFormatError(
            f"expected at least {FIXED_COLUMNS} columns, found {len(columns)}", line_number
        )
    for position, value in enumerate(columns):
        if not value:
            name = COLUMN_NAMES[position] if position < FIXED_COLUMNS else f"APRED{position - FIXED_COLUMNS + 1}"
            raise CorpusFormatError(f"empty {name} field, missing values are written as '_'", line_number)
    fillpred = columns[12]
    if fillpred not in ("Y", EMPTY):
        raise CorpusFormatError(f"FILLPRED must be 'Y' or '_', found {fillpred!r}", line_number)
    token = Token(
        id=_integer(columns[0], "ID", line_number),
        form=columns[1],
        lemma=columns[2],
        plemma=columns[3],
        pos=columns[4],
        ppos=columns[5],
        feat=columns[6],
        pfeat=columns[7],
        head=_integer(columns[8], "HEAD", line_number),
        phead=_integer(columns[9], "PHEAD", line_number),
        deprel=columns[10],
        pdeprel=columns[11],
        fillpred=fillpred == "Y",
        pred=_optional(columns[13]),
        apreds=tuple(_optional(c) for c in columns[FIXED_COLUMNS:]),
    )
    if token.fillpred and not token.pred:
        raise CorpusFormatError("FILLPRED is 'Y' but PRED is empty", line_number)
    if token.pred and not token.fillpred:
        raise CorpusFormatError(f"PRED {token.pred!r} given without FILLPRED", line_number)
    return token, len(columns)


def _check_heads(tokens: list[Token], line_numbers: list[int]) -> None:
    size = len(tokens)
    for token, line_number in zip(tokens, line_numbers):
        for name, head in (("HEAD", token.head), ("PHEAD", token.phead)):
            if not 0 <= head <= size:
                raise CorpusFormatError(f"{name} {head} outside sentence of length {size}", line_number)
            if head == token.id:
                raise CorpusFormatError(f"{name} of token {token.id} points to itself", line_number)
    # predicted heads must form a forest
    for token, line_number in zip(tokens, line_numbers):
        seen = {token.id}
        head = token.phead
        while head != 0:
            if head in seen:
                raise CorpusFormatError(f"PHEAD cycle through token {token.id}", line_number)
            seen.add(head)
            head = tokens[head - 1].phead


def _build_sentence(rows: list[tuple[Token, int, int]]) -> Sentence:
    tokens = [token for token, _, _ in rows]
    line_numbers = [line_number for _, _, line_number in rows]
    width = rows[0][1]
    for position, (token, columns, line_number) in enumerate(rows, start=1):
        if token.id != position:
            raise CorpusFormatError(f"ID {token.id} found at position {position}", line_number)
        if columns != width:
            raise CorpusFormatError(f"row has {columns} columns, sentence has {width}", line_number)
    predicates = sum(1 for t in tokens if t.fillpred)
    if width - FIXED_COLUMNS != predicates:
        raise CorpusFormatError(
            f"sentence has {predicates} predicates but {width - FIXED_COLUMNS} APRED columns",
            line_numbers[0],
        )
    _check_heads(tokens, line_numbers)
    return Sentence(tuple(tokens))


def read_corpus(stream: Iterable[str]) -> list[Sentence]:
    corpus = []
    rows: list[tuple[Token, int, int]] = []
    for line_number, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if line != line.rstrip():
            raise CorpusFormatError("trailing whitespace", line_number)
        if not line:
            if rows:
                corpus.append(_build_sentence(rows))
                rows = []
            continue
        token, columns = _parse_row(line, line_number)
        rows.append((token, columns, line_number))
    if rows:
        corpus.append(_build_sentence(rows))
    return corpus


def format_token(token: Token) -> str:
    columns = [
        str(token.id),
        token.form,
        token.lemma,
        token.plemma,
        token.pos,
        token.ppos,
        token.feat,
        token.pfeat,
        str(token.head),
        str(token.phead),
        token.deprel,
        token.pdeprel,
        "Y" if token.fillpred else "",
        token.pred,
        *token.apreds,
    ]
    return "\t".join(_field(c) for c in columns)


def write_corpus(corpus: Iterable[Sentence], stream: TextIO) -> None:
    for sentence in corpus:
        for token in sentence.tokens:
            stream.write(format_token(token))
            stream.write("\n")
        stream.write("\n")


def read_corpus_file(path) -> list[Sentence]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        corpus = read_corpus(f)
    logger.info("Loaded %d sentences from %s", len(corpus), path)
    return corpus


def write_corpus_file(corpus: Iterable[Sentence], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_corpus(corpus, f)
