"""File formats: column corpora, raw token triples, and model persistence.

Column files are whitespace-separated token rows, one sentence per blank-line
block, 22 feature columns plus a trailing label.  Raw files carry one
``word<TAB>pos[<TAB>label]`` token per line.  Writes to paths are atomic:
content lands in a temp file that is renamed over the target.
"""

from __future__ import annotations

import os
import tempfile
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterator, Sequence

from .crf import CrfModel, LabelSet
from .errors import InputError, ParseError
from .features import LABELS, NUM_COLUMNS, Sentence, TokenRecord
from .templates import parse_template, serialize_template

MODEL_MAGIC = "mwetag-crf-model"
MODEL_VERSION = "1"


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...] = ()

    def __post_init__(self) -> None:
        if any(not s for s in self.sentences):
            raise InputError("corpus sentences must be non-empty")

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def __getitem__(self, index):
        return self.sentences[index]

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)


def _read_text(source: str | Path | IO[str]) -> str:
    if hasattr(source, "read"):
        return source.read()
    return Path(source).read_text(encoding="utf-8")


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never observe a
    partially written file."""
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _write_text(target: str | Path | IO[str], text: str) -> None:
    if hasattr(target, "write"):
        target.write(text)
    else:
        atomic_write_text(target, text)


def read_column_file(source: str | Path | IO[str], expect_labels: bool = True) -> Corpus:
    """Parse a column file.  With expect_labels, every row needs exactly
    NUM_COLUMNS + 1 fields; otherwise a trailing 23rd field is ignored."""
    sentences: list[Sentence] = []
    current: list[TokenRecord] = []
    for lineno, raw in enumerate(_read_text(source).splitlines(), start=1):
        if not raw.strip():
            if current:
                sentences.append(tuple(current))
                current = []
            continue
        fields = raw.split()
        if expect_labels:
            if len(fields) != NUM_COLUMNS + 1:
                raise ParseError(
                    f"expected {NUM_COLUMNS + 1} fields, got {len(fields)}", line=lineno
                )
            label = fields[NUM_COLUMNS]
            if label not in LABELS:
                raise ParseError(f"label {label!r} not in {LABELS}", line=lineno)
            record = TokenRecord(columns=tuple(fields[:NUM_COLUMNS]), label=label)
        else:
            if len(fields) not in (NUM_COLUMNS, NUM_COLUMNS + 1):
                raise ParseError(
                    f"expected {NUM_COLUMNS} or {NUM_COLUMNS + 1} fields, got {len(fields)}",
                    line=lineno,
                )
            record = TokenRecord(columns=tuple(fields[:NUM_COLUMNS]))
        current.append(record)
    if current:
        sentences.append(tuple(current))
    return Corpus(sentences=tuple(sentences))


def write_column_file(
    corpus: Corpus | Sequence[Sentence],
    target: str | Path | IO[str],
    include_labels: bool = True,
) -> None:
    blocks = []
    for s_idx, sentence in enumerate(corpus):
        lines = []
        for t, record in enumerate(sentence):
            fields = record.columns + ((record.label,) if include_labels else ())
            for value in fields:
                if not value or any(ch.isspace() for ch in value):
                    raise InputError(
                        f"sentence {s_idx}, token {t}: field {value!r} cannot be"
                        " written to a whitespace-separated file"
                    )
            lines.append(" ".join(fields))
        blocks.append("\n".join(lines))
    _write_text(target, "\n\n".join(blocks) + "\n" if blocks else "")


def read_raw(source: str | Path | IO[str]) -> list[list[tuple[str, str, str]]]:
    """Raw triples, NFC-normalized; the label defaults to "O" when absent."""
    sentences: list[list[tuple[str, str, str]]] = []
    current: list[tuple[str, str, str]] = []
    for lineno, raw in enumerate(_read_text(source).splitlines(), start=1):
        if not raw.strip():
            if current:
                sentences.append(current)
                current = []
            continue
        fields = raw.split("\t")
        if len(fields) not in (2, 3):
            raise ParseError(
                f"expected word<TAB>pos[<TAB>label], got {len(fields)} fields",
                line=lineno,
            )
        word = unicodedata.normalize("NFC", fields[0].strip())
        pos = fields[1].strip()
        label = fields[2].strip() if len(fields) == 3 else "O"
        if not word or not pos:
            raise ParseError("word and pos must be non-empty", line=lineno)
        if any(ch.isspace() for ch in word) or any(ch.isspace() for ch in pos):
            raise ParseError("word and pos cannot contain whitespace", line=lineno)
        if label not in LABELS:
            raise ParseError(f"label {label!r} not in {LABELS}", line=lineno)
        current.append((word, pos, label))
    if current:
        sentences.append(current)
    return sentences


_ESCAPES = (("%", "%25"), ("\t", "%09"), ("\n", "%0A"), ("\r", "%0D"), (" ", "%20"))


def _escape(text: str) -> str:
    for plain, escaped in _ESCAPES:
        text = text.replace(plain, escaped)
    return text


def _unescape(text: str) -> str:
    for plain, escaped in reversed(_ESCAPES[1:]):
        text = text.replace(escaped, plain)
    return text.replace("%25", "%")


def save_model(model: CrfModel, target: str | Path | IO[str]) -> None:
    """Versioned UTF-8 text.  Weight values use repr(), which round-trips
    doubles exactly."""
    template_lines = serialize_template(model.template).splitlines()
    lines = [
        f"{MODEL_MAGIC} {MODEL_VERSION}",
        f"rho {model.rho!r}",
        "labels " + " ".join(_escape(label) for label in model.label_set.labels),
        f"template {len(template_lines)}",
        *template_lines,
        f"weights {len(model.weights)}",
    ]
    for (first, second), weight in model.weights.items():
        # parts escaped separately: a literal tab inside a key must not
        # collide with the field separator
        lines.append(
            _escape(first) + "\t" + _escape(second) + "\t" + repr(float(weight))
        )
    _write_text(target, "\n".join(lines) + "\n")


def load_model(source: str | Path | IO[str]) -> CrfModel:
    # split on "\n" alone: escaped keys may hold exotic line separators
    # (NEL, U+2028) that splitlines() would treat as line breaks
    lines = _read_text(source).split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    def need(index: int, what: str) -> str:
        if index >= len(lines):
            raise ParseError(f"file ends before {what}", line=len(lines))
        return lines[index]

    head = need(0, "header").split(" ")
    if len(head) != 2 or head[0] != MODEL_MAGIC:
        raise ParseError(f"not a {MODEL_MAGIC} file", line=1)
    if head[1] != MODEL_VERSION:
        raise ParseError(f"unsupported model version {head[1]!r}", line=1)

    rho_parts = need(1, "rho").split(" ")
    if len(rho_parts) != 2 or rho_parts[0] != "rho":
        raise ParseError("expected 'rho <value>'", line=2)
    try:
        rho = float(rho_parts[1])
    except ValueError:
        raise ParseError(f"bad rho value {rho_parts[1]!r}", line=2) from None

    label_line = need(2, "labels")
    if not label_line.startswith("labels "):
        raise ParseError("expected 'labels ...'", line=3)
    labels = tuple(_unescape(part) for part in label_line[len("labels "):].split(" "))

    count_line = need(3, "template").split(" ")
    if len(count_line) != 2 or count_line[0] != "template" or not count_line[1].isdigit():
        raise ParseError("expected 'template <line count>'", line=4)
    n_template = int(count_line[1])
    template_text = "\n".join(need(4 + i, "template body") for i in range(n_template))
    template = parse_template(template_text)

    at = 4 + n_template
    weight_head = need(at, "weights").split(" ")
    if len(weight_head) != 2 or weight_head[0] != "weights" or not weight_head[1].isdigit():
        raise ParseError("expected 'weights <count>'", line=at + 1)
    n_weights = int(weight_head[1])
    weights: dict[tuple[str, str], float] = {}
    for i in range(n_weights):
        lineno = at + 2 + i
        row = need(at + 1 + i, "weight row").split("\t")
        if len(row) != 3:
            raise ParseError("expected 'first<TAB>second<TAB>value'", line=lineno)
        try:
            weights[(_unescape(row[0]), _unescape(row[1]))] = float(row[2])
        except ValueError:
            raise ParseError(f"bad weight value {row[2]!r}", line=lineno) from None
    tail = at + 1 + n_weights
    for extra, raw in enumerate(lines[tail:], start=tail + 1):
        if raw.strip():
            raise ParseError(f"unexpected trailing content {raw!r}", line=extra)
    return CrfModel(
        label_set=LabelSet(labels=labels), template=template, weights=weights, rho=rho
    )
