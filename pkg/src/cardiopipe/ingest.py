"""Readers for the UCI heart-disease files.

Two layouts are supported. The raw files hold 76 whitespace-separated
values per record, terminated by the literal token ``name`` and spread over
several lines. The processed files hold 14 comma-separated fields per line.
Both are mapped into the same 76-slot record with ``nan`` as the missing
sentinel (raw files write ``-9``, processed files write ``?``).
"""
from __future__ import annotations

import enum
import io
import os
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .errors import (
    FieldCountMismatch,
    LabelOutOfRange,
    MissingLabel,
    NonNumericToken,
    PncadenMismatch,
    SchemaError,
    TokenCountMismatch,
    TruncatedRecord,
)

N_ATTRIBUTES = 76
LABEL_ID = 58
PATIENT_ID = 1
TERMINATOR = "name"
MISSING = float("nan")

KINDS = ("continuous", "categorical", "binary", "date-part", "identifier", "unused")
ROLES = ("symptom", "label", "metadata")

DATASET_TITLES = {
    "cleveland": "CLEVELAND",
    "hungarian": "HUNGARIAN",
    "switzerland": "SWITZERLAND",
    "long-beach": "LONG BEACH",
}


def is_missing(value) -> bool:
    return value != value


class ClassLabel(enum.IntEnum):
    ABSENCE = 0
    STARTING = 1
    MILD = 2
    MODERATE = 3
    SERIOUS = 4

    @property
    def title(self) -> str:
        return self.name.lower()


N_CLASSES = len(ClassLabel)


# -- schema ----------------------------------------------------------------

@dataclass(frozen=True)
class AttributeDescriptor:
    id: int
    name: str
    kind: str
    role: str
    categories: tuple[float, ...] = ()

    @property
    def excluded(self) -> bool:
        """Identifier and unused attributes never reach selection or modelling."""
        return self.kind in ("identifier", "unused")


@dataclass(frozen=True)
class AttributeSchema:
    attributes: tuple[AttributeDescriptor, ...]

    def __post_init__(self):
        ids = [a.id for a in self.attributes]
        if len(set(ids)) != len(ids):
            raise SchemaError("duplicate attribute ids in schema")
        for a in self.attributes:
            if a.kind not in KINDS:
                raise SchemaError(f"attribute {a.id}: unknown kind {a.kind!r}")
            if a.role not in ROLES:
                raise SchemaError(f"attribute {a.id}: unknown role {a.role!r}")
            if not 1 <= a.id <= N_ATTRIBUTES:
                raise SchemaError(f"attribute id {a.id} outside 1..{N_ATTRIBUTES}")

    def __len__(self):
        return len(self.attributes)

    def __iter__(self):
        return iter(self.attributes)

    def __getitem__(self, attribute_id: int) -> AttributeDescriptor:
        return self._by_id[attribute_id]

    def __contains__(self, attribute_id) -> bool:
        return attribute_id in self._by_id

    @cached_property
    def _by_id(self):
        return {a.id: a for a in self.attributes}

    @cached_property
    def _by_name(self):
        return {a.name.lower(): a for a in self.attributes}

    def by_name(self, name: str) -> AttributeDescriptor:
        return self._by_name[name.lower()]

    def symptom_ids(self) -> list[int]:
        return [a.id for a in self.attributes if a.role == "symptom" and not a.excluded]

    def check_full(self) -> None:
        """Raise unless this is a complete 76-attribute schema with one label."""
        if sorted(a.id for a in self.attributes) != list(range(1, N_ATTRIBUTES + 1)):
            raise SchemaError("schema must list attribute ids 1..76 exactly once")
        labels = [a.id for a in self.attributes if a.role == "label"]
        if labels != [LABEL_ID]:
            raise SchemaError(f"attribute {LABEL_ID} must be the only label, got {labels}")


def read_schema(stream: TextIO) -> AttributeSchema:
    """Read ``id<TAB>name<TAB>kind<TAB>role[<TAB>categories]`` lines."""
    attributes = []
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (4, 5):
            raise SchemaError(f"schema line {lineno}: expected 4 or 5 tab-separated fields")
        try:
            attribute_id = int(parts[0])
            categories = ()
            if len(parts) == 5 and parts[4].strip():
                categories = tuple(float(c) for c in parts[4].split(","))
        except ValueError as exc:
            raise SchemaError(f"schema line {lineno}: {exc}") from None
        attributes.append(
            AttributeDescriptor(attribute_id, parts[1].strip(), parts[2].strip(),
                                parts[3].strip(), categories)
        )
    return AttributeSchema(tuple(attributes))


def write_schema(schema: AttributeSchema) -> str:
    lines = []
    for a in schema:
        row = [str(a.id), a.name, a.kind, a.role]
        if a.categories:
            row.append(",".join(_format_number(c) for c in a.categories))
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def _load_packaged_schema(filename: str) -> AttributeSchema:
    with resources.files("cardiopipe.data").joinpath(filename).open("r") as fh:
        return read_schema(fh)


def default_schema() -> AttributeSchema:
    """The full 76-attribute schema, or the file named by CARDIOPIPE_SCHEMA."""
    override = os.environ.get("CARDIOPIPE_SCHEMA")
    if override:
        with open(override) as fh:
            schema = read_schema(fh)
    else:
        schema = _load_packaged_schema("schema76.tsv")
    schema.check_full()
    return schema


def processed_schema() -> AttributeSchema:
    """Column layout of the 14-field processed files."""
    return _load_packaged_schema("schema14.tsv")


# -- records ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PatientRecord:
    patient_id: int
    values: np.ndarray
    source: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (N_ATTRIBUTES,):
            raise ValueError(f"record needs {N_ATTRIBUTES} values, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __getitem__(self, attribute_id: int) -> float:
        return float(self.values[attribute_id - 1])

    def __eq__(self, other):
        if not isinstance(other, PatientRecord):
            return NotImplemented
        return (self.patient_id == other.patient_id and self.source == other.source
                and np.array_equal(self.values, other.values, equal_nan=True))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    schema: AttributeSchema
    records: tuple[PatientRecord, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.name == other.name and self.records == other.records

    __hash__ = None

    @cached_property
    def matrix(self) -> np.ndarray:
        """Records stacked into an (n, 76) array, ``nan`` where missing."""
        if not self.records:
            m = np.empty((0, N_ATTRIBUTES))
        else:
            m = np.vstack([r.values for r in self.records])
        m.setflags(write=False)
        return m

    def column(self, attribute_id: int) -> np.ndarray:
        return self.matrix[:, attribute_id - 1]

    @cached_property
    def labels(self) -> np.ndarray:
        """Integer label per record, -1 where the label cell is missing."""
        col = self.column(LABEL_ID)
        out = np.full(len(col), -1, dtype=int)
        present = ~np.isnan(col)
        out[present] = col[present].astype(int)
        return out

    def subset(self, indices: Iterable[int], name: str | None = None) -> "Dataset":
        return Dataset(name or self.name, self.schema, tuple(self.records[i] for i in indices))


def _parse_number(token: str) -> float:
    value = float(token)
    if value == -9:
        return MISSING
    return value


def _check_pncaden(values, line, source):
    parts = values[4:7]
    if not np.isnan(parts).any() and not np.isnan(values[7]) and parts.sum() != values[7]:
        warnings.warn(
            f"{source}: pncaden={values[7]:g} but painloc+painexer+relrest={parts.sum():g}"
            f" (record ending line {line})",
            PncadenMismatch,
            stacklevel=3,
        )


def _tokens(stream):
    for lineno, line in enumerate(stream, 1):
        if isinstance(line, bytes):
            line = line.decode("ascii", errors="replace")
        for token in line.split():
            yield lineno, token


def parse_raw(stream: TextIO, schema: AttributeSchema | None = None, name: str = "") -> Dataset:
    """Parse a raw 76-attribute file into a Dataset.

    Each record is 75 numbers followed by the terminator ``name``. ``-9``
    becomes missing. Errors report the line and the offset of the token
    within its record (1-based).
    """
    schema = schema or default_schema()
    records = []
    pending = []
    last_line = 0
    for lineno, token in _tokens(stream):
        last_line = lineno
        offset = len(pending) + 1
        if token == TERMINATOR:
            if offset != N_ATTRIBUTES:
                raise TokenCountMismatch(
                    f"record {len(records) + 1} terminated after {len(pending)} values,"
                    f" expected {N_ATTRIBUTES - 1}", line=lineno, offset=offset)
            values = np.array(pending + [MISSING])
            _check_pncaden(values, lineno, name or "raw")
            pid = values[PATIENT_ID - 1]
            records.append(PatientRecord(int(pid) if pid == pid else len(records) + 1,
                                         values, name))
            pending = []
            continue
        if offset == N_ATTRIBUTES:
            raise TokenCountMismatch(
                f"record {len(records) + 1}: expected terminator {TERMINATOR!r}, got {token!r}",
                line=lineno, offset=offset)
        try:
            pending.append(_parse_number(token))
        except ValueError:
            raise NonNumericToken(f"cannot parse {token!r} as a number",
                                  line=lineno, offset=offset) from None
    if pending:
        raise TruncatedRecord(
            f"stream ended inside record {len(records) + 1} after {len(pending)} values",
            line=last_line, offset=len(pending))
    return Dataset(name, schema, tuple(records))


def parse_processed(stream: TextIO, schema_14: AttributeSchema | None = None,
                    name: str = "", schema: AttributeSchema | None = None) -> Dataset:
    """Parse a 14-field processed file into the 76-slot layout.

    ``schema_14`` gives the column order as attribute ids; uncovered slots
    are missing. Patient ids are the 1-based line numbers of the records.
    """
    schema_14 = schema_14 or processed_schema()
    schema = schema or default_schema()
    slots = [a.id - 1 for a in schema_14]
    width = len(slots)
    records = []
    for lineno, line in enumerate(stream, 1):
        if isinstance(line, bytes):
            line = line.decode("ascii", errors="replace")
        line = line.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != width:
            raise FieldCountMismatch(f"expected {width} fields, got {len(fields)}", line=lineno)
        values = np.full(N_ATTRIBUTES, MISSING)
        for pos, (slot, text) in enumerate(zip(slots, fields), 1):
            text = text.strip()
            if text == "?":
                continue
            try:
                values[slot] = float(text)
            except ValueError:
                raise NonNumericToken(f"cannot parse {text!r} as a number",
                                      line=lineno, offset=pos) from None
        records.append(PatientRecord(len(records) + 1, values, name))
    return Dataset(name, schema, tuple(records))


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def serialize_raw(dataset: Dataset, per_line: int = 8) -> str:
    """Write a Dataset back in the raw layout (missing as -9)."""
    out = io.StringIO()
    for record in dataset:
        tokens = ["-9" if np.isnan(v) else _format_number(v) for v in record.values[:-1]]
        tokens.append(TERMINATOR)
        for start in range(0, len(tokens), per_line):
            out.write(" ".join(tokens[start:start + per_line]))
            out.write("\n")
    return out.getvalue()


def dataset_name_for(path) -> str:
    """Canonical dataset name from a UCI file name (e.g. processed.va.data -> long-beach)."""
    stem = Path(path).name.lower()
    for key, canonical in (("cleveland", "cleveland"), ("hungarian", "hungarian"),
                           ("switzerland", "switzerland"), ("long-beach", "long-beach"),
                           ("longbeach", "long-beach"), (".va.", "long-beach"),
                           ("va.data", "long-beach")):
        if key in stem:
            return canonical
    return Path(path).stem


def sniff_format(path) -> str:
    name = Path(path).name.lower()
    if name.startswith("processed") or name.endswith(".csv"):
        return "processed"
    with open(path, "rb") as fh:
        head = fh.read(4096)
    first = head.split(b"\n", 1)[0]
    return "processed" if b"," in first else "raw"


def load(path, fmt: str | None = None, schema: AttributeSchema | None = None,
         name: str | None = None) -> Dataset:
    """Read a dataset file, choosing the parser from ``fmt`` or the file itself."""
    fmt = fmt or sniff_format(path)
    name = name or dataset_name_for(path)
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        if fmt == "raw":
            return parse_raw(fh, schema, name=name)
        if fmt == "processed":
            return parse_processed(fh, name=name, schema=schema)
    raise ValueError(f"unknown format {fmt!r}")


# -- labels ----------------------------------------------------------------

def label_of(record: PatientRecord) -> ClassLabel:
    value = record[LABEL_ID]
    if is_missing(value):
        raise MissingLabel(f"record {record.patient_id} has no label")
    if value != int(value) or not 0 <= value < N_CLASSES:
        raise LabelOutOfRange(f"record {record.patient_id}: label {value!r} outside 0..4")
    return ClassLabel(int(value))


def class_distribution(dataset: Dataset) -> tuple[int, ...]:
    """Record counts per class, Absence first."""
    counts = [0] * N_CLASSES
    for record in dataset:
        counts[label_of(record)] += 1
    return tuple(counts)
