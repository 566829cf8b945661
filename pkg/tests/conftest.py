import os
import sys
from pathlib import Path

import numpy as np
import pytest

from cardiopipe.ingest import LABEL_ID, N_ATTRIBUTES, Dataset, PatientRecord, default_schema

DATA_FILES = {
    "cleveland": "cleveland.data",
    "hungarian": "hungarian.data",
    "switzerland": "switzerland.data",
    "long-beach": "long-beach-va.data",
}


def data_dir() -> Path:
    return Path(os.environ.get("CARDIOPIPE_DATA", Path(__file__).resolve().parents[1] / "data"))


def make_dataset(columns: dict, labels=None, name="t", schema=None) -> Dataset:
    """Dataset whose cells are NaN except the given ``{attribute_id: values}`` columns."""
    schema = schema or default_schema()
    n = len(labels) if labels is not None else len(next(iter(columns.values())))
    m = np.full((n, N_ATTRIBUTES), np.nan)
    for attribute_id, values in columns.items():
        m[:, attribute_id - 1] = np.asarray(values, dtype=float)
    if labels is not None:
        m[:, LABEL_ID - 1] = np.asarray(labels, dtype=float)
    records = tuple(PatientRecord(i + 1, m[i], name) for i in range(n))
    return Dataset(name, schema, records)


@pytest.fixture
def schema():
    return default_schema()


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(module.RESULTS, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
