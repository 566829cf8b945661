"""Synthetic records in the raw 76-attribute layout.

Useful for demos and tests when the UCI files are not at hand. A handful of
attributes shift with severity (age, chest pain type, max heart rate, ST
depression, exercise angina, vessel count, thal); the rest are noise,
constants or heavily missing, so every selection path gets exercised.
The numbers are made up and say nothing about real patients.
"""
from __future__ import annotations

import numpy as np

from .ingest import LABEL_ID, N_ATTRIBUTES, Dataset, PatientRecord, default_schema, serialize_raw


def synthetic_dataset(class_counts=(60, 25, 15, 12, 8), seed: int = 0, name: str = "synthetic",
                      missing_rate: float = 0.03) -> Dataset:
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(len(class_counts)), class_counts)
    rng.shuffle(labels)
    n = len(labels)
    schema = default_schema()
    m = np.full((n, N_ATTRIBUTES), np.nan)

    def put(attribute_id, values):
        m[:, attribute_id - 1] = values

    sev = labels.astype(float)
    put(1, np.arange(1, n + 1))
    put(2, 0)
    put(3, np.round(48 + 3 * sev + rng.normal(0, 7, n)))
    put(4, rng.random(n) < 0.55 + 0.08 * sev)
    painloc = rng.random(n) < 0.7
    painexer = rng.random(n) < 0.4 + 0.1 * sev
    relrest = rng.random(n) < 0.5
    put(5, painloc)
    put(6, painexer)
    put(7, relrest)
    put(8, painloc.astype(int) + painexer + relrest)
    put(9, np.where(rng.random(n) < 0.25 + 0.15 * sev, 4, rng.integers(1, 4, n)))
    put(10, np.round(rng.normal(130, 17, n)))
    put(11, rng.random(n) < 0.45)
    put(12, np.round(rng.normal(240, 45, n)))
    put(13, rng.random(n) < 0.5)
    put(14, np.where(rng.random(n) < 0.5, 0, rng.integers(5, 40, n)))
    put(15, np.where(rng.random(n) < 0.5, 0, rng.integers(1, 40, n)))
    put(16, rng.random(n) < 0.15)
    put(17, np.nan)  # never recorded
    put(18, rng.random(n) < 0.4)
    put(19, rng.integers(0, 3, n))
    put(20, rng.integers(1, 13, n))
    put(21, rng.integers(1, 29, n))
    put(22, rng.integers(81, 88, n))
    for attribute_id in (23, 24, 25, 26, 27):
        put(attribute_id, rng.random(n) < 0.2)
    put(28, rng.integers(1, 13, n))
    put(29, np.round(rng.normal(9 - 0.8 * sev, 2, n), 1))
    put(30, np.round(rng.normal(6, 2, n), 1))
    put(31, np.round(rng.normal(9 - 0.5 * sev, 2, n), 1))
    put(32, np.round(165 - 9 * sev + rng.normal(0, 14, n)))
    put(33, np.round(rng.normal(75, 12, n)))
    put(34, np.round(rng.normal(180, 20, n)))
    put(35, np.round(rng.normal(85, 10, n)))
    put(36, np.round(rng.normal(180, 20, n)))
    put(37, np.round(rng.normal(85, 10, n)))
    put(38, rng.random(n) < 0.15 + 0.15 * sev)
    put(39, rng.random(n) < 0.05)
    put(40, np.round(np.clip(rng.normal(0.6 + 0.5 * sev, 0.8, n), 0, None), 1))
    put(41, np.where(rng.random(n) < 0.3 + 0.12 * sev, 2, rng.choice([1, 3], n)))
    put(42, rng.integers(5, 30, n))
    put(43, rng.integers(5, 30, n))
    put(44, np.clip(np.round(sev * 0.7 + rng.normal(0, 0.6, n)), 0, 3))
    put(47, np.where(rng.random(n) < 0.9, np.nan, rng.normal(0.6, 0.1, n)))
    put(49, np.where(rng.random(n) < 0.9, np.nan, rng.normal(0.6, 0.1, n)))
    put(51, np.where(rng.random(n) < 0.3 + 0.15 * sev, 7, np.where(rng.random(n) < 0.1, 6, 3)))
    put(55, rng.integers(1, 13, n))
    put(56, rng.integers(1, 29, n))
    put(57, rng.integers(81, 88, n))
    for attribute_id in range(59, 69):
        put(attribute_id, np.where(sev > 0, rng.integers(1, 3, n), 1))
    for attribute_id in (69, 70, 71, 72, 73):
        put(attribute_id, 1)
    put(74, np.nan)
    put(75, 0)

    holes = rng.random((n, N_ATTRIBUTES)) < missing_rate
    for protected in (1, 2, LABEL_ID, 5, 6, 7, 8, N_ATTRIBUTES):
        holes[:, protected - 1] = False
    m[holes] = np.nan
    put(LABEL_ID, labels)
    m[:, N_ATTRIBUTES - 1] = np.nan  # the "name" terminator slot

    records = tuple(PatientRecord(i + 1, m[i], name) for i in range(n))
    return Dataset(name, schema, records)


def synthetic_raw_text(class_counts=(60, 25, 15, 12, 8), seed: int = 0, **kwargs) -> str:
    return serialize_raw(synthetic_dataset(class_counts, seed, **kwargs))
