"""
Dataset of precomputed feature vectors with multi-hot labels.

CSV format (UTF-8, '.' decimal separator):
    f0,...,f{d-1},y0,...,y{C-1},split
    0.12,-0.5,...,1,0,...,train

split is one of train, query, db. Every row carries at least one label.
"""

import csv
import io
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Tuple

import numpy as np

from ..errors import ConfigurationError, ParseError

logger = logging.getLogger(__name__)


class Split(Enum):
    TRAIN = 'train'
    QUERY = 'query'
    DATABASE = 'db'


@dataclass
class Dataset:
    """Features (n, d), binary labels (n, C) and one split tag per sample."""

    features: np.ndarray
    labels: np.ndarray
    splits: List[Split]

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        self.splits = [Split(s) if not isinstance(s, Split) else s for s in self.splits]
        n = self.features.shape[0]
        if self.features.ndim != 2 or self.labels.ndim != 2:
            raise ConfigurationError("Features and labels must be 2-D")
        if self.labels.shape[0] != n or len(self.splits) != n:
            raise ConfigurationError(
                f"Row counts differ: {n} features, {self.labels.shape[0]} labels, {len(self.splits)} splits")
        if not np.all(np.isfinite(self.features)):
            raise ConfigurationError("Features must be finite")
        if n and np.any(self.labels.sum(axis=1) == 0):
            raise ConfigurationError("Every sample needs at least one label")

    @property
    def size(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def num_classes(self) -> int:
        return self.labels.shape[1]

    def subset(self, indices) -> Tuple[np.ndarray, np.ndarray]:
        """Features and labels for the given row indices."""
        indices = np.asarray(indices, dtype=np.int64)
        return self.features[indices], self.labels[indices]

    def equals(self, other: 'Dataset') -> bool:
        return (np.array_equal(self.features, other.features)
                and np.array_equal(self.labels, other.labels)
                and self.splits == other.splits)


def split_indices(dataset: Dataset) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Row indices of the train, query and database splits.

    Returns:
        Tuple (train, query, db) of ascending index arrays

    Raises:
        ConfigurationError: if the train or query split is empty
    """
    tags = np.array([s.value for s in dataset.splits])
    train = np.flatnonzero(tags == Split.TRAIN.value)
    query = np.flatnonzero(tags == Split.QUERY.value)
    db = np.flatnonzero(tags == Split.DATABASE.value)
    if len(train) == 0:
        raise ConfigurationError("Dataset has no train samples")
    if len(query) == 0:
        raise ConfigurationError("Dataset has no query samples")
    return train, query, db


def _parse_header(header: List[str]) -> Tuple[int, int]:
    if not header or header[-1].strip() != 'split':
        raise ParseError("header must end with 'split'", 1)
    names = [h.strip() for h in header[:-1]]
    d = sum(1 for h in names if h.startswith('f'))
    c = sum(1 for h in names if h.startswith('y'))
    expected = [f"f{i}" for i in range(d)] + [f"y{i}" for i in range(c)]
    if names != expected or d == 0 or c == 0:
        raise ParseError("header must be f0..f{d-1},y0..y{C-1},split", 1)
    return d, c


def _read_utf8(path) -> str:
    raw = Path(path).read_bytes()
    try:
        return raw.decode('utf-8')
    except UnicodeDecodeError as e:
        raise ParseError(f"not valid UTF-8 at byte {e.start}", raw[:e.start].count(b'\n') + 1)


def load_csv(path) -> Dataset:
    """
    Parse a dataset CSV file.

    Args:
        path: File path

    Returns:
        Dataset with row order preserved

    Raises:
        ParseError: invalid UTF-8, ragged rows, non-binary or empty labels, bad floats or split tags
    """
    features, labels, splits = [], [], []
    text = _read_utf8(path)
    with io.StringIO(text, newline='') as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1)
        d, c = _parse_header(header)

        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + c + 1:
                raise ParseError(f"expected {d + c + 1} fields, got {len(row)}", line_number)
            try:
                x = [float(v) for v in row[:d]]
            except ValueError as e:
                raise ParseError(f"bad feature value: {e}", line_number)
            if not all(np.isfinite(x)):
                raise ParseError("non-finite feature value", line_number)
            y_raw = [v.strip() for v in row[d:d + c]]
            if any(v not in ('0', '1') for v in y_raw):
                raise ParseError("labels must be 0 or 1", line_number)
            y = [int(v) for v in y_raw]
            if sum(y) == 0:
                raise ParseError("row has no label", line_number)
            tag = row[-1].strip()
            try:
                split = Split(tag)
            except ValueError:
                raise ParseError(f"unknown split {tag!r} (valid: train, query, db)", line_number)
            features.append(x)
            labels.append(y)
            splits.append(split)

    logger.info("Loaded %d samples (d=%d, C=%d) from %s", len(features), d, c, path)
    return Dataset(np.array(features, dtype=np.float64).reshape(-1, d),
                   np.array(labels, dtype=np.int8).reshape(-1, c), splits)


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset in the load_csv format; floats use round-trip repr."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    header = ([f"f{i}" for i in range(dataset.dim)]
              + [f"y{i}" for i in range(dataset.num_classes)] + ['split'])
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for x, y, s in zip(dataset.features, dataset.labels, dataset.splits):
            writer.writerow([repr(float(v)) for v in x] + [str(int(v)) for v in y] + [s.value])
