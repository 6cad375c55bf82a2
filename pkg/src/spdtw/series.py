"""Time series containers, UCR text ingestion and z-normalization."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateSeriesError,
    DimensionError,
    EmptyInputError,
    FormatError,
    ParseError,
)

__all__ = [
    "TimeSeries",
    "Dataset",
    "load_ucr",
    "save_ucr",
    "znormalize",
    "znormalize_dataset",
    "is_znormalized",
    "resolve_dataset",
    "DATA_ENV_VAR",
]

DATA_ENV_VAR = "ELASTIC_SPARSE_DATA"


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """A labeled, uniformly sampled, real-valued sequence.

    ``np.asarray(ts)`` yields the sample values, so a ``TimeSeries`` can be
    passed anywhere an array is expected.
    """

    values: np.ndarray
    label: Optional[int] = None

    def __post_init__(self):
        arr = _frozen(self.values)
        if arr.ndim != 1 or arr.size < 1:
            raise DimensionError("a time series must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(arr)):
            raise FormatError("time series values must be finite")
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True)
class Dataset:
    """An immutable collection of equal-length time series."""

    items: tuple
    name: str = ""
    _X: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        items = tuple(self.items)
        if not items:
            raise EmptyInputError("a dataset needs at least one series")
        length = len(items[0])
        for i, ts in enumerate(items):
            if len(ts) != length:
                raise DimensionError(
                    f"series {i} has length {len(ts)}, expected {length}"
                )
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "_X", _frozen(np.stack([ts.values for ts in items])))

    @classmethod
    def from_arrays(cls, X, y=None, name: str = "") -> "Dataset":
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        labels = [None] * len(X) if y is None else [int(v) for v in y]
        return cls(tuple(TimeSeries(row, lab) for row, lab in zip(X, labels)), name=name)

    @property
    def X(self) -> np.ndarray:
        """Read-only ``(N, T)`` array of sample values."""
        return self._X

    @property
    def y(self) -> np.ndarray:
        return np.array([-1 if ts.label is None else ts.label for ts in self.items])

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def length(self) -> int:
        return self._X.shape[1]

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return self.items[i]

    def __iter__(self):
        return iter(self.items)

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return Dataset(tuple(self.items[i] for i in indices), name=self.name)


def _detect_delimiter(line: str) -> Optional[str]:
    if "," in line:
        return ","
    if "\t" in line:
        return "\t"
    return None  # runs of whitespace (pre-2018 UCR layout)


def _parse_float(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"line {lineno}: cannot parse {token!r} as a number") from None


def load_ucr(path, delimiter: Optional[str] = None, name: str = "") -> Dataset:
    """Read a UCR-format text file.

    Each non-blank line is ``label<delim>v1<delim>...<delim>vT``. Labels are
    truncated toward zero when written as reals (``1.0000000e+00`` -> 1).

    Parameters
    ----------
    path : str or Path
        File to read.
    delimiter : str, optional
        Field separator. When omitted it is detected from the first line:
        comma, then tab, otherwise any run of whitespace.
    name : str, optional
        Dataset name; defaults to the file stem without the split suffix.

    Returns
    -------
    Dataset

    Raises
    ------
    EmptyInputError
        The file contains no data lines.
    FormatError
        Rows have differing lengths, or a row holds no values.
    ParseError
        A token is not numeric.
    """
    path = Path(path)
    with open(path) as fh:
        lines = [(no, ln.strip()) for no, ln in enumerate(fh, start=1)]
    lines = [(no, ln) for no, ln in lines if ln]
    if not lines:
        raise EmptyInputError(f"{path}: empty file")
    if delimiter is None:
        delimiter = _detect_delimiter(lines[0][1])
    rows = []
    labels = []
    length = None
    for lineno, line in lines:
        tokens = line.split(delimiter) if delimiter is not None else line.split()
        tokens = [t.strip() for t in tokens]
        if len(tokens) < 2:
            raise FormatError(f"{path}: line {lineno} has a label but no values")
        label = _parse_float(tokens[0], lineno)
        if not math.isfinite(label):
            raise ParseError(f"{path}: line {lineno}: non-finite label")
        values = [_parse_float(t, lineno) for t in tokens[1:]]
        if length is None:
            length = len(values)
        elif len(values) != length:
            raise FormatError(
                f"{path}: line {lineno} has {len(values)} values, expected {length}"
            )
        if not all(math.isfinite(v) for v in values):
            raise ParseError(f"{path}: line {lineno}: non-finite value")
        labels.append(int(label))
        rows.append(values)
    if not name:
        name = path.name.rsplit("_", 1)[0] if "_" in path.name else path.stem
    return Dataset.from_arrays(np.array(rows), labels, name=name)


def save_ucr(dataset: Dataset, path, delimiter: str = ",") -> None:
    """Write ``dataset`` in UCR text format, values at full ``repr`` precision."""
    with open(path, "w") as fh:
        for ts in dataset:
            label = "0" if ts.label is None else str(ts.label)
            fh.write(delimiter.join([label, *(repr(float(v)) for v in ts.values)]))
            fh.write("\n")


def znormalize(x):
    """Return ``x`` shifted to mean 0 and scaled to population std 1.

    Accepts a :class:`TimeSeries` (label is kept) or a plain array.

    Raises
    ------
    DimensionError
        Fewer than two samples.
    DegenerateSeriesError
        The series is constant.
    """
    values = np.asarray(x, dtype=np.float64)
    if values.ndim != 1 or values.size < 2:
        raise DimensionError("z-normalization needs at least two samples")
    mu = values.mean()
    sigma = values.std()  # population convention: divide by T
    if sigma == 0.0 or not np.isfinite(sigma):
        raise DegenerateSeriesError("cannot z-normalize a constant series")
    out = (values - mu) / sigma
    if isinstance(x, TimeSeries):
        return TimeSeries(out, x.label)
    return out


def znormalize_dataset(dataset: Dataset) -> Dataset:
    return Dataset(tuple(znormalize(ts) for ts in dataset), name=dataset.name)


def is_znormalized(x, atol: float = 1e-3) -> bool:
    """True when ``x`` has mean 0 and unit standard deviation within ``atol``.

    Either the population or the sample (``T - 1``) convention is accepted;
    archive files use the latter.
    """
    values = np.asarray(x, dtype=np.float64)
    if abs(values.mean()) > atol:
        return False
    ddofs = (0, 1) if values.size > 1 else (0,)
    return any(abs(values.std(ddof=d) - 1.0) <= atol for d in ddofs)


def resolve_dataset(name: str, root=None) -> tuple:
    """Locate ``<name>_TRAIN`` and ``<name>_TEST`` under a dataset root.

    The root defaults to ``$ELASTIC_SPARSE_DATA`` and then to the ``data/ucr``
    directory of a source checkout. Both ``root/<name>/<name>_TRAIN`` and
    ``root/<name>_TRAIN`` layouts are accepted.
    """
    candidates: Sequence[Path]
    if root is not None:
        candidates = [Path(root)]
    else:
        candidates = []
        if os.environ.get(DATA_ENV_VAR):
            candidates.append(Path(os.environ[DATA_ENV_VAR]))
        candidates.append(Path(__file__).resolve().parents[2] / "data" / "ucr")
    for base in candidates:
        for folder in (base / name, base):
            train, test = folder / f"{name}_TRAIN", folder / f"{name}_TEST"
            if train.is_file():
                return train, test
    raise FileNotFoundError(
        f"dataset {name!r} not found under {', '.join(map(str, candidates))}"
    )
