"""Datasets, preprocessing, and splitting a clear dataset among parties.

Every partition scheme produces party inputs whose fixed-point sum is the
encoded dataset exactly; party files store the raw signed ring integers so
a reassembly is bit-exact too.
"""
from __future__ import annotations

import configparser
import csv
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .ring import FixedPointCodec, RingTensor, stack as ring_stack
from .sharing import Shared, split_ring

SCHEMES = ("horizontal", "vertical", "additive_random")
AGE_EDGES = (20.0, 40.0, 60.0)


class DataError(ValueError):
    """Malformed or unusable input data."""


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    column_names: list
    categorical: dict = field(default_factory=dict)  # name -> array of level strings, not yet expanded

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise DataError(f"X {self.X.shape} and y {self.y.shape} disagree")
        if len(self.column_names) != self.X.shape[1]:
            raise DataError("column_names must name every column of X")
        if not np.all(np.isin(self.y, (0.0, 1.0))):
            raise DataError("target must be strictly binary (0/1)")
        if not np.all(np.isfinite(self.X)):
            raise DataError("X contains missing or non-finite values")
        if self.X.shape[0] < self.X.shape[1]:
            warnings.warn(f"fewer cases ({self.X.shape[0]}) than columns ({self.X.shape[1]})")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]


@dataclass
class PartyInput:
    """Party j's additive part (X_j, y_j) of the joint data, in fixed point."""

    party_id: int
    X: RingTensor
    y: RingTensor

    @property
    def codec(self):
        return self.X.codec

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]


# -- loading -----------------------------------------------------------------

def load_csv(path, schema: dict, expand=True) -> Dataset:
    """Parse a CSV whose columns are typed by ``schema``.

    ``schema`` maps column name to one of ``numeric``, ``categorical`` or
    ``target`` (exactly one target).  Columns not in the schema are ignored.
    An intercept column of ones is prepended.  With ``expand`` categorical
    columns are turned into indicators straight away.
    """
    targets = [c for c, t in schema.items() if t == "target"]
    if len(targets) != 1:
        raise DataError("schema must declare exactly one target column")
    bad = {t for t in schema.values()} - {"numeric", "categorical", "target"}
    if bad:
        raise DataError(f"unknown column types {sorted(bad)}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        missing_cols = [c for c in schema if c not in header]
        if missing_cols:
            raise DataError(f"{path}: columns not found: {missing_cols}")
        pos = {c: header.index(c) for c in schema}
        cols = {c: [] for c in schema}
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not v.strip() for v in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: row {rowno} has {len(row)} fields, expected {len(header)}")
            for c in schema:
                cols[c].append((rowno, row[pos[c]].strip()))

    def cell_error(c, rowno, msg):
        return DataError(f"{path}: row {rowno}, column '{c}': {msg}")

    numeric, categorical = {}, {}
    for c, kind in schema.items():
        values = []
        for rowno, raw in cols[c]:
            if raw == "" or raw.upper() in ("NA", "NAN", "NULL"):
                raise cell_error(c, rowno, "missing value (impute before loading)")
            if kind == "categorical":
                values.append(raw)
                continue
            try:
                v = float(raw)
            except ValueError:
                raise cell_error(c, rowno, f"cannot parse {raw!r} as a number") from None
            if kind == "target" and v not in (0.0, 1.0):
                raise cell_error(c, rowno, f"target must be 0 or 1, got {raw!r}")
            values.append(v)
        if kind == "categorical":
            categorical[c] = np.array(values, dtype=object)
        else:
            numeric[c] = np.array(values, dtype=float)

    y = numeric.pop(targets[0])
    names = ["intercept"] + list(numeric)
    X = np.column_stack([np.ones(len(y))] + [numeric[c] for c in numeric]) if numeric else np.ones((len(y), 1))
    ds = Dataset(X, y, names, categorical)
    if expand and categorical:
        ds = expand_categoricals(ds, list(categorical))
    return ds


def expand_categoricals(ds: Dataset, columns) -> Dataset:
    """Replace each M-level column by M-1 indicators (first sorted level is the reference)."""
    X, names, pending = ds.X, list(ds.column_names), dict(ds.categorical)
    for c in columns:
        if c in pending:
            values = pending.pop(c)
        elif c in names:
            j = names.index(c)
            values = X[:, j]
            X = np.delete(X, j, axis=1)
            names.pop(j)
        else:
            raise DataError(f"no column named {c!r}")
        levels = sorted(set(values.tolist()))
        if len(levels) < 2:
            raise DataError(f"column {c!r} has a single level; nothing to contrast")
        ind = np.column_stack([(values == lev).astype(float) for lev in levels[1:]])
        X = np.column_stack([X, ind])
        names += [f"{c}={lev}" for lev in levels[1:]]
    return Dataset(X, ds.y, names, pending)


def age_bin(age) -> np.ndarray:
    """1-based bin index: [0,20) -> 1, [20,40) -> 2, [40,60) -> 3, [60, inf) -> 4."""
    age = np.asarray(age, dtype=float)
    if np.any(age < 0):
        raise DataError("negative ages are not valid")
    return np.searchsorted(AGE_EDGES, age, side="right") + 1


def bin_ages(ds: Dataset, column: str, drop_first=False) -> Dataset:
    """Replace a numeric age column by indicators of the four 20-year bins.

    With an intercept in the model use ``drop_first`` so the bins are not
    collinear with it.
    """
    if column not in ds.column_names:
        raise DataError(f"no column named {column!r}")
    j = ds.column_names.index(column)
    bins = age_bin(ds.X[:, j])
    X = np.delete(ds.X, j, axis=1)
    names = [n for i, n in enumerate(ds.column_names) if i != j]
    first = 2 if drop_first else 1
    for b in range(first, 5):
        X = np.column_stack([X, (bins == b).astype(float)])
        names.append(f"{column}_bin{b}")
    return Dataset(X, ds.y, names, dict(ds.categorical))


# -- partitioning --------------------------------------------------------------

def _blocks(total, P):
    return [b for b in np.array_split(np.arange(total), P)]


def partition(ds: Dataset, scheme: str, P: int, rng=None, codec: FixedPointCodec | None = None):
    """Split ``ds`` into P party inputs whose fixed-point sum is the dataset."""
    codec = codec or FixedPointCodec()
    if P < 2:
        raise DataError("need at least two parties")
    if ds.categorical:
        raise DataError(f"expand categorical columns first: {sorted(ds.categorical)}")
    X, y = codec.encode(ds.X), codec.encode(ds.y)
    n, d = ds.X.shape
    if scheme == "horizontal":
        if n < P:
            raise DataError(f"cannot give {P} parties a row each from {n} rows")
        out = []
        for j, rows in enumerate(_blocks(n, P)):
            Xj, yj = codec.zeros((n, d)), codec.zeros(n)
            Xj.data[rows] = X.data[rows]
            yj.data[rows] = y.data[rows]
            out.append(PartyInput(j, Xj, yj))
        return out
    if scheme == "vertical":
        if d < P:
            raise DataError(f"vertical split needs at least {P} columns, have {d}")
        out = []
        for j, cols in enumerate(_blocks(d, P)):
            Xj = codec.zeros((n, d))
            Xj.data[:, cols] = X.data[:, cols]
            yj = y.copy() if j == 0 else codec.zeros(n)
            out.append(PartyInput(j, Xj, yj))
        return out
    if scheme == "additive_random":
        rng = rng if rng is not None else np.random.default_rng()
        Xs, ys = split_ring(X, P, rng), split_ring(y, P, rng)
        return [PartyInput(j, Xs.stack[j].copy(), ys.stack[j].copy()) for j in range(P)]
    raise DataError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


def stack_inputs(inputs) -> tuple:
    """Shared (X, y) from a list of party inputs."""
    inputs = sorted(inputs, key=lambda p: p.party_id)
    if [p.party_id for p in inputs] != list(range(len(inputs))):
        raise DataError("party ids must be 0..P-1")
    shapes = {(p.X.shape, p.y.shape) for p in inputs}
    if len(shapes) != 1:
        raise DataError(f"party inputs disagree on shape: {shapes}")
    if len({p.codec for p in inputs}) != 1:
        raise DataError("party inputs disagree on codec")
    return Shared(ring_stack([p.X for p in inputs])), Shared(ring_stack([p.y for p in inputs]))


def combine(inputs) -> Dataset:
    """Clear reassembly of the joint dataset (oracle and trace use only)."""
    Xs, ys = stack_inputs(inputs)
    X = Xs.stack.sum(axis=0).decode()
    y = ys.stack.sum(axis=0).decode()
    return Dataset(X, np.rint(y), [f"x{i}" for i in range(X.shape[1])])


# -- party files -----------------------------------------------------------------

def write_party_files(inputs, outdir, scheme, seed, column_names=None):
    """One CSV of signed ring integers per party plus ``manifest.ini``."""
    os.makedirs(outdir, exist_ok=True)
    codec = inputs[0].codec
    d = inputs[0].d
    names = list(column_names) if column_names else [f"x{i}" for i in range(d)]
    paths = []
    for p in inputs:
        path = os.path.join(outdir, f"party_{p.party_id}.csv")
        Xi = p.X.to_signed_ints()
        yi = p.y.to_signed_ints()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names + ["y"])
            for r in range(p.n):
                w.writerow([str(v) for v in Xi[r]] + [str(yi[r])])
        paths.append(path)
    man = configparser.ConfigParser()
    man["partition"] = {"scheme": scheme, "seed": str(seed), "parties": str(len(inputs)),
                        "n": str(inputs[0].n), "d": str(d), "columns": ",".join(names)}
    man["codec"] = {"modulus_bits": str(codec.modulus_bits), "frac_bits": str(codec.frac_bits)}
    with open(os.path.join(outdir, "manifest.ini"), "w") as fh:
        man.write(fh)
    return paths


def read_party_files(outdir):
    """Inverse of :func:`write_party_files`; returns (inputs, manifest dict)."""
    man_path = os.path.join(outdir, "manifest.ini")
    if not os.path.exists(man_path):
        raise DataError(f"{outdir}: manifest.ini not found")
    man = configparser.ConfigParser()
    man.read(man_path)
    try:
        codec = FixedPointCodec(man.getint("codec", "modulus_bits"), man.getint("codec", "frac_bits"))
        P = man.getint("partition", "parties")
        n, d = man.getint("partition", "n"), man.getint("partition", "d")
    except (configparser.Error, ValueError) as exc:
        raise DataError(f"{man_path}: invalid manifest ({exc})") from None
    inputs = []
    for j in range(P):
        path = os.path.join(outdir, f"party_{j}.csv")
        if not os.path.exists(path):
            raise DataError(f"{path}: missing party file")
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        body = rows[1:]
        if len(body) != n or any(len(r) != d + 1 for r in body):
            raise DataError(f"{path}: expected {n} rows of {d + 1} fields")
        try:
            ints = [[int(v) for v in r] for r in body]
        except ValueError as exc:
            raise DataError(f"{path}: non-integer cell ({exc})") from None
        X = codec.from_ints([r[:d] for r in ints])
        y = codec.from_ints([r[d] for r in ints])
        inputs.append(PartyInput(j, X, y))
    info = dict(man["partition"])
    info.update(modulus_bits=codec.modulus_bits, frac_bits=codec.frac_bits)
    return inputs, info
