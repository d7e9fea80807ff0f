"""Tabular ingestion, cleaning pipeline, and stratified splitting.

Datasets are pandas DataFrames wrapped with a label-column designation
and optional passthrough columns (kept verbatim, never treated as
features). All transforms return new datasets; nothing mutates in place.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .exceptions import ConfigError, InsufficientDataError, ParseError

_NA_STRINGS = {"", "na", "n/a", "nan", "null", "none", "missing", "?"}
_INF_STRINGS = {"inf", "+inf", "-inf", "infinity", "+infinity", "-infinity"}


@dataclass(frozen=True)
class TabularDataset:
    df: pd.DataFrame
    label_column: str | None = None
    passthrough: tuple[str, ...] = ()

    def __post_init__(self):
        if self.label_column is not None and self.label_column not in self.df.columns:
            raise ConfigError(f"label column {self.label_column!r} not in dataset")
        for col in self.passthrough:
            if col not in self.df.columns:
                raise ConfigError(f"passthrough column {col!r} not in dataset")

    @property
    def feature_columns(self) -> tuple[str, ...]:
        skip = set(self.passthrough)
        if self.label_column is not None:
            skip.add(self.label_column)
        return tuple(c for c in self.df.columns if c not in skip)

    @property
    def num_rows(self) -> int:
        return len(self.df)

    def features(self) -> np.ndarray:
        return self.df[list(self.feature_columns)].to_numpy(dtype=np.float64)

    def labels(self) -> np.ndarray:
        if self.label_column is None:
            raise ConfigError("dataset has no label column")
        return self.df[self.label_column].to_numpy()

    def class_counts(self) -> dict:
        labels = self.labels()
        values, counts = np.unique(labels, return_counts=True)
        return {v: int(c) for v, c in zip(values, counts)}

    def with_df(self, df: pd.DataFrame) -> "TabularDataset":
        return replace(self, df=df)


@dataclass(frozen=True)
class PreprocessReport:
    rows_dropped_nan: int = 0
    rows_dropped_inf: int = 0
    features_dropped_corr: tuple[str, ...] = ()
    features_dropped_zerovar: tuple[str, ...] = ()
    duplicates_removed: int = 0
    final_rows: int = 0

    def to_dict(self) -> dict:
        return {
            "rows_dropped_nan": self.rows_dropped_nan,
            "rows_dropped_inf": self.rows_dropped_inf,
            "features_dropped_corr": list(self.features_dropped_corr),
            "features_dropped_zerovar": list(self.features_dropped_zerovar),
            "duplicates_removed": self.duplicates_removed,
            "final_rows": self.final_rows,
        }


def load_csv(
    path,
    label_column: str | None = None,
    passthrough: tuple[str, ...] = (),
) -> TabularDataset:
    """Load a flow-record style CSV with a header row.

    Non-label, non-passthrough columns must parse as numbers; "Infinity"
    style cells become inf markers for clean(). Unparseable cells raise
    :class:`ParseError` with row and column context.
    """
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ConfigError(f"{path}: empty file or missing header") from None
    if len(df.columns) == 0:
        raise ConfigError(f"{path}: missing header row")
    if all(_parses_as_number(c) for c in df.columns):
        raise ConfigError(
            f"{path}: header row looks numeric; a header with column names is required"
        )

    keep_raw = set(passthrough)
    if label_column is not None:
        keep_raw.add(label_column)

    out = {}
    failures = []
    for col in df.columns:
        raw = df[col]
        if col in keep_raw:
            out[col] = raw
            continue
        lowered = raw.str.strip().str.lower()
        numeric = pd.to_numeric(raw.str.strip(), errors="coerce")
        numeric = numeric.mask(lowered.isin(_NA_STRINGS), np.nan)
        bad = numeric.isna() & ~lowered.isin(_NA_STRINGS) & ~lowered.isin(_INF_STRINGS)
        if bad.any():
            for row_idx in np.nonzero(bad.to_numpy())[0][:20]:
                failures.append((int(row_idx), col, raw.iloc[row_idx]))
            continue
        inf_mask = lowered.isin(_INF_STRINGS)
        if inf_mask.any():
            sign = np.where(lowered.str.startswith("-"), -np.inf, np.inf)
            numeric = numeric.mask(inf_mask, pd.Series(sign, index=raw.index))
        out[col] = numeric.astype(np.float64)
    if failures:
        raise ParseError(failures)

    return TabularDataset(
        df=pd.DataFrame(out, columns=list(df.columns)),
        label_column=label_column,
        passthrough=tuple(passthrough),
    )


def _parses_as_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def save_csv(ds: TabularDataset, path) -> None:
    ds.df.to_csv(path, index=False)


def clean(ds: TabularDataset) -> tuple[TabularDataset, PreprocessReport]:
    """Drop rows containing NaN, then rows containing infinities."""
    feats = ds.df[list(ds.feature_columns)]
    has_nan = feats.isna().any(axis=1).to_numpy()
    if ds.label_column is not None:
        has_nan |= ds.df[ds.label_column].isna().to_numpy()
    has_inf = np.isinf(feats.to_numpy(dtype=np.float64)).any(axis=1) & ~has_nan
    kept = ds.df[~(has_nan | has_inf)].reset_index(drop=True)
    report = PreprocessReport(
        rows_dropped_nan=int(has_nan.sum()),
        rows_dropped_inf=int(has_inf.sum()),
        final_rows=len(kept),
    )
    return ds.with_df(kept), report


def prune_features(
    ds: TabularDataset, corr_threshold: float = 0.9
) -> tuple[TabularDataset, PreprocessReport]:
    """Drop the later of each highly correlated feature pair, then every
    zero-variance feature. Deterministic in column order."""
    if ds.num_rows < 2:
        raise InsufficientDataError("need at least 2 rows to estimate correlations")
    cols = list(ds.feature_columns)
    values = ds.df[cols].to_numpy(dtype=np.float64)
    std = values.std(axis=0, ddof=0)
    zerovar = [c for c, s in zip(cols, std) if s == 0.0]

    live = [c for c, s in zip(cols, std) if s > 0.0]
    dropped_corr: list[str] = []
    if len(live) >= 2:
        corr = np.corrcoef(ds.df[live].to_numpy(dtype=np.float64), rowvar=False)
        removed = set()
        for i in range(len(live)):
            if live[i] in removed:
                continue
            for j in range(i + 1, len(live)):
                if live[j] in removed:
                    continue
                if abs(corr[i, j]) >= corr_threshold:
                    removed.add(live[j])
                    dropped_corr.append(live[j])

    drop = set(dropped_corr) | set(zerovar)
    kept_cols = [c for c in ds.df.columns if c not in drop]
    out = ds.with_df(ds.df[kept_cols])
    report = PreprocessReport(
        features_dropped_corr=tuple(dropped_corr),
        features_dropped_zerovar=tuple(zerovar),
        final_rows=out.num_rows,
    )
    return out, report


def dedup(ds: TabularDataset) -> tuple[TabularDataset, int]:
    """Remove exact duplicate rows, keeping first occurrences in order."""
    before = ds.num_rows
    kept = ds.df.drop_duplicates(keep="first").reset_index(drop=True)
    return ds.with_df(kept), before - len(kept)


def preprocess(
    ds: TabularDataset, corr_threshold: float = 0.9
) -> tuple[TabularDataset, PreprocessReport]:
    """Full cleaning pipeline: clean, prune features, dedup."""
    ds1, r1 = clean(ds)
    ds2, r2 = prune_features(ds1, corr_threshold)
    ds3, removed = dedup(ds2)
    return ds3, PreprocessReport(
        rows_dropped_nan=r1.rows_dropped_nan,
        rows_dropped_inf=r1.rows_dropped_inf,
        features_dropped_corr=r2.features_dropped_corr,
        features_dropped_zerovar=r2.features_dropped_zerovar,
        duplicates_removed=removed,
        final_rows=ds3.num_rows,
    )


def stratified_split_counts(class_counts: dict, train_fraction: float) -> dict:
    """Per-class training-row counts under the rounding rule used by split."""
    if not 0 < train_fraction < 1:
        raise ConfigError("train_fraction must be in (0, 1)")
    return {label: int(round(train_fraction * n)) for label, n in class_counts.items()}


def split(
    ds: TabularDataset, train_fraction: float = 0.7, seed: int = 0
) -> tuple[TabularDataset, TabularDataset]:
    """Seeded stratified split; per-class counts are within one row of the
    fraction. Output row order follows the input."""
    if not 0 < train_fraction < 1:
        raise ConfigError("train_fraction must be in (0, 1)")
    if ds.label_column is None:
        raise ConfigError("split requires a label column")
    rng = np.random.default_rng(seed)
    labels = ds.labels()
    train_mask = np.zeros(ds.num_rows, dtype=bool)
    for label in pd.unique(labels):
        idx = np.nonzero(labels == label)[0]
        n_train = int(round(train_fraction * idx.size))
        chosen = rng.permutation(idx)[:n_train]
        train_mask[chosen] = True
    train = ds.with_df(ds.df[train_mask].reset_index(drop=True))
    test = ds.with_df(ds.df[~train_mask].reset_index(drop=True))
    return train, test
