"""Domain types and ingestion for balanced binary-choice panels.

A panel holds n individuals observed over a common number of periods T,
each observation carrying a p-dimensional covariate vector and a 0/1
outcome. Panels are immutable once constructed; all downstream modules
treat them as shared read-only data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NoInformativeIndividualsError, PanelDataError


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    if out is arr or out.base is arr:
        out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class IndividualSlice:
    """One individual's data: a T x p covariate matrix and a 0/1 outcome vector."""

    covariates: np.ndarray
    outcomes: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.covariates, dtype=np.float64)
        y = np.asarray(self.outcomes)
        if cov.ndim != 2:
            raise PanelDataError("covariates must be a T x p matrix")
        if y.shape != (cov.shape[0],):
            raise PanelDataError("outcomes must have one entry per period")
        if not np.isfinite(cov).all():
            raise PanelDataError("covariates must be finite")
        if not np.isin(y, (0, 1)).all():
            raise PanelDataError("invalid outcome: outcomes must be 0 or 1")
        object.__setattr__(self, "covariates", _frozen(cov))
        object.__setattr__(self, "outcomes", _frozen(y.astype(np.int8)))

    @property
    def T(self) -> int:
        return self.outcomes.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    @property
    def choice_total(self) -> int:
        """Number of periods in which the individual chose 1."""
        return int(self.outcomes.sum())

    @property
    def informative(self) -> bool:
        """True when the outcome sequence is neither all-zero nor all-one."""
        return 0 < self.choice_total < self.T


@dataclass(frozen=True)
class PanelDataset:
    """A validated balanced panel.

    Attributes
    ----------
    ids : (n,) int array of unique individual identifiers.
    periods : (n, T) int array of period labels, strictly increasing per row.
    covariates : (n, T, p) float array.
    outcomes : (n, T) int array with entries in {0, 1}.
    """

    ids: np.ndarray
    periods: np.ndarray
    covariates: np.ndarray
    outcomes: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        per = np.asarray(self.periods, dtype=np.int64)
        cov = np.asarray(self.covariates, dtype=np.float64)
        y = np.asarray(self.outcomes)
        if cov.ndim != 3:
            raise PanelDataError("covariates must have shape (n, T, p)")
        n, T, p = cov.shape
        if n < 1 or T < 1 or p < 1:
            raise PanelDataError("panel dimensions must all be at least 1")
        if ids.shape != (n,) or per.shape != (n, T) or y.shape != (n, T):
            raise PanelDataError("inconsistent array shapes for a panel")
        if len(np.unique(ids)) != n:
            raise PanelDataError("individual identifiers must be unique")
        if T > 1 and not (np.diff(per, axis=1) > 0).all():
            raise PanelDataError(
                "period labels must be distinct and ascending within each individual"
            )
        if not np.isfinite(cov).all():
            raise PanelDataError("covariates must be finite")
        if not np.isin(y, (0, 1)).all():
            raise PanelDataError("invalid outcome: outcomes must be 0 or 1")
        object.__setattr__(self, "ids", _frozen(ids))
        object.__setattr__(self, "periods", _frozen(per))
        object.__setattr__(self, "covariates", _frozen(cov))
        object.__setattr__(self, "outcomes", _frozen(y.astype(np.int8)))

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def T(self) -> int:
        return self.covariates.shape[1]

    @property
    def p(self) -> int:
        return self.covariates.shape[2]

    @property
    def choice_totals(self) -> np.ndarray:
        """(n,) array of per-individual outcome sums."""
        return self.outcomes.sum(axis=1).astype(np.int64)

    @property
    def informative_mask(self) -> np.ndarray:
        k = self.choice_totals
        return (k > 0) & (k < self.T)

    def slice(self, i: int) -> IndividualSlice:
        return IndividualSlice(self.covariates[i], self.outcomes[i])

    def slices(self):
        for i in range(self.n):
            yield self.slice(i)

    @classmethod
    def from_arrays(cls, covariates, outcomes, ids=None, periods=None) -> "PanelDataset":
        """Build a panel from raw (n, T, p) covariates and (n, T) outcomes."""
        cov = np.asarray(covariates, dtype=np.float64)
        if cov.ndim != 3:
            raise PanelDataError("covariates must have shape (n, T, p)")
        n, T, _ = cov.shape
        if ids is None:
            ids = np.arange(1, n + 1, dtype=np.int64)
        if periods is None:
            periods = np.tile(np.arange(1, T + 1, dtype=np.int64), (n, 1))
        return cls(ids=ids, periods=periods, covariates=cov, outcomes=outcomes)


def load_csv(path) -> PanelDataset:
    """Read a panel from a CSV file with header ``id,t,y,x1,...,xp``.

    Rows may appear in any order; they are grouped by ``id`` and sorted by
    ``t`` within each individual. Every individual must have the same number
    of rows and no duplicated ``(id, t)`` pair. Raises
    :class:`~felogit.errors.PanelDataError` with a row/column location on
    parse failures.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PanelDataError(f"{path}: empty file") from None
        header = [c.strip() for c in header]
        p = len(header) - 3
        expected = ["id", "t", "y"] + [f"x{j}" for j in range(1, p + 1)]
        if p < 1 or header != expected:
            raise PanelDataError(
                f"{path}: malformed header {header!r}; expected id,t,y,x1,...,xp"
            )

        groups: dict[int, list[tuple[int, int, np.ndarray]]] = {}
        seen: set[tuple[int, int]] = set()
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise PanelDataError(
                    f"{path}: parse error at row {lineno}: expected "
                    f"{len(header)} fields, found {len(row)}"
                )
            ident = _parse_int(row[0], path, lineno, "id")
            t = _parse_int(row[1], path, lineno, "t")
            yval = _parse_float(row[2], path, lineno, "y")
            if yval not in (0.0, 1.0):
                raise PanelDataError(
                    f"{path}: invalid outcome at row {lineno}: y must be 0 or 1, got {row[2]!r}"
                )
            x = np.empty(p)
            for j in range(p):
                x[j] = _parse_float(row[3 + j], path, lineno, f"x{j + 1}")
            if (ident, t) in seen:
                raise PanelDataError(
                    f"{path}: unbalanced or duplicated panel: duplicate (id,t)=({ident},{t}) at row {lineno}"
                )
            seen.add((ident, t))
            groups.setdefault(ident, []).append((t, int(yval), x))

    if not groups:
        raise PanelDataError(f"{path}: no data rows")
    sizes = {len(rows) for rows in groups.values()}
    if len(sizes) != 1:
        raise PanelDataError(
            f"{path}: unbalanced or duplicated panel: individuals have differing row counts {sorted(sizes)}"
        )
    T = sizes.pop()

    ids = np.array(sorted(groups), dtype=np.int64)
    n = len(ids)
    periods = np.empty((n, T), dtype=np.int64)
    cov = np.empty((n, T, p))
    y = np.empty((n, T), dtype=np.int8)
    for i, ident in enumerate(ids):
        rows = sorted(groups[ident], key=lambda r: r[0])
        for t_idx, (t, yv, x) in enumerate(rows):
            periods[i, t_idx] = t
            y[i, t_idx] = yv
            cov[i, t_idx] = x
    return PanelDataset(ids=ids, periods=periods, covariates=cov, outcomes=y)


def _parse_int(cell: str, path, lineno: int, col: str) -> int:
    try:
        return int(cell.strip())
    except ValueError:
        raise PanelDataError(
            f"{path}: parse error at row {lineno}, column {col!r}: not an integer: {cell!r}"
        ) from None


def _parse_float(cell: str, path, lineno: int, col: str) -> float:
    try:
        val = float(cell.strip())
    except ValueError:
        raise PanelDataError(
            f"{path}: parse error at row {lineno}, column {col!r}: not a number: {cell!r}"
        ) from None
    if not np.isfinite(val):
        raise PanelDataError(
            f"{path}: parse error at row {lineno}, column {col!r}: value is not finite"
        )
    return val


def informative_subset(data: PanelDataset) -> tuple[PanelDataset, int]:
    """Drop individuals whose outcome sequence is constant.

    Individuals with all-zero or all-one outcomes contribute a constant to
    the conditional log-likelihood and nothing to the separation test.
    Returns the sub-panel of informative individuals together with the
    number of dropped individuals. Raises
    :class:`~felogit.errors.NoInformativeIndividualsError` when nothing
    remains.
    """
    mask = data.informative_mask
    dropped = int((~mask).sum())
    if dropped == 0:
        return data, 0
    if not mask.any():
        raise NoInformativeIndividualsError(
            "no informative individuals: CMLE undefined for every beta"
        )
    sub = PanelDataset(
        ids=data.ids[mask],
        periods=data.periods[mask],
        covariates=data.covariates[mask],
        outcomes=data.outcomes[mask],
    )
    return sub, dropped
