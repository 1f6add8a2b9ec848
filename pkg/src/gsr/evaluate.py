"""Numeric evaluation of basis functions and assembly of design matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoding import (
    ARG_SINGLE,
    ARG_SUM,
    BasisPhi,
    BasisPsi,
    MappingTable,
    Transform,
    EncodingError,
    validate_phi,
    validate_psi,
)

# Columns with entries beyond this magnitude are treated like overflow; their
# Gram products would otherwise overflow to inf inside the solver.
MAX_MAGNITUDE = 1e100


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.asarray(self.targets, dtype=float).ravel()
        if x.ndim != 2 or len(x) != len(y) or len(y) < 1:
            raise ValueError("features must be (N, d) and targets length N >= 1")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("dataset entries must be finite")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "targets", y)

    @property
    def n(self) -> int:
        return len(self.targets)

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class DesignBundle:
    X: np.ndarray
    Y: np.ndarray
    A: np.ndarray
    phi_finite: np.ndarray
    psi_finite: np.ndarray

    @property
    def all_finite(self) -> bool:
        return bool(self.phi_finite.all() and self.psi_finite.all())


def apply_transform(t: Transform, a):
    """Apply one transform; never raises on domain errors (returns nan/inf)."""
    out = t(a)
    return float(out) if np.ndim(out) == 0 else out


def _phi_columns(m: BasisPhi, table: MappingTable, x: np.ndarray) -> np.ndarray:
    out = np.ones(len(x))
    with np.errstate(all="ignore"):
        for row in m.rows:
            t = table.transforms[row[0]]
            if t is Transform.ONE:
                continue
            if row[1] == ARG_SINGLE:
                arg = x[:, row[2] - 1]
            elif row[1] == ARG_SUM:
                arg = np.zeros(len(x))
                for v in row[2:]:
                    if v > 0:
                        arg = arg + x[:, v - 1]
            else:
                arg = np.ones(len(x))
                for v in row[2:]:
                    if v > 0:
                        arg = arg * x[:, v - 1]
            out = out * t(arg)
    return out


def eval_phi(m: BasisPhi, table: MappingTable, x) -> np.ndarray | float:
    """Evaluate a phi basis at one point (shape (d,)) or many points (shape (N, d))."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.shape[1] != table.d:
        raise EncodingError(f"points have dimension {pts.shape[1]}, table expects {table.d}")
    reason = validate_phi(m, table)
    if reason is not None:
        raise EncodingError(reason)
    out = _phi_columns(m, table, pts)
    return float(out[0]) if single else out


def eval_psi(m: BasisPsi, table: MappingTable, y) -> np.ndarray | float:
    """Evaluate a psi basis (product of transforms of ``y``)."""
    reason = validate_psi(m, table)
    if reason is not None:
        raise EncodingError(reason)
    y = np.asarray(y, dtype=float)
    out = np.ones_like(y)
    with np.errstate(all="ignore"):
        for c in m.codes:
            t = table.transforms[c]
            if t is not Transform.ONE:
                out = out * t(y)
    return float(out) if out.ndim == 0 else out


def column_ok(col: np.ndarray) -> bool:
    return bool(np.isfinite(col).all() and np.abs(col).max(initial=0.0) <= MAX_MAGNITUDE)


def build_design(ds: Dataset, phis: Sequence[BasisPhi], psis: Sequence[BasisPsi],
                 table_x: MappingTable, table_y: MappingTable) -> DesignBundle:
    """Evaluate every basis on the dataset and stack ``A = [X | -Y]``.

    Non-finite (or overflowing) columns are flagged rather than raised.
    """
    X = np.empty((ds.n, len(phis)))
    Y = np.empty((ds.n, len(psis)))
    for j, m in enumerate(phis):
        X[:, j] = eval_phi(m, table_x, ds.features)
    for j, m in enumerate(psis):
        Y[:, j] = eval_psi(m, table_y, ds.targets)
    phi_ok = np.array([column_ok(X[:, j]) for j in range(X.shape[1])], dtype=bool)
    psi_ok = np.array([column_ok(Y[:, j]) for j in range(Y.shape[1])], dtype=bool)
    return DesignBundle(X, Y, np.hstack([X, -Y]), phi_ok, psi_ok)
