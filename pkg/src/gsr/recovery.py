"""Prediction from fitted relations, equivalence checking and run metrics.

A fitted relation ``g(y) = f(x)`` predicts ``y`` at a new point by solving
``g(y) = f(x*)``: in closed form when ``g`` is one invertible transform,
otherwise by bracketing and refining roots of ``h(y) = g(y) - f(x*)``.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .admm import refit_support
from .benchmarks import BenchmarkSpec, make_rng
from .encoding import BasisPhi, BasisPsi, MappingTable, Transform
from .evaluate import Dataset, _phi_columns, eval_psi
from .expression import format_relation

FAIL_PENALTY = 1e6
EXACT_RTOL = 1e-6
GRID_POINTS = 1000
ROOT_ACCEPT = 1e-6

# closed-form inverses: value v -> candidate roots (may be nan)
_INVERSES = {
    Transform.IDENTITY: lambda v: [v],
    Transform.LN: lambda v: [np.exp(v)],
    Transform.EXP: lambda v: [np.log(v)],
    Transform.RECIPROCAL: lambda v: [1.0 / v],
    Transform.SQUARE: lambda v: [np.sqrt(v), -np.sqrt(v)],
    Transform.CUBE: lambda v: [np.cbrt(v)],
    Transform.SQRT: lambda v: [np.where(v >= 0, v * v, np.nan)],
    Transform.NEG_EXP: lambda v: [-np.log(v)],
}


class PredictionFailure(ArithmeticError):
    """No root of ``g(y) - f(x*)`` was found; carries the best grid point."""

    def __init__(self, msg: str, best_y: float = float("nan")):
        super().__init__(msg)
        self.best_y = best_y


class DegenerateModel(ValueError):
    pass


@dataclass
class RecoveredModel:
    phis: tuple[BasisPhi, ...]
    psis: tuple[BasisPsi, ...]
    w: np.ndarray
    table_x: MappingTable
    table_y: MappingTable
    y_min: float
    y_max: float
    y_median: float
    name: str = ""
    w_refit: np.ndarray | None = None

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if len(self.w) != len(self.phis) + len(self.psis):
            raise ValueError("coefficient vector does not match the basis count")
        if not self.phis:
            raise DegenerateModel("relation has no feature-side terms")
        if not np.any(self.coefficients()[len(self.phis):]):
            raise DegenerateModel("every target-side coefficient is zero")
        if not self.y_min <= self.y_max:
            raise ValueError("y range must satisfy y_min <= y_max")

    @classmethod
    def from_dataset(cls, phis, psis, w, table_x, table_y, ds: Dataset, name: str = "",
                     refit: bool = True) -> "RecoveredModel":
        """Model with y-range from ``ds`` and, optionally, coefficients refit on it."""
        y = ds.targets
        m = cls(tuple(phis), tuple(psis), np.asarray(w, float), table_x.full(), table_y.full(),
                float(y.min()), float(y.max()), float(np.median(y)), name)
        if refit:
            A = np.hstack([m.phi_values(ds.features), -m.psi_values(y).T])
            if np.isfinite(A).all():
                m.w_refit, _ = refit_support(A, range(A.shape[1]), len(phis))
        return m

    def coefficients(self) -> np.ndarray:
        """Refit coefficients when available, else the fitted ones."""
        return self.w if self.w_refit is None else self.w_refit

    @property
    def n_phi(self) -> int:
        return len(self.phis)

    def phi_values(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.column_stack([_phi_columns(m, self.table_x, x) for m in self.phis])

    def psi_values(self, y) -> np.ndarray:
        """Matrix of shape (M_psi, len(y))."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return np.stack([np.asarray(eval_psi(m, self.table_y, y)) for m in self.psis])

    def f(self, x) -> np.ndarray:
        with np.errstate(all="ignore"):
            return self.phi_values(x) @ self.coefficients()[: self.n_phi]

    def g(self, y) -> np.ndarray:
        with np.errstate(all="ignore"):
            return self.coefficients()[self.n_phi:] @ self.psi_values(y)

    def expression(self, digits: int = 5, prune: float = 1e-9, refit: bool = False) -> str:
        w = self.coefficients() if refit else self.w
        return format_relation(self.phis, self.psis, w, self.table_x, self.table_y, digits, prune)

    def closed_form(self) -> tuple[Transform, float] | None:
        """``(transform, beta)`` when g is a single invertible transform, else None."""
        beta = self.coefficients()[self.n_phi:]
        nz = np.flatnonzero(beta)
        if len(nz) != 1:
            return None
        ts = [self.table_y.transforms[c] for c in self.psis[nz[0]].codes]
        ts = [t for t in ts if t is not Transform.ONE]
        if len(ts) != 1 or ts[0] not in _INVERSES:
            return None
        return ts[0], float(beta[nz[0]])


# -- prediction ---------------------------------------------------------------

def _pick(cands: np.ndarray, lo: float, hi: float, med: float) -> np.ndarray:
    """Per row, the candidate inside [lo, hi] nearest ``med``, else the one nearest the range."""
    inside = (cands >= lo) & (cands <= hi)
    dist_med = np.where(inside, np.abs(cands - med), np.inf)
    dist_rng = np.where(np.isfinite(cands), np.maximum(lo - cands, cands - hi), np.inf)
    any_in = inside.any(axis=1)
    idx = np.where(any_in, np.argmin(dist_med, axis=1), np.argmin(dist_rng, axis=1))
    out = cands[np.arange(len(cands)), idx]
    ok = np.isfinite(cands).any(axis=1)
    return np.where(ok, out, np.nan)


def _solve_roots(model: RecoveredModel, fv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Roots of g(y) = fv for many values; returns (y, best_grid_y) with nan where none."""
    lo, hi = model.y_min, model.y_max
    span = hi - lo if hi > lo else max(1.0, abs(lo))
    grid = np.linspace(lo - 0.5 * span, hi + 0.5 * span, GRID_POINTS)
    gg = model.g(grid)
    H = gg[None, :] - fv[:, None]
    fin = np.isfinite(H)
    best = grid[np.argmin(np.where(fin, np.abs(H), np.inf), axis=1)]
    sc = fin[:, :-1] & fin[:, 1:] & (H[:, :-1] * H[:, 1:] <= 0)
    rows, cols = np.nonzero(sc)
    if rows.size == 0:
        return np.full(len(fv), np.nan), best
    a, b = grid[cols].copy(), grid[cols + 1].copy()
    ha = H[rows, cols]
    target = fv[rows]
    # bisection to 1e-12 on every bracket at once
    for _ in range(200):
        if np.all(b - a <= 1e-12 * np.maximum(1.0, np.abs(a))):
            break
        m = 0.5 * (a + b)
        hm = model.g(m) - target
        left = np.sign(hm) == np.sign(ha)
        a = np.where(left, m, a)
        ha = np.where(left, hm, ha)
        b = np.where(left, b, m)
    r = 0.5 * (a + b)
    # Newton polish with a central-difference slope; keep a step only if it helps
    for _ in range(3):
        hr = model.g(r) - target
        eps = 1e-7 * np.maximum(1.0, np.abs(r))
        slope = (model.g(r + eps) - model.g(r - eps)) / (2 * eps)
        with np.errstate(all="ignore"):
            step = np.where(np.isfinite(slope) & (slope != 0), hr / slope, 0.0)
        rn = r - step
        better = np.abs(model.g(rn) - target) < np.abs(hr)
        r = np.where(better, rn, r)
    resid = np.abs(model.g(r) - target)
    good = np.isfinite(resid) & (resid <= ROOT_ACCEPT * np.maximum(1.0, np.abs(target)))
    # gather candidate roots per point (sign changes across poles are rejected above)
    n_max = np.bincount(rows, minlength=len(fv)).max()
    cands = np.full((len(fv), n_max), np.nan)
    slot = np.zeros(len(fv), dtype=int)
    for i, ri, g_ok in zip(rows, r, good):
        if g_ok:
            cands[i, slot[i]] = ri
            slot[i] += 1
    return _pick(cands, lo, hi, model.y_median), best


def predict_many(model: RecoveredModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Predicted y for each row of ``x`` and a boolean failure mask."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    fv = model.f(x)
    y = np.full(len(fv), np.nan)
    fin = np.isfinite(fv)
    cf = model.closed_form()
    if cf is not None:
        t, beta = cf
        with np.errstate(all="ignore"):
            cands = np.column_stack([np.broadcast_to(c, fv.shape) for c in _INVERSES[t](fv / beta)])
        cands[~np.isfinite(cands)] = np.nan
        y = _pick(cands, model.y_min, model.y_max, model.y_median)
    todo = fin & ~np.isfinite(y)
    if todo.any():
        y[todo], _ = _solve_roots(model, fv[todo])
    return y, ~np.isfinite(y)


def predict_y(model: RecoveredModel, x_star) -> float:
    """Solve ``g(y) = f(x*)`` for one point; raises :class:`PredictionFailure`."""
    x = np.asarray(x_star, dtype=float).reshape(1, -1)
    y, failed = predict_many(model, x)
    if failed[0]:
        fv = model.f(x)
        best = float("nan")
        if np.isfinite(fv).all():
            _, b = _solve_roots(model, fv)
            best = float(b[0])
        raise PredictionFailure(f"no root of g(y) = {fv[0]:.6g} on the scan grid", best)
    return float(y[0])


# -- equivalence --------------------------------------------------------------

@dataclass
class EquivalenceReport:
    exact: bool
    max_rel_error: float
    n_points: int
    n_failures: int
    widened: bool
    max_rel_error_train_domain: float = float("nan")
    max_rel_error_widened: float = float("nan")
    n_outside_model_domain: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _rel_errors(model, bench, x):
    y_true = bench.ground_truth(x)
    keep = np.isfinite(y_true)
    x, y_true = x[keep], y_true[keep]
    y_hat, failed = predict_many(model, x)
    err = np.abs(y_hat - y_true) / np.maximum(1.0, np.abs(y_true))
    return err, failed, np.isfinite(model.f(x))


def equivalence_check(model: RecoveredModel, bench: BenchmarkSpec, n: int = 1000,
                      seed: int = 0, widen: float = 0.5) -> EquivalenceReport:
    """Numeric equivalence on fresh points over the training domain and a widened domain.

    Points of the widened domain where the relation itself is undefined (its
    right-hand side is not finite, e.g. a logarithm of a negative sum) are
    outside the model's natural domain and are skipped; on the training domain
    every point must be predicted.
    """
    rng = make_rng(seed, "test", bench.name + "#equivalence")
    a, b = bench.train.a, bench.train.b
    c, h = 0.5 * (a + b), 0.5 * (b - a) * (1.0 + widen)
    x_in = rng.uniform(a, b, size=(n, bench.d))
    x_wide = rng.uniform(c - h, c + h, size=(n, bench.d))
    e_in, f_in, _ = _rel_errors(model, bench, x_in)
    e_w, f_w, dom_w = _rel_errors(model, bench, x_wide)
    e_w, f_w, outside = e_w[dom_w], f_w[dom_w], int((~dom_w).sum())
    n_fail = int(f_in.sum() + f_w.sum())
    err_in = float(np.max(np.where(f_in, np.inf, e_in), initial=0.0))
    err_w = float(np.max(np.where(f_w, np.inf, e_w), initial=0.0))
    max_err = max(err_in, err_w)
    n_pts = len(e_in) + len(e_w)
    exact = n_fail == 0 and n_pts > 0 and max_err < EXACT_RTOL
    return EquivalenceReport(exact, max_err, n_pts, n_fail, True, err_in, err_w, outside)


# -- metrics ------------------------------------------------------------------

def prediction_rmse(model: RecoveredModel, ds: Dataset) -> float:
    """RMSE of predicted y; each failed prediction contributes an error of 1e6."""
    y_hat, failed = predict_many(model, ds.features)
    err = np.where(failed, FAIL_PENALTY, y_hat - ds.targets)
    return float(np.sqrt(np.mean(err ** 2)))


def prediction_failures(model: RecoveredModel, ds: Dataset) -> int:
    return int(predict_many(model, ds.features)[1].sum())


@dataclass
class RunRecord:
    benchmark: str
    seed: int
    exact: bool
    train_rmse: float
    test_rmse: float
    runtime_s: float
    generations: int
    expression: str
    best_fitness: float = float("nan")
    converged: bool = False
    sgsr: bool = False
    max_rel_error: float = float("nan")
    stop_reason: str = ""
    extra: dict = field(default_factory=dict)

    def to_json(self, include_runtime: bool = True) -> str:
        d = asdict(self)
        if not include_runtime:
            d.pop("runtime_s")
        return json.dumps(d, sort_keys=True, allow_nan=True)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls(**json.loads(text))


@dataclass
class SuiteRow:
    benchmark: str
    recovery_rate: float
    mean_rmse: float
    median_rmse: float
    mean_runtime_s: float
    n_runs: int


def aggregate(runs: Sequence[RunRecord], benchmark: str | None = None) -> SuiteRow:
    if not runs:
        raise ValueError("cannot aggregate an empty run list")
    rmse = [r.test_rmse for r in runs]
    return SuiteRow(
        benchmark if benchmark is not None else runs[0].benchmark,
        100.0 * sum(r.exact for r in runs) / len(runs),
        float(np.mean(rmse)),
        float(statistics.median(rmse)),
        float(np.mean([r.runtime_s for r in runs])),
        len(runs),
    )


SUMMARY_COLUMNS = ("benchmark", "recovery_rate", "mean_rmse", "median_rmse", "mean_runtime_s")


def summary_csv(rows: Iterable[SuiteRow], extra_columns: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    cols = SUMMARY_COLUMNS + tuple(extra_columns)
    wr.writerow(cols)
    for r in rows:
        d = asdict(r) if not isinstance(r, dict) else r
        wr.writerow([d[c] for c in cols])
    return buf.getvalue()
