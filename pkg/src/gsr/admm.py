"""Unit-norm constrained Lasso solved by scaled ADMM, plus support refit.

Minimises ``||A w||^2 + lam * ||w||_1`` subject to ``||w||_2 = 1``. The
w-step solves ``(2 A^T A + rho I) w = rho (z - u)`` and renormalises; the
z-step soft-thresholds; u accumulates the primal residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.linalg import cho_factor, cho_solve


class AdmmInputError(ValueError):
    pass


@dataclass(frozen=True)
class AdmmConfig:
    lam: float = 0.4
    rho: float = 0.1
    tol: float = 1e-5
    max_iters: int = 1000
    w0: np.ndarray | None = None
    z0: np.ndarray | None = None
    u0: np.ndarray | None = None

    def __post_init__(self):
        if self.lam <= 0 or self.rho <= 0 or self.tol <= 0:
            raise ValueError("lam, rho and tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")

    def initial(self, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        w = np.full(m, 0.5) if self.w0 is None else np.asarray(self.w0, dtype=float).copy()
        w /= np.linalg.norm(w)
        z = np.ones(m) if self.z0 is None else np.asarray(self.z0, dtype=float).copy()
        u = np.zeros(m) if self.u0 is None else np.asarray(self.u0, dtype=float).copy()
        return w, z, u


@dataclass
class FitResult:
    w: np.ndarray
    n_phi: int
    support: tuple[int, ...]
    residual_rmse: float
    converged: bool
    iters: int
    refit: bool = False
    admm_w: np.ndarray | None = field(default=None, repr=False)

    @property
    def alpha(self) -> np.ndarray:
        return self.w[: self.n_phi]

    @property
    def beta(self) -> np.ndarray:
        return self.w[self.n_phi:]


def soft_threshold(a, kappa: float):
    """Elementwise shrinkage ``sign(a) * max(|a| - kappa, 0)``."""
    a = np.asarray(a, dtype=float)
    out = np.where(a > kappa, a - kappa, np.where(a < -kappa, a + kappa, 0.0))
    return float(out) if out.ndim == 0 else out


def residual_rmse(A: np.ndarray, w: np.ndarray) -> float:
    return float(np.linalg.norm(A @ w) / np.sqrt(A.shape[0]))


def w_update(A: np.ndarray, z: np.ndarray, u: np.ndarray, rho: float,
             w_prev: np.ndarray | None = None) -> tuple[np.ndarray, bool]:
    """One w-step. Returns ``(w, ok)``; ``ok`` is False when ``z - u`` vanishes,
    in which case ``w_prev`` is returned unchanged."""
    rhs = rho * (np.asarray(z, float) - np.asarray(u, float))
    if not np.any(rhs):
        return (None if w_prev is None else np.asarray(w_prev, float).copy()), False
    G = 2.0 * A.T @ A + rho * np.eye(A.shape[1])
    w = cho_solve(cho_factor(G), rhs)
    return w / np.linalg.norm(w), True


@numba.njit(cache=True)
def _admm_kernel(L, lam, rho, tol, max_iters, w, z, u):
    m = w.shape[0]
    kappa = lam / rho
    y = np.empty(m)
    wn = np.empty(m)
    for it in range(1, max_iters + 1):
        nz = False
        for i in range(m):
            y[i] = rho * (z[i] - u[i])
            if y[i] != 0.0:
                nz = True
        if not nz:
            return w, z, u, it - 1, False
        # forward then backward substitution with the lower Cholesky factor
        for i in range(m):
            s = y[i]
            for k in range(i):
                s -= L[i, k] * y[k]
            y[i] = s / L[i, i]
        for i in range(m - 1, -1, -1):
            s = y[i]
            for k in range(i + 1, m):
                s -= L[k, i] * wn[k]
            wn[i] = s / L[i, i]
        nrm = 0.0
        for i in range(m):
            nrm += wn[i] * wn[i]
        nrm = np.sqrt(nrm)
        # w and -w encode the same relation, so convergence is tested modulo sign
        dm = 0.0
        dp = 0.0
        for i in range(m):
            wn[i] /= nrm
            dm += (wn[i] - w[i]) ** 2
            dp += (wn[i] + w[i]) ** 2
            w[i] = wn[i]
        diff = min(dm, dp)
        for i in range(m):
            a = w[i] + u[i]
            if a > kappa:
                z[i] = a - kappa
            elif a < -kappa:
                z[i] = a + kappa
            else:
                z[i] = 0.0
            u[i] += w[i] - z[i]
        if np.sqrt(diff) < tol:
            return w, z, u, it, True
    return w, z, u, max_iters, False


def solve_admm_raw(A: np.ndarray, cfg: AdmmConfig = AdmmConfig()):
    """Run the iteration only. Returns ``(w, z, u, iters, converged)``."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] < 2:
        raise AdmmInputError("A must be a matrix with at least two columns")
    if not np.isfinite(A).all():
        raise AdmmInputError("A contains non-finite entries")
    m = A.shape[1]
    w, z, u = cfg.initial(m)
    G = 2.0 * (A.T @ A) + cfg.rho * np.eye(m)
    L = np.linalg.cholesky(G)
    return _admm_kernel(L, cfg.lam, cfg.rho, cfg.tol, cfg.max_iters, w, z, u)


def _sign_fix(w: np.ndarray, n_phi: int) -> np.ndarray:
    beta = w[n_phi:]
    ref = beta if beta.size and np.abs(beta).max() > 0 else w
    if ref[np.argmax(np.abs(ref))] < 0:
        return -w
    return w


def refit_support(A: np.ndarray, support, n_phi: int | None = None,
                  null_tol: float = 1e-10) -> tuple[np.ndarray, float]:
    """Unit-norm minimiser of ``||A_S w||`` over the support columns.

    Without exact dependencies this is the smallest right singular direction
    of ``A_S``. Exact dependencies are detected on the column-normalised
    matrix (singular values below ``null_tol``), which is insensitive to
    wildly different column scales. When there are several (duplicate or
    collinear columns), the null direction with the largest target-side
    share (measured in normalised coordinates) is returned, so relations
    that merely cancel feature columns against each other are not preferred
    over one that involves the target.
    Sign is fixed so the largest-magnitude target-side entry is positive.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[1]
    n_phi = m if n_phi is None else n_phi
    S = np.array(sorted(set(int(i) for i in support)), dtype=int)
    if S.size == 0:
        raise ValueError("empty support")
    As = A[:, S]
    beta_rows = S >= n_phi
    scale = np.linalg.norm(As, axis=0)
    scale[scale == 0] = 1.0
    _, s, vt = np.linalg.svd(As / scale, full_matrices=True)
    sig = np.zeros(len(S))
    sig[: len(s)] = s
    null = np.flatnonzero(sig <= null_tol)
    v = None
    if null.size:
        # choose within the null space in normalised coordinates, then unscale;
        # orthogonalising in raw coordinates is unstable across column scales
        V0 = vt[null].T
        if beta_rows.any():
            _, sb, bt = np.linalg.svd(V0[beta_rows], full_matrices=False)
            if sb[0] > 1e-6:
                vs = V0 @ bt[0]
                # entries at rounding level in normalised coordinates carry no
                # relation but explode off the sample for fast-growing columns
                vs[np.abs(vs) < 1e-12 * np.abs(vs).max()] = 0.0
                v = vs / scale
        elif null.size == 1:
            v = V0[:, 0] / scale
        if v is None and null.size < len(S):
            # only feature-side cancellations: best direction outside them
            j = np.argsort(sig)[null.size]
            v = vt[j] / scale
    if v is None:
        v = np.linalg.svd(As, full_matrices=True)[2][-1]
    w = np.zeros(m)
    w[S] = v / np.linalg.norm(v)
    w = _sign_fix(w, n_phi)
    return w, residual_rmse(A, w)


def solve_admm(A: np.ndarray, cfg: AdmmConfig = AdmmConfig(), n_phi: int | None = None,
               refit: bool = True, zero_tol: float = 0.0) -> FitResult:
    """Solve the constrained Lasso, then optionally debias on the support of z.

    With ``lam / rho >= 1`` (the defaults give 4) no fixed point has a nonzero
    z, so the support is usually empty and the ADMM vector is returned as is.
    The refit replaces the ADMM vector only if its residual is no larger.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[1] if A.ndim == 2 else 0
    n_phi = m if n_phi is None else n_phi
    w, z, _, iters, converged = solve_admm_raw(A, cfg)
    w = w / np.linalg.norm(w)
    support = tuple(int(i) for i in np.flatnonzero(np.abs(z) > zero_tol))
    res = residual_rmse(A, w)
    admm_w = w.copy()
    used_refit = False
    if refit and support:
        w_r, res_r = refit_support(A, support, n_phi)
        if res_r <= res:
            w, res, used_refit = w_r, res_r, True
    if not used_refit:
        w = _sign_fix(w, n_phi)
    return FitResult(w=w, n_phi=n_phi, support=support, residual_rmse=res,
                     converged=bool(converged), iters=int(iters), refit=used_refit,
                     admm_w=admm_w)
