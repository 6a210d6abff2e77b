"""Degree sequences, the graphicality test, and logistic degree-model fitting.

The degree model assigns each vertex a real parameter beta_i and connects
i and j independently with probability logistic(beta_i + beta_j); its
sufficient statistics are the degrees. Fitting solves the fixed-point system
d_i = sum_{j != i} logistic(beta_i + beta_j).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NonConvergence, NotGraphical
from .graphon import StepCDF, StepGraphon


def _as_degree_array(d) -> np.ndarray:
    arr = np.asarray(getattr(d, "d", d))
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInput("degree sequence must be a nonempty 1-d array")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.allclose(arr, rounded, atol=0.0, rtol=0.0):
            raise InvalidInput("degrees must be integers")
        arr = rounded.astype(int)
    return arr.astype(int)


@dataclass(frozen=True, eq=False)
class DegreeSequence:
    """Non-increasing vector of vertex degrees."""

    d: np.ndarray

    def __post_init__(self):
        arr = _as_degree_array(self.d)
        n = arr.size
        if np.any(arr < 0) or np.any(arr > n - 1):
            raise InvalidInput("degrees must lie in [0, n-1]")
        if np.any(np.diff(arr) > 0):
            raise InvalidInput("degree sequence must be non-increasing")
        arr = np.array(arr, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "d", arr)

    @classmethod
    def from_iterable(cls, values) -> "DegreeSequence":
        arr = _as_degree_array(values)
        return cls(np.sort(arr)[::-1])

    @property
    def n(self) -> int:
        return self.d.size


def erdos_gallai(d) -> bool:
    """Whether d is the degree sequence of some simple graph.

    Requires an even degree sum and, for every k,
    sum_{i<=k} d_i <= k(k-1) + sum_{i>k} min(d_i, k) on the sorted sequence.
    """
    arr = _as_degree_array(d)
    n = arr.size
    if np.any(arr < 0) or np.any(arr > n - 1):
        return False
    if arr.sum() % 2 != 0:
        return False
    s = np.sort(arr)[::-1]
    prefix = np.cumsum(s)
    for k in range(1, n + 1):
        tail = np.minimum(s[k:], k).sum()
        if prefix[k - 1] > k * (k - 1) + tail:
            return False
    return True


# ---------------------------------------------------------------------------
# Degree functions (continuum limits of degree sequences)


@dataclass(frozen=True, eq=False)
class DegreeFunction:
    """Non-increasing step function D on [0,1] with values in [c1, c2].

    breakpoints are the right endpoints of the constancy intervals (the last
    one is 1); values[i] is the value on [breakpoints[i-1], breakpoints[i]).
    """

    breakpoints: np.ndarray
    values: np.ndarray
    c1: float
    c2: float

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float).ravel()
        if b.size != v.size or b.size == 0:
            raise InvalidInput("breakpoints and values must have equal length")
        if np.any(np.diff(b) <= 0) or b[0] <= 0 or abs(b[-1] - 1.0) > 1e-12:
            raise InvalidInput("breakpoints must increase to 1")
        if np.any(np.diff(v) > 1e-15):
            raise InvalidInput("degree function must be non-increasing")
        if not (0.0 < self.c1 < self.c2 < 1.0):
            raise InvalidInput("need 0 < c1 < c2 < 1")
        if v.min() < self.c1 - 1e-12 or v.max() > self.c2 + 1e-12:
            raise InvalidInput("values must lie within [c1, c2]")
        b = np.array(b, copy=True)
        b[-1] = 1.0
        for arr in (b, v):
            arr.setflags(write=False)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", np.array(v, copy=True))
        self.values.setflags(write=False)

    @classmethod
    def constant(cls, p: float, margin: float = 0.05) -> "DegreeFunction":
        lo = max(min(p - margin, p / 2), 1e-6)
        hi = min(max(p + margin, (1 + p) / 2), 1 - 1e-6)
        return cls(np.array([1.0]), np.array([float(p)]), lo, hi)

    @property
    def lefts(self) -> np.ndarray:
        return np.concatenate([[0.0], self.breakpoints[:-1]])

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        idx = np.minimum(
            np.searchsorted(self.breakpoints, x, side="right"), self.values.size - 1
        )
        out = self.values[idx]
        return out if out.ndim else float(out)

    def integral(self, a: float, b: float) -> float:
        """Exact integral of D over [a, b]."""
        lo = np.maximum(self.lefts, a)
        hi = np.minimum(self.breakpoints, b)
        return float((np.maximum(hi - lo, 0.0) * self.values).sum())

    def block_average(self, k: int) -> np.ndarray:
        """Exact averages over k equal blocks."""
        return np.array(
            [self.integral(i / k, (i + 1) / k) * k for i in range(k)]
        )


@dataclass(frozen=True)
class AssumptionReport:
    """Interior-condition report for a degree function."""

    min_value: float
    max_value: float
    bounds_ok: bool
    margin: float
    margin_at: float
    positivity_ok: bool

    @property
    def passed(self) -> bool:
        return self.bounds_ok and self.positivity_ok


def check_assumption(d_fun: DegreeFunction, grid: int = 256) -> AssumptionReport:
    """Check c1 <= D <= c2 and the interior margin on a grid of x values.

    The margin at x is int_x^1 min(D(y), x) dy + x^2 - int_0^x D(y) dy,
    computed exactly on the step function and minimized over x = i/grid,
    i = 1..grid.
    """
    if grid < 1:
        raise InvalidInput("grid must be positive")
    vmin, vmax = float(d_fun.values.min()), float(d_fun.values.max())
    bounds_ok = d_fun.c1 <= vmin and vmax <= d_fun.c2

    def margin_at(x: float) -> float:
        lo = np.maximum(d_fun.lefts, x)
        hi = d_fun.breakpoints
        lengths = np.maximum(hi - lo, 0.0)
        capped = np.minimum(d_fun.values, x)
        return float((lengths * capped).sum() + x * x - d_fun.integral(0.0, x))

    xs = np.arange(1, grid + 1) / grid
    margins = np.array([margin_at(x) for x in xs])
    i = int(np.argmin(margins))
    return AssumptionReport(
        min_value=vmin,
        max_value=vmax,
        bounds_ok=bool(bounds_ok),
        margin=float(margins[i]),
        margin_at=float(xs[i]),
        positivity_ok=bool(margins[i] > 0.0),
    )


def degree_measure(d_fun: DegreeFunction) -> StepCDF:
    """Distribution function lam -> Leb{x : D(x) <= lam}."""
    lengths = d_fun.breakpoints - d_fun.lefts
    order = np.argsort(d_fun.values, kind="stable")
    jumps, masses = [], []
    for i in order:
        v = float(d_fun.values[i])
        if jumps and abs(v - jumps[-1]) <= 1e-15:
            masses[-1] += lengths[i]
        else:
            jumps.append(v)
            masses.append(float(lengths[i]))
    cdf = np.cumsum(masses)
    cdf[-1] = 1.0
    return StepCDF(np.asarray(jumps), cdf)


# ---------------------------------------------------------------------------
# Fixed-point fitting


@dataclass(frozen=True, eq=False)
class BetaVector:
    """Fitted vertex parameters with the achieved sup-norm residual."""

    beta: np.ndarray
    residual: float

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=float)
        if not np.all(np.isfinite(b)):
            raise InvalidInput("beta entries must be finite")
        b = np.array(b, copy=True)
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)

    @property
    def n(self) -> int:
        return self.beta.size


def _logistic(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def _pair_matrix(beta: np.ndarray) -> np.ndarray:
    return _logistic(beta[:, None] + beta[None, :])


def _fit_residual(beta: np.ndarray, target: np.ndarray, exclude_diag: bool) -> float:
    p = _pair_matrix(beta)
    if exclude_diag:
        np.fill_diagonal(p, 0.0)
        row = p.sum(axis=1)
    else:
        row = p.mean(axis=1)
    return float(np.max(np.abs(target - row)))


def _fixed_point_step(
    beta: np.ndarray, log_target: np.ndarray, exclude_diag: bool, k: int
) -> np.ndarray:
    # s_i = sum_j w_j exp(beta_j) / (1 + exp(beta_i + beta_j)), in log space
    pair = beta[:, None] + beta[None, :]
    log_terms = beta[None, :] - np.logaddexp(0.0, pair)
    if exclude_diag:
        np.fill_diagonal(log_terms, -np.inf)
        log_s = np.logaddexp.reduce(log_terms, axis=1)
    else:
        log_s = np.logaddexp.reduce(log_terms, axis=1) - np.log(k)
    return log_target - log_s


def _damped_iteration(
    target: np.ndarray,
    exclude_diag: bool,
    tol: float,
    max_iter: int,
    what: str,
):
    n = target.size
    frac = np.clip(
        (target / (n - 1)) if exclude_diag else target, 1e-12, 1.0 - 1e-12
    )
    beta = 0.5 * np.log(frac / (1.0 - frac))
    log_target = np.log(target if exclude_diag else target)
    res = _fit_residual(beta, target, exclude_diag)
    for it in range(max_iter):
        if res <= tol:
            return beta, res, it
        cand = _fixed_point_step(beta, log_target, exclude_diag, n)
        cand_res = _fit_residual(cand, target, exclude_diag)
        if cand_res > res:
            cand = 0.5 * (beta + cand)
            cand_res = _fit_residual(cand, target, exclude_diag)
        beta, res = cand, cand_res
    if res <= tol:
        return beta, res, max_iter
    raise NonConvergence(
        f"{what}: residual {res:.3e} above tol {tol:.1e} after {max_iter} iterations",
        iterations=max_iter,
        residual=res,
    )


def solve_beta(d, tol: float = 1e-10, max_iter: int = 10000) -> BetaVector:
    """Solve d_i = sum_{j != i} logistic(beta_i + beta_j) for all i.

    Log-space fixed point beta_i <- log d_i - log sum_{j != i}
    e^{beta_j}/(1 + e^{beta_i + beta_j}), damped by 0.5 whenever the sup-norm
    residual would increase. Degrees must be interior (1 <= d_i <= n-2);
    boundary degrees put the model outside the exponential family and are
    rejected with NonConvergence.
    """
    arr = _as_degree_array(d)
    n = arr.size
    if n < 3 or np.any(arr < 1) or np.any(arr > n - 2):
        raise NonConvergence(
            "degrees outside the interior range [1, n-2]; "
            "the fixed-point system has no finite solution",
            iterations=0,
            residual=float("inf"),
        )
    if not erdos_gallai(arr):
        raise NotGraphical("degree sequence is not graphical")
    beta, res, _ = _damped_iteration(
        arr.astype(float), True, tol, max_iter, "solve_beta"
    )
    return BetaVector(beta, res)


def surrogate_beta(d) -> BetaVector:
    """Finite stand-in parameters for boundary degree sequences.

    The exact degree-fiber identities and rejection-sampler uniformity hold
    for any finite parameter vector, so sequences with d_i in {0, n-1} (where
    the fit diverges) may use this clipped moment match instead.
    """
    arr = _as_degree_array(d).astype(float)
    n = arr.size
    frac = np.clip(arr / max(n - 1, 1), 1.0 / (2 * n), 1.0 - 1.0 / (2 * n))
    beta = 0.5 * np.log(frac / (1.0 - frac))
    p = _pair_matrix(beta)
    np.fill_diagonal(p, 0.0)
    res = float(np.max(np.abs(arr - p.sum(axis=1))))
    return BetaVector(beta, res)


def fitted_graphon(bv: BetaVector) -> StepGraphon:
    """n-block graphon with logistic(beta_i + beta_j) off-diagonal, 0 diagonal."""
    p = _pair_matrix(bv.beta)
    np.fill_diagonal(p, 0.0)
    n = bv.n
    return StepGraphon(np.full(n, 1.0 / n), p)


def limit_graphon(
    d_fun: DegreeFunction, k: int, tol: float = 1e-10, max_iter: int = 10000
):
    """Continuum analogue of the degree fit on k equal blocks.

    Discretizes D by exact block averages and solves
    D_i = sum_j w_j logistic(beta_i + beta_j) with the damped iteration.
    Returns the k-block graphon (diagonal included) and the block parameters.
    """
    if k < 1:
        raise InvalidInput("block count must be positive")
    target = d_fun.block_average(k)
    beta, res, _ = _damped_iteration(target, False, tol, max_iter, "limit_graphon")
    vals = _pair_matrix(beta)
    w = StepGraphon(np.full(k, 1.0 / k), vals)
    return w, BetaVector(beta, res)
