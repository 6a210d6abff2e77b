"""Relative-entropy rate functions on step graphons.

Conventions fixed globally: 0*log 0 = 0 and x*log(x/0) = +infinity. The base
graphon must stay inside (0,1) wherever the argument disagrees with it;
otherwise the entropy is infinite and BoundaryW0 is raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import degree as degree_mod
from .errors import BoundaryW0, GraphonLDPError, InvalidInput
from .graphon import (
    DEFAULT_BLOCK_CAP,
    StepGraphon,
    _align_equal_blocks,
    _min_over_permutations,
    common_refinement,
    degree_distribution,
    levy_prokhorov,
)


@dataclass(frozen=True)
class RateValue:
    """Rate-function value with the block permutation achieving it.

    ``exact`` records whether the permutation minimum was certified by
    exhaustive search; annealed results are upper bounds.
    """

    value: float
    certificate: tuple | None
    exact: bool = True

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


def _xlogx(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    pos = v > 0.0
    out[pos] = v[pos] * np.log(v[pos])
    return out


def _bernoulli_kl(v: np.ndarray, v0: np.ndarray) -> np.ndarray:
    """Pointwise KL of Bernoulli(v) from Bernoulli(v0); raises on infinities."""
    bad = ((v0 <= 0.0) & (v > 0.0)) | ((v0 >= 1.0) & (v < 1.0))
    if np.any(bad):
        raise BoundaryW0(
            "base graphon touches {0,1} where the argument disagrees; "
            "relative entropy is infinite"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(v > 0.0, v * (np.log(v) - np.log(v0)), 0.0)
        t2 = np.where(v < 1.0, (1.0 - v) * (np.log1p(-v) - np.log1p(-v0)), 0.0)
    return t1 + t2


def relative_entropy_I(
    w: StepGraphon, w0: StepGraphon, cap: int = DEFAULT_BLOCK_CAP
) -> float:
    """(1/2) int [W log(W/W0) + (1-W) log((1-W)/(1-W0))], exact on blocks."""
    weights, (v, v0) = common_refinement(w, w0, cap=cap)
    area = weights[:, None] * weights[None, :]
    return float(0.5 * (area * _bernoulli_kl(v, v0)).sum())


def dual_value(
    w: StepGraphon,
    w0: StepGraphon,
    a: np.ndarray,
    cap: int = DEFAULT_BLOCK_CAP,
) -> float:
    """(1/2) int [a W - log(W0 e^a + 1 - W0)] for a symmetric block function a.

    ``a`` is a k x k symmetric table on the common refinement of w and w0.
    The supremum of this functional over symmetric a equals the relative
    entropy, attained at a* = log[W(1-W0)/((1-W)W0)].
    """
    weights, (v, v0) = common_refinement(w, w0, cap=cap)
    a = np.asarray(a, dtype=float)
    if a.shape != v.shape:
        raise InvalidInput(
            f"a must be {v.shape[0]} x {v.shape[0]} on the common refinement"
        )
    if not np.allclose(a, a.T, atol=1e-12, rtol=0.0):
        raise InvalidInput("a must be symmetric")
    if np.any((v0 <= 0.0) | (v0 >= 1.0)):
        raise BoundaryW0("base graphon must be strictly inside (0,1)")
    area = weights[:, None] * weights[None, :]
    # log(W0 e^a + 1 - W0) = log1p(W0 (e^a - 1)), stable for large |a|
    big = a > 30.0
    log_term = np.where(
        big,
        np.log(v0) + a + np.log1p((1.0 - v0) * np.exp(-a) / v0),
        np.log1p(v0 * np.expm1(a)),
    )
    return float(0.5 * (area * (a * v - log_term)).sum())


def optimal_dual_witness(
    w: StepGraphon, w0: StepGraphon, cap: int = DEFAULT_BLOCK_CAP
) -> np.ndarray:
    """The maximizing a* = log[W(1-W0)/((1-W)W0)] on the common refinement."""
    _, (v, v0) = common_refinement(w, w0, cap=cap)
    if np.any((v <= 0.0) | (v >= 1.0) | (v0 <= 0.0) | (v0 >= 1.0)):
        raise BoundaryW0("witness requires both graphons strictly inside (0,1)")
    return np.log(v) - np.log1p(-v) - (np.log(v0) - np.log1p(-v0))


def entropy_he(w: StepGraphon) -> float:
    """(1/2) int [W log W + (1-W) log(1-W)]; always in [-log(2)/2, 0]."""
    weights = w.block_weights
    area = weights[:, None] * weights[None, :]
    v = w.values
    return float(0.5 * (area * (_xlogx(v) + _xlogx(1.0 - v))).sum())


def rate_J(
    w: StepGraphon,
    w0: StepGraphon,
    mode: str = "auto",
    seed: int = 0,
    regrid_cap: int = 64,
) -> RateValue:
    """min over block permutations phi of I_{W0}(W relabeled by phi).

    Exact enumeration up to 8 blocks; seeded annealing beyond (the result is
    then an upper bound on the true infimum over measure-preserving maps).
    The achieving permutation is returned as a checkable certificate.
    """
    a1, a2 = _align_equal_blocks(w, w0, regrid_cap=regrid_cap)
    if np.any((a2.values <= 0.0) | (a2.values >= 1.0)):
        raise BoundaryW0("base graphon must be away from the boundary")
    k = a1.k
    area = np.full((k, k), 1.0 / (k * k))
    v0 = a2.values
    if np.ptp(v0) == 0.0:
        # constant bases are invariant under relabeling
        val = float(0.5 * (area * _bernoulli_kl(a1.values, v0)).sum())
        return RateValue(val, tuple(range(k)), exact=True)

    def objective(perm):
        vp = a1.values[np.ix_(perm, perm)]
        return float(0.5 * (area * _bernoulli_kl(vp, v0)).sum())

    if mode == "auto":
        mode = "exact" if k <= 8 else "anneal"
    best, perm = _min_over_permutations(objective, k, mode, seed)
    return RateValue(float(best), tuple(int(p) for p in perm), exact=(mode == "exact"))


def rate_J_D(
    w: StepGraphon,
    d_fun: "degree_mod.DegreeFunction",
    lp_tol: float | None = None,
    mode: str = "auto",
    seed: int = 0,
    k: int | None = None,
    tol: float = 1e-10,
) -> RateValue:
    """Degree-constrained rate: +infinity off the degree fiber, else rate_J.

    The paper-level constraint is exact equality of degree distributions;
    numerically it is replaced by a Levy-Prokhorov gate d_LP <= lp_tol
    (default 1e-9 when D is exactly representable on the block grid, 2/k
    otherwise).
    """
    if k is None:
        k = w.k
    if lp_tol is None:
        lp_tol = default_lp_tol(d_fun, k)
    gap = levy_prokhorov(degree_distribution(w), degree_mod.degree_measure(d_fun))
    if gap > lp_tol:
        return RateValue(float("inf"), None, exact=True)
    w_d, _ = degree_mod.limit_graphon(d_fun, k, tol=tol)
    return rate_J(w, w_d, mode=mode, seed=seed)


def default_lp_tol(d_fun: "degree_mod.DegreeFunction", k: int) -> float:
    """1e-9 when D is block-exact on k equal blocks, 2/k otherwise."""
    scaled = d_fun.breakpoints * k
    if np.allclose(scaled, np.rint(scaled), atol=1e-9, rtol=0.0):
        return 1e-9
    return 2.0 / k


@dataclass(frozen=True)
class CountingEntropy:
    """Entropy of the limiting graphon together with its parameter form."""

    value: float
    beta_form: float


def counting_entropy(
    d_fun: "degree_mod.DegreeFunction",
    k: int,
    tol: float = 1e-10,
    check_tol: float = 1e-8,
) -> CountingEntropy:
    """h_e of the limit graphon, cross-checked against the parameter form.

    With W_D = logistic(beta(x) + beta(y)) and D(x) = int W_D(x, y) dy,
    h_e(W_D) = int beta D - (1/2) int int log(1 + e^{beta(x)+beta(y)}),
    so both evaluations must agree; a mismatch signals a broken fit.
    """
    w_d, bv = degree_mod.limit_graphon(d_fun, k, tol=tol)
    he = entropy_he(w_d)
    target = d_fun.block_average(k)
    beta = bv.beta
    pair = beta[:, None] + beta[None, :]
    beta_form = float(np.mean(beta * target) - 0.5 * np.mean(np.logaddexp(0.0, pair)))
    if abs(he - beta_form) > check_tol:
        raise GraphonLDPError(
            f"entropy forms disagree: {he!r} vs {beta_form!r}"
        )
    return CountingEntropy(value=he, beta_form=beta_form)
