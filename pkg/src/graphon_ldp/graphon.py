"""Step graphons, empirical graphons, degree CDFs, and cut-metric computations.

A step graphon is a symmetric function on [0,1]^2 that is constant on
products of finitely many consecutive intervals (blocks). All types here are
immutable after construction and every operation is pure, so values can be
shared freely across threads.
"""

from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass

import numpy as np

from .errors import (
    BlockCapExceeded,
    BlockCountMismatch,
    ExactModeTooLarge,
    InvalidInput,
    WorkCapExceeded,
)

DEFAULT_BLOCK_CAP = 24
DEFAULT_WORK_CAP = 10**8
EXACT_PERM_LIMIT = 8

_WTOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StepGraphon:
    """Block-constant symmetric function on [0,1]^2 with values in [0,1].

    block_weights are the Lebesgue measures of the blocks (they sum to 1);
    values is the symmetric k x k table of block values. Zero-weight blocks
    are dropped on construction.
    """

    block_weights: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.block_weights, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InvalidInput("block_weights must be a nonempty 1-d array")
        if np.any(w < 0):
            raise InvalidInput("block weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise InvalidInput(f"block weights must sum to 1, got {w.sum()!r}")
        if v.shape != (w.size, w.size):
            raise InvalidInput("values must be k x k for k blocks")
        if not np.allclose(v, v.T, atol=1e-12, rtol=0.0):
            raise InvalidInput("values table must be symmetric")
        v = (v + v.T) / 2.0
        if v.min() < -1e-12 or v.max() > 1.0 + 1e-12:
            raise InvalidInput("values must lie in [0, 1]")
        v = np.clip(v, 0.0, 1.0)
        keep = w > 0.0
        if not keep.all():
            w = w[keep]
            v = v[np.ix_(keep, keep)]
        object.__setattr__(self, "block_weights", _readonly(w))
        object.__setattr__(self, "values", _readonly(v))

    @property
    def k(self) -> int:
        return self.block_weights.size

    @property
    def boundaries(self) -> np.ndarray:
        """Right endpoints of the blocks; the last one is exactly 1."""
        b = np.cumsum(self.block_weights)
        b[-1] = 1.0
        return b

    @property
    def has_equal_weights(self) -> bool:
        return bool(np.allclose(self.block_weights, 1.0 / self.k, atol=_WTOL, rtol=0.0))

    @classmethod
    def constant(cls, p: float, k: int = 1) -> "StepGraphon":
        return cls(np.full(k, 1.0 / k), np.full((k, k), float(p)))

    @classmethod
    def from_matrix(cls, values, weights=None) -> "StepGraphon":
        values = np.asarray(values, dtype=float)
        if weights is None:
            weights = np.full(values.shape[0], 1.0 / values.shape[0])
        return cls(weights, values)


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Simple graph on {1..n}; adjacency is a symmetric 0/1 matrix, zero diagonal."""

    n: int
    adjacency: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adjacency)
        if a.shape != (self.n, self.n):
            raise InvalidInput("adjacency must be n x n")
        a = a.astype(np.uint8)
        if np.any(np.diag(a)):
            raise InvalidInput("self-loops are not allowed")
        if not np.array_equal(a, a.T):
            raise InvalidInput("adjacency must be symmetric")
        if a.max(initial=0) > 1:
            raise InvalidInput("adjacency entries must be 0 or 1")
        a = np.array(a, copy=True)
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @classmethod
    def from_edges(cls, n: int, edges) -> "LabeledGraph":
        """Build from 0-based vertex pairs."""
        a = np.zeros((n, n), dtype=np.uint8)
        for i, j in edges:
            if i == j:
                raise InvalidInput(f"self-loop ({i},{j})")
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidInput(f"edge ({i},{j}) out of range for n={n}")
            a[i, j] = 1
            a[j, i] = 1
        return cls(n, a)

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(int)

    def edges(self):
        """Sorted 0-based edge pairs (i < j)."""
        ii, jj = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(ii.tolist(), jj.tolist()))

    def edge_key(self) -> frozenset:
        return frozenset(self.edges())

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.sum()) // 2


@dataclass(frozen=True, eq=False)
class StepCDF:
    """Right-continuous nondecreasing step function on [0,1], ending at 1."""

    jumps: np.ndarray
    cdf: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.jumps, dtype=float).ravel()
        c = np.asarray(self.cdf, dtype=float).ravel()
        if j.size != c.size or j.size == 0:
            raise InvalidInput("jumps and cdf must have equal nonzero length")
        if np.any(np.diff(j) < 0):
            raise InvalidInput("jump points must be sorted")
        if j[0] < -1e-12 or j[-1] > 1.0 + 1e-12:
            raise InvalidInput("jump points must lie in [0, 1]")
        if np.any(np.diff(c) < -1e-12):
            raise InvalidInput("cdf must be nondecreasing")
        if abs(c[-1] - 1.0) > 1e-9:
            raise InvalidInput("cdf must end at 1")
        c = np.minimum.accumulate(np.clip(c, 0.0, 1.0)[::-1])[::-1]
        c[-1] = 1.0
        object.__setattr__(self, "jumps", _readonly(np.clip(j, 0.0, 1.0)))
        object.__setattr__(self, "cdf", _readonly(c))

    def evaluate(self, lam) -> np.ndarray:
        """F(lam), right-continuous; 0 left of the first jump."""
        lam = np.asarray(lam, dtype=float)
        idx = np.searchsorted(self.jumps, lam, side="right")
        out = np.where(idx > 0, self.cdf[np.maximum(idx - 1, 0)], 0.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class SubgraphPattern:
    """Finite simple pattern graph on vertex set {1..num_vertices}."""

    num_vertices: int
    edges: tuple

    def __post_init__(self):
        if self.num_vertices < 1:
            raise InvalidInput("pattern needs at least one vertex")
        seen = set()
        norm = []
        for u, v in self.edges:
            if u == v:
                raise InvalidInput("pattern must be simple (no loops)")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise InvalidInput("pattern edge out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidInput("pattern must be simple (no multi-edges)")
            seen.add(key)
            norm.append(key)
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @classmethod
    def edge(cls):
        return cls(2, ((0, 1),))

    @classmethod
    def triangle(cls):
        return cls(3, ((0, 1), (1, 2), (0, 2)))

    @classmethod
    def cycle(cls, k: int):
        return cls(k, tuple((i, (i + 1) % k) for i in range(k)))

    @classmethod
    def path(cls, k: int):
        return cls(k, tuple((i, i + 1) for i in range(k - 1)))

    @classmethod
    def complete(cls, k: int):
        return cls(k, tuple((i, j) for i in range(k) for j in range(i + 1, k)))

    @classmethod
    def star(cls, leaves: int):
        return cls(leaves + 1, tuple((0, i) for i in range(1, leaves + 1)))


# ---------------------------------------------------------------------------
# Refinement and resampling


def common_refinement(*graphons: StepGraphon, cap: int = DEFAULT_BLOCK_CAP):
    """Coarsest common block partition of the inputs.

    Returns (weights, [values_on_refinement, ...]). Raises BlockCapExceeded
    when the combined block count exceeds ``cap``.
    """
    cuts = np.concatenate([g.boundaries for g in graphons])
    cuts = np.unique(np.concatenate([cuts, [1.0]]))
    keep = [cuts[0]]
    for c in cuts[1:]:
        if c - keep[-1] > _WTOL:
            keep.append(c)
        else:
            keep[-1] = max(keep[-1], c)
    bounds = np.asarray(keep)
    bounds[-1] = 1.0
    weights = np.diff(np.concatenate([[0.0], bounds]))
    if weights.size > cap:
        raise BlockCapExceeded(
            f"common refinement needs {weights.size} blocks, cap is {cap}"
        )
    lefts = np.concatenate([[0.0], bounds[:-1]])
    refined = []
    for g in graphons:
        idx = np.searchsorted(g.boundaries, lefts + _WTOL, side="left")
        idx = np.clip(idx, 0, g.k - 1)
        refined.append(g.values[np.ix_(idx, idx)])
    return weights, refined


def regrid(w: StepGraphon, m: int) -> StepGraphon:
    """Resample onto m equal blocks by measure-weighted averaging.

    Averaging is L1-contractive, so regridding never increases distances.
    """
    if m < 1:
        raise InvalidInput("block count must be positive")
    bounds = w.boundaries
    lefts = np.concatenate([[0.0], bounds[:-1]])
    tgt_left = np.arange(m) / m
    tgt_right = np.arange(1, m + 1) / m
    overlap = np.maximum(
        0.0,
        np.minimum(tgt_right[:, None], bounds[None, :])
        - np.maximum(tgt_left[:, None], lefts[None, :]),
    )
    overlap *= m  # rows now sum to 1
    vals = overlap @ w.values @ overlap.T
    return StepGraphon(np.full(m, 1.0 / m), np.clip(vals, 0.0, 1.0))


def _align_equal_blocks(w1: StepGraphon, w2: StepGraphon, regrid_cap: int = 64):
    """Bring both graphons to the same number of equal-weight blocks."""
    if w1.has_equal_weights and w2.has_equal_weights:
        if w1.k == w2.k:
            return w1, w2
        m = math.lcm(w1.k, w2.k)
        if m <= regrid_cap:
            return regrid(w1, m), regrid(w2, m)
    m = max(w1.k, w2.k)
    if m > regrid_cap:
        raise BlockCountMismatch(
            f"cannot align block structures within {regrid_cap} equal blocks"
        )
    return regrid(w1, m), regrid(w2, m)


# ---------------------------------------------------------------------------
# Operations


def empirical_graphon(g: LabeledGraph) -> StepGraphon:
    """The n-block 0/1 graphon encoding a labeled graph's adjacency."""
    n = g.n
    return StepGraphon(np.full(n, 1.0 / n), g.adjacency.astype(float))


def _max_bilinear_cut(a: np.ndarray) -> float:
    """max over S,T subsets of blocks of |sum_{i in S, j in T} a_ij|.

    The objective is bilinear in the inclusion indicators, so the maximum is
    attained at 0/1 vertices; for fixed S the optimal T takes exactly the
    columns with positive (resp. negative) partial sums.
    """
    k = a.shape[0]
    split = min(k, 13)
    bits_lo = (np.arange(2**split)[:, None] >> np.arange(split)[None, :]) & 1
    sums_lo = bits_lo.astype(float) @ a[:split]
    best = 0.0
    hi = k - split
    if hi == 0:
        pos = np.maximum(sums_lo, 0.0).sum(axis=1).max()
        neg = np.maximum(-sums_lo, 0.0).sum(axis=1).max()
        return float(max(pos, neg))
    bits_hi = (np.arange(2**hi)[:, None] >> np.arange(hi)[None, :]) & 1
    sums_hi = bits_hi.astype(float) @ a[split:]
    for row in sums_hi:
        c = sums_lo + row
        pos = np.maximum(c, 0.0).sum(axis=1).max()
        neg = np.maximum(-c, 0.0).sum(axis=1).max()
        best = max(best, float(pos), float(neg))
    return best


def cut_norm_distance(
    w1: StepGraphon, w2: StepGraphon, cap: int = DEFAULT_BLOCK_CAP
) -> float:
    """Exact cut distance d_box(w1, w2) = sup_{S,T} |int_{SxT} (w1 - w2)|."""
    weights, (v1, v2) = common_refinement(w1, w2, cap=cap)
    a = weights[:, None] * weights[None, :] * (v1 - v2)
    return _max_bilinear_cut(a)


def _anneal_permutation(objective, k: int, seed: int, iters: int | None = None):
    """Seeded simulated annealing over permutations; returns (best_value, best_perm)."""
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    perm = np.arange(k)
    cur = objective(perm)
    best, best_perm = cur, perm.copy()
    if iters is None:
        iters = max(1500, 150 * k)
    # temperature scale from a handful of random transpositions
    probes = []
    p = perm.copy()
    for _ in range(8):
        i, j = rng.integers(0, k, size=2)
        p[i], p[j] = p[j], p[i]
        probes.append(objective(p))
    t0 = max(float(np.std(probes)), 1e-6)
    t_end = 1e-8
    decay = (t_end / t0) ** (1.0 / max(iters, 1))
    t = t0
    for _ in range(iters):
        i, j = rng.integers(0, k, size=2)
        if i == j:
            t *= decay
            continue
        perm[i], perm[j] = perm[j], perm[i]
        cand = objective(perm)
        if cand <= cur or rng.random() < math.exp(-(cand - cur) / t):
            cur = cand
            if cand < best:
                best, best_perm = cand, perm.copy()
        else:
            perm[i], perm[j] = perm[j], perm[i]
        t *= decay
    return best, best_perm


def _min_over_permutations(objective, k: int, mode: str, seed: int):
    if mode == "auto":
        mode = "exact" if k <= EXACT_PERM_LIMIT else "anneal"
    if mode == "exact":
        if k > EXACT_PERM_LIMIT:
            raise ExactModeTooLarge(
                f"exact permutation search limited to {EXACT_PERM_LIMIT} blocks, got {k}"
            )
        best, best_perm = math.inf, None
        for perm in itertools.permutations(range(k)):
            val = objective(np.asarray(perm))
            if val < best:
                best, best_perm = val, perm
        return best, np.asarray(best_perm)
    if mode == "anneal":
        return _anneal_permutation(objective, k, seed)
    raise InvalidInput(f"unknown mode {mode!r}")


def cut_metric_upper(
    w1: StepGraphon,
    w2: StepGraphon,
    mode: str = "auto",
    seed: int = 0,
    regrid_cap: int = 64,
) -> float:
    """min over block permutations of d_box(w1, w2 relabeled).

    This is an upper bound on the cut metric: the true infimum ranges over
    all measure-preserving maps, not only block permutations. Inputs with
    different block structures are resampled to a common equal-block grid
    first (the reported value then refers to the resampled pair).
    """
    a1, a2 = _align_equal_blocks(w1, w2, regrid_cap=regrid_cap)
    k = a1.k
    ww = np.full((k, k), 1.0 / (k * k))
    # constants are invariant under relabeling; skip the permutation search
    if np.ptp(a1.values) == 0.0 or np.ptp(a2.values) == 0.0:
        return _max_bilinear_cut(ww * (a1.values - a2.values))

    def objective(perm):
        diff = a1.values - a2.values[np.ix_(perm, perm)]
        return _max_bilinear_cut(ww * diff)

    best, _ = _min_over_permutations(objective, k, mode, seed)
    return float(best)


def lp_distance(
    w1: StepGraphon, w2: StepGraphon, p: int = 1, cap: int = DEFAULT_BLOCK_CAP
) -> float:
    """Exact blockwise L1 or L2 distance."""
    if p not in (1, 2):
        raise InvalidInput("p must be 1 or 2")
    weights, (v1, v2) = common_refinement(w1, w2, cap=cap)
    area = weights[:, None] * weights[None, :]
    diff = np.abs(v1 - v2)
    if p == 1:
        return float((area * diff).sum())
    return float(math.sqrt((area * diff**2).sum()))


def degree_function(w: StepGraphon) -> np.ndarray:
    """Per-block degrees f_i = sum_j weight_j * value_ij, each in [0,1]."""
    return w.values @ w.block_weights


def degree_distribution(w: StepGraphon) -> StepCDF:
    """Distribution function of the graphon degree: measure of {x: deg(x) <= lam}."""
    degs = degree_function(w)
    order = np.argsort(degs, kind="stable")
    jumps, masses = [], []
    for i in order:
        d = degs[i]
        if jumps and abs(d - jumps[-1]) <= 1e-15:
            masses[-1] += w.block_weights[i]
        else:
            jumps.append(float(d))
            masses.append(float(w.block_weights[i]))
    cdf = np.cumsum(masses)
    cdf[-1] = 1.0
    return StepCDF(np.asarray(jumps), cdf)


def levy_prokhorov(f1: StepCDF, f2: StepCDF, tol: float = 1e-12) -> float:
    """Smallest eps >= 0 with F2(l-eps)-eps <= F1(l) <= F2(l+eps)+eps for all l.

    Both sides are piecewise constant in l, so feasibility is checked at the
    jump points, their eps-shifts, and interval midpoints; eps is bisected.
    """

    def feasible(eps: float) -> bool:
        pts = np.concatenate(
            [
                f1.jumps,
                f2.jumps,
                f2.jumps - eps,
                f2.jumps + eps,
                f1.jumps - eps,
                f1.jumps + eps,
                [0.0, 1.0],
            ]
        )
        pts = np.unique(pts)
        pts = np.concatenate([pts, (pts[1:] + pts[:-1]) / 2.0])
        lhs_ok = np.all(f2.evaluate(pts - eps) - eps <= f1.evaluate(pts))
        rhs_ok = np.all(f1.evaluate(pts) <= f2.evaluate(pts + eps) + eps)
        return bool(lhs_ok and rhs_ok)

    if feasible(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def subgraph_density(
    h: SubgraphPattern, w: StepGraphon, work_cap: float = DEFAULT_WORK_CAP
) -> float:
    """Exact homomorphism density t(H, W) by tensor contraction over blocks."""
    k = w.k
    if k <= 0 or k ** h.num_vertices > work_cap:
        raise WorkCapExceeded(
            f"{k}^{h.num_vertices} block assignments exceed work cap {work_cap:g}"
        )
    letters = string.ascii_lowercase
    if h.num_vertices > len(letters):
        raise WorkCapExceeded("pattern too large")
    operands, subs = [], []
    for u, v in h.edges:
        operands.append(w.values)
        subs.append(letters[u] + letters[v])
    for u in range(h.num_vertices):
        operands.append(w.block_weights)
        subs.append(letters[u])
    expr = ",".join(subs) + "->"
    args = []
    for op, s in zip(operands, subs):
        args.extend([op, s])
    return float(np.einsum(expr, *operands, optimize=True))


def subgraph_density_gradient(h: SubgraphPattern, w: StepGraphon) -> np.ndarray:
    """d t(H, W) / d values, treating the k x k table entries as independent.

    For the shared symmetric parameterization, the derivative with respect to
    the unordered pair {a,b}, a != b, is grad[a,b] + grad[b,a].
    """
    k = w.k
    letters = string.ascii_lowercase
    grad = np.zeros((k, k))
    for skip in range(len(h.edges)):
        operands, subs = [], []
        for idx, (u, v) in enumerate(h.edges):
            if idx == skip:
                continue
            operands.append(w.values)
            subs.append(letters[u] + letters[v])
        for u in range(h.num_vertices):
            operands.append(w.block_weights)
            subs.append(letters[u])
        hu, hv = h.edges[skip]
        expr = ",".join(subs) + "->" + letters[hu] + letters[hv]
        grad += np.einsum(expr, *operands, optimize=True)
    return grad


def is_away_from_boundary(
    w: StepGraphon, eta: float, exclude_diagonal: bool = False
) -> bool:
    """True iff eta < value < 1-eta strictly on every block pair."""
    if not 0.0 < eta < 0.5:
        raise InvalidInput("eta must lie in (0, 0.5)")
    v = w.values
    if exclude_diagonal:
        mask = ~np.eye(w.k, dtype=bool)
        v = v[mask]
    return bool(np.all(v > eta) and np.all(v < 1.0 - eta))


def mix(
    w1: StepGraphon, w2: StepGraphon, lam: float, cap: int = DEFAULT_BLOCK_CAP
) -> StepGraphon:
    """Convex combination lam*w1 + (1-lam)*w2 on the common refinement."""
    if not 0.0 <= lam <= 1.0:
        raise InvalidInput("lambda must lie in [0, 1]")
    weights, (v1, v2) = common_refinement(w1, w2, cap=cap)
    return StepGraphon(weights, lam * v1 + (1.0 - lam) * v2)
