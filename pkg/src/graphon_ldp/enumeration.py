"""Exact brute-force ground truth at small n.

Enumeration of all labeled simple graphs with a given degree sequence,
constrained counts, microcanonical partition functions, and the exact
finite-n identity tying the degree-fiber probability of the fitted edge
model to the fiber size. Everything here is exact; it is the oracle layer
the asymptotic machinery is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, inf, log

import numpy as np

from .degree import _as_degree_array, erdos_gallai, solve_beta, surrogate_beta
from .errors import InvalidInput, NonConvergence, NotGraphical, TooLarge, ZeroHits
from .functionals import resolve_functional
from .graphon import LabeledGraph, empirical_graphon
from .sampling import beta_log_likelihood, rejection_sample_stream, switch_sample_stream

ENUM_CAP = 12
COUNT_CAP = 20
SCAN_CAP = 7

_Z975 = 1.959963984540054


def _suffix_graphical(residual) -> bool:
    """Erdos-Gallai feasibility of a residual sequence on its own vertex set."""
    s = sorted(residual, reverse=True)
    n = len(s)
    if n == 0:
        return True
    if s[0] > n - 1 or sum(s) % 2 != 0:
        return False
    prefix = 0
    for k in range(1, n + 1):
        prefix += s[k - 1]
        tail = sum(min(x, k) for x in s[k:])
        if prefix > k * (k - 1) + tail:
            return False
    return True


def enumerate_graphs(d, cap: int = ENUM_CAP):
    """Yield every labeled simple graph whose vertex i has degree d_i.

    Pruned DFS over vertices: vertex i picks its neighbors among later
    vertices, and each partial choice is kept only when the residual sequence
    stays graphical. Hard cap n <= ``cap``.
    """
    arr = _as_degree_array(d)
    n = arr.size
    if n > cap:
        raise TooLarge(f"enumeration capped at n <= {cap}, got n = {n}")
    if np.any(arr < 0) or np.any(arr > n - 1) or arr.sum() % 2 != 0:
        return
    residual = arr.astype(int).tolist()
    edges: list[tuple[int, int]] = []

    def rec(i: int):
        if i == n:
            yield LabeledGraph.from_edges(n, edges)
            return
        need = residual[i]
        if need == 0:
            yield from rec(i + 1)
            return
        candidates = [j for j in range(i + 1, n) if residual[j] > 0]
        if need > len(candidates):
            return
        for chosen in combinations(candidates, need):
            for j in chosen:
                residual[j] -= 1
            residual[i] = 0
            if _suffix_graphical(residual[i + 1 :]):
                edges.extend((i, j) for j in chosen)
                yield from rec(i + 1)
                del edges[-need:]
            for j in chosen:
                residual[j] += 1
            residual[i] = need

    yield from rec(0)


def count_graphs(d, cap: int = COUNT_CAP) -> int:
    """|{labeled simple graphs with degree sequence d}|, exact.

    Memoized peel-one-vertex recursion on the residual degree multiset;
    agrees with enumerate_graphs wherever both run, but scales far beyond it.
    """
    arr = _as_degree_array(d)
    n = arr.size
    if n > cap:
        raise TooLarge(f"exact counting capped at n <= {cap}, got n = {n}")
    if np.any(arr < 0) or np.any(arr > n - 1) or arr.sum() % 2 != 0:
        return 0
    memo: dict[tuple, int] = {}

    def rec(state: tuple) -> int:
        if not state:
            return 1
        cached = memo.get(state)
        if cached is not None:
            return cached
        r, rest = state[0], state[1:]
        if r > len(rest):
            memo[state] = 0
            return 0
        groups: list[tuple[int, int]] = []
        for v in rest:
            if groups and groups[-1][0] == v:
                groups[-1] = (v, groups[-1][1] + 1)
            else:
                groups.append((v, 1))
        total = 0

        def assign(gi: int, left: int, picks: list[int]):
            nonlocal total
            if gi == len(groups):
                if left:
                    return
                counts: dict[int, int] = {}
                for (v, m), c in zip(groups, picks):
                    if m - c:
                        counts[v] = counts.get(v, 0) + (m - c)
                    if c and v - 1 > 0:
                        counts[v - 1] = counts.get(v - 1, 0) + c
                new_state = []
                for v in sorted(counts, reverse=True):
                    new_state.extend([v] * counts[v])
                ways = 1
                for (_, m), c in zip(groups, picks):
                    ways *= comb(m, c)
                total += ways * rec(tuple(new_state))
                return
            m = groups[gi][1]
            avail = sum(g[1] for g in groups[gi + 1 :])
            for c in range(max(0, left - avail), min(m, left) + 1):
                picks.append(c)
                assign(gi + 1, left - c, picks)
                picks.pop()

        assign(0, r, [])
        memo[state] = total
        return total

    start = tuple(sorted((int(x) for x in arr if x > 0), reverse=True))
    return rec(start)


def count_with_functional(d, tau, r: float, params: dict | None = None) -> int:
    """#{G with degree sequence d : tau(empirical graphon of G) >= r}."""
    fn = resolve_functional(tau, params)
    return sum(
        1 for g in enumerate_graphs(d) if fn.value(empirical_graphon(g)) >= r
    )


def partition_function(d, tau, params: dict | None = None, scale: float | None = None) -> float:
    """(1/n^2) log sum over the degree fiber of e^{n^2 tau(G)}.

    Computed with a max-shifted log-sum-exp so the n^2 scaling cannot
    overflow.
    """
    arr = _as_degree_array(d)
    n = arr.size
    s = float(scale) if scale is not None else float(n * n)
    fn = resolve_functional(tau, params)
    taus = [fn.value(empirical_graphon(g)) for g in enumerate_graphs(arr)]
    if not taus:
        raise NotGraphical("degree sequence has no realizations")
    taus = np.asarray(taus)
    m = taus.max()
    return float(m + np.log(np.exp(s * (taus - m)).sum()) / s)


@dataclass(frozen=True)
class IdentityReport:
    """Exact finite-n check of the degree-fiber likelihood identity."""

    n: int
    count: int
    log_lhs: float
    log_rhs: float
    relative_residual: float
    beta: np.ndarray
    beta_converged: bool


def verify_deg_partition_identity(d, beta=None, scan_cap: int = SCAN_CAP) -> IdentityReport:
    """Check P(deg = d under the fitted model) == |fiber| * fiber likelihood.

    The left side is a brute-force scan over all 2^(n(n-1)/2) graphs; the
    right side is count_graphs(d) times the closed-form likelihood. The
    identity is exact at every finite n for any finite parameter vector, so
    boundary degree sequences fall back to the surrogate parameters.
    """
    arr = _as_degree_array(d)
    n = arr.size
    if n > scan_cap:
        raise TooLarge(f"full graph scan capped at n <= {scan_cap}, got n = {n}")
    cnt = count_graphs(arr)
    if cnt == 0:
        raise NotGraphical("degree sequence has no realizations")
    converged = True
    if beta is None:
        try:
            beta = solve_beta(arr)
        except NonConvergence:
            beta = surrogate_beta(arr)
            converged = False
    bvec = np.asarray(getattr(beta, "beta", beta), dtype=float)

    iu = np.triu_indices(n, k=1)
    m = iu[0].size
    pair = bvec[:, None] + bvec[None, :]
    p = 1.0 / (1.0 + np.exp(-pair[iu]))
    log_p = np.log(p)
    log_q = np.log1p(-p)
    inc = np.zeros((m, n), dtype=np.uint8)
    inc[np.arange(m), iu[0]] = 1
    inc[np.arange(m), iu[1]] = 1

    base = log_q.sum()
    coef = log_p - log_q
    total = 0.0
    chunk = 1 << 18
    for lo in range(0, 1 << m, chunk):
        hi = min(lo + chunk, 1 << m)
        masks = np.arange(lo, hi, dtype=np.uint64)
        bits = ((masks[:, None] >> np.arange(m, dtype=np.uint64)[None, :]) & 1).astype(
            np.uint8
        )
        degs = bits @ inc
        match = np.all(degs == arr[None, :].astype(np.uint8), axis=1)
        if match.any():
            total += np.exp(base + bits[match].astype(float) @ coef).sum()
    log_lhs = log(total)
    log_rhs = log(cnt) + beta_log_likelihood(arr, bvec)
    rel = abs(np.expm1(log_lhs - log_rhs))
    return IdentityReport(
        n=n,
        count=cnt,
        log_lhs=float(log_lhs),
        log_rhs=float(log_rhs),
        relative_residual=float(rel),
        beta=bvec,
        beta_converged=converged,
    )


@dataclass(frozen=True)
class LdpEstimate:
    """(1/n^2) log P(event) estimate with a Wilson confidence interval."""

    rate: float
    ci_low: float
    ci_high: float
    hits: int
    samples: int
    exact: bool


def _wilson(hits: int, m: int):
    z2 = _Z975 * _Z975
    phat = hits / m
    denom = 1.0 + z2 / m
    center = (phat + z2 / (2 * m)) / denom
    half = _Z975 * np.sqrt(phat * (1 - phat) / m + z2 / (4 * m * m)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def ldp_rate_estimate(
    d,
    tau,
    r: float,
    params: dict | None = None,
    n_samples: int = 10000,
    seed: int | None = None,
    method: str = "auto",
    sampler: str = "rejection",
    enum_cap: int = ENUM_CAP,
) -> LdpEstimate:
    """(1/n^2) log frequency of {tau >= r} under the uniform degree fiber.

    Exact via enumeration when the sequence is enumerable, otherwise Monte
    Carlo with the requested sampler. A never-observed event raises ZeroHits
    carrying the Wilson upper bound on the rate.
    """
    arr = _as_degree_array(d)
    n = arr.size
    n2 = float(n * n)
    if method == "auto":
        method = "exact" if n <= enum_cap else "mc"
    if method == "exact":
        total = count_graphs(arr)
        if total == 0:
            raise NotGraphical("degree sequence has no realizations")
        hits = count_with_functional(arr, tau, r, params)
        if hits == 0:
            raise ZeroHits(
                "event has probability exactly zero on the fiber",
                upper_bound=-inf,
            )
        rate = log(hits / total) / n2
        return LdpEstimate(rate, rate, rate, hits, total, exact=True)
    if seed is None:
        raise InvalidInput("Monte Carlo estimation requires a seed")
    fn = resolve_functional(tau, params)
    if sampler == "rejection":
        stream = rejection_sample_stream(arr, seed, n_samples)
    elif sampler == "switch":
        stream = switch_sample_stream(arr, seed, n_samples)
    else:
        raise InvalidInput(f"unknown sampler {sampler!r}")
    hits = 0
    for g in stream:
        if fn.value(empirical_graphon(g)) >= r:
            hits += 1
    lo, hi = _wilson(hits, n_samples)
    if hits == 0:
        raise ZeroHits(
            f"event unseen in {n_samples} samples",
            upper_bound=log(hi) / n2,
        )
    rate = log(hits / n_samples) / n2
    return LdpEstimate(
        rate,
        log(lo) / n2 if lo > 0 else -inf,
        log(hi) / n2,
        hits,
        n_samples,
        exact=False,
    )
