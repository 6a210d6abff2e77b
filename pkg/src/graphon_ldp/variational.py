"""Degree-constrained variational problems over block graphons.

Solves, on k equal blocks, the minimization of the relative-entropy rate
against the limiting graphon subject to an exact degree-function constraint
and a functional constraint tau(W) >= r or tau(W) = r, plus the induced
partition-function and asymptotic-counting values.

The optimizer is projected gradient on block values with a logit
reparameterization; the degree constraint is enforced after every step by an
exact closed-form correction (see degree_defect_correction), and the
functional constraint by penalty continuation with a final feasibility
restoration. Restarts are deterministic from their seeds and the reduction
to the best candidate uses a fixed sequential order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .degree import DegreeFunction, degree_measure, limit_graphon
from .errors import (
    DegenerateCorrection,
    Infeasible,
    InvalidInput,
    NonConvergence,
    RepairStalled,
)
from .functionals import Functional, resolve_functional
from .graphon import (
    StepGraphon,
    degree_distribution,
    levy_prokhorov,
    lp_distance,
    regrid,
)
from .rates import RateValue, counting_entropy, default_lp_tol, rate_J
from .sampling import make_rng

_V_FLOOR = 1e-9


def degree_defect_correction(a) -> np.ndarray:
    """Symmetric zero-diagonal w with row sums sum_{j != i} w_ij = a_i.

    Closed form w = M^T (M M^T)^{-1} a where M is the pair-incidence matrix;
    (M M^T)^{-1} = I/(n-2) - 11^T / (2(n-1)(n-2)), which gives
    w_ij = z_i + z_j with z = a/(n-2) - 1 * sum(a) / (2(n-1)(n-2)).
    Satisfies the sup-norm bound ||w||_inf <= 2 ||a||_inf / (n-2).
    """
    a = np.asarray(a, dtype=float).ravel()
    n = a.size
    if n < 3:
        raise InvalidInput("defect correction needs at least 3 blocks")
    z = a / (n - 2) - a.sum() / (2.0 * (n - 1) * (n - 2))
    w = z[:, None] + z[None, :]
    np.fill_diagonal(w, 0.0)
    return w


def repair_degrees(
    w: StepGraphon, target, tol: float = 1e-10, max_rounds: int = 100
) -> StepGraphon:
    """Adjust off-diagonal block values so the degree function equals target.

    Each round adds the exact closed-form correction for the current defect
    and clips back into [0,1]; with no clipping a single round lands exactly.
    Raises RepairStalled when clipping keeps blocking the correction, which
    signals that the target is infeasible from this graphon.
    """
    if not w.has_equal_weights:
        raise InvalidInput("degree repair requires equal-weight blocks")
    n = w.k
    target = np.asarray(target, dtype=float).ravel()
    if target.size != n:
        raise InvalidInput("target must have one entry per block")
    v = np.array(w.values, copy=True)
    for _ in range(max_rounds):
        defect = target - v.mean(axis=1)
        if np.max(np.abs(defect)) <= tol:
            return StepGraphon(w.block_weights, v)
        v = np.clip(v + degree_defect_correction(n * defect), 0.0, 1.0)
    defect = target - v.mean(axis=1)
    if np.max(np.abs(defect)) <= tol:
        return StepGraphon(w.block_weights, v)
    raise RepairStalled(
        f"degree defect {np.max(np.abs(defect)):.3e} after {max_rounds} rounds; "
        "target appears infeasible from this graphon"
    )


def step_approximation(
    g: StepGraphon, f_target, tol: float = 1e-10, strict_rank_one: bool = False
) -> StepGraphon:
    """Zero-diagonal block graphon close to g with exact row integrals f_target.

    Three stages: resample g onto the target grid, add the rank-one
    correction eps(x) eps(y) / int(eps) that mends the degree function, then
    zero the diagonal blocks and restore exact row sums through
    repair_degrees. When int(eps) vanishes but eps does not, the rank-one
    step is skipped and the repair alone absorbs the defect (or
    DegenerateCorrection is raised when strict_rank_one is set).
    """
    f_target = np.asarray(f_target, dtype=float).ravel()
    k = f_target.size
    if g.k != k or not g.has_equal_weights:
        g = regrid(g, k)
    v = np.array(g.values, copy=True)
    eps = f_target - v.mean(axis=1)
    mass = eps.sum() / k
    if np.max(np.abs(eps)) > 1e-14:
        if abs(mass) > 1e-14:
            v = v + np.outer(eps, eps) / (mass * k)
        elif strict_rank_one:
            raise DegenerateCorrection(
                "degree defect has zero mean; rank-one correction undefined"
            )
    v = np.clip(v, 0.0, 1.0)
    np.fill_diagonal(v, 0.0)
    return repair_degrees(StepGraphon(g.block_weights, v), f_target, tol=tol)


# ---------------------------------------------------------------------------
# Constrained solver


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the projected-gradient solver; JSON-friendly."""

    k: int = 16
    seeds: tuple = (0, 1, 2, 3)
    max_iter: int = 300
    step_size: float = 0.5
    penalty_schedule: tuple = (1e2, 1e3, 1e4, 1e5)
    lp_tol: float | None = None
    tau_tol: float = 1e-4
    threads: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "SolverOptions":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(data) - known
        if bad:
            raise InvalidInput(f"unknown solver options: {sorted(bad)}")
        data = dict(data)
        for key in ("seeds", "penalty_schedule"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


@dataclass(frozen=True)
class VariationalResult:
    """Solver output: the certified rate of the best feasible minimizer."""

    value: float
    minimizer: StepGraphon
    certificate: RateValue
    constraint_residuals: tuple
    restarts_used: int


def _logit(v):
    return np.log(v) - np.log1p(-v)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _project(v: np.ndarray, target: np.ndarray, rounds: int = 60):
    """Degree projection usable inside the descent loop; None on stall."""
    n = v.shape[0]
    for _ in range(rounds):
        defect = target - v.mean(axis=1)
        if np.max(np.abs(defect)) <= 1e-11:
            return np.clip(v, _V_FLOOR, 1.0 - _V_FLOOR)
        v = np.clip(v + degree_defect_correction(n * defect), _V_FLOOR, 1.0 - _V_FLOOR)
    return None


class _Objective:
    """I(V || V_D) plus a penalty or linear term in tau."""

    def __init__(self, v_base: np.ndarray, fn: Functional, weights: np.ndarray):
        self.v_base = v_base
        self.logit_base = _logit(v_base)
        self.fn = fn
        k = v_base.shape[0]
        self.area = np.outer(weights, weights)
        self.weights = weights

    def entropy(self, v):
        t = v * (np.log(v) - np.log(self.v_base)) + (1.0 - v) * (
            np.log1p(-v) - np.log1p(-self.v_base)
        )
        return float(0.5 * (self.area * t).sum())

    def entropy_grad(self, v):
        return 0.5 * self.area * (_logit(v) - self.logit_base)

    def tau(self, v, weights):
        return self.fn.value(StepGraphon(weights, v))

    def tau_grad(self, v, weights):
        return self.fn.gradient(StepGraphon(weights, v))


def _descend(v0, obj: _Objective, target, kind, r, rho, opts, include_entropy=True,
             tau_sense=0.0, max_iter=None):
    """One penalized stage; returns the improved value matrix."""
    v = np.array(v0, copy=True)
    weights = obj.weights
    lr = opts.step_size
    iters = opts.max_iter if max_iter is None else max_iter

    def f_and_grad(vv):
        val = 0.0
        grad = np.zeros_like(vv)
        if include_entropy:
            val += obj.entropy(vv)
            grad += obj.entropy_grad(vv)
        tau = obj.tau(vv, weights)
        if tau_sense:
            val += tau_sense * tau
            grad += tau_sense * obj.tau_grad(vv, weights)
        if rho:
            if kind == "ge":
                gap = max(0.0, r - tau)
                val += rho * gap * gap
                if gap > 0.0:
                    grad += rho * (-2.0 * gap) * obj.tau_grad(vv, weights)
            elif kind == "eq":
                gap = tau - r
                val += rho * gap * gap
                grad += rho * (2.0 * gap) * obj.tau_grad(vv, weights)
        return val, grad

    f_cur, g_cur = f_and_grad(v)
    for _ in range(iters):
        step = g_cur * v * (1.0 - v)
        scale = np.max(np.abs(step))
        if scale < 1e-15:
            break
        # normalized step: integral-functional gradients scale like 1/k^2,
        # so raw steps would stall at moderate block counts
        theta = _logit(v) - (lr / scale) * step
        cand = _project(_sigmoid(theta), target)
        if cand is None:
            lr *= 0.5
            if lr < 1e-10:
                break
            continue
        f_new, g_new = f_and_grad(cand)
        if f_new <= f_cur - 1e-15 * (abs(f_cur) + 1e-15):
            v, f_cur, g_cur = cand, f_new, g_new
            lr = min(lr * 1.3, 4.0)
        else:
            lr *= 0.5
            if lr < 1e-10:
                break
    return v


def _restore_tau(v, obj, target, r_target, kind, iters: int = 8):
    """Scalar Newton along the tau gradient (degree-projected) onto the boundary."""
    weights = obj.weights
    for _ in range(iters):
        tau = obj.tau(v, weights)
        gap = r_target - tau
        if kind == "ge" and gap <= 0.0:
            return v
        if kind == "eq" and abs(gap) < 1e-13:
            return v
        g_theta = obj.tau_grad(v, weights) * v * (1.0 - v)
        denom = float((g_theta * g_theta).sum())
        if denom < 1e-30:
            return v
        theta = _logit(v) + (gap / denom) * g_theta
        cand = _project(_sigmoid(theta), target)
        if cand is None:
            return v
        v = cand
    return v


def _polish(v, obj, target, kind, r, opts, iters: int = 400):
    """Reduced-gradient descent along the active constraint boundary.

    Penalty continuation leaves the iterate near the boundary but makes
    tangential progress vanish as the weight grows; this phase steps along
    the entropy gradient with the tau direction projected out, then restores
    tau and the degrees exactly.
    """
    weights = obj.weights
    band = 10.0 * opts.tau_tol
    r_target = r + 0.25 * opts.tau_tol if kind == "ge" else r
    lr = opts.step_size
    f_cur = obj.entropy(v)
    for _ in range(iters):
        tau = obj.tau(v, weights)
        g_i = obj.entropy_grad(v) * v * (1.0 - v)
        active = kind == "eq" or tau <= r + band
        if active:
            g_t = obj.tau_grad(v, weights) * v * (1.0 - v)
            denom = float((g_t * g_t).sum())
            if denom > 1e-30:
                mu = float((g_i * g_t).sum()) / denom
                if kind == "ge":
                    mu = max(mu, 0.0)
                g_i = g_i - mu * g_t
        scale = np.max(np.abs(g_i))
        if scale < 1e-15:
            break
        cand = _project(_sigmoid(_logit(v) - (lr / scale) * g_i), target)
        if cand is not None:
            cand = _restore_tau(cand, obj, target, r_target, kind)
            cand = _project(cand, target) if cand is not None else None
        ok = cand is not None
        if ok:
            tau_c = obj.tau(cand, weights)
            if kind == "ge":
                ok = tau_c >= r - 1e-12
            else:
                ok = abs(tau_c - r) <= opts.tau_tol
        if ok:
            f_new = obj.entropy(cand)
            if f_new <= f_cur - 1e-15 * (abs(f_cur) + 1e-15):
                v, f_cur = cand, f_new
                lr = min(lr * 1.3, 4.0)
                continue
        lr *= 0.5
        if lr < 1e-10:
            break
    return v


def _build_starts(v_d, target, opts, warm_starts):
    k = v_d.shape[0]
    starts = [np.array(v_d, copy=True)]
    for w in warm_starts:
        vv = _project(np.clip(np.asarray(w, dtype=float), _V_FLOOR, 1 - _V_FLOOR), target)
        if vv is not None:
            starts.append(vv)
    # extremal candidates: the constant limit is a projected saddle for many
    # subgraph densities, so symmetry must be broken structurally; mixes with
    # the limit graphon cover small deformations along the same valleys
    h = max(k // 2, 1)
    q = max(k // 4, 1)
    extremes = []
    two_community = np.array(v_d, copy=True)
    two_community[:h, :h] = 0.95
    two_community[h:, h:] = 0.95
    two_community[:h, h:] = 0.05
    two_community[h:, :h] = 0.05
    extremes.append(two_community)
    clique = np.array(v_d, copy=True)
    clique[:q, :q] = 0.95
    extremes.append(clique)
    hole = np.array(v_d, copy=True)
    hole[:q, :q] = 0.05
    extremes.append(hole)
    for ex in extremes:
        for lam in (0.1, 0.3, 1.0):
            vv = lam * ex + (1.0 - lam) * v_d
            vv = _project(np.clip(vv, _V_FLOOR, 1 - _V_FLOOR), target)
            if vv is not None:
                starts.append(vv)
    base_logit = _logit(v_d)
    for seed in opts.seeds:
        rng = make_rng(int(seed))
        noise = rng.normal(0.0, 1.5, size=(k, k))
        noise = (noise + noise.T) / 2.0
        vv = _project(_sigmoid(base_logit + noise), target)
        if vv is not None:
            starts.append(vv)
    return starts


def _extremize_tau(obj, starts, target, opts, sense):
    """Best achievable tau over the degree set; sense=+1 max, -1 min."""
    best = -np.inf if sense > 0 else np.inf
    for v0 in starts:
        v = _descend(
            v0, obj, target, kind=None, r=0.0, rho=0.0, opts=opts,
            include_entropy=False, tau_sense=-float(sense),
        )
        tau = obj.tau(v, obj.weights)
        best = max(best, tau) if sense > 0 else min(best, tau)
    return best


def _solve(d_fun: DegreeFunction, tau, r, kind, k, opts, params=None, warm_starts=()):
    if k < 3:
        raise InvalidInput("variational solver needs k >= 3 blocks")
    fn = resolve_functional(tau, params)
    w_d, _ = limit_graphon(d_fun, k)
    target = d_fun.block_average(k)
    weights = np.full(k, 1.0 / k)
    v_d = np.clip(w_d.values, _V_FLOOR, 1.0 - _V_FLOOR)
    obj = _Objective(v_d, fn, weights)
    starts = _build_starts(v_d, target, opts, warm_starts)

    # a slightly shifted penalty target makes finite-weight minimizers land
    # just above r, so the inequality holds without a restoration detour
    r_pen = r + 0.5 * opts.tau_tol if kind == "ge" else r

    def is_feasible(tau_v):
        if kind == "ge":
            return tau_v >= r - opts.tau_tol
        return abs(tau_v - r) <= opts.tau_tol

    def run_start(v0):
        candidates = []
        # direct boundary path: climb straight onto the constraint surface and
        # ride it; penalty continuation alone regresses well-placed starts
        vb = _restore_tau(np.array(v0, copy=True), obj, target, r_pen, kind)
        if is_feasible(obj.tau(vb, weights)):
            vb = _polish(vb, obj, target, kind, r, opts)
            candidates.append(vb)
        # penalty continuation path for exploration
        v = np.array(v0, copy=True)
        for rho in opts.penalty_schedule:
            v = _descend(v, obj, target, kind, r_pen, rho, opts)
        tau_v = obj.tau(v, weights)
        if kind == "ge" and tau_v < r - opts.tau_tol:
            v2 = _descend(
                v, obj, target, kind="ge", r=r_pen,
                rho=opts.penalty_schedule[-1] * 100.0, opts=opts,
                include_entropy=False,
            )
            if obj.tau(v2, weights) >= r - opts.tau_tol:
                v = v2
                tau_v = obj.tau(v, weights)
        if is_feasible(tau_v):
            v = _polish(v, obj, target, kind, r, opts)
        candidates.append(v)
        best = min(
            candidates,
            key=lambda vv: (
                not is_feasible(obj.tau(vv, weights)),
                obj.entropy(vv),
            ),
        )
        return best, obj.entropy(best), obj.tau(best, weights)

    if opts.threads > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as ex:
            results = list(ex.map(run_start, starts))
    else:
        results = [run_start(v0) for v0 in starts]

    def residual(tau_v):
        if kind == "ge":
            return max(0.0, r - tau_v)
        return abs(tau_v - r)

    feasible = [
        (i, v, ival, tau_v)
        for i, (v, ival, tau_v) in enumerate(results)
        if residual(tau_v) <= opts.tau_tol
    ]
    if not feasible:
        tau_hi = _extremize_tau(obj, starts, target, opts, sense=+1)
        if kind == "ge":
            if r > tau_hi + opts.tau_tol:
                raise Infeasible(
                    f"threshold {r} exceeds the attainable maximum {tau_hi:.6g} "
                    "of the functional on the degree set"
                )
        else:
            tau_lo = _extremize_tau(obj, starts, target, opts, sense=-1)
            if r > tau_hi + opts.tau_tol or r < tau_lo - opts.tau_tol:
                raise Infeasible(
                    f"target {r} outside the attainable range "
                    f"[{tau_lo:.6g}, {tau_hi:.6g}] on the degree set"
                )
        raise NonConvergence(
            "no restart reached the functional constraint although it appears "
            "attainable; increase max_iter or the penalty schedule"
        )

    # deterministic reduction: best entropy, ties by L1 distance to the limit
    w_d_graphon = StepGraphon(weights, v_d)
    scored = []
    for i, v, ival, tau_v in feasible:
        cand = StepGraphon(weights, v)
        scored.append((ival, lp_distance(cand, w_d_graphon, 1), i, cand, tau_v))
    scored.sort(key=lambda t: (t[0], t[1], t[2]))
    _, _, _, best, best_tau = scored[0]

    cert = rate_J(best, w_d_graphon, mode="auto", seed=0)
    lp_res = levy_prokhorov(degree_distribution(best), degree_measure(d_fun))
    return VariationalResult(
        value=cert.value,
        minimizer=best,
        certificate=cert,
        constraint_residuals=(float(lp_res), float(residual(best_tau))),
        restarts_used=len(starts),
    )


def solve_phi(
    d_fun: DegreeFunction,
    tau,
    r: float,
    k: int = 16,
    opts: SolverOptions | None = None,
    params: dict | None = None,
    warm_starts=(),
) -> VariationalResult:
    """min of the degree-constrained rate over {tau(W) >= r} on k blocks.

    Returns the certified rate (permutation-minimized relative entropy) of
    the best feasible minimizer; the true infimum ranges over all graphons,
    so this is an upper bound at the solver's block resolution.
    """
    opts = opts or SolverOptions(k=k)
    return _solve(d_fun, tau, r, "ge", k, opts, params, warm_starts)


def solve_psi(
    d_fun: DegreeFunction,
    tau,
    r: float,
    k: int = 16,
    opts: SolverOptions | None = None,
    params: dict | None = None,
    warm_starts=(),
) -> VariationalResult:
    """Same as solve_phi with the equality constraint |tau(W) - r| <= tau_tol."""
    opts = opts or SolverOptions(k=k)
    return _solve(d_fun, tau, r, "eq", k, opts, params, warm_starts)


def limit_partition_Z(
    d_fun: DegreeFunction,
    tau,
    k: int = 16,
    opts: SolverOptions | None = None,
    params: dict | None = None,
) -> float:
    """sup over degree-constrained k-block W of (tau - rate) plus the entropy term."""
    opts = opts or SolverOptions(k=k)
    if k < 3:
        raise InvalidInput("variational solver needs k >= 3 blocks")
    fn = resolve_functional(tau, params)
    w_d, _ = limit_graphon(d_fun, k)
    target = d_fun.block_average(k)
    weights = np.full(k, 1.0 / k)
    v_d = np.clip(w_d.values, _V_FLOOR, 1.0 - _V_FLOOR)
    obj = _Objective(v_d, fn, weights)
    starts = _build_starts(v_d, target, opts, ())
    best = -np.inf
    for v0 in starts:
        v = _descend(
            v0, obj, target, kind=None, r=0.0, rho=0.0, opts=opts, tau_sense=-1.0
        )
        best = max(best, obj.tau(v, weights) - obj.entropy(v))
    ce = counting_entropy(d_fun, k)
    return float(best + ce.value)


@dataclass(frozen=True)
class AsymptoticCount:
    """Asymptotic exponent for the constrained counting problem."""

    value: float
    phi: VariationalResult
    entropy: float


def count_asymptotic(
    d_fun: DegreeFunction,
    tau,
    r: float,
    k: int = 16,
    opts: SolverOptions | None = None,
    params: dict | None = None,
) -> AsymptoticCount:
    """-phi(D, r) plus the counting entropy of the limiting graphon."""
    phi = solve_phi(d_fun, tau, r, k=k, opts=opts, params=params)
    ce = counting_entropy(d_fun, k)
    return AsymptoticCount(value=float(-phi.value + ce.value), phi=phi, entropy=ce.value)
