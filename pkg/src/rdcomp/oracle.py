"""Brute-force verification of solver outputs on small instances.

The oracle minimizes I(X;U|Y) over recovery-atom channels with projected
(sub)gradient descent: Euclidean simplex projection per source column, a
hinge penalty with escalating weight for the distortion budget (an exact
penalty once the weight clears the curve slope), backtracking line search
and many seeded restarts. Residual infeasibility is repaired by mixing
toward the cheapest channel, which is linear in the mix weight. A separate
exhaustive grid search covers instances where symmetry and domination
pruning leave at most three free parameters. The oracle deliberately shares
no iteration code with the alternating solver: both approximate the same
convex minimum from above by different routes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, Infeasible, InstanceTooLarge
from .info import conditional_mutual_information, expected_distortion
from .model import ProblemSpec, min_achievable_distortion
from .solver import RDPoint

_LN2 = math.log(2.0)
#: Accept feasibility up to this slack so boundary optima are not rejected.
FEASIBILITY_SLACK = 1e-9
#: Total grid points are capped; 3-parameter grids coarsen to fit.
MAX_GRID_POINTS = 2_000_000
#: Hinge-penalty weights (nats per unit distortion, before d-scaling).
PENALTY_SCHEDULE = (2.0, 8.0, 32.0, 128.0, 512.0)
#: Dirichlet concentrations cycled across restarts.
DIRICHLET_SCHEDULE = (1.0, 0.3, 3.0)


@dataclass(frozen=True)
class OracleConfig:
    grid_resolution: float = 1e-3
    random_restarts: int = 256
    rng_seed: int = 1729
    max_alphabet_product: int = 64

    def __post_init__(self):
        if not 0 < self.grid_resolution <= 0.5:
            raise DomainError("grid_resolution must lie in (0, 0.5]")
        if self.random_restarts < 1 or self.max_alphabet_product < 1:
            raise DomainError("oracle caps must be positive")


@dataclass(frozen=True)
class OracleReport:
    """Outcome of one solver-vs-oracle comparison."""

    oracle_rate: float
    solver_rate: float
    gap: float
    distortion_target: float
    column_sum_residual: float
    rate_residual: float
    distortion_residual: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "oracle_rate_bits": self.oracle_rate,
            "solver_rate_bits": self.solver_rate,
            "gap_bits": self.gap,
            "distortion_target": self.distortion_target,
            "column_sum_residual": self.column_sum_residual,
            "rate_residual": self.rate_residual,
            "distortion_residual": self.distortion_residual,
            "tolerance_bits": self.tolerance,
            "passed": self.passed,
        }


class _Instance:
    """Arrays reused by every restart of one oracle run."""

    def __init__(self, spec: ProblemSpec):
        self.spec = spec
        self.p_x = spec.x_marginal
        self.p_y = spec.y_marginal
        self.p_xgy = spec.x_given_y()  # (X, Y)
        self.b = spec.y_given_x().T    # (Y, X)
        recs = list(itertools.product(range(spec.num_zhat), repeat=spec.num_y))
        self.rec_table = np.array(recs, dtype=int)  # (U, Y)
        dvals = spec.dist[spec.func[None, :, :], self.rec_table[:, None, :]]
        self.cost = np.einsum("uxy,xy->ux", dvals, spec.y_given_x())  # (U, X)
        self.cost_w = self.cost * self.p_x[None, :]
        # channel putting each source symbol on its own cheapest atom
        floor = np.zeros_like(self.cost)
        floor[np.argmin(self.cost, axis=0), np.arange(spec.num_x)] = 1.0
        self.floor_channel = floor
        self.floor_distortion = float((self.cost_w * floor).sum())
        self.floor_info = self.info_nats(floor)

    @property
    def num_atoms(self) -> int:
        return self.rec_table.shape[0]

    def info_nats(self, w: np.ndarray) -> float:
        q = w @ self.p_xgy  # (U, Y)
        h_ux = float((_xlnx(w) * self.p_x[None, :]).sum())
        h_uy = float((_xlnx(q) * self.p_y[None, :]).sum())
        return max(h_ux - h_uy, 0.0)

    def distortion(self, w: np.ndarray) -> float:
        return float((self.cost_w * w).sum())

    def info_gradient(self, w: np.ndarray) -> np.ndarray:
        q = w @ self.p_xgy
        ln_w = np.log(np.maximum(w, 1e-30))
        ln_q = np.log(np.maximum(q, 1e-30))
        return self.p_x[None, :] * (ln_w - ln_q @ self.b)


def _xlnx(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = v[pos] * np.log(v[pos])
    return out


def _project_columns(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of every column onto the probability simplex."""
    u = np.sort(v, axis=0)[::-1]
    css = np.cumsum(u, axis=0) - 1.0
    ks = np.arange(1, v.shape[0] + 1, dtype=float)[:, None]
    cond = u - css / ks > 0
    rho = v.shape[0] - 1 - np.argmax(cond[::-1], axis=0)
    theta = css[rho, np.arange(v.shape[1])] / (rho + 1.0)
    return np.maximum(v - theta[None, :], 0.0)


def _repair_feasibility(inst: _Instance, w: np.ndarray, budget: float) -> np.ndarray:
    """Mix toward the cheapest channel until the budget holds (distortion is
    linear in the mix weight, so the smallest sufficient weight is exact)."""
    excess = inst.distortion(w) - budget
    if excess <= 0:
        return w
    denom = inst.distortion(w) - inst.floor_distortion
    if denom <= 0:
        return w
    t = min(1.0, excess / denom + 1e-15)
    return (1.0 - t) * w + t * inst.floor_channel


def _descent_run(
    inst: _Instance,
    budget: float,
    mu: float,
    rng: np.random.Generator,
    alpha: float,
    max_iters: int = 250,
) -> float:
    """One penalized projected-descent run; returns a feasible I in nats."""
    w = rng.dirichlet(np.full(inst.num_atoms, alpha), size=inst.spec.num_x).T
    w = _repair_feasibility(inst, _project_columns(w), budget)

    def objective(p):
        return inst.info_nats(p) + mu * max(0.0, inst.distortion(p) - budget)

    value = objective(w)
    step = 0.5
    stalls = 0
    for _ in range(max_iters):
        grad = inst.info_gradient(w)
        if inst.distortion(w) > budget:
            grad = grad + mu * inst.cost_w
        accepted = False
        for _ in range(30):
            cand = _project_columns(w - step * grad)
            cand_value = objective(cand)
            if cand_value <= value + 1e-4 * float((grad * (cand - w)).sum()) + 1e-15:
                accepted = True
                break
            step *= 0.5
        if not accepted or step < 1e-14:
            break
        drop = value - cand_value
        w, value = cand, cand_value
        step = min(step * 1.3, 10.0)
        stalls = stalls + 1 if drop < 1e-13 * max(1.0, abs(value)) else 0
        if stalls >= 4:
            break
    w = _repair_feasibility(inst, w, budget)
    return inst.info_nats(w)


def _unique_undominated_atoms(inst: _Instance) -> list[int]:
    """Prune atoms with duplicate distortion columns, then atoms pointwise
    dominated by a cheaper one; neither pruning changes the optimum."""
    kept: list[int] = []
    seen: set[tuple] = set()
    for u in range(inst.num_atoms):
        key = tuple(np.round(inst.cost[u], 15))
        if key not in seen:
            seen.add(key)
            kept.append(u)
    undominated = []
    for u in kept:
        dominated = any(
            v != u
            and (inst.cost[v] <= inst.cost[u]).all()
            and (inst.cost[v] < inst.cost[u]).any()
            for v in kept
        )
        if not dominated:
            undominated.append(u)
    return undominated


def _grid_search(inst: _Instance, budget: float, resolution: float) -> float | None:
    """Exhaustive search when at most three free parameters remain.

    Covers channels over two effective atoms with |X| <= 3 (one parameter
    per column). Returns the best feasible I in nats, or None when the
    reduced instance is still too large for a grid.
    """
    atoms = _unique_undominated_atoms(inst)
    nx = inst.spec.num_x
    if len(atoms) == 1:
        u = atoms[0]
        if float(inst.cost_w[u].sum()) <= budget:
            return 0.0
        return None
    if len(atoms) != 2 or nx > 3:
        return None
    per_axis = int(round(1.0 / resolution)) + 1
    while per_axis**nx > MAX_GRID_POINTS:
        per_axis = int(MAX_GRID_POINTS ** (1.0 / nx))
    t = np.linspace(0.0, 1.0, per_axis)
    grids = np.meshgrid(*[t] * nx, indexing="ij")
    tt = np.stack([g.ravel() for g in grids], axis=1)  # (N, X): weight on atoms[0]
    u0, u1 = atoms
    dist = tt @ inst.cost_w[u0] + (1.0 - tt) @ inst.cost_w[u1]
    feasible = dist <= budget
    if not feasible.any():
        return None
    tt = tt[feasible]
    h_ux = (_xlnx(tt) + _xlnx(1.0 - tt)) @ inst.p_x
    q0 = tt @ inst.p_xgy  # (N, Y)
    h_uy = (_xlnx(q0) + _xlnx(1.0 - q0)) @ inst.p_y
    return max(float(np.min(h_ux - h_uy)), 0.0)


def brute_force_rd(
    spec: ProblemSpec, target: float, cfg: OracleConfig = OracleConfig()
) -> float:
    """Best feasible I(X;U|Y) in bits, found independently of the solver.

    Reproducible bit-for-bit for a fixed (spec, target, cfg): restarts use
    seeds derived from (rng_seed, restart index) and the reduction over
    restarts is a plain minimum.
    """
    if target < 0:
        raise DomainError(f"distortion target must be nonnegative, got {target!r}")
    inst = _Instance(spec)
    if inst.num_atoms * spec.num_x > cfg.max_alphabet_product:
        raise InstanceTooLarge(
            f"|X| * |atoms| = {inst.num_atoms * spec.num_x} exceeds the cap "
            f"{cfg.max_alphabet_product}"
        )
    if target + FEASIBILITY_SLACK < min_achievable_distortion(spec):
        raise Infeasible(f"no channel reaches distortion {target!r}")
    budget = target + FEASIBILITY_SLACK
    d_scale = float(spec.dist.max()) if spec.dist.max() > 0 else 1.0
    best = math.inf
    for r in range(cfg.random_restarts):
        rng = np.random.default_rng([cfg.rng_seed, r])
        mu = PENALTY_SCHEDULE[r % len(PENALTY_SCHEDULE)] / d_scale
        alpha = DIRICHLET_SCHEDULE[r % len(DIRICHLET_SCHEDULE)]
        best = min(best, _descent_run(inst, budget, mu, rng, alpha))
    grid = _grid_search(inst, budget, cfg.grid_resolution)
    if grid is not None:
        best = min(best, grid)
    return max(best / _LN2, 0.0)


def verify_point(
    spec: ProblemSpec,
    pt: RDPoint,
    cfg: OracleConfig = OracleConfig(),
    tolerance: float = 1e-3,
) -> OracleReport:
    """Compare a solver point against the oracle at its achieved distortion.

    Passing requires the rate gap within ``tolerance`` bits and clean
    feasibility residuals (stochastic columns, self-consistent rate and
    distortion).
    """
    colsum = float(np.abs(pt.channel.cond.sum(axis=0) - 1.0).max())
    rate_again = conditional_mutual_information(spec, pt.channel)
    dist_again = expected_distortion(spec, pt.channel, pt.decoder)
    rate_resid = abs(rate_again - pt.rate)
    dist_resid = abs(dist_again - pt.distortion)
    oracle_rate = brute_force_rd(spec, pt.distortion, cfg)
    gap = pt.rate - oracle_rate
    passed = (
        abs(gap) <= tolerance
        and colsum <= 1e-9
        and rate_resid <= 1e-9
        and dist_resid <= 1e-9
    )
    return OracleReport(
        oracle_rate=oracle_rate,
        solver_rate=pt.rate,
        gap=gap,
        distortion_target=pt.distortion,
        column_sum_residual=colsum,
        rate_residual=rate_resid,
        distortion_residual=dist_resid,
        tolerance=tolerance,
        passed=passed,
    )
