"""Rate-distortion solver: alternating minimization with a distortion penalty.

The auxiliary alphabet is the full candidate-recovery enumeration (mode
``recoveries``) or the zero-distortion hyperedge family (mode ``gamma_d`` /
``gamma_eps``). A solve minimizes the Lagrangian I(X;U|Y) + lambda E[d] by
alternating a Gibbs update of p(u|x) against the induced law q(u|y); in the
family modes the distortion term is dropped and the support constraint
p(w|x) = 0 unless x is a member of w is enforced at every step.

``solve_at_distortion`` bisects the multiplier to hit a distortion target,
time-sharing adjacent Lagrangian points when the sweep jumps over it.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainError,
    EmptySupport,
    Infeasible,
    InvalidChannel,
    NotConverged,
    NumericalUnderflow,
    CurveNotMonotone,
    UnannotatedChannel,
)
from .hypergraph import (
    CandidateRecovery,
    Hyperedge,
    MultiHyperedge,
    enumerate_candidate_recoveries,
    enumerate_gamma_d,
    epsilon_distortion,
    maximal_members,
    zero_distortion_recovery,
)
from .info import AuxChannel, DecoderMap, conditional_mutual_information, expected_distortion
from .model import (
    ProblemSpec,
    min_achievable_distortion,
    replace_distortion,
    zero_rate_distortion,
    zero_rate_recovery,
)

_LN2 = math.log(2.0)
#: Atoms whose marginal falls below this are frozen out of the q update.
FREEZE_TOL = 1e-12
#: Bisection stops when the achieved distortion is this close to the target.
DISTORTION_TOL = 1e-6

ALPHABET_MODES = ("recoveries", "gamma_d", "gamma_eps")


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for one Lagrangian solve; ``lam`` is the distortion multiplier."""

    lam: float = 1.0
    tol_objective: float = 1e-10
    max_iters: int = 200_000
    init_jitter: float = 1e-3
    rng_seed: int = 1729
    restarts: int = 8

    def __post_init__(self):
        if self.lam < 0 or not math.isfinite(self.lam):
            raise DomainError(f"lambda must be finite and nonnegative, got {self.lam!r}")
        if self.tol_objective <= 0:
            raise DomainError("tol_objective must be positive")
        if self.max_iters < 1:
            raise DomainError("max_iters must be at least 1")
        if self.restarts < 1:
            raise DomainError("restarts must be at least 1")
        if not 0 <= self.init_jitter < 1:
            raise DomainError("init_jitter must lie in [0, 1)")


@dataclass(frozen=True)
class RDPoint:
    """One point of the trade-off: achieved distortion, rate in bits, the
    multiplier that produced it, and the realizing channel/decoder pair."""

    distortion: float
    rate: float
    lam: float
    channel: AuxChannel
    decoder: DecoderMap
    converged: bool
    iterations: int

    def __post_init__(self):
        if self.rate < 0 or self.distortion < 0:
            raise DomainError("rate and distortion must be nonnegative")

    def support_size(self, spec: ProblemSpec, tol: float = 1e-9) -> int:
        """Number of atoms with non-negligible marginal probability."""
        return int((self.channel.marginal(spec.x_marginal) > tol).sum())


@dataclass(frozen=True)
class RDCurve:
    """Points sorted by distortion; rates must be non-increasing within
    1e-6 slack across converged points. Failed sweep points are recorded
    separately as (lambda, error code) pairs."""

    points: tuple[RDPoint, ...]
    failures: tuple[tuple[float, str], ...] = ()

    def __post_init__(self):
        pts = tuple(sorted(self.points, key=lambda p: (p.distortion, -p.rate)))
        object.__setattr__(self, "points", pts)
        conv = [p for p in pts if p.converged]
        for a, b in zip(conv, conv[1:]):
            if b.rate > a.rate + 1e-6:
                raise CurveNotMonotone(
                    f"rate rises from {a.rate!r} to {b.rate!r} as distortion grows "
                    f"({a.distortion!r} -> {b.distortion!r})"
                )

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)


# --- precomputed tables -------------------------------------------------


class _Tables:
    """Arrays shared by every iteration of one solve."""

    def __init__(self, spec, meta, cost, mask):
        self.spec = spec
        self.meta = meta              # per-atom annotation tuple
        self.cost = cost              # (U, X): E_y[d | x, atom], zeros in family modes
        self.mask = mask              # (U, X) bool or None: allowed support
        self.p_x = spec.x_marginal
        self.p_ygx = spec.y_given_x()            # (X, Y)
        self.p_xgy = spec.x_given_y()            # (X, Y)
        self.b = np.ascontiguousarray(self.p_ygx.T)  # (Y, X)
        self.b_pos = (self.b > 0).astype(np.float64)
        self.num_atoms = cost.shape[0]

    def recovery_table(self) -> np.ndarray:
        """(U, |Y|) zhat indices read off the atom annotations."""
        return np.array([_atom_recovery(m).per_y for m in self.meta], dtype=int)


def _atom_recovery(meta) -> CandidateRecovery:
    if isinstance(meta, CandidateRecovery):
        return meta
    if isinstance(meta, MultiHyperedge):
        return meta.recovery
    raise UnannotatedChannel(
        f"atom annotation {meta!r} carries no candidate recovery"
    )


def decoder_from_atoms(ch: AuxChannel) -> DecoderMap:
    """The lookup decoder: g(u, y) is the y-component of atom u's recovery."""
    if ch.atom_meta is None:
        raise UnannotatedChannel("channel atoms carry no recovery annotations")
    return DecoderMap(np.array([_atom_recovery(m).per_y for m in ch.atom_meta], dtype=int))


def _distortion_cost(spec: ProblemSpec, rec_table: np.ndarray) -> np.ndarray:
    """cost[u, x] = sum_y p(y|x) d(f(x, y), rec_u(y))."""
    dvals = spec.dist[spec.func[None, :, :], rec_table[:, None, :]]  # (U, X, Y)
    return np.einsum("uxy,xy->ux", dvals, spec.y_given_x())


def _recovery_tables(spec: ProblemSpec, max_recoveries=None) -> _Tables:
    kwargs = {} if max_recoveries is None else {"max_recoveries": max_recoveries}
    recs = enumerate_candidate_recoveries(spec, **kwargs)
    meta = tuple(recs)
    rec_table = np.array([r.per_y for r in recs], dtype=int)
    return _Tables(spec, meta, _distortion_cost(spec, rec_table), None)


def _family_tables(spec: ProblemSpec, maximal_only: bool = False) -> _Tables:
    fam = enumerate_gamma_d(spec)
    if maximal_only:
        fam = maximal_members(fam)
    if not fam.covers(spec.num_x):
        missing = set(range(spec.num_x))
        for e in fam:
            missing -= set(e.members)
        labels = ", ".join(spec.x_alphabet.labels[x] for x in sorted(missing))
        raise Infeasible(
            f"zero distortion is unreachable: source symbols {labels} belong to "
            "no admissible subset"
        )
    meta = tuple(
        MultiHyperedge(e, zero_distortion_recovery(spec, e)) for e in fam
    )
    mask = np.zeros((len(meta), spec.num_x), dtype=bool)
    for u, m in enumerate(meta):
        mask[u, list(m.edge.members)] = True
    cost = np.zeros((len(meta), spec.num_x))
    return _Tables(spec, meta, cost, mask)


# --- alternating minimization core --------------------------------------


def _gibbs_update(tab: _Tables, q: np.ndarray, alive: np.ndarray, penalty: np.ndarray):
    """One channel update p(u|x) ~ exp(sum_y p(y|x) ln q(u|y) - penalty).

    Frozen or forbidden atoms get zero weight exactly. Returns the new
    channel and the per-iteration Lagrangian value in bits.
    """
    pos = (q > 0) & alive[:, None]
    lnq = np.where(pos, np.log(np.where(pos, q, 1.0)), 0.0)
    expo = lnq @ tab.b - penalty                       # (U, X)
    killed = (~pos).astype(np.float64) @ tab.b_pos     # >0 where a -inf term applies
    expo[killed > 0] = -np.inf
    shift = expo.max(axis=0)
    if not np.isfinite(shift).all():
        x = int(np.argmax(~np.isfinite(shift)))
        raise NumericalUnderflow(
            f"all atom weights vanished for x={tab.spec.x_alphabet.labels[x]!r}"
        )
    w = np.exp(expo - shift)
    z = w.sum(axis=0)
    w /= z
    value = float(-(tab.p_x @ (shift + np.log(z))) / _LN2)
    return w, value


def _am_minimize(tab: _Tables, lam: float, w0: np.ndarray, tol: float, max_iters: int):
    """Iterate channel/induced-law updates until the objective stalls.

    Returns (w, q, objective_bits, iterations, converged); the monitored
    objective never increases from one iteration to the next.
    """
    penalty = lam * _LN2 * tab.cost
    if tab.mask is not None:
        penalty = np.where(tab.mask, penalty, np.inf)
    w = w0
    value_prev = np.inf
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        q = w @ tab.p_xgy                      # (U, Y)
        alive = (w @ tab.p_x) >= FREEZE_TOL
        w, value = _gibbs_update(tab, q, alive, penalty)
        if abs(value_prev - value) < tol:
            value_prev = value
            converged = True
            break
        value_prev = value
    q = w @ tab.p_xgy
    return w, q, value_prev, iters, converged


def _initial_channel(tab: _Tables, rng: np.random.Generator, jitter: float) -> np.ndarray:
    base = np.ones((tab.num_atoms, tab.spec.num_x))
    if tab.mask is not None:
        base = base * tab.mask
    if jitter > 0:
        base = base * (1.0 + jitter * rng.uniform(-1.0, 1.0, size=base.shape))
    return base / base.sum(axis=0)


def _run_starts(tab, lam, cfg, warm=None, restarts=None, threads=1):
    """Best of several jittered starts (plus an optional warm start)."""
    n = cfg.restarts if restarts is None else restarts
    starts = []
    if warm is not None:
        starts.append(np.array(warm, dtype=float))
    for r in range(n):
        rng = np.random.default_rng([cfg.rng_seed, r])
        starts.append(_initial_channel(tab, rng, cfg.init_jitter))

    def solve_one(w0):
        return _am_minimize(tab, lam, w0, cfg.tol_objective, cfg.max_iters)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve_one, starts))
    else:
        results = [solve_one(w0) for w0 in starts]
    best = min(range(len(results)), key=lambda i: (results[i][2], i))
    return results[best]


def _point_from_solution(tab: _Tables, lam_report: float, w, iters, converged) -> RDPoint:
    ch = AuxChannel(w, atom_meta=tab.meta)
    dec = DecoderMap(tab.recovery_table())
    rate = conditional_mutual_information(tab.spec, ch)
    dist = expected_distortion(tab.spec, ch, dec)
    return RDPoint(dist, rate, lam_report, ch, dec, converged, iters)


def _zero_rate_point(spec: ProblemSpec) -> RDPoint:
    rec = CandidateRecovery(tuple(zero_rate_recovery(spec)))
    ch = AuxChannel(np.ones((1, spec.num_x)), atom_meta=(rec,))
    dec = DecoderMap(np.array([rec.per_y], dtype=int))
    return RDPoint(zero_rate_distortion(spec), 0.0, 0.0, ch, dec, True, 0)


# --- public operations ---------------------------------------------------


def am_step(spec: ProblemSpec, ch: AuxChannel, q: np.ndarray, lam: float):
    """One alternating step: Gibbs-update the channel against ``q``, then
    recompute q(u|y) from the new channel.

    The Lagrangian I + lambda E[d] (evaluated against the supplied q, see
    ``lagrangian_value``) does not increase across the step. Atom
    annotations must carry candidate recoveries.
    """
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam!r}")
    if ch.atom_meta is None:
        raise UnannotatedChannel("am_step needs recovery-annotated atoms")
    q = np.asarray(q, dtype=float)
    if q.shape != (ch.num_atoms, spec.num_y):
        raise DimensionMismatch(
            f"q has shape {q.shape}, expected ({ch.num_atoms}, {spec.num_y})"
        )
    tab = _Tables(
        spec, ch.atom_meta, _distortion_cost(spec, decoder_from_atoms(ch).table), None
    )
    alive = (ch.cond @ tab.p_x) >= FREEZE_TOL
    w, _ = _gibbs_update(tab, q, alive, lam * _LN2 * tab.cost)
    q_next = w @ tab.p_xgy
    return AuxChannel(w, atom_meta=ch.atom_meta), q_next


def lagrangian_value(spec: ProblemSpec, ch: AuxChannel, q: np.ndarray, lam: float) -> float:
    """sum p(x,y) p(u|x) log2(p(u|x)/q(u|y)) + lambda E[d], in bits.

    The cross form equals I + lambda E[d] when q is the induced law and
    upper-bounds it otherwise; it is the quantity each am_step decreases.
    """
    w = ch.cond
    q = np.asarray(q, dtype=float)
    weight = np.einsum("ux,xy->uxy", w, spec.pmf)
    pos = weight > 0
    qb = np.broadcast_to(q[:, None, :], weight.shape)
    if (qb[pos] <= 0).any():
        return math.inf
    wb = np.broadcast_to(w[:, :, None], weight.shape)
    info = float((weight[pos] * np.log2(wb[pos] / qb[pos])).sum())
    dist = expected_distortion(spec, ch, decoder_from_atoms(ch))
    return info + lam * dist


def solve_lagrangian(
    spec: ProblemSpec,
    cfg: SolverConfig,
    alphabet_mode: str = "recoveries",
    epsilon: float | None = None,
    maximal_only: bool = False,
    warm_start: AuxChannel | None = None,
    threads: int = 1,
) -> RDPoint:
    """Minimize I(X;U|Y) + lambda E[d] from several jittered uniform starts.

    Mode ``recoveries`` optimizes over all candidate-recovery atoms with the
    multiplier ``cfg.lam``; lambda 0 short-circuits to the best zero-rate
    point (the limit of vanishing multipliers). Mode ``gamma_d`` ignores
    lambda, drops the distortion term, restricts atoms to the
    zero-distortion family with membership enforced at every step, and
    decodes with each member's canonical recovery. Mode ``gamma_eps`` is
    gamma_d after thresholding the distortion at ``epsilon``.
    """
    if alphabet_mode not in ALPHABET_MODES:
        raise DomainError(
            f"unknown alphabet mode {alphabet_mode!r}; expected one of {ALPHABET_MODES}"
        )
    if alphabet_mode == "gamma_eps":
        if epsilon is None:
            raise DomainError("gamma_eps mode needs an epsilon")
        thresholded = replace_distortion(spec, epsilon_distortion(spec, epsilon))
        return solve_lagrangian(
            thresholded, cfg, "gamma_d", maximal_only=maximal_only, threads=threads
        )
    if alphabet_mode == "recoveries":
        if cfg.lam == 0:
            return _zero_rate_point(spec)
        tab = _recovery_tables(spec)
        lam, lam_report = cfg.lam, cfg.lam
    else:
        tab = _family_tables(spec, maximal_only=maximal_only)
        lam, lam_report = 0.0, math.inf
    warm = _embed_warm_start(tab, warm_start) if warm_start is not None else None
    w, _, _, iters, converged = _run_starts(tab, lam, cfg, warm=warm, threads=threads)
    return _point_from_solution(tab, lam_report, w, iters, converged)


def _embed_warm_start(tab: _Tables, warm: AuxChannel) -> np.ndarray:
    """Place a warm-start channel onto the solve's atom alphabet.

    A channel over a subset of the atoms (e.g. after prune_support) is
    matched by annotation; missing atoms start at zero mass and stay
    frozen, so the re-solve runs on the pruned support.
    """
    if warm.cond.shape == (tab.num_atoms, tab.spec.num_x):
        return np.array(warm.cond, dtype=float)
    if warm.atom_meta is None:
        raise DimensionMismatch("warm start does not match the atom alphabet")
    index = {m: u for u, m in enumerate(tab.meta)}
    rec_index = {_atom_recovery(m).per_y: u for u, m in enumerate(tab.meta)}
    w0 = np.zeros((tab.num_atoms, tab.spec.num_x))
    for row, meta in zip(warm.cond, warm.atom_meta):
        u = index.get(meta)
        if u is None:
            u = rec_index.get(_atom_recovery(meta).per_y)
        if u is None:
            raise DimensionMismatch(
                f"warm-start atom {meta!r} is not in the solve's alphabet"
            )
        w0[u] += row
    return w0


def _time_share(pt_lo: RDPoint, pt_hi: RDPoint, target: float) -> RDPoint:
    """Mix two Lagrangian points into one achieving the target distortion.

    The atom alphabets are concatenated with weights t and 1-t, which
    realizes exactly the convex combination of both rates and distortions.
    """
    gap = pt_lo.distortion - pt_hi.distortion
    if gap <= 0:
        return pt_lo if abs(pt_lo.distortion - target) <= abs(pt_hi.distortion - target) else pt_hi
    t = (target - pt_hi.distortion) / gap
    t = min(max(t, 0.0), 1.0)
    cond = np.vstack([t * pt_lo.channel.cond, (1.0 - t) * pt_hi.channel.cond])
    meta = tuple(pt_lo.channel.atom_meta) + tuple(pt_hi.channel.atom_meta)
    table = np.vstack([pt_lo.decoder.table, pt_hi.decoder.table])
    rate = t * pt_lo.rate + (1.0 - t) * pt_hi.rate
    lam = (pt_lo.rate - pt_hi.rate) / gap if gap > 0 else pt_hi.lam
    return RDPoint(
        target,
        rate,
        abs(lam),
        AuxChannel(cond, atom_meta=meta),
        DecoderMap(table),
        pt_lo.converged and pt_hi.converged,
        pt_lo.iterations + pt_hi.iterations,
    )


def solve_at_distortion(
    spec: ProblemSpec, target: float, cfg: SolverConfig, threads: int = 1
) -> RDPoint:
    """R(D) at a distortion target.

    Targets at or above the zero-rate threshold return the best constant
    decoder. A zero target solves the zero-distortion family program (or
    reports Infeasible when no exact reconstruction exists). Otherwise the
    multiplier is bisected until the achieved distortion is within 1e-6 of
    the target, time-sharing bracket points when the sweep jumps over it.
    """
    if target < 0:
        raise DomainError(f"distortion target must be nonnegative, got {target!r}")
    d_max = zero_rate_distortion(spec)
    if target >= d_max - 1e-15:
        return _zero_rate_point(spec)
    d_floor = min_achievable_distortion(spec)
    if target < d_floor - 1e-12:
        raise Infeasible(
            f"target {target!r} lies below the distortion floor {d_floor!r}"
        )
    if target == 0.0:
        return solve_lagrangian(spec, cfg, "gamma_d", threads=threads)

    tab = _recovery_tables(spec)

    def eval_at(lam, warm, restarts=None):
        w, _, _, iters, conv = _run_starts(
            tab, lam, cfg, warm=warm, restarts=restarts, threads=threads
        )
        return _point_from_solution(tab, lam, w, iters, conv)

    d_scale = float(spec.dist.max()) if spec.dist.max() > 0 else 1.0
    lam_max = 64.0 * d_scale / DISTORTION_TOL
    pt_lo = _zero_rate_point(spec)  # lambda 0: distortion d_max, rate 0
    lam_lo = 0.0

    lam_hi = 1.0 / d_scale
    pt_hi = eval_at(lam_hi, None)
    while pt_hi.distortion > target and lam_hi < lam_max:
        lam_lo, pt_lo = lam_hi, pt_hi
        lam_hi = min(lam_hi * 4.0, lam_max)
        pt_hi = eval_at(lam_hi, pt_hi.channel.cond, restarts=2)
    if pt_hi.distortion > target + DISTORTION_TOL:
        raise NotConverged(
            f"distortion {pt_hi.distortion!r} at the multiplier cap {lam_max!r} "
            f"still exceeds the target {target!r}"
        )
    if abs(pt_hi.distortion - target) <= DISTORTION_TOL:
        return pt_hi

    for _ in range(100):
        if abs(pt_lo.distortion - target) <= DISTORTION_TOL:
            return pt_lo
        if lam_hi - lam_lo <= 1e-12 * max(1.0, lam_hi):
            break
        lam_mid = 0.5 * (lam_lo + lam_hi)
        near = pt_hi if (lam_hi - lam_mid) <= (lam_mid - lam_lo) else pt_lo
        warm = near.channel.cond if near.iterations > 0 else None
        pt_mid = eval_at(lam_mid, warm, restarts=2)
        if abs(pt_mid.distortion - target) <= DISTORTION_TOL:
            return pt_mid
        if pt_mid.distortion > target:
            lam_lo, pt_lo = lam_mid, pt_mid
        else:
            lam_hi, pt_hi = lam_mid, pt_mid
    return _time_share(pt_lo, pt_hi, target)


def sweep_curve(
    spec: ProblemSpec, lambdas, cfg: SolverConfig, threads: int = 1
) -> RDCurve:
    """One Lagrangian point per multiplier, each warm-started from the
    previous channel; failures are recorded per point rather than aborting."""
    lams = [float(l) for l in lambdas]
    if any(l < 0 for l in lams):
        raise DomainError("multipliers must be nonnegative")
    points: list[RDPoint] = []
    failures: list[tuple[float, str]] = []
    warm = None
    for lam in lams:
        try:
            pt = solve_lagrangian(
                spec,
                dataclasses.replace(cfg, lam=lam),
                "recoveries",
                warm_start=warm,
                threads=threads,
            )
        except (NumericalUnderflow, NotConverged) as exc:
            failures.append((lam, exc.code))
            continue
        points.append(pt)
        if pt.iterations > 0:
            warm = pt.channel
    return RDCurve(tuple(points), tuple(failures))


def prune_support(spec: ProblemSpec, ch: AuxChannel, k: int) -> AuxChannel:
    """Keep the k atoms of largest marginal probability (ties by atom
    index), renormalizing every column over the survivors."""
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k!r}")
    if k >= ch.num_atoms:
        return ch
    p_u = ch.marginal(spec.x_marginal)
    order = np.argsort(-p_u, kind="stable")
    keep = np.sort(order[:k])
    cond = np.array(ch.cond[keep], dtype=float)
    sums = cond.sum(axis=0)
    if (sums <= 0).any():
        x = int(np.argmax(sums <= 0))
        raise EmptySupport(
            f"every kept atom has zero mass for x={spec.x_alphabet.labels[x]!r}"
        )
    cond /= sums
    meta = None if ch.atom_meta is None else tuple(ch.atom_meta[i] for i in keep)
    return AuxChannel(cond, atom_meta=meta)


def _atom_support(row: np.ndarray, tol: float) -> tuple[int, ...]:
    members = tuple(int(x) for x in np.flatnonzero(row > tol))
    if not members:
        members = tuple(int(x) for x in np.flatnonzero(row > 0))
    return members


def lift_to_multihyperedge(
    spec: ProblemSpec, ch: AuxChannel, dec: DecoderMap, support_tol: float = FREEZE_TOL
) -> AuxChannel:
    """Map each atom to (support subset, decoder row) and merge duplicates.

    The merged variable is a deterministic function of the original one, so
    I(X;.|Y) cannot increase, and every surviving atom satisfies the
    membership constraint x in w by construction.
    """
    if dec.table.shape != (ch.num_atoms, spec.num_y):
        raise DimensionMismatch(
            f"decoder table has shape {dec.table.shape}, expected "
            f"({ch.num_atoms}, {spec.num_y})"
        )
    merged: dict[MultiHyperedge, np.ndarray] = {}
    for u in range(ch.num_atoms):
        row = ch.cond[u]
        members = _atom_support(row, support_tol)
        if not members:
            continue  # exact-zero atom carries nothing
        key = MultiHyperedge(
            Hyperedge(members), CandidateRecovery(tuple(int(z) for z in dec.table[u]))
        )
        if key in merged:
            merged[key] = merged[key] + row
        else:
            merged[key] = np.array(row, dtype=float)
    keys = sorted(merged)
    cond = np.array([merged[k] for k in keys])
    return AuxChannel(cond, atom_meta=tuple(keys))


def attach_subset(
    spec: ProblemSpec, ch: AuxChannel, support_tol: float = FREEZE_TOL
) -> AuxChannel:
    """Annotate each recovery atom with its support subset.

    The channel matrix is unchanged and the map is injective on
    positive-probability atoms, so mutual information and expected
    distortion are exactly preserved. Exact-zero atoms are dropped.
    """
    if ch.atom_meta is None:
        raise UnannotatedChannel("attach_subset needs recovery-annotated atoms")
    rows = []
    meta = []
    for u in range(ch.num_atoms):
        row = ch.cond[u]
        members = _atom_support(row, support_tol)
        if not members:
            continue
        rec = _atom_recovery(ch.atom_meta[u])
        rows.append(row)
        meta.append(MultiHyperedge(Hyperedge(members), rec))
    if not rows:
        raise InvalidChannel("channel has no atoms with positive mass")
    return AuxChannel(np.array(rows), atom_meta=tuple(meta))
