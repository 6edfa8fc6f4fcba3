"""Building blocks of the characteristic multi-hypergraph.

Hyperedges are nonempty subsets of the source alphabet; candidate recoveries
assign one reconstruction to every side-information value. The pair of the
two is a multi-hyperedge: the same subset may recur with different
recoveries. ``enumerate_gamma_d`` builds the zero-distortion hyperedge
family, the subsets whose induced function values fit inside a single
zero-distortion ball for every y.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlphabetTooLarge,
    DomainError,
    NotInGammaD,
    RecoverySpaceTooLarge,
)
from .model import ProblemSpec

#: Default cap on |X| for subset enumeration (2^|X| - 1 subsets).
MAX_ENUM_X = 20
#: Default cap on |Zhat|^|Y| for candidate-recovery enumeration.
MAX_RECOVERIES = 4096


@dataclass(frozen=True, order=True)
class Hyperedge:
    """A nonempty subset of source indices, stored sorted."""

    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted({int(x) for x in self.members}))
        if not members:
            raise DomainError("hyperedges must be nonempty")
        object.__setattr__(self, "members", members)

    def __contains__(self, x: int) -> bool:
        return x in self.members

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True, order=True)
class CandidateRecovery:
    """One reconstruction index per side-information value."""

    per_y: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "per_y", tuple(int(z) for z in self.per_y))


@dataclass(frozen=True, order=True)
class MultiHyperedge:
    """A hyperedge paired with the candidate recovery that distinguishes it."""

    edge: Hyperedge
    recovery: CandidateRecovery


@dataclass(frozen=True, eq=False)
class HyperedgeFamily:
    """A duplicate-free set of hyperedges with deterministic iteration order
    (sorted by size, then lexicographically)."""

    edges: tuple[Hyperedge, ...]

    def __post_init__(self):
        unique = sorted(set(self.edges), key=lambda e: (len(e.members), e.members))
        object.__setattr__(self, "edges", tuple(unique))

    def __contains__(self, edge: Hyperedge) -> bool:
        return edge in set(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HyperedgeFamily):
            return NotImplemented
        return self.edges == other.edges

    def covers(self, num_x: int) -> bool:
        """True when every source index belongs to some member."""
        seen = set()
        for e in self.edges:
            seen.update(e.members)
        return seen >= set(range(num_x))


def distortion_ball(spec: ProblemSpec, zhat: int, delta: float) -> frozenset[int]:
    """The set of z values within distortion ``delta`` of ``zhat``."""
    if delta < 0:
        raise DomainError(f"ball radius must be nonnegative, got {delta!r}")
    if not 0 <= zhat < spec.num_zhat:
        raise DomainError(f"zhat index {zhat} outside [0, {spec.num_zhat})")
    return frozenset(int(z) for z in np.flatnonzero(spec.dist[:, zhat] <= delta))


def induced_values(spec: ProblemSpec, w: Hyperedge, y: int) -> frozenset[int]:
    """Function values {f(x, y) : x in w, p(x, y) > 0}; may be empty."""
    if not 0 <= y < spec.num_y:
        raise DomainError(f"y index {y} outside [0, {spec.num_y})")
    return frozenset(
        int(spec.func[x, y]) for x in w.members if spec.pmf[x, y] > 0
    )


def _zero_ball_masks(spec: ProblemSpec) -> np.ndarray:
    """ok[x, y] = bitmask over zhat of exact reconstructions of f(x, y);
    all-ones when p(x, y) = 0 (the condition is vacuous there)."""
    full = (1 << spec.num_zhat) - 1
    zero_ok = spec.dist == 0  # (Z, Zhat)
    masks = np.full((spec.num_x, spec.num_y), full, dtype=np.int64)
    for x in range(spec.num_x):
        for y in range(spec.num_y):
            if spec.pmf[x, y] > 0:
                bits = 0
                for zh in np.flatnonzero(zero_ok[spec.func[x, y]]):
                    bits |= 1 << int(zh)
                masks[x, y] = bits
    return masks


def enumerate_gamma_d(spec: ProblemSpec, max_x: int = MAX_ENUM_X) -> HyperedgeFamily:
    """Enumerate the zero-distortion hyperedge family.

    A nonempty subset w belongs to the family when for every y some single
    zhat reconstructs all of {f(x, y) : x in w, p(x, y) > 0} exactly; an
    empty induced set is vacuously fine. The family is downward closed, so
    enumeration grows members from singletons and prunes failed branches.
    """
    if spec.num_x > max_x:
        raise AlphabetTooLarge(
            f"|X| = {spec.num_x} exceeds the enumeration cap {max_x}"
        )
    masks = _zero_ball_masks(spec)
    members: list[Hyperedge] = []
    frontier: list[tuple[tuple[int, ...], np.ndarray]] = []
    for x in range(spec.num_x):
        m = masks[x].copy()
        if (m != 0).all():
            members.append(Hyperedge((x,)))
            frontier.append(((x,), m))
    while frontier:
        nxt: list[tuple[tuple[int, ...], np.ndarray]] = []
        for w, m in frontier:
            for x in range(w[-1] + 1, spec.num_x):
                m2 = m & masks[x]
                if (m2 != 0).all():
                    members.append(Hyperedge(w + (x,)))
                    nxt.append((w + (x,), m2))
        frontier = nxt
    return HyperedgeFamily(tuple(members))


def epsilon_distortion(spec: ProblemSpec, eps: float) -> np.ndarray:
    """Thresholded measure 1{d > eps}: zero inside the eps-ball, one outside."""
    if eps < 0:
        raise DomainError(f"epsilon must be nonnegative, got {eps!r}")
    return (spec.dist > eps).astype(float)


def enumerate_candidate_recoveries(
    spec: ProblemSpec, max_recoveries: int = MAX_RECOVERIES
) -> list[CandidateRecovery]:
    """All |Zhat|^|Y| recovery tuples in lexicographic order."""
    count = spec.num_zhat ** spec.num_y
    if count > max_recoveries:
        raise RecoverySpaceTooLarge(
            f"|Zhat|^|Y| = {count} exceeds the enumeration cap {max_recoveries}"
        )
    return [
        CandidateRecovery(t)
        for t in itertools.product(range(spec.num_zhat), repeat=spec.num_y)
    ]


def maximal_members(fam: HyperedgeFamily) -> HyperedgeFamily:
    """Members not strictly contained in another member. Search-space
    heuristic only; results over the reduced family are not authoritative."""
    sets = [(e, set(e.members)) for e in fam]
    kept = [
        e
        for e, s in sets
        if not any(s < s2 for _, s2 in sets)
    ]
    return HyperedgeFamily(tuple(kept))


def zero_distortion_recovery(spec: ProblemSpec, w: Hyperedge) -> CandidateRecovery:
    """The canonical recovery of a family member: for each y, the
    smallest-index zhat whose zero-distortion ball covers the induced values.

    Raises NotInGammaD when some y admits no such zhat.
    """
    per_y = []
    for y in range(spec.num_y):
        vals = induced_values(spec, w, y)
        choice = None
        for zh in range(spec.num_zhat):
            if all(spec.dist[z, zh] == 0 for z in vals):
                choice = zh
                break
        if choice is None:
            label = "{" + ",".join(spec.x_alphabet.labels[x] for x in w.members) + "}"
            raise NotInGammaD(
                f"subset {label} has no zero-distortion recovery at "
                f"y={spec.y_alphabet.labels[y]!r}"
            )
        per_y.append(choice)
    return CandidateRecovery(tuple(per_y))


def format_hyperedge(spec: ProblemSpec, edge: Hyperedge) -> str:
    """Render a hyperedge with display labels, e.g. ``{1,2}``."""
    return "{" + ",".join(spec.x_alphabet.labels[x] for x in edge.members) + "}"
