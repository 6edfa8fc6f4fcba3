"""Entropy, conditional mutual information and expected distortion, in bits.

All quantities use base-2 logarithms with the convention 0 log 0 = 0; zero
terms are masked explicitly rather than left to floating-point behavior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError, InvalidChannel
from .model import ProblemSpec

#: Column-stochasticity tolerance for auxiliary channels.
CHANNEL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AuxChannel:
    """Conditional law p(u|x) over a finite auxiliary alphabet.

    ``cond`` has shape (num_atoms, |X|) and every column is a distribution.
    ``atom_meta``, when present, annotates each atom with its candidate
    recovery or hyperedge/recovery pair. The joint law p(x, y) p(u|x) makes
    U - X - Y a Markov chain by construction.
    """

    cond: np.ndarray
    atom_meta: tuple | None = None

    def __post_init__(self):
        cond = np.asarray(self.cond, dtype=float)
        if cond.ndim != 2:
            raise DimensionMismatch(f"channel matrix must be 2-d, got {cond.ndim}-d")
        if (cond < -CHANNEL_TOL).any() or (cond > 1 + CHANNEL_TOL).any():
            raise InvalidChannel("channel entries outside [0, 1]")
        sums = cond.sum(axis=0)
        if (np.abs(sums - 1.0) > CHANNEL_TOL).any():
            x = int(np.argmax(np.abs(sums - 1.0)))
            raise InvalidChannel(f"column x={x} sums to {sums[x]!r}")
        cond.setflags(write=False)
        object.__setattr__(self, "cond", cond)
        if self.atom_meta is not None:
            meta = tuple(self.atom_meta)
            if len(meta) != cond.shape[0]:
                raise DimensionMismatch(
                    f"{len(meta)} atom annotations for {cond.shape[0]} atoms"
                )
            object.__setattr__(self, "atom_meta", meta)

    @property
    def num_atoms(self) -> int:
        return self.cond.shape[0]

    def marginal(self, p_x: np.ndarray) -> np.ndarray:
        """Atom marginals p(u) under the given source law."""
        return self.cond @ p_x


@dataclass(frozen=True, eq=False)
class DecoderMap:
    """Lookup table g(u, y) -> zhat index, shape (num_atoms, |Y|)."""

    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=int)
        if table.ndim != 2:
            raise DimensionMismatch(f"decoder table must be 2-d, got {table.ndim}-d")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)


def binary_entropy(p: float) -> float:
    """H(p) = -p log2 p - (1-p) log2 (1-p) with H(0) = H(1) = 0."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"binary_entropy expects p in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def _xlog2x(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = v[pos] * np.log2(v[pos])
    return out


def _check_channel(spec: ProblemSpec, ch: AuxChannel) -> None:
    if ch.cond.shape[1] != spec.num_x:
        raise DimensionMismatch(
            f"channel has {ch.cond.shape[1]} source columns, alphabet has {spec.num_x}"
        )


def conditional_mutual_information(spec: ProblemSpec, ch: AuxChannel) -> float:
    """I(X; U | Y) in bits for the joint law p(x, y) p(u|x).

    Equals H(U|Y) - H(U|X) and is nonnegative for every valid channel;
    it vanishes exactly when all columns of the channel agree.
    """
    _check_channel(spec, ch)
    w = ch.cond
    p_x = spec.x_marginal
    p_y = spec.y_marginal
    joint_uy = w @ spec.pmf  # (U, Y)
    h_u_given_y = -float(_xlog2x(joint_uy).sum()) + float(_xlog2x(p_y).sum())
    h_u_given_x = -float((_xlog2x(w) * p_x[None, :]).sum())
    return max(h_u_given_y - h_u_given_x, 0.0)


def expected_distortion(spec: ProblemSpec, ch: AuxChannel, dec: DecoderMap) -> float:
    """E[d(f(X, Y), g(U, Y))] under the joint law p(x, y) p(u|x)."""
    _check_channel(spec, ch)
    table = dec.table
    if table.shape != (ch.num_atoms, spec.num_y):
        raise DimensionMismatch(
            f"decoder table has shape {table.shape}, expected "
            f"({ch.num_atoms}, {spec.num_y})"
        )
    if ((table < 0) | (table >= spec.num_zhat)).any():
        raise DimensionMismatch("decoder table contains invalid zhat indices")
    # d(f(x,y), g(u,y)) broadcast to shape (U, X, Y)
    dvals = spec.dist[spec.func[None, :, :], table[:, None, :]]
    return float(np.einsum("ux,xy,uxy->", ch.cond, spec.pmf, dvals))
