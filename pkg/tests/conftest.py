"""Shared fixtures and independent reference evaluators.

The closed forms and hand-derived constants here are computed with plain
``math`` so solver results are always checked against an independent route.
"""

import math

import numpy as np
import pytest

import rdcomp as rd


def bin_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def card_game_rate(d: float) -> float:
    """Closed-form card-game rate (2/3)(H((1+6D)/4) - H(3D)) on [0, 1/6]."""
    if d >= 1.0 / 6.0:
        return 0.0
    return (2.0 / 3.0) * (bin_entropy((1.0 + 6.0 * d) / 4.0) - bin_entropy(3.0 * d))


def card_game_slope(d: float, h: float = 1e-7) -> float:
    """|dR/dD| by central difference of the closed form."""
    return -(card_game_rate(d + h) - card_game_rate(d - h)) / (2.0 * h)


def card_paper_channel(d: float) -> rd.AuxChannel:
    """The optimizing two-atom channel: p(atom0 | x) = (1-3D, 1/2, 3D) with
    atoms ({1,2,3}, (1,0,0)) and ({1,2,3}, (1,1,0))."""
    p = np.array([1.0 - 3.0 * d, 0.5, 3.0 * d])
    meta = (
        rd.MultiHyperedge(rd.Hyperedge((0, 1, 2)), rd.CandidateRecovery((1, 0, 0))),
        rd.MultiHyperedge(rd.Hyperedge((0, 1, 2)), rd.CandidateRecovery((1, 1, 0))),
    )
    return rd.AuxChannel(np.vstack([p, 1.0 - p]), atom_meta=meta)


def random_spec(
    rng: np.random.Generator,
    max_x: int = 3,
    max_y: int = 3,
    num_z: int = 2,
    num_zhat: int = 2,
    hamming: bool = True,
    zero_cells: bool = True,
) -> rd.ProblemSpec:
    """A random validated instance; rows of the pmf always keep mass."""
    nx = int(rng.integers(2, max_x + 1))
    ny = int(rng.integers(1, max_y + 1))
    while True:
        pmf = rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny)
        if zero_cells and ny > 1 and rng.random() < 0.3:
            pmf[int(rng.integers(nx)), int(rng.integers(ny))] = 0.0
            pmf /= pmf.sum()
        if (pmf.sum(axis=1) > 1e-6).all():
            break
    func = rng.integers(0, num_z, size=(nx, ny))
    if hamming and num_z == num_zhat:
        dist = 1.0 - np.eye(num_z)
    else:
        dist = rng.uniform(0.0, 1.0, size=(num_z, num_zhat))
        dist[np.arange(num_z), rng.integers(0, num_zhat, size=num_z)] = 0.0
    return rd.validate_spec(
        {
            "x_alphabet": [str(i) for i in range(nx)],
            "y_alphabet": [str(i) for i in range(ny)],
            "z_alphabet": [str(i) for i in range(num_z)],
            "zhat_alphabet": [str(i) for i in range(num_zhat)],
            "p_xy": pmf.tolist(),
            "f": func.tolist(),
            "d": dist.tolist(),
        }
    )


def random_recovery_channel(
    rng: np.random.Generator, spec: rd.ProblemSpec, interior: float = 0.05
) -> rd.AuxChannel:
    """Random channel over the full recovery alphabet, kept off the boundary
    by mixing with uniform (so induced laws stay strictly positive)."""
    recs = rd.enumerate_candidate_recoveries(spec)
    u = len(recs)
    cond = rng.dirichlet(np.ones(u), size=spec.num_x).T
    cond = (1.0 - interior) * cond + interior / u
    cond /= cond.sum(axis=0)
    return rd.AuxChannel(cond, atom_meta=tuple(recs))


@pytest.fixture(scope="session")
def card_spec():
    return rd.card_game_spec()


@pytest.fixture(scope="session")
def shannon_spec():
    return rd.shannon_binary_spec()
