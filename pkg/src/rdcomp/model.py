"""Problem instances for lossy function computing with decoder side information.

An instance couples four finite alphabets with a joint source law p(x, y), a
function table z = f(x, y) and a distortion matrix d(z, zhat). Instances are
validated once, immutable afterwards, and safe to share across workers. All
cross-references use 0-based indices; labels are display-only.

On disk an instance is a JSON document with keys ``x_alphabet``,
``y_alphabet``, ``z_alphabet``, ``zhat_alphabet`` (arrays of strings),
``p_xy`` (row-major, rows indexed by x), ``f`` (matrix of z indices) and
``d`` (rows indexed by z, columns by zhat).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InvalidDistortionEntry,
    NegativeProbability,
    PMFNotNormalized,
    SpecFormatError,
    ZeroMarginalRow,
)

#: Normalization tolerance for the joint pmf.
PMF_TOL = 1e-12

_SPEC_KEYS = ("x_alphabet", "y_alphabet", "z_alphabet", "zhat_alphabet", "p_xy", "f", "d")


@dataclass(frozen=True)
class Alphabet:
    """Ordered display labels for one finite alphabet."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise SpecFormatError("alphabet has no symbols")
        seen = set()
        for i, s in enumerate(labels):
            if not s:
                raise SpecFormatError(f"alphabet label {i} is empty")
            if s in seen:
                raise SpecFormatError(f"alphabet label {s!r} appears more than once")
            seen.add(s)

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """A validated problem instance.

    ``pmf`` is the joint law p(x, y) of shape (|X|, |Y|), ``func`` the table
    of z indices of the same shape, and ``dist`` the distortion matrix of
    shape (|Z|, |Zhat|) with finite nonnegative entries.
    """

    x_alphabet: Alphabet
    y_alphabet: Alphabet
    z_alphabet: Alphabet
    zhat_alphabet: Alphabet
    pmf: np.ndarray
    func: np.ndarray
    dist: np.ndarray

    @property
    def num_x(self) -> int:
        return self.x_alphabet.size

    @property
    def num_y(self) -> int:
        return self.y_alphabet.size

    @property
    def num_z(self) -> int:
        return self.z_alphabet.size

    @property
    def num_zhat(self) -> int:
        return self.zhat_alphabet.size

    @property
    def x_marginal(self) -> np.ndarray:
        return self.pmf.sum(axis=1)

    @property
    def y_marginal(self) -> np.ndarray:
        return self.pmf.sum(axis=0)

    def y_given_x(self) -> np.ndarray:
        """Conditional p(y|x) of shape (|X|, |Y|); rows sum to one."""
        return self.pmf / self.x_marginal[:, None]

    def x_given_y(self) -> np.ndarray:
        """Conditional p(x|y) of shape (|X|, |Y|); zero-mass y columns stay zero."""
        p_y = self.y_marginal
        out = np.zeros_like(self.pmf)
        pos = p_y > 0
        out[:, pos] = self.pmf[:, pos] / p_y[pos]
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProblemSpec):
            return NotImplemented
        return (
            self.x_alphabet == other.x_alphabet
            and self.y_alphabet == other.y_alphabet
            and self.z_alphabet == other.z_alphabet
            and self.zhat_alphabet == other.zhat_alphabet
            and np.array_equal(self.pmf, other.pmf)
            and np.array_equal(self.func, other.func)
            and np.array_equal(self.dist, other.dist)
        )


def _as_float_matrix(name: str, raw) -> np.ndarray:
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(f"{name} is not a numeric matrix: {exc}") from None
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be a 2-d matrix, got {arr.ndim}-d")
    return arr


def _as_alphabet(name: str, raw) -> Alphabet:
    if isinstance(raw, Alphabet):
        return raw
    if not isinstance(raw, (list, tuple)):
        raise SpecFormatError(f"{name} must be an array of labels")
    return Alphabet(tuple(raw))


def validate_spec(raw) -> ProblemSpec:
    """Validate a raw instance (mapping or ProblemSpec) and return it frozen.

    Checks, in order: matrix shapes against the alphabets, pmf entry signs
    and normalization (|sum - 1| <= 1e-12), positive source marginals,
    function-table index ranges, and distortion entry domain. Errors name
    the offending entry. Validating an already-valid spec returns an equal
    spec, so the operation is idempotent.
    """
    if isinstance(raw, ProblemSpec):
        fields = {
            "x_alphabet": raw.x_alphabet,
            "y_alphabet": raw.y_alphabet,
            "z_alphabet": raw.z_alphabet,
            "zhat_alphabet": raw.zhat_alphabet,
            "p_xy": raw.pmf,
            "f": raw.func,
            "d": raw.dist,
        }
    elif isinstance(raw, dict):
        missing = [k for k in _SPEC_KEYS if k not in raw]
        if missing:
            raise SpecFormatError(f"missing keys: {', '.join(missing)}")
        fields = {k: raw[k] for k in _SPEC_KEYS}
    else:
        raise SpecFormatError(f"cannot validate object of type {type(raw).__name__}")

    x_ab = _as_alphabet("x_alphabet", fields["x_alphabet"])
    y_ab = _as_alphabet("y_alphabet", fields["y_alphabet"])
    z_ab = _as_alphabet("z_alphabet", fields["z_alphabet"])
    zhat_ab = _as_alphabet("zhat_alphabet", fields["zhat_alphabet"])

    pmf = _as_float_matrix("p_xy", fields["p_xy"])
    func_raw = _as_float_matrix("f", fields["f"])
    dist = _as_float_matrix("d", fields["d"])

    if pmf.shape != (x_ab.size, y_ab.size):
        raise DimensionMismatch(
            f"p_xy has shape {pmf.shape}, expected ({x_ab.size}, {y_ab.size})"
        )
    if func_raw.shape != (x_ab.size, y_ab.size):
        raise DimensionMismatch(
            f"f has shape {func_raw.shape}, expected ({x_ab.size}, {y_ab.size})"
        )
    if dist.shape != (z_ab.size, zhat_ab.size):
        raise DimensionMismatch(
            f"d has shape {dist.shape}, expected ({z_ab.size}, {zhat_ab.size})"
        )

    if not np.isfinite(pmf).all():
        i, j = np.argwhere(~np.isfinite(pmf))[0]
        raise SpecFormatError(f"p_xy[{i},{j}] is not finite")
    if (pmf < 0).any():
        i, j = np.argwhere(pmf < 0)[0]
        raise NegativeProbability(f"p_xy[{i},{j}] = {pmf[i, j]!r}")
    total = float(pmf.sum())
    if abs(total - 1.0) > PMF_TOL:
        raise PMFNotNormalized(f"p_xy sums to {total!r}")
    row_sums = pmf.sum(axis=1)
    if (row_sums <= 0).any():
        i = int(np.argmax(row_sums <= 0))
        raise ZeroMarginalRow(f"p(x={x_ab.labels[i]!r}) = 0")

    func = func_raw.astype(int)
    if (func != func_raw).any():
        i, j = np.argwhere(func != func_raw)[0]
        raise IndexOutOfRange(f"f[{i},{j}] = {func_raw[i, j]!r} is not an integer")
    if ((func < 0) | (func >= z_ab.size)).any():
        i, j = np.argwhere((func < 0) | (func >= z_ab.size))[0]
        raise IndexOutOfRange(f"f[{i},{j}] = {func[i, j]} outside [0, {z_ab.size})")

    if not np.isfinite(dist).all():
        i, j = np.argwhere(~np.isfinite(dist))[0]
        raise InvalidDistortionEntry(f"d[{i},{j}] is not finite")
    if (dist < 0).any():
        i, j = np.argwhere(dist < 0)[0]
        raise InvalidDistortionEntry(f"d[{i},{j}] = {dist[i, j]!r} is negative")

    for arr in (pmf, func, dist):
        arr.setflags(write=False)
    return ProblemSpec(x_ab, y_ab, z_ab, zhat_ab, pmf, func, dist)


def spec_to_dict(spec: ProblemSpec) -> dict:
    """Plain-JSON representation of an instance (exact float round-trip)."""
    return {
        "x_alphabet": list(spec.x_alphabet.labels),
        "y_alphabet": list(spec.y_alphabet.labels),
        "z_alphabet": list(spec.z_alphabet.labels),
        "zhat_alphabet": list(spec.zhat_alphabet.labels),
        "p_xy": spec.pmf.tolist(),
        "f": spec.func.tolist(),
        "d": spec.dist.tolist(),
    }


def load_spec(path) -> ProblemSpec:
    """Load and validate a problem document from a JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise SpecFormatError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"{path} is not valid JSON: {exc}") from None
    return validate_spec(raw)


def save_spec(spec: ProblemSpec, path) -> None:
    """Write an instance to a JSON file; load_spec recovers it exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")


def replace_distortion(spec: ProblemSpec, dist: np.ndarray) -> ProblemSpec:
    """Return a validated copy of ``spec`` with a new distortion matrix."""
    return validate_spec(dataclasses.replace(spec, dist=np.array(dist, dtype=float)))


# --- built-in instances -------------------------------------------------


def card_game_spec() -> ProblemSpec:
    """Two players draw distinct cards from {1,2,3}; the decoder wants to
    learn whether the encoder's card is larger, under Hamming distortion.

    p(i, j) = (1/6)(1 - delta_ij), f(x, y) = 1{x > y}, d = Hamming on {0,1}.
    """
    three = ["1", "2", "3"]
    pmf = (1.0 - np.eye(3)) / 6.0
    func = (np.arange(3)[:, None] > np.arange(3)[None, :]).astype(int)
    return validate_spec(
        {
            "x_alphabet": three,
            "y_alphabet": three,
            "z_alphabet": ["0", "1"],
            "zhat_alphabet": ["0", "1"],
            "p_xy": pmf.tolist(),
            "f": func.tolist(),
            "d": [[0.0, 1.0], [1.0, 0.0]],
        }
    )


def shannon_binary_spec() -> ProblemSpec:
    """Uniform binary source, constant side information, identity function,
    Hamming distortion. The curve is the classic 1 - H(D)."""
    return validate_spec(
        {
            "x_alphabet": ["0", "1"],
            "y_alphabet": ["*"],
            "z_alphabet": ["0", "1"],
            "zhat_alphabet": ["0", "1"],
            "p_xy": [[0.5], [0.5]],
            "f": [[0], [1]],
            "d": [[0.0, 1.0], [1.0, 0.0]],
        }
    )


def wyner_ziv_identity_spec(crossover: float = 0.25) -> ProblemSpec:
    """Doubly symmetric binary source observed with side information; the
    decoder reproduces the source itself under Hamming distortion."""
    q = float(crossover)
    pmf = [[(1 - q) / 2, q / 2], [q / 2, (1 - q) / 2]]
    return validate_spec(
        {
            "x_alphabet": ["0", "1"],
            "y_alphabet": ["0", "1"],
            "z_alphabet": ["0", "1"],
            "zhat_alphabet": ["0", "1"],
            "p_xy": pmf,
            "f": [[0, 0], [1, 1]],
            "d": [[0.0, 1.0], [1.0, 0.0]],
        }
    )


BUILTIN_SPECS = {
    "card-game": card_game_spec,
    "shannon-binary": shannon_binary_spec,
    "wyner-ziv-identity": wyner_ziv_identity_spec,
}


def builtin_spec(name: str) -> ProblemSpec:
    """Look up a built-in instance by CLI name."""
    try:
        factory = BUILTIN_SPECS[name]
    except KeyError:
        known = ", ".join(sorted(BUILTIN_SPECS))
        raise SpecFormatError(f"unknown builtin {name!r} (available: {known})") from None
    return factory()


# --- zero-rate endpoint -------------------------------------------------


def zero_rate_recovery(spec: ProblemSpec) -> np.ndarray:
    """Best constant decoder: for each y the zhat minimizing the expected
    distortion against f(X, y), ties broken by lowest index."""
    choices = np.empty(spec.num_y, dtype=int)
    for y in range(spec.num_y):
        costs = spec.pmf[:, y] @ spec.dist[spec.func[:, y], :]
        choices[y] = int(np.argmin(costs))
    return choices


def zero_rate_distortion(spec: ProblemSpec) -> float:
    """Distortion of the best decoder that ignores the message entirely.

    Returns sum_y p(y) min_zhat sum_x p(x|y) d(f(x,y), zhat). The solver
    reports rate 0 for every target at or above this value.
    """
    total = 0.0
    for y in range(spec.num_y):
        costs = spec.pmf[:, y] @ spec.dist[spec.func[:, y], :]
        total += float(costs.min())
    return total


def min_achievable_distortion(spec: ProblemSpec) -> float:
    """Distortion floor over all channels: every (x, y) pair uses its own
    best reconstruction. Targets below this are infeasible."""
    best = spec.dist[spec.func, :].min(axis=2)
    return float((spec.pmf * best).sum())
