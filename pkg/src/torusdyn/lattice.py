"""Square lattices on the torus and the exact discrete dynamics on them.

The N x N lattice consists of the points p/N with p in (Z/NZ)^2.  An
integer unimodular matrix T restricts to a bijection of the lattice,
U(p) = T p mod N, computed here in exact integer arithmetic, and that
bijection is realized as a permutation table for fast vectorized use.
Rounding a torus point to the lattice follows
p_i = floor(N x_i + 1/2) mod N, so every lattice point owns the half-open
1/N-cell centered on it, and torus distance is the Euclidean distance
minimized over unit shifts in each coordinate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Integral
from pathlib import Path
from typing import Union

import numpy as np

from .maps import ToralMatrix

__all__ = [
    "DEFAULT_CAPACITY",
    "CapacityExceededError",
    "LatticeConfig",
    "TorusPoint",
    "LatticePoint",
    "torus_distance",
    "torus_distance_arrays",
    "round_to_lattice",
    "round_coordinates",
    "matrix_power_mod",
    "discrete_step",
    "Permutation",
    "build_permutation",
    "orbit_period",
]

# Default cap on N^2 table entries: 2**24 points (N = 4096) keeps the
# permutation and orbit-code arrays in the hundreds of megabytes.
DEFAULT_CAPACITY = 1 << 24


class CapacityExceededError(RuntimeError):
    """The requested lattice needs more table entries than the configured cap."""


@dataclass(frozen=True)
class LatticeConfig:
    """An N x N lattice; `size` is N, `points` is the total count N^2."""

    size: int

    def __post_init__(self) -> None:
        if isinstance(self.size, bool) or not isinstance(self.size, Integral):
            raise TypeError(f"lattice size must be an integer, got {self.size!r}")
        object.__setattr__(self, "size", int(self.size))
        if self.size < 2:
            raise ValueError(f"lattice size must be >= 2, got {self.size}")

    @property
    def points(self) -> int:
        return self.size * self.size

    def index(self, p1: int, p2: int) -> int:
        """Row-major flat index of a lattice point."""
        return p1 * self.size + p2

    def point(self, index: int) -> "LatticePoint":
        p1, p2 = divmod(index, self.size)
        return LatticePoint(p1, p2)


@dataclass(frozen=True)
class TorusPoint:
    """A point of the 2-torus; coordinates are reduced mod 1 on construction."""

    x1: float
    x2: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x1", float(self.x1) % 1.0)
        object.__setattr__(self, "x2", float(self.x2) % 1.0)


@dataclass(frozen=True)
class LatticePoint:
    """Integer coordinates of a lattice point, each in [0, N)."""

    p1: int
    p2: int

    def __post_init__(self) -> None:
        for name in ("p1", "p2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, Integral):
                raise TypeError(f"lattice coordinate {name} must be an integer")
            if value < 0:
                raise ValueError(f"lattice coordinate {name} must be >= 0, got {value}")
            object.__setattr__(self, name, int(value))

    def center(self, cfg: LatticeConfig) -> TorusPoint:
        """The torus point p/N this lattice point represents."""
        return TorusPoint(self.p1 / cfg.size, self.p2 / cfg.size)


def torus_distance(a: TorusPoint, b: TorusPoint) -> float:
    """Euclidean distance on the torus: minimize |a - b + shift| over unit shifts.

    With both coordinates in [0, 1) the minimizing shift per coordinate is
    whichever of {-1, 0, 1} folds the difference into [-1/2, 1/2], so the
    distance is at most sqrt(2)/2.
    """
    d1 = abs(a.x1 - b.x1)
    d1 = min(d1, 1.0 - d1)
    d2 = abs(a.x2 - b.x2)
    d2 = min(d2, 1.0 - d2)
    return math.hypot(d1, d2)


def torus_distance_arrays(
    ax1: np.ndarray, ax2: np.ndarray, bx1: np.ndarray, bx2: np.ndarray
) -> np.ndarray:
    """Vectorized torus distance for coordinate arrays already in [0, 1)."""
    d1 = np.abs(ax1 - bx1)
    d1 = np.minimum(d1, 1.0 - d1)
    d2 = np.abs(ax2 - bx2)
    d2 = np.minimum(d2, 1.0 - d2)
    return np.hypot(d1, d2)


def round_to_lattice(x: TorusPoint, cfg: LatticeConfig) -> LatticePoint:
    """Nearest lattice point, p_i = floor(N x_i + 1/2) mod N.

    The floor keeps the convention explicit: a coordinate exactly halfway
    between two lattice points rounds up (and wraps to 0 past the seam).
    The rounding error in torus distance is at most 1/(sqrt(2) N).
    """
    n = cfg.size
    return LatticePoint(
        int(math.floor(n * x.x1 + 0.5)) % n,
        int(math.floor(n * x.x2 + 0.5)) % n,
    )


def round_coordinates(coords: np.ndarray, size: int) -> np.ndarray:
    """Vectorized rounding of torus coordinates in [0, 1) to integers mod N."""
    return np.floor(coords * size + 0.5).astype(np.int64) % size


def matrix_power_mod(T: ToralMatrix, n: int, modulus: int) -> tuple[int, int, int, int]:
    """Entries of T**n reduced mod `modulus`, by modular squaring.

    Negative powers use the integer adjugate (valid because det T = 1), so
    the reduction stays exact for any sign of n.
    """
    if modulus < 1:
        raise ValueError(f"modulus must be >= 1, got {modulus}")
    if n >= 0:
        base = tuple(v % modulus for v in (T.t11, T.t12, T.t21, T.t22))
    else:
        base = tuple(v % modulus for v in (T.t22, -T.t12, -T.t21, T.t11))
        n = -n
    result = (1 % modulus, 0, 0, 1 % modulus)
    while n:
        if n & 1:
            result = (
                (result[0] * base[0] + result[1] * base[2]) % modulus,
                (result[0] * base[1] + result[1] * base[3]) % modulus,
                (result[2] * base[0] + result[3] * base[2]) % modulus,
                (result[2] * base[1] + result[3] * base[3]) % modulus,
            )
        base = (
            (base[0] * base[0] + base[1] * base[2]) % modulus,
            (base[0] * base[1] + base[1] * base[3]) % modulus,
            (base[2] * base[0] + base[3] * base[2]) % modulus,
            (base[2] * base[1] + base[3] * base[3]) % modulus,
        )
        n >>= 1
    return result


def discrete_step(
    T: ToralMatrix, p: LatticePoint, cfg: LatticeConfig, steps: int = 1
) -> LatticePoint:
    """U**steps applied to a lattice point: T**steps p mod N, exactly.

    Negative step counts walk the inverse map.  Commutes with rounding:
    rounding T**j (p/N) to the lattice gives exactly this result because
    T**j p is already integral.
    """
    n = cfg.size
    if not (0 <= p.p1 < n and 0 <= p.p2 < n):
        raise ValueError(f"{p} is outside the {n} x {n} lattice")
    m = matrix_power_mod(T, steps, n)
    return LatticePoint(
        (m[0] * p.p1 + m[1] * p.p2) % n,
        (m[2] * p.p1 + m[3] * p.p2) % n,
    )


def _index_dtype(points: int):
    return np.int32 if points <= np.iinfo(np.int32).max else np.int64


@dataclass(frozen=True, eq=False)
class Permutation:
    """A permutation of the N^2 lattice indices (row-major ell = p1*N + p2).

    `forward[ell]` is the index of U(point(ell)).  Applied to the entry
    vector of a diagonal observable, `evolve_diagonal` produces the entries
    of the observable conjugated by one step of the lattice dynamics
    (new[ell] = old[U(ell)]), which is how the unitary permutation operator
    acts on diagonals.
    """

    cfg: LatticeConfig
    forward: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.forward)
        if arr.shape != (self.cfg.points,):
            raise ValueError(
                f"permutation table must have shape ({self.cfg.points},), got {arr.shape}"
            )
        if not np.issubdtype(arr.dtype, np.integer):
            raise TypeError("permutation table must hold integers")
        counts = np.bincount(arr, minlength=self.cfg.points)
        if counts.size != self.cfg.points or counts.max() != 1:
            raise ValueError("permutation table is not a bijection of the lattice")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "forward", arr)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.cfg == other.cfg and np.array_equal(self.forward, other.forward)

    def apply(self, indices):
        """Image of flat indices (scalar or array) under the permutation."""
        return self.forward[indices]

    def evolve_diagonal(self, entries: np.ndarray) -> np.ndarray:
        """Entries of a diagonal observable after one conjugation step."""
        entries = np.asarray(entries)
        if entries.shape != (self.cfg.points,):
            raise ValueError(
                f"expected {self.cfg.points} diagonal entries, got shape {entries.shape}"
            )
        return entries[self.forward]

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.forward)
        inv[self.forward] = np.arange(self.cfg.points, dtype=self.forward.dtype)
        return Permutation(self.cfg, inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: result(ell) = self(other(ell))."""
        if self.cfg != other.cfg:
            raise ValueError("cannot compose permutations of different lattices")
        return Permutation(self.cfg, self.forward[other.forward])

    def power(self, n: int) -> "Permutation":
        base = self if n >= 0 else self.inverse()
        n = abs(n)
        result = identity_permutation(self.cfg)
        while n:
            if n & 1:
                result = result.compose(base)
            base = base.compose(base)
            n >>= 1
        return result

    @property
    def is_identity(self) -> bool:
        return bool(
            np.array_equal(self.forward, np.arange(self.cfg.points, dtype=self.forward.dtype))
        )

    def save_csv(self, path: Union[str, Path]) -> None:
        """Flat CSV: one target index per line, N^2 lines, row-major."""
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(str(int(v)) for v in self.forward))
            fh.write("\n")

    @staticmethod
    def load_csv(path: Union[str, Path], cfg: LatticeConfig) -> "Permutation":
        values = np.loadtxt(path, dtype=np.int64)
        return Permutation(cfg, values.astype(_index_dtype(cfg.points)))

    def save_binary(self, path: Union[str, Path]) -> None:
        """Flat binary: N^2 little-endian int64 values, row-major."""
        self.forward.astype("<i8").tofile(path)

    @staticmethod
    def load_binary(path: Union[str, Path], cfg: LatticeConfig) -> "Permutation":
        values = np.fromfile(path, dtype="<i8")
        return Permutation(cfg, values.astype(_index_dtype(cfg.points)))


def identity_permutation(cfg: LatticeConfig) -> Permutation:
    return Permutation(cfg, np.arange(cfg.points, dtype=_index_dtype(cfg.points)))


def build_permutation(
    T: ToralMatrix, cfg: LatticeConfig, capacity: int = DEFAULT_CAPACITY
) -> Permutation:
    """Permutation table of the one-step lattice map U(p) = T p mod N.

    Vectorized and exact: entries are reduced mod N first, so all products
    stay well inside int64.  Raises CapacityExceededError when N^2 exceeds
    `capacity`.
    """
    points = cfg.points
    if points > capacity:
        raise CapacityExceededError(
            f"lattice has {points} points, above the configured capacity {capacity}"
        )
    n = cfg.size
    m = matrix_power_mod(T, 1, n)
    idx = np.arange(points, dtype=np.int64)
    p1 = idx // n
    p2 = idx - n * p1
    q1 = (m[0] * p1 + m[1] * p2) % n
    q2 = (m[2] * p1 + m[3] * p2) % n
    forward = (q1 * n + q2).astype(_index_dtype(points))
    return Permutation(cfg, forward)


def orbit_period(
    T: ToralMatrix, cfg: LatticeConfig, capacity: int = DEFAULT_CAPACITY
) -> int:
    """Least m >= 1 with U**m = identity: the lcm of the permutation's cycles."""
    perm = build_permutation(T, cfg, capacity)
    forward = perm.forward
    points = cfg.points
    visited = np.zeros(points, dtype=bool)
    period = 1
    for start in range(points):
        if visited[start]:
            continue
        length = 0
        cursor = start
        while not visited[cursor]:
            visited[cursor] = True
            cursor = int(forward[cursor])
            length += 1
        period = math.lcm(period, length)
    return period
