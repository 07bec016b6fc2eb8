"""Coherent-state style coarse-graining of torus observables onto a lattice.

A bounded function f on the torus becomes a diagonal observable on the N x N
lattice by averaging over cells: entry(p) = N^2 * integral of f over the
half-open 1/N-cell centered at p/N.  The reverse direction turns a diagonal
observable into the step function that is constant on each cell.  Both maps
send the constant one to the constant one and preserve positivity.

The two-point correspondence kernel K(x, y) is 1 exactly when n discrete
steps carry the cell of x onto the cell of y, else 0.  Three diagnostics
quantify how long the lattice dynamics tracks the continuous map:

* `egorov_defect`: L2 distance between f evolved continuously for j steps
  and the cell-entry observable transported along the lattice orbit;
* `check_dynamical_localization`: with N above an explicit family threshold,
  the kernel vanishes for every sampled pair farther apart than d0 after n
  continuous steps (zero tolerance);
* `check_orbit_shadowing`: the lattice orbit of the rounded point stays
  within an explicit family bound of the continuous orbit for all
  intermediate times.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .lattice import (
    LatticeConfig,
    LatticePoint,
    TorusPoint,
    matrix_power_mod,
    round_coordinates,
    round_to_lattice,
    torus_distance_arrays,
)
from .maps import (
    Family,
    SpectralData,
    ToralMatrix,
    classify,
    matrix_power_entries,
    scaling_function,
)
from .rectangles import TorusRectangle, cell_interval_pieces, pieces_overlap

__all__ = [
    "ThresholdUnmetError",
    "Observable",
    "DiagonalObservable",
    "discretize_aw",
    "dediscretize_aw",
    "dediscretize_many",
    "kernel",
    "kernel_many",
    "egorov_defect",
    "kernel_defect",
    "localization_threshold",
    "shadowing_threshold",
    "LocalizationReport",
    "ShadowingReport",
    "check_dynamical_localization",
    "check_orbit_shadowing",
]

# Mesh rows are processed in blocks of roughly this many points so the
# work arrays stay small; the block size is fixed, which keeps float
# accumulation order (and hence output bytes) reproducible.
_MESH_BLOCK = 1 << 22


class ThresholdUnmetError(ValueError):
    """The lattice is too coarse for the requested guaranteed-tracking check."""


@dataclass(frozen=True)
class Observable:
    """A bounded torus function: vectorized callable plus declared sup bound.

    `fn` maps coordinate arrays (x1, x2) in [0, 1) to values.  When the
    function is an indicator of a finite union of rational rectangles, pass
    them as `rectangles`; cell averages are then computed by exact interval
    overlap instead of quadrature.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    bound: float
    rectangles: Optional[tuple[TorusRectangle, ...]] = None
    name: str = ""

    def __post_init__(self) -> None:
        if not (self.bound >= 0.0) or not math.isfinite(self.bound):
            raise ValueError(f"observable bound must be finite and >= 0, got {self.bound}")

    @classmethod
    def from_function(
        cls, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], bound: float, name: str = ""
    ) -> "Observable":
        return cls(fn=fn, bound=float(bound), name=name)

    @classmethod
    def indicator(cls, rects: Union[TorusRectangle, tuple], name: str = "") -> "Observable":
        if isinstance(rects, TorusRectangle):
            rects = (rects,)
        rects = tuple(rects)

        def fn(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
            out = np.zeros(np.broadcast(x1, x2).shape)
            for rect in rects:
                out += rect.contains_arrays(x1, x2)
            return out

        return cls(fn=fn, bound=1.0, rectangles=rects, name=name)

    def __call__(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        return self.fn(x1, x2)


@dataclass(frozen=True, eq=False)
class DiagonalObservable:
    """Diagonal lattice observable: one entry per lattice point, row-major."""

    cfg: LatticeConfig
    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.entries)
        if arr.shape != (self.cfg.points,):
            raise ValueError(
                f"expected {self.cfg.points} entries, got shape {arr.shape}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    def entry(self, p: LatticePoint) -> complex:
        return self.entries[self.cfg.index(p.p1, p.p2)]

    def lattice_mean(self) -> complex:
        """The normalized trace (uniform lattice state) of the observable."""
        return self.entries.mean()


def _cell_axis_coordinates(n: int, quadrature: int) -> np.ndarray:
    """Midpoint sub-grid coordinates along one axis, grouped by cell.

    Returns an (n, quadrature) array whose row p holds the quadrature
    points of cell p: (p + (i + 1/2)/q - 1/2) / N mod 1.  quadrature = 1
    degenerates to the cell center p/N.
    """
    offsets = ((np.arange(quadrature) + 0.5) / quadrature - 0.5)[None, :]
    return ((np.arange(n)[:, None] + offsets) / n) % 1.0


def _indicator_entries(rects: tuple[TorusRectangle, ...], cfg: LatticeConfig) -> np.ndarray:
    """Exact cell averages of an indicator: N^2 * overlap(cell, rectangles)."""
    n = cfg.size
    entries = np.zeros(cfg.points)
    cell_x = [cell_interval_pieces(p, n) for p in range(n)]
    for rect in rects:
        wx = np.array(
            [float(n * pieces_overlap(cell_x[p], rect.x_pieces())) for p in range(n)]
        )
        wy = np.array(
            [float(n * pieces_overlap(cell_x[p], rect.y_pieces())) for p in range(n)]
        )
        entries += np.kron(wx, wy)
    return entries


def discretize_aw(f: Observable, cfg: LatticeConfig, quadrature: int = 1) -> DiagonalObservable:
    """Cell averages of f: entry(p) = N^2 * integral of f over cell(p).

    The integral is approximated by the midpoint rule on a quadrature x
    quadrature sub-grid per cell; quadrature = 1 samples the cell center
    exactly.  Indicator observables with declared rectangles bypass
    quadrature entirely and use exact interval overlaps.  The map is
    unital and positive: constants map to constants and f >= 0 gives
    entries >= 0 up to quadrature exactness.
    """
    if quadrature < 1:
        raise ValueError(f"quadrature must be >= 1, got {quadrature}")
    if f.rectangles is not None:
        return DiagonalObservable(cfg, _indicator_entries(f.rectangles, cfg))
    n = cfg.size
    q = quadrature
    coords = _cell_axis_coordinates(n, q)  # (n, q)
    flat = coords.ravel()  # n*q values, cell-major
    entries = np.empty((n, n))
    # Row blocks keep the (n*q)^2 evaluation mesh bounded in memory.
    rows_per_block = max(1, _MESH_BLOCK // (n * q * q))
    for start in range(0, n, rows_per_block):
        stop = min(start + rows_per_block, n)
        xs = coords[start:stop].ravel()  # (rows*q,)
        vals = np.asarray(f(xs[:, None], flat[None, :]))
        vals = np.broadcast_to(vals, (xs.size, flat.size))  # (rows*q, n*q)
        vals = vals.reshape(stop - start, q, n, q)
        entries[start:stop] = vals.mean(axis=(1, 3))
    return DiagonalObservable(cfg, entries.ravel())


def dediscretize_aw(X: DiagonalObservable, x: TorusPoint) -> complex:
    """Value at x of the step function built from X: the entry of x's cell."""
    p = round_to_lattice(x, X.cfg)
    return X.entries[X.cfg.index(p.p1, p.p2)]


def dediscretize_many(X: DiagonalObservable, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Vectorized step-function evaluation for coordinate arrays in [0, 1)."""
    n = X.cfg.size
    idx = round_coordinates(x1, n) * n + round_coordinates(x2, n)
    return X.entries[idx]


def kernel(T: ToralMatrix, cfg: LatticeConfig, n: int, x: TorusPoint, y: TorusPoint) -> int:
    """Two-point correspondence kernel: 1 iff U**n carries cell(x) to cell(y).

    Exact integer comparison of U**n(round(x)) with round(y); the squared
    kernel summed against the normalized counting measure in y therefore
    integrates to exactly 1 for every x.
    """
    p = round_to_lattice(x, cfg)
    q = round_to_lattice(y, cfg)
    m = matrix_power_mod(T, n, cfg.size)
    hit = (
        (m[0] * p.p1 + m[1] * p.p2) % cfg.size == q.p1
        and (m[2] * p.p1 + m[3] * p.p2) % cfg.size == q.p2
    )
    return 1 if hit else 0


def kernel_many(
    T: ToralMatrix,
    cfg: LatticeConfig,
    n: int,
    x1: np.ndarray,
    x2: np.ndarray,
    y1: np.ndarray,
    y2: np.ndarray,
) -> np.ndarray:
    """Vectorized kernel evaluation over paired coordinate arrays."""
    size = cfg.size
    m = matrix_power_mod(T, n, size)
    p1 = round_coordinates(x1, size)
    p2 = round_coordinates(x2, size)
    q1 = round_coordinates(y1, size)
    q2 = round_coordinates(y2, size)
    hit = ((m[0] * p1 + m[1] * p2) % size == q1) & ((m[2] * p1 + m[3] * p2) % size == q2)
    return hit.astype(np.int64)


def _mesh_offset(grid: int, size: int) -> float:
    """Mesh phase that avoids sampling on cell boundaries (k + 1/2)/N.

    For an even multiple of N the half-step phase works ((2i+1)N = (2k+1)G
    has no solution); for an odd multiple the plain grid i/G does; any
    other grid gets the half-step phase, where exact collisions are
    sporadic at worst and measure zero in the quadrature.
    """
    if grid % (2 * size) == 0:
        return 0.5
    if grid % size == 0:
        return 0.0
    return 0.5


def _orbit_cell_indices(
    T: Optional[ToralMatrix], cfg: LatticeConfig, steps: int, p1: np.ndarray, p2: np.ndarray
) -> np.ndarray:
    """Flat indices of U**steps applied to integer lattice coordinates."""
    size = cfg.size
    if T is None:
        return p1 * size + p2
    m = matrix_power_mod(T, steps, size)
    q1 = (m[0] * p1 + m[1] * p2) % size
    q2 = (m[2] * p1 + m[3] * p2) % size
    return q1 * size + q2


def egorov_defect(
    T: ToralMatrix,
    cfg: LatticeConfig,
    f: Observable,
    steps: int,
    grid: int,
    quadrature: int = 4,
    table: Optional[DiagonalObservable] = None,
) -> float:
    """L2 gap between continuous evolution of f and its lattice transport.

    Computes the L2(torus) norm of
        x -> f(T**steps x) - entry_{U**steps(round(x))}(discretize(f))
    by midpoint quadrature on a grid x grid mesh whose phase avoids the
    discontinuity lines of the step function.  A precomputed cell-average
    `table` for f may be supplied to amortize sweeps over many step counts.
    """
    if grid < cfg.size:
        raise ValueError(f"grid must be >= lattice size {cfg.size}, got {grid}")
    if table is None:
        table = discretize_aw(f, cfg, quadrature)
    elif table.cfg != cfg:
        raise ValueError("precomputed table belongs to a different lattice")
    size = cfg.size
    phase = _mesh_offset(grid, size)
    axis = (np.arange(grid) + phase) / grid
    m_float = tuple(float(v) for v in matrix_power_entries(T, steps))
    m_mod = matrix_power_mod(T, steps, size)
    total = 0.0
    rows_per_block = max(1, _MESH_BLOCK // grid)
    for start in range(0, grid, rows_per_block):
        stop = min(start + rows_per_block, grid)
        x1 = axis[start:stop, None]
        x2 = axis[None, :]
        cont = f((m_float[0] * x1 + m_float[1] * x2) % 1.0,
                 (m_float[2] * x1 + m_float[3] * x2) % 1.0)
        p1 = round_coordinates(x1, size)
        p2 = round_coordinates(x2, size)
        idx = ((m_mod[0] * p1 + m_mod[1] * p2) % size) * size + (
            (m_mod[2] * p1 + m_mod[3] * p2) % size
        )
        diff = cont - table.entries[idx]
        total += float(np.sum(np.abs(diff) ** 2))
    return math.sqrt(total / (grid * grid))


def kernel_defect(
    T: ToralMatrix,
    cfg: LatticeConfig,
    f: Observable,
    steps: int,
    grid: int,
    quadrature: int = 4,
) -> float:
    """Same defect via the kernel-average route, as an independent check.

    The normalized y-integral of f against the squared correspondence
    kernel collapses to the cell average of f at the lattice image of
    round(x); this function evaluates that form with its own single-step
    orbit walk and its own cell-average accumulation, sharing no table or
    permutation machinery with `egorov_defect`.  The two implementations
    agree to float reordering (about 1e-12 relative).
    """
    if grid < cfg.size:
        raise ValueError(f"grid must be >= lattice size {cfg.size}, got {grid}")
    if quadrature < 1:
        raise ValueError(f"quadrature must be >= 1, got {quadrature}")
    size = cfg.size
    # Independent cell-average pass: accumulate sub-grid samples cell by cell.
    if f.rectangles is not None:
        averages = _indicator_entries(f.rectangles, cfg)
    else:
        q = quadrature
        averages = np.zeros((size, size))
        axis_cells = _cell_axis_coordinates(size, q)
        for a in range(q):
            xs = axis_cells[:, a]
            block = np.zeros((size, size))
            for b in range(q):
                block += f(xs[:, None], axis_cells[None, :, b])
            averages += block
        averages /= q * q
        averages = averages.ravel()
    phase = _mesh_offset(grid, size)
    axis = (np.arange(grid) + phase) / grid
    m_float = tuple(float(v) for v in matrix_power_entries(T, steps))
    # Single-step orbit walk of the rounded mesh, repeated |steps| times.
    one = matrix_power_mod(T, 1 if steps >= 0 else -1, size)
    total = 0.0
    rows_per_block = max(1, _MESH_BLOCK // grid)
    for start in range(0, grid, rows_per_block):
        stop = min(start + rows_per_block, grid)
        x1 = axis[start:stop, None]
        x2 = axis[None, :]
        cont = f((m_float[0] * x1 + m_float[1] * x2) % 1.0,
                 (m_float[2] * x1 + m_float[3] * x2) % 1.0)
        p1 = np.broadcast_to(round_coordinates(x1, size), cont.shape).copy()
        p2 = np.broadcast_to(round_coordinates(x2, size), cont.shape).copy()
        for _ in range(abs(steps)):
            p1, p2 = (one[0] * p1 + one[1] * p2) % size, (one[2] * p1 + one[3] * p2) % size
        diff = averages[p1 * size + p2] - cont
        total += float(np.sum(np.abs(diff) ** 2))
    return math.sqrt(total / (grid * grid))


def localization_threshold(data: SpectralData, steps: int, d0: float) -> float:
    """Family threshold N_M(n): above it the kernel must vanish beyond d0.

    hyperbolic: max((1 + lam**n/sin(beta)) / (d0 sqrt(2)), sqrt(2) lam**n / sin(beta))
    parabolic:  max(sqrt(2) (nJ + 1) / d0, sqrt(2) (2nJ + 1))
    elliptic:   max((eta + 1) / (d0 sqrt(2)), sqrt(2) eta)
    """
    if steps < 0:
        raise ValueError(f"step count must be >= 0, got {steps}")
    if not (0.0 < d0 <= math.sqrt(2.0) / 2.0):
        raise ValueError(f"d0 must lie in (0, sqrt(2)/2], got {d0}")
    root2 = math.sqrt(2.0)
    if data.family is Family.HYPERBOLIC:
        stretch = math.exp(steps * data.xi) / data.sin_beta
        return max((1.0 + stretch) / (d0 * root2), root2 * stretch)
    if data.family is Family.PARABOLIC:
        nj = steps * data.shear
        return max(root2 * (nj + 1.0) / d0, root2 * (2.0 * nj + 1.0))
    return max((data.eta + 1.0) / (d0 * root2), root2 * data.eta)


def shadowing_threshold(data: SpectralData, steps: int) -> float:
    """Family threshold for guaranteed orbit tracking within the stated bound.

    hyperbolic: sqrt(2) lam**n / sin(beta); parabolic: sqrt(2) (2nJ + 1);
    elliptic: sqrt(2) eta.  For N above the threshold, every intermediate
    lattice orbit point stays within threshold/(2N) of the continuous one.
    """
    if steps < 0:
        raise ValueError(f"step count must be >= 0, got {steps}")
    root2 = math.sqrt(2.0)
    if data.family is Family.HYPERBOLIC:
        return root2 * math.exp(steps * data.xi) / data.sin_beta
    if data.family is Family.PARABOLIC:
        return root2 * (2.0 * steps * data.shear + 1.0)
    return root2 * data.eta


@dataclass(frozen=True)
class LocalizationReport:
    """Outcome of a randomized kernel-vanishing check."""

    matrix: tuple[int, int, int, int]
    family: str
    size: int
    steps: int
    gamma: float
    d0: float
    trials: int
    seed: int
    tested_pairs: int
    violations: int
    threshold: float
    premise_satisfied: bool
    growth_scale: float
    growth_bound: float

    def as_dict(self) -> dict:
        return {
            "check": "dynamical_localization",
            "matrix": list(self.matrix),
            "family": self.family,
            "size": self.size,
            "steps": self.steps,
            "gamma": self.gamma,
            "d0": self.d0,
            "trials": self.trials,
            "seed": self.seed,
            "tested_pairs": self.tested_pairs,
            "violations": self.violations,
            "threshold": self.threshold,
            "premise_satisfied": self.premise_satisfied,
            "growth_scale": self.growth_scale,
            "growth_bound": self.growth_bound,
        }


def check_dynamical_localization(
    T: ToralMatrix,
    cfg: LatticeConfig,
    steps: int,
    gamma: float,
    d0: float,
    trials: int,
    seed: int,
) -> LocalizationReport:
    """Sample pairs (x, y), keep those with d(T**n x, y) >= d0, count kernel hits.

    When N exceeds the family threshold N_M(n) the count must be zero: the
    lattice image of x's cell cannot reach the cell of any y that far away.
    Below the threshold, hits are possible and quantify the loss of
    localization.  Deterministic for a fixed seed.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    data = classify(T)
    rng = np.random.default_rng(seed)
    xs = rng.random((trials, 2))
    ys = rng.random((trials, 2))
    m_float = tuple(float(v) for v in matrix_power_entries(T, steps))
    tx1 = (m_float[0] * xs[:, 0] + m_float[1] * xs[:, 1]) % 1.0
    tx2 = (m_float[2] * xs[:, 0] + m_float[3] * xs[:, 1]) % 1.0
    far = torus_distance_arrays(tx1, tx2, ys[:, 0], ys[:, 1]) >= d0
    hits = kernel_many(T, cfg, steps, xs[:, 0], xs[:, 1], ys[:, 0], ys[:, 1]) == 1
    threshold = localization_threshold(data, steps, d0)
    scaling = scaling_function(data, steps) if steps >= 1 else 0.0
    growth_bound = math.log(cfg.size) / gamma
    return LocalizationReport(
        matrix=T.entries,
        family=data.family.value,
        size=cfg.size,
        steps=steps,
        gamma=gamma,
        d0=d0,
        trials=trials,
        seed=seed,
        tested_pairs=int(far.sum()),
        violations=int(np.count_nonzero(hits & far)),
        threshold=threshold,
        premise_satisfied=cfg.size > threshold,
        growth_scale=scaling,
        growth_bound=growth_bound,
    )


@dataclass(frozen=True)
class ShadowingReport:
    """Outcome of a randomized orbit-tracking check."""

    matrix: tuple[int, int, int, int]
    family: str
    size: int
    steps: int
    trials: int
    seed: int
    threshold: float
    bound: float
    max_distance: float
    max_ratio: float

    def as_dict(self) -> dict:
        return {
            "check": "orbit_shadowing",
            "matrix": list(self.matrix),
            "family": self.family,
            "size": self.size,
            "steps": self.steps,
            "trials": self.trials,
            "seed": self.seed,
            "threshold": self.threshold,
            "bound": self.bound,
            "max_distance": self.max_distance,
            "max_ratio": self.max_ratio,
        }


def check_orbit_shadowing(
    T: ToralMatrix, cfg: LatticeConfig, steps: int, trials: int, seed: int
) -> ShadowingReport:
    """Track sampled orbits for all p <= steps and report the worst ratio.

    The distance between the continuous orbit of x and the lattice orbit of
    its rounding, divided by the guaranteed bound threshold/(2N), must stay
    at or below 1.  Requires N strictly above the family threshold, else
    ThresholdUnmetError.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if steps < 0:
        raise ValueError(f"step count must be >= 0, got {steps}")
    data = classify(T)
    threshold = shadowing_threshold(data, steps)
    size = cfg.size
    if size <= threshold:
        raise ThresholdUnmetError(
            f"lattice size {size} is not above the tracking threshold {threshold:.6g} "
            f"for {steps} steps of {T}"
        )
    bound = threshold / (2.0 * size)
    rng = np.random.default_rng(seed)
    xs = rng.random((trials, 2))
    cont1 = xs[:, 0].copy()
    cont2 = xs[:, 1].copy()
    p1 = round_coordinates(cont1, size)
    p2 = round_coordinates(cont2, size)
    one = matrix_power_mod(T, 1, size)
    t = T.entries
    max_distance = float(
        torus_distance_arrays(cont1, cont2, p1 / size, p2 / size).max()
    )
    for _ in range(steps):
        cont1, cont2 = (t[0] * cont1 + t[1] * cont2) % 1.0, (t[2] * cont1 + t[3] * cont2) % 1.0
        p1, p2 = (one[0] * p1 + one[1] * p2) % size, (one[2] * p1 + one[3] * p2) % size
        dist = float(torus_distance_arrays(cont1, cont2, p1 / size, p2 / size).max())
        max_distance = max(max_distance, dist)
    return ShadowingReport(
        matrix=T.entries,
        family=data.family.value,
        size=size,
        steps=steps,
        trials=trials,
        seed=seed,
        threshold=threshold,
        bound=bound,
        max_distance=max_distance,
        max_ratio=max_distance / bound,
    )
