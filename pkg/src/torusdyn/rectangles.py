"""Exact rational rectangles on the torus and polygon area helpers.

Rectangles are products of half-open circle arcs, each stored as a start in
[0, 1) plus a span in (0, 1], so an arc may wrap through the seam at 0.
All geometry here is done in exact `fractions.Fraction` arithmetic: arc
overlaps, rectangle overlap areas, and the convex polygon clipping used to
compute exact areas of linear preimages of rectangles.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "TorusRectangle",
    "arc_pieces",
    "cell_interval_pieces",
    "pieces_overlap",
    "rectangle_overlap_area",
    "polygon_area",
    "clip_polygon_halfplane",
    "clip_polygon_to_box",
]

RationalLike = Union[int, str, Fraction]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, float):
        raise TypeError(
            f"rectangle coordinates must be exact rationals, got float {value!r}; "
            "pass a Fraction or a string like '1/3'"
        )
    return Fraction(value)


@dataclass(frozen=True)
class TorusRectangle:
    """Half-open product arc [x_start, x_start + x_span) x [y_start, ...).

    Starts lie in [0, 1) and spans in (0, 1]; a span may run through the
    seam, e.g. start 7/8 with span 1/4 covers [7/8, 1) and [0, 1/8).
    """

    x_start: Fraction
    x_span: Fraction
    y_start: Fraction
    y_span: Fraction

    def __post_init__(self) -> None:
        for name in ("x_start", "x_span", "y_start", "y_span"):
            object.__setattr__(self, name, _as_fraction(getattr(self, name)))
        for name in ("x_start", "y_start"):
            value = getattr(self, name)
            if not (_ZERO <= value < _ONE):
                raise ValueError(f"{name} must lie in [0, 1), got {value}")
        for name in ("x_span", "y_span"):
            value = getattr(self, name)
            if not (_ZERO < value <= _ONE):
                raise ValueError(f"{name} must lie in (0, 1], got {value}")

    @classmethod
    def from_bounds(
        cls,
        x_lo: RationalLike,
        x_hi: RationalLike,
        y_lo: RationalLike,
        y_hi: RationalLike,
    ) -> "TorusRectangle":
        """Build from circle endpoints; hi <= lo means the arc wraps through 0."""
        x_lo, x_hi = _as_fraction(x_lo), _as_fraction(x_hi)
        y_lo, y_hi = _as_fraction(y_lo), _as_fraction(y_hi)
        spans = []
        for lo, hi in ((x_lo, x_hi), (y_lo, y_hi)):
            if not (_ZERO <= lo < _ONE):
                raise ValueError(f"interval start must lie in [0, 1), got {lo}")
            if lo < hi <= _ONE:
                spans.append(hi - lo)
            elif _ZERO <= hi <= lo:
                spans.append(hi - lo + 1)
            else:
                raise ValueError(f"bad interval bounds ({lo}, {hi})")
        return cls(x_lo, spans[0], y_lo, spans[1])

    @property
    def area(self) -> Fraction:
        return self.x_span * self.y_span

    @property
    def x_end(self) -> Fraction:
        """End coordinate reduced to [0, 1); equals start for a full span."""
        return (self.x_start + self.x_span) % 1

    @property
    def y_end(self) -> Fraction:
        return (self.y_start + self.y_span) % 1

    def x_pieces(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return arc_pieces(self.x_start, self.x_span)

    def y_pieces(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return arc_pieces(self.y_start, self.y_span)

    def contains_arrays(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """Vectorized half-open membership for float coordinates in [0, 1).

        Membership is ((x - start) mod 1) < span per axis.  For dyadic
        boundaries (every power-of-two lattice) the float subtraction is
        exact, so the half-open convention is honored exactly.
        """
        dx = (x1 - float(self.x_start)) % 1.0
        dy = (x2 - float(self.y_start)) % 1.0
        return (dx < float(self.x_span)) & (dy < float(self.y_span))

    def contains(self, x1: float, x2: float) -> bool:
        return bool(self.contains_arrays(np.asarray(x1), np.asarray(x2)))


def arc_pieces(start: Fraction, span: Fraction) -> tuple[tuple[Fraction, Fraction], ...]:
    """Decompose a circle arc into at most two linear intervals inside [0, 1]."""
    end = start + span
    if end <= _ONE:
        return ((start, end),)
    return ((start, _ONE), (_ZERO, end - _ONE))


def cell_interval_pieces(p: int, n: int) -> tuple[tuple[Fraction, Fraction], ...]:
    """Linear pieces of the 1/n circle interval centered at p/n.

    This is one axis of the half-open lattice cell [p/n - 1/(2n), p/n + 1/(2n));
    the cell at p = 0 wraps the seam and decomposes into two pieces.
    """
    start = (Fraction(p, n) - Fraction(1, 2 * n)) % 1
    return arc_pieces(start, Fraction(1, n))


def pieces_overlap(
    a: Iterable[tuple[Fraction, Fraction]], b: Iterable[tuple[Fraction, Fraction]]
) -> Fraction:
    """Total length of the intersection of two unions of linear intervals."""
    b = tuple(b)
    total = _ZERO
    for lo_a, hi_a in a:
        for lo_b, hi_b in b:
            lo = max(lo_a, lo_b)
            hi = min(hi_a, hi_b)
            if hi > lo:
                total += hi - lo
    return total


def rectangle_overlap_area(a: TorusRectangle, b: TorusRectangle) -> Fraction:
    """Exact area of the intersection of two torus rectangles."""
    return pieces_overlap(a.x_pieces(), b.x_pieces()) * pieces_overlap(
        a.y_pieces(), b.y_pieces()
    )


Point = tuple[Fraction, Fraction]


def polygon_area(vertices: Sequence[Point]) -> Fraction:
    """Unsigned area of a simple polygon by the exact shoelace sum."""
    if len(vertices) < 3:
        return _ZERO
    twice = _ZERO
    closed = list(vertices) + [vertices[0]]
    for (x0, y0), (x1, y1) in zip(closed, closed[1:]):
        twice += x0 * y1 - x1 * y0
    return abs(twice) / 2


def clip_polygon_halfplane(
    vertices: Sequence[Point], a: Fraction, b: Fraction, c: Fraction
) -> list[Point]:
    """Clip a convex polygon to the half-plane a*x + b*y <= c, exactly.

    Standard single-plane Sutherland-Hodgman step with rational
    intersections; boundaries are kept (closed half-plane), which is
    harmless for area computations.
    """
    result: list[Point] = []
    count = len(vertices)
    for i in range(count):
        px, py = vertices[i]
        qx, qy = vertices[(i + 1) % count]
        p_in = a * px + b * py <= c
        q_in = a * qx + b * qy <= c
        if p_in:
            result.append((px, py))
        if p_in != q_in:
            denom = a * (qx - px) + b * (qy - py)
            t = (c - a * px - b * py) / denom
            result.append((px + t * (qx - px), py + t * (qy - py)))
    return result


def clip_polygon_to_box(
    vertices: Sequence[Point],
    x_lo: Fraction,
    x_hi: Fraction,
    y_lo: Fraction,
    y_hi: Fraction,
) -> list[Point]:
    """Clip a convex polygon to an axis-aligned box, exactly."""
    poly = list(vertices)
    for a, b, c in (
        (Fraction(-1), _ZERO, -x_lo),
        (Fraction(1), _ZERO, x_hi),
        (_ZERO, Fraction(-1), -y_lo),
        (_ZERO, Fraction(1), y_hi),
    ):
        poly = clip_polygon_halfplane(poly, a, b, c)
        if len(poly) < 3:
            return []
    return poly
