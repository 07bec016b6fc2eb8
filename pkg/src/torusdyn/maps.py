"""Spectral classification of integer unimodular torus maps.

A 2x2 integer matrix T with det T = 1 acts linearly on the plane and, taken
mod 1, invertibly on the 2-torus.  Half the trace decides the character of
the dynamics:

* |tr T| > 2  hyperbolic: real eigenvalues lam, 1/lam with |lam| > 1, so a
  ball is stretched exponentially along the expanding eigendirection;
* |tr T| = 2  parabolic: a single neutral eigendirection, linear shearing;
* |tr T| < 2  elliptic: complex eigenvalues on the unit circle, the matrix
  has finite order (3, 4 or 6) and nothing spreads.

This module computes the derived spectral quantities (expanding eigenvalue,
eigenvector opening angle, largest singular value, shear strength, rotation
angle), the radius of the image of the unit ball under n applications of T,
the growth scale Gamma(n) that controls how long an N x N lattice version
of the map can track the continuous one, and the resulting breaking-time
estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Integral
from typing import Optional

import numpy as np

__all__ = [
    "NonUnimodularError",
    "TrivialMatrixError",
    "Family",
    "ToralMatrix",
    "SpectralData",
    "cat_map",
    "unit_shear",
    "quarter_turn",
    "classify",
    "diameter_formula",
    "diameter_bruteforce",
    "scaling_function",
    "breaking_time",
    "matrix_power_entries",
]


class NonUnimodularError(ValueError):
    """The matrix determinant is not +1, so it does not preserve area."""


class TrivialMatrixError(ValueError):
    """The matrix is plus or minus the identity and generates no dynamics."""


class Family(Enum):
    """Dynamical character of an integer unimodular matrix."""

    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"


@dataclass(frozen=True)
class ToralMatrix:
    """Integer 2x2 matrix with determinant one, acting on the torus mod 1.

    Entries are row-major: [[t11, t12], [t21, t22]].  Plus or minus the
    identity is rejected because it moves nothing (up to sign) and every
    derived quantity would be degenerate.
    """

    t11: int
    t12: int
    t21: int
    t22: int

    def __post_init__(self) -> None:
        for name in ("t11", "t12", "t21", "t22"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, Integral):
                raise TypeError(f"matrix entry {name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        det = self.det
        if det != 1:
            raise NonUnimodularError(f"determinant must be +1, got {det} for {self}")
        if self.t12 == 0 and self.t21 == 0 and self.t11 == self.t22:
            # det == 1 forces t11 == t22 == +-1 here.
            raise TrivialMatrixError(f"{self} is plus or minus the identity")

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.t11, self.t12, self.t21, self.t22)

    @property
    def det(self) -> int:
        return self.t11 * self.t22 - self.t12 * self.t21

    @property
    def trace(self) -> int:
        return self.t11 + self.t22

    def inverse(self) -> "ToralMatrix":
        """Exact inverse: for det 1 the inverse is the integer adjugate."""
        return ToralMatrix(self.t22, -self.t12, -self.t21, self.t11)

    def negated(self) -> "ToralMatrix":
        return ToralMatrix(-self.t11, -self.t12, -self.t21, -self.t22)

    def power_entries(self, n: int) -> tuple[int, int, int, int]:
        """Entries of T**n as exact (arbitrary precision) integers."""
        return matrix_power_entries(self, n)

    def apply(self, x1: float, x2: float) -> tuple[float, float]:
        """Image of a torus point under one application of the map, mod 1."""
        return (
            (self.t11 * x1 + self.t12 * x2) % 1.0,
            (self.t21 * x1 + self.t22 * x2) % 1.0,
        )

    def as_array(self, dtype=np.int64) -> np.ndarray:
        return np.array([[self.t11, self.t12], [self.t21, self.t22]], dtype=dtype)

    def __str__(self) -> str:
        return f"[[{self.t11},{self.t12}],[{self.t21},{self.t22}]]"


def cat_map() -> ToralMatrix:
    """The standard hyperbolic test matrix [[2,1],[1,1]]."""
    return ToralMatrix(2, 1, 1, 1)


def unit_shear() -> ToralMatrix:
    """The parabolic unit shear [[1,1],[0,1]]."""
    return ToralMatrix(1, 1, 0, 1)


def quarter_turn() -> ToralMatrix:
    """The elliptic quarter rotation [[0,1],[-1,0]] (order four)."""
    return ToralMatrix(0, 1, -1, 0)


def _mat_mul(
    a: tuple[int, int, int, int], b: tuple[int, int, int, int]
) -> tuple[int, int, int, int]:
    return (
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    )


def matrix_power_entries(T: ToralMatrix, n: int) -> tuple[int, int, int, int]:
    """Entries of T**n by exact integer squaring; negative n uses the adjugate."""
    if n >= 0:
        base = T.entries
    else:
        base = (T.t22, -T.t12, -T.t21, T.t11)
        n = -n
    result = (1, 0, 0, 1)
    while n:
        if n & 1:
            result = _mat_mul(result, base)
        base = _mat_mul(base, base)
        n >>= 1
    return result


@dataclass(frozen=True)
class SpectralData:
    """Derived spectral quantities of a classified matrix.

    Fields not meaningful for the family are None:

    * semitrace: exact half-trace t; |t| > 1, = 1, < 1 picks the family.
    * eta: largest singular value of T, i.e. the largest eigenvalue of
      sqrt(T' T); this is the one-step maximal stretch of a unit vector.
    * xi: log |lam| for hyperbolic maps (the Lyapunov exponent), else 0.
    * lam: the expanding eigenvalue, |lam| > 1, signed like the trace
      (hyperbolic only).
    * beta: opening angle between expanding and contracting eigendirections,
      in (0, pi), oriented so its sine is positive (hyperbolic only).
    * sin_beta: sin(beta) in the closed form
      (|lam| - 1/|lam|) / (eta - 1/eta) = sqrt(tr^2 - 4) / sqrt(q - 2)
      where q is the sum of squared entries (hyperbolic only).
    * shear: half the off-diagonal entry of the orthogonal triangularization
      [[1, 2J], [0, 1]] of a parabolic map, J = (eta - 1/eta) / 2 > 0.
    * phi: elliptic rotation angle, arccos(semitrace), one of pi/3, pi/2,
      2*pi/3 (elliptic only).
    * period: exact order of an elliptic matrix, one of 3, 4, 6.
    """

    family: Family
    semitrace: Fraction
    eta: float
    xi: float
    lam: Optional[float] = None
    beta: Optional[float] = None
    sin_beta: Optional[float] = None
    shear: Optional[float] = None
    phi: Optional[float] = None
    period: Optional[int] = None


def _eigenvector(T: ToralMatrix, mu: float) -> np.ndarray:
    """A unit eigenvector of T for eigenvalue mu (hyperbolic case).

    Both rows of (T - mu I) are multiples of a common covector; the kernel
    direction can be read off either row, and the better-conditioned one is
    whichever candidate has the larger norm.
    """
    cand_a = np.array([float(T.t12), mu - float(T.t11)])
    cand_b = np.array([mu - float(T.t22), float(T.t21)])
    vec = cand_a if np.dot(cand_a, cand_a) >= np.dot(cand_b, cand_b) else cand_b
    norm = math.hypot(vec[0], vec[1])
    if norm == 0.0:  # cannot happen for a genuinely hyperbolic matrix
        raise ArithmeticError(f"degenerate eigenvector for {T} at eigenvalue {mu}")
    return vec / norm


def _eigen_angle(T: ToralMatrix) -> float:
    """Angle from the expanding to the contracting eigendirection, in (0, pi).

    The sign of the contracting eigenvector is chosen so the (signed) angle
    measured counterclockwise from the expanding one is positive, which
    makes its sine positive as well.
    """
    tr = T.trace
    root = math.sqrt(tr * tr - 4.0)
    mu_plus = (tr + root) / 2.0
    mu_minus = (tr - root) / 2.0
    if abs(mu_plus) >= abs(mu_minus):
        expanding, contracting = mu_plus, mu_minus
    else:
        expanding, contracting = mu_minus, mu_plus
    u = _eigenvector(T, expanding)
    v = _eigenvector(T, contracting)
    cross = u[0] * v[1] - u[1] * v[0]
    if cross < 0.0:
        v = -v
        cross = -cross
    return math.atan2(cross, float(np.dot(u, v)))


def _elliptic_period(T: ToralMatrix) -> int:
    """Exact order of an elliptic matrix by repeated integer multiplication.

    Integer elliptic matrices have order 3, 4 or 6; anything beyond 12 steps
    signals a logic error rather than bad input.
    """
    power = T.entries
    for k in range(1, 13):
        if power == (1, 0, 0, 1):
            return k
        power = _mat_mul(power, T.entries)
    raise AssertionError(f"elliptic matrix {T} did not reach the identity in 12 steps")


_ELLIPTIC_ANGLE = {
    -1: 2.0 * math.pi / 3.0,
    0: math.pi / 2.0,
    1: math.pi / 3.0,
}


def classify(T: ToralMatrix) -> SpectralData:
    """Classify a matrix into its family and compute spectral data.

    The largest singular value eta comes from the closed form
    eta^2 = (q + sqrt(q^2 - 4)) / 2 with q the sum of squared entries;
    det T = 1 gives the convenient exact identities
    eta - 1/eta = sqrt(q - 2) and eta + 1/eta = sqrt(q + 2).
    """
    tr = T.trace
    q = T.t11**2 + T.t12**2 + T.t21**2 + T.t22**2
    semitrace = Fraction(tr, 2)
    eta = math.sqrt((q + math.sqrt(float(q * q - 4))) / 2.0)
    if abs(tr) > 2:
        root = math.sqrt(float(tr * tr - 4))
        lam = (tr + root) / 2.0 if tr > 0 else (tr - root) / 2.0
        xi = math.log(abs(lam))
        sin_beta = root / math.sqrt(float(q - 2))
        beta = _eigen_angle(T)
        return SpectralData(
            family=Family.HYPERBOLIC,
            semitrace=semitrace,
            eta=eta,
            xi=xi,
            lam=lam,
            beta=beta,
            sin_beta=sin_beta,
        )
    if abs(tr) == 2:
        shear = math.sqrt(float(q - 2)) / 2.0
        return SpectralData(
            family=Family.PARABOLIC,
            semitrace=semitrace,
            eta=eta,
            xi=0.0,
            shear=shear,
        )
    return SpectralData(
        family=Family.ELLIPTIC,
        semitrace=semitrace,
        eta=eta,
        xi=0.0,
        phi=_ELLIPTIC_ANGLE[tr],
        period=_elliptic_period(T),
    )


def diameter_formula(data: SpectralData, n: int) -> float:
    """Radius D(n) of the image of the unit ball under n applications.

    D(n) is the largest singular value of T**n.  Closed forms per family:

    * hyperbolic: sinh(log D) = sinh(n xi) / sin(beta), i.e.
      D = z + sqrt(z^2 + 1) with z = sinh(n xi) / sin(beta);
    * parabolic: D = n J + sqrt(n^2 J^2 + 1) with J the shear strength;
    * elliptic: the sequence is periodic with values in {1, eta}; D = 1
      exactly when T**n is plus or minus the identity, which happens iff
      n is a multiple of 3 (|semitrace| = 1/2) or of 2 (semitrace = 0).

    n = 0 gives 1 (the unit ball itself) in every family.
    """
    if n < 0:
        raise ValueError(f"step count must be >= 0, got {n}")
    if data.family is Family.HYPERBOLIC:
        z = math.sinh(n * data.xi) / data.sin_beta
    elif data.family is Family.PARABOLIC:
        z = n * data.shear
    else:
        half = 3 if abs(data.semitrace) == Fraction(1, 2) else 2
        return 1.0 if n % half == 0 else data.eta
    return z + math.sqrt(z * z + 1.0)


def diameter_bruteforce(T: ToralMatrix, n: int, samples: int) -> float:
    """Max of |T**n v| over a uniform angular grid of unit vectors.

    The maximum over the grid underestimates the true maximum by a relative
    O((pi/samples)^2), so 1e5 samples is already far below 1e-6.  Refining
    the grid by an integer factor keeps all old sample points, hence the
    estimate is nondecreasing under such refinement.  Matrix entries are
    computed exactly and converted to floats, so results are reliable while
    the entries stay below 2**53.
    """
    if samples < 64:
        raise ValueError(f"need at least 64 samples, got {samples}")
    a, b, c, d = (float(v) for v in matrix_power_entries(T, n))
    theta = 2.0 * math.pi * np.arange(samples) / samples
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    norms = np.hypot(a * cos_t + b * sin_t, c * cos_t + d * sin_t)
    return float(norms.max())


def scaling_function(data: SpectralData, n: int) -> float:
    """Growth scale Gamma(n): n*xi (hyperbolic), log n (parabolic), 0 (elliptic).

    This is the logarithmic growth rate of D(n); the lattice version of the
    map tracks the continuous one roughly while Gamma(n) < log(N)/gamma.
    """
    if n < 1:
        raise ValueError(f"step count must be >= 1, got {n}")
    if data.family is Family.HYPERBOLIC:
        return n * data.xi
    if data.family is Family.PARABOLIC:
        return math.log(n)
    return 0.0


def breaking_time(data: SpectralData, N: int, gamma: float) -> Optional[int]:
    """Largest n >= 1 with Gamma(n) < log(N)/gamma; None when unbounded.

    Elliptic maps have Gamma identically zero, so the correspondence never
    breaks on this scale and None is returned.  Returns 0 when not even a
    single step fits the bound.  The boundary is resolved by exact
    comparison loops rather than one floor() so ties (e.g. N a power whose
    root is hit exactly) land on the strict side.
    """
    if N < 2:
        raise ValueError(f"lattice size must be >= 2, got {N}")
    if gamma <= 1.0:
        raise ValueError(f"gamma must exceed 1, got {gamma}")
    bound = math.log(N) / gamma
    if data.family is Family.ELLIPTIC:
        return None
    if data.family is Family.HYPERBOLIC:
        n = int(bound / data.xi) + 2
        while n >= 1 and n * data.xi >= bound:
            n -= 1
        return max(n, 0)
    n = int(math.exp(bound)) + 2
    while n >= 1 and math.log(n) >= bound:
        n -= 1
    return max(n, 0)
