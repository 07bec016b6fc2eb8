"""How long does the lattice faithfully evolve a smooth observable?

Discretize f(x) = sin(2 pi x1) to cell averages, push the table along the
lattice permutation for j steps, and compare against the continuously evolved
f(T^j x) in the mean square.  For a hyperbolic map the defect grows like
(expansion factor)^j / N: invisible at first, then crossing order one after
roughly log(N)/rate steps.  Doubling the resolution buys only ~0.72 more
usable steps for the benchmark map — the correspondence horizon is
logarithmic in N, not polynomial.
"""
import math

import numpy as np

from torusdyn import (
    LatticeConfig,
    Observable,
    ToralMatrix,
    classify,
    discretize_aw,
    egorov_defect,
)

CAT = ToralMatrix(2, 1, 1, 1)
SIN1 = Observable.from_function(lambda x1, x2: np.sin(2 * np.pi * x1), 1.0, "sin-x1")


def main() -> None:
    xi = classify(CAT).xi
    print(f"map {CAT.entries}, expansion rate {xi:.4f}, observable sin(2 pi x1)\n")
    stars = {}
    for size in (64, 256, 1024):
        cfg = LatticeConfig(size)
        table = discretize_aw(SIN1, cfg, 4)
        defects = []
        for j in range(int(3 * math.log(size) / xi) + 1):
            defects.append(egorov_defect(CAT, cfg, SIN1, j, 2 * size, table=table))
            if defects[-1] > 0.5:
                break
        cross = next(j for j, d in enumerate(defects) if d >= 0.1)
        lo, hi = math.log(defects[cross - 1]), math.log(defects[cross])
        stars[size] = (cross - 1) + (math.log(0.1) - lo) / (hi - lo)
        print(f"N = {size}")
        print("  j      :", "  ".join(f"{j:7d}" for j in range(len(defects))))
        print("  defect :", "  ".join(f"{d:7.4f}" for d in defects))
        print(f"  crosses 0.1 at j* = {stars[size]:.2f}  (log(N)/rate = {math.log(size)/xi:.2f})")
        print()
    xs = [math.log(s) for s in stars]
    slope = float(np.polyfit(xs, [stars[s] for s in stars], 1)[0])
    print(f"fitted j* vs log(N): slope {slope:.3f}, prediction 1/rate = {1 / xi:.3f}")


if __name__ == "__main__":
    main()
