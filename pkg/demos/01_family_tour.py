"""Tour of the three families of integer torus maps and their orbit growth.

Every matrix here has integer entries and determinant 1, so it maps the unit
torus onto itself.  The trace decides everything about growth:

  |trace| > 2   hyperbolic  - orbits of nearby points separate exponentially
  |trace| = 2   parabolic   - separation grows linearly (a shear)
  |trace| < 2   elliptic    - a rigid rotation; no separation at all

The "diameter" D(n) printed below is the largest factor by which n steps can
stretch a small ball.  The closed form is checked against direct maximization
over a dense grid of unit directions.
"""
import numpy as np

from torusdyn import (
    ToralMatrix,
    classify,
    diameter_bruteforce,
    diameter_formula,
    scaling_function,
)

EXAMPLES = [
    ("standard hyperbolic benchmark", ToralMatrix(2, 1, 1, 1)),
    ("a second hyperbolic map", ToralMatrix(3, 2, 1, 1)),
    ("unit shear", ToralMatrix(1, 1, 0, 1)),
    ("steeper transposed shear", ToralMatrix(1, 0, -3, 1)),
    ("quarter turn", ToralMatrix(0, 1, -1, 0)),
    ("sixth-order rotation", ToralMatrix(1, 1, -1, 0)),
]


def main() -> None:
    for label, T in EXAMPLES:
        data = classify(T)
        print(f"== {label}: {T.entries} ==")
        print(f"   family {data.family.value}, trace {T.trace}")
        if data.family.value == "hyperbolic":
            print(f"   expansion factor {data.lam:.6f} per step, rate {data.xi:.6f}")
        elif data.family.value == "parabolic":
            print(f"   shear strength {data.shear}")
        else:
            print(f"   rotation angle {data.phi:.6f} rad, full period {data.period}")
        ns = range(1, 9)
        formula = [diameter_formula(data, n) for n in ns]
        brute = [diameter_bruteforce(T, n, 20_000) for n in ns]
        worst = max(abs(a - b) / a for a, b in zip(formula, brute))
        print("   n        :", "  ".join(f"{n:8d}" for n in ns))
        print("   D(n)     :", "  ".join(f"{v:8.3f}" for v in formula))
        print("   growth fn:", "  ".join(f"{scaling_function(data, n):8.3f}" for n in ns))
        print(f"   (formula vs brute force: worst relative gap {worst:.2e})")
        print()


if __name__ == "__main__":
    main()
