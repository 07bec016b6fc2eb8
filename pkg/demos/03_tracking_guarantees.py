"""Two provable guarantees tie the lattice dynamics to the continuous map.

Localization: after n steps, the lattice image of a cell cannot land farther
than a family-dependent radius from the continuous image.  Above a threshold
lattice size N the single-cell transition "kernel" therefore vanishes for
distant targets — checked here by sampling far pairs and counting hits.

Shadowing: the lattice orbit of a rounded point stays within a guaranteed
distance of the continuous orbit of the original point.  The bound scales
like (growth at n steps)/N, so it is meaningful exactly while n is small
compared to log(N) — the same horizon that reappears in the entropy story.
"""
from torusdyn import (
    LatticeConfig,
    ToralMatrix,
    check_dynamical_localization,
    check_orbit_shadowing,
    classify,
    localization_threshold,
    shadowing_threshold,
)

CASES = [
    ("hyperbolic benchmark", ToralMatrix(2, 1, 1, 1), 256, 3),
    ("unit shear", ToralMatrix(1, 1, 0, 1), 64, 5),
    ("quarter turn", ToralMatrix(0, 1, -1, 0), 16, 4),
]


def main() -> None:
    print("localization: sampled far pairs must never register a kernel hit")
    print(f"{'map':<22} {'N':>6} {'steps':>5} {'threshold':>10} {'far pairs':>10} {'hits':>5}")
    for label, T, size, steps in CASES:
        data = classify(T)
        thr = localization_threshold(data, steps, 0.1)
        rep = check_dynamical_localization(
            T, LatticeConfig(size), steps, 2.0, 0.1, 50_000, seed=1
        )
        print(
            f"{label:<22} {size:>6} {steps:>5} {thr:>10.1f} "
            f"{rep.tested_pairs:>10} {rep.violations:>5}"
        )
    rep = check_dynamical_localization(
        ToralMatrix(2, 1, 1, 1), LatticeConfig(8), 4, 2.0, 0.1, 20_000, seed=1
    )
    print(
        f"{'benchmark, N too small':<22} {8:>6} {4:>5} "
        f"{localization_threshold(classify(ToralMatrix(2, 1, 1, 1)), 4, 0.1):>10.1f} "
        f"{rep.tested_pairs:>10} {rep.violations:>5}   <- guarantee genuinely off"
    )
    print()

    print("shadowing: worst observed distance over the guaranteed bound (must be <= 1)")
    print(f"{'map':<22} {'N':>6} {'steps':>5} {'threshold':>10} {'bound':>10} {'worst ratio':>11}")
    for label, T, size, steps in [
        ("hyperbolic benchmark", ToralMatrix(2, 1, 1, 1), 10_000, 3),
        ("unit shear", ToralMatrix(1, 1, 0, 1), 1_000, 10),
        ("quarter turn", ToralMatrix(0, 1, -1, 0), 100, 5),
    ]:
        data = classify(T)
        rep = check_orbit_shadowing(T, LatticeConfig(size), steps, 50_000, seed=2)
        print(
            f"{label:<22} {size:>6} {steps:>5} {shadowing_threshold(data, steps):>10.1f} "
            f"{rep.bound:>10.2e} {rep.max_ratio:>11.3f}"
        )


if __name__ == "__main__":
    main()
