"""The s-nullity advisor on structured sets.

Whether a set can support a nonzero H^s distribution governs uniqueness for
scattering by rough screens.  The advisor decides the structured cases:
delta-function range, zero-measure sets at nonnegative order, the
Hausdorff-dimension window, and boundary-regularity classes.

Usage: python demos/demo_nullity_advisor.py
"""

import numpy as np

from screenwave.diagnostics import (NullityDescriptor, cantor_descriptor,
                                    nullity_advisor)


def main():
    cantor = cantor_descriptor(2, 1 / 3)
    print(f"middle-third Cantor limit set: dim_H = "
          f"{cantor.hausdorff_dim():.4f} in R^1")
    for s in (-1.0, -0.5, -0.25, -0.1, 0.0, 0.5):
        v = nullity_advisor(cantor, s)
        print(f"  s = {s:+5.2f}: {v.verdict:9s} ({v.rule})")

    dust = cantor_descriptor(3, 1 / 3)
    print(f"\nCantor dust limit set: dim_H = {dust.hausdorff_dim():.4f} in R^2")
    for s in (-1.2, -0.55, -0.3, 0.0):
        v = nullity_advisor(dust, s)
        print(f"  s = {s:+5.2f}: {v.verdict:9s} ({v.rule})")

    lip = NullityDescriptor("lipschitz_boundary", ambient=2)
    print("\nboundary of a Lipschitz open set in R^2:")
    for s in (-0.75, -0.5, 0.0):
        v = nullity_advisor(lip, s)
        print(f"  s = {s:+5.2f}: {v.verdict:9s} ({v.rule})")

    # the undecided boundary case dim_H = n + 2s
    dim = 0.8
    alpha = 2.0 ** (-1.0 / dim)
    edge = nullity_advisor(cantor_descriptor(2, alpha), -0.1)
    print(f"\nboundary case (dim_H = n + 2s = {dim}): {edge.verdict}")


if __name__ == "__main__":
    main()
