"""Wavenumber-explicit operator bounds, reproduced numerically.

Sweeps the wavenumber and prints, side by side:

* the sampled coercivity quotient floor of the single-layer form against the
  theoretical 1/(2 sqrt 2) = 0.35355...,
* the hypersingular operator-norm surrogate against its 1/2 ceiling, and
* the k-trend of the hypersingular coercivity minimum (expected ~ k^{-1/2}
  on a 1-D screen).

Usage: python demos/demo_coercivity_and_continuity.py
"""

import numpy as np

from screenwave import WaveContext, build_mesh, make_screen
from screenwave.diagnostics import (COERCIVITY_CONSTANT_S,
                                    coercivity_scan_S, coercivity_scan_T,
                                    continuity_estimate)
from screenwave.operators import assemble_hypersingular


def main():
    screen = make_screen(2, [(0.0, 1.0)])

    print(f"single-layer coercivity floor: {COERCIVITY_CONSTANT_S:.6f}")
    for k in (1.0, 5.0, 20.0):
        mesh = build_mesh(screen, 1 / 32, "P0")
        res = coercivity_scan_S(mesh, WaveContext(k), sample_count=400, seed=0)
        print(f"  k={k:5.1f}: min sampled quotient {res.meta['min_quotient']:.5f}"
              f"  [{res.verdict}]")

    print("hypersingular continuity ceiling: 0.5")
    for k in (1.0, 4.0, 16.0):
        mesh = build_mesh(screen, 1 / 32, "P1")
        est = continuity_estimate(assemble_hypersingular(mesh, WaveContext(k)))
        print(f"  k={k:5.1f}: norm surrogate {est:.6f}")

    print("hypersingular coercivity trend (2-D beta = -1/2):")
    res = coercivity_scan_T(screen, [1, 2, 4, 8, 16], sample_count=120, seed=1,
                            tol=1e-8)
    for k, q in zip(res.parameter, res.quantities["min_quotient"]):
        print(f"  k={k:5.1f}: min quotient {q:.5f}")
    print(f"  fitted log-log slope {res.slope:.3f} "
          f"(R^2 {res.r_squared:.3f}, verdict {res.verdict})")


if __name__ == "__main__":
    main()
