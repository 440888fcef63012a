"""Scattering across a Cantor prefractal family.

Solves the sound-soft problem on levels 0..3 of the middle-third Cantor
family with a fixed element-to-feature ratio, and records how the far-field
pattern and the density mass change from level to level.  Trends are
reported, never asserted: convergence of prefractal solutions to a fractal
limit is an open question.

Usage: python demos/demo_prefractal_family.py
"""

from screenwave import WaveContext
from screenwave.diagnostics import prefractal_convergence


def main():
    ctx = WaveContext(k=8.0)
    res = prefractal_convergence(n=2, ratio=1 / 3, level_grid=[0, 1, 2, 3],
                                 ctx=ctx, incident_direction=[0.0, -1.0],
                                 elements_per_feature=3, tol=1e-8)
    print("level  dofs   L1 density mass   far-field diff to next level")
    diffs = res.meta["consecutive_diffs"] + [float("nan")]
    for i, lev in enumerate(res.parameter):
        print(f"{int(lev):5d}  {int(res.quantities['dofs'][i]):5d}"
              f"   {res.quantities['l1_mass'][i]:.6f}"
              f"          {diffs[i]:.4e}")
    print("(differences are RMS over a 13-direction far-field grid)")


if __name__ == "__main__":
    main()
