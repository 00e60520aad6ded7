"""Weak spreading: does some iterate carry a small disk onto an eps-dense set?

A translation never spreads, so the probe reports nothing. A strongly
stretching spreader carries the disk onto a set that is eps-dense in a ball
of radius R.

    python demos/probe.py
"""
from torus_spreader import Translation, build_spreader, convex_hull, weak_spreading_probe

import numpy as np

angles = np.linspace(0, 2 * np.pi, 24, endpoint=False)
U = convex_hull(0.05 * np.column_stack([np.cos(angles), np.sin(angles)]) + 0.5)

print("translation:", weak_spreading_probe(Translation((0.3, 0.1)), U, eps=0.1, R=1, N=5))

recipe = build_spreader([(1, 0), (0, 1)], r=2)
F = recipe.F
w = weak_spreading_probe(F, U, eps=0.5, R=2, N=1)
if w is None:
    print("spreader: not found within N iterates")
else:
    print(f"spreader: n = {w.n}, centre {tuple(round(c, 3) for c in w.center)}, density {w.density:.3g}")
