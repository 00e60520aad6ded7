"""Rotation-set estimates for three kinds of lifts.

A translation has a single-point rotation set, and the hull of
``(f^n(D) - D) / n`` shrinks like ``sqrt(2)/n``. A conjugated translation
behaves the same way up to the displacement of the conjugacy. A vertical
shear has unbounded displacement in its fibres, so its hulls do not shrink.

    python demos/rotation_sets.py
"""
from torus_spreader import (
    ConjugatedTranslation, FundamentalDomain, LiftWord, Shear, Translation,
    generalized_rot_estimate, rigidity_profile, rotation_set_estimate,
)

dom = FundamentalDomain(40)
theta = (0.3, 0.1)
maps = {
    "translation": Translation(theta),
    "conjugated translation": ConjugatedTranslation(LiftWord((Shear(0.5, 2),)), theta),
    "shear": Shear(1, 2),
}
for name, m in maps.items():
    print(name)
    for n in (1, 10, 100):
        est = rotation_set_estimate(m, n, dom)
        print(f"  n = {n:>3}: hull diameter {est.diameter:.4g}")
    g = generalized_rot_estimate(m, [10, 20, 40], dom)
    print(f"  diameter trace {[f'{d:.3g}' for d in g.diam_trace]}, diverging {g.diverging}")

golden = (5 ** 0.5 - 1) / 2
prof = rigidity_profile(Translation((golden, 0.0)), 21, dom)
print("golden-ratio translation, rigidity profile at Fibonacci times:")
for n in (1, 2, 3, 5, 8, 13, 21):
    print(f"  n = {n:>2}: {prof[n - 1]:.4g}")
