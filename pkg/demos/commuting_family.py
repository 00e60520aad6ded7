"""Spreading maps that commute with the rotation by (1/2, 0).

Each member is ``h R_theta_i h^-1``, where ``h`` is the spreader built for the
stretched generators and conjugated by ``C_2 = diag(1/2, 1)``. Member ``i``
spreads the fundamental domain at ``t_i`` iterates, and ``theta_i`` tends to
``(1/2, 0)``.

    python demos/commuting_family.py
"""
from fractions import Fraction

import numpy as np

from torus_spreader import FundamentalDomain, build_commuting_family

fam = build_commuting_family(1, 2, [(1, 0), (0, 1)], ell=2)
print(f"largeness j = {fam.j:g}, xi = {fam.recipe.xi}")
dom = FundamentalDomain(30)
R = (Fraction(1, 2), Fraction(0))
P = np.random.default_rng(0).uniform(0, 1, (200, 2))
for i in (1, 2, 3):
    m = fam.map(i)
    comm = np.abs(m(P + np.array([0.5, 0.0])) - (m(P) + np.array([0.5, 0.0]))).max()
    w = fam.certify(i, dom)
    dist = float(abs(fam.theta(i)[0] - R[0]))
    print(f"member {i}: t = {fam.t(i)}, |theta - (1/2,0)| = {dist:.3g}, "
          f"commutator defect {comm:.2g}, gap {w.achieved_gap:.3g} + {w.sampling_slack:.3g} < {1 / w.r:.3g}")
