"""Write SVG figures of a stage trace and of shrinking rotation hulls.

    python demos/render.py [outdir]
"""
import sys
from pathlib import Path

from torus_spreader import (
    ConjugatedTranslation, FundamentalDomain, LiftWord, Shear, build_spreader,
    rotation_set_estimate, verify_stages,
)
from torus_spreader.svg import render_hull_series, render_trace

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-svg")
out.mkdir(exist_ok=True)

recipe = build_spreader([(1, 0)], r=1)
trace = verify_stages(recipe, recipe.admissible_a.offset, 0, FundamentalDomain(20))
render_trace(trace, out / "trace.svg")

m = ConjugatedTranslation(LiftWord((Shear(0.5, 2),)), (0.3, 0.1))
dom = FundamentalDomain(20)
render_hull_series([rotation_set_estimate(m, n, dom) for n in (2, 5, 20, 80)], out / "hulls.svg")
print(f"wrote {out / 'trace.svg'} and {out / 'hulls.svg'}")
