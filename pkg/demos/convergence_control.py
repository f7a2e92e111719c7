"""
Convergence control on a toy series and on the plate
====================================================

The homotopy series for 1/(1+t) converges only when |1 + c0 (1 + t)| < 1.
The same knob decides whether the plate iteration settles down.
"""

# %%
import os

from hamplate import SearchSpec, geometric_homotopy_sum, make_boundary, optimize_c0
from hamplate.reports import svg_line_chart

OUT = "demo_output"
os.makedirs(OUT, exist_ok=True)

# %% [markdown]
# With c0 = -1 the homotopy series is plain Taylor, dead for t >= 1.
# A smaller |c0| widens the interval to -1 < t < -2/c0 - 1.

# %%
for c0 in (-1.0, -0.4):
    for t in (0.5, 3.0, 5.0):
        s = geometric_homotopy_sum(c0, 60, t)
        print(f"c0={c0:5.2f} t={t:3.1f}  S_60={s: .6g}  exact={1 / (1 + t):.6g}")

# %%
orders = list(range(1, 61))
curves = [(f"t={t}", orders, [abs(geometric_homotopy_sum(-0.4, m, t) - 1 / (1 + t)) for m in orders])
          for t in (1.0, 3.0, 3.9)]
with open(os.path.join(OUT, "geometric_error.svg"), "w") as fh:
    fh.write(svg_line_chart(curves, "c0 = -0.4", "order m", "|S_m - 1/(1+t)|", log_y=True))

# %% [markdown]
# For the clamped plate at a = 5 the residual after a fixed number of
# iteration passes is a smooth function of c0 with one clear valley.

# %%
bc = make_boundary("clamped")
c_star, curve = optimize_c0(bc, 5, SearchSpec.iterative(), workers=os.cpu_count() or 1)
print(f"iterative optimum c0* = {c_star:.3f}")
xs, ys = zip(*curve)
with open(os.path.join(OUT, "residual_vs_c0.svg"), "w") as fh:
    fh.write(svg_line_chart([("30 passes", xs, ys)], "clamped, a = 5", "c0", "E", log_y=True))
