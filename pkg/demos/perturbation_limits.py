"""
Where perturbation stops and the homotopy keeps going
=====================================================

Vincent's and Chien's expansions are the homotopy series with c0 = -1 and
a zero start.  Truncated, they drift once the plate is thick with stretch.
"""

# %%
from fractions import Fraction

from hamplate import IterateConfig, make_boundary, run_iteration
from hamplate.perturbation import check_perturbation_equivalence, check_iteration_equivalence, chien_series

bc = make_boundary("clamped")

# %%
print(check_perturbation_equivalence(bc, 3, "chien").line())
print(check_iteration_equivalence(bc, 1, 3).line())
print(check_perturbation_equivalence(bc, 3, "chien", c0=Fraction(-9, 10), raise_on_failure=False).line())

# %% [markdown]
# Chien's series in the central deflection, six orders, against the
# converged iteration.

# %%
chien = chien_series(bc, 6)
for a in (0.5, 1.0, 2.0, 3.0, 4.0):
    _, _, q_pert, _ = chien.evaluate(Fraction(a).limit_denominator(100))
    ref = run_iteration(IterateConfig(bc=bc, a=a, c0=-0.5, truncation_n=100)).state.q_load
    print(f"a={a:3.1f}  perturbation Q={float(q_pert):10.3f}  homotopy Q={float(ref):10.3f}")
