import math
import warnings
from fractions import Fraction as F

import pytest

from hamplate.errors import NotConverged, OutOfValidatedRange
from hamplate.ham import HamConfig, solve_ham
from hamplate.iterate import (
    IterateConfig,
    SweepRow,
    empirical_c0_iter,
    iterate,
    iteration_steps,
    run_iteration,
    sweep,
    truncation_order,
)
from hamplate.plate import edge_defect, make_boundary
from hamplate.polyseries import RATIONAL, integral_over_y_on_01


@pytest.mark.parametrize("kind,a,n", [
    ("clamped", 15, 150),
    ("moveable-clamped", 20, 260),
    ("clamped", 5, 100),
    ("simple-support", 50, 350),
    ("simple-hinged", 50, 250),
])
def test_truncation_order(kind, a, n):
    assert truncation_order(make_boundary(kind), a) == n


def test_truncation_order_rejects_negative(clamped):
    with pytest.raises(ValueError):
        truncation_order(clamped, -1)


def test_empirical_c0_iter(any_boundary):
    assert empirical_c0_iter(any_boundary, 0) == -1
    assert round(empirical_c0_iter(make_boundary("clamped"), 5), 2) == -0.51
    assert round(empirical_c0_iter(make_boundary("simple-support"), 10), 2) == -0.44
    assert empirical_c0_iter(make_boundary("simple-hinged"), 10) == pytest.approx(-40 / (40 + 10**2.5))
    with pytest.warns(OutOfValidatedRange):
        empirical_c0_iter(make_boundary("clamped"), 40)


def test_config_validation(clamped):
    for bad in (dict(inner_order=0), dict(truncation_n=1), dict(target_residual=0.0),
                dict(ordering="sideways"), dict(ordering="s_first", inner_order=2)):
        with pytest.raises(ValueError):
            IterateConfig(bc=clamped, a=5, c0=-0.5, **bad)
    with pytest.raises(ValueError):
        IterateConfig(bc=clamped, a=5, c0=0)


def test_second_table_row_in_double_precision(clamped):
    cfg = IterateConfig(bc=clamped, a=5, c0=-0.55, truncation_n=100, max_iterations=20,
                        target_residual=1e-10)
    state, trace = iterate(cfg)
    assert len(trace) <= 20
    assert float(trace[-1].e_total) <= 1e-10
    assert round(float(state.q_load), 1) == 132.2


def test_larger_deflection(clamped):
    cfg = IterateConfig(bc=clamped, a=15, c0=-0.10, truncation_n=150, max_iterations=2000)
    state, _ = iterate(cfg)
    assert round(float(state.q_load), 1) == 3152.1


def test_zero_deflection_converges_immediately(clamped):
    cfg = IterateConfig(bc=clamped, a=0, c0=-1, truncation_n=None, backend=RATIONAL)
    state, trace = iterate(cfg)
    assert len(trace) == 1 and trace[0].e_total == 0
    assert state.phi.is_zero() and state.s.is_zero() and state.q_load == 0


def test_not_converged_carries_best_state(clamped):
    cfg = IterateConfig(bc=clamped, a=5, c0=-0.55, max_iterations=3)
    with pytest.raises(NotConverged) as info:
        iterate(cfg)
    assert len(info.value.trace) == 3
    assert info.value.state is not None
    result = run_iteration(cfg)
    assert not result.converged and result.reason == "max-iterations"


def test_restarted_guesses_keep_conditions(any_boundary):
    bc = any_boundary
    cfg = IterateConfig(bc=bc, a=F(3), c0=F(-1, 2), truncation_n=6, backend=RATIONAL)
    steps = iteration_steps(cfg)
    for _ in range(3):
        st = next(steps).state
        assert st.phi.coeff(0) == 0 and st.s.coeff(0) == 0
        assert edge_defect(st.phi, bc.lam) == 0
        assert edge_defect(st.s, bc.mu) == 0
        assert integral_over_y_on_01(st.phi) == -3


@pytest.mark.parametrize("k", [1, 2, 3])
def test_single_untruncated_pass_equals_series(any_boundary, k):
    c0 = F(-2, 5)
    series, rep = solve_ham(HamConfig(c0, k, any_boundary, F(2), RATIONAL))
    cfg = IterateConfig(bc=any_boundary, a=F(2), c0=c0, truncation_n=None, inner_order=k,
                        backend=RATIONAL)
    st = next(iteration_steps(cfg)).state
    assert st.phi == series.phi() and st.s == series.s() and st.q_load == rep.q_load


def test_more_iterations_never_worse(clamped):
    def best(n):
        r = run_iteration(IterateConfig(bc=clamped, a=10, c0=-0.2, max_iterations=n, q_rtol=0.0))
        return min(float(t.e_total) for t in r.trace)

    assert best(40) <= best(20)


def test_trace_keeps_only_last_polynomials(clamped):
    r = run_iteration(IterateConfig(bc=clamped, a=5, c0=-0.55, max_iterations=4))
    assert all(t.r1 is None for t in r.trace[:-1])
    assert r.trace[-1].r1 is not None


def test_sweep_rows_in_order_and_failures_recorded(clamped):
    rows = sweep(clamped, [10, 0, 5], {"max_iterations": 3})
    assert [r.a for r in rows] == [10, 0, 5]
    assert rows[1].Q == 0 and rows[1].converged
    assert not rows[0].converged and rows[0].error == "NotConverged"
    assert set(rows[0].as_dict()) >= set(SweepRow.CSV_FIELDS)


def test_sweep_overrides_and_workers(clamped):
    serial = sweep(clamped, [3, 5], {"c0": -0.4, "truncation_n": 100})
    assert all(r.c0 == -0.4 and r.N == 100 for r in serial)
    parallel = sweep(clamped, [3, 5], {"c0": -0.4, "truncation_n": 100}, workers=2)
    assert [r.Q for r in parallel] == [r.Q for r in serial]


def test_sweep_rejects_empty(clamped):
    with pytest.raises(ValueError):
        sweep(clamped, [])


def test_sweep_uses_formulas(clamped):
    with warnings.catch_warnings():
        warnings.simplefilter("error", OutOfValidatedRange)
        (row,) = sweep(clamped, [40], {"max_iterations": 1})
    assert row.N == 400
    assert row.c0 == pytest.approx(-26 / (26 + 1600))
    assert math.isfinite(row.Q)
