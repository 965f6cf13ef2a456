import math

import numpy as np
import pytest

from burstkin.errors import (
    GridMismatch,
    NoBracket,
    StiffnessBudgetExceeded,
    ToleranceNotMet,
)
from burstkin.numerics import (
    StepperConfig,
    draw_geometric,
    draw_unit_exponential,
    find_root_monotone,
    integrate_adaptive,
    l1_distance,
    make_rng,
    quad_adaptive,
    trapezoid,
    tv_distance,
)


# ---------------------------------------------------------------------------
# random draws
# ---------------------------------------------------------------------------

def test_rng_golden_sequence():
    # frozen once; a change here means every seeded result in the
    # project silently shifted
    r = make_rng(123, 0)
    got = [r.random() for _ in range(4)]
    assert got == [0.19365083425294516, 0.7541389670292019,
                   0.2762903411491048, 0.15585817969572446]


def test_rng_streams_are_distinct_and_stable():
    a = make_rng(7, 0).random()
    b = make_rng(7, 1).random()
    assert a != b
    assert make_rng(7, 1).random() == b


def test_unit_exponential_golden_and_positive():
    r = make_rng(123, 0)
    got = [draw_unit_exponential(r) for _ in range(3)]
    assert got == [0.21523842216015965, 1.4029888092924088, 0.3233649907145321]
    r = make_rng(5, 0)
    assert all(draw_unit_exponential(r) > 0 for _ in range(1000))


def test_geometric_draws_support_and_mean():
    r = make_rng(123, 0)
    assert [draw_geometric(r, 0.5) for _ in range(8)] == [1, 3, 1, 1, 1, 3, 1, 1]
    r = make_rng(9, 0)
    draws = np.array([draw_geometric(r, 0.7) for _ in range(20000)])
    assert draws.min() >= 1
    assert abs(draws.mean() - 1.0 / 0.3) < 0.1


# ---------------------------------------------------------------------------
# ODE stepper
# ---------------------------------------------------------------------------

def test_stepper_exponential_decay():
    snaps = integrate_adaptive(lambda t, y: -y, np.array([1.0]), 3.0)
    t_end, y_end = snaps[-1]
    assert t_end == 3.0
    assert abs(y_end[0] - math.exp(-3.0)) < 1e-7


def test_stepper_hits_snapshots_exactly():
    times = [0.3, 1.0, 2.5]
    snaps = integrate_adaptive(lambda t, y: -0.5 * y, np.array([2.0]), 2.5,
                               snapshot_times=times)
    assert [t for t, _ in snaps] == times
    for t, y in snaps:
        assert abs(y[0] - 2.0 * math.exp(-0.5 * t)) < 1e-7


def test_stepper_linear_system_against_closed_form():
    # rotation plus damping; solution via the real 2x2 exponential
    a = np.array([[-0.1, 1.0], [-1.0, -0.1]])
    snaps = integrate_adaptive(lambda t, y: a @ y, np.array([1.0, 0.0]), 4.0,
                               StepperConfig(rel_tol=1e-10, abs_tol=1e-13))
    _, y = snaps[-1]
    decay = math.exp(-0.1 * 4.0)
    expected = np.array([decay * math.cos(4.0), -decay * math.sin(4.0)])
    assert np.max(np.abs(y - expected)) < 1e-8


def test_stepper_budget_error():
    cfg = StepperConfig(max_steps=5)
    with pytest.raises(StiffnessBudgetExceeded):
        integrate_adaptive(lambda t, y: -1000.0 * y, np.array([1.0]), 10.0, cfg)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def test_quad_basic_and_halfline():
    assert abs(quad_adaptive(lambda x: x * x, 0.0, 1.0) - 1.0 / 3.0) < 1e-13
    assert abs(quad_adaptive(lambda x: np.exp(-x), 0.0, math.inf) - 1.0) < 1e-11
    assert abs(quad_adaptive(lambda x: np.exp(-x * x), 0.0, math.inf)
               - math.sqrt(math.pi) / 2.0) < 1e-11


def test_quad_integrable_endpoint_singularity():
    # bisection toward a sqrt singularity gains slowly, so ask for a
    # tolerance the panel budget can actually deliver
    assert abs(quad_adaptive(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, 1e-7) - 2.0) < 1e-6


def test_quad_panel_budget():
    with pytest.raises(ToleranceNotMet):
        quad_adaptive(lambda x: np.exp(-x * x), 0.0, math.inf, 1e-13, max_panels=2)


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def test_root_cube():
    x = find_root_monotone(lambda x: x ** 3 - 2.0, 0.0, 2.0)
    assert abs(x - 2.0 ** (1.0 / 3.0)) < 1e-12


def test_root_with_derivative():
    x = find_root_monotone(lambda x: math.exp(x) - 5.0, 0.0, 3.0,
                           fprime=lambda x: math.exp(x))
    assert abs(x - math.log(5.0)) < 1e-12


def test_root_no_bracket():
    with pytest.raises(NoBracket):
        find_root_monotone(lambda x: x + 10.0, 0.0, 1.0)


# ---------------------------------------------------------------------------
# grids and distances
# ---------------------------------------------------------------------------

def test_trapezoid_matches_hand_value():
    grid = np.array([0.0, 1.0, 3.0])
    vals = np.array([0.0, 2.0, 2.0])
    assert trapezoid(vals, grid) == pytest.approx(1.0 + 4.0)


def test_l1_and_tv_on_arrays():
    u = np.array([0.5, 0.5, 0.0])
    v = np.array([0.0, 0.5, 0.5])
    assert l1_distance(u, v) == pytest.approx(1.0)
    assert tv_distance(u, v) == pytest.approx(0.5)


def test_l1_grid_mismatch():
    class Holder:
        def __init__(self, grid, values):
            self.grid = np.asarray(grid, dtype=float)
            self.values = np.asarray(values, dtype=float)

    a = Holder([1.0, 2.0, 3.0], [0.1, 0.2, 0.3])
    b = Holder([1.0, 2.0, 4.0], [0.1, 0.2, 0.3])
    with pytest.raises(GridMismatch):
        l1_distance(a, b)


def test_l1_weighs_by_cell_width_on_grids():
    class Holder:
        def __init__(self, grid, values):
            self.grid = np.asarray(grid, dtype=float)
            self.values = np.asarray(values, dtype=float)

    grid = np.linspace(0.0, 1.0, 101)
    a = Holder(grid, np.ones(101))
    b = Holder(grid, np.zeros(101))
    assert l1_distance(a, b) == pytest.approx(1.0)
