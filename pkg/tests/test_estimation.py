import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confedsolve import (InvalidOptions, ShapeMismatch, SolverOptions, default_registry,
                         list_algorithms, remake, solve)
from confedsolve.estimation import parameter_l2loss
from confedsolve.problems import linear_decay, lorenz

TIMES = np.linspace(0.1, 1.0, 10)
TIGHT = dict(reltol=1e-8, abstol=1e-10)


def exact_data(lam=-1.0):
    return np.exp(lam * TIMES)[:, None]


def adaptive_algorithms():
    return [d.name for d in list_algorithms(default_registry())
            if d.adaptive and d.name != "autoswitch"] + ["autoswitch(tsit5,rosenbrock23)",
                                                         "autoswitch(tsit5,bdf)"]


def test_self_consistency():
    prob = lorenz()
    ts = np.linspace(0.0, 1.0, 11)
    short = remake(prob, tspan=(0.0, 1.0))
    data = solve(short, "tsit5", saveat=ts, save_everystep=False, **TIGHT).u
    loss = parameter_l2loss(short, "tsit5", ts, data, **TIGHT)
    assert loss(short.p) < 1e-10


def test_true_parameter_beats_wrong_one():
    loss = parameter_l2loss(linear_decay(), "tsit5", TIMES, exact_data())
    assert loss([-1.0]) < loss([-2.0])


def test_blowup_is_infinite():
    loss = parameter_l2loss(linear_decay(), "tsit5", TIMES, exact_data())
    assert loss([1e6]) == math.inf


def test_bad_candidate_shape_is_infinite():
    loss = parameter_l2loss(linear_decay(), "tsit5", TIMES, exact_data())
    assert loss([1.0, 2.0]) == math.inf


def test_shape_mismatch_at_construction():
    with pytest.raises(ShapeMismatch):
        parameter_l2loss(linear_decay(), "tsit5", TIMES, np.zeros((len(TIMES), 2)))
    with pytest.raises(ShapeMismatch):
        parameter_l2loss(linear_decay(), "tsit5", TIMES, np.zeros(len(TIMES) - 1))


def test_times_validated():
    with pytest.raises(InvalidOptions):
        parameter_l2loss(linear_decay(), "tsit5", [0.5, 2.0], np.zeros(2))
    with pytest.raises(InvalidOptions):
        parameter_l2loss(linear_decay(), "tsit5", [0.5, 0.2], np.zeros(2))


def test_opts_object_respected():
    opts = SolverOptions(reltol=1e-10, abstol=1e-12, save_everystep=True)
    loss = parameter_l2loss(linear_decay(), "dp5", TIMES, exact_data(), opts)
    assert loss([-1.0]) < 1e-16


@pytest.mark.parametrize("alg", adaptive_algorithms())
def test_algorithm_agnostic(alg):
    loss = parameter_l2loss(linear_decay(), alg, TIMES, exact_data(), **TIGHT)
    assert loss([-1.0]) < 1e-8


def test_grid_search_recovers_lambda():
    loss = parameter_l2loss(linear_decay(), "tsit5", TIMES, exact_data(), **TIGHT)
    grid = np.linspace(-3.0, 0.0, 31)
    best = grid[int(np.argmin([loss([lam]) for lam in grid]))]
    assert abs(best + 1.0) < 0.5 * (grid[1] - grid[0])


@given(st.floats(min_value=-5.0, max_value=2.0))
@settings(max_examples=40, deadline=None)
def test_loss_nonnegative(lam):
    loss = parameter_l2loss(linear_decay(), "tsit5", TIMES, exact_data())
    assert loss([lam]) >= 0.0


def test_zero_iff_matches():
    data = exact_data(-0.5)
    sol = solve(linear_decay(-0.5), "tsit5", saveat=TIMES, save_everystep=False)
    loss = parameter_l2loss(linear_decay(), "tsit5", TIMES, sol.u)
    assert loss([-0.5]) == 0.0
    assert parameter_l2loss(linear_decay(), "tsit5", TIMES, data)([-0.5]) > 0.0
