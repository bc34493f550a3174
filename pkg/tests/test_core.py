import math

import numpy as np
import pytest

from confedsolve import (AlgorithmDescriptor, DuplicateName, Family, InvalidOptions, InvalidProblem,
                         KindMismatch, MissingDt, NoDenseOutput, ODEProblem, OutOfRange,
                         ProblemKind, Registry, ReturnCode, SecondOrderODEProblem, ShapeMismatch,
                         SolverOptions, UnknownAlgorithm, default_algorithm, default_registry,
                         interpolate, list_algorithms, register_algorithm, remake, solve)
from confedsolve.builtins import BUILTINS
from confedsolve.explicit import Euler, RK4Integrator
from confedsolve.problems import harmonic, linear_decay, lorenz


def zero_rhs(du, u, p, t):
    du[:] = 0.0


def unit_rhs(du, u, p, t):
    du[:] = 1.0


# problem values

def test_problem_arrays_are_frozen_copies():
    u0 = np.array([1.0, 2.0])
    prob = ODEProblem(zero_rhs, u0, (0.0, 1.0))
    u0[0] = 99.0
    assert prob.u0[0] == 1.0
    with pytest.raises(ValueError):
        prob.u0[0] = 5.0


@pytest.mark.parametrize("tspan", [(1.0, 1.0), (2.0, 1.0)])
def test_tspan_must_increase(tspan):
    with pytest.raises(InvalidProblem):
        ODEProblem(zero_rhs, [1.0], tspan)


def test_empty_u0_rejected():
    with pytest.raises(InvalidProblem):
        ODEProblem(zero_rhs, [], (0.0, 1.0))


def test_second_order_lengths_must_match():
    with pytest.raises(ShapeMismatch):
        SecondOrderODEProblem(zero_rhs, [0.0, 1.0], [1.0], (0.0, 1.0))


def test_remake_identity_and_override():
    prob = lorenz()
    assert remake(prob) == prob
    other = remake(prob, p=[10.0, 28.0, 8 / 3])
    assert other == prob and other is not prob
    changed = remake(prob, p=[10.0, 28.0, 3.0])
    assert changed != prob
    assert np.array_equal(changed.u0, prob.u0) and changed.tspan == prob.tspan
    assert prob.p[2] == 8 / 3


def test_remake_wrong_shape():
    with pytest.raises(ShapeMismatch):
        remake(lorenz(), u0=[1.0, 2.0])


def test_remake_purity_step_for_step():
    prob = lorenz()
    a = solve(remake(prob, tspan=(0.0, 5.0)), "tsit5")
    b = solve(remake(remake(prob, p=prob.p), tspan=(0.0, 5.0)), "tsit5")
    assert np.array_equal(a.t, b.t) and np.array_equal(a.u, b.u)


# options

@pytest.mark.parametrize("kw", [dict(abstol=0.0, reltol=0.0), dict(abstol=-1.0), dict(dt=0.0),
                                dict(saveat=[0.5, 0.1]), dict(max_steps=0)])
def test_invalid_options(kw):
    with pytest.raises(InvalidOptions):
        SolverOptions(**kw)


def test_saveat_outside_tspan():
    with pytest.raises(InvalidOptions):
        solve(linear_decay(), "tsit5", saveat=[0.5, 2.0])


def test_defaults():
    o = SolverOptions()
    assert (o.abstol, o.reltol, o.adaptive, o.save_everystep, o.dense, o.max_steps) == \
        (1e-6, 1e-3, True, True, True, 10**6)


# registry

def _desc(name, **kw):
    base = dict(problem_kinds={ProblemKind.FIRST_ORDER}, family=Family.EXPLICIT_RK,
                adaptive=False, stiff_capable=False, order=1)
    base.update(kw)
    return AlgorithmDescriptor(name, **base)


def test_fresh_registry_is_empty():
    assert list_algorithms(Registry()) == []


def test_register_and_list_sorted():
    reg = Registry()
    register_algorithm(reg, _desc("rk4", order=4), RK4Integrator)
    register_algorithm(reg, _desc("euler"), Euler)
    assert [d.name for d in list_algorithms(reg)] == ["euler", "rk4"]
    sol = solve(linear_decay(), "euler", dt=0.1, registry=reg)
    assert sol.algorithm_name == "euler" and sol.success


def test_duplicate_name():
    reg = Registry()
    register_algorithm(reg, _desc("euler"), Euler)
    with pytest.raises(DuplicateName):
        register_algorithm(reg, _desc("euler"), Euler)


def test_descriptor_validation():
    with pytest.raises(ValueError):
        _desc("bad", order=0)
    with pytest.raises(ValueError):
        _desc("")


def test_unknown_algorithm_message():
    with pytest.raises(UnknownAlgorithm) as info:
        solve(linear_decay(), "nosuch")
    assert "nosuch" in str(info.value)
    with pytest.raises(UnknownAlgorithm):
        solve(linear_decay(), "autoswitch(tsit5,nosuch)")
    with pytest.raises(UnknownAlgorithm):
        solve(linear_decay(), "tsit5(dp5,bdf)")


def test_second_order_filter_lists_only_verlet():
    names = [d.name for d in list_algorithms(default_registry(), ProblemKind.SECOND_ORDER)]
    assert names == ["verlet"]


def test_builtin_names():
    assert {d.name for d, _ in BUILTINS} == {
        "euler", "rk4", "tsit5", "dp5", "verlet", "rosenbrock23", "bdf", "autoswitch"}


def test_registry_contains():
    reg = default_registry()
    assert "tsit5" in reg and "autoswitch(tsit5,bdf)" in reg and "nosuch" not in reg


# solve

def test_lorenz_tsit5_endpoints():
    sol = solve(lorenz(), "tsit5")
    assert sol.retcode is ReturnCode.SUCCESS
    assert sol.t[0] == 0.0 and sol.t[-1] == 100.0
    assert np.all(np.diff(sol.t) > 0)
    assert sol.stats.naccept == len(sol.t) - 1


@pytest.mark.parametrize("alg", ["tsit5", "dp5", "rosenbrock23", "bdf",
                                 "autoswitch(tsit5,rosenbrock23)"])
def test_zero_field_keeps_state(alg):
    sol = solve(ODEProblem(zero_rhs, [1.0, 2.0], (0.0, 1.0)), alg)
    assert sol.success
    assert all(np.array_equal(u, [1.0, 2.0]) for u in sol.u)


def test_missing_dt():
    with pytest.raises(MissingDt):
        solve(linear_decay(), "euler")
    with pytest.raises(MissingDt):
        solve(linear_decay(), "tsit5", adaptive=False)


def test_kind_mismatch():
    with pytest.raises(KindMismatch):
        solve(linear_decay(), "verlet", dt=0.1)


def test_auto_uses_polyalgorithm():
    prob = lorenz()
    sol = solve(remake(prob, tspan=(0.0, 1.0)))
    assert sol.algorithm_name == default_algorithm(prob, SolverOptions())


def test_explicit_alg_never_substituted():
    sol = solve(linear_decay(), "dp5")
    assert sol.algorithm_name == "dp5"


def test_second_order_reduction_matches_hand_reduced():
    prob = harmonic()

    def f(du, u, p, t):
        du[0] = u[1]
        du[1] = -(p[0] ** 2) * u[0]

    hand = ODEProblem(f, [1.0, 0.0], prob.tspan, prob.p)
    a = solve(prob, "tsit5")
    b = solve(hand, "tsit5")
    assert np.array_equal(a.t, b.t)
    assert np.max(np.abs(a.u - b.u)) < 1e-12


def test_max_steps_retcode():
    sol = solve(lorenz(), "tsit5", max_steps=10)
    assert sol.retcode is ReturnCode.MAX_ITERS and sol.stats.naccept == 10


def test_failure_retcodes():
    # |1 + dt*lam| = 499 overflows within 200 steps
    sol = solve(linear_decay(lam=-1e3, tspan=(0.0, 100.0)), "euler", dt=0.5)
    assert sol.retcode is ReturnCode.UNSTABLE
    sol = solve(ODEProblem(lambda du, u, p, t: du.__setitem__(0, u[0] ** 2), [1.0], (0.0, 2.0)),
                "tsit5")
    assert sol.retcode is not ReturnCode.SUCCESS


# output and interpolation

def test_saveat_without_everystep():
    ts = [0.0, 0.25, 0.5, 1.0]
    sol = solve(linear_decay(), "tsit5", saveat=ts, save_everystep=False)
    assert list(sol.t) == ts
    assert np.allclose(sol.u[:, 0], np.exp(-np.array(ts)), atol=1e-4)


def test_saveat_merged_with_nodes():
    sol = solve(linear_decay(), "tsit5", saveat=[0.3, 0.6])
    assert 0.3 in sol.t and 0.6 in sol.t
    assert np.all(np.diff(sol.t) > 0)


def test_save_everystep_false_keeps_endpoints():
    sol = solve(lorenz(), "tsit5", save_everystep=False)
    assert list(sol.t) == [0.0, 100.0]


def test_node_identity_bitwise():
    sol = solve(lorenz(), "tsit5")
    for i in (0, 3, len(sol.t) // 2, len(sol.t) - 1):
        assert np.array_equal(interpolate(sol, sol.t[i]), sol.u[i])


@pytest.mark.parametrize("alg", ["tsit5", "dp5", "rosenbrock23", "bdf"])
def test_linear_solution_interpolates_exactly(alg):
    sol = solve(ODEProblem(unit_rhs, [0.0], (0.0, 1.0)), alg)
    for tq in (0.5, 0.123, 0.987):
        assert abs(sol(tq)[0] - tq) < 1e-12


def test_out_of_range():
    sol = solve(linear_decay(), "tsit5")
    with pytest.raises(OutOfRange):
        interpolate(sol, 2.0)


def test_no_dense_output():
    sol = solve(linear_decay(), "tsit5", dense=False)
    assert np.array_equal(sol(sol.t[1]), sol.u[1])
    with pytest.raises(NoDenseOutput):
        sol(0.5 * (sol.t[1] + sol.t[2]))


def test_dense_is_continuous_across_nodes():
    sol = solve(lorenz(), "tsit5")
    for i in (5, 50, 500):
        t = sol.t[i]
        left = sol(np.nextafter(t, -math.inf))
        right = sol(np.nextafter(t, math.inf))
        assert np.max(np.abs(left - right)) < 1e-9


def test_stats_counters_nonnegative():
    sol = solve(lorenz(), "rosenbrock23")
    snap = sol.stats.snapshot()
    assert all(v >= 0 for v in snap.values())
    assert snap["njac"] > 0 and snap["nfactor"] > 0
