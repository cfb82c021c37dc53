import dataclasses
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dofde.fractional import DistributedTerm
from dofde.problem import (
    CaputoTime,
    Distributed,
    Identity,
    PointConstraint,
    Problem,
    builtin,
)
from dofde.solver import (
    DEFAULT_CONFIGS,
    SolverConfig,
    TrainedModel,
    assemble,
    build_bases,
    collocation_grid,
    evaluate,
    expand_constraints,
    lambda_random_search,
    default_config,
    residual_report,
    solve,
    solve_dual,
    solve_primal,
)

from oracles import adaptive_simpson, ridge_lstsq


@pytest.fixture(scope="module")
def models():
    return {pid: solve(builtin(pid), default_config(pid)) for pid in ("ex1", "ex2", "ex3", "ex4")}


def test_config_validation():
    for bad in (dict(gamma=0), dict(picard_tol=0), dict(picard_max_iters=0), dict(formulation="qr"), dict(n_points=0)):
        with pytest.raises(ValueError):
            SolverConfig(**{"d": 3, "n_points": 3, **bad})
    assert SolverConfig((3, 15), (3, 15)).as_dict()["d"] == [3, 15]


def test_default_configs():
    assert default_config("ex1") == SolverConfig(4, 4, 1e12, 0.5, 10)
    assert DEFAULT_CONFIGS["ex4"].d == (3, 15) and DEFAULT_CONFIGS["ex3"].quadrature_order == 7
    with pytest.raises(KeyError):
        default_config("ex7")


def test_collocation_grids():
    p2 = builtin("ex2")
    np.testing.assert_allclose(collocation_grid(p2, SolverConfig(1, 1)), [0.5], atol=1e-15)
    pts = collocation_grid(builtin("ex3"), default_config("ex3"))
    assert pts.shape == (9, 2)
    assert np.all((pts[:, 0] > 0) & (pts[:, 0] < 2) & (pts[:, 1] > 0) & (pts[:, 1] < 1))
    # x is the slow index
    assert np.all(pts[:3, 0] == pts[0, 0])
    roots = np.array([-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526])
    np.testing.assert_allclose(
        collocation_grid(builtin("ex1"), default_config("ex1")), 0.85 + 0.65 * roots, atol=1e-15
    )
    np.testing.assert_allclose(
        collocation_grid(builtin("ex1"), default_config("ex1")),
        [0.2902613974638658, 0.6290123216698433, 1.0709876783301566, 1.4097386025361343],
        atol=1e-15,
    )


def test_collocation_dimension_checks():
    with pytest.raises(ValueError):
        collocation_grid(builtin("ex3"), SolverConfig(3, 3))
    with pytest.raises(ValueError):
        collocation_grid(builtin("ex1"), SolverConfig((3, 3), (3, 3)))


def test_assemble_ex2_constant_column():
    p = builtin("ex2")
    basis = build_bases(p, SolverConfig(3, 3))
    z, rho = assemble(p, basis, [0.2, 0.7])
    assert z.shape == (3, 3)
    np.testing.assert_allclose(z[:2, 0], 0.1, atol=1e-15)
    np.testing.assert_allclose(z[2], [1, -1, 1], atol=1e-15)
    np.testing.assert_array_equal(rho, [0, 0, 1])


def test_assemble_constraint_weight():
    p = builtin("ex2")
    basis = build_bases(p, SolverConfig(3, 3))
    z, rho = assemble(p, basis, [0.2], constraint_weight=5.0)
    np.testing.assert_allclose(z[1], [5, -5, 5], atol=1e-14)
    assert rho[1] == 5.0


def test_assemble_zero_problem():
    with pytest.warns(UserWarning):
        p = Problem("zero", 1, (0, 1), (Distributed(DistributedTerm(lambda th: 0.0, 0.0, 1.0)),), lambda t: 0.0)
    z, rho = assemble(p, build_bases(p, SolverConfig(4, 4)), [0.1, 0.5, 0.9])
    assert z.shape == (3, 4) and not z.any() and not rho.any()


def test_assemble_2d_edges():
    p = builtin("ex3")
    cfg = default_config("ex3")
    basis = build_bases(p, cfg)
    pts = collocation_grid(p, cfg)
    z, rho = assemble(p, basis, pts)
    # 9 collocation rows plus three edges sampled at three coordinates each
    assert z.shape == (18, 9)
    assert not rho[9:].any()


def test_assemble_reports_bad_source():
    p = builtin("ex2")
    p = dataclasses.replace(p, source=lambda t: math.nan if t > 0.5 else 0.0)
    with pytest.raises(FloatingPointError, match="source"):
        assemble(p, build_bases(p, SolverConfig(3, 3)), [0.2, 0.7])


def test_assemble_reports_bad_term():
    p = Problem(
        "bad",
        1,
        (0.0, 1.0),
        (Identity(lambda t: math.inf if t > 0.5 else 1.0),),
        lambda t: 0.0,
        (PointConstraint((0.0,), "value", 1.0),),
    )
    with pytest.raises(FloatingPointError, match="point"):
        assemble(p, build_bases(p, SolverConfig(3, 3)), [0.2, 0.7])


def test_solve_primal_examples():
    np.testing.assert_allclose(solve_primal(np.eye(3), [1, 2, 3], 1e12), [1, 2, 3], atol=1e-9)
    np.testing.assert_allclose(solve_primal(np.eye(3), [1, 0, 0], 1.0), [0.5, 0, 0], atol=1e-15)
    np.testing.assert_array_equal(solve_primal(np.zeros((4, 3)), [1, 2, 3, 4], 1e12), np.zeros(3))


def test_solve_dual_examples():
    beta, w = solve_dual(np.eye(1), [2.0], 1.0)
    assert beta.tolist() == [1.0] and w.tolist() == [1.0]
    _, w = solve_dual(np.eye(3), [1, 2, 3], 1e12)
    np.testing.assert_allclose(w, [1, 2, 3], atol=1e-9)
    beta, w = solve_dual(np.arange(12.0).reshape(4, 3), np.zeros(4), 1e3)
    assert not beta.any() and not w.any()


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(1, 8), st.floats(1e-2, 1e8), st.integers(0, 2**31))
def test_primal_dual_and_ridge_oracle(r, d, gamma, seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(r, d))
    rho = rng.normal(size=r)
    w_p = solve_primal(z, rho, gamma)
    _, w_d = solve_dual(z, rho, gamma)
    ref = ridge_lstsq(z, rho, gamma)
    scale = max(1.0, np.linalg.norm(ref))
    assert np.linalg.norm(w_d - ref) <= 1e-8 * scale
    # with fewer rows than weights Z^T Z is singular up to the ridge, and
    # float64 Cholesky then loses about log10(gamma |Z|^2) digits
    cond = 1.0 if r >= d else gamma * np.linalg.norm(z, 2) ** 2
    assert np.linalg.norm(w_p - ref) <= 1e-8 * scale * max(1.0, cond * 1e-7)


def test_small_instance_oracle():
    # d = N = 3 with an independent normal-equation route
    p = builtin("ex2")
    cfg = SolverConfig(3, 3, gamma=1e4)
    model = solve(p, cfg)
    z, rho = assemble(p, model.basis, collocation_grid(p, cfg))
    ref = ridge_lstsq(z, rho, cfg.gamma)
    np.testing.assert_allclose(model.weights, ref, atol=1e-6)
    # the same optimum minimizes the objective: small nudges only increase it
    obj = lambda w: 0.5 * w @ w + 0.5 * cfg.gamma * np.sum((z @ w - rho) ** 2)
    base = obj(model.weights)
    for k in range(3):
        for h in (1e-4, -1e-4):
            step = np.zeros(3)
            step[k] = h
            assert obj(model.weights + step) >= base


@pytest.mark.parametrize("pid", ["ex1", "ex2", "ex3"])
def test_primal_dual_agreement(pid):
    p = builtin(pid)
    wp = solve(p, default_config(pid)).weights
    dual = solve(p, dataclasses.replace(default_config(pid), formulation="dual"))
    assert np.linalg.norm(dual.weights - wp) <= 1e-6 * np.linalg.norm(wp)
    assert dual.multipliers is not None and dual.multipliers.shape[0] > len(dual.weights)


@pytest.mark.parametrize("pid", ["ex1", "ex3"])
def test_dual_weights_are_z_transpose_beta(pid):
    p = builtin(pid)
    cfg = dataclasses.replace(default_config(pid), formulation="dual")
    model = solve(p, cfg)
    z, _ = assemble(p, model.basis, collocation_grid(p, cfg))
    assert np.linalg.norm(z.T @ model.multipliers - model.weights) <= 1e-10 * np.linalg.norm(model.weights)


def test_ex1_solution(models):
    m = models["ex1"]
    t = np.linspace(0.2, 1.5, 100)
    assert np.max(np.abs(m(t) - t**2)) <= 1e-6
    assert m(1.0) == pytest.approx(1.0, abs=1e-6)
    assert residual_report(m, builtin("ex1"), 100)[1] <= 1e-6


def test_ex2_solution(models):
    assert models["ex2"](1.0) == pytest.approx(0.894, abs=5e-3)
    assert models["ex2"](1.0) == pytest.approx(0.894007351849340, abs=1e-3)


def test_ex3_solution(models):
    m = models["ex3"]
    xx, tt = np.meshgrid(np.linspace(0, 2, 21), np.linspace(0, 1, 21), indexing="ij")
    assert np.max(np.abs(m(xx, tt) - tt**2 * xx * (2 - xx))) <= 1e-6


def test_ex4_solution(models):
    m = models["ex4"]
    assert m.converged and 1 < m.picard_iterations < 50
    assert m(0.0, 0.7) == pytest.approx(0.0, abs=1e-4)
    assert m(0.5, 1.0) == pytest.approx(-0.25, abs=1e-4)


def test_residual_ordering(models):
    for m in models.values():
        assert m.residual_max >= m.residual_rms >= 0


def test_ex2_residual_matches_adaptive_oracle(models):
    # the residual is genuine: an independent theta-integration agrees
    m = models["ex2"]
    p = builtin("ex2")
    term = p.lhs_terms[0].term
    t = 0.37
    f = lambda th: float(term.phi(th)) * (m.basis.caputo(t, th) @ m.weights)
    oracle = abs(adaptive_simpson(f, 0.0, 1.0, 1e-8) + 0.1 * float(m(t)))
    assert residual_report(m, p, np.array([t]))[1] == pytest.approx(oracle, abs=1e-9)


def test_ex2_residual_scale(models):
    # measured: about 3e-4 at training points, 1e-3 on a uniform grid away
    # from t = 0, and 0.1 at t = 0, where the true solution is not smooth
    m = models["ex2"]
    p = builtin("ex2")
    assert m.residual_max <= 1e-3
    g = np.linspace(0, 1, 200)
    res, _, _ = residual_report(m, p, g)
    assert res[g >= 0.05].max() <= 2e-3
    assert res[0] == pytest.approx(0.1 * abs(float(m(0.0))), rel=1e-8)


def _worst_constraint_gap(model, problem, pts):
    gaps = []
    for con in expand_constraints(problem, pts):
        if con.kind == "value":
            got = float(model(*con.location))
        else:
            (t,) = con.location
            got = float(model.basis.derivative(t, 1) @ model.weights)
        gaps.append(abs(got - con.target))
    return max(gaps)


@pytest.mark.parametrize(
    "pid",
    [
        "ex1",
        pytest.param(
            "ex2",
            marks=pytest.mark.xfail(
                strict=True,
                reason="u(0) misses 1 by 1.04e-6: the constraint row is one of 21 least-squares rows for 20 weights",
            ),
        ),
        "ex3",
        "ex4",
    ],
)
def test_constraints_satisfied(models, pid):
    p = builtin(pid)
    assert _worst_constraint_gap(models[pid], p, collocation_grid(p, default_config(pid))) <= 1e-6


def test_ex2_constraint_gap_and_weighting(models):
    p = builtin("ex2")
    pts = collocation_grid(p, default_config("ex2"))
    assert _worst_constraint_gap(models["ex2"], p, pts) <= 1.1e-6
    heavier = solve(p, dataclasses.replace(default_config("ex2"), constraint_weight=10.0))
    assert _worst_constraint_gap(heavier, p, pts) <= 1e-7


@pytest.mark.parametrize("pid", ["ex1", "ex3"])
def test_gamma_monotonicity(pid):
    p = builtin(pid)
    lo = solve(p, dataclasses.replace(default_config(pid), gamma=1e6)).residual_max
    hi = solve(p, default_config(pid)).residual_max
    assert hi <= 2 * lo + 1e-13


def test_picard_fixed_point(models):
    m = models["ex4"]
    p = builtin("ex4")
    z, rho = assemble(p, m.basis, m.points, m)
    w = solve_primal(z, rho, m.config.gamma)
    assert np.max(np.abs(w - m.weights)) <= 10 * m.config.picard_tol


def test_picard_nonconvergence_warns():
    cfg = dataclasses.replace(default_config("ex4"), picard_max_iters=2)
    with pytest.warns(RuntimeWarning, match="did not converge"):
        m = solve(builtin("ex4"), cfg)
    assert not m.converged and m.picard_iterations == 2


def test_evaluate():
    m = TrainedModel(basis=build_bases(builtin("ex1"), default_config("ex1")), weights=np.zeros(4), config=default_config("ex1"), dimension=1)
    assert evaluate(m, (0.7,)) == 0.0
    with pytest.raises(ValueError):
        evaluate(m, (0.1, 0.2))


def test_caputo_time_term_problem():
    # D^0.5 u + u = t^2 + Gamma(3)/Gamma(2.5) t^1.5 has the solution t^2
    p = Problem(
        "caputo",
        1,
        (0.0, 1.0),
        (CaputoTime(0.5), Identity(1.0)),
        lambda t: t * t + 2 / math.gamma(2.5) * t**1.5,
        (PointConstraint((0.0,), "value", 0.0),),
    )
    m = solve(p, SolverConfig(6, 6))
    t = np.linspace(0, 1, 11)
    assert np.max(np.abs(m(t) - t**2)) <= 1e-3


def test_lambda_scan_examples():
    p = builtin("ex1")
    cfg = default_config("ex1")
    best, trace = lambda_random_search(p, cfg, (0.1, 3.0), 1, 7)
    assert len(trace) == 1 and best == trace[0].lam
    _, trace = lambda_random_search(p, cfg, (0.4, 0.6), 20, 1)
    assert all(tr.status == "ok" and tr.residual_max <= 1e-5 for tr in trace)


def test_lambda_scan_determinism():
    p = builtin("ex1")
    cfg = default_config("ex1")
    a = lambda_random_search(p, cfg, (0.1, 3.0), 8, 123)
    b = lambda_random_search(p, cfg, (0.1, 3.0), 8, 123)
    assert a == b
    assert [tr.lam for tr in a[1]] == np.random.default_rng(123).uniform(0.1, 3.0, 8).tolist()


def test_lambda_scan_skips_zero():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        best, trace = lambda_random_search(builtin("ex1"), default_config("ex1"), (-1e-4, 1e-4), 3, 0)
    assert best is None and all(tr.status == "skipped" for tr in trace)


def test_lambda_scan_validation():
    with pytest.raises(ValueError):
        lambda_random_search(builtin("ex1"), default_config("ex1"), (-0.6, 1.0), 3, 0)
    with pytest.raises(ValueError):
        lambda_random_search(builtin("ex1"), default_config("ex1"), (0.1, 1.0), 0, 0)
