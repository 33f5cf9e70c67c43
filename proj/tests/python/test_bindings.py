import math
import os
import subprocess

import numpy as np
import pytest

import hjcell


def test_eikonal_matches_closed_form():
    g = hjcell.Grid(1, 100, hjcell.Boundary.periodic)
    r = hjcell.solve(hjcell.eikonal(g, "sin", (2.0, 0.0)))
    assert r["converged"]
    assert abs(r["lam"][0] - hjcell.exact_hbar_eikonal_1d("sin", 2.0)) < 1e-3
    assert r["iterations"] <= 20
    assert r["x"].shape == (101,)


def test_plateau_edge_oracle():
    assert hjcell.plateau_edge("sin") == pytest.approx(4 / math.pi, rel=1e-10)


def test_jacobian_is_consistent():
    g = hjcell.Grid(2, 6, hjcell.Boundary.periodic)
    p = hjcell.mfg(g, nu=0.5)
    rng = np.random.default_rng(3)
    x = p.initial_guess() + 0.1 * rng.standard_normal(p.n_unknowns)
    J = p.jacobian(x)
    assert J.shape == (p.n_equations, p.n_unknowns)
    d = 1e-6 * rng.standard_normal(p.n_unknowns)
    fd = (p.residual(x + d) - p.residual(x - d)) / 2
    assert np.linalg.norm(fd - J @ d) <= 1e-6 * np.linalg.norm(J @ d)


def test_lstsq_is_pseudoinverse():
    rng = np.random.default_rng(0)
    for m, n in [(9, 4), (4, 9), (6, 6)]:
        J = rng.standard_normal((m, n))
        F = rng.standard_normal(m)
        s = hjcell.lstsq(J, F)
        assert s["full_rank"]
        np.testing.assert_allclose(s["delta"], -np.linalg.pinv(J) @ F, rtol=1e-9, atol=1e-12)


def test_config_errors_are_value_errors():
    with pytest.raises(ValueError):
        hjcell.run_sweep_json('{"problem": {"family": "eikonal", "bogus": 1}}')
    with pytest.raises(ValueError):
        hjcell.Grid(3, 10, hjcell.Boundary.periodic)


def test_sweep_csv():
    csv = hjcell.run_sweep_json(
        '{"problem": {"family": "eikonal", "N": 40}, "sweep": {"p1": {"start": 0, "end": 2, "count": 3}}}'
    )
    lines = csv.strip().splitlines()
    assert lines[0] == "p1,lambda,iterations,residual_sq,converged,seconds"
    assert len(lines) == 4
    assert float(lines[1].split(",")[1]) == pytest.approx(1.0, abs=1e-3)


def test_newton_config():
    c = hjcell.NewtonConfig()
    c.stop_rule = hjcell.StopRule.residual
    c.epsilon = 1e-14
    c.line_search = True
    g = hjcell.Grid(1, 40, hjcell.Boundary.periodic)
    r = hjcell.solve(hjcell.second_order(g, "zero", p=0.7, s=0.4), c)
    assert r["converged"]
    assert r["lam"][0] == pytest.approx(0.5 * 0.7**2 - 0.4 * 0.4, abs=1e-9)


@pytest.mark.skipif(not os.environ.get("HJCELL_CLI"), reason="CLI not built")
def test_cli_oracle():
    out = subprocess.run(
        [os.environ["HJCELL_CLI"], "oracle", "--p", "2"], capture_output=True, text=True, check=True
    ).stdout
    assert out.splitlines()[0].startswith("p_c,1.2732395")
