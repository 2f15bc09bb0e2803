"""Exit criteria for the package, one test per criterion.

Each test appends a PASS/FAIL line that is printed in the terminal summary.
"""

import time

import numpy as np
import pytest

import lsqcontrol.corrector as corrector_mod
import lsqcontrol.descent as descent_mod
from conftest import ACCEPTANCE_LINES
from lsqcontrol.cli import parse_config, run
from lsqcontrol.corrector import (
    BOUNDARY_EXTENDED,
    BOUNDARY_H1,
    global_matrices,
    inner_variant,
    solve_corrector,
    solve_h10,
)
from lsqcontrol.descent import (
    DescentOptions,
    minimize,
    normal_equation_minimum,
    pairing,
    variation_mask,
)
from lsqcontrol.grid import SpaceTag, dof_mask, l2_error_field, make_grid
from lsqcontrol.problems import (
    Control,
    ProblemSpec,
    extract_boundary_control,
    extract_inner_control,
    lift_data,
)
from lsqcontrol.verify import (
    ForwardGrid,
    convergence_order,
    fd_gradient_check,
    forward_heat,
    l2_error,
)

pytestmark = pytest.mark.slow

OMEGA = (0.25, 0.75)
_UC = {"count": 0, "worst": 0.0}


@pytest.fixture(scope="module", autouse=True)
def _watch_correctors():
    """Check the U=v identity on every corrector solved in this module (criterion 8)."""
    orig = corrector_mod.solve_h10

    def watched(grid, variant, load, tol=1e-10):
        v, rep = orig(grid, variant, load, tol)
        kx = float(v @ (global_matrices(grid)["stiff_x"] @ v))
        if kx > 0:
            lhs = -pairing(grid, BOUNDARY_H1, v, v)
            _UC["worst"] = max(_UC["worst"], abs(lhs - kx) / kx)
            _UC["count"] += 1
        return v, rep

    corrector_mod.solve_h10 = watched
    descent_mod.solve_h10 = watched
    yield
    corrector_mod.solve_h10 = orig
    descent_mod.solve_h10 = orig


def report(n, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
    assert ok, detail


def _rel_l2(a, b, h):
    return l2_error(a, b, h) / l2_error(b, np.zeros_like(b), h)


def test_c1_manufactured_corrector_order():
    start = time.perf_counter()
    T = 1.0
    vstar = lambda t, x: np.sin(np.pi * x) * np.sin(np.pi * t / T)  # noqa: E731
    errs, hs = [], []
    for N in (16, 32, 64):
        g = make_grid(T, N, N)
        rhs = (np.pi**2 + (np.pi / T) ** 2 + 1) * g.interpolate(vstar)
        load = (global_matrices(g)["mass"] @ rhs)[dof_mask(g, SpaceTag.CORRECTOR_H10).free]
        v, _ = solve_h10(g, BOUNDARY_H1, load, 1e-12)
        errs.append(l2_error_field(g, v, vstar))
        hs.append(1.0 / N)
    orders = [convergence_order(errs[i:i + 2], hs[i:i + 2]) for i in range(2)]
    p = convergence_order(errs, hs)
    elapsed = time.perf_counter() - start
    ok = all(abs(o - 2.0) <= 0.3 for o in orders + [p]) and elapsed <= 10
    report(1, ok, f"L2 errors {['%.3e' % e for e in errs]}, orders {['%.3f' % o for o in orders]}, "
                  f"fit {p:.3f} (need 2.0+-0.3), {elapsed:.2f}s (<=10s)")


def test_c2_heat_solution_energy():
    E = []
    for N in (32, 64, 128):
        g = make_grid(1.0, N, N)
        E.append(solve_corrector(g, BOUNDARY_H1, g.interpolate(lambda t, x: np.exp(t) * np.sinh(x))).energy)
    ratios = [E[0] / E[1], E[1] / E[2]]
    ok = E[0] <= 1e-3 and min(ratios) >= 3
    report(2, ok, f"E at 32/64/128 = {['%.3e' % e for e in E]}, ratios {['%.1f' % r for r in ratios]} "
                  f"(need E32<=1e-3, ratio>=3)")


def test_c3_gradient_exactness():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = {}
    for variant in (BOUNDARY_H1, BOUNDARY_EXTENDED, inner_variant(*OMEGA)):
        g = make_grid(1.0, 8, 8)
        free = variation_mask(g, variant).free
        errs = []
        for _ in range(10):
            u = rng.standard_normal(g.n_nodes)
            U = np.zeros(g.n_nodes)
            U[free] = rng.standard_normal(free.size)
            errs.append(fd_gradient_check(g, variant, u, U, 1e-3))
        worst[variant.kind] = max(errs)
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= 1e-6 and elapsed <= 5
    report(3, ok, f"max fd/pairing gap {', '.join(f'{k}={v:.1e}' for k, v in worst.items())} "
                  f"(<=1e-6), {elapsed:.2f}s (<=5s)")


def _small_data(variant, N):
    g = make_grid(1.0, N, N)
    u0 = np.sin(np.pi * g.x)
    u0[-1] = 0.0
    if variant.is_inner:
        uT = 0.3 * np.sin(2 * np.pi * g.x)
        uT[[0, -1]] = 0.0
    else:
        uT = 0.2 * g.x
    return g, lift_data(ProblemSpec(variant, 1.0, u0, uT, N, N), g)


def test_c4_critical_point_is_minimum():
    # the discrete minimum is 0 to rounding, so the comparison is scaled by the initial energy
    lines, ok = [], True
    for variant in (BOUNDARY_H1, BOUNDARY_EXTENDED, inner_variant(*OMEGA)):
        for N in (4, 8):
            g, ub = _small_data(variant, N)
            E_brute, _ = normal_equation_minimum(g, variant, ub)
            res = minimize(g, variant, ub, DescentOptions(maxit=5000, tol_g=1e-10, tol_E=1e-300))
            E_desc = solve_corrector(g, variant, res.u, 1e-13).energy
            scale = max(E_brute, res.initial_energy)
            gap = abs(E_desc - E_brute) / scale
            ok &= res.reason == "gradient" and gap <= 1e-8
            lines.append(f"{variant.kind}/{N}: gap {gap:.1e}")
    report(4, ok, "; ".join(lines) + " (need <=1e-8 relative to max(E_min, E(u_bar)))")


def test_c5_discrete_minimum_non_increasing():
    opts = DescentOptions(maxit=6000)
    m = []
    for N in (16, 32, 64):
        g = make_grid(1.0, N, N)
        u0 = np.sin(np.pi * g.x)
        u0[-1] = 0.0
        ub = lift_data(ProblemSpec(BOUNDARY_H1, 1.0, u0, 0.2 * g.x, N, N), g)
        res = minimize(g, BOUNDARY_H1, ub, opts)
        assert res.converged, f"descent did not converge on {N}x{N}"
        m.append(res.energy)
    # each m_h is certified only down to tol_E; ordering below that floor is rounding noise
    ok = all(m[i + 1] <= m[i] + opts.tol_E for i in range(2))
    report(5, ok, f"m_h at 16/32/64 = {['%.3e' % v for v in m]} "
                  f"(non-increasing up to the certified floor tol_E={opts.tol_E:g})")


def _c6_config(out):
    return parse_config(
        f"variant=boundary\nT=1\nNx=64\nNt=64\ndata=heat-exact-sinh\noutput={out}\nNx_f=128\nNt_f=128\n"
    )


@pytest.fixture(scope="module")
def c6_output(tmp_path_factory):
    out = tmp_path_factory.mktemp("c6")
    start = time.perf_counter()
    run(_c6_config(out))
    return out, time.perf_counter() - start


def test_c6_boundary_round_trip(c6_output):
    import json

    out, elapsed = c6_output
    summary = json.loads((out / "summary.json").read_text())
    ctl = np.genfromtxt(out / "control.csv", delimiter=",", names=True)
    exact = np.exp(ctl["t"]) * np.sinh(1.0)
    ferr = _rel_l2(ctl["f"], exact, ctl["t"][1] - ctl["t"][0])
    reduction = summary["initial_energy"] / summary["final_energy"]
    rt = summary["round_trip_error"]
    ok = reduction >= 100 and ferr <= 0.10 and rt <= 0.05 and elapsed <= 60
    report(6, ok, f"E reduction {reduction:.2e} (>=100), control error {ferr:.3f} (<=0.10), "
                  f"forward check {rt:.2e} (<=0.05), {elapsed:.1f}s (<=60s)")


def test_c7_inner_round_trip():
    start = time.perf_counter()
    T, N = 0.5, 64
    V = inner_variant(*OMEGA)
    # target manufactured by the forward solver with a known source in omega
    tf, xf = np.linspace(0, T, 257), np.linspace(0, 1, 257)
    G = (10 * (1 + tf[:, None]) * np.sin(np.pi * (xf[None, :] - 0.25) / 0.5)
         * ((xf >= 0.25) & (xf <= 0.75))[None, :])
    xT, uT_fine = forward_heat(np.sin(np.pi * xf), Control("inner", tf, xf, G), ForwardGrid(256, 256), V)

    g = make_grid(T, N, N)
    u0 = np.sin(np.pi * g.x)
    uT = np.interp(g.x, xT, uT_fine)
    u0[[0, -1]] = uT[[0, -1]] = 0.0
    ub = lift_data(ProblemSpec(V, T, u0, uT, N, N), g)
    res = minimize(g, V, ub, DescentOptions())
    ctl = extract_inner_control(res.u, g, OMEGA)
    xf2, uf = forward_heat(u0, ctl, ForwardGrid(128, 128), V)
    rt = _rel_l2(uf, np.interp(xf2, xT, uT_fine), 1 / 128)
    reduction = res.initial_energy / res.energy
    elapsed = time.perf_counter() - start
    ok = reduction >= 100 and rt <= 0.05 and elapsed <= 60
    report(7, ok, f"E reduction {reduction:.2e} (>=100), forward check {rt:.2e} (<=0.05), "
                  f"{elapsed:.1f}s (<=60s)")


def test_c9_determinism(c6_output, tmp_path):
    out, _ = c6_output
    run(_c6_config(tmp_path))
    same = (out / "convergence.csv").read_bytes() == (tmp_path / "convergence.csv").read_bytes()
    report(9, same, "repeated criterion-6 run gives bit-identical convergence.csv" if same
           else "convergence.csv differs between runs")


def test_c8_unique_continuation_identity():
    ok = _UC["count"] > 0 and _UC["worst"] <= 1e-10
    report(8, ok, f"{_UC['count']} correctors checked, worst relative gap {_UC['worst']:.1e} (<=1e-10)")
