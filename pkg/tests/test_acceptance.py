"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest -v -s tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from ppot.extremal import (
    approx_V_bergman,
    approx_V_sup_basis,
    closed_form_V_gaussian,
    closed_form_V_interval,
    closed_form_grid,
    gaussian_contact_radii,
    gaussian_mass_report,
    l1_density_report,
    lobatto_size_for,
    monotonicity_report,
    phi_lp,
    polar_points,
    uniform_convergence_report,
    weighted_supnorm_equivalence,
)
from ppot.geometry_measure import (
    Circle,
    Interval,
    Plane,
    build_mesh,
    build_quadrature,
    gaussian_weight,
    unit_weight,
)
from ppot.index_core import Theta, ceil_mul, dim
from ppot.ortho_bergman import bergman_diag, bm_constant, build_basis
from ppot.poly_core import MultiPolynomial

UNIT = unit_weight()
K = Interval(-1, 1)


def _circle_basis(N, theta):
    return build_basis(build_quadrature(Circle(1), 2 * N + 2), N, theta, UNIT)


def _line(number, ok, detail, seconds):
    text = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}  [{seconds:.2f} s]"
    print("\n" + text, flush=True)


def _judge(number, fn, budget=None):
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    if budget is not None and dt >= budget:
        ok, detail = False, f"{detail}; runtime {dt:.2f} s over the {budget} s budget"
    _line(number, ok, detail, dt)
    assert ok, detail


# --- criteria -----------------------------------------------------------------


def closed_form_match():
    worst = 0.0
    for th in ("0", "1/2"):
        r = np.array([0.3, 0.6, 1.0, 2.0])
        r = r[r >= gaussian_contact_radii(th)[0] + 0.05]
        b = build_basis(build_quadrature(Plane(4), 102), 100, th, gaussian_weight())
        err = np.abs(approx_V_sup_basis(b, r).values - closed_form_V_gaussian(th, r))
        worst = max(worst, float(err.max()))
    return worst <= 0.05, f"max |sup-basis - closed form| = {worst:.4f} (tol 0.05)"


def circle_oracle():
    pts = np.array([0.25, 0.5, 2.0, 4.0])
    v = approx_V_bergman(_circle_basis(200, "1/2"), pts).values
    err = float(np.abs(v - np.maximum(0.5 * np.log(pts), np.log(pts))).max())
    v100 = float(approx_V_bergman(_circle_basis(100, "1/2"), [0.5]).values[0])
    ok = err <= 0.01 and abs(v100 + 0.3451) <= 1e-3
    return ok, f"N=200 max error {err:.5f} (tol 0.01); N=100 at 0.5 gives {v100:.5f}"


def chebyshev_exactness():
    mesh = build_mesh(K, lobatto_size_for(range(1, 7)))
    want = [2, 7, 26, 97, 362, 1351]
    got = [phi_lp(mesh, "0", N, 2.0) for N in range(1, 7)]
    err = max(abs(a - b) for a, b in zip(got, want))
    band = phi_lp(mesh, "1/2", 2, 2.0)
    ok = err <= 1e-6 and abs(band - 4) <= 1e-6
    return ok, f"max |Phi - T_N(2)| = {err:.2e}; theta=1/2, N=2 gives {band:.9f}"


def submultiplicativity():
    mesh = build_mesh(K, lobatto_size_for(range(1, 13)))
    bad = checked = 0
    for th in ("0", "1/3"):
        for z in (1.5, 2.0, 3.0):
            phi = {n: phi_lp(mesh, th, n, z) for n in range(1, 13)}
            for J in range(1, 7):
                for I in range(1, 7):
                    checked += 1
                    bad += phi[J] * phi[I] > phi[J + I] * (1 + 1e-9)
    return bad == 0, f"{bad} violations in {checked} checks"


def uniform_convergence():
    rep = uniform_convergence_report(K, "0", [2.0], [10, 20, 40, 50, 80], closed_form_V_interval)
    err = {r["N"]: r["sup_error"] for r in rep.rows}
    seq = [err[n] for n in (10, 20, 40, 80)]
    dec = all(b < a for a, b in zip(seq, seq[1:]))
    ok = dec and err[50] <= 0.02
    return ok, "errors " + ", ".join(f"{e:.5f}" for e in seq) + f"; N=50 {err[50]:.5f} (tol 0.02)"


def theta_monotonicity():
    thetas = ["0", "1/4", "1/2", "3/4"]
    r = np.linspace(0.01, 2.5, 500)
    a = monotonicity_report(thetas, [closed_form_grid("gaussian", t, r) for t in thetas], slack=0.0)
    pts = polar_points(0.2, 3.0, 15, 8)
    b = monotonicity_report(thetas, [approx_V_bergman(_circle_basis(100, t), pts) for t in thetas], slack=0.02)
    va = sum(row["violations"] for row in a.rows)
    vb = sum(row["violations"] for row in b.rows)
    return va == 0 and vb == 0, f"closed forms {va} violations; circle Bergman {vb} violations"


def bernstein_markov():
    mesh = build_mesh(Circle(1), 256)
    worst = 0.0
    for th in ("0", "1/2"):
        for N in range(1, 51):
            MN = bm_constant(mesh, _circle_basis(N, th))
            worst = max(worst, abs(MN - math.sqrt(dim(N, th))))
    root_c = bm_constant(mesh, _circle_basis(50, "0")) ** (1 / 50)
    b = build_basis(build_quadrature(K, 52, normalize=True), 50, "0", UNIT)
    root_i = bm_constant(build_mesh(K, 401), b) ** (1 / 50)
    ok = worst <= 1e-8 and root_c <= 1.1 and root_i <= 1.1
    return ok, f"max |M_N - sqrt(d)| = {worst:.2e}; M_50^(1/50) circle {root_c:.4f}, interval {root_i:.4f}"


def bergman_sandwich():
    mesh = build_mesh(K, lobatto_size_for(range(1, 9)))
    bad = checked = 0
    for th in ("0", "1/3"):
        for N in range(1, 9):
            b = build_basis(build_quadrature(K, N + 2, normalize=True), N, th, UNIT)
            MN, d = bm_constant(mesh, b), len(b)
            for z in (1.5, 2.0, 3.0):
                phi = phi_lp(mesh, th, N, z)
                Kz = bergman_diag(b, [z]).values[0]
                checked += 1
                # equality holds on the right when d = 1; allow round-off only
                bad += not (phi**2 / d <= Kz * (1 + 1e-12) and Kz <= d * MN**2 * phi**2 * (1 + 1e-12))
    return bad == 0, f"{bad} violations in {checked} points"


def ma_masses():
    worst = 0.0
    for th in ("0", "1/4", "1/2", "3/4"):
        rep = gaussian_mass_report(th)
        t = float(Theta.parse(th))
        worst = max(
            worst,
            abs(rep.origin_mass - 2 * math.pi * t) / (2 * math.pi),
            abs(rep.annulus_mass - 2 * math.pi * (1 - t)) / (2 * math.pi * (1 - t)),
            abs(rep.total - 2 * math.pi) / (2 * math.pi),
        )
    return worst <= 0.02, f"largest relative mass error {worst:.2e} (tol 2%; origin measured against 2pi)"


def density_convergence():
    th = 0.5
    bound = 1.1 * (2 / math.pi) / (1 - th)
    rep = l1_density_report("1/2", [10, 20, 40, 80], local_bound=bound)
    l1 = [r["l1_distance"] for r in rep.rows]
    half = l1[-1] <= 0.5 * l1[0]
    ok = rep.passed and half
    return ok, ("L1 " + ", ".join(f"{x:.4f}" for x in l1)
                + f"; max local {max(r['local_max'] for r in rep.rows):.3f} <= {bound:.3f}")


def dimension_ratio():
    worst = -math.inf
    for d in (1, 2):
        for th in ("1/4", "1/2", "3/4"):
            for N in (50, 100, 200):
                gap = abs(dim(N, th, d) / dim(N, "0", d) - (1 - float(Theta.parse(th)) ** d))
                worst = max(worst, gap / (5 * d / N))
    return worst <= 1, f"worst gap is {worst:.3f} of the 5d/N allowance"


def supnorm_equivalence():
    N, th = 20, "1/3"
    lo = ceil_mul(N, Theta.parse(th))
    a, b = gaussian_contact_radii(th)
    D = polar_points(a, b, 200, 1024)
    G = polar_points(0.0, 4.0, 801, 1024)
    rng = np.random.default_rng(20)
    passed = 0
    worst = 0.0
    for _ in range(50):
        P = MultiPolynomial(1, {(k,): complex(*rng.normal(size=2)) for k in range(lo, N + 1)})
        rep = weighted_supnorm_equivalence(P, gaussian_weight(), D, G, N)
        passed += rep.passed
        worst = max(worst, rep.rows[0]["ratio"])
    return passed == 50, f"{passed}/50 trials pass; worst global/D ratio {worst:.5f}"


# --- pytest entry points --------------------------------------------------------

CRITERIA = [
    (1, closed_form_match, 10),
    (2, circle_oracle, 5),
    (3, chebyshev_exactness, None),
    (4, submultiplicativity, None),
    (5, uniform_convergence, None),
    (6, theta_monotonicity, None),
    (7, bernstein_markov, None),
    (8, bergman_sandwich, None),
    (9, ma_masses, None),
    (10, density_convergence, 30),
    (11, dimension_ratio, None),
    (12, supnorm_equivalence, None),
]


@pytest.mark.parametrize("number,fn,budget", CRITERIA, ids=[f.__name__ for _, f, _ in CRITERIA])
def test_criterion(number, fn, budget, capsys):
    with capsys.disabled():
        _judge(number, fn, budget)


if __name__ == "__main__":
    failed = 0
    for number, fn, budget in CRITERIA:
        try:
            _judge(number, fn, budget)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
