"""The ten acceptance criteria, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import math

import numpy as np
import pytest

from shrinker_lab import flowsim, gaussian, shrinker
from shrinker_lab.families import (
    FamilyId,
    NormalField,
    cataloged_eigenfields,
    clifford_torus,
    generator_field,
    make_surface,
    normal_laplacian,
)
from shrinker_lab.geometry import QuadratureGrid

TWO_PI_OVER_E = 2 * math.pi / math.e
N = 64

RESULTS = {}


def report(number, title, checks):
    """Record ``checks = [(label, ok, detail), ...]`` and print a single verdict line."""
    ok = all(c[1] for c in checks)
    failed = "; ".join(f"{label}: {detail}" for label, good, detail in checks if not good)
    line = f"criterion {number:2d} {title}: {'PASS' if ok else 'FAIL'}" + (f" [{failed}]" if failed else "")
    RESULTS[number] = line
    print("\n" + line)
    return ok, failed


def check(label, value, ok):
    return (label, bool(ok), f"{value}")


@pytest.fixture(scope="module")
def grid():
    return QuadratureGrid(N)


@pytest.fixture(scope="module")
def bisecting():
    return flowsim.run_flow(flowsim.perturbed_equator(0.2, 3, 128), flowsim.FlowConfig(t_end=2.0))


def test_criterion_01_entropy_value(grid):
    r = gaussian.entropy(clifford_torus(), grid=grid)
    dist = float(np.linalg.norm(np.append(r.center.x0, r.center.t0 - 1.0)))
    ok, msg = report(1, "entropy of the Clifford torus", [
        check("value", r.value - TWO_PI_OVER_E, abs(r.value - TWO_PI_OVER_E) <= 1e-8),
        check("argmax", dist, dist <= 1e-6),
    ])
    assert ok, msg


def test_criterion_02_sextic_coefficient(grid):
    c = gaussian.f_jet("A", 8, grid)
    fit = gaussian.sextic_by_least_squares(grid=grid)
    c6_fit = fit.coefficients[fit.powers.index(6)]
    c6 = -4 * math.pi / (9 * math.e)
    ok, msg = report(2, "sextic coefficient of F along family A", [
        check("c0", c[0] - TWO_PI_OVER_E, abs(c[0] - TWO_PI_OVER_E) <= 1e-10),
        check("c1..c5", np.max(np.abs(c[1:6])), np.max(np.abs(c[1:6])) <= 1e-10),
        check("c6", (c[6] - c6) / c6, abs((c[6] - c6) / c6) <= 1e-6),
        check("fit c6", (c6_fit - c6) / c6, abs((c6_fit - c6) / c6) <= 1e-3),
    ])
    assert ok, msg


def test_criterion_03_integrand_identities(grid):
    phi = 2 * np.pi * np.arange(64) / 64
    I = gaussian.integrand_I_jet(phi, 8)
    pointwise = float(np.max(np.abs(I.coeffs[:7] - gaussian.integrand_reference(phi))))
    a, b = grid.nodes
    I2 = gaussian.integrand_I_jet(a + b, 6)
    i4 = math.fsum(I2.coeffs[4].ravel()) * grid.weight
    i6 = math.fsum(I2.coeffs[6].ravel()) * grid.weight
    ok, msg = report(3, "integrand Taylor identities", [
        check("pointwise", pointwise, pointwise <= 1e-10),
        check("integral 4", i4, abs(i4) <= 1e-8),
        check("integral 6", i6 + 8 * math.pi**2 / 9, abs(i6 + 8 * math.pi**2 / 9) <= 1e-8),
    ])
    assert ok, msg


def test_criterion_04_center_expansion():
    rng = np.random.default_rng(44)
    g = QuadratureGrid(32)
    checks = []
    for i in range(10):
        v = rng.normal(size=5)
        xi, tau = v[:4], v[4]
        norm = math.sqrt(xi @ xi + 2 * tau * tau)
        xi, tau = xi / norm, tau / norm
        c = gaussian.f_center_expansion(xi, tau, orders=(2, 6), grid=g)
        checks.append(check(f"direction {i}", round(c[2, 0], 6), abs(c[2, 0] + math.pi**2) <= 1e-6))
    ok, msg = report(4, "r^2 coefficient of the center expansion", checks)
    assert ok, msg


def test_criterion_05_entropy_drop(grid):
    checks, values = [], []
    for s in (0.1, 0.2, 0.3):
        lam = gaussian.entropy(make_surface(FamilyId("A", s)), grid=grid).value
        bound = TWO_PI_OVER_E - 2 * math.pi / (9 * math.e) * s**6
        values.append(lam)
        checks.append(check(f"s={s}", lam - bound, lam <= bound + 1e-6))
    mono = all(b < a for a, b in zip([TWO_PI_OVER_E] + values, values))
    checks.append(check("monotone", values, mono))
    ok, msg = report(5, "entropy drop along family A", checks)
    assert ok, msg


def test_criterion_06_spectrum(grid):
    fields = cataloged_eigenfields(grid)
    worst = max((normal_laplacian(V) - V * mu).sup() for mu, V in fields)

    def sv(V):
        return gaussian.second_variation(gaussian.SecondVariationInput(V), grid)

    u2 = sv(generator_field("U2", grid))
    trans = [sv(generator_field(n, grid)) for n in ("T10", "Ti0", "T01", "T0i")]
    kernel = [sv(generator_field(n, grid)) for n in ("Y1", "Y2", "Y3", "Y4", "VA", "VB", "VC", "VD")]
    a, _ = grid.nodes
    probe = sv(NormalField(np.cos(2 * a), np.zeros_like(a)))
    u2_err = abs(u2 + 32 * math.pi**2) / (32 * math.pi**2)
    t_err = max(abs(t + 2 * math.pi**2) / (2 * math.pi**2) for t in trans)
    ok, msg = report(6, "spectrum and second variation", [
        check("eigenfields", worst, len(fields) == 18 and worst <= 1e-10),
        check("U2", u2_err, u2_err <= 1e-6),
        check("translations", t_err, t_err <= 1e-6),
        check("kernel", max(map(abs, kernel)), max(map(abs, kernel)) <= 1e-8),
        check("eigenvalue-2 probe", probe, probe > 0),
    ])
    assert ok, msg


def test_criterion_07_residual_and_linearization(grid):
    z = np.zeros((N, N))
    s0 = shrinker.shrinker_residual(NormalField(z, z.copy())).sup()
    a, _ = grid.nodes
    fields = {
        "V_A": generator_field("VA", grid),
        "U_2": generator_field("U2", grid),
        "cos(t1) JX_1": NormalField(np.cos(a), np.zeros_like(a)),
    }
    checks = [check("S(0)", s0, s0 <= 1e-10)]
    for name, V in fields.items():
        coarse = shrinker.linearization_check(V, 1e-2)
        fine = shrinker.linearization_check(V, 1e-3)
        order = math.log10(coarse / fine)
        checks.append(check(f"{name} deviation", f"{fine:.3e}", fine <= 1e-5))
        checks.append(check(f"{name} order", f"{order:.3f}", abs(order - 2) <= 0.1))
    ok, msg = report(7, "shrinker residual and its linearization", checks)
    assert ok, msg


VECTORS = [
    (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1),
    (1, 0, 1, 0), (0, 0, 0, 0), (1, 1, 0, 0), (0.5, -0.3, 0.2, 0.7),
]


def test_criterion_08_obstruction(grid):
    checks = []
    for k in VECTORS:
        fit = shrinker.obstruction_cubic(k, grid=grid)
        expected = shrinker.predicted_cubic(k)
        # relative to the largest expected entry; the zero vector is measured against 1/8
        rel = float(np.max(np.abs(fit.cubic - expected)) / max(np.max(np.abs(expected)), 1 / 8))
        checks.append(check(f"k={k}", f"{rel:.2e}", rel <= 1e-3))
    va = shrinker.obstruction_cubic((1, 0, 0, 0), grid=grid).cubic[0]
    mixed = shrinker.obstruction_cubic((1, 0, 1, 0), grid=grid).cubic
    checks.append(check("unit V_A", va, abs(va - 1 / 8) <= 1e-3 / 8))
    checks.append(check("mixed", mixed, np.max(np.abs(mixed[[0, 2]] - 19 / 8)) <= 1e-3 * 19 / 8))
    k = np.array([0.5, -0.3, 0.2, 0.7])
    base = shrinker.obstruction_cubic(k, grid=grid).cubic
    for t in (0.5, 2.0):
        scaled = shrinker.obstruction_cubic(t * k, grid=grid).cubic
        dev = float(np.max(np.abs(scaled - t**3 * base)) / np.max(np.abs(t**3 * base)))
        checks.append(check(f"homogeneity t={t}", f"{dev:.2e}", dev <= 1e-6))
    ok, msg = report(8, "cubic obstruction on the kernel", checks)
    assert ok, msg


def test_criterion_09_flow_dichotomy(bisecting):
    area = bisecting.column("area_plus")
    minus = bisecting.column("area_minus")
    split = float(max(np.max(np.abs(area - 2 * math.pi)), np.max(np.abs(minus - 2 * math.pi))))
    dist = bisecting.rows[-1][flowsim.TRACE_COLUMNS.index("distance")]
    lat = flowsim.run_flow(flowsim.latitude(math.pi / 4, 64), flowsim.FlowConfig(t_end=1.0))
    final_len = lat.rows[-1][flowsim.TRACE_COLUMNS.index("length")]
    ok, msg = report(9, "flow dichotomy", [
        check("bisecting verdict", bisecting.verdict, bisecting.verdict == "converged-to-great-circle"),
        check("Hausdorff distance", dist, dist <= 1e-3),
        check("area split", split, split <= 1e-3),
        check("latitude verdict", lat.verdict, lat.verdict == "shrinking-to-point"),
        check("latitude length", final_len, final_len < 1e-2),
    ])
    assert ok, msg


def test_criterion_10_hopf_consistency(bisecting):
    worst = 0.0
    for c in (flowsim.equator(64, 2.0), flowsim.perturbed_equator(0.3, 3, 64, 2.0), flowsim.latitude(1.0, 64, 2.0)):
        torus = flowsim.hopf_lift(c)
        h = flowsim.hopf_project(np.moveaxis(torus.samples, 0, -1))
        worst = max(worst, float(np.max(np.abs(h - c.points[:, None, :]))))
    eq = flowsim.equator(64, 2.0)
    vol = flowsim.lift_volume(eq)
    vol_err = abs(vol - 8 * math.pi**2) / (8 * math.pi**2)
    energy_eq = flowsim.rescaled_energy(eq)
    E = bisecting.column("energy")
    rise = float(max(0.0, np.max(np.diff(E))))
    ok, msg = report(10, "Hopf lift consistency", [
        check("roundtrip", worst, worst <= 1e-8),
        check("lift volume", vol_err, vol_err <= 1e-6),
        check("energy of equator", energy_eq - TWO_PI_OVER_E, abs(energy_eq - TWO_PI_OVER_E) <= 1e-8),
        check("energy monotone", rise, rise <= 1e-6),
        check("energy limit", E[-1] - TWO_PI_OVER_E, abs(E[-1] - TWO_PI_OVER_E) <= 1e-4),
    ])
    assert ok, msg


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
