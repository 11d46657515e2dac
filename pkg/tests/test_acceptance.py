"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from umbilic_lab import closed_forms as cf
from umbilic_lab.constructions import (
    FlatFamilyParams,
    SphereFamilyParams,
    build_flat_metric,
    build_sphere_metric,
    flat_l2_bound,
    flat_metric,
    lambda_budget_flat,
    lambda_budget_sphere,
    monomial_beta,
    sphere_beta,
    sphere_l2_bound,
    sphere_l2_tight_bound,
    sphere_metric,
)
from umbilic_lab.shape import SurfaceChart, second_fundamental_components, surface_geometry
from umbilic_lab.tensor import metric_det, pointwise_deviation
from umbilic_lab.umbilic import principal_directions, sphere_scan, umbilic_index
from umbilic_lab.verify import convexity_scan, flat_l2, run_residual_suite, sphere_l2

from tests.support import disc


@contextmanager
def criterion(number, title, budget_s):
    """Time the block, print a PASS/FAIL line, and fail on overrun."""
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed < budget_s
        verdict = "PASS" if ok and within else "FAIL"
        extra = "" if within else f" (over the {budget_s:g} s limit)"
        print(f"\n{verdict} criterion {number}: {title} [{elapsed:.2f} s]{extra}")
    assert within, f"criterion {number} took {elapsed:.2f} s, limit {budget_s} s"


def flat_points(rng, n=100):
    z = disc(rng, n, 0.5)
    return z, np.stack([z.real, z.imag, rng.uniform(-1, 1, n)], axis=-1)


def sphere_points(rng, n=100):
    xi = disc(rng, n, 2.0)
    return xi, np.stack([xi.real, xi.imag, rng.uniform(0.5, 2.0, n)], axis=-1)


def test_criterion_1_determinants():
    with criterion(1, "determinant identities to 1e-10 (flat and sphere)", 1.0):
        rng = np.random.default_rng(1)
        beta = monomial_beta(0.7, 2, 1)
        z, pts = flat_points(rng)
        assert np.max(np.abs(metric_det(flat_metric(beta), pts) - cf.flat_det(beta, z))) < 1e-10
        beta = sphere_beta(1.2)
        xi, pts = sphere_points(rng)
        got = metric_det(sphere_metric(beta), pts)
        assert np.max(np.abs(got - cf.sphere_det(beta, xi, pts[:, 2]))) < 1e-10


def test_criterion_2_deviation():
    with criterion(2, "deviation |g - g0|^2 = 2|beta|^2 to 1e-10", 1.0):
        rng = np.random.default_rng(2)
        for beta, sample in ((monomial_beta(0.6, 1, 3), flat_points), (sphere_beta(0.9), sphere_points)):
            w, pts = sample(rng)
            g = flat_metric(beta) if sample is flat_points else sphere_metric(beta)
            assert np.max(np.abs(pointwise_deviation(g, None, pts) - 2 * np.abs(beta(w)) ** 2)) < 1e-10


def test_criterion_3_closed_form_equivalence():
    with criterion(3, "pipeline sigma, rho match closed forms (1e-8 exact, 1e-6 finite differences)", 5.0):
        rng = np.random.default_rng(3)
        for fd, tol in ((False, 1e-8), (True, 1e-6)):
            beta = monomial_beta(0.5, 2, 1)
            metric = flat_metric(beta)
            chart = SurfaceChart(metric.without_closed_form_partials() if fd else metric)
            z = disc(rng, 100, 0.5)
            d = second_fundamental_components(chart, z)
            s, _, r = cf.flat_sigma_rho(beta, z)
            assert max(np.max(np.abs(d.sigma - s)), np.max(np.abs(d.rho - r))) < tol

            lam, R0 = 0.7, 1.3
            metric = sphere_metric(sphere_beta(lam))
            chart = SurfaceChart(metric.without_closed_form_partials() if fd else metric, R0)
            xi = disc(rng, 100, 2.0)
            d = second_fundamental_components(chart, xi)
            assert np.max(np.abs(d.sigma - cf.sphere_family_sigma(lam, xi, R0))) < tol
            assert np.max(np.abs(d.rho - cf.sphere_family_rho(lam, xi, R0))) < tol


def test_criterion_4_residual_suite():
    with criterion(4, "residual suite, 10 seeded draws per family, exponent note present", 30.0):
        rng = np.random.default_rng(4)
        names = set()
        for draw in range(10):
            n, m = int(rng.integers(0, 5)), int(rng.integers(1, 5))
            flat = run_residual_suite("flat", FlatFamilyParams(n, m, rng.uniform(0, 0.95)), 100, seed=draw)
            sphere = run_residual_suite("sphere", SphereFamilyParams(rng.uniform(0, 2.0), rng.uniform(0.5, 2.0)),
                                        100, seed=draw)
            for report in (flat, sphere):
                assert report.all_passed
                assert all(e.max_residual < 1e-8 for e in report.entries)
                names.update(f"{report.provenance['family']}:{e.name}" for e in report.entries)
            assert any("power-3" in note for note in sphere.notes)
        assert len(names) >= 25


@pytest.mark.filterwarnings("error")
def test_criterion_5_index_table():
    with criterion(5, "flat index table equals (n - m + 1)/2", 10.0):
        table = {(0, 1): 0, (1, 1): Fraction(1, 2), (3, 1): Fraction(3, 2),
                 (1, 4): -1, (0, 5): -2, (5, 2): 2}
        for (n, m), expected in table.items():
            chart = SurfaceChart(build_flat_metric(FlatFamilyParams(n, m, 0.1)), 0.0)
            got = umbilic_index(chart, 0j, 0.05)
            assert got == expected == Fraction(n - m + 1, 2)


def test_criterion_6_single_umbilic():
    with criterion(6, "two-chart scan at grid 200: one umbilic, index 2, sum 2", 30.0):
        report = sphere_scan(build_sphere_metric(SphereFamilyParams(0.5, 1.0)), grid=200)
        assert len(report.umbilics) == 1
        assert report.chart_labels == ["antipodal"] and abs(report.locations[0]) < 1e-3
        assert report.indices == [2] and report.index_sum == 2


def test_criterion_7_convexity():
    with criterion(7, "min kappa > 0 on both charts; kappa(0) = 3.75/R0^2", 10.0):
        for lam in (0.1, 0.5, 0.9, 0.99):
            kappa, _ = convexity_scan(build_sphere_metric(SphereFamilyParams(lam, 1.0)), grid=200)
            assert kappa > 0
        chart = SurfaceChart(sphere_metric(sphere_beta(0.5)), 1.0)
        assert abs(second_fundamental_components(chart, np.array([0j])).kappa[0] - 3.75) < 1e-9


def test_criterion_8_budgets():
    with criterion(8, "L2 budgets below bounds, <= epsilon at budget lambda, orders agree", 60.0):
        for eps in (0.05, 0.1, 1.0):
            lam = 0.5
            p = FlatFamilyParams(1, 1, lam, epsilon=eps)
            lo, hi = flat_l2(p, 16), flat_l2(p, 32)
            assert hi <= flat_l2_bound(lam, eps) and abs(lo - hi) <= 1e-6 * hi
            s = SphereFamilyParams(lam, 1.0, eps)
            lo, hi = sphere_l2(s, 16), sphere_l2(s, 32)
            assert hi <= sphere_l2_tight_bound(lam, eps, 1.0) <= sphere_l2_bound(lam, eps, 1.0)
            assert abs(lo - hi) <= 1e-6 * hi

            lam = lambda_budget_flat(eps)
            assert flat_l2(FlatFamilyParams(1, 1, lam, epsilon=eps)) <= eps
            lam = lambda_budget_sphere(eps, 1.0)
            assert sphere_l2(SphereFamilyParams(lam, 1.0, eps)) <= eps


def test_criterion_9_property_suites():
    with criterion(9, "frame invariants, radius independence, rotation invariance, 25-case law", 30.0):
        rng = np.random.default_rng(9)
        charts = [
            (SurfaceChart(build_flat_metric(FlatFamilyParams(2, 3, 0.7)), 0.0), 0.5),
            (SurfaceChart(build_sphere_metric(SphereFamilyParams(1.1, 1.4)).primary, 1.4), 2.0),
            (SurfaceChart(build_sphere_metric(SphereFamilyParams(1.1, 1.4)).antipodal, 1.4), 2.0),
        ]
        for chart, radius in charts:
            geo = surface_geometry(chart, disc(rng, 100, radius))
            e0, e1, e2 = geo.normal, geo.e1, geo.e2
            pair = geo.metric_pair
            for r in (pair(e1, e0), pair(e2, e0), pair(e1, e2), 1 - pair(e1, e1), 1 - pair(e2, e2),
                      1 - pair(e0, e0), pair(geo.e_plus, geo.e_plus), 1 - pair(geo.e_plus, geo.e_minus)):
                assert np.max(np.abs(r)) < 1e-10
            assert np.max(np.abs(np.einsum("...ik,...i->...k", geo.A, e0))) < 1e-9

        for n, m in ((1, 1), (3, 1), (1, 4), (2, 3)):
            chart = SurfaceChart(build_flat_metric(FlatFamilyParams(n, m, 0.5)), 0.0)
            assert umbilic_index(chart, 0j, 0.4) == umbilic_index(chart, 0j, 0.2)

        chart = SurfaceChart(build_flat_metric(FlatFamilyParams(2, 1, 0.4)), 0.0)
        for theta in (np.pi / 7, np.pi / 3, 2.0):
            for u in (0.1, 0.2 - 0.1j, -0.15 + 0.3j):
                a, b = principal_directions(chart, u), principal_directions(chart.rotated(theta), u)
                for x, y in ((a.major, b.major), (a.minor, b.minor)):
                    assert min(np.max(np.abs(x - y)), np.max(np.abs(x + y))) < 1e-12

        for n in range(5):
            for m in range(5):
                sigma = lambda z, n=n, m=m: z**n * np.conj(z) ** m
                assert umbilic_index(sigma, 0j, 0.3) == Fraction(m - n, 2)
