"""Residual suites, L2 budgets, convexity scans and end-to-end theorem checks.

The residual suite re-evaluates every identity of the two computer-algebra
verification scripts numerically at seeded random points: each named test
is a quantity that must vanish.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import closed_forms as cf
from .constructions import (
    Beta,
    FlatFamilyParams,
    SphereAtlas,
    SphereFamilyParams,
    antipodal_sphere_beta,
    antipode,
    build_flat_metric,
    build_sphere_metric,
    flat_bumps,
    flat_l2_bound,
    flat_metric,
    lambda_budget_flat,
    lambda_budget_sphere,
    monomial_beta,
    sphere_beta,
    sphere_collar,
    sphere_l2_bound,
    sphere_l2_tight_bound,
    sphere_metric,
)
from .quadrature import PolarCollar, integrate_l2
from .shape import SurfaceChart, surface_geometry
from .tensor import complex_components, pointwise_deviation, real_vector
from .umbilic import UmbilicReport, sphere_scan, umbilic_index, umbilic_scan

REPORT_HEADER = "# umbilic-lab report v1"
CLOSED_FORM_TOL = 1e-8
FINITE_DIFFERENCE_TOL = 1e-6

FLAT_TESTS = (
    "testeqn2", "testeqn3", "test1a", "test1b", "test6a",
    "test1", "test2", "test3", "test4", "test5", "test3a", "test4a", "test5a",
    "testeqn6a", "testeqn6ab", "testeqn6b", "testeqn8",
)
SPHERE_TESTS = (
    "testeqn9", "testeqn10", "test1a", "test1b", "test6a",
    "test1", "test2", "test3", "test4", "test5", "test3a", "test4a", "test5a",
    "testeqn13", "testeqn13b", "testeqn14",
    "testeqn15a", "testeqn15ab", "testeqn15b", "testeqn17", "testeqn16b",
    "chart_pullback",
)


@dataclass
class ResidualEntry:
    name: str
    max_residual: float
    tolerance: float
    passed: bool
    samples: int


@dataclass
class ResidualReport:
    entries: list
    provenance: dict
    notes: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def entry(self, name: str) -> ResidualEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(REPORT_HEADER + "\n")
        for k, v in self.provenance.items():
            buf.write(f"# {k}={v}\n")
        for note in self.notes:
            buf.write(f"# note: {note}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "max_residual", "tolerance", "pass", "samples"])
        for e in self.entries:
            w.writerow([e.name, f"{e.max_residual:.6e}", f"{e.tolerance:.1e}", str(e.passed).lower(), e.samples])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"residual suite ({self.provenance.get('family')}): "
                 f"{sum(e.passed for e in self.entries)}/{len(self.entries)} pass"]
        for e in self.entries:
            mark = "PASS" if e.passed else "FAIL"
            lines.append(f"  {mark} {e.name:<14} max|r| = {e.max_residual:.3e}  (tol {e.tolerance:.0e})")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)


def _sample_disc(rng, n, radius):
    r = radius * np.sqrt(rng.uniform(0, 1, n))
    th = rng.uniform(0, 2 * np.pi, n)
    return r * np.exp(1j * th)


def _pair(gc, X, Y):
    return np.einsum("...ij,...i,...j->...", gc, X, Y)


def _frame_residuals(gc, e1, e2, normal, tangent):
    """Frame tests with complex-coordinate components throughout."""
    ep = (e1 - 1j * e2) / np.sqrt(2)
    em = (e1 + 1j * e2) / np.sqrt(2)
    return {
        "test1a": _pair(gc, tangent, normal),
        "test1b": 1 - _pair(gc, normal, normal),
        "test1": _pair(gc, e1, normal),
        "test2": _pair(gc, e2, normal),
        "test3": _pair(gc, e1, e2),
        "test4": 1 - _pair(gc, e1, e1),
        "test5": 1 - _pair(gc, e2, e2),
        "test3a": _pair(gc, ep, ep),
        "test4a": 1 - _pair(gc, ep, em),
        "test5a": _pair(gc, em, em),
    }


def _pipeline_forms(chart, u, e1c, e2c, normal_c):
    """sigma, sigma_bar, rho and the tangency residual from the pipeline ``A``,
    contracted with frames given in complex components."""
    geo = surface_geometry(chart, u)
    e1, e2, n = real_vector(e1c), real_vector(e2c), real_vector(normal_c).real
    ep, em = (e1 - 1j * e2) / np.sqrt(2), (e1 + 1j * e2) / np.sqrt(2)
    sig = geo.form(ep, ep)
    sigb = geo.form(em, em)
    rho = geo.form(em, ep)
    tangency = np.max(np.abs(np.einsum("...ik,...i->...k", geo.A, n)), axis=-1)
    return sig, sigb, rho, tangency


def _null_frame(u, scale):
    one = np.ones_like(u)
    zero = np.zeros_like(u)
    e1 = np.stack([one, one, zero], axis=-1) * scale[..., None]
    e2 = np.stack([1j * one, -1j * one, zero], axis=-1) * scale[..., None]
    return e1, e2


def _tangent(rng, n):
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    return np.stack([a, np.conj(a), np.zeros(n)], axis=-1)


def _entries(res, tol, n, names):
    out = []
    for name in names:
        val = float(np.max(np.abs(res[name])))
        out.append(ResidualEntry(name, val, tol, bool(val < tol), n))
    return sorted(out, key=lambda e: e.name)


def _maybe_fd(metric, finite_difference):
    return metric.without_closed_form_partials() if finite_difference else metric


def flat_residuals(params: FlatFamilyParams, sample_points=100, seed=0, finite_difference=False,
                   tolerance: Optional[float] = None) -> ResidualReport:
    rng = np.random.default_rng(seed)
    lam, n, m = params.lam, params.n, params.m
    beta = monomial_beta(lam, n, m)
    metric = _maybe_fd(flat_metric(beta), finite_difference)
    z = _sample_disc(rng, sample_points, params.r0)
    t = rng.uniform(-1, 1, sample_points)
    res = {}

    pts3 = np.stack([z.real, z.imag, t], axis=-1)
    gc3 = complex_components(metric.eval(pts3))
    res["testeqn2"] = cf.flat_det(beta, z) + np.linalg.det(gc3)
    res["testeqn3"] = 2 * np.abs(beta(z)) ** 2 - pointwise_deviation(metric, None, pts3)

    chart = SurfaceChart(metric, 0.0)
    gc = complex_components(metric.eval(chart.embed(z)))
    normal = cf.flat_normal_complex(beta, z)
    e1, e2 = _null_frame(z, np.ones(sample_points))
    res.update(_frame_residuals(gc, e1, e2, normal, _tangent(rng, sample_points)))

    sig, sigb, rho, tangency = _pipeline_forms(chart, z, e1, e2, normal)
    res["test6a"] = tangency
    s_cf, sb_cf, r_cf = cf.flat_sigma_rho(beta, z)
    res["testeqn6a"] = sig - s_cf
    res["testeqn6ab"] = sigb - sb_cf
    res["testeqn6b"] = rho - r_cf
    res["testeqn8"] = sig - cf.flat_monomial_sigma(lam, n, m, z)

    tol = tolerance or (FINITE_DIFFERENCE_TOL if finite_difference else CLOSED_FORM_TOL)
    prov = dict(family="flat", n=n, m=m, lam=lam, r0=params.r0, seed=seed, samples=sample_points,
                partials="finite-difference" if finite_difference else "closed-form")
    return ResidualReport(_entries(res, tol, sample_points, FLAT_TESTS), prov)


def _pullback_jacobian(xi):
    """Real Jacobian of ``(a, b, R) -> (a', b', R)`` for ``xi' = -1/conj(xi)``."""
    d = 1.0 / np.conj(xi) ** 2  # d xi'/d a; d xi'/d b = -i d
    J = np.zeros(xi.shape + (3, 3))
    J[..., 0, 0], J[..., 1, 0] = d.real, d.imag
    J[..., 0, 1], J[..., 1, 1] = (-1j * d).real, (-1j * d).imag
    J[..., 2, 2] = 1.0
    return J


def chart_pullback_residual(primary, antipodal, xi, R) -> np.ndarray:
    """``max |g_primary - J^T g_antipodal J|`` at primary-chart points."""
    xi = np.asarray(xi, dtype=complex)
    xp = antipode(xi)
    p1 = np.stack([xi.real, xi.imag, R], axis=-1)
    p2 = np.stack([xp.real, xp.imag, R], axis=-1)
    J = _pullback_jacobian(xi)
    pulled = np.einsum("...ai,...ab,...bj->...ij", J, antipodal.eval(p2), J)
    return np.max(np.abs(primary.eval(p1) - pulled), axis=(-1, -2))


def _power3_beta(lam):
    value = lambda xi: -lam * xi**3 / (1 + np.abs(xi) ** 2) ** 3
    return Beta(value, value, value, "power-3 variant")


def sphere_residuals(params: SphereFamilyParams, sample_points=100, seed=0, finite_difference=False,
                     tolerance: Optional[float] = None, radius=2.0) -> ResidualReport:
    rng = np.random.default_rng(seed)
    lam, R0 = params.lam, params.R0
    beta = sphere_beta(lam)
    beta_p = antipodal_sphere_beta(lam)
    metric = _maybe_fd(sphere_metric(beta), finite_difference)
    metric_p = _maybe_fd(sphere_metric(beta_p, name="sphere-antipodal"), finite_difference)
    xi = _sample_disc(rng, sample_points, radius)
    R = rng.uniform(0.5 * R0, 2 * R0, sample_points)
    res = {}

    pts3 = np.stack([xi.real, xi.imag, R], axis=-1)
    gc3 = complex_components(metric.eval(pts3))
    res["testeqn9"] = cf.sphere_det(beta, xi, R) + np.linalg.det(gc3)
    res["testeqn10"] = 2 * np.abs(beta(xi)) ** 2 - pointwise_deviation(metric, None, pts3)

    chart = SurfaceChart(metric, R0)
    gc = complex_components(metric.eval(chart.embed(xi)))
    normal = cf.sphere_normal_complex(beta, xi, R0)
    q = 1 + np.abs(xi) ** 2
    e1, e2 = _null_frame(xi, q / (2 * R0))
    res.update(_frame_residuals(gc, e1, e2, normal, _tangent(rng, sample_points)))

    sig, sigb, rho, tangency = _pipeline_forms(chart, xi, e1, e2, normal)
    res["test6a"] = tangency
    s_cf, sb_cf, r_cf = cf.sphere_sigma_rho(beta, xi, R0)
    res["testeqn13"] = sig - s_cf
    res["testeqn13b"] = sigb - sb_cf
    res["testeqn14"] = rho - r_cf
    res["testeqn15a"] = sig - cf.sphere_family_sigma(lam, xi, R0)
    res["testeqn15ab"] = sigb - cf.sphere_family_sigma(lam, xi, R0)
    res["testeqn15b"] = rho - cf.sphere_family_rho(lam, xi, R0)
    res["testeqn17"] = (rho**2 - sig * sigb) - cf.sphere_family_kappa(lam, xi, R0)

    xp = _sample_disc(rng, sample_points, radius)
    chart_p = SurfaceChart(metric_p, R0)
    normal_p = cf.sphere_normal_complex(beta_p, xp, R0)
    e1p, e2p = _null_frame(xp, (1 + np.abs(xp) ** 2) / (2 * R0))
    sig_p = _pipeline_forms(chart_p, xp, e1p, e2p, normal_p)[0]
    res["testeqn16b"] = sig_p - cf.antipodal_family_sigma(lam, xp, R0)

    xo = _sample_disc(rng, sample_points, radius)
    xo = np.where(np.abs(xo) < 0.05, 0.05, xo)
    Ro = rng.uniform(0.5 * R0, 2 * R0, sample_points)
    res["chart_pullback"] = chart_pullback_residual(metric, metric_p, xo, Ro)
    variant = chart_pullback_residual(metric, sphere_metric(_power3_beta(lam)), xo, Ro)

    tol = tolerance or (FINITE_DIFFERENCE_TOL if finite_difference else CLOSED_FORM_TOL)
    prov = dict(family="sphere", lam=lam, R0=R0, seed=seed, samples=sample_points,
                partials="finite-difference" if finite_difference else "closed-form")
    notes = [
        "antipodal beta' = -lam xi'^3/(1+xi'xibar')^2 (denominator power 2), from pulling the "
        "metric back through xi' = -1/conj(xi); testeqn16b uses it",
        f"the power-3 variant -lam xi'^3/(1+xi'xibar')^3 fails the chart pull-back: "
        f"max mismatch {float(np.max(variant)):.3e}",
    ]
    return ResidualReport(_entries(res, tol, sample_points, SPHERE_TESTS), prov, notes)


def run_residual_suite(family: str, params, sample_points: int = 100, seed: int = 0,
                       finite_difference: bool = False, tolerance: Optional[float] = None) -> ResidualReport:
    if family == "flat":
        return flat_residuals(params, sample_points, seed, finite_difference, tolerance)
    if family == "sphere":
        return sphere_residuals(params, sample_points, seed, finite_difference, tolerance)
    raise ValueError(f"unknown family {family!r}")


# --------------------------------------------------------------------------
# L2 budgets


@dataclass
class BudgetReport:
    family: str
    numeric_l2: float
    paper_bound: float
    epsilon_target: float
    lambda_used: float
    satisfied: bool
    tight_bound: Optional[float] = None
    coarse_l2: Optional[float] = None
    relative_change: Optional[float] = None

    @property
    def bound_dominates(self) -> bool:
        ok = self.numeric_l2 <= self.paper_bound
        if self.tight_bound is not None:
            ok = ok and self.numeric_l2 <= self.tight_bound
        return ok

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(REPORT_HEADER + "\n")
        w = csv.writer(buf, lineterminator="\n")
        row = asdict(self)
        w.writerow(list(row))
        w.writerow(["" if v is None else v for v in row.values()])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [
            f"{self.family} family, epsilon = {self.epsilon_target:g}",
            f"  lambda used      {self.lambda_used:.6f}",
            f"  numeric ||g-g0||^2 {self.numeric_l2:.6e}",
            f"  analytic bound   {self.paper_bound:.6e}",
        ]
        if self.tight_bound is not None:
            lines.append(f"  tight bound      {self.tight_bound:.6e}")
        if self.relative_change is not None:
            lines.append(f"  order 16 vs 32   rel. diff {self.relative_change:.2e}")
        lines.append(f"  numeric <= epsilon: {'yes' if self.satisfied else 'NO'}")
        return "\n".join(lines)


def flat_l2(params: FlatFamilyParams, order: int = 32) -> float:
    g = build_flat_metric(params)
    e = params.epsilon
    dom = PolarCollar((0.0, params.r0, params.r1), (-e / 2, -e / 4, e / 4, e / 2))
    return integrate_l2(g, g.reference, dom, order)


def sphere_l2(params: SphereFamilyParams, order: int = 32) -> float:
    """Sum over the two charts, each covering its unit disc."""
    atlas = build_sphere_metric(params)
    e, R0 = params.epsilon, params.R0
    dom = PolarCollar((0.0, 1.0), (R0 - e / 2, R0 - e / 4, R0 + e / 4, R0 + e / 2))
    return sum(integrate_l2(g, g.reference, dom, order) for g in (atlas.primary, atlas.antipodal))


def _relative(a, b):
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


def budget_flat(epsilon: float, lam: Optional[float] = None, n: int = 1, m: int = 1,
                r0: float = 0.5, r1: float = 0.9, orders=(16, 32)) -> BudgetReport:
    lam = lambda_budget_flat(epsilon) if lam is None else lam
    params = FlatFamilyParams(n, m, lam, r0, r1, epsilon)
    coarse, fine = (flat_l2(params, o) for o in orders)
    return BudgetReport("flat", fine, flat_l2_bound(lam, epsilon), epsilon, lam, fine <= epsilon,
                        None, coarse, _relative(coarse, fine))


def budget_sphere(epsilon: float, R0: float = 1.0, lam: Optional[float] = None,
                  orders=(16, 32)) -> BudgetReport:
    lam = lambda_budget_sphere(epsilon, R0) if lam is None else lam
    params = SphereFamilyParams(lam, R0, epsilon)
    coarse, fine = (sphere_l2(params, o) for o in orders)
    return BudgetReport("sphere", fine, sphere_l2_bound(lam, epsilon, R0), epsilon, lam, fine <= epsilon,
                        sphere_l2_tight_bound(lam, epsilon, R0), coarse, _relative(coarse, fine))


# --------------------------------------------------------------------------
# convexity


def convexity_scan(atlas: SphereAtlas, grid: int = 200, half_width: float = 1.0):
    """Grid minimum of ``kappa = rho^2 - |sigma|^2`` over both charts.

    Returns ``(min_kappa, (chart_label, location))``.
    """
    xs = np.linspace(-half_width, half_width, grid)
    U = xs[None, :] + 1j * xs[:, None]
    best = (math.inf, None)
    for label in ("primary", "antipodal"):
        chart = SurfaceChart(atlas.chart(label), atlas.params.R0)
        kappa = surface_geometry(chart, U).shape_data().kappa
        k = int(np.argmin(kappa))
        if kappa.flat[k] < best[0]:
            best = (float(kappa.flat[k]), (label, complex(U.flat[k])))
    return best


# --------------------------------------------------------------------------
# theorem-level checks


def choose_exponents(k) -> tuple[int, int]:
    """``(n, m)`` with ``(n - m + 1) / 2 = k`` and a genuine umbilic at the origin.

    ``(0, 1)`` would realize ``k = 0`` with constant sigma (no umbilic at all),
    so ``k = 0`` uses ``(1, 2)`` instead.
    """
    k = Fraction(k)
    if k.denominator not in (1, 2):
        raise ValueError(f"{k} is not a half-integer")
    two_k = int(2 * k)
    if two_k >= 1:
        return two_k, 1
    if two_k == 0:
        return 1, 2
    return 0, 1 - two_k


@dataclass
class TheoremCheck:
    budget: BudgetReport
    umbilics: UmbilicReport
    expected_index: Optional[Fraction] = None
    min_kappa: Optional[float] = None
    exponents: Optional[tuple] = None

    @property
    def passed(self) -> bool:
        ok = self.budget.satisfied and self.budget.bound_dominates
        if self.expected_index is not None:
            ok = ok and self.umbilics.indices == [self.expected_index]
        if self.min_kappa is not None:
            ok = ok and self.min_kappa > 0
        return ok


def verify_theorem1(k, epsilon: float, r0: float = 0.5, r1: float = 0.9, grid: int = 101) -> TheoremCheck:
    """Isolated umbilic of index ``k`` with ``||g - g0||^2 <= epsilon``."""
    k = Fraction(k)
    n, m = choose_exponents(k)
    budget = budget_flat(epsilon, None, n, m, r0, r1)
    params = FlatFamilyParams(n, m, budget.lambda_used, r0, r1, epsilon)
    chart = SurfaceChart(build_flat_metric(params), 0.0)
    half = r0 / math.sqrt(2)
    report = umbilic_scan(chart, (-half, half, -half, half), grid)
    return TheoremCheck(budget, report, k, exponents=(n, m))


def verify_theorem2(epsilon: float, R0: float = 1.0, grid: int = 200,
                    lam: Optional[float] = None) -> TheoremCheck:
    """Strictly convex sphere with a single umbilic (index 2) and small L2 deviation."""
    lam = lambda_budget_sphere(epsilon, R0) if lam is None else lam
    budget = budget_sphere(epsilon, R0, lam)
    atlas = build_sphere_metric(SphereFamilyParams(lam, R0, epsilon))
    report = sphere_scan(atlas, grid)
    min_kappa, _ = convexity_scan(atlas, grid)
    expected = None if report.totally_umbilic else Fraction(2)
    return TheoremCheck(budget, report, expected, min_kappa)
