import warnings
from fractions import Fraction

import numpy as np
import pytest

from umbilic_lab.constructions import (
    FlatFamilyParams,
    SphereFamilyParams,
    build_flat_metric,
    build_sphere_metric,
)
from umbilic_lab.shape import SurfaceChart, second_fundamental_components, surface_geometry
from umbilic_lab.umbilic import (
    SnappingError,
    UmbilicPointError,
    UndersampledError,
    ZeroOnLoopError,
    principal_directions,
    sphere_scan,
    trace_foliation,
    umbilic_index,
    umbilic_scan,
    winding_number,
)


def flat_chart(n, m, lam=0.1):
    return SurfaceChart(build_flat_metric(FlatFamilyParams(n, m, lam)), 0.0)


def antipodal_chart(lam=0.5, R0=1.0):
    return SurfaceChart(build_sphere_metric(SphereFamilyParams(lam, R0, 0.1)).antipodal, R0)


# --- winding numbers -------------------------------------------------------------------------


@pytest.mark.parametrize("field, expected", [
    (lambda th: np.exp(1j * th), 1),
    (lambda th: np.exp(-1j * th), -1),
    (lambda th: np.ones_like(th, dtype=complex), 0),
    (lambda th: np.exp(5j * th) * (2 + np.cos(th)), 5),
])
def test_winding_examples(field, expected):
    assert winding_number(field) == expected


def test_winding_index_sign_convention():
    assert umbilic_index(lambda z: z, 0j, 1.0) == Fraction(-1, 2)
    assert umbilic_index(lambda z: np.conj(z), 0j, 1.0) == Fraction(1, 2)


def test_winding_zero_on_loop():
    with pytest.raises(ZeroOnLoopError):
        winding_number(lambda th: np.exp(1j * th) - 1, 720)


def test_winding_doubles_samples_for_fast_phase():
    # 300 turns need more than the default 720 samples
    assert winding_number(lambda th: np.exp(300j * th)) == 300
    # 3840 = 11520 / 3 aliases to a 2 pi / 3 step at every sample count tried
    with pytest.raises(UndersampledError):
        winding_number(lambda th: np.exp(3840j * th), max_samples=11520)


@pytest.mark.parametrize("k", [1, -3, 8])
def test_winding_stable_under_doubling(k):
    f = lambda th: np.exp(1j * k * th) * (3 + np.sin(2 * th))
    assert winding_number(f, 720) == winding_number(f, 1440) == k


def test_snapping_failure_is_loud(monkeypatch):
    import umbilic_lab.umbilic as um

    monkeypatch.setattr(um, "_raw_winding", lambda field, n, tol: (0.5, 0.1))
    with pytest.raises(SnappingError):
        winding_number(lambda th: np.ones_like(th, dtype=complex))


# --- indices ---------------------------------------------------------------------------------------


@pytest.mark.parametrize("n", range(5))
@pytest.mark.parametrize("m", range(5))
def test_monomial_index_law(n, m):
    """sigma = z^n conj(z)^m has index (m - n)/2."""
    sigma = lambda z: z**n * np.conj(z) ** m
    assert umbilic_index(sigma, 0j, 0.3) == Fraction(m - n, 2)


@pytest.mark.parametrize("n, m", [(0, 1), (1, 1), (3, 1), (1, 4), (0, 5), (5, 2)])
def test_flat_family_index_table(n, m):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert umbilic_index(flat_chart(n, m), 0j, 0.05) == Fraction(n - m + 1, 2)


@pytest.mark.parametrize("n, m", [(1, 1), (3, 1), (1, 4), (2, 3)])
def test_index_radius_independence(n, m):
    chart = flat_chart(n, m, 0.5)
    r = 0.4
    assert umbilic_index(chart, 0j, r) == umbilic_index(chart, 0j, r / 2)


def test_sphere_south_pole_index():
    assert umbilic_index(antipodal_chart(), 0j, 0.1) == 2


def test_index_warns_on_crowded_disc():
    sigma = lambda z: (z - 0.1) * (z + 0.1)
    with pytest.warns(RuntimeWarning, match="candidate zeros"):
        idx = umbilic_index(sigma, 0j, 0.5)
    assert idx == -1


# --- scans -------------------------------------------------------------------------------------------


def test_flat_scan_single_umbilic():
    r0 = 0.5
    h = r0 / np.sqrt(2)
    report = umbilic_scan(flat_chart(1, 1, 0.3), (-h, h, -h, h), grid=101)
    assert len(report.umbilics) == 1
    assert abs(report.locations[0]) < 1e-6
    assert report.indices == [Fraction(1, 2)]
    assert not report.totally_umbilic


def test_flat_scan_zero_beta_is_flagged():
    report = umbilic_scan(flat_chart(1, 1, 0.0), (-0.3, 0.3, -0.3, 0.3), grid=41)
    assert report.totally_umbilic and report.umbilics == []


def test_primary_sphere_chart_has_no_umbilics():
    lam = 0.5
    chart = SurfaceChart(build_sphere_metric(SphereFamilyParams(lam)).primary, 1.0)
    report = umbilic_scan(chart, (-3, 3, -3, 3), grid=121)
    assert report.umbilics == []
    xs = np.linspace(-3, 3, 61)
    xi = (xs[None, :] + 1j * xs[:, None]).ravel()
    sigma = second_fundamental_components(chart, xi).sigma
    s = np.abs(xi) ** 2
    np.testing.assert_allclose(sigma, lam / np.sqrt((1 + s) ** 4 - lam**2 * s), atol=1e-12)


@pytest.mark.parametrize("lam", [0.1, 0.5, 1.0])
def test_sphere_euler_characteristic(lam):
    report = sphere_scan(build_sphere_metric(SphereFamilyParams(lam)), grid=120)
    assert len(report.umbilics) == 1
    assert report.chart_labels == ["antipodal"]
    assert abs(report.locations[0]) < 1e-3
    assert report.indices == [2]
    assert report.index_sum == 2
    assert report.loops[0][0] > 0 and report.loops[0][1] >= 720


def test_round_sphere_flagged():
    report = sphere_scan(build_sphere_metric(SphereFamilyParams(0.0)), grid=30)
    assert report.totally_umbilic and report.umbilics == []


# --- principal directions --------------------------------------------------------------------------


def _sigma_at(chart, u):
    return complex(second_fundamental_components(chart, np.array([u])).sigma[0])


def test_directions_real_sigma_are_frame_axes():
    chart = flat_chart(1, 1, 0.3)
    u = 0.1  # sigma = 2 lam conj(z) / sqrt(...) is real and positive here
    assert _sigma_at(chart, u).real > 0 and abs(_sigma_at(chart, u).imag) < 1e-15
    pd = principal_directions(chart, u)
    geo = surface_geometry(chart, np.array([u]))
    np.testing.assert_allclose(pd.major, geo.e1[0], atol=1e-15)
    np.testing.assert_allclose(pd.minor, geo.e2[0], atol=1e-15)


def test_directions_imaginary_sigma():
    # rotate the frame so that sigma becomes i|sigma|
    chart = flat_chart(1, 1, 0.3).rotated(np.pi / 4)
    sig = _sigma_at(chart, 0.1)
    assert abs(sig.real) < 1e-15 and sig.imag > 0
    pd = principal_directions(chart, 0.1)
    assert pd.angle == pytest.approx(-np.pi / 4)


def _second_form_matrix(chart, u):
    geo = surface_geometry(chart, np.array([u]))
    e = (geo.e1[0], geo.e2[0])
    M = np.array([[np.einsum("ij,i,j->", geo.A[0], a, b) for b in e] for a in e])
    return M, e


@pytest.mark.parametrize("u", [0.1, 0.1 + 0.2j, -0.25j, -0.3 + 0.05j])
def test_directions_match_eigenvectors(u):
    chart = flat_chart(1, 1, 0.3)
    M, (e1, e2) = _second_form_matrix(chart, u)
    sig = _sigma_at(chart, u)
    rho = complex(second_fundamental_components(chart, np.array([u])).rho[0]).real
    oracle = np.array([[rho + sig.real, -sig.imag], [-sig.imag, rho - sig.real]])
    np.testing.assert_allclose(M, oracle, atol=1e-14)
    vals, vecs = np.linalg.eigh(M)
    major = vecs[0, 1] * e1 + vecs[1, 1] * e2
    pd = principal_directions(chart, u)
    assert abs(abs(np.dot(pd.major, chart.metric.eval(chart.embed(u)) @ major)) - 1) < 1e-12


@pytest.mark.parametrize("theta", [np.pi / 7, np.pi / 3])
@pytest.mark.parametrize("u", [0.1, 0.2 - 0.1j])
def test_directions_invariant_under_frame_rotation(theta, u):
    chart = flat_chart(2, 1, 0.4)
    a = principal_directions(chart, u)
    b = principal_directions(chart.rotated(theta), u)
    for x, y in ((a.major, b.major), (a.minor, b.minor)):
        # unoriented: equal up to sign
        assert min(np.max(np.abs(x - y)), np.max(np.abs(x + y))) < 1e-12
    assert _sigma_at(chart.rotated(theta), u) == pytest.approx(_sigma_at(chart, u) * np.exp(2j * theta))


def test_directions_refuse_at_umbilic():
    with pytest.raises(UmbilicPointError):
        principal_directions(flat_chart(1, 1, 0.3), 0.0)


# --- foliations ----------------------------------------------------------------------------------------


def test_foliation_plane_gives_coordinate_lines():
    chart = flat_chart(1, 1, 0.0)
    lines = trace_foliation(chart, [0.1j, -0.2 + 0.05j], 0.01, 20)
    for line, seed in zip(lines, [0.1j, -0.2 + 0.05j]):
        assert len(line) == 41
        np.testing.assert_allclose(line.imag, seed.imag, atol=1e-15)


def test_foliation_flows_toward_origin_umbilic():
    r0 = 0.5
    chart = flat_chart(1, 1, 0.3)
    seeds = [r0 / 2 * np.exp(1j * (k + 0.5) * np.pi / 4) for k in range(8)]
    h = r0 / np.sqrt(2)
    lines = trace_foliation(chart, seeds, 0.005, 200, region=(-h, h, -h, h), umbilics=[0j])
    for seed, line in zip(seeds, lines):
        assert np.min(np.abs(line)) < abs(seed)


def _set_distance(p, q):
    return min(np.max(np.abs(p - q)), np.max(np.abs(p - q[::-1]))) if len(p) == len(q) else np.inf


@pytest.mark.parametrize("seed", [0.3, 0.2 + 0.1j, -0.15 + 0.25j])
def test_foliation_symmetry_near_south_pole(seed):
    """sigma' ~ conj(xi')^4 is invariant under xi' -> i xi', which swaps the two
    foliations; point reflection and conjugation preserve each of them."""
    chart = antipodal_chart()
    kw = dict(step=0.01, max_steps=40)
    minor = trace_foliation(chart, [seed], which="minor", **kw)[0]
    turned = trace_foliation(chart, [1j * seed], which="major", **kw)[0]
    assert _set_distance(1j * minor, turned) < 1e-4
    major = trace_foliation(chart, [seed], **kw)[0]
    assert _set_distance(-major, trace_foliation(chart, [-seed], **kw)[0]) < 1e-12
    assert _set_distance(np.conj(major), trace_foliation(chart, [np.conj(seed)], **kw)[0]) < 1e-12
