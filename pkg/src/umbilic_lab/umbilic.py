"""Umbilic points, their half-integer indices and principal foliations.

An umbilic is a zero of the shear ``sigma``.  Around an isolated one the
principal directions sit at angle ``-arg(sigma) / 2`` in the tangent frame, so
the index is ``-W / 2`` with ``W`` the counter-clockwise winding number of
``sigma`` along a small loop; ``sigma = z**n * conj(z)**m`` gives ``(m - n) / 2``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import ndimage

from .shape import SurfaceChart, surface_geometry

log = logging.getLogger(__name__)

DEFAULT_SAMPLES = 720
MAX_SAMPLES = 11520
SNAP_TOLERANCE = 0.05
DETECTION_FACTOR = 1e-8
# |sigma| below this (absolute) everywhere on a region means totally umbilic
TOTALLY_UMBILIC_ATOL = 1e-12
# wrapped phase steps above this are treated as possibly aliased
MAX_PHASE_STEP = math.pi / 2


class WindingError(ValueError):
    pass


class ZeroOnLoopError(WindingError):
    pass


class UndersampledError(WindingError):
    pass


class SnappingError(WindingError):
    pass


class UmbilicPointError(ValueError):
    pass


SigmaSource = Union[SurfaceChart, Callable]


def _sigma_callable(source: SigmaSource) -> Callable:
    if isinstance(source, SurfaceChart):
        return lambda u: surface_geometry(source, u).shape_data().sigma
    return source


def _raw_winding(field, samples, zero_tol):
    theta = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    values = np.asarray(field(theta), dtype=complex)
    mags = np.abs(values)
    if np.any(mags <= zero_tol) or not np.all(np.isfinite(values)):
        raise ZeroOnLoopError("field vanishes on the loop; it passes through an umbilic")
    phase = np.angle(values)
    steps = np.diff(np.append(phase, phase[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return steps.sum() / (2 * np.pi), np.abs(steps).max()


def winding_number(field: Callable, samples: int = DEFAULT_SAMPLES, zero_tol: float = 0.0,
                   max_samples: Optional[int] = None) -> int:
    """Winding number of ``theta -> field(theta)`` over ``[0, 2 pi)``.

    The sample count doubles while some phase step exceeds pi/2, up to
    ``max_samples``; after that :class:`UndersampledError` is raised.
    """
    limit = max(samples, max_samples or MAX_SAMPLES)
    n = samples
    while True:
        raw, worst = _raw_winding(field, n, zero_tol)
        if worst <= MAX_PHASE_STEP:
            break
        if n * 2 > limit:
            raise UndersampledError(f"phase step {worst:.3f} rad with {n} samples")
        n *= 2
    snapped = round(raw)
    if abs(raw - snapped) > SNAP_TOLERANCE:
        raise SnappingError(f"winding estimate {raw:.4f} is not near an integer")
    return int(snapped)


def umbilic_index(source: SigmaSource, center: complex, radius: float,
                  samples: int = DEFAULT_SAMPLES, check_isolated: bool = True) -> Fraction:
    """Half-integer index ``-W / 2`` of the umbilic at ``center``.

    ``source`` is a :class:`SurfaceChart` or any vectorized ``u -> sigma(u)``.
    With ``check_isolated`` a coarse scan of the disc warns when it sees
    more than one candidate zero.
    """
    sigma = _sigma_callable(source)
    center = complex(center)
    loop = lambda th: sigma(center + radius * np.exp(1j * th))
    scale = float(np.max(np.abs(loop(np.linspace(0, 2 * np.pi, 64, endpoint=False)))))
    w = winding_number(loop, samples, zero_tol=DETECTION_FACTOR * scale * 1e-6)
    if check_isolated:
        _warn_if_crowded(sigma, center, radius, scale)
    return Fraction(-w, 2)


def _warn_if_crowded(sigma, center, radius, scale):
    k = 41
    xs = np.linspace(-radius, radius, k)
    grid = center + xs[None, :] + 1j * xs[:, None]
    inside = np.abs(grid - center) < radius
    mags = np.where(inside, np.abs(sigma(grid)), np.inf)
    low = inside & (mags < 1e-3 * scale)
    labels, _ = ndimage.label(low, structure=np.ones((3, 3)))
    seeded = np.unique(labels[_local_minima(mags) & low])
    windings = _cell_windings(sigma(grid)) != 0
    count = max(seeded.size, ndimage.label(windings, structure=np.ones((3, 3)))[1])
    if count > 1:
        warnings.warn(f"{count} candidate zeros inside the loop at {center}", RuntimeWarning)


# --------------------------------------------------------------------------
# scanning


@dataclass
class Umbilic:
    location: complex
    index: Optional[Fraction]
    radius: float
    samples: int
    chart: str = "primary"
    residual: float = 0.0


@dataclass
class UmbilicReport:
    umbilics: list = field(default_factory=list)
    totally_umbilic: bool = False
    region: tuple = ()
    notes: list = field(default_factory=list)

    @property
    def locations(self):
        return [u.location for u in self.umbilics]

    @property
    def indices(self):
        return [u.index for u in self.umbilics]

    @property
    def chart_labels(self):
        return [u.chart for u in self.umbilics]

    @property
    def loops(self):
        return [(u.radius, u.samples) for u in self.umbilics]

    @property
    def index_sum(self) -> Fraction:
        return sum((u.index for u in self.umbilics), Fraction(0))

    def extend(self, other: "UmbilicReport") -> None:
        self.umbilics.extend(other.umbilics)
        self.totally_umbilic = self.totally_umbilic or other.totally_umbilic
        self.notes.extend(other.notes)


def _local_minima(mags):
    padded = np.pad(mags, 1, constant_values=np.inf)
    core = padded[1:-1, 1:-1]
    is_min = np.ones(mags.shape, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx or dy:
                nb = padded[1 + dy: padded.shape[0] - 1 + dy, 1 + dx: padded.shape[1] - 1 + dx]
                is_min &= core <= nb
    return is_min


def _cell_windings(values):
    """Winding of ``values`` around each grid cell (corners counter-clockwise)."""
    ph = np.angle(values)

    def wrap(d):
        return (d + np.pi) % (2 * np.pi) - np.pi

    a, b = ph[:-1, :-1], ph[:-1, 1:]
    c, d = ph[1:, 1:], ph[1:, :-1]
    total = wrap(b - a) + wrap(c - b) + wrap(d - c) + wrap(a - d)
    return np.rint(total / (2 * np.pi)).astype(int)


def _refine(sigma, start, half, box, iterations=80):
    """Shrinking pattern search for a local minimum of |sigma| inside ``box``."""
    x0, x1, y0, y1 = box
    c = complex(start)
    offs = np.linspace(-1.0, 1.0, 5)
    stencil = offs[None, :] + 1j * offs[:, None]
    for _ in range(iterations):
        pts = c + half * stencil
        pts = np.clip(pts.real, x0, x1) + 1j * np.clip(pts.imag, y0, y1)
        mags = np.abs(sigma(pts))
        c = complex(pts.flat[int(np.argmin(mags))])
        half *= 0.5
        if half < 1e-15 * max(1.0, abs(c)):
            break
    return c, float(np.abs(sigma(np.array([c])))[0])


def umbilic_scan(chart: SigmaSource, region=(-1.0, 1.0, -1.0, 1.0), grid: int = 200,
                 chart_label: str = "primary", compute_index: bool = True,
                 samples: int = DEFAULT_SAMPLES) -> UmbilicReport:
    """Locate umbilics of ``chart`` inside the rectangle ``(x0, x1, y0, y1)``.

    Candidates are grid local minima of ``|sigma|`` plus cells around which
    ``sigma`` winds; each is refined by a shrinking pattern search and kept
    when ``|sigma| < 1e-8 * max|sigma|`` on the region boundary.
    """
    sigma = _sigma_callable(chart)
    x0, x1, y0, y1 = region
    xs = np.linspace(x0, x1, grid)
    ys = np.linspace(y0, y1, grid)
    U = xs[None, :] + 1j * ys[:, None]
    values = sigma(U)
    mags = np.abs(values)
    report = UmbilicReport(region=tuple(region))
    boundary = np.concatenate([mags[0], mags[-1], mags[:, 0], mags[:, -1]])
    scale = float(boundary.max())
    if scale < TOTALLY_UMBILIC_ATOL and float(mags.max()) < TOTALLY_UMBILIC_ATOL:
        report.totally_umbilic = True
        report.notes.append(f"{chart_label}: non-isolated / totally umbilic region")
        return report
    tol = DETECTION_FACTOR * scale

    cand = set(map(tuple, np.argwhere(_local_minima(mags))))
    for i, j in np.argwhere(_cell_windings(values) != 0):
        cand.add((i, j))
    cell = max((x1 - x0), (y1 - y0)) / (grid - 1)

    found = []
    for i, j in sorted(cand):
        loc, res = _refine(sigma, U[i, j], cell, region)
        if res >= tol:
            continue
        if any(abs(loc - f[0]) < 2 * cell for f in found):
            continue
        found.append((loc, res))

    for loc, res in found:
        u = Umbilic(loc, None, 0.0, samples, chart_label, res)
        if compute_index:
            radius = _loop_radius(loc, [f[0] for f in found], region, cell)
            u.radius = radius
            u.index = umbilic_index(sigma, loc, radius, samples, check_isolated=False)
        report.umbilics.append(u)
    log.debug("scan %s: %d candidates, %d umbilics", chart_label, len(cand), len(found))
    return report


def _loop_radius(loc, others, region, cell):
    x0, x1, y0, y1 = region
    r = 3 * cell
    d_other = [abs(loc - o) for o in others if o != loc]
    if d_other:
        r = min(r, 0.4 * min(d_other))
    return max(r, 1e-6)


def sphere_scan(atlas, grid: int = 200, half_width: float = 1.0,
                samples: int = DEFAULT_SAMPLES) -> UmbilicReport:
    """Scan both charts of a :class:`~umbilic_lab.constructions.SphereAtlas`.

    Each chart is scanned on ``[-w, w]^2``; an antipodal-chart hit that maps to
    a primary-chart hit (``xi = -1/conj(xi')``) is dropped as a duplicate.
    """
    from .constructions import antipode

    R0 = atlas.params.R0
    report = UmbilicReport(region=(-half_width, half_width, -half_width, half_width))
    primary = umbilic_scan(SurfaceChart(atlas.primary, R0), report.region, grid, "primary",
                           samples=samples)
    anti = umbilic_scan(SurfaceChart(atlas.antipodal, R0), report.region, grid, "antipodal",
                        samples=samples)
    report.extend(primary)
    cell = 2 * half_width / (grid - 1)
    for u in anti.umbilics:
        if abs(u.location) > 1e-12:
            back = complex(antipode(u.location))
            if any(abs(back - p.location) < 2 * cell * max(1, abs(back)) ** 2 for p in primary.umbilics):
                continue
        report.umbilics.append(u)
    report.totally_umbilic = primary.totally_umbilic or anti.totally_umbilic
    report.notes.extend(anti.notes)
    return report


# --------------------------------------------------------------------------
# principal directions and foliations


@dataclass
class PrincipalDirections:
    """Unoriented principal directions at a point.

    ``angle`` is measured from ``e1`` in the tangent frame; ``major`` (the
    direction of larger normal curvature in the pipeline's convention) and
    ``minor`` are the chart components of the unit vectors.
    """

    angle: float
    major: np.ndarray
    minor: np.ndarray


def principal_directions(chart: SurfaceChart, u, tol: float = 1e-12) -> PrincipalDirections:
    geo = surface_geometry(chart, np.asarray([u], dtype=complex))
    sigma = complex(geo.shape_data().sigma[0])
    if abs(sigma) < tol:
        raise UmbilicPointError(f"|sigma| = {abs(sigma):.2e} at {u}: umbilic, directions undefined")
    phi = -np.angle(sigma) / 2
    e1, e2 = geo.e1[0], geo.e2[0]
    major = np.cos(phi) * e1 + np.sin(phi) * e2
    minor = -np.sin(phi) * e1 + np.cos(phi) * e2
    return PrincipalDirections(float(phi), major, minor)


def _direction_field(chart: SurfaceChart, which: str, atol: float):
    def field_at(u):
        geo = surface_geometry(chart, np.asarray([u], dtype=complex))
        sigma = complex(geo.shape_data().sigma[0])
        phi = 0.0 if abs(sigma) <= atol else -np.angle(sigma) / 2
        if which == "minor":
            phi += np.pi / 2
        v = np.cos(phi) * geo.e1[0] + np.sin(phi) * geo.e2[0]
        d = complex(v[0], v[1])
        return d / abs(d), abs(sigma)

    return field_at


def trace_foliation(chart: SurfaceChart, seeds: Sequence[complex], step: float, max_steps: int,
                    region=None, umbilics: Sequence[complex] = (), which: str = "major",
                    atol: float = 1e-14, both_ways: bool = True) -> list:
    """Integrate leaves of a principal line field with Heun steps.

    Directions are sign-aligned with the previous step (a line field has no
    orientation).  Where ``|sigma| <= atol`` the frame direction ``e1`` is
    used.  A leaf stops when it leaves ``region`` or comes within ``step``
    of a listed umbilic.  Returns one complex polyline per seed.
    """
    field_at = _direction_field(chart, which, atol)

    def inside(u):
        if region is None:
            return True
        x0, x1, y0, y1 = region
        return x0 <= u.real <= x1 and y0 <= u.imag <= y1

    def near_umbilic(u):
        return any(abs(u - c) < step for c in umbilics)

    def march(seed, sign):
        u = complex(seed)
        prev = field_at(u)[0] * sign
        pts = [u]
        for _ in range(max_steps):
            d1 = field_at(u)[0]
            if (d1 * np.conj(prev)).real < 0:
                d1 = -d1
            trial = u + step * d1
            if not inside(trial):
                break
            d2 = field_at(trial)[0]
            if (d2 * np.conj(d1)).real < 0:
                d2 = -d2
            nxt = u + 0.5 * step * (d1 + d2)
            if not inside(nxt):
                break
            pts.append(nxt)
            prev = d2
            u = nxt
            if near_umbilic(u):
                break
        return pts

    lines = []
    for seed in seeds:
        fwd = march(seed, 1.0)
        if both_ways:
            back = march(seed, -1.0)
            fwd = back[::-1] + fwd[1:]
        lines.append(np.asarray(fwd, dtype=complex))
    return lines
