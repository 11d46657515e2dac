"""Adapted frames and the second fundamental form of a coordinate surface.

The surface is the level set ``x3 = level`` of a chart, parametrized by the
complex number ``u = x1 + i x2``.  The pipeline mirrors the usual
computer-algebra recipe:

1. ``e0^j = g^{j3} / sqrt(g^{33})`` (the unit normal, positive third component),
2. ``S1_i^j = d_i e0^j + Gamma^j_ik e0^k``,
3. ``P_i^j = delta_i^j - g_ik e0^k e0^j``,
4. ``S_i^j = -P_i^k P_l^j S1_k^l``,
5. ``A_ij = g_jk S_i^k + g_ik S_j^k``,

and ``sigma = A(e+, e+)``, ``rho = A(e-, e+)`` on the null frame
``e+- = (e1 -+ i e2) / sqrt(2)``.  The symmetrized ``A`` is twice the
second fundamental form, so e.g. the unit round sphere has ``rho = -2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import MetricField, christoffel_from, complex_vector, metric_inverse

IDENTITY = np.eye(3)


class DegenerateNormalError(ValueError):
    """The normal covector has non-positive length (metric not Riemannian)."""


@dataclass(frozen=True)
class SurfaceChart:
    """The surface ``x3 = level`` inside ``metric``'s chart.

    ``rotation`` turns the tangent frame by that angle about the normal,
    which multiplies ``sigma`` by ``exp(2i * rotation)``.
    """

    metric: MetricField
    level: float = 0.0
    rotation: float = 0.0
    label: str = "surface"

    def embed(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        return np.stack([u.real, u.imag, np.full(u.shape, float(self.level))], axis=-1)

    def rotated(self, theta: float) -> "SurfaceChart":
        return SurfaceChart(self.metric, self.level, self.rotation + theta, self.label)


@dataclass
class ShapeData:
    """Pointwise second-fundamental-form data (arrays broadcast over points)."""

    sigma: np.ndarray
    sigma_bar: np.ndarray
    rho: np.ndarray

    @property
    def kappa(self):
        return (self.rho**2 - self.sigma * self.sigma_bar).real


@dataclass
class SurfaceGeometry:
    """Everything the pipeline computes at a batch of surface points."""

    points: np.ndarray
    g: np.ndarray
    normal: np.ndarray
    shape_operator: np.ndarray
    A: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    @property
    def e_plus(self):
        return (self.e1 - 1j * self.e2) / np.sqrt(2)

    @property
    def e_minus(self):
        return (self.e1 + 1j * self.e2) / np.sqrt(2)

    def form(self, X, Y):
        return np.einsum("...ij,...i,...j->...", self.A, X, Y)

    def metric_pair(self, X, Y):
        return np.einsum("...ij,...i,...j->...", self.g, X, Y)

    def shape_data(self) -> ShapeData:
        ep, em = self.e_plus, self.e_minus
        return ShapeData(self.form(ep, ep), self.form(em, em), self.form(em, ep))


def _normal_and_derivative(g, dg):
    ginv = metric_inverse(g)
    n33 = ginv[..., 2, 2]
    if np.any(n33 <= 0):
        raise DegenerateNormalError("normal covector is not spacelike; 1 - |beta|^2 <= 0?")
    root = np.sqrt(n33)
    normal = ginv[..., :, 2] / root[..., None]
    # d_k g^{ij} = -g^{ia} d_k g_ab g^{bj}
    dginv = -np.einsum("...ia,...kab,...bj->...kij", ginv, dg, ginv)
    dnormal = dginv[..., :, :, 2] / root[..., None, None] - 0.5 * (
        normal[..., None, :] * (dginv[..., :, 2, 2] / n33[..., None])[..., :, None]
    )
    return ginv, normal, dnormal


def _tangent_frame(g, rotation):
    h11, h12, h22 = g[..., 0, 0], g[..., 0, 1], g[..., 1, 1]
    zero = np.zeros_like(h11)
    e1 = np.stack([1 / np.sqrt(h11), zero, zero], axis=-1)
    norm2 = np.sqrt(h22 - h12**2 / h11)
    e2 = np.stack([-h12 / h11 / norm2, 1 / norm2, zero], axis=-1)
    if rotation:
        c, s = np.cos(rotation), np.sin(rotation)
        e1, e2 = c * e1 + s * e2, -s * e1 + c * e2
    return e1, e2


def surface_geometry(chart: SurfaceChart, u) -> SurfaceGeometry:
    """Run the full pipeline at surface parameter(s) ``u``."""
    p = chart.embed(u)
    g = chart.metric.eval(p)
    dg = chart.metric.eval_partials(p)
    ginv, e0, de0 = _normal_and_derivative(g, dg)
    gamma = christoffel_from(ginv, dg)
    # S1[i, j] = d_i e0^j + Gamma^j_ik e0^k
    s1 = de0 + np.einsum("...jik,...k->...ij", gamma, e0)
    e0_low = np.einsum("...ik,...k->...i", g, e0)
    proj = IDENTITY - e0_low[..., :, None] * e0[..., None, :]
    S = -np.einsum("...ik,...lj,...kl->...ij", proj, proj, s1)
    GS = np.einsum("...jk,...ik->...ij", g, S)
    A = GS + np.swapaxes(GS, -1, -2)
    e1, e2 = _tangent_frame(g, chart.rotation)
    return SurfaceGeometry(p, g, e0, S, A, e1, e2)


def unit_normal(chart: SurfaceChart, u, basis: str = "real") -> np.ndarray:
    """Unit normal ``e0``; ``basis="complex"`` gives ``(w, conj(w), x3)`` components."""
    p = chart.embed(u)
    g = chart.metric.eval(p)
    ginv = metric_inverse(g)
    if np.any(ginv[..., 2, 2] <= 0):
        raise DegenerateNormalError("normal covector is not spacelike")
    e0 = ginv[..., :, 2] / np.sqrt(ginv[..., 2, 2])[..., None]
    return complex_vector(e0) if basis == "complex" else e0


def shape_operator(chart: SurfaceChart, u) -> np.ndarray:
    """Projected shape operator ``S[..., i, j] = S_i^j``."""
    return surface_geometry(chart, u).shape_operator


def second_fundamental_components(chart: SurfaceChart, u) -> ShapeData:
    return surface_geometry(chart, u).shape_data()


def sigma_field(chart: SurfaceChart):
    """``u -> sigma(u)`` as a vectorized callable."""
    return lambda u: second_fundamental_components(chart, u).sigma
