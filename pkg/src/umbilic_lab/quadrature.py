"""Tensor-product Gauss-Legendre quadrature of metric deviations."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .tensor import MetricField, pointwise_deviation


@dataclass(frozen=True)
class PolarCollar:
    """``{|w| in radial, arg w in [0, 2 pi), x3 in transverse}`` in a chart.

    ``radial`` and ``transverse`` are sorted break points; each interval is a
    separate panel, so bump-function junctions should be listed as breaks.
    ``subpanels`` further splits every interval evenly.
    """

    radial: Sequence[float]
    transverse: Sequence[float]
    subpanels: int = 1


def _panels(breaks, sub):
    out = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        edges = np.linspace(a, b, sub + 1)
        out.extend(zip(edges[:-1], edges[1:]))
    return out


def _rule(a, b, order):
    x, w = leggauss(order)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def integrate_l2(g: MetricField, g0: MetricField, domain: PolarCollar, order: int = 16) -> float:
    """``int |g - g0|^2_{g0} dV_{g0}`` over ``domain``.

    The volume element is ``sqrt(det g0)`` in chart coordinates times the
    polar Jacobian ``|w|``.
    """
    theta, wt = _rule(0.0, 2 * np.pi, order)
    total = 0.0
    for ra, rb in _panels(domain.radial, domain.subpanels):
        r, wr = _rule(ra, rb, order)
        for ta, tb in _panels(domain.transverse, domain.subpanels):
            t, wtr = _rule(ta, tb, order)
            R, TH, T = np.meshgrid(r, theta, t, indexing="ij")
            W = wr[:, None, None] * wt[None, :, None] * wtr[None, None, :]
            pts = np.stack([R * np.cos(TH), R * np.sin(TH), T], axis=-1)
            dev = pointwise_deviation(g, g0, pts)
            vol = np.sqrt(np.linalg.det(g0.eval(pts)))
            total += float(np.sum(W * dev * vol * R))
    return total


def converged_l2(g, g0, domain, orders=(16, 32), rtol=1e-6):
    """Integrate at two orders; warn when they differ by more than ``rtol``."""
    lo, hi = (integrate_l2(g, g0, domain, o) for o in orders)
    rel = abs(hi - lo) / max(abs(hi), np.finfo(float).tiny)
    if hi == 0 and lo == 0:
        rel = 0.0
    if rel > rtol:
        warnings.warn(f"quadrature not converged: orders {orders} differ by {rel:.2e}", RuntimeWarning)
    return hi, lo, rel
