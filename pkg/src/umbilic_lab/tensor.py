"""Metric tensor fields on a 3-dimensional coordinate chart.

Everything here works in *real* chart coordinates ``(x1, x2, x3)``.  For the
two perturbation families the first two coordinates are the real and
imaginary parts of a complex coordinate (``z`` or ``xi``) and the third is the
transverse coordinate (``t`` or ``R``).  Complex-coordinate components, in
the ordering ``(w, conj(w), x3)``, are obtained through the constant Jacobian
``COMPLEX_JACOBIAN``; see :func:`complex_components`.

Points are arrays whose last axis has length 3, so every function accepts a
single point or a batch of shape ``(..., 3)``.  Component arrays follow the
index layout

* ``g[..., i, j]``          -> g_ij
* ``dg[..., k, i, j]``      -> d_k g_ij
* ``gamma[..., k, i, j]``   -> Gamma^k_ij
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

DEGENERACY_THRESHOLD = 1e-14

# d x^a / d y^i with y = (w, conj(w), x3) and x = (Re w, Im w, x3).
COMPLEX_JACOBIAN = np.array(
    [[0.5, 0.5, 0.0], [-0.5j, 0.5j, 0.0], [0.0, 0.0, 1.0]], dtype=complex
)
# d y^i / d x^a, i.e. vector components (v^w, v^wbar, v^3) from real ones.
REAL_TO_COMPLEX = np.array(
    [[1.0, 1.0j, 0.0], [1.0, -1.0j, 0.0], [0.0, 0.0, 1.0]], dtype=complex
)


class SingularMetricError(ValueError):
    """Raised when a metric is degenerate (|det g| below threshold)."""


def as_points(p) -> np.ndarray:
    """Validate chart points and return them as a float array ``(..., 3)``."""
    p = np.asarray(p, dtype=float)
    if p.shape[-1:] != (3,):
        raise ValueError(f"chart points need a trailing axis of length 3, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("chart coordinates must be finite")
    return p


def finite_difference_partials(fn: Callable, p: np.ndarray, h: Optional[float] = None) -> np.ndarray:
    """Central-difference partials ``d_k fn(p)``, stacked on axis ``-3``.

    The default step is ``1e-5 * max(1, |x_k|)`` per coordinate.
    """
    p = as_points(p)
    out = []
    for k in range(3):
        if h is None:
            step = 1e-5 * np.maximum(1.0, np.abs(p[..., k]))
        else:
            step = np.full(p.shape[:-1], float(h))
        dp = np.zeros_like(p)
        dp[..., k] = step
        diff = fn(p + dp) - fn(p - dp)
        out.append(diff / (2.0 * step)[..., None, None])
    return np.stack(out, axis=-3)


@dataclass(frozen=True)
class MetricField:
    """A Riemannian metric given by component functions on a 3-chart.

    Parameters
    ----------
    components : callable
        Maps points ``(..., 3)`` to symmetric matrices ``(..., 3, 3)``.
    derivatives : callable, optional
        Maps points to ``d_k g_ij`` with shape ``(..., 3, 3, 3)``.  When
        omitted, central differences of ``components`` are used.
    reference : MetricField, optional
        The unperturbed metric this field is compared against.
    name : str
        Label used in reports.
    """

    components: Callable[[np.ndarray], np.ndarray]
    derivatives: Optional[Callable[[np.ndarray], np.ndarray]] = None
    reference: Optional["MetricField"] = None
    name: str = "metric"

    def eval(self, p) -> np.ndarray:
        return self.components(as_points(p))

    __call__ = eval

    def eval_partials(self, p, h: Optional[float] = None) -> np.ndarray:
        p = as_points(p)
        if self.derivatives is not None and h is None:
            return self.derivatives(p)
        return finite_difference_partials(self.components, p, h)

    @property
    def has_closed_form_partials(self) -> bool:
        return self.derivatives is not None

    def without_closed_form_partials(self) -> "MetricField":
        """Same field, but forcing the finite-difference fallback."""
        return MetricField(self.components, None, self.reference, self.name + "[fd]")


def metric_inverse(g) -> np.ndarray:
    """Inverse of (a batch of) symmetric 3x3 matrices.

    Raises :class:`SingularMetricError` where ``|det g| < 1e-14``.
    """
    g = np.asarray(g, dtype=float)
    det = np.linalg.det(g)
    if np.any(np.abs(det) < DEGENERACY_THRESHOLD):
        raise SingularMetricError(f"degenerate metric: min |det g| = {np.min(np.abs(det)):.3e}")
    inv = np.linalg.inv(g)
    return 0.5 * (inv + np.swapaxes(inv, -1, -2))


def metric_det(g: MetricField, p) -> np.ndarray:
    """Determinant of the metric in the complex-coordinate normalization.

    With ``y = (w, conj(w), x3)`` the complex component matrix has
    determinant ``det(J)**2 * det(g_real) = -det(g_real) / 4``; the value
    returned is its magnitude ``det(g_real) / 4``, e.g. ``(1 - |beta|**2) / 4``
    for the flat family.
    """
    return np.linalg.det(g.eval(p)) / 4.0


def christoffel(g: MetricField, p) -> np.ndarray:
    """Christoffel symbols ``gamma[..., k, i, j]`` of the Levi-Civita connection."""
    gij = g.eval(p)
    dg = g.eval_partials(p)
    return christoffel_from(metric_inverse(gij), dg)


def christoffel_from(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    # lowered[..., i, j, p] = (d_i g_jp + d_j g_pi - d_p g_ij) / 2
    lowered = 0.5 * (
        dg + np.swapaxes(dg, -3, -2) - np.moveaxis(dg, -3, -1)
    )
    gamma = np.einsum("...kp,...ijp->...kij", ginv, lowered)
    return 0.5 * (gamma + np.swapaxes(gamma, -1, -2))


def pointwise_deviation(g: MetricField, g0: Optional[MetricField], p) -> np.ndarray:
    """``|g - g0|^2 = (g - g0)_ij (g - g0)_kl g0^ik g0^jl`` at each point."""
    if g0 is None:
        g0 = g.reference
    if g0 is None:
        raise ValueError("no reference metric supplied")
    p = as_points(p)
    g0ij = g0.eval(p)
    diff = g.eval(p) - g0ij
    g0inv = metric_inverse(g0ij)
    return np.einsum("...ij,...kl,...ik,...jl->...", diff, diff, g0inv, g0inv)


def complex_components(g_real) -> np.ndarray:
    """Covariant components in ``(w, conj(w), x3)`` from real components."""
    J = COMPLEX_JACOBIAN
    return np.einsum("...ab,ai,bj->...ij", np.asarray(g_real), J, J)


def complex_vector(v_real) -> np.ndarray:
    """Contravariant components in ``(w, conj(w), x3)`` from real ones."""
    return np.einsum("ia,...a->...i", REAL_TO_COMPLEX, np.asarray(v_real))


def real_vector(v_complex) -> np.ndarray:
    """Inverse of :func:`complex_vector`; the result may carry an imaginary part
    when the vector is complexified (e.g. a null frame vector)."""
    return np.einsum("ai,...i->...a", COMPLEX_JACOBIAN, np.asarray(v_complex))


def complex_christoffel(gamma_real) -> np.ndarray:
    """Christoffel symbols in ``(w, conj(w), x3)``; the change is linear so
    no inhomogeneous term appears."""
    J = COMPLEX_JACOBIAN
    return np.einsum("ck,...kab,ai,bj->...cij", REAL_TO_COMPLEX, np.asarray(gamma_real), J, J)
