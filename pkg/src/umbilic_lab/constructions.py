"""The two perturbed metric families and their ingredients.

Flat family, coordinates ``(x, y, t)`` with ``z = x + iy``::

    ds^2 = dz dzbar + dt^2 + Psi(t) [conj(beta) dz + beta dzbar] dt

Sphere family, coordinates ``(a, b, R)`` with ``xi = a + ib`` a
stereographic coordinate on the unit sphere::

    ds^2 = dR^2 + g_round(R) + 2 R Psi(R) / (1 + |xi|^2) [conj(beta) dxi + beta dxibar] dR

In complex components both perturbations only touch the ``(w, 3)`` entries,
so each surface ``t = 0`` / ``R = R0`` keeps its unperturbed induced metric.
The sphere family is normalized so that ``beta = 0`` is exactly the
Euclidean metric in spherical polars (round metric ``4 R^2 |dxi|^2 / (1 + |xi|^2)^2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .tensor import MetricField

SPHERE_BETA_SUP2 = 27.0 / 256.0  # sup |beta|^2 / lambda^2 for the sphere beta


class InvalidParameters(ValueError):
    pass


# --------------------------------------------------------------------------
# bump functions


# exp(-1/s) underflows to 0 below this, so skip it (and avoid 1/s overflow)
_MOLLIFIER_FLOOR = 1.0 / 745.0


def _mollifier(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > _MOLLIFIER_FLOOR
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def _mollifier_prime(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > _MOLLIFIER_FLOOR
    out[pos] = np.exp(-1.0 / s[pos]) / s[pos] ** 2
    return out


@dataclass(frozen=True)
class BumpFunction:
    """Smooth monotone step: 1 on ``[0, inner]``, 0 on ``[outer, inf)``.

    With ``tau = (x - inner) / (outer - inner)`` the transition is
    ``E(1 - tau) / (E(1 - tau) + E(tau))``, ``E(s) = exp(-1/s)`` for ``s > 0``,
    so every band has the same profile shape.  Evaluated on ``|x|`` (even).
    """

    inner: float
    outer: float

    def __post_init__(self):
        if not (0 <= self.inner < self.outer):
            raise InvalidParameters(f"bump needs 0 <= inner < outer, got {self.inner}, {self.outer}")

    def _tau(self, x):
        return (np.abs(np.asarray(x, dtype=float)) - self.inner) / (self.outer - self.inner)

    def __call__(self, x):
        tau = self._tau(x)
        a = _mollifier(1 - tau)
        b = _mollifier(tau)
        return a / (a + b)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        tau = self._tau(x)
        a = _mollifier(1 - tau)
        b = _mollifier(tau)
        da = -_mollifier_prime(1 - tau)
        db = _mollifier_prime(tau)
        return np.sign(x) * (da * b - a * db) / (a + b) ** 2 / (self.outer - self.inner)


def bump(profile: BumpFunction, x):
    return profile(x)


# --------------------------------------------------------------------------
# perturbation functions beta


@dataclass(frozen=True)
class Beta:
    """A complex function of one complex variable with its Wirtinger derivatives.

    ``value(w)``, ``dw(w)`` = d beta / dw and ``dwbar(w)`` = d beta / d conj(w),
    all vectorized over complex arrays.
    """

    value: Callable
    dw: Callable
    dwbar: Callable
    label: str = "beta"

    def __call__(self, w):
        return self.value(np.asarray(w, dtype=complex))

    def conj_dw(self, w):
        """d conj(beta) / dw."""
        return np.conj(self.dwbar(np.asarray(w, dtype=complex)))

    def conj_dwbar(self, w):
        """d conj(beta) / d conj(w)."""
        return np.conj(self.dw(np.asarray(w, dtype=complex)))

    def real_partials(self, w):
        """``(d_x beta, d_y beta)`` for ``w = x + iy``."""
        w = np.asarray(w, dtype=complex)
        d, db = self.dw(w), self.dwbar(w)
        return d + db, 1j * (d - db)


def zero_beta() -> Beta:
    zero = lambda w: np.zeros_like(np.asarray(w, dtype=complex))
    return Beta(zero, zero, zero, "0")


def _ipow(w, k):
    return np.ones_like(w) if k == 0 else w**k


def monomial_beta(lam: float, n: int, m: int) -> Beta:
    """``lam * z**n * conj(z)**m`` with no cut-off."""

    def value(z):
        return lam * _ipow(z, n) * _ipow(np.conj(z), m)

    def dz(z):
        if n == 0:
            return np.zeros_like(z)
        return lam * n * _ipow(z, n - 1) * _ipow(np.conj(z), m)

    def dzbar(z):
        if m == 0:
            return np.zeros_like(z)
        return lam * m * _ipow(z, n) * _ipow(np.conj(z), m - 1)

    return Beta(value, dz, dzbar, f"{lam}*z^{n}*zb^{m}")


def radially_cut(beta: Beta, profile: BumpFunction) -> Beta:
    """``Phi(|w|) * beta(w)``; product rule with d|w|/dw = conj(w) / (2|w|)."""

    def _radial(w):
        r = np.abs(w)
        safe = np.where(r > 0, r, 1.0)
        dphi = profile.derivative(r) / (2.0 * safe)
        return profile(r), np.where(r > 0, dphi, 0.0)

    def value(w):
        return profile(np.abs(w)) * beta.value(w)

    def dw(w):
        phi, half = _radial(w)
        return phi * beta.dw(w) + half * np.conj(w) * beta.value(w)

    def dwbar(w):
        phi, half = _radial(w)
        return phi * beta.dwbar(w) + half * w * beta.value(w)

    return Beta(value, dw, dwbar, f"Phi*{beta.label}")


def sphere_beta(lam: float) -> Beta:
    """``lam * conj(xi) / (1 + |xi|^2)^2``."""

    def value(xi):
        return lam * np.conj(xi) / (1 + np.abs(xi) ** 2) ** 2

    def dxi(xi):
        return -2 * lam * np.conj(xi) ** 2 / (1 + np.abs(xi) ** 2) ** 3

    def dxibar(xi):
        s = np.abs(xi) ** 2
        return lam * (1 - s) / (1 + s) ** 3 + 0j

    return Beta(value, dxi, dxibar, f"{lam}*xib/(1+xi*xib)^2")


def antipodal_sphere_beta(lam: float) -> Beta:
    """The sphere beta expressed in the antipodal chart, ``-lam xi'^3 / (1 + |xi'|^2)^2``."""

    def value(xi):
        return -lam * xi**3 / (1 + np.abs(xi) ** 2) ** 2

    def dxi(xi):
        s = np.abs(xi) ** 2
        return -lam * xi**2 * (3 + s) / (1 + s) ** 3

    def dxibar(xi):
        return 2 * lam * xi**4 / (1 + np.abs(xi) ** 2) ** 3

    return Beta(value, dxi, dxibar, f"-{lam}*xi^3/(1+xi*xib)^2")


def antipode(xi):
    """Coordinate change ``xi' = -1 / conj(xi)`` (an involution)."""
    return -1.0 / np.conj(np.asarray(xi, dtype=complex))


def beta_transition(beta: Callable, xi_prime):
    """Express a sphere-family beta in the antipodal chart.

    Pulling the cross term back through ``xi = -1/conj(xi')`` gives
    ``beta'(xi') = (xi' / conj(xi')) * conj(beta(-1 / conj(xi')))``, which
    keeps ``|beta'| = |beta|`` at corresponding points.  Undefined at
    ``xi' = 0``.
    """
    xp = np.asarray(xi_prime, dtype=complex)
    return xp / np.conj(xp) * np.conj(beta(antipode(xp)))


# --------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class FlatFamilyParams:
    n: int = 1
    m: int = 1
    lam: float = 0.3
    r0: float = 0.5
    r1: float = 0.9
    epsilon: float = 0.1

    def __post_init__(self):
        validate_flat(self)

    @property
    def index(self):
        """Index ``(n - m + 1) / 2`` of the umbilic at the origin, as a Fraction."""
        from fractions import Fraction

        return Fraction(self.n - self.m + 1, 2)


@dataclass(frozen=True)
class SphereFamilyParams:
    lam: float = 0.5
    R0: float = 1.0
    epsilon: float = 0.1

    def __post_init__(self):
        validate_sphere(self)

    @property
    def strictly_convex(self) -> bool:
        return self.lam < 1


def validate_flat(p: FlatFamilyParams) -> None:
    if int(p.n) != p.n or p.n < 0:
        raise InvalidParameters("n must be a natural number")
    if int(p.m) != p.m or p.m < 1:
        raise InvalidParameters("m must be an integer >= 1")
    if not p.lam >= 0:
        raise InvalidParameters("lambda must be >= 0")
    if not p.lam < 1:
        raise InvalidParameters("lambda must be < 1")
    if not 0 < p.r0 < p.r1 < 1:
        raise InvalidParameters("need 0 < r0 < r1 < 1")
    if not p.epsilon > 0:
        raise InvalidParameters("epsilon must be > 0")


def validate_sphere(p: SphereFamilyParams) -> None:
    if not p.lam >= 0:
        raise InvalidParameters("lambda must be >= 0")
    if not p.lam**2 <= 256.0 / 27.0:
        raise InvalidParameters("lambda^2 must be <= 4^4/3^3 for a Riemannian metric")
    if not p.R0 > 0:
        raise InvalidParameters("R0 must be > 0")
    if not p.epsilon > 0:
        raise InvalidParameters("epsilon must be > 0")
    if not p.epsilon / 2 < p.R0:
        raise InvalidParameters("epsilon/2 must be < R0 so the collar stays in R > 0")


def flat_bumps(params: FlatFamilyParams) -> tuple[BumpFunction, BumpFunction]:
    """``(Phi, Psi)``: the radial cut-off in ``|z|`` and the collar in ``t``."""
    return (
        BumpFunction(params.r0, params.r1),
        BumpFunction(params.epsilon / 4, params.epsilon / 2),
    )


def beta_flat(params: FlatFamilyParams, z=None):
    """The flat family's beta; returns the :class:`Beta` when ``z`` is None."""
    phi, _ = flat_bumps(params)
    beta = radially_cut(monomial_beta(params.lam, params.n, params.m), phi)
    return beta if z is None else beta(z)


def beta_sphere(params: SphereFamilyParams, xi=None):
    beta = sphere_beta(params.lam)
    return beta if xi is None else beta(xi)


def beta_antipodal(params: SphereFamilyParams, xi_prime=None):
    beta = antipodal_sphere_beta(params.lam)
    return beta if xi_prime is None else beta(xi_prime)


# --------------------------------------------------------------------------
# metrics


def _unit(_):
    return 1.0


def _zero(_):
    return 0.0


def flat_reference() -> MetricField:
    """Euclidean metric ``dz dzbar + dt^2`` in ``(x, y, t)``."""

    def components(p):
        return np.broadcast_to(np.eye(3), p.shape[:-1] + (3, 3)).copy()

    def derivatives(p):
        return np.zeros(p.shape[:-1] + (3, 3, 3))

    return MetricField(components, derivatives, None, "flat-reference")


def sphere_reference() -> MetricField:
    """Euclidean metric in stereographic-polar coordinates ``(a, b, R)``."""
    return _sphere_metric(zero_beta(), _unit, _zero, None, "sphere-reference")


def flat_metric(beta: Beta, collar: Optional[BumpFunction] = None, name: str = "flat") -> MetricField:
    """Perturbed flat metric for an arbitrary ``beta(z)``.

    Real components: ``g = I`` plus ``g_xt = Psi Re(beta)``, ``g_yt = Psi Im(beta)``.
    """
    psi = collar if collar is not None else _unit
    dpsi = collar.derivative if collar is not None else _zero

    def components(p):
        z = p[..., 0] + 1j * p[..., 1]
        b = beta(z) * psi(p[..., 2])
        g = np.zeros(p.shape[:-1] + (3, 3))
        g[..., 0, 0] = g[..., 1, 1] = g[..., 2, 2] = 1.0
        g[..., 0, 2] = g[..., 2, 0] = b.real
        g[..., 1, 2] = g[..., 2, 1] = b.imag
        return g

    def derivatives(p):
        z = p[..., 0] + 1j * p[..., 1]
        t = p[..., 2]
        dx, dy = beta.real_partials(z)
        s = psi(t)
        grads = (dx * s, dy * s, beta(z) * dpsi(t))
        dg = np.zeros(p.shape[:-1] + (3, 3, 3))
        for k, d in enumerate(grads):
            d = np.broadcast_to(d, p.shape[:-1])
            dg[..., k, 0, 2] = dg[..., k, 2, 0] = d.real
            dg[..., k, 1, 2] = dg[..., k, 2, 1] = d.imag
        return dg

    return MetricField(components, derivatives, flat_reference(), name)


def sphere_metric(beta: Beta, collar_center: Optional[float] = None,
                  collar: Optional[BumpFunction] = None, name: str = "sphere") -> MetricField:
    """Perturbed Euclidean metric in stereographic-polar coordinates ``(a, b, R)``.

    ``g_aa = g_bb = 4 R^2 / (1 + s)^2``, ``g_RR = 1`` and
    ``(g_aR, g_bR) = 2 R Psi(R - R0) (Re beta, Im beta) / (1 + s)``, ``s = a^2 + b^2``.
    The collar is a function of ``R - collar_center``.
    """
    if collar is not None and collar_center is None:
        raise ValueError("a collar needs a centre")
    c0 = collar_center or 0.0
    psi = (lambda r: collar(r - c0)) if collar is not None else _unit
    dpsi = (lambda r: collar.derivative(r - c0)) if collar is not None else _zero
    return _sphere_metric(beta, psi, dpsi, sphere_reference(), name)


def _sphere_metric(beta, psi, dpsi, reference, name):
    def components(p):
        a, b, R = p[..., 0], p[..., 1], p[..., 2]
        xi = a + 1j * b
        q = 1 + a * a + b * b
        cross = 2 * R * psi(R) * beta(xi) / q
        g = np.zeros(p.shape[:-1] + (3, 3))
        g[..., 0, 0] = g[..., 1, 1] = 4 * R**2 / q**2
        g[..., 2, 2] = 1.0
        g[..., 0, 2] = g[..., 2, 0] = cross.real
        g[..., 1, 2] = g[..., 2, 1] = cross.imag
        return g

    def derivatives(p):
        a, b, R = p[..., 0], p[..., 1], p[..., 2]
        xi = a + 1j * b
        q = 1 + a * a + b * b
        s, ds = psi(R), dpsi(R)
        bx, by = beta.real_partials(xi)
        bv = beta(xi)
        dg = np.zeros(p.shape[:-1] + (3, 3, 3))
        # round block
        dg[..., 0, 0, 0] = dg[..., 0, 1, 1] = -16 * R**2 * a / q**3
        dg[..., 1, 0, 0] = dg[..., 1, 1, 1] = -16 * R**2 * b / q**3
        dg[..., 2, 0, 0] = dg[..., 2, 1, 1] = 8 * R / q**2
        # cross terms 2 R Psi beta / q
        grads = (
            2 * R * s * (bx / q - 2 * a * bv / q**2),
            2 * R * s * (by / q - 2 * b * bv / q**2),
            2 * (s + R * ds) * bv / q,
        )
        for k, d in enumerate(grads):
            d = np.broadcast_to(d, p.shape[:-1])
            dg[..., k, 0, 2] = dg[..., k, 2, 0] = d.real
            dg[..., k, 1, 2] = dg[..., k, 2, 1] = d.imag
        return dg

    return MetricField(components, derivatives, reference, name)


def build_flat_metric(params: FlatFamilyParams, collar: bool = True) -> MetricField:
    validate_flat(params)
    _, psi = flat_bumps(params)
    return flat_metric(beta_flat(params), psi if collar else None)


def sphere_collar(params: SphereFamilyParams) -> BumpFunction:
    return BumpFunction(params.epsilon / 4, params.epsilon / 2)


@dataclass(frozen=True)
class SphereAtlas:
    """The sphere family on its two charts.

    ``primary`` uses ``xi`` (covers all but the south pole) and ``antipodal``
    uses ``xi' = -1/conj(xi)``.  Points with ``|xi| <= 1`` are served by the
    primary chart, the rest by the antipodal one.
    """

    params: SphereFamilyParams
    primary: MetricField = field(repr=False)
    antipodal: MetricField = field(repr=False)

    def chart(self, label: str) -> MetricField:
        return {"primary": self.primary, "antipodal": self.antipodal}[label]

    @staticmethod
    def select(xi):
        """Chart label and local coordinate for a primary-chart coordinate."""
        xi = complex(xi)
        if abs(xi) <= 1:
            return "primary", xi
        return "antipodal", complex(antipode(xi))


def build_sphere_metric(params: SphereFamilyParams, collar: bool = True) -> SphereAtlas:
    validate_sphere(params)
    kw = {}
    if collar:
        kw = dict(collar_center=params.R0, collar=sphere_collar(params))
    return SphereAtlas(
        params,
        sphere_metric(beta_sphere(params), name="sphere", **kw),
        sphere_metric(beta_antipodal(params), name="sphere-antipodal", **kw),
    )


# --------------------------------------------------------------------------
# L2 budgets


def flat_l2_bound(lam: float, epsilon: float) -> float:
    return 2 * lam**2 * epsilon * math.pi


def sphere_l2_bound(lam: float, epsilon: float, R0: float) -> float:
    """Coarse bound ``2 (27/256) eps pi lam^2 (12 R0^2 + eps^2)``."""
    return 2 * SPHERE_BETA_SUP2 * epsilon * math.pi * lam**2 * (12 * R0**2 + epsilon**2)


def sphere_l2_tight_bound(lam: float, epsilon: float, R0: float) -> float:
    """Same chain with the exact shell volume: ``int R^2 dR = eps (12 R0^2 + eps^2) / 12``
    times sphere area ``4 pi``; one third of :func:`sphere_l2_bound`."""
    return sphere_l2_bound(lam, epsilon, R0) / 3.0


def lambda_budget_flat(epsilon: float) -> float:
    """Largest lambda with ``2 lam^2 eps pi <= eps``; epsilon cancels."""
    if not epsilon > 0:
        raise InvalidParameters("epsilon must be > 0")
    return min(1.0 / math.sqrt(2 * math.pi), 1.0)


def lambda_budget_sphere(epsilon: float, R0: float) -> float:
    """``sqrt(2^7 / (3^3 pi (12 R0^2 + eps^2)))``, capped below 1 for convexity."""
    if not epsilon > 0:
        raise InvalidParameters("epsilon must be > 0")
    if not R0 > 0:
        raise InvalidParameters("R0 must be > 0")
    lam = math.sqrt(2**7 / (3**3 * math.pi * (12 * R0**2 + epsilon**2)))
    return min(lam, math.nextafter(1.0, 0.0))
