"""Closed-form expressions the pipeline is checked against.

These are written directly from the analytic results for the two families
and never call into :mod:`umbilic_lab.shape`; they serve as oracles.
"""

import numpy as np

from .constructions import Beta


def flat_normal_complex(beta: Beta, z):
    """``(e0^z, e0^zbar, e0^t) = (-beta, -conj(beta), 1) / sqrt(1 - |beta|^2)``."""
    b = beta(z)
    root = np.sqrt(1 - np.abs(b) ** 2)
    return np.stack([-b, -np.conj(b), np.ones_like(b)], axis=-1) / root[..., None]


def sphere_normal_complex(beta: Beta, xi, R0):
    b = beta(xi)
    q = 1 + np.abs(xi) ** 2
    root = np.sqrt(1 - np.abs(b) ** 2)
    c = -q / (2 * R0)
    return np.stack([c * b, c * np.conj(b), np.ones_like(b)], axis=-1) / root[..., None]


def flat_sigma_rho(beta: Beta, z):
    """``sigma = 2 d_z conj(beta) / sqrt(1 - |beta|^2)`` and
    ``rho = (d_z beta + d_zbar conj(beta)) / sqrt(1 - |beta|^2)``."""
    z = np.asarray(z, dtype=complex)
    root = np.sqrt(1 - np.abs(beta(z)) ** 2)
    sigma = 2 * beta.conj_dw(z) / root
    sigma_bar = 2 * beta.dwbar(z) / root
    rho = (beta.dw(z) + beta.conj_dwbar(z)) / root
    return sigma, sigma_bar, rho


def sphere_sigma_rho(beta: Beta, xi, R0):
    """Sphere-family components on ``R = R0`` for an arbitrary beta."""
    xi = np.asarray(xi, dtype=complex)
    q = 1 + np.abs(xi) ** 2
    b = beta(xi)
    root = R0 * np.sqrt(1 - np.abs(b) ** 2)
    # d_xi[q conj(b)] = conj(xi) conj(b) + q d_xi conj(b)
    sigma = (np.conj(xi) * np.conj(b) + q * beta.conj_dw(xi)) / root
    sigma_bar = (xi * b + q * beta.dwbar(xi)) / root
    # d_xi(b / q) + d_xibar(conj(b) / q)
    div = (beta.dw(xi) * q - b * np.conj(xi)) / q**2 + (beta.conj_dwbar(xi) * q - np.conj(b) * xi) / q**2
    rho = -(4 - q**2 * div) / (2 * root)
    return sigma, sigma_bar, rho


def flat_monomial_sigma(lam, n, m, z):
    z = np.asarray(z, dtype=complex)
    num = 2 * m * lam * z ** (m - 1) * np.conj(z) ** n
    return num / np.sqrt(1 - lam**2 * np.abs(z) ** (2 * (m + n)))


def sphere_family_sigma(lam, xi, R0):
    s = np.abs(np.asarray(xi, dtype=complex)) ** 2
    return lam / (R0 * np.sqrt((1 + s) ** 4 - lam**2 * s)) + 0j


def sphere_family_rho(lam, xi, R0):
    xi = np.asarray(xi, dtype=complex)
    s = np.abs(xi) ** 2
    c2 = (xi**2 + np.conj(xi) ** 2).real / 2  # |xi|^2 cos(2 theta)
    return -(2 * (1 + s) ** 2 + 3 * lam * c2) / (R0 * np.sqrt((1 + s) ** 4 - lam**2 * s))


def sphere_family_kappa(lam, xi, R0):
    xi = np.asarray(xi, dtype=complex)
    s = np.abs(xi) ** 2
    c2 = (xi**2 + np.conj(xi) ** 2).real / 2
    num = (2 * (1 + s) ** 2 + lam * (1 + 3 * c2)) * (2 * (1 + s) ** 2 - lam * (1 - 3 * c2))
    return num / (R0**2 * ((1 + s) ** 4 - lam**2 * s))


def antipodal_family_sigma(lam, xi_prime, R0):
    """sigma' for beta' = -lam xi'^3 / (1 + |xi'|^2)^2 (pull-back transition)."""
    xp = np.asarray(xi_prime, dtype=complex)
    s = np.abs(xp) ** 2
    return lam * np.conj(xp) ** 4 / (R0 * np.sqrt((1 + s) ** 4 - lam**2 * s**3))


def sphere_det(beta: Beta, xi, R):
    s = np.abs(np.asarray(xi, dtype=complex)) ** 2
    return 4 * R**4 * (1 - np.abs(beta(xi)) ** 2) / (1 + s) ** 4


def flat_det(beta: Beta, z):
    return (1 - np.abs(beta(z)) ** 2) / 4
