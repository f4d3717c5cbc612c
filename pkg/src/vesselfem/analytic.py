"""Closed-form reference solutions and homogenized effective behaviour.

All functions work in SI units.  Field functions accept a single point or
an ``(n, 2)`` array and return ``(displacement, gradient)`` with the
gradient indexed ``[..., component, direction]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elasticity import Material


@dataclass(frozen=True)
class AxisymConfig:
    """Single pressurized vessel of radius ``a`` centred in a disc of radius ``R``."""

    R: float
    a: float
    p: float
    material: Material

    def __post_init__(self):
        if not 0 < self.a < self.R:
            raise ValueError("need 0 < a < R")

    @property
    def _denominator(self):
        m = self.material
        return self.R ** 2 * m.mu + m.lam * self.a ** 2 + m.mu * self.a ** 2


def _points(x):
    x = np.asarray(x, dtype=float)
    return x.ndim == 1, np.atleast_2d(x)


def exact_axisym(cfg: AxisymConfig, x):
    """Displacement outside the vessel,
    ``u = p a^2 (R^2 - |x|^2) / (2 (R^2 mu + lambda a^2 + mu a^2)) x / |x|^2``."""
    single, X = _points(x)
    r2 = np.sum(X ** 2, axis=1)
    if np.any(r2 == 0):
        raise ValueError("the exact solution is singular at the vessel centre")
    A = cfg.p * cfg.a ** 2 / (2.0 * cfg._denominator)
    u = A * (cfg.R ** 2 / r2 - 1.0)[:, None] * X
    eye = np.eye(X.shape[1])
    g = A * (cfg.R ** 2 * (eye[None] / r2[:, None, None]
                           - 2.0 * np.einsum("ni,nj->nij", X, X) / (r2 ** 2)[:, None, None])
             - eye[None])
    return (u[0], g[0]) if single else (u, g)


def extended_axisym(cfg: AxisymConfig, x):
    """Exact field outside the vessel, uniform dilation inside it."""
    single, X = _points(x)
    r = np.linalg.norm(X, axis=1)
    inside = r < cfg.a
    u = np.zeros_like(X)
    g = np.zeros((X.shape[0], X.shape[1], X.shape[1]))
    if np.any(~inside):
        u[~inside], g[~inside] = exact_axisym(cfg, X[~inside])
    B = cfg.p * (cfg.R ** 2 - cfg.a ** 2) / (2.0 * cfg._denominator)
    u[inside] = B * X[inside]
    g[inside] = B * np.eye(X.shape[1])
    return (u[0], g[0]) if single else (u, g)


def jump_ga(cfg: AxisymConfig):
    """Normal-stress jump across the vessel wall, ``R^2 p (lambda + 2 mu) / (R^2 mu + lambda a^2 + mu a^2)``."""
    m = cfg.material
    return cfg.R ** 2 * cfg.p * (m.lam + 2.0 * m.mu) / cfg._denominator


def jump_geps(cfg: AxisymConfig, eps):
    """Jump imposed on a circle of radius ``eps`` instead of ``a``."""
    if eps <= 0:
        raise ValueError("eps must be > 0")
    return (cfg.a / eps) ** 2 * jump_ga(cfg)


def homog_2d(material: Material, beta, p):
    """Uniform dilation coefficient ``c`` (``u = c x``) under traction-free
    boundaries and the resulting normal boundary traction, for an isotropic
    vessel volume fraction ``beta``."""
    if not 0 <= beta < 1:
        raise ValueError("beta must lie in [0, 1)")
    mu, lam = material.mu, material.lam
    c = beta * p / (2.0 * mu) * (2.0 * mu + lam) / (mu + lam)
    traction = beta * p * (2.0 * mu + lam) / mu
    return c, traction


def homog_3d_aligned(material: Material, beta, p, tau):
    """Homogenized response to vessels aligned with ``tau``.

    Returns ``(M, sigma)`` where ``u(x) = M x`` and ``sigma`` is the
    resulting uniform stress, ``p (2mu+lambda)/mu beta (I - tau tau)``.
    """
    tau = np.asarray(tau, dtype=float)
    if abs(np.linalg.norm(tau) - 1.0) > 1e-12:
        raise ValueError("tau must be a unit vector")
    mu, lam = material.mu, material.lam
    P = np.outer(tau, tau)
    I = np.eye(3)
    M = beta * p / (2.0 * mu ** 2) * (2.0 * mu + lam) * ((2.0 * mu + lam) / (2.0 * mu + 3.0 * lam) * I - P)
    sigma = p * material.jump_factor * beta * (I - P)
    residual = material.stress(M) @ tau
    if np.abs(residual).max() > 1e-12 * max(1.0, np.abs(sigma).max()):
        raise ArithmeticError("axial stress does not vanish")
    return M, sigma


def anisotropic_beta(betas, directions):
    """``sum_i beta_i (I - tau_i tau_i)`` for orthonormal ``directions`` (rows)."""
    D = np.asarray(directions, dtype=float)
    return sum(b * (np.eye(3) - np.outer(t, t)) for b, t in zip(betas, D))


def stress_anisotropic(material: Material, beta_tensor, p):
    """Uniform pressure-induced stress ``p (2mu+lambda)/mu beta``."""
    B = np.asarray(beta_tensor, dtype=float)
    if not np.allclose(B, B.T, rtol=0, atol=1e-14 * max(1.0, np.abs(B).max())):
        raise ValueError("beta tensor must be symmetric")
    return p * material.jump_factor * B


def pure_shear_gradient(c, i, j, dim=3):
    """Displacement gradient of the pure shear ``u = (c/2) (e_i e_j + e_j e_i) x``."""
    if i == j:
        raise ValueError("pure shear needs i != j")
    grad = np.zeros((dim, dim))
    grad[i, j] = grad[j, i] = 0.5 * c
    return grad


def pure_shear_stress(material: Material, c, i, j, dim=3):
    """Stress of the pure shear of amplitude ``c``: ``c mu (e_i e_j + e_j e_i)``,
    so that the shear force per unit area on a face of normal ``e_j`` is ``c mu``."""
    return material.stress(pure_shear_gradient(c, i, j, dim))


def pressure_shear_force(material: Material, betas, directions, p, i, j, area=1.0):
    """Vessel contribution to the force along ``e_j`` on a face of normal ``e_i``
    during a pure-shear test (sign as in the shear-modulus correction)."""
    D = np.asarray(directions, dtype=float)
    s = sum(b * t[i] * t[j] for b, t in zip(betas, D))
    return -area * p * material.jump_factor * s


def shear_correction(material: Material, betas, directions, p, c, i, j):
    """Apparent shear modulus measured in a pure-shear test of amplitude ``c``,
    ``mu_e = (1 - p (2mu+lambda)/(c mu^2) sum_k beta_k (tau_k.e_i)(tau_k.e_j)) mu``."""
    if c == 0:
        raise ValueError("shear amplitude c must be non-zero")
    mu = material.mu
    D = np.asarray(directions, dtype=float)
    s = sum(b * t[i] * t[j] for b, t in zip(betas, D))
    return (1.0 - p * (2.0 * mu + material.lam) / (c * mu ** 2) * s) * mu
