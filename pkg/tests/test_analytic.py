import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vesselfem.analytic import (AxisymConfig, anisotropic_beta, exact_axisym, extended_axisym,
                                homog_2d, homog_3d_aligned, jump_ga, jump_geps,
                                pure_shear_stress, shear_correction, stress_anisotropic)
from vesselfem.elasticity import Material

MAT = Material(1.0, 1.0)
CFG = AxisymConfig(1.0, 0.1, 1.0, MAT)


def radial(cfg, r):
    return exact_axisym(cfg, np.array([r, 0.0]))[0][0]


def test_exact_vanishes_on_outer_circle():
    for phi in np.linspace(0, 2 * np.pi, 7):
        assert np.allclose(exact_axisym(CFG, [np.cos(phi), np.sin(phi)])[0], 0, atol=1e-16)


def test_exact_values():
    # p a^2 (R^2 - r^2) / (2 (R^2 mu + lambda a^2 + mu a^2) r)
    assert radial(CFG, 0.1) == pytest.approx(0.01 * 0.99 / (2 * 1.02 * 0.1), rel=1e-14)
    assert radial(CFG, 0.1) == pytest.approx(0.0485294, abs=5e-8)
    assert radial(CFG, 0.5) == pytest.approx(0.0073529, abs=5e-8)
    # thin-vessel estimate p a / (2 mu) with an O((a/R)^2) gap
    assert abs(radial(CFG, 0.1) - 0.05) <= 0.05 * 4 * 0.01


def test_exact_singular_at_centre():
    with pytest.raises(ValueError):
        exact_axisym(CFG, [0.0, 0.0])


def test_config_validation():
    with pytest.raises(ValueError):
        AxisymConfig(1.0, 1.0, 1.0, MAT)


def test_exact_gradient_matches_finite_differences():
    x = np.array([0.31, -0.22])
    _, g = exact_axisym(CFG, x)
    h = 1e-6
    fd = np.column_stack([(exact_axisym(CFG, x + h * e)[0] - exact_axisym(CFG, x - h * e)[0]) / (2 * h)
                          for e in np.eye(2)])
    assert np.allclose(g, fd, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.12, 0.95), st.floats(0, 2 * np.pi))
def test_exact_solves_equilibrium(r, phi):
    x = r * np.array([np.cos(phi), np.sin(phi)])
    h = 1e-4

    def sigma(y):
        return MAT.stress(exact_axisym(CFG, y)[1])

    # fourth-order central differences of each stress column
    div = sum((-sigma(x + 2 * h * e)[:, k] + 8 * sigma(x + h * e)[:, k]
               - 8 * sigma(x - h * e)[:, k] + sigma(x - 2 * h * e)[:, k]) / (12 * h)
              for k, e in enumerate(np.eye(2)))
    assert np.abs(div).max() <= 1e-8


def test_extended_origin_and_continuity():
    assert np.all(extended_axisym(CFG, [0.0, 0.0])[0] == 0)
    n = np.array([0.6, 0.8])
    inside = CFG.p * (CFG.R ** 2 - CFG.a ** 2) / (2 * CFG._denominator) * CFG.a * n
    assert np.allclose(exact_axisym(CFG, CFG.a * n)[0], inside, atol=1e-14, rtol=0)


def test_normal_stress_jump_equals_ga():
    n = np.array([1.0, 0.0])
    d = 1e-8
    s_out = MAT.stress(extended_axisym(CFG, (CFG.a + d) * n)[1]) @ n @ n
    s_in = MAT.stress(extended_axisym(CFG, (CFG.a - d) * n)[1]) @ n @ n
    assert s_in - s_out == pytest.approx(jump_ga(CFG), rel=1e-6)


def test_jumps():
    assert jump_ga(CFG) == pytest.approx(3 / 1.02, rel=1e-14)
    assert jump_ga(CFG) == pytest.approx(2.9411765, abs=5e-8)
    assert jump_geps(CFG, CFG.a) == pytest.approx(jump_ga(CFG), rel=1e-15)
    assert abs(jump_ga(CFG) - 3) <= (CFG.a / CFG.R) ** 2 * 6
    with pytest.raises(ValueError):
        jump_geps(CFG, 0.0)


def test_homog_2d():
    assert homog_2d(MAT, 0.0, 1.0) == (0.0, 0.0)
    c, t = homog_2d(MAT, 0.05, 1.0)
    assert c == pytest.approx(0.0375, rel=1e-14)
    assert t == pytest.approx(0.15, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 10), st.floats(0, 10), st.floats(0, 0.5), st.floats(-5, 5))
def test_homog_2d_balances_source(mu, lam, beta, p):
    # weak form: int sigma(u) : grad v = int k p beta div v for all v, so with
    # traction-free boundaries u = c x must satisfy sigma(u) = k p beta I exactly
    m = Material(mu, lam)
    c, t = homog_2d(m, beta, p)
    sigma = m.stress(c * np.eye(2))
    source = p * beta * (2 * mu + lam) / mu * np.eye(2)
    assert np.allclose(sigma, source, atol=1e-14 * max(1, abs(p) * 10))
    assert t == pytest.approx(beta * p * (2 * mu + lam) / mu, abs=1e-15)


def test_homog_3d_aligned_values():
    M, sigma = homog_3d_aligned(MAT, 0.05, 1.0, [0, 0, 1])
    assert M[0, 0] == pytest.approx(0.045, rel=1e-13)
    assert M[1, 1] == pytest.approx(0.045, rel=1e-13)
    assert M[2, 2] == pytest.approx(-0.03, rel=1e-13)
    assert M[2, 2] == pytest.approx(-(2 / 3) * M[0, 0], rel=1e-13)
    assert np.allclose(MAT.stress(M) @ [0, 0, 1], 0, atol=1e-15)
    assert sigma[0, 0] == pytest.approx(0.15, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 10), st.floats(0, 10), st.floats(0.001, 0.3),
       st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_homog_3d_aligned_identities(mu, lam, beta, a, b, c):
    tau = np.array([a, b, c])
    if np.linalg.norm(tau) < 0.1:
        tau = np.array([0.0, 0.0, 1.0])
    tau = tau / np.linalg.norm(tau)
    m = Material(mu, lam)
    M, sigma = homog_3d_aligned(m, beta, 1.0, tau)
    s = m.stress(M)
    assert np.abs(s @ tau).max() <= 1e-12 * np.abs(sigma).max()
    w = np.sort(np.linalg.eigvalsh(s))
    assert np.allclose(w[1:], beta * (2 * mu + lam) / mu, rtol=1e-12)


def test_homog_3d_rejects_non_unit_tau():
    with pytest.raises(ValueError):
        homog_3d_aligned(MAT, 0.05, 1.0, [0, 0, 2])


def test_stress_anisotropic():
    B = anisotropic_beta([0.01, 0.02, 0.03], np.eye(3))
    assert np.allclose(stress_anisotropic(MAT, B, 2.0), 6.0 * B)
    assert np.all(stress_anisotropic(MAT, np.zeros((3, 3)), 1.0) == 0)
    with pytest.raises(ValueError):
        stress_anisotropic(MAT, [[0, 1, 0], [0, 0, 0], [0, 0, 0]], 1.0)


def test_pure_shear_identity():
    for i in range(3):
        for j in range(3):
            if i != j:
                E = np.zeros((3, 3))
                E[i, j] = 1.0
                assert np.allclose(pure_shear_stress(MAT, 0.4, i, j), 0.4 * MAT.mu * (E + E.T))


def test_shear_correction():
    axes = np.eye(3)
    assert shear_correction(MAT, [0.05, 0.05, 0.05], axes, 1.0, 0.01, 0, 1) == pytest.approx(1.0)
    tau = np.array([[1, 1, 0], [1, -1, 0], [0, 0, 1]]) / np.array([[np.sqrt(2)], [np.sqrt(2)], [1]])
    mu_e = shear_correction(MAT, [0.05, 0.0, 0.0], tau, 0.001, 0.01, 0, 1)
    assert mu_e == pytest.approx(0.9925, rel=1e-12)
    assert shear_correction(MAT, [0, 0, 0], tau, 1.0, 0.01, 0, 1) == MAT.mu
    with pytest.raises(ValueError):
        shear_correction(MAT, [0.05, 0, 0], tau, 1.0, 0.0, 0, 1)
