import numpy as np
import pytest
from scipy.special import lambertw

from delaymargin.charroots import (
    abscissa_only,
    critical_delay,
    refine_root,
    spectral_abscissa,
    window_count,
)
from delaymargin.errors import NoCrossingInRange
from delaymargin.model import SystemSpec

from conftest import random_delay_spec


def scalar_spec(b, c, tau):
    return SystemSpec.feedback(np.array([[b]]), np.array([[c]]), tau)


def lambert_roots(b, c, tau, branches=range(-4, 5)):
    """Independent oracle: lam = b + c e^{-lam tau} via Lambert W branches."""
    roots = []
    for k in branches:
        w = lambertw(c * tau * np.exp(-b * tau), k)
        roots.append(b + w / tau)
    return np.array(roots)


def test_scalar_rightmost_root_matches_lambert_w():
    spec = scalar_spec(0.0, -1.0, 1.0)
    rs = spectral_abscissa(spec)
    exact = lambert_roots(0.0, -1.0, 1.0, branches=[0])[0]
    assert abs(rs.abscissa - exact.real) < 1e-10
    top = max(rs.roots, key=lambda r: r.lam.imag)
    assert abs(top.lam - exact) < 1e-10


def test_all_window_roots_match_lambert_branches():
    spec = scalar_spec(-0.5, 0.3, 1.0)
    rs = spectral_abscissa(spec, window=(-6.0, 2.0, 25.0))
    exact = lambert_roots(-0.5, 0.3, 1.0, branches=range(-5, 6))
    inside = [
        z for z in exact if -6.0 <= z.real <= 2.0 and abs(z.imag) <= 25.0
    ]
    assert len(rs.roots) == len(inside)
    for z in inside:
        assert min(abs(r.lam - z) for r in rs.roots) < 1e-8


def test_real_system_roots_come_in_conjugate_pairs():
    rng = np.random.default_rng(19)
    for _ in range(3):
        spec = random_delay_spec(rng, complex_entries=False, kernels=False)
        rs = spectral_abscissa(spec, certify=False)
        lams = np.array([r.lam for r in rs.roots])
        for lam in lams:
            if abs(lam.imag) > 1e-9:
                assert min(abs(lams - np.conj(lam))) < 1e-8


def test_contour_count_matches_refined_roots():
    spec = scalar_spec(0.0, -1.0, 1.0)
    rs = spectral_abscissa(spec)
    assert rs.contour_count == len(rs.roots)
    assert np.isfinite(rs.certified_clear_right_of)
    assert window_count(spec, rs.certified_clear_right_of, 3.0, 6.0) == 0


def test_refinement_and_discretization_self_convergence():
    rng = np.random.default_rng(23)
    spec = random_delay_spec(rng, n_max=3)
    a32 = abscissa_only(spec, N=32)
    a64 = abscissa_only(spec, N=64)
    assert abs(a32 - a64) < 1e-9  # Newton refinement removes the N-dependence


def test_refine_root_residual_is_tiny():
    spec = scalar_spec(0.0, -1.0, 1.0)
    exact = lambert_roots(0.0, -1.0, 1.0, branches=[0])[0]
    lam, residual = refine_root(spec, exact + 0.05 + 0.03j)
    assert abs(lam - exact) < 1e-11
    assert residual < 1e-12


def test_multiple_root_counted_twice_by_contour():
    # at c = -1/e (Lambert branch point) lam = -1 is a double root; the
    # argument principle sees both copies while refinement lands on the point
    spec = scalar_spec(0.0, -1.0 / np.e, 1.0)
    assert window_count(spec, -1.4, -0.6, 0.7) == 2
    lam, residual = refine_root(spec, -0.9 + 0.01j)
    assert abs(lam + 1.0) < 1e-5
    assert residual < 1e-9


def test_critical_delay_scalar_quarter_period():
    tau_star, crossing = critical_delay(
        np.array([[0.0]]), np.array([[-1.0]]), (0.5, 3.0)
    )
    assert abs(tau_star - np.pi / 2) < 1e-5
    assert abs(abs(crossing.lam.imag) - 1.0) < 1e-3  # crossing at +-i


def test_critical_delay_requires_a_crossing():
    with pytest.raises(NoCrossingInRange):
        critical_delay(np.array([[-1.0]]), np.array([[0.1]]), (0.1, 2.0))


def test_undelayed_system_roots_are_eigenvalues():
    B = np.array([[-1.0, 2.0], [0.0, -3.0]])
    spec = SystemSpec.feedback(B, np.zeros((2, 2)), 1.0)
    rs = spectral_abscissa(spec, window=(-4.0, 1.0, 3.0))
    got = sorted(r.lam.real for r in rs.roots)
    assert np.allclose(got, [-3.0, -1.0], atol=1e-10)
