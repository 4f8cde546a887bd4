import numpy as np
import pytest

from delaymargin.charroots import abscissa_only, refine_root
from delaymargin.errors import (
    BCNotStable,
    HypothesisViolated,
    MuEqualsMinusD,
    NotCommuting,
)
from delaymargin.model import SystemSpec, phi_symbol
from delaymargin.smalldelay import (
    I1_I2_norms,
    compact_commuting_margin,
    destabilizing_sequence,
    robustness_margin,
    scalar_exact_boundary,
    shifted_unstable_root,
    transformed_system,
)

from conftest import random_feedback_pair


def test_destabilizing_sequence_places_roots_on_the_axis():
    seq = destabilizing_sequence([10.0, 100.0, 1000.0], d=-1.0)
    for mu, tau, lam, residual in seq.entries:
        assert residual < 1e-10
        assert lam == 1j * (mu - 1.0)
        assert tau > 0
    # the destabilizing delays shrink: no uniform margin exists
    taus = [e[1] for e in seq.entries]
    assert taus[0] > taus[1] > taus[2]


def test_destabilizing_sequence_rejects_bad_parameters():
    with pytest.raises(HypothesisViolated):
        destabilizing_sequence([10.0], d=0.5)
    with pytest.raises(MuEqualsMinusD):
        destabilizing_sequence([1.0], d=-1.0)


def test_shifted_root_solves_defining_equation():
    for rho, mu in [(-0.5, 1.0), (0.0, 2.0), (-1.0, 1.5)]:
        for tau in (0.01, 0.1, 0.5):
            eps = shifted_unstable_root(rho, mu, tau)
            assert eps > 0
            assert abs(mu * np.exp(-eps * tau) + rho - eps) < 1e-10


def test_shifted_root_is_a_characteristic_root():
    # u' = rho u + mu u(t - tau): real root at eps by construction
    rho, mu, tau = -0.5, 1.0, 0.3
    eps = shifted_unstable_root(rho, mu, tau)
    spec = SystemSpec.feedback(np.array([[rho]]), np.array([[mu]]), tau)
    lam, residual = refine_root(spec, complex(eps))
    assert abs(lam.real - eps) < 1e-10
    assert abs(lam.imag) < 1e-10
    assert residual < 1e-10


def test_transformed_system_shares_the_direct_roots():
    rng = np.random.default_rng(61)
    for _ in range(5):
        B, C = random_feedback_pair(rng)
        tau = float(rng.uniform(0.05, 0.4))
        direct = SystemSpec.feedback(B, C, tau)
        trans = transformed_system(B, C, tau)
        assert np.allclose(trans.B, B + C)
        lam0 = abscissa_only(direct)
        # refine the direct rightmost root on the transformed system
        from delaymargin.charroots import spectral_abscissa

        rs = spectral_abscissa(direct, certify=False)
        top = rs.rightmost.lam
        lam_t, residual = refine_root(trans, top)
        assert abs(lam_t - top) < 1e-8
        assert residual < 1e-8
        assert lam0 == rs.abscissa


def test_transformed_symbol_identity_at_characteristic_roots():
    # lam I - B - C e^{-lam tau} and lam I - (B+C) - Phi_lam vanish together
    B = np.array([[0.0]])
    C = np.array([[-1.0]])
    tau = 1.0
    direct = SystemSpec.feedback(B, C, tau)
    trans = transformed_system(B, C, tau)
    from delaymargin.charroots import spectral_abscissa

    for root in spectral_abscissa(direct, certify=False).roots:
        lam = root.lam
        delta_t = lam * np.eye(1) - trans.B - phi_symbol(trans.phi, lam)
        assert abs(delta_t[0, 0]) < 1e-8


def test_I2_bound_is_linear_in_tau():
    rng = np.random.default_rng(67)
    B, C = random_feedback_pair(rng)
    normC = np.linalg.norm(C, 2)
    from delaymargin.smalldelay import _resolvent_bc, _sup_exp_norm

    K = _sup_exp_norm(B)
    for omega in (0.0, 0.7, 3.1):
        R_norm = np.linalg.norm(_resolvent_bc(B, C, omega), 2)
        for tau in (0.1, 0.5, 1.0):
            _, i2 = I1_I2_norms(B, C, tau, omega)
            assert i2 <= tau * normC**2 * K * R_norm + 1e-10


def test_margin_scalar_benchmark():
    margin = robustness_margin(np.array([[0.0]]), np.array([[-1.0]]))
    assert margin.kappa == pytest.approx(0.5)
    assert margin.kappa <= 0.5
    assert margin.K == 1.0
    assert margin.M_BC == pytest.approx(1.0)
    # conservatism against the exact boundary
    assert scalar_exact_boundary(-1.0) == pytest.approx(np.pi / 2)
    assert scalar_exact_boundary(-1.0) / margin.kappa >= np.pi


def test_margin_is_sound_for_random_pairs():
    rng = np.random.default_rng(71)
    for _ in range(5):
        B, C = random_feedback_pair(rng)
        margin = robustness_margin(B, C)
        assert 0 < margin.kappa <= 1.0
        for frac in (0.25, 0.5, 0.9):
            tau = frac * margin.kappa
            assert abscissa_only(SystemSpec.feedback(B, C, tau)) < 0


def test_zero_feedback_margin_is_unconditional():
    B = np.array([[-1.0, 0.3], [0.0, -2.0]])
    margin = robustness_margin(B, np.zeros((2, 2)))
    assert margin.unconditional
    assert margin.kappa == float("inf")


def test_margin_requires_stable_closed_loop():
    with pytest.raises(BCNotStable):
        robustness_margin(np.array([[0.0]]), np.array([[1.0]]))


def test_commuting_margin_requires_commutation():
    B = np.array([[-1.0, 1.0], [0.0, -2.0]])
    C = np.array([[0.0, 0.0], [0.3, 0.0]])
    with pytest.raises(NotCommuting):
        compact_commuting_margin(B, C)


def test_commuting_margin_at_least_as_large():
    # diagonal pair commutes; the commuted I1 form cannot be worse
    B = np.diag([-1.0, -2.0])
    C = np.diag([-0.3, -0.1])
    plain = robustness_margin(B, C)
    commuted = compact_commuting_margin(B, C)
    assert commuted.kappa >= plain.kappa - 1e-9


def test_example_batch_margins_decrease_with_frequency():
    kappas = []
    for mu in (10.0, 100.0, 1000.0):
        B = np.array([[1j * mu]])
        C = np.array([[-1.0 - 1j * mu]])  # B + C = -1: stable closed loop
        kappas.append(robustness_margin(B, C).kappa)
    assert kappas[0] > kappas[1] > kappas[2]
