import numpy as np
import pytest

from delaymargin.errors import DimensionMismatch
from delaymargin.model import (
    DelayOperatorSpec,
    HistoryGrid,
    KernelTerm,
    SystemSpec,
    eval_epsilon_lambda,
    phi_apply,
    phi_symbol,
    phi_symbol_deriv,
)

from conftest import random_delay_spec


def test_point_delay_application_is_exact():
    phi = DelayOperatorSpec.point(1.0, [(-1.0, np.array([[1.0]]))])
    f = HistoryGrid.from_function(lambda s: np.array([np.exp(s)]), 1.0)
    assert abs(phi_apply(phi, f)[0] - np.exp(-1.0)) < 1e-14


def test_kernel_application_against_closed_form():
    # Phi(f) = int_{-1}^0 e^s f(s) ds with f(s) = e^{2s}: exact (1 - e^{-3})/3
    kt = KernelTerm.from_callable(lambda s: np.array([[np.exp(s)]]), -1.0, 0.0, 1)
    phi = DelayOperatorSpec(r=1.0, point_terms=(), kernel_terms=(kt,))
    f = HistoryGrid.from_function(lambda s: np.array([np.exp(2 * s)]), 1.0)
    exact = (1.0 - np.exp(-3.0)) / 3.0
    assert abs(phi_apply(phi, f)[0] - exact) < 1e-12


def test_symbol_matches_applying_phi_to_exponential_history():
    rng = np.random.default_rng(7)
    for _ in range(10):
        spec = random_delay_spec(rng)
        lam = complex(rng.uniform(-1, 1), rng.uniform(-3, 3))
        x = rng.standard_normal(spec.n) + 1j * rng.standard_normal(spec.n)
        f = HistoryGrid.from_function(lambda s: np.exp(lam * s) * x, spec.r)
        direct = phi_apply(spec.phi, f)
        via_symbol = phi_symbol(spec.phi, lam) @ x
        assert np.linalg.norm(direct - via_symbol) < 1e-8 * max(1, np.linalg.norm(via_symbol))


def test_symbol_derivative_matches_finite_differences():
    rng = np.random.default_rng(11)
    spec = random_delay_spec(rng)
    lam = 0.3 + 1.1j
    h = 1e-6
    fd = (phi_symbol(spec.phi, lam + h) - phi_symbol(spec.phi, lam - h)) / (2 * h)
    assert np.linalg.norm(phi_symbol_deriv(spec.phi, lam) - fd) < 1e-6


def test_norm_bound_dominates_symbol_norm_on_the_line():
    rng = np.random.default_rng(13)
    for _ in range(10):
        spec = random_delay_spec(rng)
        for alpha in (-0.3, 0.0):
            bound = spec.phi.norm_bound(alpha)
            for w in np.linspace(-5, 5, 21):
                norm = np.linalg.norm(phi_symbol(spec.phi, alpha + 1j * w), 2)
                assert norm <= bound + 1e-10


def test_lipschitz_coeff_bounds_symbol_variation():
    rng = np.random.default_rng(17)
    spec = random_delay_spec(rng)
    beta = 0.5
    L = spec.phi.lipschitz_coeff(beta)
    lam1, lam2 = 0.2 + 1.0j, -0.1 + 0.7j  # both within |Re| <= beta
    diff = np.linalg.norm(phi_symbol(spec.phi, lam1) - phi_symbol(spec.phi, lam2), 2)
    assert diff <= L * abs(lam1 - lam2) + 1e-10


def test_feedback_constructor_gives_single_point_delay():
    B = np.array([[0.0]])
    C = np.array([[-1.0]])
    spec = SystemSpec.feedback(B, C, 0.5)
    assert spec.is_feedback
    assert spec.r == 0.5
    sym = phi_symbol(spec.phi, 2.0 + 0.0j)
    assert abs(sym[0, 0] - (-1.0) * np.exp(-1.0)) < 1e-14


def test_exponential_history_matches_eval():
    x = np.array([1.0, -2.0])
    lam = -0.4 + 2.0j
    nodes = np.linspace(-1, 0, 33)
    hist = eval_epsilon_lambda(lam, x, nodes)
    assert np.allclose(hist.values, np.exp(lam * nodes)[:, None] * x)


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionMismatch):
        SystemSpec(
            n=2,
            B=np.zeros((2, 2)),
            phi=DelayOperatorSpec.point(1.0, [(-1.0, np.zeros((3, 3)))]),
        )
