import numpy as np

from delaymargin.charroots import discretize_generator
from delaymargin.grid import cheb_diff_matrix
from delaymargin.model import HistoryGrid, SystemSpec, phi_apply
from delaymargin.resolvent import (
    canonical_history_nodes,
    char_matrix,
    in_resolvent_set,
    resolvent_A0,
    resolvent_blocks,
)

from conftest import random_delay_spec


def test_char_matrix_scalar_closed_form():
    spec = SystemSpec.feedback(np.array([[-1.0]]), np.array([[0.5]]), 1.0)
    cm = char_matrix(spec, 2.0 + 0.0j)
    # Delta(2) = 2 + 1 - 0.5 e^{-2}
    assert abs(cm.delta[0, 0] - (3.0 - 0.5 * np.exp(-2.0))) < 1e-14
    ok, margin = in_resolvent_set(spec, 2.0 + 0.0j)
    assert ok and margin > 1.0


def test_shift_resolvent_solves_the_ode_with_zero_boundary():
    # g = R(lam, A0) f solves lam g - g' = f with g(0) = 0
    lam = 0.7 + 1.3j
    nodes = canonical_history_nodes(1.0)
    f = np.stack([np.array([np.cos(3 * s) + 1j * s]) for s in nodes])
    g = resolvent_A0(lam, HistoryGrid(nodes=nodes, values=f, r=1.0))
    D = cheb_diff_matrix(len(nodes), -1.0, 0.0)
    residual = lam * g.values[:, 0] - D @ g.values[:, 0] - f[:, 0]
    assert abs(g.values[-1, 0]) < 1e-12  # boundary value at sigma = 0
    assert np.max(np.abs(residual[:-1])) < 1e-7


def test_block_resolvent_inverts_the_generator():
    """(lam - A)(x, f) recovered from the resolvent blocks, on random data."""
    rng = np.random.default_rng(5)
    for _ in range(5):
        spec = random_delay_spec(rng, n_max=3)
        lam = complex(rng.uniform(0.5, 1.5), rng.uniform(-2, 2))
        blocks = resolvent_blocks(spec, lam)
        nodes = canonical_history_nodes(spec.r)
        x = rng.standard_normal(spec.n) + 1j * rng.standard_normal(spec.n)
        fvals = np.stack(
            [np.cos(2 * s) * x + 1j * np.sin(s) * x[::-1] for s in nodes]
        )
        f = HistoryGrid(nodes=nodes, values=fvals, r=spec.r)
        y, h = blocks.apply(x, f)
        # first row: lam y - B y - Phi h = x
        row1 = lam * y - spec.B @ y - phi_apply(spec.phi, h)
        assert np.linalg.norm(row1 - x) < 1e-6 * max(1.0, np.linalg.norm(x))
        # second row: lam h - h' = f, h(0) = y
        D = cheb_diff_matrix(len(nodes), -spec.r, 0.0)
        row2 = lam * h.values - D @ h.values - fvals
        assert np.max(np.abs(row2[:-1])) < 1e-6
        assert np.linalg.norm(h.values[-1] - y) < 1e-9


def test_resolvent_against_discretized_generator():
    """R11 x agrees with the matrix resolvent of the collocation generator."""
    rng = np.random.default_rng(9)
    for _ in range(4):
        spec = random_delay_spec(rng, n_max=3)
        lam = complex(rng.uniform(0.8, 1.6), rng.uniform(-1, 1))
        blocks = resolvent_blocks(spec, lam)
        disc = discretize_generator(spec, N=48)
        dim = disc.A_N.shape[0]
        n = spec.n
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        rhs = np.zeros(dim, dtype=complex)
        rhs[-n:] = x  # head component sits in the last block row
        sol = np.linalg.solve(lam * np.eye(dim) - disc.A_N, rhs)
        assert np.linalg.norm(sol[-n:] - blocks.R11 @ x) < 1e-6


def test_singularity_margin_shrinks_near_a_root():
    spec = SystemSpec.feedback(np.array([[0.0]]), np.array([[-1.0]]), 1.0)
    # rightmost root of lam = -e^{-lam}: lam = W(-1) via Lambert W
    from scipy.special import lambertw

    root = lambertw(-1.0, 0)
    ok_far, margin_far = in_resolvent_set(spec, root + 0.5)
    ok_at, margin_at = in_resolvent_set(spec, complex(root))
    assert ok_far and margin_far > 1e-3
    assert not ok_at
    assert margin_at < 1e-12
