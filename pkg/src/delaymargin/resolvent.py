"""Characteristic matrix, resolvent-set membership and block resolvent.

For the generator combining B, the delay operator and the shift d/dsigma,
lambda lies in the resolvent set exactly when the characteristic matrix

    Delta(lambda) = lambda I - B - Phi_lambda

is invertible, and the resolvent splits into four blocks built from
Delta(lambda)^{-1}, the exponential history e^{lambda s} and the resolvent
of the nilpotent left shift A_0.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SingularCharacteristicMatrix
from .grid import cheb_diff_matrix, cheb_nodes
from .model import (
    DEFAULT_NODES,
    HistoryGrid,
    eval_epsilon_lambda,
    phi_apply,
    phi_symbol,
)

# Delta(lambda) counts as singular below this relative smallest singular value.
SINGULARITY_RTOL = 1e-10


@dataclass(frozen=True)
class CharMatrix:
    lam: complex
    delta: np.ndarray
    smin: float  # smallest singular value of delta
    norm: float  # largest singular value of delta

    @property
    def is_singular(self):
        # scale by |lambda| as well: near a root of a 1x1 system the whole
        # matrix is tiny and smin/norm carries no information
        scale = max(self.norm, abs(self.lam), 1.0)
        return self.smin < SINGULARITY_RTOL * scale


def char_matrix(spec, lam):
    """Delta(lambda) = lambda I - B - Phi_lambda with a condition estimate."""
    delta = lam * np.eye(spec.n) - spec.B - phi_symbol(spec.phi, lam)
    sv = np.linalg.svd(delta, compute_uv=False)
    return CharMatrix(lam=complex(lam), delta=delta, smin=float(sv[-1]), norm=float(sv[0]))


def in_resolvent_set(spec, lam):
    """(membership, margin): margin is the smallest singular value of Delta."""
    cm = char_matrix(spec, lam)
    if cm.is_singular:
        return False, 0.0
    return True, cm.smin


def resolvent_A0(lam, f, _cache={}):
    """Resolvent of the nilpotent left shift applied to a history segment.

    Solves lambda g - g' = f with g(0) = 0 by spectral collocation, which is
    the closed form g(s) = int_s^0 e^{lambda (s-u)} f(u) du.  Defined for
    every lambda since A_0 has empty spectrum.
    """
    m = len(f.nodes)
    key = (m, f.r)
    D = _cache.get(key)
    if D is None:
        D = cheb_diff_matrix(m, -f.r, 0.0)
        if len(_cache) > 64:
            _cache.clear()
        _cache[key] = D
    M = lam * np.eye(m) - D
    rhs = np.array(f.values, dtype=complex)
    # boundary condition g(0) = 0 replaces the collocation row at s = 0
    M[-1, :] = 0.0
    M[-1, -1] = 1.0
    rhs[-1, :] = 0.0
    g = np.linalg.solve(M, rhs)
    g[-1, :] = 0.0
    return HistoryGrid(nodes=f.nodes, values=g, r=f.r, bary=f.bary)


@dataclass(frozen=True)
class ResolventBlocks:
    """Block resolvent at lambda, acting on pairs (x, f).

    R11 is the n x n matrix inverse of Delta(lambda); the remaining blocks
    are exposed as actions on vectors/histories rather than materialized.
    """

    lam: complex
    R11: np.ndarray
    spec: object
    smin: float

    def apply_r12(self, f):
        """R(lambda, B+Phi_lambda) Phi R(lambda, A_0) f -> C^n."""
        g = resolvent_A0(self.lam, f)
        return self.R11 @ phi_apply(self.spec.phi, g)

    def apply_r21(self, x, nodes):
        """epsilon_lambda tensor R(lambda, B+Phi_lambda) x -> history."""
        return eval_epsilon_lambda(self.lam, self.R11 @ np.asarray(x, dtype=complex), nodes)

    def apply_r22(self, f):
        """[epsilon_lambda tensor R11 Phi + Id] R(lambda, A_0) f -> history."""
        g = resolvent_A0(self.lam, f)
        lift = eval_epsilon_lambda(self.lam, self.R11 @ phi_apply(self.spec.phi, g), g.nodes)
        return HistoryGrid(nodes=g.nodes, values=lift.values + g.values, r=g.r, bary=g.bary)

    def apply(self, x, f):
        """Full resolvent action on (x, f); returns (y, h) with h(0) = y."""
        x = np.asarray(x, dtype=complex)
        y = self.R11 @ x + self.apply_r12(f)
        lift = self.apply_r21(x, f.nodes)
        h = self.apply_r22(f)
        return y, HistoryGrid(nodes=f.nodes, values=lift.values + h.values, r=f.r, bary=f.bary)


def resolvent_blocks(spec, lam):
    """Assemble the block resolvent; lambda must not be a characteristic root."""
    cm = char_matrix(spec, lam)
    if cm.is_singular:
        raise SingularCharacteristicMatrix(
            f"Delta({lam}) is numerically singular (smin={cm.smin:.3e})"
        )
    R11 = np.linalg.inv(cm.delta)
    return ResolventBlocks(lam=complex(lam), R11=R11, spec=spec, smin=cm.smin)


def canonical_history_nodes(r, num_nodes=DEFAULT_NODES):
    """The module's canonical CGL grid on [-r, 0]."""
    return cheb_nodes(num_nodes, -r, 0.0)
