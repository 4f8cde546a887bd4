"""Problem-instance data model: delay operators, system specs and histories.

A system is u'(t) = B u(t) + Phi u_t with Phi a finite sum of point delays
plus an optional integrable kernel,

    Phi(f) = sum_k B_k f(h_k) + integral K(s) f(s) ds,

all delays inside [-r, 0].  The delay symbol Phi_lambda applies Phi to the
exponential history e^{lambda s} x.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SpecFormatError
from .grid import (
    barycentric_eval,
    barycentric_weights,
    cheb_nodes,
    clenshaw_curtis_weights,
)

DEFAULT_NODES = 33  # CGL node count (degree 32) of the canonical grid


def as_complex_matrix(entries, n=None):
    """Validate and return a square complex matrix as an ndarray."""
    M = np.asarray(entries, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if n is not None and M.shape[0] != n:
        raise DimensionMismatch(f"expected {n}x{n}, got {M.shape[0]}x{M.shape[0]}")
    if not np.all(np.isfinite(M.view(float))):
        raise SpecFormatError("matrix entries must be finite")
    return M


def spectral_norm(M):
    return float(np.linalg.norm(M, 2))


@dataclass(frozen=True)
class KernelTerm:
    """Matrix-valued kernel K on a support interval [a, b] within [-r, 0].

    Samples live on the CGL grid of [a, b]; integrals use Clenshaw-Curtis
    weights on that grid, so smooth kernels integrate with spectral accuracy.
    """

    a: float
    b: float
    nodes: np.ndarray
    samples: np.ndarray  # (m, n, n)
    weights: np.ndarray = field(repr=False, default=None)
    bary: np.ndarray = field(repr=False, default=None)

    @classmethod
    def from_samples(cls, a, b, samples):
        samples = np.asarray(samples, dtype=complex)
        if samples.ndim != 3 or samples.shape[1] != samples.shape[2]:
            raise DimensionMismatch("kernel samples must be (m, n, n)")
        m = samples.shape[0]
        nodes = cheb_nodes(m, a, b)
        return cls(
            a=float(a),
            b=float(b),
            nodes=nodes,
            samples=samples,
            weights=clenshaw_curtis_weights(m, a, b),
            bary=barycentric_weights(nodes),
        )

    @classmethod
    def from_callable(cls, func, a, b, n, m=33):
        nodes = cheb_nodes(m, a, b)
        samples = np.stack([as_complex_matrix(func(s), n) for s in nodes])
        return cls.from_samples(a, b, samples)

    @property
    def n(self):
        return self.samples.shape[1]


@dataclass(frozen=True)
class DelayOperatorSpec:
    """Finite sum of point delays plus kernel terms on [-r, 0]."""

    r: float
    point_terms: tuple  # of (h, matrix) with h in [-r, 0]
    kernel_terms: tuple = ()

    def __post_init__(self):
        if self.r <= 0:
            raise SpecFormatError("max delay r must be positive")
        n = self.n
        for h, B in self.point_terms:
            if not (-self.r - 1e-12 <= h <= 1e-12):
                raise SpecFormatError(f"point delay {h} outside [-r, 0]")
            as_complex_matrix(B, n)
        for kt in self.kernel_terms:
            if kt.n != n:
                raise DimensionMismatch("kernel dimension mismatch")
            if kt.a < -self.r - 1e-12 or kt.b > 1e-12:
                raise SpecFormatError("kernel support outside [-r, 0]")

    @classmethod
    def point(cls, r, terms):
        return cls(r=float(r), point_terms=tuple((float(h), as_complex_matrix(B)) for h, B in terms))

    @classmethod
    def zero(cls, r, n):
        op = cls.__new__(cls)
        object.__setattr__(op, "r", float(r))
        object.__setattr__(op, "point_terms", ((0.0, np.zeros((n, n), dtype=complex)),))
        object.__setattr__(op, "kernel_terms", ())
        return op

    @property
    def n(self):
        if self.point_terms:
            return np.asarray(self.point_terms[0][1]).shape[0]
        return self.kernel_terms[0].n

    @property
    def is_zero(self):
        return all(not np.any(B) for _, B in self.point_terms) and not self.kernel_terms

    def norm_bound(self, alpha):
        """Upper bound on ||Phi_{alpha+i w}|| valid for every real w."""
        total = sum(np.exp(alpha * h) * spectral_norm(B) for h, B in self.point_terms)
        for kt in self.kernel_terms:
            norms = np.array([spectral_norm(K) for K in kt.samples])
            total += float(kt.weights @ (np.exp(alpha * kt.nodes) * norms))
        return float(total)

    def lipschitz_coeff(self, beta):
        """L with ||Phi_lam - Phi_{i Im lam}|| <= L |Re lam| for |Re lam| <= beta."""
        total = sum(abs(h) * np.exp(beta * abs(h)) * spectral_norm(B) for h, B in self.point_terms)
        for kt in self.kernel_terms:
            norms = np.array([spectral_norm(K) for K in kt.samples])
            total += float(kt.weights @ (np.abs(kt.nodes) * np.exp(beta * np.abs(kt.nodes)) * norms))
        return float(total)


@dataclass(frozen=True)
class HistoryGrid:
    """History segment f: [-r, 0] -> C^n sampled on a CGL grid."""

    nodes: np.ndarray
    values: np.ndarray  # (m, n)
    r: float
    bary: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise SpecFormatError("history grid needs at least 2 nodes")
        if len(self.nodes) != len(self.values):
            raise DimensionMismatch("node/value count mismatch")
        if self.nodes[0] != -self.r or self.nodes[-1] != 0.0:
            raise SpecFormatError("history nodes must span [-r, 0] exactly")
        if self.bary is None:
            object.__setattr__(self, "bary", barycentric_weights(self.nodes))

    @classmethod
    def from_function(cls, func, r, num_nodes=DEFAULT_NODES):
        nodes = cheb_nodes(num_nodes, -r, 0.0)
        values = np.stack([np.atleast_1d(np.asarray(func(s), dtype=complex)) for s in nodes])
        return cls(nodes=nodes, values=values, r=float(r))

    @classmethod
    def constant(cls, x, r, num_nodes=DEFAULT_NODES):
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        nodes = cheb_nodes(num_nodes, -r, 0.0)
        return cls(nodes=nodes, values=np.tile(x, (num_nodes, 1)), r=float(r))

    @property
    def n(self):
        return self.values.shape[1]

    def eval(self, t):
        """Barycentric evaluation of the interpolant at t in [-r, 0]."""
        return barycentric_eval(self.nodes, self.bary, self.values, t)


@dataclass(frozen=True)
class SystemSpec:
    """Full problem instance: u' = B u + Phi u_t, optionally feedback form."""

    n: int
    B: np.ndarray
    phi: DelayOperatorSpec
    C: np.ndarray = None
    tau: float = None

    def __post_init__(self):
        as_complex_matrix(self.B, self.n)
        if self.phi.n != self.n:
            raise DimensionMismatch("delay operator dimension mismatch")
        if (self.C is None) != (self.tau is None):
            raise SpecFormatError("feedback mode needs both C and tau")
        if self.C is not None:
            as_complex_matrix(self.C, self.n)
            if self.tau <= 0:
                raise SpecFormatError("feedback delay tau must be positive")

    @classmethod
    def general(cls, B, phi):
        B = as_complex_matrix(B)
        return cls(n=B.shape[0], B=B, phi=phi)

    @classmethod
    def feedback(cls, B, C, tau):
        """u'(t) = B u(t) + C u(t - tau); Phi = C delta_{-tau} is derived."""
        B = as_complex_matrix(B)
        C = as_complex_matrix(C, B.shape[0])
        phi = DelayOperatorSpec.point(tau, [(-float(tau), C)])
        return cls(n=B.shape[0], B=B, phi=phi, C=C, tau=float(tau))

    @property
    def is_feedback(self):
        return self.C is not None

    @property
    def r(self):
        return self.phi.r


def phi_apply(phi, f):
    """Apply the delay operator to a history segment, Phi(f) in C^n.

    Point terms use barycentric interpolation of f; kernel terms use
    Clenshaw-Curtis quadrature on the kernel's own support grid.
    """
    if f.n != phi.n:
        raise DimensionMismatch("history dimension mismatch")
    if abs(f.r - phi.r) > 1e-12 * max(1.0, phi.r):
        raise DimensionMismatch("history horizon differs from operator horizon")
    out = np.zeros(phi.n, dtype=complex)
    for h, B in phi.point_terms:
        out += np.asarray(B) @ f.eval(h)
    for kt in phi.kernel_terms:
        fk = np.stack([f.eval(s) for s in kt.nodes])  # (m, n)
        out += np.einsum("j,jab,jb->a", kt.weights, kt.samples, fk)
    return out


def phi_symbol(phi, lam):
    """Delay symbol Phi_lambda = sum_k e^{lam h_k} B_k + int e^{lam s} K(s) ds."""
    n = phi.n
    out = np.zeros((n, n), dtype=complex)
    for h, B in phi.point_terms:
        out += np.exp(lam * h) * np.asarray(B)
    for kt in phi.kernel_terms:
        e = kt.weights * np.exp(lam * kt.nodes)
        out += np.einsum("j,jab->ab", e, kt.samples)
    return out


def phi_symbol_deriv(phi, lam):
    """d/dlambda of the delay symbol (entire function)."""
    n = phi.n
    out = np.zeros((n, n), dtype=complex)
    for h, B in phi.point_terms:
        out += h * np.exp(lam * h) * np.asarray(B)
    for kt in phi.kernel_terms:
        e = kt.weights * kt.nodes * np.exp(lam * kt.nodes)
        out += np.einsum("j,jab->ab", e, kt.samples)
    return out


def eval_epsilon_lambda(lam, x, nodes):
    """HistoryGrid of the exponential history e^{lam s} x on the given nodes."""
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    nodes = np.asarray(nodes, dtype=float)
    values = np.exp(lam * nodes)[:, None] * x[None, :]
    return HistoryGrid(nodes=nodes, values=values, r=-float(nodes[0]))
