"""Chebyshev-Gauss-Lobatto grids, differentiation, quadrature and interpolation.

All grids live on an interval [a, b] (usually [-r, 0]) and store nodes in
increasing order, so nodes[0] = a and nodes[-1] = b exactly.
"""

import numpy as np

__all__ = [
    "cheb_nodes",
    "cheb_diff_matrix",
    "clenshaw_curtis_weights",
    "barycentric_weights",
    "barycentric_row",
    "barycentric_eval",
]


def cheb_nodes(num_nodes, a, b):
    """Chebyshev-Gauss-Lobatto points mapped to [a, b], increasing.

    num_nodes is the total node count (degree + 1), at least 2.
    """
    if num_nodes < 2:
        raise ValueError("need at least 2 nodes")
    N = num_nodes - 1
    x = np.cos(np.pi * np.arange(N, -1, -1) / N)  # -1 .. 1 increasing
    s = a + (b - a) * (x + 1.0) / 2.0
    s[0], s[-1] = a, b  # exact endpoints
    return s


def cheb_diff_matrix(num_nodes, a, b):
    """First-derivative collocation matrix on the CGL grid of [a, b].

    Trefethen's formula on [-1, 1], scaled by 2/(b-a) and reordered for
    increasing nodes.
    """
    N = num_nodes - 1
    if N == 0:
        return np.zeros((1, 1))
    x = np.cos(np.pi * np.arange(N, -1, -1) / N)
    c = np.ones(num_nodes)
    c[0] = c[-1] = 2.0
    c = c * (-1.0) ** np.arange(N, -1, -1)
    X = np.tile(x, (num_nodes, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(num_nodes))
    D = D - np.diag(D.sum(axis=1))
    return D * (2.0 / (b - a))


def clenshaw_curtis_weights(num_nodes, a, b):
    """Clenshaw-Curtis quadrature weights for the CGL grid of [a, b].

    Exact for polynomials of degree num_nodes - 1; weights are positive.
    """
    N = num_nodes - 1
    if N == 0:
        return np.array([b - a])
    if N == 1:
        return np.array([0.5, 0.5]) * (b - a)
    # weights on [-1, 1] for nodes cos(j*pi/N), j = 0..N (decreasing order)
    w = np.zeros(num_nodes)
    v = np.ones(N - 1)
    for k in range(1, N // 2 + 1):
        factor = 2.0 if 2 * k < N else 1.0
        jj = np.arange(1, N)
        v -= factor * np.cos(2.0 * k * np.pi * jj / N) / (4.0 * k * k - 1.0)
    w[1:-1] = 2.0 * v / N
    w[0] = w[-1] = 1.0 / (N * N - 1 + (N % 2))
    # reverse for increasing nodes (weights are symmetric anyway)
    return w[::-1] * (b - a) / 2.0


def barycentric_weights(nodes):
    """Barycentric interpolation weights for arbitrary distinct nodes."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    # scale differences to avoid under/overflow for many nodes
    scale = 4.0 / (nodes[-1] - nodes[0])
    w = np.ones(n)
    for j in range(n):
        diff = (nodes[j] - nodes) * scale
        diff[j] = 1.0
        w[j] = 1.0 / np.prod(diff)
    return w


def barycentric_row(nodes, weights, t):
    """Row vector c with interp(f, t) = c @ f_values for grid data f_values."""
    nodes = np.asarray(nodes, dtype=float)
    d = t - nodes
    hit = np.nonzero(np.abs(d) < 1e-14 * max(1.0, abs(t)))[0]
    row = np.zeros(len(nodes))
    if hit.size:
        row[hit[0]] = 1.0
        return row
    q = weights / d
    return q / q.sum()


def barycentric_eval(nodes, weights, values, t):
    """Evaluate the polynomial interpolant of grid data at point t.

    values may be shape (m,) or (m, k); returns scalar or length-k vector.
    """
    row = barycentric_row(nodes, weights, t)
    return row @ np.asarray(values)
