"""Characteristic-root oracle: pseudospectral discretization plus Newton.

Roots of det(lambda I - B - Phi_lambda) = 0 are located by taking the
eigenvalues of a spectral collocation matrix as seeds, refining each with
Newton's method on the analytic characteristic determinant, and certifying
the result with an argument-principle contour count.
"""

from dataclasses import dataclass

import numpy as np
import warnings

from scipy.integrate import IntegrationWarning, quad

from .errors import ContourThroughRoot, NoConvergence, NoCrossingInRange
from .grid import barycentric_row, barycentric_weights, cheb_diff_matrix, cheb_nodes
from .model import SystemSpec, phi_symbol, phi_symbol_deriv, spectral_norm

DEDUP_TOL = 1e-9
ROOT_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class DiscretizedGenerator:
    N: int
    nodes: np.ndarray
    A_N: np.ndarray  # (n*(N+1)) x (n*(N+1))


@dataclass(frozen=True)
class Root:
    lam: complex
    residual: float  # smallest singular value of Delta(lam)
    multiplicity: int


@dataclass(frozen=True)
class RootSet:
    roots: tuple  # of Root, sorted by (Re, Im)
    window: tuple  # (re_lo, re_hi, im_max)
    abscissa: float  # max Re over roots, -inf when empty
    certified_clear_right_of: float  # no roots with Re > this, nan if uncertified
    contour_count: int  # argument-principle count over the window, -1 if skipped

    @property
    def rightmost(self):
        if not self.roots:
            return None
        return max(self.roots, key=lambda r: r.lam.real)


def discretize_generator(spec, N=32):
    """Collocation matrix whose eigenvalues approximate the generator spectrum.

    State: history values on the N+1 CGL nodes of [-r, 0], the value at
    sigma = 0 doubling as the head u.  Interior rows apply the Chebyshev
    differentiation matrix; the row at sigma = 0 applies B plus the delay
    operator (interpolation rows for point delays, quadrature for kernels).
    """
    if N < 4:
        raise ValueError("N must be at least 4")
    n, r = spec.n, spec.r
    m = N + 1
    nodes = cheb_nodes(m, -r, 0.0)
    D = cheb_diff_matrix(m, -r, 0.0)
    bw = barycentric_weights(nodes)
    A = np.kron(D, np.eye(n)).astype(complex)
    # coupling row at sigma = 0: u' = B u + Phi(f)
    row = np.zeros((n, n * m), dtype=complex)
    row[:, (m - 1) * n :] = spec.B
    for h, Bk in spec.phi.point_terms:
        c = barycentric_row(nodes, bw, h)
        row += np.kron(c, np.asarray(Bk))
    for kt in spec.phi.kernel_terms:
        for w, s, K in zip(kt.weights, kt.nodes, kt.samples):
            c = barycentric_row(nodes, bw, s)
            row += w * np.kron(c, K)
    A[(m - 1) * n :, :] = row
    return DiscretizedGenerator(N=N, nodes=nodes, A_N=A)


def char_det_logderiv(spec, lam):
    """tr(Delta^{-1} Delta') = (d/dlambda) log det Delta(lambda)."""
    delta = lam * np.eye(spec.n) - spec.B - phi_symbol(spec.phi, lam)
    dprime = np.eye(spec.n) - phi_symbol_deriv(spec.phi, lam)
    return np.trace(np.linalg.solve(delta, dprime))


def _delta_smin(spec, lam):
    delta = lam * np.eye(spec.n) - spec.B - phi_symbol(spec.phi, lam)
    return float(np.linalg.svd(delta, compute_uv=False)[-1])


def refine_root(spec, lam0, max_iter=50):
    """Newton on det Delta(lambda) from seed lam0; returns (lambda, residual).

    Uses the trace formula f'/f = tr(Delta^{-1} Delta'), so the step is
    -1 / tr(Delta^{-1} Delta') without ever forming the determinant.
    """
    lam = complex(lam0)
    scale = max(1.0, abs(lam))
    for _ in range(max_iter):
        # a seed may already sit on a root, where the log-derivative blows up
        if _delta_smin(spec, lam) < 1e-14 * max(1.0, abs(lam)):
            return lam, _delta_smin(spec, lam)
        try:
            t = char_det_logderiv(spec, lam)
        except np.linalg.LinAlgError:
            return lam, _delta_smin(spec, lam)
        if t == 0:
            raise NoConvergence(f"zero logarithmic derivative at {lam}")
        step = -1.0 / t
        lam = lam + step
        if abs(step) < 1e-13 * max(1.0, abs(lam), scale):
            return lam, _delta_smin(spec, lam)
    raise NoConvergence(f"Newton did not converge from seed {lam0}")


def _winding_number(spec, re_lo, re_hi, im_lo, im_hi, tol=1e-6):
    """Argument-principle root count (with multiplicity) over a rectangle."""
    corners = [
        complex(re_lo, im_lo),
        complex(re_hi, im_lo),
        complex(re_hi, im_hi),
        complex(re_lo, im_hi),
    ]
    total = 0.0 + 0.0j
    err_total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            val, err = quad(
                lambda t: char_det_logderiv(spec, a + t * (b - a)) * (b - a),
                0.0,
                1.0,
                complex_func=True,
                limit=400,
                epsabs=tol,
                epsrel=tol,
            )
        total += val
        err_total += abs(err)
    count = total / (2j * np.pi)
    if abs(count - round(count.real)) > 0.01 or err_total > 0.05:
        raise ContourThroughRoot(
            f"winding number {count:.4f} not close to an integer "
            f"(quadrature error {err_total:.2e})"
        )
    return int(round(count.real))


def window_count(spec, re_lo, re_hi, im_max, retries=3):
    """Winding count over [re_lo, re_hi] x [-im_max, im_max], with retries.

    On contour trouble the rectangle is inflated slightly and retried, so a
    returned count covers at least the requested rectangle.
    """
    pad = 0.0
    scale = max(1.0, abs(re_lo), abs(re_hi), im_max)
    for attempt in range(retries + 1):
        try:
            return _winding_number(spec, re_lo - pad, re_hi + pad, -(im_max + pad), im_max + pad)
        except ContourThroughRoot:
            if attempt == retries:
                raise
            pad += 0.013 * scale * (attempt + 1)
    raise ContourThroughRoot("unreachable")


def _multiplicity(spec, lam, radius):
    """Winding count over a small circle; trapezoid is spectrally accurate."""
    m = 128
    theta = 2.0 * np.pi * np.arange(m) / m
    pts = lam + radius * np.exp(1j * theta)
    vals = np.array([char_det_logderiv(spec, p) for p in pts])
    dz = 1j * radius * np.exp(1j * theta)
    total = np.sum(vals * dz) * (2.0 * np.pi / m)
    count = total / (2j * np.pi)
    if abs(count - round(count.real)) > 0.05:
        return 1
    return max(1, int(round(count.real)))


def _collect_roots(spec, window, N):
    re_lo, re_hi, im_max = window
    disc = discretize_generator(spec, N)
    eigs = np.linalg.eigvals(disc.A_N)
    width = re_hi - re_lo
    seeds = [
        z
        for z in eigs
        if re_lo - min(1.0, 0.5 * width) <= z.real <= re_hi + 0.5 and abs(z.imag) <= im_max + 1.0
    ]
    seeds.sort(key=lambda z: (z.real, z.imag))
    found = []
    for seed in seeds:
        try:
            lam, residual = refine_root(spec, seed)
        except NoConvergence:
            continue
        if not (re_lo <= lam.real <= re_hi and abs(lam.imag) <= im_max):
            continue
        if residual > ROOT_RESIDUAL_TOL * max(1.0, abs(lam)):
            continue
        found.append((lam, residual))
    # deterministic dedup: sort by (Re, Im), merge within tolerance
    found.sort(key=lambda p: (p[0].real, p[0].imag))
    merged = []
    for lam, residual in found:
        if merged and abs(lam - merged[-1][0]) < DEDUP_TOL * max(1.0, abs(lam)):
            if residual < merged[-1][1]:
                merged[-1] = (lam, residual)
            continue
        merged.append((lam, residual))
    return merged


def spectral_abscissa(spec, window=None, N=32, certify=True):
    """All characteristic roots in a rectangular window, plus the abscissa.

    window is (re_lo, re_hi, im_max); by default the right edge is the
    a-priori bound ||B|| + ||Phi||_0 + 1 (no roots can lie further right),
    the left edge caps the search at a fixed depth and the height comes from
    |lambda| <= ||B|| + bound(Phi_lambda) valid for Re lambda >= re_lo.
    """
    normB = spectral_norm(spec.B)
    if window is None:
        # shallow window around the rightmost roots: a deep window holds far
        # more roots than the discretization resolves, breaking the count
        re_hi = normB + spec.phi.norm_bound(0.0) + 1.0
        est = abscissa_only(spec, N=N)
        if est == float("-inf"):
            est = 0.0
        re_lo = est - 0.6
        im_max = normB + spec.phi.norm_bound(re_lo) + 1.0
        window = (re_lo, re_hi, im_max)
    re_lo, re_hi, im_max = window

    merged = _collect_roots(spec, window, N)
    if certify:
        # self-convergence: the root picture must be stable from N to 2N
        merged2 = _collect_roots(spec, window, 2 * N)
        by_pos = {}
        for lam, residual in merged + merged2:
            key = (round(lam.real, 8), round(lam.imag, 8))
            if key not in by_pos or residual < by_pos[key][1]:
                by_pos[key] = (lam, residual)
        pairs = sorted(by_pos.values(), key=lambda p: (p[0].real, p[0].imag))
        merged = []
        for lam, residual in pairs:
            if merged and abs(lam - merged[-1][0]) < DEDUP_TOL * max(1.0, abs(lam)):
                continue
            merged.append((lam, residual))

    roots = []
    for lam, residual in merged:
        mult = 1
        if certify:
            radius = 1e-4 * max(1.0, abs(lam))
            mult = _multiplicity(spec, lam, radius)
        roots.append(Root(lam=lam, residual=residual, multiplicity=mult))

    abscissa = max((r.lam.real for r in roots), default=float("-inf"))
    certified = float("nan")
    count = -1
    if certify:
        count = window_count(spec, re_lo, re_hi, im_max)
        if count != sum(r.multiplicity for r in roots):
            raise ContourThroughRoot(
                f"contour count {count} disagrees with {len(roots)} refined roots; "
                "increase N or adjust the window"
            )
        # certify emptiness strictly right of the abscissa
        gap = 0.02 * max(1.0, abs(abscissa)) if roots else 0.0
        cert_from = abscissa + gap if roots else re_lo
        if cert_from < re_hi and window_count(spec, cert_from, re_hi, im_max) == 0:
            certified = cert_from
    return RootSet(
        roots=tuple(roots),
        window=window,
        abscissa=abscissa,
        certified_clear_right_of=certified,
        contour_count=count,
    )


def abscissa_only(spec, N=32):
    """Fast rightmost-root estimate: seeds + Newton, no contour work."""
    normB = spectral_norm(spec.B)
    re_hi = normB + spec.phi.norm_bound(0.0) + 1.0
    re_lo = -re_hi - 1.0
    im_max = normB + spec.phi.norm_bound(re_lo) + 1.0
    merged = _collect_roots(spec, (re_lo, re_hi, im_max), N)
    return max((lam.real for lam, _ in merged), default=float("-inf"))


def critical_delay(B, C, tau_range, tol=1e-6, N=32):
    """Delay tau* where the feedback system's abscissa crosses zero.

    Bisection on the sign of the spectral abscissa of u' = B u + C u(t-tau)
    over tau in [tau_lo, tau_hi]; requires a sign change across the range.
    """
    tau_lo, tau_hi = tau_range
    if not (0 < tau_lo < tau_hi):
        raise ValueError("need 0 < tau_lo < tau_hi")

    def absc(tau):
        return abscissa_only(SystemSpec.feedback(B, C, tau), N=N)

    a_lo, a_hi = absc(tau_lo), absc(tau_hi)
    if a_lo >= 0 or a_hi <= 0:
        raise NoCrossingInRange(
            f"abscissa({tau_lo})={a_lo:.4g}, abscissa({tau_hi})={a_hi:.4g}: "
            "no stable-to-unstable crossing in range"
        )
    while tau_hi - tau_lo > tol:
        mid = 0.5 * (tau_lo + tau_hi)
        if absc(mid) < 0:
            tau_lo = mid
        else:
            tau_hi = mid
    tau_star = 0.5 * (tau_lo + tau_hi)
    crossing = spectral_abscissa(SystemSpec.feedback(B, C, tau_star), certify=False)
    return tau_star, crossing.rightmost
