"""Small-delay machinery for feedback systems u' = B u + C u(t - tau).

Contains the destabilizing-sequence construction (spectrum unbounded along
an imaginary line kills uniform margins), the exact rewriting of the
feedback system as u' = (B+C) u + Phi u_t with a transformed delay operator,
the I1/I2 frequency-domain norms, and a certified robustness margin kappa:
for every tau in (0, kappa) the delayed system stays stable (or hyperbolic).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .criteria import _build_omega_grid, line_sup_resolvent
from .errors import (
    BCNotHyperbolic,
    BCNotStable,
    HypothesisViolated,
    MuEqualsMinusD,
    NotCommuting,
    ResonantOmega,
)
from .model import DelayOperatorSpec, KernelTerm, SystemSpec, spectral_norm

KAPPA1_CAP = 1.0  # S(t) constants are certified on t in [0, 1]
HALF = 0.5


@dataclass(frozen=True)
class DestabilizingSequence:
    d: float
    entries: tuple  # of (mu, tau, lam, residual)


@dataclass(frozen=True)
class RobustnessMargin:
    kappa1: float
    kappa2: float
    kappa: float
    K: float  # sup_{0<=t<=1} ||S(t)||
    M_BC: float  # sup_w ||R(iw, B+C)||
    L: float  # high-frequency cutoff
    mode: str  # "stable" | "hyperbolic"
    unconditional: bool = False  # C = 0: any delay is safe
    certificate: dict = field(default_factory=dict)

    def to_dict(self):
        cert = {}
        for k, v in self.certificate.items():
            cert[k] = v.tolist() if isinstance(v, np.ndarray) else v
        return {
            "kappa1": self.kappa1,
            "kappa2": self.kappa2,
            "kappa": self.kappa,
            "K": self.K,
            "M_BC": self.M_BC,
            "L": self.L,
            "mode": self.mode,
            "unconditional": self.unconditional,
            "certificate": cert,
        }


def destabilizing_sequence(mu_list, d):
    """Delays tau_k sending stability to the axis despite omega_0(B+C) = d < 0.

    B = i*diag(mu), C = d*I: for each frequency mu the delay
    tau = 3pi/(2(mu+d)) (mu+d > 0) or -pi/(2(mu+d)) (mu+d < 0) places a
    characteristic root exactly at i(mu+d).
    """
    if d >= 0:
        raise HypothesisViolated("d must be negative")
    entries = []
    for mu in mu_list:
        s = mu + d
        if s == 0:
            raise MuEqualsMinusD(f"mu = {mu} equals -d")
        tau = 3.0 * np.pi / (2.0 * s) if s > 0 else -np.pi / (2.0 * s)
        lam = 1j * s
        residual = abs(lam - 1j * mu - d * np.exp(-lam * tau))
        entries.append((float(mu), float(tau), lam, float(residual)))
    return DestabilizingSequence(d=float(d), entries=tuple(entries))


def shifted_unstable_root(rho, mu, tau, tol=1e-12):
    """Unique positive solution of eps = mu e^{-eps tau} + rho by bisection.

    Needs mu > 0, mu > -rho, tau > 0; then f(eps) = mu e^{-eps tau} + rho - eps
    is strictly decreasing with f(0) > 0.
    """
    if not (mu > 0 and mu > -rho and tau > 0):
        raise HypothesisViolated("need mu > 0, mu > -rho, tau > 0")
    lo, hi = 0.0, mu + max(rho, 0.0) + 1.0

    def f(eps):
        return mu * np.exp(-eps * tau) + rho - eps

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def transformed_phi(B, C, tau, kernel_nodes=33):
    """Delay operator of the rewritten system u' = (B+C) u + Phi u_t.

    Point term -C [S(tau) - I] at -tau plus the kernel -C S(-sigma - tau) C
    supported on [-2 tau, -tau] (substituting sigma = s - tau).  Horizon 2 tau.
    """
    B = np.asarray(B, dtype=complex)
    C = np.asarray(C, dtype=complex)
    n = B.shape[0]
    S_tau = expm(tau * B)
    point = (-tau, -C @ (S_tau - np.eye(n)))
    kernel = KernelTerm.from_callable(
        lambda sig: -C @ expm((-sig - tau) * B) @ C, -2.0 * tau, -tau, n, m=kernel_nodes
    )
    return DelayOperatorSpec(r=2.0 * tau, point_terms=(point,), kernel_terms=(kernel,))


def transformed_system(B, C, tau, kernel_nodes=33):
    """Rewritten system spec with generator B + C and the transformed delay."""
    B = np.asarray(B, dtype=complex)
    C = np.asarray(C, dtype=complex)
    return SystemSpec.general(B + C, transformed_phi(B, C, tau, kernel_nodes))


def _resolvent_bc(B, C, omega):
    n = B.shape[0]
    M = 1j * omega * np.eye(n) - B - C
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] < 1e-12 * max(sv[0], 1.0):
        raise ResonantOmega(f"i*{omega} is (numerically) an eigenvalue of B + C")
    return np.linalg.inv(M)


def I1_I2_norms(B, C, tau, omega, quad_tol=1e-12):
    """Spectral norms of the two frequency-domain blocks at a single omega.

    I1 = C [S(tau) - I] e^{-i w tau} R(iw, B+C); I2 integrates
    C S(-s) C e^{-i w (s - tau)} R(iw, B+C) over s in [-tau, 0] with
    Gauss-Legendre, doubling the node count until converged.
    """
    B = np.asarray(B, dtype=complex)
    C = np.asarray(C, dtype=complex)
    n = B.shape[0]
    if tau == 0:
        return 0.0, 0.0
    R = _resolvent_bc(B, C, omega)
    I1 = C @ (expm(tau * B) - np.eye(n)) @ R * np.exp(-1j * omega * tau)

    def integral(m):
        x, w = np.polynomial.legendre.leggauss(m)
        s = 0.5 * tau * (x - 1.0)  # [-tau, 0]
        acc = np.zeros((n, n), dtype=complex)
        for wj, sj in zip(w, s):
            acc += wj * np.exp(-1j * omega * (sj - tau)) * (C @ expm(-sj * B) @ C)
        return acc * (0.5 * tau)

    m = 8
    prev = integral(m)
    while m <= 256:
        m *= 2
        cur = integral(m)
        if spectral_norm(cur - prev) < quad_tol * max(1.0, spectral_norm(cur)):
            prev = cur
            break
        prev = cur
    I2 = prev @ R
    return spectral_norm(I1), spectral_norm(I2)


def _check_bc_mode(B, C, mode):
    eigs = np.linalg.eigvals(np.asarray(B) + np.asarray(C))
    if mode == "stable":
        if np.max(eigs.real) >= 0:
            raise BCNotStable(f"max Re eig(B+C) = {np.max(eigs.real):.4g} >= 0")
    elif mode == "hyperbolic":
        if np.min(np.abs(eigs.real)) < 1e-9:
            raise BCNotHyperbolic("B + C has an eigenvalue on the imaginary axis")
    else:
        raise ValueError(f"unknown mode {mode!r}")


def _sup_exp_norm(B):
    """K = sup over t in [0, 1] of ||e^{tB}||, dense grid plus refinement."""
    ts = np.linspace(0.0, 1.0, 257)
    vals = np.array([spectral_norm(expm(t * B)) for t in ts])
    best = int(np.argmax(vals))
    lo = ts[max(best - 1, 0)]
    hi = ts[min(best + 1, len(ts) - 1)]
    from .criteria import _golden_max

    _, peak = _golden_max(lambda t: spectral_norm(expm(t * B)), lo, hi)
    return float(max(peak, vals[best], 1.0))


def _kappa1_bisect(i1_of_tau, coarse=64, iters=40):
    """Largest tau in (0, cap] with max-I1 below 1/2, by bracketed bisection.

    Monotonicity in tau is not assumed: a coarse sweep locates the first
    crossing and the returned value is re-checked.
    """
    taus = np.linspace(0.0, KAPPA1_CAP, coarse + 1)[1:]
    first_bad = None
    for t in taus:
        if i1_of_tau(t) >= HALF:
            first_bad = t
            break
    if first_bad is None:
        return KAPPA1_CAP
    lo = first_bad - KAPPA1_CAP / coarse
    hi = first_bad
    if lo <= 0:
        lo = hi * 1e-6
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if i1_of_tau(mid) < HALF:
            lo = mid
        else:
            hi = mid
    kappa1 = lo
    while kappa1 > 1e-12 and i1_of_tau(kappa1) >= HALF:
        kappa1 *= 0.5
    return float(kappa1)


def robustness_margin(B, C, mode="stable", commuting_form=False):
    """Certified delay margin kappa: (DE)_tau keeps the asymptotics of B + C.

    kappa2 = 1/(2 ||C||^2 K M_BC) forces sup_w ||I2|| < 1/2 (the I2 bound is
    linear in tau); kappa1 keeps max over the certified [-L, L] grid of
    ||I1|| below 1/2, with the high-frequency cutoff L handling |w| > L
    analytically.  Then sup_w ||Phi_{iw} R(iw, B+C)|| < 1 for tau < kappa,
    and the single-power criterion certifies the delayed system.
    """
    B = np.asarray(B, dtype=complex)
    C = np.asarray(C, dtype=complex)
    n = B.shape[0]
    _check_bc_mode(B, C, mode)
    norm_C = spectral_norm(C)
    if norm_C == 0.0:
        return RobustnessMargin(
            kappa1=float("inf"),
            kappa2=float("inf"),
            kappa=float("inf"),
            K=_sup_exp_norm(B),
            M_BC=line_sup_resolvent(B, 0.0).sup_norm if mode == "stable" else float("nan"),
            L=0.0,
            mode=mode,
            unconditional=True,
        )
    K = _sup_exp_norm(B)
    line = line_sup_resolvent(B + C, 0.0)
    M_BC = line.sup_norm
    kappa2 = 1.0 / (2.0 * norm_C**2 * K * M_BC)

    # ||R(iw, B+C)|| <= 1/(|w| - ||B+C||) < 1/(2||C||(K+1)) beyond L
    L = spectral_norm(B + C) + 2.0 * norm_C * (K + 1.0)

    def rnorm_mat(w):
        return np.linalg.inv(1j * w * np.eye(n) - B - C)

    omegas, _, _ = _build_omega_grid(
        B + C, 0.0, L, lambda w: 1.0 / np.linalg.svd(1j * w * np.eye(n) - B - C, compute_uv=False)[-1]
    )
    R_all = np.stack([rnorm_mat(w) for w in omegas])

    if commuting_form:
        # C commutes with B and S(t): slide C to the right of the resolvent
        def i1_of_tau(tau):
            A = expm(tau * B) - np.eye(n)
            prod = np.matmul(np.matmul(A[None, :, :], R_all), C[None, :, :])
            return float(np.max(np.linalg.svd(prod, compute_uv=False)[:, 0]))

    else:

        def i1_of_tau(tau):
            A = C @ (expm(tau * B) - np.eye(n))
            prod = np.matmul(A[None, :, :], R_all)
            return float(np.max(np.linalg.svd(prod, compute_uv=False)[:, 0]))

    kappa1 = _kappa1_bisect(i1_of_tau)
    kappa = min(kappa1, kappa2)
    return RobustnessMargin(
        kappa1=kappa1,
        kappa2=kappa2,
        kappa=kappa,
        K=K,
        M_BC=M_BC,
        L=L,
        mode=mode,
        certificate={
            "omega_grid_size": len(omegas),
            "omega_grid_cap": float(L),
            "I1_at_kappa1": i1_of_tau(min(kappa1, KAPPA1_CAP)),
            "commuting_form": commuting_form,
        },
    )


def compact_commuting_margin(B, C, mode="stable"):
    """Margin for commuting C using the commuted I1 form (often sharper).

    Every matrix is compact; the distinct content here is commutation:
    C [S(tau) - I] R = [S(tau) - I] R C, so the C factor multiplies the
    resolvent from the right.
    """
    B = np.asarray(B, dtype=complex)
    C = np.asarray(C, dtype=complex)
    comm = spectral_norm(B @ C - C @ B)
    if comm > 1e-10 * max(spectral_norm(B) * spectral_norm(C), 1e-300):
        raise NotCommuting(f"||BC - CB|| = {comm:.3e}")
    return robustness_margin(B, C, mode=mode, commuting_form=True)


def scalar_exact_boundary(d):
    """Exact critical delay pi/(2|d|) for B = 0, C = d < 0 (scalar)."""
    if d >= 0:
        raise HypothesisViolated("d must be negative")
    return np.pi / (2.0 * abs(d))
