"""Sufficient stability and hyperbolicity criteria via line-sup resolvent norms.

The machinery: certified estimates of sup over a vertical line Re = alpha of
||R(alpha + i w, B)|| and of the powers a_n = sup_w ||(Phi_lam R(lam, B))^n||,
an analytic tail bound beyond a finite frequency cap, and the series test
a = sum a_n < infinity which certifies hyperbolicity (alpha = 0) or the decay
rate omega_0 < alpha <= 0.  All conditions are sufficient, never necessary,
so a failed test reports "inconclusive".
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import AlphaOutOfRange, BNotStable, EigenvalueOnLine, NotCommuting
from .model import phi_symbol, spectral_norm

N_MAX_DEFAULT = 50
TAIL_RATIO_Q = 0.95
LINE_DISTANCE_TOL = 1e-9
BASE_STEP_FACTOR = 0.01
REFINE_ROUNDS = 3


@dataclass(frozen=True)
class LineSupEstimate:
    alpha: float
    sup_norm: float
    argmax_omega: float
    omega_cap: float  # tail bound certified for |w| > omega_cap
    tail_bound: float
    grid_step: float
    omegas: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class SeriesTestResult:
    a_n: tuple  # a_n[0] = 1 always
    a: float  # sum bound, inf when diverged
    n_star: int  # index where the geometric tail bound took over, -1 if none
    verdict: str  # "pass" | "inconclusive"


@dataclass(frozen=True)
class StabilityReport:
    verdict: str  # stable | hyperbolic | inconclusive | unstable
    criterion: str
    constants: dict
    cross_check: dict = None

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "criterion": self.criterion,
            "constants": _jsonable(self.constants),
            "cross_check": _jsonable(self.cross_check) if self.cross_check else None,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _check_line_clear(B, alpha):
    dist = np.min(np.abs(np.linalg.eigvals(B).real - alpha))
    if dist < LINE_DISTANCE_TOL:
        raise EigenvalueOnLine(f"eigenvalue of B within {dist:.2e} of line Re = {alpha}")


def _golden_max(func, lo, hi, iters=40):
    """Deterministic golden-section maximization on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = func(d)
    if fc >= fd:
        return c, fc
    return d, fd


def _build_omega_grid(B, alpha, omega_cap, value):
    """Adaptive symmetric grid on [-cap, cap], refined around local maxima.

    value(w) is the scalar being maximized; refinement trisects intervals
    around every local maximum for a fixed number of rounds, so the result
    is deterministic and independent of evaluation order.
    """
    normB = spectral_norm(B)
    step = BASE_STEP_FACTOR * (1.0 + normB)
    count = max(3, int(np.ceil(2.0 * omega_cap / step)) + 1)
    omegas = np.linspace(-omega_cap, omega_cap, count)
    vals = np.array([value(w) for w in omegas])
    for _ in range(REFINE_ROUNDS):
        peaks = [
            i
            for i in range(len(omegas))
            if (i == 0 or vals[i] >= vals[i - 1]) and (i == len(omegas) - 1 or vals[i] >= vals[i + 1])
        ]
        new = []
        for i in peaks:
            lo = omegas[i - 1] if i > 0 else omegas[i]
            hi = omegas[i + 1] if i < len(omegas) - 1 else omegas[i]
            for t in (1.0 / 3.0, 2.0 / 3.0):
                new.append(lo + t * (hi - lo))
        if not new:
            break
        new = np.array(sorted(set(np.round(new, 14))))
        omegas = np.unique(np.concatenate([omegas, new]))
        vals = np.array([value(w) for w in omegas])
    return omegas, vals, step


def line_sup_resolvent(B, alpha):
    """Certified sup over the line Re = alpha of the resolvent spectral norm.

    Interior handled on an adaptive grid with golden-section polish; for
    |w| > cap the analytic bound ||R|| <= 1/(|w| - ||B - alpha I||) takes
    over, with the cap pushed out until the tail cannot exceed the interior.
    """
    B = np.asarray(B, dtype=complex)
    _check_line_clear(B, alpha)
    n = B.shape[0]
    shifted_norm = spectral_norm(B - alpha * np.eye(n))

    def rnorm(w):
        M = (alpha + 1j * w) * np.eye(n) - B
        return 1.0 / float(np.linalg.svd(M, compute_uv=False)[-1])

    center = rnorm(0.0)
    omega_cap = shifted_norm + max(1.0, 1.0 / center)
    omegas, vals, step = _build_omega_grid(B, alpha, omega_cap, rnorm)
    best = int(np.argmax(vals))
    lo = omegas[best - 1] if best > 0 else omegas[best]
    hi = omegas[best + 1] if best < len(omegas) - 1 else omegas[best]
    arg, peak = _golden_max(rnorm, lo, hi)
    if peak < vals[best]:
        arg, peak = omegas[best], vals[best]
    tail = 1.0 / (omega_cap - shifted_norm)
    return LineSupEstimate(
        alpha=float(alpha),
        sup_norm=float(max(peak, tail)),
        argmax_omega=float(arg),
        omega_cap=float(omega_cap),
        tail_bound=float(tail),
        grid_step=float(step),
        omegas=omegas,
    )


def a_n_sequence(spec, alpha=0.0, n_max=N_MAX_DEFAULT, stop_early=True):
    """Estimate a_n = sup_w ||(Phi_lam R(lam, B))^n|| on the line Re = alpha.

    Interior sups come from the shared certified grid; the tail contributes
    (phi_bound * tail_R)^n which is < 1 by the choice of frequency cap.  The
    series is summed with the submultiplicative tail bound
    a <= (sum_{j<n*} a_j) / (1 - a_{n*}) once some a_{n*} < q < 1.
    """
    B = np.asarray(spec.B, dtype=complex)
    _check_line_clear(B, alpha)
    n = spec.n
    phi_bound = spec.phi.norm_bound(alpha)
    if spec.phi.is_zero:
        return SeriesTestResult(a_n=(1.0, 0.0), a=1.0, n_star=1, verdict="pass")

    shifted_norm = spectral_norm(B - alpha * np.eye(n))
    omega_cap = shifted_norm + 1.0 + phi_bound

    def tnorm_mat(w):
        lam = alpha + 1j * w
        R = np.linalg.inv(lam * np.eye(n) - B)
        return phi_symbol(spec.phi, lam) @ R

    omegas, _, _ = _build_omega_grid(B, alpha, omega_cap, lambda w: spectral_norm(tnorm_mat(w)))
    T = np.stack([tnorm_mat(w) for w in omegas])  # (G, n, n)
    tail_factor = phi_bound / (1.0 + phi_bound)  # phi_bound * 1/(cap - ||B-aI||)

    a_list = [1.0]
    P = T.copy()
    n_star = -1
    for k in range(1, n_max + 1):
        interior = float(np.max(np.linalg.svd(P, compute_uv=False)[:, 0]))
        a_k = max(interior, tail_factor**k)
        a_list.append(a_k)
        if a_k < TAIL_RATIO_Q and n_star < 0:
            n_star = k
            if stop_early:
                break
        P = np.matmul(P, T)
    if n_star < 0:
        return SeriesTestResult(a_n=tuple(a_list), a=float("inf"), n_star=-1, verdict="inconclusive")
    # submultiplicative tail: a_{k n* + j} <= a_{n*}^k a_j
    head = float(np.sum(a_list[:n_star]))
    a_total = head / (1.0 - a_list[n_star])
    return SeriesTestResult(a_n=tuple(a_list), a=a_total, n_star=n_star, verdict="pass")


def certified_root_free_margin(spec, series, line_sup, alpha=0.0):
    """Half-width of a root-free vertical strip around Re = alpha after a pass.

    From the proof machinery: ||R(lam, B + Phi_lam)|| <= M * a on the line, so
    a root at distance b off the line would need the perturbation
    b * (1 + L_Phi) to defeat that bound (Neumann series).
    """
    m_tot = line_sup.sup_norm * series.a
    # one contraction step from beta = 1 stays valid: the Lipschitz
    # coefficient is monotone increasing in the strip half-width
    coeff = 1.0 + spec.phi.lipschitz_coeff(abs(alpha) + 1.0)
    return min(1.0, 0.95 / (m_tot * coeff))


def hyperbolicity_test(spec, n_max=N_MAX_DEFAULT):
    """Sufficient hyperbolicity check on the imaginary axis.

    Tries the cheap single-power conditions first (product bound, then
    a_1 < 1), falling back to the full series test.  A pass certifies a
    root-free strip; a failure is always reported "inconclusive".
    """
    line = line_sup_resolvent(spec.B, 0.0)
    phi_bound = spec.phi.norm_bound(0.0)

    if phi_bound < 1.0 / line.sup_norm:
        series = a_n_sequence(spec, 0.0, n_max)
        margin = certified_root_free_margin(spec, series, line)
        return StabilityReport(
            verdict="hyperbolic",
            criterion="product_bound",
            constants={
                "M": line.sup_norm,
                "phi_bound": phi_bound,
                "a_n": series.a_n,
                "a": series.a,
                "alpha": 0.0,
                "Omega": line.omega_cap,
                "root_free_halfwidth": margin,
            },
        )
    series = a_n_sequence(spec, 0.0, n_max)
    if series.verdict == "pass":
        crit = "first_power_sup" if len(series.a_n) > 1 and series.a_n[1] < 1.0 else "series_test"
        margin = certified_root_free_margin(spec, series, line)
        return StabilityReport(
            verdict="hyperbolic",
            criterion=crit,
            constants={
                "M": line.sup_norm,
                "phi_bound": phi_bound,
                "a_n": series.a_n,
                "a": series.a,
                "alpha": 0.0,
                "Omega": line.omega_cap,
                "root_free_halfwidth": margin,
            },
        )
    return StabilityReport(
        verdict="inconclusive",
        criterion="series_test",
        constants={
            "M": line.sup_norm,
            "phi_bound": phi_bound,
            "a_n": series.a_n,
            "a": None,
            "alpha": 0.0,
            "Omega": line.omega_cap,
        },
    )


def stability_test(spec, alpha=0.0, n_max=N_MAX_DEFAULT):
    """Certify decay rate omega_0 < alpha <= 0 via the shifted-line test."""
    if alpha > 0:
        raise AlphaOutOfRange("alpha must be <= 0")
    spectral_abscissa_B = float(np.max(np.linalg.eigvals(spec.B).real))
    if spectral_abscissa_B >= alpha - LINE_DISTANCE_TOL:
        raise AlphaOutOfRange(
            f"alpha = {alpha} must exceed the spectral abscissa of B "
            f"({spectral_abscissa_B:.6g})"
        )
    line = line_sup_resolvent(spec.B, alpha)
    series = a_n_sequence(spec, alpha, n_max)
    phi_bound = spec.phi.norm_bound(alpha)
    constants = {
        "M": line.sup_norm,
        "phi_bound": phi_bound,
        "a_n": series.a_n,
        "a": series.a if np.isfinite(series.a) else None,
        "alpha": alpha,
        "Omega": line.omega_cap,
    }
    if series.verdict == "pass":
        return StabilityReport(verdict="stable", criterion="shifted_series_test", constants=constants)
    return StabilityReport(verdict="inconclusive", criterion="shifted_series_test", constants=constants)


def commuting_radius_test(spec):
    """Spectral-radius refinement for a single commuting point delay.

    For Phi = C delta_{-r} with BC = CB, r(C) * M < 1 certifies omega_0 < 0
    even when ||C|| * M >= 1.
    """
    if len(spec.phi.point_terms) != 1 or spec.phi.kernel_terms:
        raise NotCommuting("test applies to a single point-delay operator")
    _, C = spec.phi.point_terms[0]
    B = np.asarray(spec.B, dtype=complex)
    C = np.asarray(C, dtype=complex)
    comm = spectral_norm(B @ C - C @ B)
    if comm > 1e-10 * max(spectral_norm(B) * spectral_norm(C), 1e-300):
        raise NotCommuting(f"||BC - CB|| = {comm:.3e}")
    if np.max(np.linalg.eigvals(B).real) >= 0:
        raise BNotStable("B must be exponentially stable")
    line = line_sup_resolvent(B, 0.0)
    radius = float(np.max(np.abs(np.linalg.eigvals(C))))
    passed = radius * line.sup_norm < 1.0
    return StabilityReport(
        verdict="stable" if passed else "inconclusive",
        criterion="commuting_spectral_radius",
        constants={
            "M": line.sup_norm,
            "r_C": radius,
            "norm_C": spectral_norm(C),
            "product": radius * line.sup_norm,
        },
    )
