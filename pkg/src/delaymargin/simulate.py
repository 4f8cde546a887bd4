"""Time-domain oracle: method-of-steps RK4 integration and decay-rate fits.

Point delays must be grid-aligned (the step divides every delay), so delayed
values at whole steps are exact stored states; RK4 mid-stage lookups use
cubic Hermite interpolation of stored states and derivatives, preserving
fourth order.  Everything here is independent of the spectral machinery.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTrajectory, MisalignedDelay
from .model import SystemSpec, spectral_norm

BLOWUP_NORM = 1e12


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (steps+1, n)
    history: object
    h: float
    diverged: bool = False


@dataclass(frozen=True)
class DecayEstimate:
    rate: float
    r_squared: float
    window: tuple


def aligned_step(spec, target_h):
    """Largest step <= target_h dividing every point delay of the spec.

    Works when the delays are commensurate (e.g. lattice multiples); raises
    MisalignedDelay otherwise.
    """
    delays = [abs(h) for h, _ in spec.phi.point_terms if h != 0.0]
    if not delays:
        return target_h
    h = min(delays) / np.ceil(min(delays) / target_h)
    for _ in range(60):
        ok = all(abs(d / h - round(d / h)) < 1e-9 for d in delays)
        if ok:
            return float(h)
        h /= 2.0
    raise MisalignedDelay(
        f"cannot align step to delays {delays}", suggested_step=min(delays) / 64.0
    )


def integrate(spec, history, T, h):
    """RK4 method-of-steps trajectory of u' = B u + Phi u_t on [0, T].

    Requires h to divide every point delay (within 1e-12 relative) and
    h <= r/4.  Kernel terms use the trapezoid rule over stored history.
    A blow-up past 1e12 returns a truncated trajectory flagged diverged.
    """
    n = spec.n
    r = spec.r
    if h > r / 4 + 1e-15:
        raise MisalignedDelay(f"step {h} exceeds r/4 = {r / 4}", suggested_step=r / 4)
    B = np.asarray(spec.B, dtype=complex)
    point_offsets = []
    for hk, Bk in spec.phi.point_terms:
        if hk == 0.0:
            B = B + np.asarray(Bk)  # an undelayed term folds into B
            continue
        m = abs(hk) / h
        if abs(m - round(m)) > 1e-12 * max(1.0, m):
            raise MisalignedDelay(
                f"step {h} does not divide delay {hk}",
                suggested_step=abs(hk) / max(1, round(m)),
            )
        point_offsets.append((int(round(m)), np.asarray(Bk, dtype=complex)))

    kernel_parts = []
    for kt in spec.phi.kernel_terms:
        # trapezoid nodes: grid offsets j with -j*h inside the support [a, b]
        j_min = int(np.ceil(-kt.b / h - 1e-9))
        j_max = int(np.floor(-kt.a / h + 1e-9))
        js = np.arange(j_min, j_max + 1)
        if len(js) < 2:
            raise MisalignedDelay(
                f"step {h} too coarse for kernel support [{kt.a}, {kt.b}]",
                suggested_step=(kt.b - kt.a) / 4.0,
            )
        K_pts = np.stack(
            [np.einsum("j,jab->ab", _bary_row(kt, -j * h), kt.samples) for j in js]
        )
        w = np.full(len(js), h)
        w[0] *= 0.5
        w[-1] *= 0.5
        Kw = w[:, None, None] * K_pts
        if js[0] == 0:
            # the s = 0 sample multiplies the *current* state; fold it into
            # the instantaneous term so RK4 stages see it exactly
            B = B + Kw[0]
            js, Kw = js[1:], Kw[1:]
        kernel_parts.append((js, Kw))

    steps = int(round(T / h))
    times = np.arange(steps + 1) * h
    states = np.zeros((steps + 1, n), dtype=complex)
    derivs = np.zeros((steps + 1, n), dtype=complex)
    states[0] = history.values[-1]

    def past(t, i_done):
        """Value at time t <= times[i_done], from history or Hermite interp."""
        if t <= 1e-14:
            if t < -1e-14:
                return history.eval(max(t, -r))
            return states[0]
        j = t / h
        jr = int(round(j))
        if abs(j - jr) < 1e-9:
            return states[jr]
        j0 = int(np.floor(j))
        theta = j - j0
        y0, y1 = states[j0], states[j0 + 1]
        f0, f1 = derivs[j0], derivs[j0 + 1]
        h00 = (1 + 2 * theta) * (1 - theta) ** 2
        h10 = theta * (1 - theta) ** 2
        h01 = theta**2 * (3 - 2 * theta)
        h11 = theta**2 * (theta - 1)
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1

    def rhs(t, y, i_done):
        out = B @ y
        for m, Bk in point_offsets:
            out = out + Bk @ past(t - m * h, i_done)
        for js, Kw in kernel_parts:
            acc = np.zeros(n, dtype=complex)
            for j, KW in zip(js, Kw):
                acc = acc + KW @ past(t - j * h, i_done)
            out = out + acc
        return out

    derivs[0] = rhs(0.0, states[0], 0)
    diverged = False
    for i in range(steps):
        t = times[i]
        y = states[i]
        k1 = derivs[i]
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1, i)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2, i)
        k4 = rhs(t + h, y + h * k3, i)
        states[i + 1] = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(states[i + 1].view(float))) or np.linalg.norm(
            states[i + 1]
        ) > BLOWUP_NORM:
            states = states[: i + 2]
            times = times[: i + 2]
            diverged = True
            break
        derivs[i + 1] = rhs(t + h, states[i + 1], i + 1)
    return Trajectory(times=times, states=states, history=history, h=h, diverged=diverged)


def _bary_row(kt, s):
    from .grid import barycentric_row

    return barycentric_row(kt.nodes, kt.bary, s)


def decay_rate(traj):
    """Least-squares exponential rate of log ||u(t)|| over [T/2, T]."""
    norms = np.linalg.norm(traj.states, axis=1)
    T = traj.times[-1]
    mask = traj.times >= T / 2
    t = traj.times[mask]
    v = norms[mask]
    if len(t) < 100:
        raise DegenerateTrajectory("trajectory too short for a rate fit")
    if np.all(v == 0):
        raise DegenerateTrajectory("trajectory identically zero in fit window")
    if np.any(v == 0):
        raise DegenerateTrajectory("exact zero of ||u|| in fit window")
    logv = np.log(v)
    slope, intercept = np.polyfit(t, logv, 1)
    fit = slope * t + intercept
    ss_res = float(np.sum((logv - fit) ** 2))
    ss_tot = float(np.sum((logv - logv.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    return DecayEstimate(rate=float(slope), r_squared=r2, window=(float(T / 2), float(T)))


def decay_rate_converged(spec, history, T, h, rtol=1e-3):
    """Rate estimate accepted only after step-halving agreement below rtol."""
    est1 = decay_rate(integrate(spec, history, T, h))
    est2 = decay_rate(integrate(spec, history, T, h / 2))
    if abs(est1.rate - est2.rate) > rtol:
        raise DegenerateTrajectory(
            f"rate not converged in h: {est1.rate:.6g} vs {est2.rate:.6g}"
        )
    return est2


def default_horizon(expected_rate):
    """Fit horizon 20/|rate| clamped to [10, 200]."""
    if expected_rate == 0 or not np.isfinite(expected_rate):
        return 200.0
    return float(np.clip(20.0 / abs(expected_rate), 10.0, 200.0))
