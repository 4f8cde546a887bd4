import numpy as np

from delaymargin.model import DelayOperatorSpec, KernelTerm, SystemSpec


def stable_matrix(rng, n, margin=0.5, complex_entries=True):
    """Random matrix with spectral abscissa exactly -margin."""
    A = rng.standard_normal((n, n))
    if complex_entries:
        A = A + 1j * rng.standard_normal((n, n))
    A = A / max(1.0, np.linalg.norm(A, 2))
    shift = np.max(np.linalg.eigvals(A).real) + margin
    return A - shift * np.eye(n)


def random_delay_spec(
    rng,
    n_max=4,
    max_delays=3,
    phi_scale=0.25,
    lattice=None,
    complex_entries=True,
    kernels=True,
):
    """Random system with a stable free part and smallish delay terms.

    phi_scale controls the delay-term norms relative to the stability margin
    of B, so most draws land inside the sufficient criteria; lattice (if set)
    restricts delays to multiples usable by the fixed-step integrator.
    """
    n = int(rng.integers(1, n_max + 1))
    margin = float(rng.uniform(0.4, 1.2))
    B = stable_matrix(rng, n, margin, complex_entries)

    point = []
    for _ in range(int(rng.integers(1, max_delays + 1))):
        if lattice is not None:
            h = -float(rng.choice(lattice))
        else:
            h = -float(rng.uniform(0.1, 1.5))
        Bk = rng.standard_normal((n, n))
        if complex_entries:
            Bk = Bk + 1j * rng.standard_normal((n, n))
        Bk = Bk * (
            float(rng.uniform(0.2, 1.0)) * phi_scale * margin
            / max(np.linalg.norm(Bk, 2), 1e-12)
        )
        point.append((h, Bk))

    kernel_terms = ()
    if kernels and rng.random() < 0.3:
        a = -float(rng.uniform(0.4, 1.0))
        b = min(0.0, a + float(rng.uniform(0.2, abs(a))))
        K0 = rng.standard_normal((n, n))
        if complex_entries:
            K0 = K0 + 1j * rng.standard_normal((n, n))
        K0 = K0 * (0.3 * phi_scale * margin / ((b - a) * max(np.linalg.norm(K0, 2), 1e-12)))
        kt = KernelTerm.from_callable(lambda s: K0 * np.exp(s), a, b, n, m=9)
        kernel_terms = (kt,)

    r = max([abs(h) for h, _ in point] + [abs(kt.a) for kt in kernel_terms])
    phi = DelayOperatorSpec(r=r, point_terms=tuple(point), kernel_terms=kernel_terms)
    return SystemSpec(n=n, B=B, phi=phi)


def random_feedback_pair(rng, n_max=3, c_scale=0.4):
    """Random (B, C) with B and B + C both exponentially stable."""
    for _ in range(100):
        n = int(rng.integers(1, n_max + 1))
        B = stable_matrix(rng, n, margin=float(rng.uniform(0.5, 1.5)))
        C = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        C = C * (float(rng.uniform(0.1, 1.0)) * c_scale / max(np.linalg.norm(C, 2), 1e-12))
        if np.max(np.linalg.eigvals(B + C).real) < -0.05:
            return B, C
    raise AssertionError("could not draw a stable feedback pair")
