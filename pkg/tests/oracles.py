"""Independent brute-force oracles used only by the tests.

Each helper recomputes a quantity with the most literal algorithm available
(index loops, fixed-step integration, streaming accumulation) so the
production code paths are checked against something that shares none of
their machinery.
"""

import numpy as np


def loop_partial_trace(psi_full, n_sites, n_message):
    """rho[a, b] = sum_e <a,e|psi><psi|b,e> by explicit index loops."""
    m = 1 << n_message
    n_env = 1 << (n_sites - n_message)
    rho = np.zeros((m, m), dtype=complex)
    for a in range(m):
        for b in range(m):
            for e in range(n_env):
                rho[a, b] += (psi_full[a | (e << n_message)]
                              * np.conj(psi_full[b | (e << n_message)]))
    return rho


def rk4_evolve(hamiltonian, psi0, t_final, dt=1e-4):
    """Fixed-step fourth-order Runge-Kutta integration of i dpsi/dt = H psi."""
    psi = psi0.astype(complex).copy()
    steps = int(round(t_final / dt))

    def rhs(state):
        return -1j * (hamiltonian @ state)

    for _ in range(steps):
        k1 = rhs(psi)
        k2 = rhs(psi + 0.5 * dt * k1)
        k3 = rhs(psi + 0.5 * dt * k2)
        k4 = rhs(psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return psi


def streaming_mean_stderr(values):
    """Welford accumulation of mean and standard error."""
    count = 0
    mean = 0.0
    m2 = 0.0
    for v in values:
        count += 1
        delta = v - mean
        mean += delta / count
        m2 += delta * (v - mean)
    if count < 2:
        return mean, float("nan")
    variance = m2 / (count - 1)
    return mean, (variance / count) ** 0.5


def haar_unitary(dim, rng):
    """Haar-distributed unitary from the QR of a complex Gaussian matrix."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
