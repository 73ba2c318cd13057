"""Closed-form fidelity laws used as oracles for the simulator.

All laws take the input orientation (theta0, phi0), the uniform fractional
error epsilon and, where relevant, the odd chain length n.
"""

from __future__ import annotations

import numpy as np

from .gates import InteractionKind

TWO_THIRDS = 2.0 / 3.0


def _check_odd(n: int) -> int:
    if int(n) != n or n < 3 or n % 2 == 0:
        raise ValueError(f"n must be an odd integer >= 3, got {n}")
    return int(n)


def f_cp_n3(theta0, phi0, epsilon):
    """Three-qubit CP teleportation fidelity under uniform error."""
    a = np.sin(theta0) ** 2 * np.cos(phi0) ** 2
    return (
        1.0
        - (1.0 - a) * np.sin(np.pi * epsilon / 2) ** 2 / 2
        - np.sin(theta0 / 2) ** 2 * np.sin(np.pi * epsilon) ** 2 / 2
    )


def f_zz_n3(theta0, phi0, epsilon):
    """Three-qubit Ising (and XY) teleportation fidelity under uniform error."""
    b = np.sin(theta0) ** 2 * np.sin(phi0) ** 2
    return 1.0 - (1.0 - b) * np.sin(np.pi * epsilon / 2) ** 2 / 2


def min_f_zz(n, epsilon):
    """Minimum over input directions of the Ising fidelity, reached anywhere in the x-z plane."""
    n = _check_odd(n)
    return (1.0 + np.cos(np.pi * epsilon / 2) ** (n - 1)) / 2


def eps_max(n):
    """Largest uniform Ising error keeping Min(F) above 2/3."""
    n = _check_odd(n)
    return (2.0 / np.pi) * np.arccos(3.0 ** (1.0 / (1 - n)))


def eps_max_asymptote(n):
    """Leading large-n behaviour of :func:`eps_max`, (2/pi) sqrt(2 ln 3 / (n - 1))."""
    return (2.0 / np.pi) * np.sqrt(2.0 * np.log(3.0) / (n - 1))


def fit_asymptote_prefactor(ns) -> dict:
    """Least-squares prefactor a in eps_max(n) ~ a sqrt(2 ln 3 / n).

    Diagnostic only. The fitted value sits near 2/pi rather than 1, so the
    bare square-root form overestimates the exact threshold.
    """
    ns = np.asarray(list(ns), dtype=float)
    exact = np.array([eps_max(int(n)) for n in ns])
    basis = np.sqrt(2.0 * np.log(3.0) / ns)
    a = float(basis @ exact / (basis @ basis))
    return {
        "prefactor": a,
        "two_over_pi": 2.0 / np.pi,
        "max_rel_residual": float(np.max(np.abs(a * basis - exact) / exact)),
    }


def scaled_eps_max(n) -> float:
    """n eps_max(n)^2 normalized by its limiting value 8 ln 3 / pi^2; tends to 1."""
    return float(n * eps_max(n) ** 2 / (8.0 * np.log(3.0) / np.pi**2))


def cluster_overlap(n, epsilon):
    """|<Phi_C(0)|Phi_C(eps)>| for the Ising build."""
    n = _check_odd(n)
    return np.abs(np.cos(np.pi * epsilon / 4)) ** (n - 1)


def perturbative_f2(kind, theta0, phi0):
    """Second-order coefficient of F(eps) for the three-qubit chain.

    Only CP and ZZ have derived forms. XY is checked against the ZZ value in
    the test suite but is not offered here.
    """
    kind = InteractionKind.parse(kind)
    if kind is InteractionKind.ZZ:
        return -(np.pi**2 / 8) * (1 - np.sin(theta0) ** 2 * np.sin(phi0) ** 2)
    if kind is InteractionKind.CP:
        return -(np.pi**2 / 8) * (
            1 - np.sin(theta0) ** 2 * np.cos(phi0) ** 2 + 4 * np.sin(theta0 / 2) ** 2
        )
    raise ValueError("no second-order coefficient for XY; use the ZZ value as an empirical stand-in")


def taylor_coefficients(fn, radius: float = 1e-3, order: int = 4, points: int = 32):
    """Taylor coefficients c_0..c_order of an analytic ``fn`` about 0.

    Samples ``fn`` on the circle |z| = radius and applies a discrete Fourier
    transform (Cauchy's integral formula). ``fn`` may return arrays; the
    coefficients are stacked along a new leading axis. Aliasing is of order
    c_{k+points} radius**points and round-off of order 1e-16 / radius**k.
    """
    if points <= order:
        raise ValueError("points must exceed order")
    z = radius * np.exp(2j * np.pi * np.arange(points) / points)
    values = np.array([np.asarray(fn(zk), dtype=complex) for zk in z])
    coeffs = np.fft.fft(values, axis=0) / points
    scale = radius ** np.arange(order + 1)
    return coeffs[: order + 1] / scale.reshape((-1,) + (1,) * (values.ndim - 1))
