"""Error-prone two-qubit gates and error-free single-qubit rotations.

Every two-qubit gate takes the dimensionless action ``theta = J t`` and a
fractional error ``epsilon`` entering as ``theta * (1 + epsilon)``. The
builders accept complex ``epsilon`` as well, which the series-coefficient
code in :mod:`clusterbench.analytics` relies on; physical callers pass reals.
"""

from __future__ import annotations

import enum

import numpy as np

from .statevec import PAULI_X, PAULI_Y, PAULI_Z

IDENTITY_2 = np.eye(2, dtype=complex)
PAULIS = {"I": IDENTITY_2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
ISWAP_MINUS = np.array(
    [[1, 0, 0, 0], [0, 0, -1j, 0], [0, -1j, 0, 0], [0, 0, 0, 1]], dtype=complex
)


class InteractionKind(str, enum.Enum):
    CP = "cp"
    ZZ = "zz"
    XY = "xy"

    @classmethod
    def parse(cls, value) -> "InteractionKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown interaction kind {value!r}; expected cp, zz or xy") from None


def _action(theta, epsilon):
    return np.asarray(theta * (1 + np.asarray(epsilon)))


def u_cp(theta, epsilon=0.0) -> np.ndarray:
    """diag(1, 1, 1, exp(-4i theta (1 + epsilon))).

    Array ``epsilon`` yields a stack of matrices with shape ``epsilon.shape + (4, 4)``.
    """
    action = _action(theta, epsilon)
    u = np.zeros(action.shape + (4, 4), dtype=complex)
    u[..., 0, 0] = u[..., 1, 1] = u[..., 2, 2] = 1
    u[..., 3, 3] = np.exp(-4j * action)
    return u


def u_zz(theta, epsilon=0.0) -> np.ndarray:
    """exp(-i theta (1 + epsilon) Z Z)."""
    action = _action(theta, epsilon)[..., None]
    phases = np.exp(-1j * action * np.array([1, -1, -1, 1]))
    u = np.zeros(phases.shape[:-1] + (4, 4), dtype=complex)
    idx = np.arange(4)
    u[..., idx, idx] = phases
    return u


def u_xy(theta, epsilon=0.0) -> np.ndarray:
    """exp(-i theta (1 + epsilon) (X X + Y Y)).

    Acts as a rotation inside the single-excitation block {|01>, |10>}.
    """
    angle = 2 * _action(theta, epsilon)
    u = np.zeros(angle.shape + (4, 4), dtype=complex)
    c, s = np.cos(angle), np.sin(angle)
    u[..., 0, 0] = u[..., 3, 3] = 1
    u[..., 1, 1] = u[..., 2, 2] = c
    u[..., 1, 2] = u[..., 2, 1] = -1j * s
    return u


TWO_QUBIT_GATES = {
    InteractionKind.CP: u_cp,
    InteractionKind.ZZ: u_zz,
    InteractionKind.XY: u_xy,
}


def two_qubit_gate(kind, theta, epsilon=0.0) -> np.ndarray:
    return TWO_QUBIT_GATES[InteractionKind.parse(kind)](theta, epsilon)


def r_z(phi) -> np.ndarray:
    """exp(-i phi Z / 2)."""
    return np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)]).astype(complex)


def r_x(delta) -> np.ndarray:
    """exp(-i delta X / 2)."""
    c, s = np.cos(delta / 2), np.sin(delta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


# exact matrix period of each family in theta*(1+epsilon); ZZ repeats up to a
# sign after pi, exactly after 2pi
ACTION_PERIOD = {
    InteractionKind.CP: np.pi / 2,
    InteractionKind.ZZ: 2 * np.pi,
    InteractionKind.XY: np.pi,
}
