"""Dense statevector engine.

Qubits are labelled 1..N. Qubit 1 is the most significant bit of the
amplitude index, so a two-qubit register is ordered |00>, |01>, |10>, |11>
with the first label belonging to qubit 1.

Operations mutate the state in place and return it, so calls can be chained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 24
NORM_TOL = 1e-12
UNITARY_TOL = 1e-10
IMPOSSIBLE_BRANCH = 1e-15

SQRT_HALF = 1.0 / np.sqrt(2.0)

ZERO = np.array([1.0, 0.0], dtype=complex)
ONE = np.array([0.0, 1.0], dtype=complex)
PLUS_X = np.array([SQRT_HALF, SQRT_HALF], dtype=complex)
MINUS_X = np.array([SQRT_HALF, -SQRT_HALF], dtype=complex)
PLUS_Y = np.array([SQRT_HALF, 1j * SQRT_HALF], dtype=complex)
MINUS_Y = np.array([SQRT_HALF, -1j * SQRT_HALF], dtype=complex)

# rows are <+x| and <-x|, i.e. the Hadamard matrix
X_BASIS_BRAS = np.array([[SQRT_HALF, SQRT_HALF], [SQRT_HALF, -SQRT_HALF]], dtype=complex)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class QubitIndexError(IndexError):
    pass


class ImpossibleBranchError(ValueError):
    """Raised when a measurement outcome with vanishing probability is forced."""


@dataclass(frozen=True)
class BlochOrientation:
    """Direction of a pure input qubit on the Bloch sphere.

    ``theta0`` is the polar angle in [0, pi]; ``phi0`` the azimuth, reduced
    into [0, 2pi).
    """

    theta0: float
    phi0: float

    def __post_init__(self):
        theta0 = float(self.theta0)
        phi0 = float(self.phi0)
        if not (np.isfinite(theta0) and np.isfinite(phi0)):
            raise ValueError("Bloch angles must be finite")
        if theta0 < -1e-12 or theta0 > np.pi + 1e-12:
            raise ValueError(f"theta0={theta0} outside [0, pi]")
        object.__setattr__(self, "theta0", min(max(theta0, 0.0), np.pi))
        object.__setattr__(self, "phi0", phi0 % (2 * np.pi))

    @property
    def vector(self) -> np.ndarray:
        st = np.sin(self.theta0)
        return np.array([st * np.cos(self.phi0), st * np.sin(self.phi0), np.cos(self.theta0)])

    def state(self) -> np.ndarray:
        return single_qubit_state(self.theta0, self.phi0)

    @classmethod
    def from_vector(cls, r) -> "BlochOrientation":
        x, y, z = np.asarray(r, dtype=float) / np.linalg.norm(r)
        return cls(float(np.arccos(np.clip(z, -1.0, 1.0))), float(np.arctan2(y, x)))


PLUS_Y_AXIS = BlochOrientation(np.pi / 2, np.pi / 2)
MINUS_Y_AXIS = BlochOrientation(np.pi / 2, 3 * np.pi / 2)


def single_qubit_state(theta0: float, phi0: float) -> np.ndarray:
    """cos(theta0/2)|0> + exp(i phi0) sin(theta0/2)|1>."""
    return np.array([np.cos(theta0 / 2), np.exp(1j * phi0) * np.sin(theta0 / 2)], dtype=complex)


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.num_qubits,):
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes, got shape {self.amplitudes.shape}"
            )

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def tensor(self) -> np.ndarray:
        """View of the amplitudes with one axis per qubit (qubit 1 first)."""
        return self.amplitudes.reshape((2,) * self.num_qubits)


def product_state(states) -> StateVector:
    """Tensor product of single-qubit states, qubit 1 first."""
    states = [np.asarray(s, dtype=complex) for s in states]
    if not states:
        raise ValueError("product_state needs at least one qubit")
    amps = states[0]
    for s in states[1:]:
        amps = np.kron(amps, s)
    for s in states:
        if s.shape != (2,) or abs(np.vdot(s, s).real - 1.0) > NORM_TOL:
            raise ValueError("each single-qubit state must be a normalized 2-vector")
    return StateVector(len(states), amps)


def _check_qubit(state: StateVector, q: int) -> int:
    if not isinstance(q, (int, np.integer)) or not 1 <= q <= state.num_qubits:
        raise QubitIndexError(f"qubit {q} out of range 1..{state.num_qubits}")
    return int(q) - 1


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u @ u.conj().T, np.eye(u.shape[0]), atol=tol, rtol=0.0
    )


def apply_matrix(tensor: np.ndarray, u: np.ndarray, axes) -> np.ndarray:
    """Apply a k-qubit matrix to the given tensor axes (first axis most significant).

    Works on any tensor whose listed axes have length 2, which lets callers
    carry extra batch axes.
    """
    axes = tuple(axes)
    k = len(axes)
    out = np.tensordot(u.reshape((2,) * (2 * k)), tensor, axes=(tuple(range(k, 2 * k)), axes))
    return np.moveaxis(out, tuple(range(k)), axes)


def apply_matrix_batched(tensor: np.ndarray, u: np.ndarray, axes) -> np.ndarray:
    """Like :func:`apply_matrix`, with one matrix per entry of the leading tensor axis.

    ``u`` has shape ``(S, 2**k, 2**k)`` and ``tensor`` has ``S`` as its first
    axis; ``axes`` must not include axis 0.
    """
    axes = tuple(axes)
    k = len(axes)
    moved = np.moveaxis(tensor, axes, tuple(range(-k, 0)))
    shape = moved.shape
    flat = moved.reshape(shape[0], -1, 2**k)
    out = np.matmul(flat, np.swapaxes(u, 1, 2)).reshape(shape)
    return np.moveaxis(out, tuple(range(-k, 0)), axes)


def apply_1q(state: StateVector, q: int, u) -> StateVector:
    axis = _check_qubit(state, q)
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u):
        raise ValueError("apply_1q needs a 2x2 unitary")
    state.amplitudes = apply_matrix(state.tensor(), u, (axis,)).reshape(-1)
    return state


def apply_2q(state: StateVector, qi: int, qj: int, u) -> StateVector:
    """Apply a 4x4 unitary with ``qi`` as the more significant tensor factor."""
    ai = _check_qubit(state, qi)
    aj = _check_qubit(state, qj)
    if ai == aj:
        raise QubitIndexError("apply_2q needs two distinct qubits")
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4) or not is_unitary(u):
        raise ValueError("apply_2q needs a 4x4 unitary")
    state.amplitudes = apply_matrix(state.tensor(), u, (ai, aj)).reshape(-1)
    return state


def project_x(state: StateVector, q: int, outcome: int) -> tuple[float, np.ndarray]:
    """Unnormalized projection of qubit ``q`` onto the x-eigenstate with eigenvalue (-1)**outcome.

    Returns the branch probability and the projected amplitudes.
    """
    axis = _check_qubit(state, q)
    if outcome not in (0, 1):
        raise ValueError("measurement outcome must be 0 or 1")
    t = np.moveaxis(state.tensor(), axis, 0)
    component = X_BASIS_BRAS[outcome, 0] * t[0] + X_BASIS_BRAS[outcome, 1] * t[1]
    prob = float(np.vdot(component, component).real)
    ket = X_BASIS_BRAS[outcome].conj()
    projected = np.moveaxis(np.stack([ket[0] * component, ket[1] * component]), 0, axis)
    return prob, projected.reshape(-1)


def measure_x(state: StateVector, q: int, forced_outcome: int | None = None, rng=None):
    """Projective measurement of qubit ``q`` along x.

    With ``forced_outcome`` the branch is selected deterministically; otherwise
    it is sampled with ``rng`` (a numpy Generator). Returns ``(s, p, state)``
    where ``p`` is the probability of the returned outcome and the state is
    renormalized in place.
    """
    if forced_outcome is None:
        if rng is None:
            rng = np.random.default_rng()
        p0, proj0 = project_x(state, q, 0)
        if rng.random() < p0:
            s, p, proj = 0, p0, proj0
        else:
            s = 1
            p, proj = project_x(state, q, 1)
    else:
        s = int(forced_outcome)
        p, proj = project_x(state, q, s)
    if p < IMPOSSIBLE_BRANCH:
        raise ImpossibleBranchError(f"outcome {s} on qubit {q} has probability {p:.3e}")
    state.amplitudes = proj / np.sqrt(p)
    return s, p, state


def reduced_qubit_state(state: StateVector, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Density matrix of qubit ``q`` and its Bloch vector (<X>, <Y>, <Z>)."""
    axis = _check_qubit(state, q)
    t = np.moveaxis(state.tensor(), axis, 0).reshape(2, -1)
    rho = t @ t.conj().T
    bloch = np.array(
        [np.trace(rho @ p).real for p in (PAULI_X, PAULI_Y, PAULI_Z)]
    )
    return rho, bloch


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))
