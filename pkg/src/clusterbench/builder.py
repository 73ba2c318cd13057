"""Input-plus-cluster chain preparation for the CP, Ising and XY protocols.

Qubit 1 carries the input state and qubit N is the output. Each protocol is
expressed as a *program*: an ordered list of gate operations. The full-chain
builders run the program start to finish; the refreshing simulator in
:mod:`clusterbench.teleport` replays the same program in a different but
dependency-preserving order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import gates
from .gates import InteractionKind
from .statevec import PLUS_X, PLUS_Y, BlochOrientation, StateVector, apply_matrix, apply_matrix_batched

CLUSTER_ANGLE = np.pi / 4


@dataclass(frozen=True)
class Uniform:
    epsilon: float


@dataclass(frozen=True)
class GaussianPerBond:
    sigma: float
    seed: int

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")


@dataclass(frozen=True)
class Explicit:
    epsilons: tuple

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))


ErrorModel = Union[Uniform, GaussianPerBond, Explicit]


@dataclass(frozen=True)
class ChainSpec:
    kind: InteractionKind
    n_total: int
    error_model: ErrorModel = field(default_factory=lambda: Uniform(0.0))

    def __post_init__(self):
        object.__setattr__(self, "kind", InteractionKind.parse(self.kind))
        n = self.n_total
        if not isinstance(n, (int, np.integer)) or n < 3 or n % 2 == 0:
            raise ValueError(
                f"n_total must be an odd integer >= 3 (the byproduct rule holds for odd N), got {n}"
            )

    @property
    def n_bonds(self) -> int:
        return self.n_total - 1


BondErrors = tuple


def realize_errors(spec: ChainSpec) -> BondErrors:
    """One epsilon per bond (1,2), (2,3), ..., (N-1,N)."""
    model = spec.error_model
    nb = spec.n_bonds
    if isinstance(model, Uniform):
        return tuple(float(model.epsilon) for _ in range(nb))
    if isinstance(model, GaussianPerBond):
        if model.sigma == 0:
            return tuple(0.0 for _ in range(nb))
        rng = np.random.default_rng(model.seed)
        return tuple(float(e) for e in rng.normal(0.0, model.sigma, size=nb))
    if isinstance(model, Explicit):
        if len(model.epsilons) != nb:
            raise ValueError(f"explicit error list has {len(model.epsilons)} entries, chain has {nb} bonds")
        return tuple(model.epsilons)
    raise TypeError(f"unsupported error model {model!r}")


@dataclass(frozen=True)
class Op:
    qubits: tuple
    matrix: np.ndarray
    label: str = ""


def fresh_state(kind: InteractionKind) -> np.ndarray:
    return PLUS_Y if InteractionKind.parse(kind) is InteractionKind.XY else PLUS_X


def program(kind, errors: Sequence[float]) -> list[Op]:
    """Gate list (in order of application) preparing the chain from the product state.

    Each entry of ``errors`` may also be a 1-D array of realizations, in
    which case the two-qubit matrices are stacked with shape ``(S, 4, 4)``.
    """
    kind = InteractionKind.parse(kind)
    n = len(errors) + 1
    ops: list[Op] = []
    if kind is InteractionKind.CP:
        for b, eps in enumerate(errors, start=1):
            ops.append(Op((b, b + 1), gates.u_cp(CLUSTER_ANGLE, eps), f"CP{b},{b + 1}"))
    elif kind is InteractionKind.ZZ:
        rot = gates.r_z(-np.pi / 2)
        for b, eps in enumerate(errors, start=1):
            ops.append(Op((b, b + 1), gates.u_zz(CLUSTER_ANGLE, eps), f"ZZ{b},{b + 1}"))
            ops.append(Op((b,), rot, f"RZ{b}"))
            ops.append(Op((b + 1,), rot, f"RZ{b + 1}"))
    else:
        # even bonds (2,3), (4,5), ... first, then odd bonds, then R_Z(pi/2)
        # on every qubit except the output
        for parity in (0, 1):
            for b, eps in enumerate(errors, start=1):
                if b % 2 == parity:
                    ops.append(Op((b, b + 1), gates.u_xy(CLUSTER_ANGLE, eps), f"XY{b},{b + 1}"))
        rot = gates.r_z(np.pi / 2)
        for q in range(1, n):
            ops.append(Op((q,), rot, f"RZ{q}"))
    return ops


def _orientation_state(input) -> np.ndarray:
    if isinstance(input, BlochOrientation):
        return input.state()
    return np.asarray(input, dtype=complex)


def chain_amplitudes(kind, errors: Sequence[float], first: np.ndarray) -> np.ndarray:
    """Run the program with qubit 1 set to ``first``.

    ``first`` may carry leading batch axes (shape ``(..., 2)``); the result
    has shape ``(..., 2**N)``. Because the preparation is linear in the input
    qubit, passing the identity matrix yields the two basis-input chains at once.
    """
    kind = InteractionKind.parse(kind)
    first = np.asarray(first, dtype=complex)
    batch = first.shape[:-1]
    nb = len(batch)
    n = len(errors) + 1
    t = first
    fresh = fresh_state(kind)
    for _ in range(n - 1):
        t = np.multiply.outer(t, fresh)
    for op in program(kind, errors):
        t = apply_matrix(t, op.matrix, tuple(nb + q - 1 for q in op.qubits))
    return t.reshape(batch + (2**n,))


def chain_amplitudes_batched(kind, errors: np.ndarray) -> np.ndarray:
    """Basis-input chains for many error realizations at once.

    ``errors`` has shape ``(S, N - 1)``. Returns shape ``(S, 2, 2**N)`` where
    index ``[s, k]`` is the chain of realization ``s`` with qubit 1 set to |k>.
    """
    kind = InteractionKind.parse(kind)
    errors = np.atleast_2d(np.asarray(errors, dtype=float))
    s, nb = errors.shape
    n = nb + 1
    t = np.broadcast_to(np.eye(2, dtype=complex), (s, 2, 2))
    fresh = fresh_state(kind)
    for _ in range(n - 1):
        t = np.multiply.outer(t, fresh)
    for op in program(kind, list(errors.T)):
        axes = tuple(1 + q for q in op.qubits)
        if op.matrix.ndim == 3:
            t = apply_matrix_batched(t, op.matrix, axes)
        else:
            t = apply_matrix(t, op.matrix, axes)
    return t.reshape(s, 2, 2**n)


def _build(spec: ChainSpec, input, expected: InteractionKind):
    if spec.kind is not expected:
        raise ValueError(f"build_{expected.value} called with a {spec.kind.value} chain spec")
    errors = realize_errors(spec)
    amps = chain_amplitudes(spec.kind, errors, _orientation_state(input))
    return StateVector(spec.n_total, amps), errors


def build_cp(spec: ChainSpec, input: BlochOrientation):
    """CPhase(pi/4, eps_b) on every bond of |psi_in> (x) |+x>^(N-1)."""
    return _build(spec, input, InteractionKind.CP)


def build_zz(spec: ChainSpec, input: BlochOrientation):
    """Per bond: Ising(pi/4, eps_b), then R_Z(-pi/2) on both ends."""
    return _build(spec, input, InteractionKind.ZZ)


def build_xy(spec: ChainSpec, input: BlochOrientation):
    """Twisted cluster from |psi_in> (x) |+y>^(N-1) with two XY layers."""
    return _build(spec, input, InteractionKind.XY)


BUILDERS = {
    InteractionKind.CP: build_cp,
    InteractionKind.ZZ: build_zz,
    InteractionKind.XY: build_xy,
}


def build_chain(spec: ChainSpec, input: BlochOrientation):
    return BUILDERS[spec.kind](spec, input)
