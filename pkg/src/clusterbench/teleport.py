"""Teleportation through the chain: x-measurements, byproduct correction, fidelity.

Three execution routes give the same numbers:

* :func:`teleport_fidelity` builds the full chain and enumerates every
  measurement branch with forced projective measurements.
* :func:`refresh_teleport` holds at most ``window`` live qubits, measuring and
  discarding qubits as soon as all gates touching them have run.
* :class:`TeleportChannel` extracts one corrected 2x2 operator per branch, so
  the fidelity of many input directions costs one small contraction. The
  benchmarking harness uses this route.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import builder
from .builder import ChainSpec
from .gates import InteractionKind
from .statevec import (
    IMPOSSIBLE_BRANCH,
    PAULI_X,
    PAULI_Z,
    X_BASIS_BRAS,
    BlochOrientation,
    StateVector,
    apply_matrix,
    measure_x,
    project_x,
)

QUANTUM_THRESHOLD = 2.0 / 3.0
CLASSICAL_THRESHOLD = 0.5


class ByproductVariant(str, enum.Enum):
    STANDARD = "standard"
    XZ_SWAPPED = "xz_swapped"


def variant_for(kind) -> ByproductVariant:
    if InteractionKind.parse(kind) is InteractionKind.XY:
        return ByproductVariant.XZ_SWAPPED
    return ByproductVariant.STANDARD


def byproduct(record, variant=ByproductVariant.STANDARD) -> np.ndarray:
    """Accumulated Pauli correction for outcomes s_1..s_{N-1}.

    Standard: X^a Z^b with a the parity of the outcomes on even-labelled
    qubits and b the parity on odd-labelled ones. The swapped variant (XY
    chains) exchanges the roles of X and Z.
    """
    record = [int(s) for s in record]
    if len(record) % 2:
        raise ValueError(
            f"byproduct needs an odd chain (even number of measured qubits), got {len(record)} outcomes"
        )
    if any(s not in (0, 1) for s in record):
        raise ValueError("outcomes must be 0 or 1")
    a = sum(record[1::2]) % 2
    b = sum(record[0::2]) % 2
    first, second = (PAULI_X, PAULI_Z)
    if ByproductVariant(variant) is ByproductVariant.XZ_SWAPPED:
        first, second = second, first
    return np.linalg.matrix_power(first, a) @ np.linalg.matrix_power(second, b)


def channel_class(fidelity: float) -> str:
    if fidelity > QUANTUM_THRESHOLD:
        return "quantum"
    if fidelity > CLASSICAL_THRESHOLD:
        return "indeterminate"
    return "classical"


@dataclass
class Branch:
    record: tuple
    probability: float
    output: np.ndarray | None  # normalized state of qubit N; None for impossible branches


def _output_state(state: StateVector, record) -> np.ndarray:
    """Qubit-N amplitudes once qubits 1..N-1 sit in the x-eigenstates given by ``record``."""
    t = state.tensor()
    for s in record:
        t = np.tensordot(X_BASIS_BRAS[s], t, axes=([0], [0]))
    return t / np.linalg.norm(t)


def enumerate_branches(state: StateVector) -> list[Branch]:
    """All 2**(N-1) outcome records of x-measurements on qubits 1..N-1.

    Branches are visited depth first with forced outcomes. Branches whose
    probability falls below 1e-15 are kept with ``output=None``.
    """
    n = state.num_qubits
    if n < 3:
        raise ValueError("teleportation needs at least 3 qubits")
    branches: list[Branch] = []

    def descend(current: StateVector, q: int, record: tuple, prob: float):
        if q == n:
            branches.append(Branch(record, prob, _output_state(current, record)))
            return
        for s in (0, 1):
            p, _ = project_x(current, q, s)
            if prob * p < IMPOSSIBLE_BRANCH:
                branches.append(_dead_branch(record + (s,), n, prob * p))
                continue
            nxt = current.copy()
            measure_x(nxt, q, forced_outcome=s)
            descend(nxt, q + 1, record + (s,), prob * p)

    descend(state.copy(), 1, (), 1.0)
    return branches


def _dead_branch(prefix: tuple, n: int, prob: float) -> Branch:
    # collapse the unreachable subtree into a single record padded with zeros
    return Branch(prefix + (0,) * (n - 1 - len(prefix)), prob, None)


def branch_fidelity(target: np.ndarray, output: np.ndarray, record, variant) -> float:
    u = byproduct(record, variant)
    return float(abs(np.vdot(target, u @ output)) ** 2)


@dataclass
class FidelityReport:
    kind: InteractionKind
    n_total: int
    error_model: object
    input: BlochOrientation
    bond_errors: tuple
    records: list
    probabilities: np.ndarray
    branch_fidelities: np.ndarray
    weighted_fidelity: float
    min_branch: float
    max_branch: float
    branch_spread: float
    excluded_mass: float = 0.0
    window: int | None = None

    @property
    def channel(self) -> str:
        return channel_class(self.weighted_fidelity)

    def to_dict(self, verbose: bool = False) -> dict:
        out = {
            "kind": self.kind.value,
            "n_total": self.n_total,
            "error_model": _model_dict(self.error_model),
            "input": {"theta0": self.input.theta0, "phi0": self.input.phi0},
            "bond_errors": list(self.bond_errors),
            "weighted_fidelity": self.weighted_fidelity,
            "min_branch": self.min_branch,
            "max_branch": self.max_branch,
            "branch_spread": self.branch_spread,
            "excluded_mass": self.excluded_mass,
            "channel": self.channel,
            "n_branches": len(self.records),
        }
        if self.window is not None:
            out["refresh_window"] = self.window
        if verbose:
            out["branches"] = [
                {"record": list(r), "probability": float(p), "fidelity": float(f)}
                for r, p, f in zip(self.records, self.probabilities, self.branch_fidelities)
            ]
        return out


def _model_dict(model) -> dict:
    if isinstance(model, builder.Uniform):
        return {"type": "uniform", "epsilon": model.epsilon}
    if isinstance(model, builder.GaussianPerBond):
        return {"type": "gaussian", "sigma": model.sigma, "seed": model.seed}
    if isinstance(model, builder.Explicit):
        return {"type": "explicit", "epsilons": list(model.epsilons)}
    return {"type": repr(model)}


def _report(spec, input, errors, branches, window=None) -> FidelityReport:
    target = input.state()
    variant = variant_for(spec.kind)
    live = [b for b in branches if b.output is not None]
    records = [b.record for b in live]
    probs = np.array([b.probability for b in live])
    fids = np.array([branch_fidelity(target, b.output, b.record, variant) for b in live])
    excluded = float(sum(b.probability for b in branches if b.output is None))
    weighted = float(np.dot(probs, fids) / probs.sum())
    return FidelityReport(
        kind=spec.kind,
        n_total=spec.n_total,
        error_model=spec.error_model,
        input=input,
        bond_errors=tuple(errors),
        records=records,
        probabilities=probs,
        branch_fidelities=fids,
        weighted_fidelity=weighted,
        min_branch=float(fids.min()),
        max_branch=float(fids.max()),
        branch_spread=float(fids.max() - fids.min()),
        excluded_mass=excluded,
        window=window,
    )


def teleport_fidelity(spec: ChainSpec, input: BlochOrientation) -> FidelityReport:
    """Build the chain, enumerate all branches and average the corrected fidelities."""
    state, errors = builder.build_chain(spec, input)
    return _report(spec, input, errors, enumerate_branches(state))


def sample_run(spec: ChainSpec, input: BlochOrientation, seed) -> tuple[tuple, float]:
    """One randomly sampled measurement trajectory and its corrected fidelity."""
    rng = np.random.default_rng(seed)
    state, _ = builder.build_chain(spec, input)
    record = []
    for q in range(1, spec.n_total):
        s, _, _ = measure_x(state, q, rng=rng)
        record.append(s)
    output = _output_state(state, record)
    return tuple(record), branch_fidelity(input.state(), output, record, variant_for(spec.kind))


# -- refreshing -------------------------------------------------------------


@dataclass
class _LiveBranch:
    record: dict
    probability: float
    labels: list  # chain label of each live register position
    amps: np.ndarray  # tensor with one axis per live qubit


def _discard_measured(branch: _LiveBranch, label: int, outcome: int) -> tuple[float, np.ndarray]:
    axis = branch.labels.index(label)
    t = np.tensordot(X_BASIS_BRAS[outcome], branch.amps, axes=([0], [axis]))
    return float(np.vdot(t, t).real), t


def refresh_teleport(spec: ChainSpec, input: BlochOrientation, window: int) -> FidelityReport:
    """Teleport along an N-qubit chain while holding at most ``window`` qubits.

    Fresh qubits are entangled as register space frees up. A gate runs as
    soon as its qubits are live and every earlier gate sharing a qubit has
    run; a qubit is measured and discarded once no pending gate touches it.
    Gate order per qubit is that of the full-chain program, so the result
    equals :func:`teleport_fidelity` branch by branch.
    """
    if window < 3:
        raise ValueError(f"refresh window must be at least 3, got {window}")
    n = spec.n_total
    errors = builder.realize_errors(spec)
    ops = builder.program(spec.kind, errors)
    done = [False] * len(ops)
    fresh = builder.fresh_state(spec.kind)

    branches = [_LiveBranch({}, 1.0, [], np.ones(()))]
    next_label = 1
    measured = set()
    dead: list[Branch] = []

    while True:
        live_labels = list(branches[0].labels) if branches else []
        while len(live_labels) < window and next_label <= n:
            ket = input.state() if next_label == 1 else fresh
            for br in branches:
                br.amps = np.multiply.outer(br.amps, ket)
                br.labels.append(next_label)
            live_labels.append(next_label)
            next_label += 1

        progressed = False
        blocked: set = set()
        for i, op in enumerate(ops):
            if done[i]:
                continue
            ready = all(q in live_labels for q in op.qubits) and not blocked.intersection(op.qubits)
            if ready:
                for br in branches:
                    br.amps = apply_matrix(br.amps, op.matrix, tuple(br.labels.index(q) for q in op.qubits))
                done[i] = True
                progressed = True
            else:
                blocked.update(op.qubits)

        pending = {q for i, op in enumerate(ops) if not done[i] for q in op.qubits}
        complete = sorted(q for q in live_labels if q != n and q not in pending and q not in measured)
        for q in complete:
            split = []
            for br in branches:
                for s in (0, 1):
                    p, t = _discard_measured(br, q, s)
                    prob = br.probability * p
                    rec = dict(br.record)
                    rec[q] = s
                    if prob < IMPOSSIBLE_BRANCH:
                        dead.append(Branch(tuple(rec.get(k, 0) for k in range(1, n)), prob, None))
                        continue
                    labels = [x for x in br.labels if x != q]
                    split.append(_LiveBranch(rec, prob, labels, t / np.sqrt(p)))
            branches = split
            measured.add(q)
            progressed = True

        if len(measured) == n - 1 and all(done):
            break
        if not progressed:
            raise ValueError(f"window {window} is too small to run the {spec.kind.value} program")

    finished = [
        Branch(tuple(br.record[k] for k in range(1, n)), br.probability, br.amps.reshape(2))
        for br in branches
    ]
    return _report(spec, input, errors, finished + dead, window=window)


# -- channel form -----------------------------------------------------------


def _records(n: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=n - 1)), dtype=int)


@functools.lru_cache(maxsize=None)
def _corrections(n: int, variant: ByproductVariant) -> np.ndarray:
    out = np.array([byproduct(r, variant) for r in _records(n)])
    out.flags.writeable = False
    return out


def _branch_operators(kind, amplitudes: np.ndarray, n: int):
    """(corrected, raw) branch operators from basis-input chains of shape (..., 2, 2**N)."""
    lead = amplitudes.shape[:-2]
    t = amplitudes.reshape(lead + (2,) * (n + 1))
    # x-basis readout of qubits 1..N-1 in one pass
    for q in range(1, n):
        t = apply_matrix(t, X_BASIS_BRAS, (len(lead) + q,))
    raw = np.moveaxis(t.reshape(lead + (2, 2 ** (n - 1), 2)), len(lead), -1)  # (..., branch, out, in)
    return _corrections(n, variant_for(kind)) @ raw, raw


def channel_operators_batched(kind, errors) -> np.ndarray:
    """Corrected branch operators for many realizations; ``errors`` has shape (S, N - 1)."""
    kind = InteractionKind.parse(kind)
    errors = np.atleast_2d(np.asarray(errors, dtype=float))
    amps = builder.chain_amplitudes_batched(kind, errors)
    return _branch_operators(kind, amps, errors.shape[1] + 1)[0]


def batched_fidelity(operators: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Fidelity of realization s at input ``states[s]``; operators have shape (S, B, 2, 2)."""
    states = np.asarray(states, dtype=complex)
    amp = np.einsum("si,sbij,sj->sb", states.conj(), operators, states, optimize=True)
    return np.sum(np.abs(amp) ** 2, axis=1)


@dataclass
class TeleportChannel:
    """Corrected branch operators M_b = U_Sigma(b) A_b of one chain realization.

    ``A_b`` maps the input qubit amplitudes to the unnormalized qubit-N
    amplitudes of branch b, so for any input |psi> the branch probability is
    ||A_b psi||^2 and the weighted fidelity is sum_b |<psi| M_b |psi>|^2.
    """

    kind: InteractionKind
    bond_errors: tuple
    operators: np.ndarray  # (2**(N-1), 2, 2), corrected
    raw: np.ndarray = field(repr=False)  # (2**(N-1), 2, 2), uncorrected

    @classmethod
    def from_errors(cls, kind, errors) -> "TeleportChannel":
        kind = InteractionKind.parse(kind)
        n = len(errors) + 1
        amps = builder.chain_amplitudes(kind, errors, np.eye(2, dtype=complex))
        corrected, raw = _branch_operators(kind, amps, n)
        return cls(kind, tuple(float(e) for e in errors), corrected, raw)

    @classmethod
    def from_spec(cls, spec: ChainSpec) -> "TeleportChannel":
        return cls.from_errors(spec.kind, builder.realize_errors(spec))

    def fidelity(self, states: np.ndarray) -> np.ndarray:
        """Weighted fidelity for input amplitudes of shape (2,) or (S, 2)."""
        states = np.asarray(states, dtype=complex)
        single = states.ndim == 1
        states = np.atleast_2d(states)
        amp = np.einsum("si,bij,sj->sb", states.conj(), self.operators, states, optimize=True)
        f = np.sum(np.abs(amp) ** 2, axis=1)
        return float(f[0]) if single else f

    def probabilities(self, state: np.ndarray) -> np.ndarray:
        out = self.raw @ np.asarray(state, dtype=complex)
        return np.sum(np.abs(out) ** 2, axis=1)

    def quadratic_form(self):
        """(c, g, Q) with fidelity(r) = c + g.r + r.Q.r for Bloch vectors r."""
        m0 = np.trace(self.operators, axis1=1, axis2=2)
        m = np.stack(
            [np.trace(self.operators @ p, axis1=1, axis2=2) for p in (PAULI_X, _PAULI_Y, PAULI_Z)],
            axis=1,
        )
        c = float(np.sum(np.abs(m0) ** 2).real) / 4
        g = np.real(np.sum(np.conj(m0)[:, None] * m, axis=0)) / 2
        q = np.real(np.einsum("bi,bj->ij", np.conj(m), m)) / 4
        return c, g, (q + q.T) / 2


_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
