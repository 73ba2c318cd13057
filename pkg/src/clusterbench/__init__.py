"""Cluster-state teleportation under error-prone two-qubit interactions."""

from .builder import ChainSpec, Explicit, GaussianPerBond, Uniform, build_chain
from .gates import InteractionKind
from .statevec import BlochOrientation, StateVector
from .teleport import FidelityReport, TeleportChannel, refresh_teleport, teleport_fidelity

__version__ = "0.1.0"

__all__ = [
    "BlochOrientation",
    "ChainSpec",
    "Explicit",
    "FidelityReport",
    "GaussianPerBond",
    "InteractionKind",
    "StateVector",
    "TeleportChannel",
    "Uniform",
    "build_chain",
    "refresh_teleport",
    "teleport_fidelity",
]
