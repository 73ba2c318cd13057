"""Refocused two-qubit gates that push a static interaction error from eps^2 to eps^4.

Each refocused gate is built as a :class:`PulseSequence` whose written order
follows operator notation: the rightmost element acts first. Matrices act on
two qubits with qubit 1 as the more significant factor.

Angle conventions
-----------------
ZZ and XY gates take ``theta = J t`` as in :mod:`clusterbench.gates`. The
error-cancelling pulse angle must satisfy ``theta = 4 pi cos(delta)`` (ZZ)
or ``theta = 4 pi cos(alpha)`` (XY); the defaults solve this for the angle.

For the CP family ``theta`` is the conditional phase, so the raw gate is
``u_cp(theta / 4, eps) = diag(1, 1, 1, exp(-i theta (1 + eps)))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import brentq

from . import gates
from .analytics import taylor_coefficients
from .gates import InteractionKind
from .statevec import is_unitary

IDENTITY_4 = np.eye(4, dtype=complex)


@dataclass(frozen=True)
class TwoQubit:
    kind: InteractionKind
    theta: float
    epsilon: complex

    def matrix(self) -> np.ndarray:
        return gates.two_qubit_gate(self.kind, self.theta, self.epsilon)

    def describe(self) -> str:
        return f"{InteractionKind.parse(self.kind).value.upper()}(theta={_fmt(self.theta)}, eps={_fmt(self.epsilon)})"


@dataclass(frozen=True)
class OneQubitX:
    target: int
    delta: float

    def matrix(self) -> np.ndarray:
        return _on_qubit(self.target, gates.r_x(self.delta))

    def describe(self) -> str:
        return f"RX[q{self.target}]({_fmt(self.delta)})"


@dataclass(frozen=True)
class OneQubitZ:
    target: int
    alpha: float

    def matrix(self) -> np.ndarray:
        return _on_qubit(self.target, gates.r_z(self.alpha))

    def describe(self) -> str:
        return f"RZ[q{self.target}]({_fmt(self.alpha)})"


Primitive = Union[TwoQubit, OneQubitX, OneQubitZ]


def _fmt(x) -> str:
    x = complex(x)
    return f"{x.real:.6g}" if x.imag == 0 else f"{x:.6g}"


def _on_qubit(target: int, u: np.ndarray) -> np.ndarray:
    if target == 1:
        return np.kron(u, gates.IDENTITY_2)
    if target == 2:
        return np.kron(gates.IDENTITY_2, u)
    raise ValueError(f"two-qubit pulse target must be 1 or 2, got {target}")


@dataclass(frozen=True)
class PulseSequence:
    elements: tuple  # written order; the last element acts first

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        return PulseSequence(self.elements + other.elements)

    def matrix(self) -> np.ndarray:
        out = IDENTITY_4
        for el in self.elements:
            out = out @ el.matrix()
        return out

    def in_order_of_action(self) -> list:
        return list(reversed(self.elements))

    def two_qubit_count(self) -> int:
        return sum(isinstance(el, TwoQubit) for el in self.elements)

    def dump(self) -> list[str]:
        return [f"{i + 1:2d}. {el.describe()}" for i, el in enumerate(self.in_order_of_action())]


def _seq(*elements) -> PulseSequence:
    flat = []
    for el in elements:
        flat.extend(el.elements if isinstance(el, PulseSequence) else [el])
    return PulseSequence(tuple(flat))


# -- time-scale matching ----------------------------------------------------


def _timescale_residual(x, j):
    return 8 * np.pi * np.cos(x) / x - j


def solve_timescale(j_over_b: float, family="zz") -> float:
    """Root x of 8 pi cos(x) / x = j_over_b (x is delta for ZZ, alpha for XY).

    For x > 0 the left side falls from +inf to a minimum of about -8.457 near
    x = 2.798, then oscillates with amplitude below 8. Values above -8 have
    exactly one root in (0, pi); values down to the minimum are bracketed on
    a grid over (0, pi). Below that no positive root exists and the odd
    symmetry x -> -x gives a negative one.
    """
    InteractionKind.parse(family)
    j = float(j_over_b)
    if not math.isfinite(j):
        raise ValueError("j_over_b must be finite")
    if j > -8.0:
        return float(brentq(_timescale_residual, 1e-300, np.pi, args=(j,), xtol=1e-15))
    grid = np.linspace(0.5, np.pi, 2049)
    vals = _timescale_residual(grid, j)
    idx = np.nonzero(vals <= 0)[0]
    if idx.size:
        i = idx[0]
        if vals[i] == 0:
            return float(grid[i])
        return float(brentq(_timescale_residual, grid[i - 1], grid[i], args=(j,), xtol=1e-15))
    return -solve_timescale(-j, family)


def matched_theta(angle: float) -> float:
    """Gate action theta = 4 pi cos(angle) that the ZZ and XY sequences require."""
    return 4 * np.pi * np.cos(angle)


def matched_angle(theta: float) -> float:
    ratio = theta / (4 * np.pi)
    if abs(ratio) > 1:
        raise ValueError(f"|theta / 4pi| must be <= 1 to choose the pulse angle, got {ratio:.6g}")
    return float(np.arccos(ratio))


# -- sequences --------------------------------------------------------------


def _conjugated_pair(pulse, inner: TwoQubit, angle: float) -> PulseSequence:
    """P(-a) W P(-a)^dag P(a) W P(a)^dag, with P(a)^dag = P(-a)."""
    return _seq(pulse(2, -angle), inner, pulse(2, angle), pulse(2, angle), inner, pulse(2, -angle))


def v_zz(theta, epsilon=0.0, delta=None):
    """Refocused Ising gate; returns (matrix, sequence)."""
    if delta is None:
        delta = matched_angle(theta)
    seq = _seq(
        _conjugated_pair(OneQubitX, TwoQubit(InteractionKind.ZZ, -2 * np.pi, epsilon), delta),
        TwoQubit(InteractionKind.ZZ, theta, epsilon),
    )
    return seq.matrix(), seq


def v_xy(theta, epsilon=0.0, alpha=None):
    """Refocused XY gate; Z-axis pulses replace the X-axis pulses of :func:`v_zz`."""
    if alpha is None:
        alpha = matched_angle(theta)
    seq = _seq(
        _conjugated_pair(OneQubitZ, TwoQubit(InteractionKind.XY, -2 * np.pi, epsilon), alpha),
        TwoQubit(InteractionKind.XY, theta, epsilon),
    )
    return seq.matrix(), seq


def _uex_sequence(theta, epsilon) -> PulseSequence:
    flip = (OneQubitX(1, np.pi), OneQubitX(2, np.pi))
    half = TwoQubit(InteractionKind.CP, theta / 2, epsilon)
    return _seq(*flip, half, *flip, half)


def u_ex(theta, epsilon=0.0):
    """Ising evolution extracted from two CP pulses sandwiched by X flips on both qubits.

    Equals u_zz(theta, epsilon) up to a global phase for any epsilon.
    """
    seq = _uex_sequence(theta, epsilon)
    return seq.matrix(), seq


def cp_gamma(theta) -> float:
    ratio = theta / (16 * np.pi)
    if abs(ratio) > 1:
        raise ValueError(f"|theta / 16pi| must be <= 1 for the default gamma, got {ratio:.6g}")
    return float(np.arccos(ratio))


def v_cp(theta, epsilon=0.0, gamma=None):
    """Refocused conditional phase diag(1, 1, 1, exp(-i theta)) built from CP pulses.

    Structure in written order: Z pulses of -theta/2 on both qubits, then the
    refocusing pair over extracted Ising pulses of action -2 pi, then the
    extracted Ising pulse of action theta / 4. Six CP pulses in total.
    """
    if gamma is None:
        gamma = cp_gamma(theta)
    head = _seq(OneQubitZ(1, -theta / 2), OneQubitZ(2, -theta / 2))
    refocus = _seq(
        OneQubitX(2, -gamma), _uex_sequence(-2 * np.pi, epsilon), OneQubitX(2, gamma),
        OneQubitX(2, gamma), _uex_sequence(-2 * np.pi, epsilon), OneQubitX(2, -gamma),
    )
    seq = _seq(head, refocus, _uex_sequence(theta / 4, epsilon))
    return seq.matrix(), seq


def cp_target(theta, epsilon=0.0) -> np.ndarray:
    return gates.u_cp(theta / 4, epsilon)


def gate_fidelity_2q(v, u) -> float:
    """|Tr(V U^dag)| / 4."""
    v = np.asarray(v, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if v.shape != (4, 4) or u.shape != (4, 4) or not (is_unitary(v) and is_unitary(u)):
        raise ValueError("gate_fidelity_2q needs two 4x4 unitaries")
    return float(abs(np.trace(v @ u.conj().T)) / 4)


# -- leading error ----------------------------------------------------------


def delta_u_zz(delta) -> np.ndarray:
    """Analytic eps^2 coefficient of V_ZZ - U_ZZ at matched theta = 4 pi cos(delta)."""
    d = -4j * np.pi**2 * np.exp(4j * np.pi * np.cos(delta)) * np.sin(2 * delta)
    dc = np.conj(d)
    return np.array([[0, d, 0, 0], [-dc, 0, 0, 0], [0, 0, 0, -dc], [0, 0, d, 0]], dtype=complex)


def delta_u_xy(alpha) -> np.ndarray:
    """Analytic eps^2 coefficient of V_XY - U_XY at matched theta = 4 pi cos(alpha)."""
    c = 16j * np.pi**2 * np.cos(8 * np.pi * np.cos(alpha)) * np.sin(2 * alpha)
    cp = -16 * np.pi**2 * np.sin(8 * np.pi * np.cos(alpha)) * np.sin(2 * alpha)
    return np.array(
        [[0, 0, 0, 0], [0, c, -cp, 0], [0, cp, np.conj(c), 0], [0, 0, 0, 0]], dtype=complex
    )


def error_expansion(family, angle, radius: float = 1e-3, order: int = 3):
    """Taylor coefficients in eps of V(eps) - U(0) for the ZZ or XY refocused gate.

    The refocused gate is analytic in eps, so the coefficients are read off
    a complex contour; this isolates the eps^2 term exactly, whereas a
    difference quotient at finite eps also picks up the eps^3 term.
    """
    family = InteractionKind.parse(family)
    theta = matched_theta(angle)
    if family is InteractionKind.ZZ:
        build, ideal = v_zz, gates.u_zz(theta, 0.0)
    elif family is InteractionKind.XY:
        build, ideal = v_xy, gates.u_xy(theta, 0.0)
    else:
        raise ValueError("error_expansion covers the ZZ and XY families")
    return taylor_coefficients(lambda e: build(theta, e, angle)[0] - ideal, radius, order)


# -- reports ----------------------------------------------------------------

DEFAULT_EPS_GRID = (1e-3, 2e-3, 5e-3, 1e-2)


def log_slope(eps, infidelity) -> float:
    """Slope of log infidelity against log eps; nan if any infidelity is not positive."""
    infidelity = np.asarray(infidelity, dtype=float)
    if np.any(infidelity <= 0):
        return float("nan")
    return float(np.polyfit(np.log(eps), np.log(infidelity), 1)[0])


def leading_coefficient(family, theta, angle) -> float:
    family = InteractionKind.parse(family)
    if family is InteractionKind.ZZ:
        return 8 * np.pi**4 * np.sin(2 * angle) ** 2
    if family is InteractionKind.XY:
        return 64 * np.pi**4 * np.sin(2 * angle) ** 2
    return -(theta**2) * (theta**2 - 256 * np.pi**2) / 2048


def raw_leading_coefficient(family, theta) -> float | None:
    """eps^2 coefficient of the raw infidelity where a closed form is at hand (CP only)."""
    if InteractionKind.parse(family) is InteractionKind.CP:
        return 3 * theta**2 / 32
    return None


def family_gates(family, theta, angle=None):
    """(raw(eps), refocused(eps), ideal, angle) for a family at the given theta."""
    family = InteractionKind.parse(family)
    if family is InteractionKind.ZZ:
        angle = matched_angle(theta) if angle is None else angle
        return (lambda e: gates.u_zz(theta, e)), (lambda e: v_zz(theta, e, angle)[0]), gates.u_zz(theta), angle
    if family is InteractionKind.XY:
        angle = matched_angle(theta) if angle is None else angle
        return (lambda e: gates.u_xy(theta, e)), (lambda e: v_xy(theta, e, angle)[0]), gates.u_xy(theta), angle
    angle = cp_gamma(theta) if angle is None else angle
    return (lambda e: cp_target(theta, e)), (lambda e: v_cp(theta, e, angle)[0]), cp_target(theta), angle


def default_theta(family, angle=None) -> float:
    """Theta used when only the pulse angle (or nothing) is given."""
    family = InteractionKind.parse(family)
    if family is InteractionKind.CP:
        return np.pi / 4
    return matched_theta(np.pi / 3 if angle is None else angle)


def refocus_report(family, theta=None, angle=None, eps_grid=DEFAULT_EPS_GRID) -> dict:
    """Raw and refocused infidelities, fitted slopes and coefficient ratios."""
    family = InteractionKind.parse(family)
    if theta is None:
        theta = default_theta(family, angle)
    raw, ref, ideal, angle = family_gates(family, theta, angle)
    eps = np.asarray(eps_grid, dtype=float)
    raw_inf = np.array([1 - gate_fidelity_2q(raw(e), ideal) for e in eps])
    ref_inf = np.array([1 - gate_fidelity_2q(ref(e), ideal) for e in eps])
    coef = float(leading_coefficient(family, theta, angle))
    e0 = float(eps[0])
    warnings = []
    if abs(coef) < 1e-9:
        warnings.append("leading eps^4 coefficient vanishes at this angle; slope check skipped")
    if family is not InteractionKind.CP and abs(theta - matched_theta(angle)) > 1e-9:
        warnings.append("theta does not satisfy theta = 4 pi cos(angle); eps^2 term is not cancelled")
    out = {
        "family": family.value,
        "theta": float(theta),
        "angle": float(angle),
        "eps_grid": eps.tolist(),
        "raw_infidelity": raw_inf.tolist(),
        "refocused_infidelity": ref_inf.tolist(),
        "raw_slope": log_slope(eps, raw_inf),
        "refocused_slope": log_slope(eps, ref_inf),
        "leading_coefficient": coef,
        "coefficient_ratio": float(ref_inf[0] / e0**4 / coef) if abs(coef) >= 1e-9 else None,
        "refocused_at_zero": 1 - gate_fidelity_2q(ref(0.0), ideal),
        "slope_check": not warnings,
        "warnings": warnings,
    }
    raw_coef = raw_leading_coefficient(family, theta)
    if raw_coef is not None:
        out["raw_coefficient"] = raw_coef
        out["raw_coefficient_ratio"] = float(raw_inf[0] / e0**2 / raw_coef)
    if family is not InteractionKind.CP and not warnings:
        analytic = delta_u_zz(angle) if family is InteractionKind.ZZ else delta_u_xy(angle)
        coeffs = error_expansion(family, angle)
        out["delta_u_max_error"] = float(np.abs(coeffs[2] - analytic).max())
        out["first_order_max"] = float(np.abs(coeffs[1]).max())
    return out


def sequence_for(family, theta, angle=None, epsilon=0.0) -> PulseSequence:
    family = InteractionKind.parse(family)
    if family is InteractionKind.ZZ:
        return v_zz(theta, epsilon, angle)[1]
    if family is InteractionKind.XY:
        return v_xy(theta, epsilon, angle)[1]
    return v_cp(theta, epsilon, angle)[1]
