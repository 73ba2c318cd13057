"""Monte Carlo benchmarking: minimum-fidelity curves, disorder histograms, thresholds.

Randomness is keyed by sample index. Sample ``i`` of a sweep with master seed
``s`` draws everything from ``numpy.random.default_rng([s, i])``: first the
two uniforms fixing its input direction, then (for disorder sweeps) the seed
of its bond-error realization. The same sample index therefore sees the same
direction and the same standard-normal bond draws at every grid point, and
results never depend on how samples are split across worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from . import analytics
from .builder import ChainSpec, GaussianPerBond, Uniform, realize_errors
from .gates import InteractionKind
from .statevec import BlochOrientation
from .teleport import TeleportChannel, batched_fidelity, channel_operators_batched

DEFAULT_BIN_WIDTH = 0.005
DEFAULT_MIN_SAMPLES = 5000
DEFAULT_HIST_SAMPLES = 20000
UNITY_TOL = 1e-9
EXACT_UNITY_TOL = 1e-12
BATCH = 1024
X_AXIS = BlochOrientation(np.pi / 2, 0.0)


@dataclass
class SweepConfig:
    kind: InteractionKind
    n_values: tuple
    grid: tuple  # epsilon values (uniform mode) or sigma values (gaussian mode)
    samples: int
    seed: int
    mode: str = "uniform"
    bin_width: float = DEFAULT_BIN_WIDTH
    jobs: int = 1

    def __post_init__(self):
        self.kind = InteractionKind.parse(self.kind)
        self.n_values = tuple(int(n) for n in self.n_values)
        self.grid = tuple(float(g) for g in self.grid)
        if self.mode not in ("uniform", "gaussian"):
            raise ValueError(f"mode must be 'uniform' or 'gaussian', got {self.mode!r}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not self.n_values or not self.grid:
            raise ValueError("n and grid lists must be nonempty")
        for n in self.n_values:
            ChainSpec(self.kind, n)
        if self.mode == "gaussian" and min(self.grid) < 0:
            raise ValueError("sigma values must be non-negative")
        if not self.bin_width > 0:
            raise ValueError("bin_width must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n_values": list(self.n_values),
            "grid": list(self.grid),
            "samples": self.samples,
            "seed": self.seed,
            "mode": self.mode,
            "bin_width": self.bin_width,
            "jobs": self.jobs,
        }


# -- sampling ---------------------------------------------------------------


def bloch_from_uniform(u, v):
    """(theta0, phi0) = (arccos(1 - 2u), 2 pi v): uniform on the sphere for uniform u, v."""
    return np.arccos(1 - 2 * np.asarray(u, dtype=float)), 2 * np.pi * np.asarray(v, dtype=float)


def sample_bloch_uniform(rng) -> BlochOrientation:
    u, v = rng.random(2)
    theta0, phi0 = bloch_from_uniform(u, v)
    return BlochOrientation(float(theta0), float(phi0))


def sample_rng(seed: int, index: int):
    return np.random.default_rng([int(seed), int(index)])


def sample_directions(seed: int, start: int, stop: int):
    """Angles of samples start..stop-1."""
    uv = np.array([sample_rng(seed, i).random(2) for i in range(start, stop)]).reshape(-1, 2)
    return bloch_from_uniform(uv[:, 0], uv[:, 1])


def input_states(theta0, phi0) -> np.ndarray:
    theta0 = np.asarray(theta0, dtype=float)
    phi0 = np.asarray(phi0, dtype=float)
    return np.stack([np.cos(theta0 / 2), np.exp(1j * phi0) * np.sin(theta0 / 2)], axis=-1)


def _map(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*tasks)))


def _chunks(total: int, jobs: int):
    size = max(1, math.ceil(total / max(1, jobs * 4)))
    return [(a, min(total, a + size)) for a in range(0, total, size)]


# -- sphere minimum ---------------------------------------------------------


def _fibonacci_sphere(count: int) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    phi = np.pi * (1 + 5**0.5) * i
    r = np.sqrt(1 - z**2)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def sphere_minimum(channel: TeleportChannel, grid_points: int = 2000) -> tuple[float, np.ndarray]:
    """Minimum over all input directions of the channel fidelity, and its Bloch vector."""
    c, g, q = channel.quadratic_form()

    def f(r):
        return c + r @ g + np.einsum("...i,ij,...j->...", r, q, r)

    pts = _fibonacci_sphere(grid_points)
    vals = f(pts)
    best_val, best_r = np.inf, None
    for idx in np.argsort(vals)[:3]:
        x, y, z = pts[idx]
        start = np.array([np.arccos(np.clip(z, -1, 1)), np.arctan2(y, x)])

        def obj(a):
            st = np.sin(a[0])
            return f(np.array([st * np.cos(a[1]), st * np.sin(a[1]), np.cos(a[0])]))

        res = minimize(obj, start, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000})
        if res.fun < best_val:
            a = res.x
            best_val = float(res.fun)
            best_r = np.array([np.sin(a[0]) * np.cos(a[1]), np.sin(a[0]) * np.sin(a[1]), np.cos(a[0])])
    return best_val, best_r


def min_fidelity_anchor(kind, n: int, epsilon: float) -> float:
    """Exact minimum fidelity under uniform error.

    ZZ and XY: the fidelity is constant on the x-z plane and minimal there,
    so +x is used. CP: the quadratic Bloch form is minimized on the sphere.
    """
    kind = InteractionKind.parse(kind)
    channel = TeleportChannel.from_errors(kind, (epsilon,) * (n - 1))
    if kind is InteractionKind.CP:
        return sphere_minimum(channel)[0]
    return channel.fidelity(X_AXIS.state())


# -- minimum-fidelity curves -------------------------------------------------


def _sampled_fidelities(kind, errors, seed, start, stop):
    channel = TeleportChannel.from_errors(kind, errors)
    theta0, phi0 = sample_directions(seed, start, stop)
    return channel.fidelity(input_states(theta0, phi0))


def min_fidelity_curve(config: SweepConfig) -> list[dict]:
    """Sampled and exact minimum fidelity for every (n, epsilon) in the sweep."""
    if config.mode != "uniform":
        raise ValueError("min_fidelity_curve needs a uniform-error sweep")
    rows = []
    for n in config.n_values:
        for eps in config.grid:
            errors = (eps,) * (n - 1)
            tasks = [(config.kind, errors, config.seed, a, b) for a, b in _chunks(config.samples, config.jobs)]
            fids = np.concatenate(_map(_sampled_fidelities, tasks, config.jobs))
            channel = TeleportChannel.from_errors(config.kind, errors)
            plus_y = BlochOrientation(np.pi / 2, np.pi / 2).state()
            minus_y = BlochOrientation(np.pi / 2, 3 * np.pi / 2).state()
            row = {
                "kind": config.kind.value,
                "n": n,
                "eps": eps,
                "sampled_min": float(fids.min()),
                "sampled_mean": float(fids.mean()),
                "anchor_xz": channel.fidelity(X_AXIS.state()),
                "anchor_plus_y": channel.fidelity(plus_y),
                "anchor_minus_y": channel.fidelity(minus_y),
                "sphere_min": sphere_minimum(channel)[0],
            }
            if config.kind is not InteractionKind.CP:
                row["closed_form"] = float(analytics.min_f_zz(n, eps))
            rows.append(row)
    return rows


def bloch_map(kind, n: int, epsilon: float, samples: int, seed: int) -> list[dict]:
    """Fidelity of uniformly sampled directions, with (x, y, z) = F r for point-cloud plots."""
    channel = TeleportChannel.from_spec(ChainSpec(kind, n, Uniform(epsilon)))
    theta0, phi0 = sample_directions(seed, 0, samples)
    fids = channel.fidelity(input_states(theta0, phi0))
    r = np.stack([np.sin(theta0) * np.cos(phi0), np.sin(theta0) * np.sin(phi0), np.cos(theta0)], axis=1)
    return [
        {"theta0": t, "phi0": p, "x": f * v[0], "y": f * v[1], "z": f * v[2], "fidelity": f}
        for t, p, v, f in zip(theta0.tolist(), phi0.tolist(), r, fids.tolist())
    ]


# -- histograms ---------------------------------------------------------------


@dataclass
class HistogramStats:
    kind: str
    n: int
    sigma: float
    samples: int
    bin_width: float
    edges: np.ndarray
    counts: np.ndarray
    mode_center: float
    lower_half_max_fidelity: float
    unity_mass: float
    exact_unity_count: int
    mean: float
    minimum: float
    fidelities: np.ndarray = field(repr=False, default=None)

    @property
    def centers(self) -> np.ndarray:
        return np.round(np.arange(self.counts.size) * self.bin_width, 12)

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "sigma": self.sigma,
            "samples": self.samples,
            "bin_width": self.bin_width,
            "mode_center": self.mode_center,
            "lower_half_max_fidelity": self.lower_half_max_fidelity,
            "unity_mass": self.unity_mass,
            "exact_unity_count": self.exact_unity_count,
            "mean": self.mean,
            "minimum": self.minimum,
        }


def histogram_stats(fidelities, bin_width: float = DEFAULT_BIN_WIDTH, kind="", n=0, sigma=0.0) -> HistogramStats:
    """Bin fidelities on centers k * bin_width (k = 0..1/bin_width) and extract summary statistics.

    The lower half-maximum fidelity is the smallest bin center whose count
    reaches half the mode count.
    """
    f = np.asarray(fidelities, dtype=float)
    top = int(round(1.0 / bin_width))
    idx = np.clip(np.floor(f / bin_width + 0.5).astype(int), 0, top)
    counts = np.bincount(idx, minlength=top + 1)
    edges = (np.arange(top + 2) - 0.5) * bin_width
    centers = np.round(np.arange(top + 1) * bin_width, 12)
    mode = int(np.argmax(counts))
    half = np.nonzero(counts >= counts[mode] / 2)[0]
    return HistogramStats(
        kind=kind,
        n=n,
        sigma=sigma,
        samples=int(f.size),
        bin_width=bin_width,
        edges=edges,
        counts=counts,
        mode_center=float(centers[mode]),
        lower_half_max_fidelity=float(centers[half[0]]),
        unity_mass=float(np.mean(f > 1 - UNITY_TOL)),
        exact_unity_count=int(np.sum(np.abs(f - 1) <= EXACT_UNITY_TOL)),
        mean=float(f.mean()),
        minimum=float(f.min()),
        fidelities=f,
    )


def _disorder_fidelities(kind, n, sigma, seed, start, stop):
    thetas, phis, errors = [], [], []
    for i in range(start, stop):
        rng = sample_rng(seed, i)
        u, v = rng.random(2)
        bond_seed = int(rng.integers(2**63))
        theta0, phi0 = bloch_from_uniform(u, v)
        thetas.append(theta0)
        phis.append(phi0)
        errors.append(realize_errors(ChainSpec(kind, n, GaussianPerBond(sigma, bond_seed))))
    out = []
    for a in range(0, len(errors), BATCH):
        ops = channel_operators_batched(kind, errors[a : a + BATCH])
        out.append(batched_fidelity(ops, input_states(thetas[a : a + BATCH], phis[a : a + BATCH])))
    return np.concatenate(out)


def disorder_histogram(config: SweepConfig) -> list[HistogramStats]:
    """One histogram per (n, sigma): each sample draws fresh bond errors and a fresh direction."""
    if config.mode != "gaussian":
        raise ValueError("disorder_histogram needs a gaussian-error sweep")
    out = []
    for n in config.n_values:
        for sigma in config.grid:
            tasks = [(config.kind, n, sigma, config.seed, a, b) for a, b in _chunks(config.samples, config.jobs)]
            fids = np.concatenate(_map(_disorder_fidelities, tasks, config.jobs))
            out.append(histogram_stats(fids, config.bin_width, config.kind.value, n, sigma))
    return out


# -- threshold ------------------------------------------------------------------


def threshold_crossing(kind, n: int, scan_step: float = 0.01, xtol: float = 1e-13) -> dict:
    """Smallest epsilon in (0, 1] where the exact minimum fidelity drops to 2/3.

    A coarse scan locates the first sign change of Min(F) - 2/3, then Brent's
    method refines it. Returns ``eps=None`` with status "none" when no
    crossing exists.
    """
    kind = InteractionKind.parse(kind)
    ChainSpec(kind, n)

    def excess(eps):
        return min_fidelity_anchor(kind, n, eps) - analytics.TWO_THIRDS

    grid = np.arange(0.0, 1.0 + scan_step / 2, scan_step)
    prev = excess(grid[0])
    for a, b in zip(grid[:-1], grid[1:]):
        cur = excess(b)
        if cur == 0:
            return {"kind": kind.value, "n": n, "eps": float(b), "residual": 0.0, "status": "ok"}
        if np.sign(cur) != np.sign(prev):
            root = brentq(excess, a, b, xtol=xtol)
            return {"kind": kind.value, "n": n, "eps": float(root), "residual": float(excess(root)), "status": "ok"}
        prev = cur
    return {"kind": kind.value, "n": n, "eps": None, "residual": None, "status": "none"}
