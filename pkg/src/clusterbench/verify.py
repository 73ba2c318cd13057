"""Acceptance checks shared by ``clusterbench verify`` and the test suite.

Each criterion runs the library directly at its stated tolerance and returns
a :class:`CheckResult` holding one line per sub-check.
"""

from __future__ import annotations

import filecmp
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import analytics, bench, refocus
from .builder import ChainSpec, Explicit, GaussianPerBond, Uniform, build_zz
from .gates import InteractionKind
from .statevec import MINUS_Y_AXIS, PLUS_Y_AXIS, BlochOrientation, overlap
from .teleport import refresh_teleport, teleport_fidelity

KINDS = (InteractionKind.CP, InteractionKind.ZZ, InteractionKind.XY)
ODD_N = (3, 5, 7, 9)
X_AXIS = BlochOrientation(np.pi / 2, 0.0)


@dataclass
class CheckResult:
    number: int
    name: str
    tolerance: str
    lines: list = field(default_factory=list)  # (label, ok, detail)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.lines if ok is not None)

    def add(self, label: str, ok: bool | None, detail: str = ""):
        """Record a sub-check; ``ok=None`` marks an informational line."""
        self.lines.append((label, None if ok is None else bool(ok), detail))

    def headline(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [label for label, ok, _ in self.lines if ok is False]
        tail = f"; failing: {', '.join(failed)}" if failed else ""
        return f"{status} [{self.number:2d}] {self.name} (tol {self.tolerance}, {self.seconds:.1f}s){tail}"


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    groups: tuple
    tolerance: str
    run: Callable[[CheckResult], None]


# -- criteria -------------------------------------------------------------------


def _identity(res: CheckResult):
    rng = np.random.default_rng(1001)
    for kind in KINDS:
        for n in ODD_N:
            worst_w = worst_b = 0.0
            for _ in range(100):
                rep = teleport_fidelity(ChainSpec(kind, n, Uniform(0.0)), bench.sample_bloch_uniform(rng))
                worst_w = max(worst_w, abs(rep.weighted_fidelity - 1))
                worst_b = max(worst_b, float(np.max(np.abs(rep.branch_fidelities - 1))))
            res.add(f"{kind.value} N={n}", max(worst_w, worst_b) < 1e-10, f"max|F-1| weighted {worst_w:.2e}, branch {worst_b:.2e}")


def _transmission(res: CheckResult):
    for kind in (InteractionKind.ZZ, InteractionKind.XY):
        worst = 0.0
        for n in ODD_N:
            for eps in (0.1, 0.5, 1 / np.pi, 2 / np.pi):
                for axis in (PLUS_Y_AXIS, MINUS_Y_AXIS):
                    rep = teleport_fidelity(ChainSpec(kind, n, Uniform(eps)), axis)
                    worst = max(worst, abs(rep.weighted_fidelity - 1))
        res.add(f"{kind.value} +-y", worst < 1e-10, f"max|F-1| {worst:.2e}")


def _closed_form(res: CheckResult):
    thetas = np.linspace(0, np.pi, 20)
    phis = np.linspace(0, 2 * np.pi, 20, endpoint=False)
    laws = {InteractionKind.CP: analytics.f_cp_n3, InteractionKind.ZZ: analytics.f_zz_n3, InteractionKind.XY: analytics.f_zz_n3}
    for kind, law in laws.items():
        worst = 0.0
        for eps in (0.05, 0.2, 0.5, 1.0):
            spec = ChainSpec(kind, 3, Uniform(eps))
            for t in thetas:
                for p in phis:
                    sim = teleport_fidelity(spec, BlochOrientation(t, p)).weighted_fidelity
                    worst = max(worst, abs(sim - law(t, p, eps)))
        res.add(f"{kind.value} vs {law.__name__}", worst < 1e-10, f"max dev {worst:.2e}")


def _min_law(res: CheckResult):
    for kind in (InteractionKind.ZZ, InteractionKind.XY):
        anchor_dev = 0.0
        gap_lo, gap_hi = np.inf, -np.inf
        for n in ODD_N:
            for eps in (0.1, 0.2, 0.3, 0.5):
                exact = analytics.min_f_zz(n, eps)
                anchor = teleport_fidelity(ChainSpec(kind, n, Uniform(eps)), X_AXIS).weighted_fidelity
                anchor_dev = max(anchor_dev, abs(anchor - exact))
            rows = bench.min_fidelity_curve(bench.SweepConfig(kind, (n,), (0.1, 0.2, 0.3, 0.5), 5000, 4004))
            for row in rows:
                gap = row["sampled_min"] - row["closed_form"]
                gap_lo, gap_hi = min(gap_lo, gap), max(gap_hi, gap)
        res.add(f"{kind.value} anchor", anchor_dev < 1e-10, f"max dev {anchor_dev:.2e}")
        res.add(f"{kind.value} sampled", gap_lo >= -1e-12 and gap_hi <= 1e-3, f"sampled - exact in [{gap_lo:.2e}, {gap_hi:.2e}]")


def _threshold(res: CheckResult):
    for kind in (InteractionKind.ZZ, InteractionKind.XY):
        worst = 0.0
        for n in ODD_N:
            out = bench.threshold_crossing(kind, n)
            if out["eps"] is None:
                worst = np.inf
                continue
            worst = max(worst, abs(out["eps"] - analytics.eps_max(n)), abs(out["residual"]))
        res.add(f"{kind.value} crossing", worst < 1e-6, f"max dev {worst:.2e}")
    found = []
    for n in ODD_N:
        out = bench.threshold_crossing(InteractionKind.CP, n)
        found.append(out["eps"])
    ok = all(e is not None and e > 0.15 for e in found)
    res.add("cp crossing > 0.15", ok, ", ".join(f"N={n}: {e:.4f}" if e else f"N={n}: none" for n, e in zip(ODD_N, found)))


def _overlap(res: CheckResult):
    worst = 0.0
    for n in (3, 5, 7):
        ref, _ = build_zz(ChainSpec("zz", n, Uniform(0.0)), X_AXIS)
        for eps in (0.1, 0.4):
            state, _ = build_zz(ChainSpec("zz", n, Uniform(eps)), X_AXIS)
            worst = max(worst, abs(abs(overlap(ref, state)) - analytics.cluster_overlap(n, eps)))
    res.add("zz N=3,5,7", worst < 1e-10, f"max dev {worst:.2e}")


def _perturbative(res: CheckResult):
    rng = np.random.default_rng(7007)
    angles = [bench.sample_bloch_uniform(rng) for _ in range(50)]
    eps = 1e-3

    def coefficient(kind, r):
        return (teleport_fidelity(ChainSpec(kind, 3, Uniform(eps)), r).weighted_fidelity - 1) / eps**2

    for kind in (InteractionKind.ZZ, InteractionKind.CP):
        worst = max(abs(coefficient(kind, r) - analytics.perturbative_f2(kind, r.theta0, r.phi0)) for r in angles)
        res.add(f"{kind.value} second order", worst < 1e-3, f"max dev {worst:.2e}")
    worst = max(abs(coefficient(InteractionKind.XY, r) - analytics.perturbative_f2("zz", r.theta0, r.phi0)) for r in angles)
    res.add("xy vs zz coefficient (informational)", None, f"max dev {worst:.2e}")


def _refocus(res: CheckResult):
    cases = [("zz", np.pi / 3), ("xy", np.pi / 3), ("cp", None)]
    for family, angle in cases:
        theta = refocus.default_theta(family, angle)
        rep = refocus.refocus_report(family, theta, angle)
        res.add(f"{family} raw slope", abs(rep["raw_slope"] - 2) <= 0.05, f"{rep['raw_slope']:.4f}")
        res.add(f"{family} refocused slope", abs(rep["refocused_slope"] - 4) <= 0.05, f"{rep['refocused_slope']:.4f}")
        res.add(f"{family} eps^4 coefficient", abs(rep["coefficient_ratio"] - 1) <= 0.05, f"ratio {rep['coefficient_ratio']:.6f}")
        if "delta_u_max_error" in rep:
            res.add(f"{family} Delta U", rep["delta_u_max_error"] <= 1e-3, f"max entry dev {rep['delta_u_max_error']:.2e}")


def refresh_cases(count: int = 20, seed: int = 9009):
    """Seeded (spec, input) pairs covering every kind and all three error models."""
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(count):
        kind = KINDS[i % 3]
        n = int(rng.choice(ODD_N))
        model_type = i % 3
        if model_type == 0:
            model = Uniform(float(rng.uniform(-0.6, 0.6)))
        elif model_type == 1:
            model = GaussianPerBond(float(rng.uniform(0.05, 0.3)), int(rng.integers(2**31)))
        else:
            model = Explicit(rng.uniform(-0.5, 0.5, n - 1))
        cases.append((ChainSpec(kind, n, model), bench.sample_bloch_uniform(rng)))
    return cases


def _refresh(res: CheckResult):
    worst = {3: 0.0, 5: 0.0}
    for spec, r in refresh_cases():
        full = teleport_fidelity(spec, r).weighted_fidelity
        for window in (3, 5):
            worst[window] = max(worst[window], abs(refresh_teleport(spec, r, window).weighted_fidelity - full))
    for window, dev in worst.items():
        res.add(f"window {window}, 20 cases", dev < 1e-10, f"max dev {dev:.2e}")


HISTOGRAM_SEED = 2024


def _histogram(res: CheckResult):
    for kind in KINDS:
        stats = bench.disorder_histogram(bench.SweepConfig(kind, (7,), (0.1, 0.2), 20000, HISTOGRAM_SEED, mode="gaussian"))
        for h in stats:
            if kind is InteractionKind.CP:
                res.add(f"cp sigma={h.sigma} no exact unity", h.exact_unity_count == 0, f"{h.exact_unity_count} samples at F=1")
            else:
                res.add(
                    f"{kind.value} sigma={h.sigma} unity_mass > 0",
                    h.unity_mass > 0,
                    f"unity_mass {h.unity_mass:.3g}, max F {np.max(h.fidelities):.9f}",
                )
        lo, hi = stats[0].lower_half_max_fidelity, stats[1].lower_half_max_fidelity
        res.add(f"{kind.value} half-max decreasing", hi < lo, f"{lo:.3f} (0.1) -> {hi:.3f} (0.2)")


DETERMINISM_COMMANDS = (
    ["bloch-map", "--kind", "cp", "--n", "5", "--eps", "0.3", "--samples", "200", "--seed", "11"],
    ["min-curve", "--kind", "zz", "--n", "3", "5", "--eps", "0.1", "0.3", "--samples", "300", "--seed", "12"],
    ["histogram", "--kind", "xy", "--n", "5", "--sigma", "0.1", "0.2", "--samples", "300", "--seed", "13"],
    ["threshold", "--kind", "cp", "--n", "3", "5"],
)


def _determinism(res: CheckResult):
    from . import cli

    with tempfile.TemporaryDirectory() as tmp:
        for argv in DETERMINISM_COMMANDS:
            paths = [Path(tmp) / f"{argv[0]}-{k}.csv" for k in (1, 2)]
            codes = [cli.main(argv + ["--out", str(p)], stdout=_Null()) for p in paths]
            same = all(c == 0 for c in codes) and filecmp.cmp(paths[0], paths[1], shallow=False)
            res.add(argv[0], same, "byte-identical" if same else f"exit codes {codes}")


class _Null:
    def write(self, _):
        return 0

    def flush(self):
        pass


CRITERIA = (
    Criterion(1, "identity gate at eps=0", ("identity", "teleport", "builder"), "1e-10", _identity),
    Criterion(2, "perfect transmission along +-y", ("transmission", "teleport", "builder"), "1e-10", _transmission),
    Criterion(3, "N=3 closed forms", ("closed-form", "analytics"), "1e-10", _closed_form),
    Criterion(4, "Min(F) law", ("min-law", "analytics", "bench"), "1e-10 anchor, 1e-3 sampled", _min_law),
    Criterion(5, "2/3 threshold", ("threshold", "analytics", "bench"), "1e-6", _threshold),
    Criterion(6, "cluster overlap law", ("overlap", "analytics"), "1e-10", _overlap),
    Criterion(7, "second-order coefficients", ("perturbative", "analytics"), "1e-3", _perturbative),
    Criterion(8, "refocusing order and coefficients", ("refocus",), "slope 0.05, coeff 5%, Delta U 1e-3", _refocus),
    Criterion(9, "refreshing equivalence", ("refresh", "teleport"), "1e-10", _refresh),
    Criterion(10, "disorder histograms", ("histogram", "bench"), "unity 1e-9, exact 1e-12", _histogram),
    Criterion(11, "CSV determinism", ("determinism", "cli"), "byte-identical", _determinism),
)


def select(only=None) -> list[Criterion]:
    if not only:
        return list(CRITERIA)
    tokens = {str(t).lower() for t in only}
    chosen = [c for c in CRITERIA if str(c.number) in tokens or tokens.intersection(c.groups)]
    known = {str(c.number) for c in CRITERIA} | {g for c in CRITERIA for g in c.groups}
    unknown = tokens - known
    if unknown:
        raise ValueError(f"unknown --only selector(s): {', '.join(sorted(unknown))}; known: {', '.join(sorted(known))}")
    return chosen


def run_criterion(criterion: Criterion) -> CheckResult:
    res = CheckResult(criterion.number, criterion.name, criterion.tolerance)
    start = time.perf_counter()
    try:
        criterion.run(res)
    except Exception as exc:  # a crashing check is a failing check
        res.add("raised", False, f"{type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - start
    return res


def run(only=None, emit=print) -> list[CheckResult]:
    results = []
    for criterion in select(only):
        res = run_criterion(criterion)
        results.append(res)
        emit(res.headline())
        for label, ok, detail in res.lines:
            mark = "info" if ok is None else ("ok" if ok else "FAIL")
            emit(f"       {mark:4s}  {label}: {detail}")
    return results
