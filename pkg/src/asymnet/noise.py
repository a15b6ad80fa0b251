"""Werner-noise robustness: noisy networks, the visibility scaling law and critical visibilities."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bounds import classical_bound_formula, quantum_optimum_formula
from .errors import DomainError
from .functionals import NetworkAssembly, functional_value, optimal_assembly, sig
from .schemes import ScenarioSpec

CSV_HEADER = ("v", "value", "bound", "violated")


def source_pairs(spec: ScenarioSpec) -> tuple[int, ...]:
    """Bell pairs emitted by each source, in edge-party order."""
    return tuple(spec.edge_qubits[p] for p in spec.edge_parties)


def noise_exponent(spec: ScenarioSpec) -> int:
    """Total number of noisy pairs: N+1 for bilocal, N+2 for trilocal networks."""
    if spec.trilocal:
        return max(spec.big_n, 1) + 2
    return max(spec.big_n, 1) + 1


def _visibilities(spec: ScenarioSpec, v: float | Sequence[float]) -> tuple[float, ...]:
    if np.isscalar(v):
        vs = (float(v),) * len(spec.edge_parties)
    else:
        vs = tuple(float(x) for x in v)
    if len(vs) != len(spec.edge_parties):
        raise DomainError(f"{spec.kind} has {len(spec.edge_parties)} sources, got {len(vs)} visibilities")
    for x in vs:
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"visibility {x} outside [0, 1]")
    return vs


def noisy_assembly(spec: ScenarioSpec, visibilities: float | Sequence[float], source: str = "explicit") -> NetworkAssembly:
    """Optimal observables on Werner sources; multi-pair edges get tensor powers."""
    return optimal_assembly(spec, source=source, visibilities=_visibilities(spec, visibilities))


def noisy_value(spec: ScenarioSpec, visibilities: float | Sequence[float], source: str = "explicit") -> float:
    return functional_value(noisy_assembly(spec, visibilities, source)).total


def predicted_noisy_value(spec: ScenarioSpec, visibilities: Sequence[float], pure_value: float) -> float:
    factor = 1.0
    for v, pairs in zip(visibilities, source_pairs(spec)):
        factor *= v**pairs
    return factor ** (1.0 / spec.root) * pure_value


def scaling_check(spec: ScenarioSpec, samples: int | Sequence[Sequence[float]] = 20, seed: int = 42) -> float:
    """Max |value(v) - (prod_k v_k**pairs_k)**(1/r) value(1)| over sampled visibility tuples.

    The law holds when each edge's combinations are supported on a single
    pair; Pauli strings acting on several pairs pick up one factor of v per
    non-identity factor instead.
    """
    pure = noisy_value(spec, 1.0)
    if isinstance(samples, int):
        rng = np.random.default_rng(seed)
        tuples = rng.uniform(0.0, 1.0, size=(samples, len(spec.edge_parties)))
    else:
        tuples = np.asarray(samples, dtype=float)
    worst = 0.0
    for vs in tuples:
        got = noisy_value(spec, tuple(vs))
        worst = max(worst, abs(got - predicted_noisy_value(spec, tuple(vs), pure)))
    return worst


def critical_visibility_formula(spec: ScenarioSpec) -> float:
    """Uniform v solving v**(E/r) * optimum = bound, with E the total pair count."""
    ratio = classical_bound_formula(spec) / quantum_optimum_formula(spec)
    return ratio ** (spec.root / noise_exponent(spec))


def critical_visibility_empirical(spec: ScenarioSpec, tol: float = 1e-6) -> float | None:
    """Bisection for the uniform v where the value crosses the classical bound.

    Returns None when the pure state does not violate the bound.
    """
    if tol < 1e-10:
        raise DomainError("tol must be >= 1e-10")
    bound = classical_bound_formula(spec)
    if noisy_value(spec, 1.0) <= bound:
        return None
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if noisy_value(spec, mid) > bound:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass
class NoiseCurve:
    spec: ScenarioSpec
    samples: list[tuple[float, float, float, bool]] = field(default_factory=list)
    v_critical_empirical: float | None = None
    v_critical_formula: float | None = None
    pairs: tuple[int, ...] = ()

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for v, value, bound, violated in self.samples:
            writer.writerow([f"{v:.12g}", f"{value:.12g}", f"{bound:.12g}", "true" if violated else "false"])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "scenario": self.spec.kind,
            "n": self.spec.n,
            "v_critical_empirical": None if self.v_critical_empirical is None else sig(self.v_critical_empirical),
            "v_critical_formula": None if self.v_critical_formula is None else sig(self.v_critical_formula),
            "pairs": list(self.pairs),
            "samples": [[sig(v), sig(val), sig(b), flag] for v, val, b, flag in self.samples],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def noise_curve(spec: ScenarioSpec, points: int = 101, refine: float = 1e-6) -> NoiseCurve:
    """Uniform-visibility sweep on [0, 1] plus a bisection-refined threshold."""
    bound = classical_bound_formula(spec)
    samples = []
    for v in np.linspace(0.0, 1.0, points):
        value = noisy_value(spec, float(v))
        samples.append((float(v), value, bound, value > bound))
    return NoiseCurve(
        spec,
        samples,
        critical_visibility_empirical(spec, refine),
        critical_visibility_formula(spec),
        source_pairs(spec),
    )
