"""Classical network bounds and closed-form quantum optima.

Classical values are obtained three ways: a closed formula, exhaustive
enumeration of deterministic +/-1 strategies, and concave maximisation over
independent per-party mixtures of deterministic profiles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ConvergenceError, DomainError
from .functionals import sig
from .schemes import CoefficientScheme, ScenarioSpec, coefficient_scheme

MAX_PARTY_SETTINGS = 24
MAX_ENUMERATION = 2**26
SMOOTHING = 1e-12
GAP_FLAG_TOL = 1e-6


# ---------------------------------------------------------------------------
# closed forms


def _central_binomial(n: int) -> int:
    return math.comb(n - 1, (n - 1) // 2)


def _bound_power(spec: ScenarioSpec) -> int:
    """Integer whose r-th root is the classical bound."""
    n = spec.n
    c = _central_binomial(n)
    if spec.kind in ("standard-bilocal", "bilocal-I"):
        return 2 * n * (n - 1) * c
    if spec.kind == "bilocal-II":
        return 2 * n * (2 ** (n - 1) - 1) * c
    if spec.kind == "trilocal-I":
        return 2 * n * (2 ** (n - 1) - 1) * c * 2 ** (2 * n - 3)
    return 2 * n * (n - 1) * c * ((n * n + 1) // 2)


def classical_bound_formula(spec: ScenarioSpec) -> float:
    return _bound_power(spec) ** (1.0 / spec.root)


def quantum_optimum_formula(spec: ScenarioSpec) -> float:
    n = spec.n
    if spec.kind in ("standard-bilocal", "bilocal-I"):
        return math.sqrt(2**n * n**1.5 * math.cos(math.pi / (2 * n)))
    if spec.kind == "bilocal-II":
        return math.sqrt(2 ** (2 * n - 1) * math.sqrt(n) * math.cos(math.pi / 2**n))
    if spec.kind == "trilocal-I":
        return 2 ** (n - 1) * (2 * math.sqrt(n) / math.tan(math.pi / 2**n)) ** (1.0 / 3.0)
    return (2**n * n**2.5 / math.tan(math.pi / (2 * n))) ** (1.0 / 3.0)


def chain_optimum(m: int) -> float:
    """Largest sum of m chained two-observable correlators: 2m cos(pi/2m)."""
    return 2 * m * math.cos(math.pi / (2 * m))


def rac_optimum(n: int) -> float:
    return 2 ** (n - 1) * math.sqrt(n)


# ---------------------------------------------------------------------------
# deterministic strategies


def assignments(m: int) -> np.ndarray:
    """All +/-1 vectors of length m in lexicographic order, +1 first."""
    if m > MAX_PARTY_SETTINGS:
        raise CapacityError(f"{m} settings exceed the enumeration limit of {MAX_PARTY_SETTINGS}")
    idx = np.arange(2**m)
    bits = (idx[:, None] >> np.arange(m - 1, -1, -1)[None, :]) & 1
    return 1 - 2 * bits


def _profile_matrix(scheme: CoefficientScheme, party: str) -> tuple[np.ndarray, np.ndarray]:
    rows = scheme.rows[party]
    strat = assignments(rows.shape[1])
    return strat, np.abs(strat @ rows.T)


def deterministic_profiles(spec: ScenarioSpec, party: str, scheme: CoefficientScheme | None = None) -> list[tuple[int, ...]]:
    """Distinct |row . assignment| vectors for one edge party, sorted."""
    if party not in spec.edge_parties:
        raise DomainError(f"{party} is not an edge party of {spec.kind}")
    scheme = scheme or coefficient_scheme(spec)
    _, prof = _profile_matrix(scheme, party)
    return sorted({tuple(int(v) for v in row) for row in prof})


def _combo_values(profiles: list[np.ndarray], root: int) -> np.ndarray:
    """Functional value for every combination of one profile per party."""
    k = len(profiles)
    prod = None
    for i, p in enumerate(profiles):
        shape = [1] * k + [p.shape[1]]
        shape[i] = p.shape[0]
        term = p.reshape(shape).astype(float)
        prod = term if prod is None else prod * term
    return np.sum(prod ** (1.0 / root), axis=-1)


@dataclass
class DeterministicResult:
    value: float
    strategies: dict[str, tuple[int, ...]]
    profiles: dict[str, tuple[int, ...]]
    enumerated: int


def deterministic_max(spec: ScenarioSpec, scheme: CoefficientScheme | None = None) -> DeterministicResult:
    """Maximum over deterministic strategy tuples, lexicographically first argmax."""
    scheme = scheme or coefficient_scheme(spec)
    parties = spec.edge_parties
    total = 1
    for p in parties:
        total *= 2 ** scheme.rows[p].shape[1]
    if total > MAX_ENUMERATION:
        raise CapacityError(f"{total} strategy tuples exceed the limit of {MAX_ENUMERATION}")
    strategies, uniques, first_index = {}, {}, {}
    for p in parties:
        strat, prof = _profile_matrix(scheme, p)
        uniq, first = np.unique(prof, axis=0, return_index=True)
        strategies[p] = strat
        uniques[p] = uniq
        first_index[p] = first
    # the value depends only on the profiles, so search distinct profiles
    head, rest = parties[0], parties[1:]
    tables = []
    for ia in range(len(uniques[head])):
        tables.append(_combo_values([uniques[head][ia : ia + 1]] + [uniques[p] for p in rest], spec.root)[0])
    value = max(float(t.max()) for t in tables)
    key = None
    for ia, vals in enumerate(tables):
        for idx in zip(*np.nonzero(vals >= value - 1e-12)):
            combo = (ia,) + tuple(int(i) for i in idx)
            cand = tuple(int(first_index[p][u]) for p, u in zip(parties, combo))
            if key is None or cand < key:
                key = cand
    chosen = {p: tuple(int(v) for v in strategies[p][i]) for p, i in zip(parties, key)}
    profs = {p: tuple(int(v) for v in np.abs(scheme.rows[p] @ np.array(chosen[p]))) for p in parties}
    return DeterministicResult(value, chosen, profs, total)


# ---------------------------------------------------------------------------
# mixtures


@dataclass
class MixedResult:
    value: float
    weights: dict[str, list[tuple[tuple[int, ...], float]]]
    gap: float
    iterations: int


def _objective(us: list[np.ndarray], root: int) -> float:
    prod = np.prod(np.vstack(us), axis=0)
    return float(np.sum(np.clip(prod, 0.0, None) ** (1.0 / root)))


def _gradient(us: list[np.ndarray], k: int, root: int) -> np.ndarray:
    shifted = [u + SMOOTHING for u in us]
    g = np.prod(np.vstack(shifted), axis=0) ** (1.0 / root)
    return g / (root * shifted[k])


def _line_search(slope, hi: float, iters: int = 200) -> float:
    """Maximiser on [0, hi] of a concave function given its (decreasing) derivative.

    Bisection on the derivative sign; unlike comparing function values this
    stays accurate when the attainable improvement is below float resolution.
    """
    if slope(0.0) <= 0.0:
        return 0.0
    if slope(hi) >= 0.0:
        return hi
    a, b = 0.0, hi
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        if slope(mid) > 0.0:
            a = mid
        else:
            b = mid
    return a


def mixed_bound(
    spec: ScenarioSpec,
    tolerance: float = 1e-8,
    max_iterations: int = 20000,
    scheme: CoefficientScheme | None = None,
) -> MixedResult:
    """Maximise sum_j (prod_k u_k[j])**(1/r) over u_k in the hull of party k's profiles.

    Block-coordinate pairwise Frank-Wolfe (a combined away/toward step per
    block) with an exact line search; stops once the Frank-Wolfe duality
    gap, an upper bound on the distance to the optimum, drops below ``tolerance``.
    """
    scheme = scheme or coefficient_scheme(spec)
    parties = spec.edge_parties
    root = spec.root
    verts = [np.array(deterministic_profiles(spec, p, scheme), dtype=float) for p in parties]
    weights = [np.full(len(v), 1.0 / len(v)) for v in verts]
    us = [w @ v for w, v in zip(weights, verts)]
    gap = math.inf
    for it in range(1, max_iterations + 1):
        # duality gap at the current point: sum of per-block linear-oracle gaps
        grads = [_gradient(us, k, root) for k in range(len(parties))]
        gap = sum(max(float(np.max(verts[k] @ grads[k]) - us[k] @ grads[k]), 0.0) for k in range(len(parties)))
        if gap < tolerance:
            break
        for k in range(len(parties)):
            g = _gradient(us, k, root)
            scores = verts[k] @ g
            s = int(np.argmax(scores))
            active = np.nonzero(weights[k] > 0)[0]
            a = int(active[np.argmin(scores[active])])
            # pairwise step: shift weight from the worst active vertex to the best vertex
            if s == a or scores[s] - scores[a] <= 0.0:
                continue
            direction = verts[k][s] - verts[k][a]
            step_max = float(weights[k][a])

            def slope(t: float, k: int = k, direction: np.ndarray = direction) -> float:
                trial = list(us)
                trial[k] = us[k] + t * direction
                return float(_gradient(trial, k, root) @ direction)

            t = _line_search(slope, step_max)
            if t <= 0.0:
                continue
            weights[k][s] += t
            weights[k][a] -= t
            weights[k][weights[k] < 1e-15] = 0.0
            weights[k] /= weights[k].sum()
            us[k] = weights[k] @ verts[k]
    else:
        raise ConvergenceError(f"mixed bound for {spec.kind} n={spec.n} did not converge", gap)
    out = {}
    for p, v, w in zip(parties, verts, weights):
        out[p] = [(tuple(int(x) for x in v[i]), float(w[i])) for i in np.argsort(-w, kind="stable") if w[i] > 1e-9]
    return MixedResult(_objective(us, root), out, gap, it)


# ---------------------------------------------------------------------------
# report


def delta_maxima(spec: ScenarioSpec, scheme: CoefficientScheme | None = None) -> dict[str, int]:
    """Per party, the largest row-sum of a deterministic profile."""
    scheme = scheme or coefficient_scheme(spec)
    return {p: max(sum(prof) for prof in deterministic_profiles(spec, p, scheme)) for p in spec.edge_parties}


@dataclass
class BoundReport:
    spec: ScenarioSpec
    formula: float | None = None
    deterministic: DeterministicResult | None = None
    mixed: MixedResult | None = None
    delta_max: dict[str, int] = field(default_factory=dict)
    flags: dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = {"scenario": self.spec.kind, "n": self.spec.n}
        if self.formula is not None:
            out["formula"] = sig(self.formula)
        if self.deterministic is not None:
            d = self.deterministic
            out["deterministic"] = {
                "value": sig(d.value),
                "strategies": {p: list(s) for p, s in d.strategies.items()},
                "profiles": {p: list(s) for p, s in d.profiles.items()},
                "enumerated": d.enumerated,
            }
        if self.mixed is not None:
            m = self.mixed
            out["mixed"] = {
                "value": sig(m.value),
                "gap": sig(m.gap, 3),
                "iterations": m.iterations,
                "weights": {p: [[list(prof), sig(w)] for prof, w in ws] for p, ws in m.weights.items()},
            }
        if self.delta_max:
            out["delta_max"] = dict(self.delta_max)
        if self.flags:
            out["flags"] = dict(self.flags)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


METHODS = ("formula", "enumerate", "mixed", "all")


def bound_report(spec: ScenarioSpec, method: str = "all", tolerance: float = 1e-8) -> BoundReport:
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    report = BoundReport(spec)
    if method in ("formula", "all"):
        report.formula = classical_bound_formula(spec)
    if method != "formula":
        if spec.trilocal:
            spec.require_matrix_level()
        scheme = coefficient_scheme(spec)
        if method in ("enumerate", "all"):
            report.deterministic = deterministic_max(spec, scheme)
        if method in ("mixed", "all"):
            report.mixed = mixed_bound(spec, tolerance, scheme=scheme)
        report.delta_max = delta_maxima(spec, scheme)
    if method == "all":
        prod = math.prod(report.delta_max.values()) ** (1.0 / spec.root)
        report.flags = {
            "mixed_below_formula": report.formula - report.mixed.value > GAP_FLAG_TOL,
            "mixed_above_formula": report.mixed.value > report.formula + 1e-9,
            "deterministic_above_mixed": report.deterministic.value > report.mixed.value + 1e-9,
            "formula_differs_from_delta_product": abs(prod - report.formula) > 1e-9,
        }
    return report


def violation_table(n_max: int = 12) -> list[tuple[str, int, float, float]]:
    """(kind, n, classical bound, quantum optimum) for every formula family."""
    rows = []
    for kind in ("bilocal-I", "bilocal-II", "trilocal-I", "trilocal-II"):
        for n in range(2, n_max + 1):
            spec = ScenarioSpec(kind, n)
            rows.append((kind, n, classical_bound_formula(spec), quantum_optimum_formula(spec)))
    return rows

