"""Network assemblies, correlators, outcome distributions and nonlinear functionals."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import quantum as qc
from .errors import DomainError, ShapeError
from .schemes import (
    CoefficientScheme,
    ScenarioSpec,
    bob_product_observables,
    coefficient_scheme,
    combination,
    generated_observables,
    explicit_bob_observables,
    explicit_observables,
)

PARTY_ORDER = ("A", "B", "C", "D")


def sig(x: float, digits: int = 12) -> float:
    """Round to ``digits`` significant digits for serialisation."""
    return float(f"{x:.{digits}g}")


def network_layout(spec: ScenarioSpec) -> qc.QubitLayout:
    """Edge by edge: [A, B:A, C, B:C (, D, B:D)]."""
    blocks = []
    for p, q in spec.edge_qubits.items():
        blocks.append(qc.Block(p, "edge", q))
        blocks.append(qc.Block("B", p, q))
    return qc.QubitLayout(tuple(blocks))


@dataclass
class NetworkAssembly:
    spec: ScenarioSpec
    layout: qc.QubitLayout
    state: np.ndarray
    observables: dict[str, list[np.ndarray]]
    scheme: CoefficientScheme
    visibilities: tuple[float, ...] = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        dim = self.layout.dim
        if self.state.shape[0] != dim or (self.state.ndim == 2 and self.state.shape != (dim, dim)):
            raise ShapeError(f"state of shape {self.state.shape} does not match layout dimension {dim}")
        for p in self.spec.edge_parties:
            want = 2 ** self.layout.blocks[self.edge_block(p)].qubits
            for o in self.observables[p]:
                if o.shape != (want, want):
                    raise ShapeError(f"party {p} observable shape {o.shape}, block needs {(want, want)}")
        bob_dim = 2 ** sum(self.layout.blocks[b].qubits for b in self.bob_blocks)
        for o in self.observables.get("B", []):
            if o.shape != (bob_dim, bob_dim):
                raise ShapeError(f"Bob observable shape {o.shape}, blocks need {(bob_dim, bob_dim)}")

    @property
    def pure(self) -> bool:
        return qc.is_pure(self.state)

    @property
    def parties(self) -> tuple[str, ...]:
        return tuple(p for p in PARTY_ORDER if p == "B" or p in self.spec.edge_parties)

    def edge_block(self, party: str) -> int:
        return self.layout.index(party, "edge")

    @property
    def bob_blocks(self) -> tuple[int, ...]:
        return tuple(self.layout.index("B", p) for p in self.spec.edge_parties)

    def embed_party(self, party: str, op: np.ndarray) -> np.ndarray:
        target = self.bob_blocks if party == "B" else self.edge_block(party)
        return qc.embed(op, self.layout, target)

    def local_combination(self, party: str, j: int) -> np.ndarray:
        return combination(self.scheme.row(party, j), self.observables[party])

    def combination(self, party: str, j: int) -> np.ndarray:
        key = ("comb", party, j)
        if key not in self._cache:
            self._cache[key] = self.embed_party(party, self.local_combination(party, j))
        return self._cache[key]

    def observable(self, party: str, k: int) -> np.ndarray:
        key = ("obs", party, k)
        if key not in self._cache:
            self._cache[key] = self.embed_party(party, self.observables[party][k])
        return self._cache[key]

    def density(self) -> np.ndarray:
        if "rho" not in self._cache:
            self._cache["rho"] = qc.as_density(self.state)
        return self._cache["rho"]


def edge_states(spec: ScenarioSpec, visibilities: Sequence[float] | None = None) -> dict[str, np.ndarray]:
    """Bell pairs (pure) or Werner tensor powers per edge, keyed by edge party."""
    out = {}
    if visibilities is not None and len(visibilities) != len(spec.edge_parties):
        raise ShapeError(f"{spec.kind} has {len(spec.edge_parties)} sources, got {len(visibilities)} visibilities")
    for i, (p, q) in enumerate(spec.edge_qubits.items()):
        if visibilities is None:
            out[p] = qc.bell_pairs(q)
        else:
            out[p] = qc.werner_pairs(float(visibilities[i]), q)
    return out


def network_state(spec: ScenarioSpec, visibilities: Sequence[float] | None = None) -> np.ndarray:
    states = edge_states(spec, visibilities)
    return qc.kron(*[states[p] for p in spec.edge_parties])


def build_assembly(
    spec: ScenarioSpec,
    observables: dict[str, list[np.ndarray]],
    scheme: CoefficientScheme | None = None,
    state: np.ndarray | None = None,
    visibilities: Sequence[float] | None = None,
) -> NetworkAssembly:
    """Assemble a network. Bob's observables default to the product construction."""
    spec.require_matrix_level()
    scheme = scheme or coefficient_scheme(spec)
    obs = {p: [np.asarray(o, dtype=complex) for o in observables[p]] for p in observables}
    if "B" not in obs:
        obs["B"] = bob_product_observables(spec, scheme, obs)
    if state is None:
        state = network_state(spec, visibilities)
    vis = tuple(float(v) for v in visibilities) if visibilities is not None else (1.0,) * len(spec.edge_parties)
    return NetworkAssembly(spec, network_layout(spec), np.asarray(state, dtype=complex), obs, scheme, vis)


def optimal_assembly(
    spec: ScenarioSpec,
    source: str = "explicit",
    bob: str = "product",
    visibilities: Sequence[float] | None = None,
) -> NetworkAssembly:
    """Optimal observables on Bell pairs (or Werner states when visibilities are given).

    ``source`` is "explicit" (fixed n = 3 sets and rows) or "generated" (general-n
    constructors); ``bob`` is "product" or "explicit" (standard scenario only).
    """
    if source not in ("explicit", "generated"):
        raise DomainError(f"unknown observable source {source!r}")
    spec.require_matrix_level()
    generated = source == "generated"
    scheme = coefficient_scheme(spec, generated=generated)
    obs = generated_observables(spec) if generated else explicit_observables(spec)
    if bob == "explicit":
        obs["B"] = explicit_bob_observables(spec)
    elif bob != "product":
        raise DomainError(f"unknown Bob construction {bob!r}")
    return build_assembly(spec, obs, scheme, visibilities=visibilities)


def combination_operator(scheme_row: Sequence[int], party_observables: list[np.ndarray]) -> np.ndarray:
    return combination(np.asarray(scheme_row), party_observables)


def term_operator(assembly: NetworkAssembly, j: int) -> np.ndarray:
    op = assembly.observable("B", j)
    for p in assembly.spec.edge_parties:
        op = assembly.combination(p, j) @ op
    return op


def term_value(assembly: NetworkAssembly, j: int) -> float:
    return qc.expectation(assembly.density(), term_operator(assembly, j))


@dataclass
class FunctionalResult:
    spec: ScenarioSpec
    terms: list[float]
    magnitudes: list[float]
    total: float
    root: int

    def to_dict(self) -> dict:
        return {
            "scenario": self.spec.kind,
            "n": self.spec.n,
            "terms": [sig(t) for t in self.terms],
            "magnitudes": [sig(m) for m in self.magnitudes],
            "total": sig(self.total),
            "root": self.root,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def functional_from_terms(spec: ScenarioSpec, terms: Sequence[float]) -> FunctionalResult:
    mags = [abs(float(t)) for t in terms]
    r = spec.root
    total = float(sum(m ** (1.0 / r) if m > 0 else 0.0 for m in mags))
    return FunctionalResult(spec, [float(t) for t in terms], mags, total, r)


def functional_value(assembly: NetworkAssembly) -> FunctionalResult:
    terms = [term_value(assembly, j) for j in range(assembly.spec.terms)]
    return functional_from_terms(assembly.spec, terms)


def _check_settings(assembly: NetworkAssembly, settings: Sequence[int]) -> None:
    parties = assembly.parties
    if len(settings) != len(parties):
        raise ShapeError(f"need one setting per party {parties}, got {len(settings)}")
    for p, s in zip(parties, settings):
        if not 0 <= s < len(assembly.observables[p]):
            raise DomainError(f"setting {s} out of range for party {p}")


def correlator(assembly: NetworkAssembly, settings: Sequence[int]) -> float:
    """Full correlator for settings ordered (A, B, C[, D])."""
    _check_settings(assembly, settings)
    op = None
    for p, s in zip(assembly.parties, settings):
        o = assembly.observable(p, s)
        op = o if op is None else op @ o
    return qc.expectation(assembly.density(), op)


def joint_probability_tensor(assembly: NetworkAssembly, settings: Sequence[int]) -> np.ndarray:
    """P[a, b, c(, d)] with outcome bit 0 meaning eigenvalue +1."""
    _check_settings(assembly, settings)
    dim = assembly.layout.dim
    eye = np.eye(dim, dtype=complex)
    projectors = []
    for p, s in zip(assembly.parties, settings):
        o = assembly.observable(p, s)
        projectors.append(((eye + o) / 2, (eye - o) / 2))
    rho = assembly.density()
    k = len(projectors)
    table = np.zeros((2,) * k)
    for outcome in itertools.product((0, 1), repeat=k):
        op = projectors[0][outcome[0]]
        for i in range(1, k):
            op = op @ projectors[i][outcome[i]]
        table[outcome] = qc.expectation(rho, op)
    return table


def correlator_from_probabilities(table: np.ndarray) -> float:
    signs = np.ones_like(table)
    for outcome in np.ndindex(table.shape):
        signs[outcome] = (-1) ** sum(outcome)
    return float(np.sum(signs * table))
