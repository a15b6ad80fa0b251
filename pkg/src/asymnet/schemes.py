"""Scenario definitions, coefficient sign schemes and observable constructors.

Every scenario is a star network: edge parties (A, C and, for trilocal
networks, D) each share a source with the central party B. Term ``j`` of a
functional combines one signed row per edge party with Bob's setting ``j``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import quantum as qc
from .errors import (
    CapabilityError,
    CapacityError,
    ConstraintError,
    ContractError,
    DegenerateCombinationError,
    DomainError,
    ShapeError,
)

KINDS = ("standard-bilocal", "bilocal-I", "bilocal-II", "trilocal-I", "trilocal-II")

# Largest network handled at matrix level: 8 qubits, i.e. bilocal n <= 7.
MAX_NETWORK_QUBITS = 8

R_ANGLE = 0.5 * math.sqrt(2 - math.sqrt(2))
T_ANGLE = 0.5 * math.sqrt(2 + math.sqrt(2))


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    n: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise DomainError(f"unknown scenario {self.kind!r}; choose from {', '.join(KINDS)}")
        n = self.n
        if n is None:
            n = 2 if self.kind == "standard-bilocal" else 3
        if self.kind == "standard-bilocal" and n != 2:
            raise DomainError("standard-bilocal is defined for n = 2 only")
        if n < 2:
            raise DomainError("n must be >= 2")
        object.__setattr__(self, "n", int(n))

    @property
    def trilocal(self) -> bool:
        return self.kind.startswith("trilocal")

    @property
    def edge_parties(self) -> tuple[str, ...]:
        return ("A", "C", "D") if self.trilocal else ("A", "C")

    @property
    def root(self) -> int:
        return 3 if self.trilocal else 2

    @property
    def big_n(self) -> int:
        return self.n // 2

    @property
    def settings(self) -> dict[str, int]:
        n, m = self.n, 2 ** (self.n - 1)
        return {
            "standard-bilocal": {"A": 2, "B": 2, "C": 2},
            "bilocal-I": {"A": m, "B": n, "C": n},
            "bilocal-II": {"A": m, "B": m, "C": n},
            "trilocal-I": {"A": m, "B": m, "C": n, "D": m},
            "trilocal-II": {"A": m, "B": n, "C": n, "D": n},
        }[self.kind]

    @property
    def terms(self) -> int:
        return self.settings["B"]

    @property
    def edge_qubits(self) -> dict[str, int]:
        """Qubits per edge party, equal to the Bell pairs on that edge."""
        big = max(self.big_n, 1)
        if self.kind == "bilocal-I":
            return {"A": big, "C": 1}
        if self.kind == "bilocal-II":
            return {"A": 1, "C": big}
        return {p: 1 for p in self.edge_parties}

    @property
    def total_qubits(self) -> int:
        return 2 * sum(self.edge_qubits.values())

    @property
    def matrix_level(self) -> bool:
        return not self.trilocal or self.n == 3

    def require_matrix_level(self) -> None:
        if self.trilocal and self.n != 3:
            raise CapabilityError(
                f"{self.kind} is evaluated at matrix level for n = 3 only; "
                "use the closed-form bound/optimum formulas for other n"
            )
        if self.total_qubits > MAX_NETWORK_QUBITS:
            raise CapacityError(
                f"{self.kind} n={self.n} needs {self.total_qubits} qubits "
                f"(maximum {MAX_NETWORK_QUBITS}); use the closed-form formulas"
            )

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n}


# ---------------------------------------------------------------------------
# sign schemes


def rac_bit_strings(n: int) -> np.ndarray:
    """One n-bit string per complement pair: a leading 0 then binary(x-1)."""
    m = 2 ** (n - 1)
    x = np.arange(m)
    bits = (x[:, None] >> np.arange(n - 2, -1, -1)[None, :]) & 1 if n > 1 else np.zeros((1, 0), int)
    return np.concatenate([np.zeros((m, 1), dtype=int), bits], axis=1)


def rac_rows(n: int) -> np.ndarray:
    """n x 2**(n-1) matrix with entry (j, x) = (-1)**y^x_j."""
    return (1 - 2 * rac_bit_strings(n)).T.copy()


def chain_rows(m: int) -> np.ndarray:
    """Row j is O_j + O_{j+1}; the last row wraps with O_{m+1} = -O_1."""
    rows = np.zeros((m, m), dtype=int)
    for j in range(m):
        rows[j, j] = 1
        if j + 1 < m:
            rows[j, j + 1] = 1
        else:
            rows[j, 0] = -1
    return rows


# Explicit n = 3 rows, except trilocal-II Diana row 2 (see README).
_RAC3_EXPLICIT = np.array([[1, 1, 1, -1], [1, 1, -1, 1], [1, -1, 1, 1]])
_RAC3_DUAL_EXPLICIT = np.array([[1, 1, 1], [1, 1, -1], [1, -1, 1], [-1, 1, 1]])
_DIANA_STAIRCASE = np.array([[1, 1, 1, 1], [1, 1, 1, -1], [1, 1, -1, -1], [1, -1, -1, -1]])
_DIANA_THREE = np.array([[1, 1, 1], [1, 1, -1], [1, -1, -1]])


@dataclass(frozen=True)
class CoefficientScheme:
    spec: ScenarioSpec
    rows: dict[str, np.ndarray]
    source: str = "explicit"

    def row(self, party: str, j: int) -> np.ndarray:
        return self.rows[party][j]


def coefficient_scheme(spec: ScenarioSpec, generated: bool = False) -> CoefficientScheme:
    """Sign rows of every edge party.

    With ``generated=False`` the explicit rows are used wherever they
    exist (n = 3); otherwise the general-n chain / bit-string rows are used.
    """
    n, m = spec.n, 2 ** (spec.n - 1)
    explicit = not generated and n == 3
    if spec.kind == "standard-bilocal" and not generated:
        pm = np.array([[1, 1], [1, -1]])
        rows = {"A": pm, "C": pm}
    elif spec.kind in ("standard-bilocal", "bilocal-I"):
        rows = {"A": _RAC3_EXPLICIT if explicit else rac_rows(n), "C": chain_rows(n)}
    elif spec.kind == "bilocal-II":
        rows = {"A": chain_rows(m), "C": _RAC3_DUAL_EXPLICIT if explicit else rac_rows(n).T}
    else:
        spec.require_matrix_level()
        if spec.kind == "trilocal-I":
            rows = {
                "A": chain_rows(m),
                "C": _RAC3_DUAL_EXPLICIT if explicit else rac_rows(n).T,
                "D": _DIANA_STAIRCASE,
            }
        else:
            rows = {
                "A": _RAC3_EXPLICIT if explicit else rac_rows(n),
                "C": chain_rows(n),
                "D": _DIANA_THREE,
            }
    rows = {p: np.array(r, dtype=int) for p, r in rows.items()}
    return CoefficientScheme(spec, rows, "generated" if generated else "explicit")


# ---------------------------------------------------------------------------
# observable constructors


def anticommuting_set(n: int) -> list[np.ndarray]:
    """n mutually anticommuting Pauli strings on floor(n/2) qubits.

    Jordan-Wigner ladder: Z..Z X I..I and Z..Z Y I..I on successive qubits,
    plus the all-Z string when n is odd.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    q = n // 2
    qc._check_dim(2**q)
    ops = []
    for k in range(q):
        for p in (qc.SX, qc.SY):
            factors = [qc.SZ] * k + [p] + [qc.I2] * (q - k - 1)
            ops.append(qc.kron(*factors))
    if n % 2:
        ops.append(qc.kron(*([qc.SZ] * q)) if q else np.eye(1, dtype=complex))
    return ops


def rac_observables(n: int) -> list[np.ndarray]:
    """2**(n-1) observables sum_j (-1)**y^x_j O_j / sqrt(n)."""
    if n < 2:
        raise DomainError("n must be >= 2")
    gens = anticommuting_set(n)
    signs = rac_rows(n)
    return [sum(int(signs[j, x]) * gens[j] for j in range(n)) / math.sqrt(n) for x in range(2 ** (n - 1))]


def chain_observables(n_settings: int) -> list[np.ndarray]:
    """Single-qubit observables at angles (k-1) pi / n_settings in the x-z plane."""
    if n_settings < 2:
        raise DomainError("n_settings must be >= 2")
    out = []
    for k in range(n_settings):
        theta = k * math.pi / n_settings
        out.append(math.cos(theta) * qc.SZ + math.sin(theta) * qc.SX)
    return out


def generated_observables(spec: ScenarioSpec) -> dict[str, list[np.ndarray]]:
    n, m = spec.n, 2 ** (spec.n - 1)
    if spec.kind in ("standard-bilocal", "bilocal-I"):
        return {"A": rac_observables(n), "C": chain_observables(n)}
    if spec.kind == "bilocal-II":
        return {"A": chain_observables(m), "C": anticommuting_set(n)}
    spec.require_matrix_level()
    explicit = explicit_observables(spec)
    if spec.kind == "trilocal-I":
        return {"A": chain_observables(m), "C": anticommuting_set(n), "D": explicit["D"]}
    return {"A": rac_observables(n), "C": chain_observables(n), "D": explicit["D"]}


def explicit_observables(spec: ScenarioSpec) -> dict[str, list[np.ndarray]]:
    """Transcribed qubit observables of the edge parties.

    Scenarios without an explicit set (n other than 2/3) fall back to the
    general-n constructors.
    """
    X, Y, Z = qc.SX, qc.SY, qc.SZ
    s2, s3 = math.sqrt(2), math.sqrt(3)
    r, t = R_ANGLE, T_ANGLE
    if spec.kind == "standard-bilocal":
        pair = [(Z + X) / s2, (Z - X) / s2]
        return {"A": pair, "C": [o.copy() for o in pair]}
    if spec.n != 3:
        return generated_observables(spec)
    rac = [(X + Y + Z) / s3, (X + Y - Z) / s3, (X - Y + Z) / s3, (-X + Y + Z) / s3]
    chain3 = [Z, s3 / 2 * X + Z / 2, s3 / 2 * X - Z / 2]
    chain4 = [r * X + t * Z, t * X + r * Z, t * X - r * Z, r * X - t * Z]
    pauli = [X, Y, Z]
    if spec.kind == "bilocal-I":
        return {"A": rac, "C": chain3}
    if spec.kind == "bilocal-II":
        return {"A": chain4, "C": pauli}
    if spec.kind == "trilocal-I":
        diana = [-t * X + r * Z, -t * X - r * Z, -r * X - t * Z, r * X - t * Z]
        return {"A": chain4, "C": pauli, "D": diana}
    diana = [-s3 / 2 * X + Z / 2, -s3 / 2 * X - Z / 2, -Z]
    return {"A": rac, "C": chain3, "D": diana}


def explicit_bob_observables(spec: ScenarioSpec) -> list[np.ndarray]:
    """Bob's explicit two-setting observables (Z x Z, X x X); standard scenario only."""
    if spec.kind != "standard-bilocal":
        raise CapabilityError("explicit Bob observables exist for standard-bilocal only")
    return [qc.kron(qc.SZ, qc.SZ), qc.kron(qc.SX, qc.SX)]


def combination(row: np.ndarray, ops: list[np.ndarray]) -> np.ndarray:
    if len(row) != len(ops):
        raise ShapeError(f"row of width {len(row)} for {len(ops)} observables")
    out = np.zeros_like(ops[0], dtype=complex)
    for s, o in zip(row, ops):
        if s:
            out = out + s * o
    return out


def bob_product_observables(
    spec: ScenarioSpec,
    scheme: CoefficientScheme,
    edge_observables: dict[str, list[np.ndarray]],
    edge_states: dict[str, np.ndarray] | None = None,
    tol: float = 1e-8,
) -> list[np.ndarray]:
    """Bob's setting j: product over edges of the transposed normalised combinations.

    The transpose makes <O x O^T> = 1 on (|00>+|11>)/sqrt2 for every involution,
    including those containing sigma_y.
    """
    bobs = []
    for j in range(spec.terms):
        factors = []
        for p in spec.edge_parties:
            comb = combination(scheme.row(p, j), edge_observables[p])
            q = qc.num_qubits(comb.shape[0])
            state = edge_states[p] if edge_states else qc.bell_pairs(q)
            layout = qc.QubitLayout((qc.Block(p, "edge", q), qc.Block("B", p, q)))
            omega = qc.action_norm(state, qc.embed(comb, layout, 0))
            if omega < 1e-12:
                raise DegenerateCombinationError(f"party {p} combination {j + 1} has zero norm")
            factors.append(comb.T / omega)
        b = qc.kron(*factors)
        dev = float(np.max(np.abs(b @ b - np.eye(b.shape[0]))))
        if dev > tol:
            raise ConstraintError(f"Bob observable {j + 1} is not an involution (deviation {dev:.2e})")
        bobs.append(b)
    return bobs


def check_observables(spec: ScenarioSpec, observables: dict[str, list[np.ndarray]]) -> None:
    """Counts, block dimensions and Hermiticity. Involution is audited separately."""
    for p in spec.edge_parties + ("B",):
        if p not in observables:
            if p == "B":
                continue
            raise ShapeError(f"missing observables for party {p}")
        ops = observables[p]
        if len(ops) != spec.settings[p]:
            raise ShapeError(f"party {p} needs {spec.settings[p]} observables, got {len(ops)}")
        for o in ops:
            if not qc.is_hermitian(o):
                raise ContractError(f"party {p} has a non-Hermitian observable")


# ---------------------------------------------------------------------------
# observable file format


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _parse_complex(s: str) -> complex:
    s = s.strip().replace(" ", "")
    if s.endswith("i"):
        s = s[:-1] + "j"
    return complex(s)


@dataclass
class ObservableDocument:
    spec: ScenarioSpec
    observables: dict[str, list[np.ndarray]] = field(default_factory=dict)
    scheme: str = "explicit"


def dumps_observables(doc: ObservableDocument) -> str:
    parties = {}
    for p in sorted(doc.observables):
        parties[p] = [[[_fmt_complex(z) for z in row] for row in op] for op in doc.observables[p]]
    payload = {"scheme": doc.scheme, "scenario": doc.spec.kind, "n": doc.spec.n, "parties": parties}
    return json.dumps(payload, indent=1) + "\n"


def loads_observables(text: str) -> ObservableDocument:
    data = json.loads(text)
    spec = ScenarioSpec(data["scenario"], data.get("n"))
    obs = {}
    for p, ops in data["parties"].items():
        mats = [np.array([[_parse_complex(z) for z in row] for row in op], dtype=complex) for op in ops]
        for mat in mats:
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
                raise ShapeError(f"party {p}: observable is not a square matrix")
        obs[p] = mats
    check_observables(spec, obs)
    return ObservableDocument(spec, obs, data.get("scheme", "custom"))


def save_observables(path: str | Path, doc: ObservableDocument) -> None:
    Path(path).write_text(dumps_observables(doc))


def load_observables(path: str | Path) -> ObservableDocument:
    return loads_observables(Path(path).read_text())
