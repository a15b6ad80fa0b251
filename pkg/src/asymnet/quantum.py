"""Dense complex linear algebra over an ordered qubit layout.

Operators are plain ``numpy`` complex arrays. Kets are 1-D arrays, density
operators and observables are square 2-D arrays. Everything here is a pure
function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import CapacityError, ContractError, DomainError, ShapeError

MAX_DIM = 2**14
HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class Block:
    party: str
    role: str
    qubits: int


@dataclass(frozen=True)
class QubitLayout:
    """Ordered tensor factors; qubit 0 is the most significant."""

    blocks: tuple[Block, ...]

    def __post_init__(self) -> None:
        for b in self.blocks:
            if b.qubits <= 0:
                raise ShapeError(f"block {b} must hold at least one qubit")

    @property
    def total_qubits(self) -> int:
        return sum(b.qubits for b in self.blocks)

    @property
    def dim(self) -> int:
        return 2**self.total_qubits

    def offset(self, index: int) -> int:
        return sum(b.qubits for b in self.blocks[:index])

    def qubits_of(self, index: int) -> list[int]:
        start = self.offset(index)
        return list(range(start, start + self.blocks[index].qubits))

    def index(self, party: str, role: str) -> int:
        for i, b in enumerate(self.blocks):
            if b.party == party and b.role == role:
                return i
        raise KeyError((party, role))


def _check_dim(dim: int, max_dim: int = MAX_DIM) -> None:
    if dim > max_dim:
        raise CapacityError(f"dimension {dim} exceeds maximum {max_dim}")


def kron(*ops: np.ndarray, max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product of one or more operators (or kets)."""
    if not ops:
        raise ShapeError("kron needs at least one operand")
    dim = 1
    for op in ops:
        dim *= op.shape[0]
    _check_dim(dim, max_dim)
    return reduce(np.kron, [np.asarray(op, dtype=complex) for op in ops])


def num_qubits(dim: int) -> int:
    q = int(dim).bit_length() - 1
    if 2**q != dim:
        raise ShapeError(f"dimension {dim} is not a power of two")
    return q


def permute_qubits(arr: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder qubit tensor factors.

    ``order[k]`` is the old position of the qubit that ends up at position k.
    Works on kets and on square operators.
    """
    q = len(order)
    order = list(order)
    if arr.ndim == 1:
        return arr.reshape([2] * q).transpose(order).reshape(-1)
    t = arr.reshape([2] * (2 * q))
    return t.transpose(order + [q + k for k in order]).reshape(2**q, 2**q)


def embed(op: np.ndarray, layout: QubitLayout, block: int | Sequence[int]) -> np.ndarray:
    """Lift ``op`` to the full layout, acting on one block or on several blocks.

    For several blocks, ``op`` acts on their concatenation in the given order.
    """
    blocks = [block] if isinstance(block, (int, np.integer)) else list(block)
    targets: list[int] = []
    for b in blocks:
        targets.extend(layout.qubits_of(b))
    if op.shape != (2 ** len(targets), 2 ** len(targets)):
        raise ShapeError(
            f"operator of shape {op.shape} does not fit blocks {blocks} "
            f"({len(targets)} qubits)"
        )
    total = layout.total_qubits
    _check_dim(2**total)
    rest = [k for k in range(total) if k not in targets]
    full = np.kron(np.asarray(op, dtype=complex), np.eye(2 ** len(rest), dtype=complex))
    # full is ordered (targets..., rest...); position of each layout qubit in it
    current = targets + rest
    order = [current.index(k) for k in range(total)]
    return permute_qubits(full, order)


def is_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= tol)


def is_involution(op: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    eye = np.eye(op.shape[0])
    return is_hermitian(op, tol) and bool(np.max(np.abs(op @ op - eye)) <= tol)


def as_density(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state


def is_pure(state: np.ndarray) -> bool:
    return np.asarray(state).ndim == 1


def expectation(state: np.ndarray, op: np.ndarray) -> float:
    """``<psi|O|psi>`` for kets or ``Tr(rho O)`` for density operators."""
    state = np.asarray(state, dtype=complex)
    if op.shape[0] != state.shape[0] or op.shape[0] != op.shape[1]:
        raise ShapeError(f"operator {op.shape} does not match state {state.shape}")
    if not is_hermitian(op):
        raise ContractError("expectation requires a Hermitian operator")
    if state.ndim == 1:
        val = np.vdot(state, op @ state)
    else:
        val = np.einsum("ij,ji->", state, op)
    if abs(val.imag) > HERMITIAN_TOL:
        raise ContractError(f"imaginary residue {val.imag:.3e} in expectation")
    return float(val.real)


def action_norm(state: np.ndarray, op: np.ndarray) -> float:
    """Euclidean norm of ``O|psi>``."""
    state = np.asarray(state, dtype=complex)
    if state.ndim != 1:
        raise ShapeError("action_norm needs a ket")
    if op.shape[1] != state.shape[0]:
        raise ShapeError(f"operator {op.shape} does not match ket {state.shape}")
    return float(np.linalg.norm(op @ state))


def bell_pairs(n_pairs: int) -> np.ndarray:
    """``n_pairs`` copies of (|00>+|11>)/sqrt2 on the layout [left n | right n].

    Qubit i of the left block is paired with qubit i of the right block, so
    the result is sum_i |i>|i>/sqrt(d) with d = 2**n_pairs.
    """
    if n_pairs < 1:
        raise DomainError("n_pairs must be >= 1")
    d = 2**n_pairs
    _check_dim(d * d)
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * (d + 1)] = 1.0 / np.sqrt(d)
    return psi


def werner(v: float) -> np.ndarray:
    """``v |Phi+><Phi+| + (1-v) I/4``."""
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"visibility {v} outside [0, 1]")
    phi = bell_pairs(1)
    return v * np.outer(phi, phi.conj()) + (1.0 - v) * np.eye(4, dtype=complex) / 4.0


def werner_pairs(v: float, n_pairs: int) -> np.ndarray:
    """N-fold tensor power of ``werner(v)`` reordered to [left n | right n]."""
    rho = kron(*([werner(v)] * n_pairs))
    # pair-major order is L0 R0 L1 R1 ...; move to L0 L1 ... R0 R1 ...
    order = [2 * i for i in range(n_pairs)] + [2 * i + 1 for i in range(n_pairs)]
    return permute_qubits(rho, order)


def check_density(rho: np.ndarray, tol: float = NORM_TOL) -> None:
    if not is_hermitian(rho, tol):
        raise ContractError("density operator is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ContractError("density operator trace differs from 1")
    if np.linalg.eigvalsh(rho).min() < -HERMITIAN_TOL:
        raise ContractError("density operator has a negative eigenvalue")


def rotation(axis: Sequence[float], angle: float) -> np.ndarray:
    """Single-qubit SU(2) rotation ``exp(-i angle/2 n.sigma)``."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    gen = n[0] * SX + n[1] * SY + n[2] * SZ
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * gen
