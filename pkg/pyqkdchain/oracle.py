"""Brute-force density-matrix simulation of short repeater chains.

Used to certify, on tiny instances, the symbol-level algebra in
:mod:`pyqkdchain.bell`: Bell swaps on products of Bell states, the Pauli
correction step and the claim that honest chains compose by convolution.
Qubits are ordered most-significant first, i.e. the state of qubits
(q0, q1, ...) lives in kron(H_q0, H_q1, ...).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .bell import BELL_SYMBOLS, BellDiagonal, BellSymbol, as_symbol

log = logging.getLogger(__name__)

DM_TOLERANCE = 1e-10
MAX_QUBITS = 8
MAX_LINKS = MAX_QUBITS // 2

_SQRT_HALF = 1.0 / np.sqrt(2.0)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = _SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex)


class ChainAlgebraError(RuntimeError):
    """The exact simulation produced a state the Bell algebra can not
    describe (e.g. a final state that is not Bell-diagonal)."""


class DensityMatrix:
    """Square complex matrix describing the state of k <= 8 qubits.

    The constructor verifies Hermiticity, unit trace and positivity
    within DM_TOLERANCE.
    """

    __slots__ = ("_rho",)

    def __init__(self, entries, *, check: bool = True):
        rho = np.array(entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"density matrix must be square {rho.shape=}")
        dim = rho.shape[0]
        n_qubits = int(round(np.log2(dim))) if dim > 0 else -1
        if dim < 2 or 2**n_qubits != dim:
            raise ValueError(f"dimension is not a power of two {dim=}")
        if n_qubits > MAX_QUBITS:
            raise ValueError(f"too many qubits {n_qubits=} > {MAX_QUBITS}")
        if check:
            _check_density(rho)
        rho.setflags(write=False)
        self._rho = rho

    @property
    def entries(self) -> np.ndarray:
        return self._rho

    @property
    def dim(self) -> int:
        return self._rho.shape[0]

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.dim)))

    @classmethod
    def from_pure(cls, vector) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        dim = 2**n_qubits
        return cls(np.eye(dim, dtype=complex) / dim)

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self._rho, other._rho))

    def distance(self, other: "DensityMatrix") -> float:
        """max-abs entry distance, the comparison used by the oracle"""
        return float(np.max(np.abs(self._rho - other._rho)))

    def isclose(self, other: "DensityMatrix", atol=DM_TOLERANCE) -> bool:
        return self.dim == other.dim and self.distance(other) <= atol

    def fidelity_pure(self, vector) -> float:
        v = np.asarray(vector, dtype=complex).reshape(-1)
        return float(np.real(v.conj() @ self._rho @ v))


def _check_density(rho: np.ndarray) -> None:
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > DM_TOLERANCE:
        raise ValueError(f"matrix is not Hermitian, deviation {herm=}")
    trace = complex(np.trace(rho))
    if abs(trace - 1.0) > DM_TOLERANCE:
        raise ValueError(f"matrix does not have unit trace {trace=}")
    min_eig = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
    if min_eig < -DM_TOLERANCE:
        raise ValueError(f"matrix is not positive {min_eig=}")


@dataclass(frozen=True)
class SwapOutcome:
    """One branch of a Bell measurement.

    :param outcome: the Bell symbol reported by the measuring repeater
    :param post_state: normalized state of the remaining qubits
    :param probability: probability of this outcome
    :param degenerate: True when the outcome has probability zero, in
      which case post_state is an arbitrary (maximally mixed) placeholder
    """

    outcome: BellSymbol
    post_state: DensityMatrix
    probability: float
    degenerate: bool = field(default=False)


def bell_state_vector(s) -> np.ndarray:
    """Pure Bell state (|0,x> + (-1)^y |1,x̄>)/sqrt(2) for s = (x, y).

    :param s: the Bell symbol (bt, ph) = (x, y)
    :return: normalized 4-dimensional complex vector
    :rtype: np.ndarray
    """
    s = as_symbol(s)
    vec = np.zeros(4, dtype=complex)
    vec[s.bt] = _SQRT_HALF  # |0,x>
    vec[2 + (1 - s.bt)] = (-1) ** s.ph * _SQRT_HALF  # |1,x̄>
    return vec


BELL_VECTORS = tuple(bell_state_vector(s) for s in BELL_SYMBOLS)


def bell_projector(s) -> np.ndarray:
    v = BELL_VECTORS[as_symbol(s).index]
    return np.outer(v, v.conj())


def bell_diagonal_dm(p: BellDiagonal) -> DensityMatrix:
    """mixture of the four Bell projectors weighted by p"""
    rho = sum(
        prob * bell_projector(s) for s, prob in zip(BELL_SYMBOLS, p.probs)
    )
    return DensityMatrix(rho)


def bell_decomposition(
    state: DensityMatrix, atol: float = DM_TOLERANCE
) -> BellDiagonal:
    """Reads the Bell weights <phi_s|rho|phi_s> of a two-qubit state.

    :raises ChainAlgebraError: if the state is not Bell-diagonal within
      atol
    """
    if state.n_qubits != 2:
        raise ValueError(f"need a two-qubit state, got {state.n_qubits=}")
    weights = np.array(
        [state.fidelity_pure(v) for v in BELL_VECTORS], dtype=np.float64
    )
    rebuilt = sum(w * bell_projector(s) for s, w in zip(BELL_SYMBOLS, weights))
    deviation = float(np.max(np.abs(rebuilt - state.entries)))
    if deviation > atol:
        raise ChainAlgebraError(
            f"state is not Bell-diagonal, {deviation=} exceeds {atol=}"
        )
    weights = np.clip(weights, 0.0, None)
    return BellDiagonal(weights / weights.sum())


def depolarize(state: DensityMatrix, q: float) -> DensityMatrix:
    """two-qubit depolarizing channel (1 - q) rho + q/4 I"""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"depolarizing parameter out of range {q=}")
    dim = state.dim
    return DensityMatrix(
        (1.0 - q) * state.entries + q * np.eye(dim, dtype=complex) / dim
    )


def _move_to_front(
    rho: np.ndarray, n: int, pair: Tuple[int, int]
) -> np.ndarray:
    """reshapes rho into (4, rest, 4, rest) with the pair's qubits first"""
    rest = [k for k in range(n) if k not in pair]
    order = list(pair) + rest
    tensor = rho.reshape((2,) * (2 * n))
    tensor = tensor.transpose(order + [n + k for k in order])
    rest_dim = 2 ** (n - 2)
    return tensor.reshape(4, rest_dim, 4, rest_dim)


def bell_swap(
    joint: DensityMatrix, measured_pair: Sequence[int]
) -> List[SwapOutcome]:
    """Bell measurement of two qubits of a joint state.

    Projects the indicated pair onto each of the four Bell states and
    returns, per outcome, the probability and the normalized post-state
    on the remaining qubits (kept in their original relative order).

    :param joint: state of at least 4 qubits
    :type joint: DensityMatrix
    :param measured_pair: the two distinct qubit indices measured; the
      first index plays the role of the first Bell qubit
    :type measured_pair: Sequence[int]
    :return: four SwapOutcome entries in BellSymbol.index order
    :rtype: List[SwapOutcome]
    """
    n = joint.n_qubits
    i, j = (int(k) for k in measured_pair)
    if n < 4:
        raise ValueError(f"a swap needs a joint state of >= 4 qubits {n=}")
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"bad measured pair {i=} {j=} for {n=}")
    blocks = _move_to_front(joint.entries, n, (i, j))
    outcomes = []
    for s, v in zip(BELL_SYMBOLS, BELL_VECTORS):
        post = np.einsum("a,aibj,b->ij", v.conj(), blocks, v)
        prob = float(np.real(np.trace(post)))
        if prob <= DM_TOLERANCE:
            log.debug(f"zero-probability swap outcome {s=} {prob=}")
            outcomes.append(
                SwapOutcome(
                    s, DensityMatrix.maximally_mixed(n - 2), 0.0, True
                )
            )
            continue
        outcomes.append(SwapOutcome(s, DensityMatrix(post / prob), prob))
    total = sum(o.probability for o in outcomes)
    assert abs(total - 1.0) <= DM_TOLERANCE, f"swap lost norm {total=}"
    return outcomes


def pauli_operator(outcome) -> np.ndarray:
    """single-qubit correction for a reported outcome: X^bt first, then
    Z^ph, so that |phi_{s+x}> maps to |phi_s> up to a global phase"""
    outcome = as_symbol(outcome)
    ops = np.eye(2, dtype=complex)
    if outcome.bt:
        ops = PAULI_X @ ops
    if outcome.ph:
        ops = PAULI_Z @ ops
    return ops


def pauli_correct(
    state: DensityMatrix, outcome, target: int = 0
) -> DensityMatrix:
    """Applies the Pauli correction for outcome to the target qubit.

    :param state: the state to correct
    :param outcome: the Bell symbol reported by the swap
    :param target: index of the corrected qubit (Alice's is 0)
    :return: U rho U^dagger with U acting on qubit target only
    :rtype: DensityMatrix
    """
    n = state.n_qubits
    if not 0 <= target < n:
        raise IndexError(f"target qubit out of range {target=} {n=}")
    unitary = np.kron(
        np.kron(np.eye(2**target), pauli_operator(outcome)),
        np.eye(2 ** (n - target - 1)),
    )
    return DensityMatrix(unitary @ state.entries @ unitary.conj().T)


def basis_disagreement(s, basis: str = "Z") -> float:
    """Exact probability that Alice and Bob obtain different outcomes
    when both measure |phi_s> in the given basis ("Z" or "X").
    """
    if basis not in ("Z", "X"):
        raise ValueError(f"unknown measurement basis {basis=}")
    rho = bell_projector(s)
    if basis == "X":
        rotate = np.kron(HADAMARD, HADAMARD)
        rho = rotate @ rho @ rotate.conj().T
    # computational basis |ab>, index 2a + b; a != b at indices 1 and 2
    return float(np.real(rho[1, 1] + rho[2, 2]))


def chain_state(links: Sequence[BellDiagonal]) -> DensityMatrix:
    """product state of all links; link k holds qubits (2k, 2k+1)"""
    state = bell_diagonal_dm(links[0])
    for link in links[1:]:
        state = state.tensor(bell_diagonal_dm(link))
    return state


def simulate_chain_exact(
    links: Sequence[BellDiagonal], order: Optional[Sequence[int]] = None
) -> BellDiagonal:
    """Runs the honest repeater chain on explicit density matrices.

    Every repeater r (1..c) Bell-measures its two qubits; each outcome is
    followed by the matching Pauli correction on Alice's qubit and the
    branches are recombined with their probabilities, which is the
    exhaustive enumeration of all outcome strings.

    :param links: 1 to 4 link distributions, Alice side first
    :type links: Sequence[BellDiagonal]
    :param order: (optional) order in which repeaters 1..c swap,
      defaults to left-to-right
    :type order: Sequence[int]
    :return: the Bell-diagonal decomposition of the final Alice-Bob state
    :rtype: BellDiagonal
    :raises ChainAlgebraError: if the final state is not Bell-diagonal
    """
    links = list(links)
    if not 1 <= len(links) <= MAX_LINKS:
        raise ValueError(
            f"exact simulation supports 1..{MAX_LINKS} links, got "
            f"{len(links)=}"
        )
    repeaters = len(links) - 1
    order = list(order) if order is not None else list(range(1, repeaters + 1))
    assert sorted(order) == list(
        range(1, repeaters + 1)
    ), f"swap order must be a permutation of the repeaters {order=}"

    state = chain_state(links)
    labels = list(range(2 * len(links)))  # qubit labels still present
    for r in order:
        pair = (labels.index(2 * r - 1), labels.index(2 * r))
        log.debug(f"swapping at repeater {r=} on positions {pair=}")
        mixed = np.zeros((2 ** (len(labels) - 2),) * 2, dtype=complex)
        for branch in bell_swap(state, pair):
            if branch.degenerate:
                continue
            corrected = pauli_correct(branch.post_state, branch.outcome, 0)
            mixed += branch.probability * corrected.entries
        labels = [lb for lb in labels if lb not in (2 * r - 1, 2 * r)]
        state = DensityMatrix(mixed)
    assert labels == [0, 2 * len(links) - 1], f"unexpected {labels=}"
    return bell_decomposition(state)
