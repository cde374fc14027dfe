import logging
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

log = logging.getLogger(__name__)

PROB_TOLERANCE = 1e-12
# symbols are indexed as 2*bt + ph, so xor on indices equals symbol addition
SYMBOL_INDICES = np.arange(4)


@dataclass(frozen=True, order=True)
class BellSymbol:
    """One character of the Bell alphabet: the pair (bt, ph) labelling
    the Bell state with bit-flip component bt and phase component ph.
    """

    bt: int = 0
    ph: int = 0

    def __post_init__(self):
        if self.bt not in (0, 1) or self.ph not in (0, 1):
            raise ValueError(
                f"Bell symbol components must be bits, got {self.bt=} "
                f"{self.ph=}"
            )

    @property
    def index(self) -> int:
        return 2 * self.bt + self.ph

    @classmethod
    def from_index(cls, index: int) -> "BellSymbol":
        if not 0 <= int(index) < 4:
            raise ValueError(f"no Bell symbol for {index=}")
        return BELL_SYMBOLS[int(index)]

    def __add__(self, other: "BellSymbol") -> "BellSymbol":
        return symbol_add(self, other)

    def __str__(self) -> str:
        return f"({self.bt},{self.ph})"


BELL_SYMBOLS = tuple(BellSymbol(i >> 1, i & 1) for i in range(4))
PHI_00 = BELL_SYMBOLS[0]

SymbolLike = Union[BellSymbol, int, tuple]


def as_symbol(s: SymbolLike) -> BellSymbol:
    """Coerces a BellSymbol, an index 0..3 or a (bt, ph) tuple"""
    if isinstance(s, BellSymbol):
        return s
    if isinstance(s, tuple):
        return BellSymbol(*s)
    return BellSymbol.from_index(s)


def symbol_add(a: BellSymbol, b: BellSymbol) -> BellSymbol:
    """Coordinate-wise addition modulo two of two Bell symbols.

    :param a: first symbol
    :type a: BellSymbol
    :param b: second symbol
    :type b: BellSymbol
    :return: (a.bt xor b.bt, a.ph xor b.ph)
    :rtype: BellSymbol
    """
    return BELL_SYMBOLS[a.index ^ b.index]


def _frozen(bits) -> np.ndarray:
    arr = np.array(bits, dtype=np.uint8).reshape(-1)
    arr.setflags(write=False)
    return arr


class BellWord:
    """A word over the Bell alphabet, stored densely as two bit arrays.

    Words are immutable: the underlying arrays are read-only and sub-word
    extraction returns fresh copies.
    """

    __slots__ = ("_bt", "_ph")

    def __init__(self, bt: Sequence[int], ph: Sequence[int]):
        """constructor

        :param bt: the bit-flip components, one per round
        :param ph: the phase components, one per round
        """
        bt_arr, ph_arr = _frozen(bt), _frozen(ph)
        if len(bt_arr) != len(ph_arr):
            raise ValueError(
                f"component length mismatch {len(bt_arr)=} {len(ph_arr)=}"
            )
        if len(bt_arr) < 1:
            raise ValueError("a Bell word holds at least one symbol")
        if np.any(bt_arr > 1) or np.any(ph_arr > 1):
            raise ValueError("Bell word components must be bits")
        self._bt = bt_arr
        self._ph = ph_arr

    @classmethod
    def from_symbols(cls, symbols: Iterable[SymbolLike]) -> "BellWord":
        syms = [as_symbol(s) for s in symbols]
        return cls([s.bt for s in syms], [s.ph for s in syms])

    @classmethod
    def from_indices(cls, indices: Sequence[int]) -> "BellWord":
        idx = np.asarray(indices, dtype=np.uint8)
        return cls(idx >> 1, idx & 1)

    @classmethod
    def zeros(cls, n: int) -> "BellWord":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @property
    def bt(self) -> np.ndarray:
        return self._bt

    @property
    def ph(self) -> np.ndarray:
        return self._ph

    @property
    def indices(self) -> np.ndarray:
        return (2 * self._bt + self._ph).astype(np.uint8)

    def __len__(self) -> int:
        return len(self._bt)

    def __getitem__(self, i: int) -> BellSymbol:
        return BELL_SYMBOLS[2 * int(self._bt[i]) + int(self._ph[i])]

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BellWord):
            return NotImplemented
        return bool(
            np.array_equal(self._bt, other._bt)
            and np.array_equal(self._ph, other._ph)
        )

    def __add__(self, other: "BellWord") -> "BellWord":
        return word_add(self, other)

    def __repr__(self) -> str:
        shown = ",".join(str(s) for s in list(self)[:8])
        more = "..." if len(self) > 8 else ""
        return f"BellWord[{len(self)}]({shown}{more})"

    def sub_word(self, t: Sequence[int]) -> "BellWord":
        """the word q_t: symbols at the indices in t, in index order

        :param t: index set (duplicates are ignored)
        :return: a copy holding the selected symbols
        :rtype: BellWord
        """
        sel = np.unique(np.asarray(t, dtype=np.int64))
        if len(sel) and (sel[0] < 0 or sel[-1] >= len(self)):
            raise IndexError(f"index set out of range for {len(self)=}")
        return BellWord(self._bt[sel], self._ph[sel])

    def complement_word(self, t: Sequence[int]) -> "BellWord":
        """the word q_{-t}: symbols at every index not in t"""
        mask = np.ones(len(self), dtype=bool)
        mask[np.asarray(t, dtype=np.int64)] = False
        return BellWord(self._bt[mask], self._ph[mask])


def word_add(a: BellWord, b: BellWord) -> BellWord:
    """Symbol-wise addition of two equally long Bell words"""
    if len(a) != len(b):
        raise ValueError(f"cannot add words of {len(a)=} and {len(b)=}")
    return BellWord(a.bt ^ b.bt, a.ph ^ b.ph)


def ph_weight(w: BellWord) -> float:
    """relative Hamming weight of the phase component of the word"""
    if len(w) == 0:
        raise ValueError("weight of an empty word is undefined")
    return float(np.count_nonzero(w.ph)) / len(w)


def bt_weight(w: BellWord) -> float:
    """relative Hamming weight of the bit-flip component of the word"""
    if len(w) == 0:
        raise ValueError("weight of an empty word is undefined")
    return float(np.count_nonzero(w.bt)) / len(w)


class BellDiagonal:
    """Probability distribution over the four Bell symbols.

    Describes the Bell-diagonal state of a single link, or of a chain of
    links composed by honest entanglement swapping.
    """

    __slots__ = ("_probs",)

    def __init__(self, probs: Sequence[float]):
        """constructor

        :param probs: four probabilities indexed by BellSymbol.index,
          i.e. in the order (0,0), (0,1), (1,0), (1,1)
        :type probs: Sequence[float]
        """
        arr = np.array(probs, dtype=np.float64).reshape(-1)
        if arr.shape != (4,):
            raise ValueError(f"need 4 probabilities, got {arr.shape=}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError(f"probabilities must be non-negative {arr=}")
        total = float(arr.sum())
        if abs(total - 1.0) > PROB_TOLERANCE:
            raise ValueError(f"probabilities do not sum to one {total=}")
        arr.setflags(write=False)
        self._probs = arr

    @classmethod
    def delta(cls, s: SymbolLike = PHI_00) -> "BellDiagonal":
        probs = np.zeros(4)
        probs[as_symbol(s).index] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls) -> "BellDiagonal":
        return cls(np.full(4, 0.25))

    @classmethod
    def from_mapping(cls, mapping: Mapping[SymbolLike, float]):
        probs = np.zeros(4)
        for s, p in mapping.items():
            probs[as_symbol(s).index] += p
        return cls(probs)

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    def __getitem__(self, s: SymbolLike) -> float:
        return float(self._probs[as_symbol(s).index])

    def __iter__(self):
        return iter(self._probs.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BellDiagonal):
            return NotImplemented
        return bool(np.array_equal(self._probs, other._probs))

    def __repr__(self) -> str:
        inner = ", ".join(f"{p:.6g}" for p in self._probs)
        return f"BellDiagonal({inner})"

    def isclose(self, other: "BellDiagonal", atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self._probs - other._probs)) <= atol)


def _checked(p) -> BellDiagonal:
    if not isinstance(p, BellDiagonal):
        # coercion goes through the validating constructor
        return BellDiagonal(p)
    return p


def convolve(p: BellDiagonal, q: BellDiagonal) -> BellDiagonal:
    """Distribution of a xor b for independent a ~ p and b ~ q.

    This is the composition law of two Bell-diagonal links joined by an
    honest Bell swap followed by the Pauli correction.

    :param p: distribution of the first link
    :type p: BellDiagonal
    :param q: distribution of the second link
    :type q: BellDiagonal
    :return: out(s) = sum over a xor b = s of p(a) q(b)
    :rtype: BellDiagonal
    """
    p, q = _checked(p), _checked(q)
    pa, qa = p.probs, q.probs
    out = np.array([pa @ qa[SYMBOL_INDICES ^ s] for s in SYMBOL_INDICES])
    # clip rounding drift so the result passes validation on long folds
    out = np.clip(out, 0.0, None)
    return BellDiagonal(out / out.sum())


def convolve_all(dists: Iterable[BellDiagonal]) -> BellDiagonal:
    """fold of convolve, the empty fold being the noiseless delta"""
    return reduce(convolve, dists, BellDiagonal.delta(PHI_00))


def phase_error_prob(p: BellDiagonal) -> float:
    """probability of a phase flip: p(0,1) + p(1,1)"""
    p = _checked(p)
    return float(p.probs[1] + p.probs[3])


def bit_error_prob(p: BellDiagonal) -> float:
    """probability of a bit flip: p(1,0) + p(1,1)"""
    p = _checked(p)
    return float(p.probs[2] + p.probs[3])


def parity_phase_error(phase_errors: Iterable[float]) -> float:
    """Closed form of the probability that an odd number of independent
    phase flips occur, (1 - prod(1 - 2 p_i)) / 2.
    """
    prod = 1.0
    for p in phase_errors:
        prod *= 1.0 - 2.0 * p
    return (1.0 - prod) / 2.0
