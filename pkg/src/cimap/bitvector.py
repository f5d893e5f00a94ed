"""
Packed fixed-width bit vectors and bit matrices.

Bits are stored little-endian in `numpy.uint64` words: bit `i` lives in word `i // 64`
at position `i % 64`. Bits beyond the vector length are always zero.
"""

import numpy as np

from typing import Iterable, Union

WORD_BITS = 64
WORD_DTYPE = np.dtype('<u8')

BitLike = Union["BitVector", Iterable[int], np.ndarray]


def n_words(length: int) -> int:
    """Number of 64-bit words needed to hold `length` bits."""
    return (length + WORD_BITS - 1) // WORD_BITS


def tail_mask(length: int) -> np.uint64:
    """Mask of the valid bits in the last word of a `length`-bit vector."""
    rem = length % WORD_BITS
    if rem == 0:
        return np.uint64(0xFFFFFFFFFFFFFFFF)
    return np.uint64((1 << rem) - 1)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """
    Pack the last axis of a 0/1 array into little-endian uint64 words.

    Parameters
    ----------
    bits : numpy.ndarray
        Array of shape `(*l, n)` with entries interpreted as booleans.

    Returns
    -------
    numpy.ndarray
        Array of shape `(*l, ceil(n/64))` and dtype `<u8`.

    Examples
    --------
    >>> pack_bits(np.array([1, 0, 1]))
    array([5], dtype=uint64)
    """
    bits = np.asarray(bits).astype(bool)
    length = bits.shape[-1]
    width = n_words(length)*WORD_BITS
    padded = np.zeros(bits.shape[:-1] + (width,), dtype=bool)
    padded[..., :length] = bits
    packed = np.packbits(padded, axis=-1, bitorder='little')
    return np.ascontiguousarray(packed).view(WORD_DTYPE)


def unpack_bits(words: np.ndarray, length: int) -> np.ndarray:
    """
    Inverse of :func:`pack_bits`.

    Returns a `uint8` array of shape `(*l, length)` holding 0/1 entries.
    """
    words = np.ascontiguousarray(words, dtype=WORD_DTYPE)
    as_bytes = words.view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1, bitorder='little')[..., :length]


class BitVector():
    """
    Immutable packed bit vector of fixed length.

    The carrier for the input, symbol, follow, active and accept vectors of the
    automata engine. All binary operators require operands of equal length and
    return new vectors; the tail of the last word is kept at zero so that equality
    and hashing can compare words directly.
    """

    __slots__ = ("_length", "_words")

    def __init__(self, length: int, words: Union[np.ndarray, None] = None) -> None:
        """
        Parameters
        ----------
        length : int
            Number of bits.
        words : numpy.ndarray, optional
            Packed storage of `ceil(length/64)` words. Copied and masked.
            If `None`, the vector is all-zero.

        Raises
        ------
        ValueError
            If `length` is negative or `words` has the wrong size.
        """
        if length < 0:
            raise ValueError(f"BitVector length must be non-negative, got {length}")
        nw = n_words(length)
        if words is None:
            data = np.zeros(nw, dtype=WORD_DTYPE)
        else:
            data = np.array(words, dtype=WORD_DTYPE).reshape(-1)
            if data.shape[0] != nw:
                raise ValueError(f"{length}-bit vector needs {nw} words, got {data.shape[0]}")
            if nw:
                data[-1] &= tail_mask(length)
        data.setflags(write=False)
        self._length = length
        self._words = data

    @classmethod
    def _wrap(cls, length: int, words: np.ndarray) -> "BitVector":
        # trusted fast path: `words` is a fresh canonical array owned by the result
        bv = object.__new__(cls)
        words.setflags(write=False)
        bv._length = length
        bv._words = words
        return bv

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(length)

    @classmethod
    def ones(cls, length: int) -> "BitVector":
        return cls(length, np.full(n_words(length), 0xFFFFFFFFFFFFFFFF, dtype=WORD_DTYPE))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        """Build a vector from a sequence of 0/1 values, index 0 first.

        Examples
        --------
        >>> BitVector.from_bits([1, 0, 1])
        BitVector('101')
        """
        arr = np.fromiter((int(b) for b in bits), dtype=np.uint8) \
            if not isinstance(bits, np.ndarray) else np.asarray(bits)
        if arr.size and np.any((arr != 0) & (arr != 1)):
            raise ValueError("bits must be 0 or 1")
        return cls._wrap(arr.shape[0], pack_bits(arr))

    @classmethod
    def from_indices(cls, length: int, indices: Iterable[int]) -> "BitVector":
        """Build a vector of `length` bits with ones at `indices`."""
        bits = np.zeros(length, dtype=np.uint8)
        idx = np.fromiter(indices, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= length):
            raise IndexError(f"bit index out of range for {length}-bit vector")
        bits[idx] = 1
        return cls._wrap(length, pack_bits(bits))

    @classmethod
    def from_bytes(cls, length: int, data: bytes) -> "BitVector":
        """Build a vector from its little-endian word serialization."""
        words = np.frombuffer(data, dtype=WORD_DTYPE)
        return cls(length, words)

    @property
    def length(self) -> int:
        return self._length

    @property
    def words(self) -> np.ndarray:
        """Read-only packed storage."""
        return self._words

    def __len__(self) -> int:
        return self._length

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self._length
        if not 0 <= i < self._length:
            raise IndexError(f"bit index {i} out of range for {self._length}-bit vector")
        return int((int(self._words[i // WORD_BITS]) >> (i % WORD_BITS)) & 1)

    def __iter__(self):
        return iter(self.to_bits().tolist())

    def to_bits(self) -> np.ndarray:
        """Unpacked `uint8` array of 0/1 entries."""
        return unpack_bits(self._words, self._length)

    def indices(self) -> np.ndarray:
        """Positions of the set bits, ascending."""
        return np.flatnonzero(self.to_bits())

    def count(self) -> int:
        """Population count."""
        return int(np.unpackbits(self._words.view(np.uint8)).sum())

    def any(self) -> bool:
        return bool(np.any(self._words))

    def with_bit(self, i: int, value: int) -> "BitVector":
        """Copy of this vector with bit `i` set to `value`."""
        if not 0 <= i < self._length:
            raise IndexError(f"bit index {i} out of range for {self._length}-bit vector")
        words = self._words.copy()
        mask = np.uint64(1 << (i % WORD_BITS))
        if value:
            words[i // WORD_BITS] |= mask
        else:
            words[i // WORD_BITS] &= ~mask
        return BitVector._wrap(self._length, words)

    def issubset(self, other: "BitVector") -> bool:
        self._check(other)
        return not np.any(self._words & ~other._words)

    def tobytes(self) -> bytes:
        """Little-endian word serialization."""
        return self._words.tobytes()

    def _check(self, other: "BitVector") -> None:
        if not isinstance(other, BitVector):
            raise TypeError(f"expected BitVector, got {type(other).__name__}")
        if other._length != self._length:
            raise ValueError(f"length mismatch: {self._length} != {other._length}")

    def __and__(self, other: "BitVector") -> "BitVector":
        self._check(other)
        return BitVector._wrap(self._length, self._words & other._words)

    def __or__(self, other: "BitVector") -> "BitVector":
        self._check(other)
        return BitVector._wrap(self._length, self._words | other._words)

    def __xor__(self, other: "BitVector") -> "BitVector":
        self._check(other)
        return BitVector._wrap(self._length, self._words ^ other._words)

    def __invert__(self) -> "BitVector":
        words = ~self._words
        if words.size:
            words[-1] &= tail_mask(self._length)
        return BitVector._wrap(self._length, words)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self._length == other._length and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self._length, self._words.tobytes()))

    def __repr__(self) -> str:
        if self._length <= 64:
            return f"BitVector('{''.join(str(b) for b in self.to_bits())}')"
        return f"BitVector(length={self._length}, count={self.count()})"


def bitwise_or_rows(matrix: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """
    OR together the selected rows of a packed bit matrix.

    This is the wired-OR of a multi-row activation: every selected row drives the
    shared column lines at once.

    Parameters
    ----------
    matrix : numpy.ndarray
        Packed matrix of shape `(rows, words)`.
    rows : numpy.ndarray
        Integer indices of the rows to combine.

    Returns
    -------
    numpy.ndarray
        Packed row of shape `(words,)`; all-zero when `rows` is empty.
    """
    if len(rows) == 0:
        return np.zeros(matrix.shape[-1], dtype=WORD_DTYPE)
    return np.bitwise_or.reduce(matrix[rows], axis=0)
