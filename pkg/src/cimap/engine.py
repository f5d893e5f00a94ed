"""
Bit-parallel automata-processor engine.

A homogeneous automaton is compiled into an :class:`ApProgram`: the STE matrix `V`
(one row per input symbol, one column per state), the routing matrix `R` (row `i` holds
the destinations of state `i`), the accept vector `c` and the initial active vector.
Each input symbol then costs one symbol-vector lookup, one follow-vector wired-OR and
one AND.
"""

import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import psutil

from .automata import AcceptanceResult, HomogeneousAutomaton, SymbolError, check_symbols
from .bitvector import (WORD_DTYPE, BitVector, bitwise_or_rows, n_words, pack_bits,
                        unpack_bits)
from .kernels.numpy_kernel import numpy_run
from .kernels.numba_kernel import numba_run, numba_available

from typing import Callable, Iterable, List, Literal, Optional, Sequence, Union

DEFAULT_MAX_STATES = 1 << 16
"""Default cap on the number of states (the bit-vector width) a program may have."""

IMAGE_MAGIC = b"CIMAPIMG"
IMAGE_VERSION = 1
IMAGE_HEADER = struct.Struct('<8sHHII')
FLAG_ALL_INPUT_START = 0x1

run_kernels = {"numpy": numpy_run,
               "numba": numba_run}

kernel_type = Union[Callable, Literal['numpy', 'numba', 'auto']]


class CapacityError(ValueError):
    """The automaton does not fit the configured maximum bit-vector width."""


class ImageFormatError(ValueError):
    """A program image is truncated or has the wrong magic, version or size."""


@dataclass(frozen=True, eq=False)
class ApProgram():
    """
    Configured automata-processor image.

    All packed matrices are read-only `uint64` arrays with `ceil(N/64)` words per row.
    """

    symbol_bits: int
    num_states: int
    ste_matrix: np.ndarray
    """Packed `V`, shape `(2**W, words)`; row `k` marks the states whose class holds `k`."""
    routing_matrix: np.ndarray
    """Packed `R`, shape `(N, words)`; `R[i][n] = 1` iff edge `i -> n` exists."""
    accept_vector: BitVector
    initial_active: BitVector
    all_input_start: bool = False
    """Re-inject the start states before every symbol (match-anywhere streaming)."""

    def __post_init__(self) -> None:
        nw = n_words(self.num_states)
        if self.ste_matrix.shape != (1 << self.symbol_bits, nw):
            raise ValueError(f"STE matrix shape {self.ste_matrix.shape} does not match "
                             f"W={self.symbol_bits}, N={self.num_states}")
        if self.routing_matrix.shape != (self.num_states, nw):
            raise ValueError(f"routing matrix shape {self.routing_matrix.shape} does not "
                             f"match N={self.num_states}")
        for vec in (self.accept_vector, self.initial_active):
            if vec.length != self.num_states:
                raise ValueError("accept/initial vectors must have N bits")
        self.ste_matrix.setflags(write=False)
        self.routing_matrix.setflags(write=False)

    @property
    def num_words(self) -> int:
        return self.ste_matrix.shape[1]

    def ste_bits(self) -> np.ndarray:
        """Unpacked `V` of shape `(2**W, N)`."""
        return unpack_bits(self.ste_matrix, self.num_states)

    def routing_bits(self) -> np.ndarray:
        """Unpacked `R` of shape `(N, N)`."""
        return unpack_bits(self.routing_matrix, self.num_states)

    def routing_density(self) -> float:
        """Fraction of set cells in `R`."""
        return float(self.routing_bits().mean())

    def column(self, n: int) -> np.ndarray:
        """STE column `V_n` as a 0/1 array of length `2**W`."""
        return self.ste_bits()[:, n]

    def to_bytes(self) -> bytes:
        """Serialize to the program image format (see :func:`write_image`)."""
        flags = FLAG_ALL_INPUT_START if self.all_input_start else 0
        header = IMAGE_HEADER.pack(IMAGE_MAGIC, IMAGE_VERSION, self.symbol_bits,
                                   self.num_states, flags)
        body = b"".join([np.ascontiguousarray(self.ste_matrix, dtype=WORD_DTYPE).tobytes(),
                         np.ascontiguousarray(self.routing_matrix, dtype=WORD_DTYPE).tobytes(),
                         self.accept_vector.tobytes(),
                         self.initial_active.tobytes()])
        return header + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "ApProgram":
        """
        Parse a program image.

        Raises
        ------
        ImageFormatError
            On a bad magic, unsupported version, or a body of the wrong size.
        """
        if len(data) < IMAGE_HEADER.size:
            raise ImageFormatError("image shorter than its header")
        magic, version, w, n, flags = IMAGE_HEADER.unpack_from(data)
        if magic != IMAGE_MAGIC:
            raise ImageFormatError(f"bad magic {magic!r}")
        if version != IMAGE_VERSION:
            raise ImageFormatError(f"unsupported image version {version}")
        if n < 1:
            raise ImageFormatError("image declares zero states")
        nw = n_words(n)
        rows = (1 << w) + n + 2
        expected = IMAGE_HEADER.size + rows*nw*8
        if len(data) != expected:
            raise ImageFormatError(f"image body has {len(data)} bytes, expected {expected}")
        words = np.frombuffer(data, dtype=WORD_DTYPE, offset=IMAGE_HEADER.size).reshape(rows, nw)
        ste = words[:1 << w].copy()
        routing = words[1 << w:(1 << w) + n].copy()
        accept = BitVector(n, words[-2])
        initial = BitVector(n, words[-1])
        return cls(w, n, ste, routing, accept, initial, bool(flags & FLAG_ALL_INPUT_START))


@dataclass(frozen=True)
class RunState():
    """Per-stream execution state; owned by a single stream."""

    active: BitVector
    accepted_ever: bool = False
    steps: int = 0


@dataclass
class RunStatistics():
    """Counts needed for hardware cost accounting of a run."""

    steps: int
    num_states: int
    column_evaluations: int
    """STE column evaluations; every column evaluates once per symbol."""
    routing_activations: int = 0
    """Routing word lines driven, summed over steps."""
    kernel: str = field(default="numpy")


def _check_memory(symbol_bits: int, num_states: int) -> None:
    need = ((1 << symbol_bits) + num_states + 2)*n_words(num_states)*8
    avail = psutil.virtual_memory().available
    if need > avail:
        raise MemoryError(f"Program needs {need/1024**3:.2f} GB but only "
                          f"{avail/1024**3:.2f} GB is available")
    if need > avail/4:
        warnings.warn(f"Program image will use {need/1024**3:.2f} GB, over a quarter of "
                      "available memory", stacklevel=3)


def compile(h: HomogeneousAutomaton, symbol_bits: Optional[int] = None,
            max_states: int = DEFAULT_MAX_STATES, all_input_start: bool = False) -> ApProgram:
    """
    Map a homogeneous automaton onto STE columns and the routing matrix.

    Column order follows the automaton's state order.

    Parameters
    ----------
    h : HomogeneousAutomaton
        Automaton to map.
    symbol_bits : int, optional
        Symbol width `W` of the target; defaults to the automaton's alphabet width.
    max_states : int, optional
        Largest bit-vector width accepted. Default is 65536.
    all_input_start : bool, optional
        Activate the start states before every symbol instead of only at step 0.

    Returns
    -------
    ApProgram
        The configured program image.

    Raises
    ------
    CapacityError
        If `h` has more than `max_states` states.
    SymbolError
        If a symbol class leaves the `W`-bit alphabet.
    ValueError
        If `h` has no states.

    Examples
    --------
    >>> h = HomogeneousAutomaton(2, ({0, 1, 2}, {2}, {1}), {(0, 1), (0, 2), (1, 2)}, {0}, {2})
    >>> p = compile(h)
    >>> p.ste_bits().tolist()
    [[1, 0, 0], [1, 0, 1], [1, 1, 0], [0, 0, 0]]
    """
    w = h.alphabet_bits if symbol_bits is None else symbol_bits
    n = h.num_states
    if n < 1:
        raise ValueError("Cannot compile an automaton with no states")
    if n > max_states:
        raise CapacityError(f"{n} states exceed the maximum bit-vector width {max_states}")
    n_sym = 1 << w
    for q, cls in enumerate(h.symbol_class):
        if cls and max(cls) >= n_sym:
            raise SymbolError(f"symbol class of state {q} does not fit W={w}")
    _check_memory(w, n)

    ste = np.zeros((n_sym, n), dtype=bool)
    for q, cls in enumerate(h.symbol_class):
        ste[sorted(cls), q] = True
    routing = np.zeros((n, n), dtype=bool)
    for src, dst in h.edges:
        routing[src, dst] = True

    return ApProgram(w, n, pack_bits(ste), pack_bits(routing),
                     BitVector.from_indices(n, h.accepting),
                     BitVector.from_indices(n, h.start_states),
                     all_input_start)


def decompile(program: ApProgram) -> HomogeneousAutomaton:
    """Read `V`, `R`, `c` and the initial vector back into a homogeneous automaton."""
    ste = program.ste_bits()
    classes = tuple(frozenset(np.flatnonzero(ste[:, q]).tolist())
                    for q in range(program.num_states))
    src, dst = np.nonzero(program.routing_bits())
    return HomogeneousAutomaton(program.symbol_bits, classes,
                                frozenset(zip(src.tolist(), dst.tolist())),
                                frozenset(program.initial_active.indices().tolist()),
                                frozenset(program.accept_vector.indices().tolist()))


def _check_symbol(program: ApProgram, symbol: int) -> None:
    if not 0 <= symbol < (1 << program.symbol_bits):
        raise SymbolError(f"symbol {symbol} is outside the {program.symbol_bits}-bit alphabet")


def _check_active(program: ApProgram, active: BitVector) -> None:
    if active.length != program.num_states:
        raise ValueError(f"active vector has {active.length} bits, program has "
                         f"{program.num_states} states")


def symbol_vector(program: ApProgram, symbol: int) -> BitVector:
    """
    Symbol vector `s`: the states whose symbol class contains `symbol`.

    With a one-hot input vector `i`, the OR-of-ANDs product `i . V` selects exactly
    row `symbol` of `V`, so the row is returned without forming `i`. Symbols whose row
    is empty yield an all-zero vector.

    Raises
    ------
    SymbolError
        If `symbol` is not in `[0, 2**W)`.
    """
    _check_symbol(program, symbol)
    return BitVector._wrap(program.num_states, program.ste_matrix[symbol].copy())


def follow_vector(program: ApProgram, active: BitVector) -> BitVector:
    """
    Follow vector `f`: the states reachable in one transition from `active`.

    Computed as the OR of the routing rows of all active states, the same wired-OR
    a multi-wordline activation produces on the column lines.

    Raises
    ------
    ValueError
        If `active` does not have `N` bits.
    """
    _check_active(program, active)
    rows = active.indices()
    return BitVector._wrap(program.num_states, bitwise_or_rows(program.routing_matrix, rows))


def accept(program: ApProgram, active: BitVector) -> bool:
    """Acceptance `A`: true iff an active state is accepting."""
    _check_active(program, active)
    return bool(np.any(active.words & program.accept_vector.words))


def initial_state(program: ApProgram) -> RunState:
    """Run state before the first symbol."""
    active = program.initial_active
    return RunState(active, accept(program, active), 0)


def step(program: ApProgram, state: RunState, symbol: int) -> RunState:
    """
    Advance one symbol: `a' = f AND s`.

    When the program uses all-input start semantics the start states are ORed into
    the active vector before the follow vector is formed.
    """
    _check_symbol(program, symbol)
    source = state.active
    if program.all_input_start:
        source = source | program.initial_active
    active = follow_vector(program, source) & symbol_vector(program, symbol)
    return RunState(active, state.accepted_ever or accept(program, active), state.steps + 1)


def _resolve_kernel(kernel: kernel_type) -> Callable:
    if callable(kernel):
        return kernel
    if kernel == "auto":
        kernel = "numba" if numba_available else "numpy"
    try:
        return run_kernels[kernel]
    except KeyError:
        raise ValueError(f"kernel must be one of {list(run_kernels)} or 'auto', got {kernel!r}")


def run(program: ApProgram, symbols: Sequence[int], trace: bool = False,
        kernel: kernel_type = "numpy", **kwargs) -> AcceptanceResult:
    """
    Execute an input stream from the initial active vector.

    Parameters
    ----------
    program : ApProgram
        Program to execute; shared read-only.
    symbols : sequence of int
        Input stream. Bytes objects are accepted as streams of 8-bit symbols.
    trace : bool, optional
        Record the active state set before the first and after every symbol.
    kernel : {"numpy", "numba", "auto"} or callable, optional
        Run kernel; all kernels return identical results. `"auto"` picks numba when it
        is installed. Default is `"numpy"`.
    **kwargs : dict
        Passed to the kernel.

    Returns
    -------
    AcceptanceResult
        `accepted` is end-of-input acceptance, `accepted_ever` flags a match at any step,
        and `statistics` carries :class:`RunStatistics` for cost accounting.

    Raises
    ------
    SymbolError
        At the first symbol outside the alphabet, with its stream position.
    """
    if isinstance(symbols, (bytes, bytearray, memoryview)):
        # bytes are run as uint8 without a copy; every byte is valid once W >= 8
        stream = np.frombuffer(symbols, dtype=np.uint8)
        if program.symbol_bits < 8:
            check_symbols(stream, program.symbol_bits)
    else:
        stream = check_symbols(symbols, program.symbol_bits)
    run_fn = _resolve_kernel(kernel)

    final, ever, trace_words, activations = run_fn(
        program.ste_matrix, program.routing_matrix, program.accept_vector.words,
        program.initial_active.words, program.all_input_start, stream, trace, **kwargs)

    active_trace = None
    if trace_words is not None:
        active_trace = [frozenset(np.flatnonzero(row).tolist())
                        for row in unpack_bits(trace_words, program.num_states)]
    final_vec = BitVector(program.num_states, final)
    stats = RunStatistics(len(stream), program.num_states, len(stream)*program.num_states,
                          activations, getattr(run_fn, '__name__', str(kernel)))
    return AcceptanceResult(accept(program, final_vec), active_trace, bool(ever), stats)


def run_streams(program: ApProgram, streams: Iterable[Sequence[int]],
                kernel: kernel_type = "numpy", max_workers: Optional[int] = None,
                **kwargs) -> List[AcceptanceResult]:
    """
    Run independent streams against one shared program on a thread pool.

    Results are returned in stream order.
    """
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [pool.submit(run, program, s, False, kernel, **kwargs) for s in streams]
        return [f.result() for f in futures]


def write_image(program: ApProgram, path) -> None:
    """
    Write a program image file.

    Layout (all little-endian)::

        offset 0   8 bytes   magic b"CIMAPIMG"
        offset 8   uint16    version (1)
        offset 10  uint16    W, symbol width in bits
        offset 12  uint32    N, number of states
        offset 16  uint32    flags (bit 0: all-input start)
        offset 20  V         2**W rows
                   R         N rows
                   c         1 row
                   a0        1 row

    Each row is `ceil(N/64)` uint64 words; bit `n` of a row is bit `n % 64` of word
    `n // 64`.
    """
    with open(path, 'wb') as f:
        f.write(program.to_bytes())


def read_image(path) -> ApProgram:
    """Read a program image file written by :func:`write_image`."""
    with open(path, 'rb') as f:
        return ApProgram.from_bytes(f.read())


def _bit_string(bits: np.ndarray) -> str:
    return "".join('1' if b else '0' for b in bits)


def program_to_text(program: ApProgram) -> str:
    """
    Render `V`, `R`, `c` and the initial vector as text.

    Character `n` of each bit string is state `n`::

        ap W=2 N=3 all_input_start=0
        V 0 100
        ...
        R 0 011
        ...
        c 001
        a0 100

    :func:`program_from_text` reads it back to an identical program.
    """
    lines = [f"ap W={program.symbol_bits} N={program.num_states} "
             f"all_input_start={int(program.all_input_start)}"]
    lines += [f"V {k} {_bit_string(row)}" for k, row in enumerate(program.ste_bits())]
    lines += [f"R {i} {_bit_string(row)}" for i, row in enumerate(program.routing_bits())]
    lines.append(f"c {_bit_string(program.accept_vector.to_bits())}")
    lines.append(f"a0 {_bit_string(program.initial_active.to_bits())}")
    return "\n".join(lines) + "\n"


def program_from_text(text: str) -> ApProgram:
    """
    Parse the text written by :func:`program_to_text`.

    Raises
    ------
    ImageFormatError
        On a bad header, a missing or repeated row, or a bit string of the wrong length.
    """
    lines = [(i, ln.split()) for i, ln in enumerate(text.splitlines(), start=1)
             if ln.strip() and not ln.lstrip().startswith('#')]
    if not lines or lines[0][1][0] != 'ap':
        raise ImageFormatError("text image must start with an 'ap' header")
    header: dict = {}
    for item in lines[0][1][1:]:
        key, _, value = item.partition('=')
        try:
            header[key] = int(value)
        except ValueError:
            raise ImageFormatError(f"line {lines[0][0]}: bad header field '{item}'") from None
    try:
        w, n, flag = header['W'], header['N'], header.get('all_input_start', 0)
    except KeyError as err:
        raise ImageFormatError(f"header is missing {err}") from None
    if n < 1:
        raise ImageFormatError("text image declares zero states")

    def parse_bits(lineno: int, s: str) -> np.ndarray:
        if len(s) != n or set(s) - {'0', '1'}:
            raise ImageFormatError(f"line {lineno}: expected {n} bits, got '{s}'")
        return np.frombuffer(s.encode(), dtype=np.uint8) - ord('0')

    ste = np.zeros((1 << w, n), dtype=np.uint8)
    routing = np.zeros((n, n), dtype=np.uint8)
    vectors = {}
    seen = set()
    for lineno, tokens in lines[1:]:
        kind = tokens[0]
        if kind in ('V', 'R') and len(tokens) == 3:
            matrix, size = (ste, 1 << w) if kind == 'V' else (routing, n)
            try:
                row = int(tokens[1])
            except ValueError:
                raise ImageFormatError(f"line {lineno}: bad row index '{tokens[1]}'") from None
            if not 0 <= row < size or (kind, row) in seen:
                raise ImageFormatError(f"line {lineno}: row {kind} {row} out of range or repeated")
            seen.add((kind, row))
            matrix[row] = parse_bits(lineno, tokens[2])
        elif kind in ('c', 'a0') and len(tokens) == 2:
            vectors[kind] = parse_bits(lineno, tokens[1])
        else:
            raise ImageFormatError(f"line {lineno}: cannot parse '{' '.join(tokens)}'")
    if len(seen) != (1 << w) + n or set(vectors) != {'c', 'a0'}:
        raise ImageFormatError("text image is missing rows")
    return ApProgram(w, n, pack_bits(ste.astype(bool)), pack_bits(routing.astype(bool)),
                     BitVector.from_bits(vectors['c']), BitVector.from_bits(vectors['a0']),
                     bool(flag))
