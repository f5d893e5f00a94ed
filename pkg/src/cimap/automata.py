"""
Nondeterministic finite automata, homogeneous automata, and the subset-simulation oracle.
"""

import itertools
from dataclasses import dataclass, field

import networkx as nx  # type: ignore
import numpy as np

from typing import (Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union,
                    TYPE_CHECKING)
if TYPE_CHECKING:
    from .engine import RunStatistics

Transition = Tuple[int, int, int]
Edge = Tuple[int, int]
SymbolClass = FrozenSet[int]


class SymbolError(ValueError):
    """A symbol lies outside the alphabet `[0, 2**W)`.

    `position` is the index of the offending symbol in its input stream,
    or `None` when the symbol is not part of a stream.
    """

    def __init__(self, message: str, position: Optional[int] = None) -> None:
        super().__init__(message)
        self.position = position


class AutomatonFormatError(ValueError):
    """Malformed automaton text; `line` is 1-based."""

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


def check_symbols(symbols: Sequence[int], alphabet_bits: int) -> np.ndarray:
    """
    Validate an input stream against a `alphabet_bits`-wide alphabet.

    Returns the stream as an `int64` array.

    Raises
    ------
    SymbolError
        At the first symbol that is negative or not below `2**alphabet_bits`.
    """
    try:
        arr = np.asarray(symbols, dtype=np.int64).reshape(-1)
    except OverflowError:
        pos = next(i for i, s in enumerate(symbols) if not -2**63 <= int(s) < 2**63)
        raise SymbolError(f"symbol {int(symbols[pos])} at position {pos} is outside the "
                          f"{alphabet_bits}-bit alphabet", pos) from None
    bad = np.flatnonzero((arr < 0) | (arr >= (1 << alphabet_bits)))
    if bad.size:
        pos = int(bad[0])
        raise SymbolError(f"symbol {int(arr[pos])} at position {pos} is outside the "
                          f"{alphabet_bits}-bit alphabet", pos)
    return arr


@dataclass(frozen=True)
class Nfa():
    """
    Epsilon-free NFA over the integer alphabet `[0, 2**alphabet_bits)`.

    States are the integers `0..num_states-1`. Transitions are `(src, symbol, dst)`
    triples.
    """

    alphabet_bits: int
    num_states: int
    transitions: FrozenSet[Transition]
    start: int
    accepting: FrozenSet[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'transitions', frozenset(tuple(t) for t in self.transitions))
        object.__setattr__(self, 'accepting', frozenset(self.accepting))
        if self.alphabet_bits < 1:
            raise ValueError(f"alphabet_bits must be at least 1, got {self.alphabet_bits}")
        if self.num_states < 1:
            raise ValueError("An NFA needs at least one state")
        if not 0 <= self.start < self.num_states:
            raise ValueError(f"start state {self.start} is not a state")
        for q in self.accepting:
            if not 0 <= q < self.num_states:
                raise ValueError(f"accepting state {q} is not a state")
        n_sym = 1 << self.alphabet_bits
        for src, sym, dst in self.transitions:
            if not (0 <= src < self.num_states and 0 <= dst < self.num_states):
                raise ValueError(f"transition {(src, sym, dst)} references an unknown state")
            if not 0 <= sym < n_sym:
                raise SymbolError(f"transition {(src, sym, dst)} uses symbol {sym} outside "
                                  f"the {self.alphabet_bits}-bit alphabet")

    @property
    def states(self) -> range:
        return range(self.num_states)

    def delta(self) -> Dict[Tuple[int, int], FrozenSet[int]]:
        """Transition function as a mapping `(state, symbol) -> destinations`."""
        out: Dict[Tuple[int, int], set] = {}
        for src, sym, dst in self.transitions:
            out.setdefault((src, sym), set()).add(dst)
        return {k: frozenset(v) for k, v in out.items()}

    def as_graph(self) -> nx.MultiDiGraph:
        """Graph view with one edge per transition, keyed and labelled by symbol."""
        g = nx.MultiDiGraph()
        for q in self.states:
            g.add_node(q, start=(q == self.start), accepting=(q in self.accepting))
        for src, sym, dst in sorted(self.transitions):
            g.add_edge(src, dst, key=sym, symbol=sym)
        return g

    def to_text(self) -> str:
        """Serialize to the one-definition-per-file automaton text format."""
        lines = [f"nfa W={self.alphabet_bits} states={self.num_states} start={self.start}",
                 " ".join(["accept"] + [str(q) for q in sorted(self.accepting)])]
        lines += [f"trans {s} {x} {d}" for s, x, d in sorted(self.transitions)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Nfa":
        """
        Parse the automaton text format.

        The header line `nfa W=<bits> states=<N> start=<id>` comes first, followed by
        an optional `accept <id> ...` line and any number of `trans <src> <symbol> <dst>`
        lines. Blank lines and `#` comments are ignored.

        Raises
        ------
        AutomatonFormatError
            On a missing or duplicated header, unknown directives, or malformed fields.
        """
        header: Optional[Dict[str, int]] = None
        accepting: List[int] = []
        transitions: List[Transition] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            directive, *fields = line.split()
            if header is None and directive != 'nfa':
                raise AutomatonFormatError(f"expected 'nfa' header, found '{directive}'", lineno)
            try:
                if directive == 'nfa':
                    if header is not None:
                        raise AutomatonFormatError("duplicate 'nfa' header", lineno)
                    header = {}
                    for f in fields:
                        key, _, value = f.partition('=')
                        if key not in ('W', 'states', 'start') or not value:
                            raise AutomatonFormatError(f"bad header field '{f}'", lineno)
                        header[key] = int(value)
                    missing = {'W', 'states', 'start'} - set(header)
                    if missing:
                        raise AutomatonFormatError(f"header missing {sorted(missing)}", lineno)
                elif directive == 'accept':
                    accepting.extend(int(f) for f in fields)
                elif directive == 'trans':
                    if len(fields) != 3:
                        raise AutomatonFormatError("'trans' takes <src> <symbol> <dst>", lineno)
                    src, sym, dst = (int(f) for f in fields)
                    transitions.append((src, sym, dst))
                else:
                    raise AutomatonFormatError(f"unknown directive '{directive}'", lineno)
            except ValueError as err:
                if isinstance(err, AutomatonFormatError):
                    raise
                raise AutomatonFormatError(str(err), lineno) from err
        if header is None:
            raise AutomatonFormatError("empty automaton definition", 1)
        return cls(header['W'], header['states'], frozenset(transitions),
                   header['start'], frozenset(accepting))


def load_nfa(path) -> Nfa:
    """Read an automaton text file."""
    with open(path, 'r') as f:
        return Nfa.from_text(f.read())


def dump_nfa(nfa: Nfa, path) -> None:
    """Write an automaton text file."""
    with open(path, 'w') as f:
        f.write(nfa.to_text())


@dataclass(frozen=True)
class HomogeneousAutomaton():
    """
    Automaton whose input symbols are attached to states rather than transitions.

    A transition along edge `(i, n)` happens on symbol `x` exactly when
    `x in symbol_class[n]`. Start states are active before the first symbol only.
    """

    alphabet_bits: int
    symbol_class: Tuple[SymbolClass, ...]
    edges: FrozenSet[Edge]
    start_states: FrozenSet[int]
    accepting: FrozenSet[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'symbol_class',
                           tuple(frozenset(c) for c in self.symbol_class))
        object.__setattr__(self, 'edges', frozenset(tuple(e) for e in self.edges))
        object.__setattr__(self, 'start_states', frozenset(self.start_states))
        object.__setattr__(self, 'accepting', frozenset(self.accepting))
        n = len(self.symbol_class)
        n_sym = 1 << self.alphabet_bits
        for q, cls in enumerate(self.symbol_class):
            if any(not 0 <= x < n_sym for x in cls):
                raise SymbolError(f"symbol class of state {q} leaves the "
                                  f"{self.alphabet_bits}-bit alphabet")
        for src, dst in self.edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise ValueError(f"edge {(src, dst)} references an unknown state")
        for q in itertools.chain(self.start_states, self.accepting):
            if not 0 <= q < n:
                raise ValueError(f"state {q} is not a state")

    @property
    def num_states(self) -> int:
        return len(self.symbol_class)

    @property
    def states(self) -> range:
        return range(self.num_states)

    def successors(self) -> List[FrozenSet[int]]:
        out: List[set] = [set() for _ in self.states]
        for src, dst in self.edges:
            out[src].add(dst)
        return [frozenset(s) for s in out]

    def as_graph(self) -> nx.DiGraph:
        """Graph view; nodes carry `symbol_class`, `start` and `accepting` attributes."""
        g = nx.DiGraph()
        for q in self.states:
            g.add_node(q, symbol_class=self.symbol_class[q],
                       start=(q in self.start_states), accepting=(q in self.accepting))
        g.add_edges_from(sorted(self.edges))
        return g

    def to_nfa(self) -> Nfa:
        """
        Equivalent ordinary NFA.

        Uses a fresh start state `num_states` that copies the outgoing behaviour of all
        start states, so the result accepts the same language under start-of-data semantics.
        """
        n = self.num_states
        trans = {(src, x, dst) for src, dst in self.edges for x in self.symbol_class[dst]}
        trans |= {(n, x, dst) for src, dst in self.edges if src in self.start_states
                  for x in self.symbol_class[dst]}
        accepting = set(self.accepting)
        if self.start_states & self.accepting:
            accepting.add(n)
        return Nfa(self.alphabet_bits, n + 1, frozenset(trans), n, frozenset(accepting))


@dataclass
class AcceptanceResult():
    """Outcome of running an automaton over an input stream."""

    accepted: bool
    """Whether an accepting state is active after the last symbol."""
    active_trace: Optional[List[FrozenSet[int]]] = None
    """Active state set before the first symbol and after every symbol, when traced."""
    accepted_ever: bool = False
    """Whether an accepting state was active at any point of the stream."""
    statistics: Optional["RunStatistics"] = field(default=None, repr=False)


def nfa_simulate(nfa: Nfa, symbols: Sequence[int], trace: bool = False) -> AcceptanceResult:
    """
    Textbook subset simulation of an NFA.

    Starts from `{start}` and replaces the active set by the union of its successors on
    each symbol. Written with plain Python sets only; it is the independent reference
    for the bit-parallel engine.

    Parameters
    ----------
    nfa : Nfa
        Automaton to run.
    symbols : sequence of int
        Input stream.
    trace : bool, optional
        Record the active set before the first and after every symbol.

    Raises
    ------
    SymbolError
        If a symbol lies outside the alphabet.
    """
    stream = check_symbols(symbols, nfa.alphabet_bits).tolist()
    delta = nfa.delta()
    active = frozenset([nfa.start])
    history = [active] if trace else None
    ever = bool(active & nfa.accepting)
    for x in stream:
        nxt: set = set()
        for q in active:
            nxt |= delta.get((q, x), frozenset())
        active = frozenset(nxt)
        ever = ever or bool(active & nfa.accepting)
        if history is not None:
            history.append(active)
    return AcceptanceResult(bool(active & nfa.accepting), history, ever)


def nfa_accepts_oracle(nfa: Nfa, symbols: Sequence[int]) -> bool:
    """
    True iff `nfa` accepts `symbols` (end-of-input acceptance).

    Examples
    --------
    >>> nfa = Nfa(2, 3, {(0, 2, 1), (0, 1, 2), (1, 1, 2)}, 0, {2})
    >>> nfa_accepts_oracle(nfa, [1])
    True
    >>> nfa_accepts_oracle(nfa, [])
    False
    """
    return nfa_simulate(nfa, symbols).accepted


def homogenize(nfa: Nfa) -> HomogeneousAutomaton:
    """
    Convert an NFA into a language-equivalent homogeneous automaton.

    Every NFA state `q` is split by the distinct symbol sets on which its predecessors
    enter it: predecessor `p` contributes the set of symbols labelling `p -> q`, and one
    homogeneous copy of `q` exists per distinct set. A state whose incoming transitions
    all share one symbol set therefore keeps a single copy. Copy `q_S` has symbol class
    `S`; edge `p_T -> q_S` exists iff the symbols on `p -> q` are exactly `S`.

    The start state `q0` is represented by a copy with an empty symbol class that is
    active only before the first symbol. When `q0` has incoming transitions of its own,
    this dedicated start state is added in front and `q0`'s re-entered copies are built
    like any other state. All copies of an accepting state accept.

    Parameters
    ----------
    nfa : Nfa
        Source automaton.

    Returns
    -------
    HomogeneousAutomaton
        States are emitted in NFA state order, copies of one state ordered by their
        sorted symbol classes, with the dedicated start state (if any) first.
    """
    # symbols on each (src, dst) pair
    labels: Dict[Edge, set] = {}
    for src, sym, dst in nfa.transitions:
        labels.setdefault((src, dst), set()).add(sym)
    incoming: Dict[int, set] = {q: set() for q in nfa.states}
    for (src, dst), syms in labels.items():
        incoming[dst].add(frozenset(syms))

    classes: List[SymbolClass] = []
    copies: Dict[int, Dict[SymbolClass, int]] = {}
    start_states = set()

    dedicated_start = bool(incoming[nfa.start])
    if dedicated_start:
        classes.append(frozenset())
        start_states.add(0)
    for q in nfa.states:
        copies[q] = {}
        parts = sorted(incoming[q], key=lambda s: tuple(sorted(s)))
        if not parts:
            # never entered: only meaningful as the start state
            parts = [frozenset()]
        for part in parts:
            copies[q][part] = len(classes)
            classes.append(part)
        if q == nfa.start and not dedicated_start:
            start_states.add(copies[q][frozenset()])

    edges = set()
    for (src, dst), syms in labels.items():
        target = copies[dst][frozenset(syms)]
        for idx in copies[src].values():
            edges.add((idx, target))
        if dedicated_start and src == nfa.start:
            edges.add((0, target))

    accepting = {idx for q in nfa.accepting for idx in copies[q].values()}
    if dedicated_start and nfa.start in nfa.accepting:
        accepting.add(0)

    return HomogeneousAutomaton(nfa.alphabet_bits, tuple(classes), frozenset(edges),
                                frozenset(start_states), frozenset(accepting))


def _reindex(h: HomogeneousAutomaton, keep: Sequence[int]) -> HomogeneousAutomaton:
    index = {old: new for new, old in enumerate(keep)}
    return HomogeneousAutomaton(
        h.alphabet_bits,
        tuple(h.symbol_class[q] for q in keep),
        frozenset((index[s], index[d]) for s, d in h.edges if s in index and d in index),
        frozenset(index[q] for q in h.start_states if q in index),
        frozenset(index[q] for q in h.accepting if q in index))


def trim(h: HomogeneousAutomaton) -> HomogeneousAutomaton:
    """
    Drop states that cannot take part in an accepting run.

    Keeps states reachable from a start state that can also reach an accepting state.
    Relative state order is preserved. If the language is empty the start states are
    kept so the automaton stays non-empty.
    """
    g = h.as_graph()
    reachable = set(h.start_states)
    for s in h.start_states:
        reachable |= nx.descendants(g, s)
    coreachable = set(h.accepting)
    for a in h.accepting:
        coreachable |= nx.ancestors(g, a)
    keep = sorted(reachable & coreachable)
    if not keep:
        keep = sorted(h.start_states) or [0]
    return _reindex(h, keep)


def merge_equivalent(h: HomogeneousAutomaton) -> HomogeneousAutomaton:
    """
    Merge states that are indistinguishable from their future behaviour.

    Two states merge when they share symbol class, successor set, accepting status and
    start status; merging repeats until no pair qualifies. The kept representative is
    the lowest-numbered member of each group.
    """
    rep = list(h.states)
    succ = h.successors()
    while True:
        groups: Dict[tuple, List[int]] = {}
        for q in sorted(set(rep)):
            key = (h.symbol_class[q], frozenset(rep[d] for d in succ[q]),
                   q in h.accepting, q in h.start_states)
            groups.setdefault(key, []).append(q)
        changed = False
        for members in groups.values():
            for q in members[1:]:
                for i, r in enumerate(rep):
                    if r == q:
                        rep[i] = members[0]
                changed = True
        if not changed:
            break
    keep = sorted(set(rep))
    merged_edges = frozenset((rep[s], rep[d]) for s, d in h.edges)
    collapsed = HomogeneousAutomaton(h.alphabet_bits, h.symbol_class, merged_edges,
                                     frozenset(rep[q] for q in h.start_states),
                                     frozenset(rep[q] for q in h.accepting))
    return _reindex(collapsed, keep)


def is_homogeneous_nfa(nfa: Nfa) -> bool:
    """True iff every state is entered on one symbol set from all its predecessors."""
    labels: Dict[Edge, set] = {}
    for src, sym, dst in nfa.transitions:
        labels.setdefault((src, dst), set()).add(sym)
    seen: Dict[int, FrozenSet[int]] = {}
    for (_, dst), syms in labels.items():
        if seen.setdefault(dst, frozenset(syms)) != frozenset(syms):
            return False
    return True


def random_nfa(rng: np.random.Generator, max_states: int = 8, num_symbols: int = 4,
               density: Union[float, None] = None) -> Nfa:
    """
    Draw a random NFA for property testing.

    Parameters
    ----------
    rng : numpy.random.Generator
        Source of randomness.
    max_states : int, optional
        Upper bound on the number of states; the count is uniform in `[1, max_states]`.
    num_symbols : int, optional
        Symbols are drawn from `[0, num_symbols)`; the alphabet width is the smallest
        that holds them.
    density : float, optional
        Probability of each possible transition. Drawn uniformly from `[0.05, 0.5]`
        when `None`.
    """
    n = int(rng.integers(1, max_states + 1))
    p = float(rng.uniform(0.05, 0.5)) if density is None else density
    mask = rng.random((n, num_symbols, n)) < p
    trans = frozenset((int(s), int(x), int(d)) for s, x, d in zip(*np.nonzero(mask)))
    accepting = frozenset(int(q) for q in np.flatnonzero(rng.random(n) < 0.3))
    bits = max(1, int(num_symbols - 1).bit_length())
    return Nfa(bits, n, trans, int(rng.integers(n)), accepting)


def enumerate_strings(num_symbols: int, max_length: int) -> Iterable[Tuple[int, ...]]:
    """All strings over `[0, num_symbols)` of length `0..max_length`, shortest first."""
    for length in range(max_length + 1):
        yield from itertools.product(range(num_symbols), repeat=length)
