"""
Regular expression front-end producing epsilon-free position (Glushkov) automata.

Supported dialect
-----------------
- literals; any character except the metacharacters ``()[]|*+?.\\``
- escapes: ``\\`` followed by a metacharacter, ``\\xHH`` (hex symbol value),
  ``\\n``, ``\\t``, ``\\r``
- ``.`` matches every symbol of the alphabet
- character classes ``[abc]``, ranges ``[a-z]``, negation ``[^...]``
- concatenation, alternation ``|``, grouping ``()``, postfix ``*``, ``+``, ``?``

There are no anchors, back-references or capture groups.
"""

from .automata import Nfa, SymbolError

from typing import Dict, FrozenSet, List, Mapping, Optional, Set, Tuple

META = set('()[]|*+?.\\')
ESCAPES = {'n': '\n', 't': '\t', 'r': '\r'}

# AST node tuples: ('eps',), ('pos', index), ('cat', a, b), ('alt', a, b),
# ('star', a), ('plus', a), ('opt', a)
Node = tuple


class RegexSyntaxError(ValueError):
    """Malformed pattern; `position` is the 0-based offset of the problem."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at position {position}")
        self.position = position


class _Parser():
    """Recursive-descent parser that numbers symbol positions as it goes."""

    def __init__(self, pattern: str, alphabet_bits: int,
                 symbol_map: Optional[Mapping[str, int]]) -> None:
        self.pattern = pattern
        self.pos = 0
        self.alphabet_bits = alphabet_bits
        self.n_symbols = 1 << alphabet_bits
        self.symbol_map = symbol_map
        self.positions: List[FrozenSet[int]] = []

    def parse(self) -> Node:
        node = self._alternation()
        if self.pos < len(self.pattern):
            # only an unmatched ')' can stop the top-level alternation early
            raise RegexSyntaxError("unmatched ')'", self.pos)
        return node

    def _peek(self) -> Optional[str]:
        return self.pattern[self.pos] if self.pos < len(self.pattern) else None

    def _alternation(self) -> Node:
        node = self._concatenation()
        while self._peek() == '|':
            self.pos += 1
            node = ('alt', node, self._concatenation())
        return node

    def _concatenation(self) -> Node:
        node: Node = ('eps',)
        while self._peek() not in (None, '|', ')'):
            item = self._repetition()
            node = item if node == ('eps',) else ('cat', node, item)
        return node

    def _repetition(self) -> Node:
        if self._peek() in ('*', '+', '?'):
            raise RegexSyntaxError(f"nothing to repeat before '{self._peek()}'", self.pos)
        node = self._atom()
        while self._peek() in ('*', '+', '?'):
            op = {'*': 'star', '+': 'plus', '?': 'opt'}[self.pattern[self.pos]]
            self.pos += 1
            node = (op, node)
        return node

    def _atom(self) -> Node:
        ch = self._peek()
        start = self.pos
        if ch == '(':
            self.pos += 1
            node = self._alternation()
            if self._peek() != ')':
                raise RegexSyntaxError("missing ')' for group opened", start)
            self.pos += 1
            return node
        if ch == '[':
            return self._new_position(self._char_class())
        if ch == '.':
            self.pos += 1
            return self._new_position(frozenset(range(self.n_symbols)))
        return self._new_position(frozenset([self._literal()]))

    def _new_position(self, symbols: FrozenSet[int]) -> Node:
        self.positions.append(symbols)
        return ('pos', len(self.positions) - 1)

    def _encode(self, ch: str, at: int) -> int:
        if self.symbol_map is not None:
            if ch not in self.symbol_map:
                raise SymbolError(f"character {ch!r} at position {at} has no symbol mapping", at)
            value = self.symbol_map[ch]
        else:
            value = ord(ch)
        if not 0 <= value < self.n_symbols:
            raise SymbolError(f"character {ch!r} at position {at} encodes to symbol {value}, "
                              f"outside the {self.alphabet_bits}-bit alphabet", at)
        return value

    def _literal(self) -> int:
        at = self.pos
        ch = self.pattern[self.pos]
        if ch == '\\':
            return self._escape()
        if ch in META:
            raise RegexSyntaxError(f"unexpected '{ch}'", at)
        self.pos += 1
        return self._encode(ch, at)

    def _escape(self) -> int:
        at = self.pos
        self.pos += 1
        ch = self._peek()
        if ch is None:
            raise RegexSyntaxError("dangling escape", at)
        self.pos += 1
        if ch == 'x':
            digits = self.pattern[self.pos:self.pos + 2]
            try:
                if len(digits) != 2:
                    raise ValueError
                value = int(digits, 16)
            except ValueError:
                raise RegexSyntaxError("\\x needs two hex digits", at)
            self.pos += 2
            if value >= self.n_symbols:
                raise SymbolError(f"escape at position {at} encodes symbol {value}, "
                                  f"outside the {self.alphabet_bits}-bit alphabet", at)
            return value
        if ch in ESCAPES:
            return self._encode(ESCAPES[ch], at)
        if ch in META or ch in '-^':
            return self._encode(ch, at)
        raise RegexSyntaxError(f"unknown escape '\\{ch}'", at)

    def _char_class(self) -> FrozenSet[int]:
        start = self.pos
        self.pos += 1
        negate = self._peek() == '^'
        if negate:
            self.pos += 1
        symbols: Set[int] = set()
        first = True
        while True:
            ch = self._peek()
            if ch is None:
                raise RegexSyntaxError("unterminated character class", start)
            if ch == ']' and not first:
                self.pos += 1
                break
            if ch == ']':
                raise RegexSyntaxError("empty character class", start)
            lo = self._class_member()
            if self._peek() == '-' and self.pattern[self.pos + 1:self.pos + 2] not in ('', ']'):
                self.pos += 1
                hi_at = self.pos
                hi = self._class_member()
                if hi < lo:
                    raise RegexSyntaxError("reversed range in character class", hi_at)
                symbols.update(range(lo, hi + 1))
            else:
                symbols.add(lo)
            first = False
        if negate:
            symbols = set(range(self.n_symbols)) - symbols
        return frozenset(symbols)

    def _class_member(self) -> int:
        at = self.pos
        ch = self.pattern[self.pos]
        if ch == '\\':
            return self._escape()
        self.pos += 1
        return self._encode(ch, at)


def _glushkov(node: Node, follow: Dict[int, Set[int]]) -> Tuple[bool, Set[int], Set[int]]:
    """Return (nullable, first, last) of `node`, filling `follow` in place."""
    kind = node[0]
    if kind == 'eps':
        return True, set(), set()
    if kind == 'pos':
        return False, {node[1]}, {node[1]}
    if kind in ('cat', 'alt'):
        na, fa, la = _glushkov(node[1], follow)
        nb, fb, lb = _glushkov(node[2], follow)
        if kind == 'alt':
            return na or nb, fa | fb, la | lb
        for p in la:
            follow.setdefault(p, set()).update(fb)
        return (na and nb, fa | fb if na else fa, lb | la if nb else lb)
    nx_, fx, lx = _glushkov(node[1], follow)
    if kind in ('star', 'plus'):
        for p in lx:
            follow.setdefault(p, set()).update(fx)
    return (True if kind in ('star', 'opt') else nx_), fx, lx


def parse_regex(pattern: str, alphabet_bits: int,
                symbol_map: Optional[Mapping[str, int]] = None) -> Nfa:
    """
    Build the position automaton of a regular expression.

    State 0 is the start state; state `i > 0` is the `i`-th symbol position of the
    pattern and is entered only on that position's symbol set, so the result is already
    homogeneous apart from the start state.

    Parameters
    ----------
    pattern : str
        Expression in the dialect described in the module docstring.
    alphabet_bits : int
        Symbol width `W`; every literal must encode below `2**W`.
    symbol_map : mapping of str to int, optional
        Character-to-symbol table. Defaults to the character's code point.

    Returns
    -------
    Nfa
        Epsilon-free automaton accepting exactly the pattern's language.

    Raises
    ------
    RegexSyntaxError
        For malformed patterns, with the offending position.
    SymbolError
        When a literal does not fit in the alphabet.

    Examples
    --------
    >>> nfa = parse_regex("ab|cb", 2, {'a': 0, 'b': 1, 'c': 2})
    >>> nfa.num_states
    5
    """
    parser = _Parser(pattern, alphabet_bits, symbol_map)
    tree = parser.parse()
    follow: Dict[int, Set[int]] = {}
    nullable, first, last = _glushkov(tree, follow)

    symbols = parser.positions
    trans = {(0, x, p + 1) for p in first for x in symbols[p]}
    trans |= {(p + 1, x, q + 1) for p, qs in follow.items() for q in qs for x in symbols[q]}
    accepting = {p + 1 for p in last}
    if nullable:
        accepting.add(0)
    return Nfa(alphabet_bits, len(symbols) + 1, frozenset(trans), 0, frozenset(accepting))
