import pytest
import numpy as np

from cimap.automata import Nfa, HomogeneousAutomaton
from cimap.bitvector import BitVector, pack_bits
from cimap.engine import ApProgram

# defines common fixtures used across component tests

# symbols of the worked example: a=0, b=1, c=2
WORKED_ALPHABET = 'abcd'


@pytest.fixture
def worked_nfa():
    """Three-state NFA: q0 -c-> q1, q0 -b-> q2, q1 -b-> q2, accepting q2."""
    return Nfa(2, 3, {(0, 2, 1), (0, 1, 2), (1, 1, 2)}, 0, {2})


@pytest.fixture
def worked_homogeneous():
    """Homogeneous form of the worked example with STE classes {a,b,c}, {c}, {b}."""
    return HomogeneousAutomaton(2, ({0, 1, 2}, {2}, {1}), {(0, 1), (0, 2), (1, 2)}, {0}, {2})


def _naive_symbol_vector(V, symbol):
    n_sym, n = len(V), len(V[0])
    i = [1 if k == symbol else 0 for k in range(n_sym)]
    return [int(any(i[k] and V[k][col] for k in range(n_sym))) for col in range(n)]


def _naive_follow_vector(R, active):
    n = len(active)
    rows = [i for i in range(n) if active[i]]
    return [int(any(R[i][col] for i in rows)) for col in range(n)]


def _naive_step(V, R, active, symbol):
    s = _naive_symbol_vector(V, symbol)
    f = _naive_follow_vector(R, active)
    return [fi & si for fi, si in zip(f, s)]


def _naive_accept(active, c):
    return any(a and ci for a, ci in zip(active, c))


class NaiveEquations():
    """Per-bit loops over unpacked 0/1 matrices, one function per engine equation."""
    symbol_vector = staticmethod(_naive_symbol_vector)
    follow_vector = staticmethod(_naive_follow_vector)
    step = staticmethod(_naive_step)
    accept = staticmethod(_naive_accept)


@pytest.fixture
def naive():
    """Provides the naive reference implementation of the engine equations."""
    return NaiveEquations


def _random_program(rng, max_states=1024, max_symbol_bits=4, all_input_start=False):
    n = int(rng.integers(1, max_states + 1))
    w = int(rng.integers(1, max_symbol_bits + 1))
    V = rng.random((1 << w, n)) < rng.uniform(0.05, 0.6)
    R = rng.random((n, n)) < min(1.0, rng.uniform(0.5, 4.0)/n)
    c = rng.random(n) < 0.2
    a0 = rng.random(n) < 0.1
    program = ApProgram(w, n, pack_bits(V), pack_bits(R), BitVector.from_bits(c.astype(np.uint8)),
                        BitVector.from_bits(a0.astype(np.uint8)), all_input_start)
    return program, V.astype(np.uint8), R.astype(np.uint8), c.astype(np.uint8), a0.astype(np.uint8)


@pytest.fixture
def random_program():
    """Provides a function drawing `(program, V, R, c, a0)` with unpacked matrices."""
    return _random_program


@pytest.fixture
def write_text(tmp_path):
    """Provides a function writing text into a file under `tmp_path`."""
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return path
    return _write
