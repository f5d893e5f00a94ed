import numpy as np

from ..bitvector import bitwise_or_rows, unpack_bits

from typing import Optional, Tuple


def numpy_run(ste: np.ndarray, routing: np.ndarray, accept: np.ndarray,
              initial: np.ndarray, all_input_start: bool, symbols: np.ndarray,
              trace: bool = False, **kwargs
              ) -> Tuple[np.ndarray, bool, Optional[np.ndarray], int]:
    """
    Reference run kernel: one packed-word update per input symbol.

    Each step gathers the routing rows of the active states, ORs them into the follow
    vector and masks it with the STE row of the current symbol.

    Args
    ----
    ste: numpy.ndarray
        Packed symbol matrix of shape `(2**W, words)`.
    routing: numpy.ndarray
        Packed routing matrix of shape `(N, words)`; row `i` holds the destinations of `i`.
    accept: numpy.ndarray
        Packed accept vector of shape `(words,)`.
    initial: numpy.ndarray
        Packed initial active vector of shape `(words,)`.
    all_input_start: bool
        Re-inject `initial` before every symbol.
    symbols: numpy.ndarray
        Validated input stream.
    trace: bool
        Record the active vector before the first and after every symbol.
    **kwargs: dict
        Accepted for signature compatibility with other kernels and ignored.

    Returns
    -------
    final: numpy.ndarray
        Packed active vector after the last symbol.
    accepted_ever: bool
        Whether any accepting state was active at any step, including step 0.
    trace_words: numpy.ndarray or None
        Array of shape `(len(symbols)+1, words)` when `trace` is set.
    activations: int
        Total number of routing rows driven over the run.
    """
    num_states = routing.shape[0]
    active = initial.copy()
    trace_words = np.zeros((len(symbols) + 1, ste.shape[1]), dtype=ste.dtype) if trace else None
    if trace_words is not None:
        trace_words[0] = active
    ever = bool(np.any(active & accept))
    activations = 0

    for t, x in enumerate(symbols):
        source = active | initial if all_input_start else active
        rows = np.flatnonzero(unpack_bits(source, num_states))
        activations += rows.size
        active = bitwise_or_rows(routing, rows) & ste[x]
        if not ever and np.any(active & accept):
            ever = True
        if trace_words is not None:
            trace_words[t + 1] = active

    return active, ever, trace_words, activations
