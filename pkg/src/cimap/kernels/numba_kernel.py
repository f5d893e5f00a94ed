import numpy as np
import psutil

try:
    import numba as nb
    numba_available = True
except ImportError as e:
    numba_available = False
    numba_import_error = e

from typing import Optional, Tuple

ONE = np.uint64(1)
ZERO = np.uint64(0)

MEMO_BYTES = 64*1024**2


def memo_capacity(n_sym: int, n_words: int, cache_states: int,
                  memo_bytes: int = MEMO_BYTES) -> int:
    """
    Number of active vectors the memo can hold within `memo_bytes`.

    Each memoized vector costs one successor row over the whole alphabet plus its
    packed words, flags and two hash slots. The budget is further capped at a quarter
    of the currently available memory.

    Raises
    ------
    MemoryError
        If two memo rows do not fit in the available memory.
    """
    row = 8*n_sym + 8*n_words + 8 + 1 + 16
    avail = psutil.virtual_memory().available
    if 2*row > avail:
        raise MemoryError(f"Memo needs {2*row/1024**3:.2f} GB but only "
                          f"{avail/1024**3:.2f} GB is available")
    budget = min(memo_bytes, avail//4)
    return int(max(2, min(cache_states, budget//row)))


def numba_run(ste: np.ndarray, routing: np.ndarray, accept: np.ndarray,
              initial: np.ndarray, all_input_start: bool, symbols: np.ndarray,
              trace: bool = False, cache_states: int = 4096, memo_bytes: int = MEMO_BYTES,
              **kwargs) -> Tuple[np.ndarray, bool, Optional[np.ndarray], int]:
    """
    JIT run kernel that memoizes active-vector transitions.

    Every distinct active vector met during the run is interned and its successor on
    each symbol is computed once, so steady-state cost per symbol is a table lookup.
    When the memo is full it is flushed and rebuilt from the current vector, which
    bounds memory on adversarial inputs. The memo holds at most `cache_states`
    vectors and never more than fit in `memo_bytes`, so wide alphabets get fewer rows.
    Results are bit-identical to :func:`~.numpy_kernel.numpy_run`.

    Args
    ----
    ste, routing, accept, initial, all_input_start, symbols, trace:
        As for :func:`~.numpy_kernel.numpy_run`.
    cache_states: int
        Number of distinct active vectors memoized before a flush. Must be at least 2.
    memo_bytes: int
        Memory budget of the memo tables in bytes. Default is 64 MiB.
    **kwargs: dict
        Ignored.

    Returns
    -------
    tuple
        `(final, accepted_ever, trace_words, activations)` as for
        :func:`~.numpy_kernel.numpy_run`.
    """
    if not numba_available:
        raise ImportError('numba backend not installed') from numba_import_error
    if cache_states < 2:
        raise ValueError("cache_states must be at least 2")
    if memo_bytes <= 0:
        raise ValueError("memo_bytes must be positive")
    capacity = memo_capacity(ste.shape[0], ste.shape[1], cache_states, memo_bytes)

    symbols = np.ascontiguousarray(symbols)
    if symbols.dtype != np.uint8:
        symbols = symbols.astype(np.int64, copy=False)
    final, ever, trace_words, activations = _run_memoized(
        np.ascontiguousarray(ste), np.ascontiguousarray(routing),
        np.ascontiguousarray(accept), np.ascontiguousarray(initial),
        bool(all_input_start), symbols, bool(trace), capacity)
    return final, bool(ever), (trace_words if trace else None), int(activations)


if numba_available:

    @nb.njit(cache=True)
    def _popcount(words):
        count = 0
        for w in words:
            while w != ZERO:
                w &= w - ONE
                count += 1
        return count

    @nb.njit(cache=True)
    def _hash(words):
        h = np.uint64(1469598103934665603)
        for w in words:
            h = (h ^ w) * np.uint64(1099511628211)
        return h

    @nb.njit(cache=True)
    def _intern(words, store, slots, count):
        mask = np.uint64(slots.shape[0] - 1)
        h = _hash(words) & mask
        while True:
            s = slots[h]
            if s < 0:
                store[count, :] = words
                slots[h] = count
                return count, count + 1
            if np.array_equal(store[s], words):
                return s, count
            h = (h + ONE) & mask

    @nb.njit(cache=True)
    def _source(words, initial, all_input):
        if all_input:
            return words | initial
        return words.copy()

    @nb.njit(cache=True)
    def _successor(source, ste_row, routing):
        follow = np.zeros(source.shape[0], dtype=np.uint64)
        for wi in range(source.shape[0]):
            word = source[wi]
            bit = 0
            while word != ZERO:
                if word & ONE:
                    follow |= routing[wi*64 + bit]
                word >>= ONE
                bit += 1
        return follow & ste_row

    @nb.njit(cache=True)
    def _run_memoized(ste, routing, accept, initial, all_input, symbols, trace, capacity):
        nw = ste.shape[1]
        n_sym = ste.shape[0]
        n_slots = 1
        while n_slots < 2*capacity:
            n_slots <<= 1

        store = np.zeros((capacity, nw), dtype=np.uint64)
        nxt = np.full((capacity, n_sym), -1, dtype=np.int64)
        acc = np.zeros(capacity, dtype=np.bool_)
        pop = np.zeros(capacity, dtype=np.int64)
        slots = np.full(n_slots, -1, dtype=np.int64)

        cur, count = _intern(initial, store, slots, 0)
        acc[cur] = np.any(initial & accept)
        pop[cur] = _popcount(_source(initial, initial, all_input))

        n_steps = symbols.shape[0]
        trace_words = np.zeros((n_steps + 1 if trace else 1, nw), dtype=np.uint64)
        trace_words[0, :] = initial
        ever = acc[cur]
        activations = 0

        for t in range(n_steps):
            x = symbols[t]
            nid = nxt[cur, x]
            if nid < 0:
                if count >= capacity - 1:
                    words = store[cur].copy()
                    slots[:] = -1
                    nxt[:, :] = -1
                    cur, count = _intern(words, store, slots, 0)
                    acc[cur] = np.any(words & accept)
                    pop[cur] = _popcount(_source(words, initial, all_input))
                succ = _successor(_source(store[cur], initial, all_input), ste[x], routing)
                nid, new_count = _intern(succ, store, slots, count)
                if new_count > count:
                    acc[nid] = np.any(succ & accept)
                    pop[nid] = _popcount(_source(succ, initial, all_input))
                    count = new_count
                nxt[cur, x] = nid
            activations += pop[cur]
            cur = nid
            if acc[cur]:
                ever = True
            if trace:
                trace_words[t + 1, :] = store[cur]

        return store[cur].copy(), ever, trace_words, activations
