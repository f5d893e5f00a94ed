"""
Scouting logic: logic gates from multi-row reads of a memristive array.

Activating several rows at once puts their cells in parallel on each bit line. The
sense-amplifier input current then takes one of a few discrete levels, and placing the
reference current between two of them turns the read into an OR, AND or XOR of the
selected rows.
"""

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.stats import gmean

from .bitvector import BitVector
from .config import DEFAULT_PROFILE, Profile
from .crossbar import Column, DeviceParams, program_column

from typing import Iterable, Optional, Sequence, Tuple, Union


class MarginWarning(UserWarning):
    """A sense reference sits uncomfortably close to a current level."""


THIN_MARGIN = 1.2
"""References closer than this ratio to a neighbouring level raise a MarginWarning."""


class Gate(enum.Enum):
    OR = 'or'
    AND = 'and'
    XOR = 'xor'

    @classmethod
    def parse(cls, value: Union[str, "Gate"]) -> "Gate":
        if isinstance(value, Gate):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"Unknown gate '{value}'; use one of "
                             f"{[g.value for g in cls]}") from None


@dataclass(frozen=True, eq=False)
class ScoutArray():
    """Memristive array read with scouting logic; 1 is `r_low`, 0 is `r_high`."""

    cells: np.ndarray
    params: DeviceParams = field(default_factory=DeviceParams)
    read_voltage: float = 0.4
    pulses: Optional[np.ndarray] = None
    endurance_budget: int = 1_000_000

    def __post_init__(self) -> None:
        cells = np.array(self.cells, dtype=np.uint8)
        if cells.ndim != 2 or 0 in cells.shape:
            raise ValueError(f"cells must be a non-empty 2-D array, got shape {cells.shape}")
        if np.any(cells > 1):
            raise ValueError("Cells hold 0 or 1")
        if not self.read_voltage > 0:
            raise ValueError("read_voltage must be positive")
        pulses = (np.zeros(cells.shape, dtype=np.int64) if self.pulses is None
                  else np.array(self.pulses, dtype=np.int64))
        if pulses.shape != cells.shape:
            raise ValueError("pulses must match the cell array")
        cells.setflags(write=False)
        pulses.setflags(write=False)
        object.__setattr__(self, 'cells', cells)
        object.__setattr__(self, 'pulses', pulses)

    @classmethod
    def blank(cls, rows: int, cols: int, params: Optional[DeviceParams] = None,
              read_voltage: float = 0.4) -> "ScoutArray":
        return cls(np.zeros((rows, cols), dtype=np.uint8), params or DeviceParams(),
                   read_voltage)

    @classmethod
    def from_profile(cls, cells: np.ndarray, profile: Optional[Profile] = None) -> "ScoutArray":
        p = DEFAULT_PROFILE if profile is None else profile
        return cls(cells, DeviceParams.from_profile(p), p['read_voltage'], None,
                   p['endurance_budget'])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.cells.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class SenseConfig():
    """
    Sense-amplifier references for one gate.

    OR and AND output 1 above `ref_low`; XOR outputs 1 strictly between `ref_low` and
    `ref_high`.
    """

    gate: Gate
    ref_low: float
    ref_high: Optional[float] = None
    num_rows: int = 2
    margins: Tuple[float, ...] = ()
    """Ratio of each reference to its nearer current level (always > 1)."""

    def __post_init__(self) -> None:
        if not self.ref_low > 0:
            raise ValueError("ref_low must be positive")
        if self.gate is Gate.XOR and (self.ref_high is None or not self.ref_high > self.ref_low):
            raise ValueError("XOR needs ref_high > ref_low")


def _rows(array: ScoutArray, rows: Iterable[int]) -> np.ndarray:
    idx = np.array(sorted(set(int(r) for r in rows)), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("At least one row must be activated")
    if idx[0] < 0 or idx[-1] >= array.shape[0]:
        raise IndexError(f"row index outside array of {array.shape[0]} rows")
    return idx


def column_currents(array: ScoutArray, rows: Iterable[int]) -> np.ndarray:
    """Sense-amplifier input current of every column with `rows` activated."""
    idx = _rows(array, rows)
    conductance = 1.0/np.asarray(array.params.resistance(array.cells[idx]), dtype=float)
    return array.read_voltage*conductance.sum(axis=0)


def column_current(array: ScoutArray, rows: Iterable[int], col: int) -> float:
    """
    Current into the sense amplifier of column `col` with `rows` activated.

    The activated cells conduct in parallel: `I = V_r * sum(1/R_cell)`.

    Raises
    ------
    ValueError
        If `rows` is empty.
    IndexError
        If a row or `col` is outside the array.

    Examples
    --------
    >>> arr = ScoutArray(np.array([[1], [0]]))
    >>> round(column_current(arr, [0, 1], 0)*1e3, 4)
    0.4
    """
    if not 0 <= col < array.shape[1]:
        raise IndexError(f"column {col} outside array of {array.shape[1]} columns")
    return float(column_currents(array, rows)[col])


def current_levels(params: DeviceParams, read_voltage: float, num_rows: int) -> np.ndarray:
    """Achievable currents with `num_rows` rows active, indexed by the count of logic-1 cells."""
    j = np.arange(num_rows + 1)
    return read_voltage*(j/params.r_low + (num_rows - j)/params.r_high)


def _window(levels: np.ndarray, lower: int, min_ratio: float) -> Tuple[float, float]:
    lo, hi = levels[lower], levels[lower + 1]
    if hi/lo < min_ratio:
        raise ValueError(f"current levels {lo:.3e} A and {hi:.3e} A are within "
                         f"a factor {min_ratio} of each other; no separating reference")
    ref = float(gmean([lo, hi]))
    return ref, float(min(ref/lo, hi/ref))


def default_references(params: DeviceParams, read_voltage: float, num_rows: int,
                       gate: Union[str, Gate], allow_wide_and: bool = False,
                       min_ratio: float = 1.1) -> SenseConfig:
    """
    Place sense references at the geometric midpoints of the levels they separate.

    OR separates "no logic 1" from "one logic 1"; AND separates "all but one" from
    "all"; XOR uses both the OR reference and the reference between one and two
    logic 1s.

    Parameters
    ----------
    params : DeviceParams
        Device resistances.
    read_voltage : float
        Read voltage `V_r` in volts.
    num_rows : int
        Rows activated together.
    gate : {"or", "and", "xor"} or Gate
        Gate to realize.
    allow_wide_and : bool, optional
        Permit AND over more than two rows, subject to the margin check.
    min_ratio : float, optional
        Smallest ratio between adjacent levels accepted as separable. Default 1.1.

    Raises
    ------
    ValueError
        If the gate is not defined for `num_rows`, or the levels to separate collide.

    Warns
    -----
    MarginWarning
        When a reference is within :data:`THIN_MARGIN` of a level.
    """
    g = Gate.parse(gate)
    if num_rows < 1:
        raise ValueError("num_rows must be at least 1")
    if g is not Gate.OR and num_rows < 2:
        raise ValueError(f"{g.name} needs at least two rows")
    if g is Gate.XOR and num_rows != 2:
        raise ValueError("XOR is defined for exactly two rows")
    if g is Gate.AND and num_rows > 2 and not allow_wide_and:
        raise ValueError("AND over more than two rows needs allow_wide_and")

    levels = current_levels(params, read_voltage, num_rows)
    if g is Gate.OR:
        ref, margin = _window(levels, 0, min_ratio)
        config = SenseConfig(g, ref, None, num_rows, (margin,))
    elif g is Gate.AND:
        ref, margin = _window(levels, num_rows - 1, min_ratio)
        config = SenseConfig(g, ref, None, num_rows, (margin,))
    else:
        ref_low, m_low = _window(levels, 0, min_ratio)
        ref_high, m_high = _window(levels, 1, min_ratio)
        config = SenseConfig(g, ref_low, ref_high, num_rows, (m_low, m_high))

    if min(config.margins) < THIN_MARGIN:
        warnings.warn(MarginWarning(f"{g.name} over {num_rows} rows has a margin of only "
                                    f"{min(config.margins):.3f}"), stacklevel=2)
    return config


def scouting_read(array: ScoutArray, rows: Iterable[int], sense: SenseConfig) -> BitVector:
    """
    Multi-row read producing one output bit per column.

    The result lands in a fresh output vector; the array is not modified.

    Raises
    ------
    ValueError
        If the number of activated rows differs from the one `sense` was built for.
    """
    idx = _rows(array, rows)
    if idx.size != sense.num_rows:
        raise ValueError(f"SenseConfig is for {sense.num_rows} rows, "
                         f"but {idx.size} are activated")
    current = column_currents(array, idx)
    if sense.gate is Gate.XOR:
        out = (current > sense.ref_low) & (current < sense.ref_high)
    else:
        out = current > sense.ref_low
    return BitVector.from_bits(out.astype(np.uint8))


def program_array(array: ScoutArray, row: int, bits: Sequence[int]) -> ScoutArray:
    """
    Write one row of the array, one programming pulse per cell.

    Uses the crossbar column write path cell by cell, so pulse accounting and endurance
    warnings match :func:`~.crossbar.program_column`.
    """
    if len(bits) != array.shape[1]:
        raise ValueError(f"{len(bits)} bits for a row of {array.shape[1]} cells")
    cells = array.cells.copy()
    pulses = array.pulses.copy()  # type: ignore[union-attr]
    for c, bit in enumerate(bits):
        col = Column(cells[:, c], array.params, pulses[:, c], array.endurance_budget)
        col = program_column(col, row, int(bit))
        cells[:, c] = col.cells
        pulses[:, c] = col.pulses
    return ScoutArray(cells, array.params, array.read_voltage, pulses, array.endurance_budget)


def truth_table(params: Optional[DeviceParams] = None, read_voltage: float = 0.4) -> pd.DataFrame:
    """
    Two-row truth table of every gate.

    Returns a frame with columns `gate`, `row_bits`, `current`, `output`: one row per
    gate and input combination (12 rows).
    """
    params = params or DeviceParams()
    # column k holds the input pair (bit of row 0, bit of row 1) = divmod(k, 2)
    cells = np.array([[0, 0, 1, 1], [0, 1, 0, 1]], dtype=np.uint8)
    array = ScoutArray(cells, params, read_voltage)
    current = column_currents(array, [0, 1])
    records = []
    for g in Gate:
        out = scouting_read(array, [0, 1], default_references(params, read_voltage, 2, g))
        for k in range(4):
            records.append({'gate': g.value, 'row_bits': f"{cells[0, k]}{cells[1, k]}",
                            'current': float(current[k]), 'output': out[k]})
    return pd.DataFrame.from_records(records, columns=['gate', 'row_bits', 'current', 'output'])
