"""
Functional and analytic model of a 1T1R crossbar column.

Each cell is a two-state resistive device in series with an access transistor. A logic
1 is stored as the low resistance. Evaluation pre-charges the bit line, drives the word
lines of the selected rows, and lets the line discharge through every selected cell;
the sense amplifier reports 1 when the line has fallen below the reference, so the
column computes the OR over selected rows of the stored bits.
"""

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bitvector import BitVector
from .config import DEFAULT_PROFILE, Profile

from typing import Optional, Sequence, Union, TYPE_CHECKING
if TYPE_CHECKING:
    from .engine import ApProgram


class EnduranceWarning(UserWarning):
    """A cell has been programmed more times than its endurance budget."""


class Backend(enum.Enum):
    """Storage technology of the configurable cells."""
    RRAM = 'rram'
    SRAM = 'sram'

    @classmethod
    def parse(cls, value: Union[str, "Backend"]) -> "Backend":
        if isinstance(value, Backend):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"Unknown backend '{value}'; use one of "
                             f"{[b.value for b in cls]}") from None


@dataclass(frozen=True)
class DeviceParams():
    """Two-state device and read-circuit parameters (ohms and volts)."""

    r_low: float = 1e3
    r_high: float = 1e8
    v_set: float = 1.3
    v_reset: float = 0.5
    v_precharge: float = 0.4
    v_read_done: float = 0.1
    v_reference: float = 0.25
    r_on: float = 2e3
    """On-resistance of each access transistor in the discharge path."""

    def __post_init__(self) -> None:
        if not 0 < self.r_low < self.r_high:
            raise ValueError(f"Need 0 < r_low < r_high, got {self.r_low}, {self.r_high}")
        if self.r_on < 0:
            raise ValueError("r_on must be non-negative")
        if not 0 < self.v_read_done < self.v_reference < self.v_precharge:
            raise ValueError("Need 0 < v_read_done < v_reference < v_precharge, got "
                             f"{self.v_read_done}, {self.v_reference}, {self.v_precharge}")

    @classmethod
    def from_profile(cls, profile: Optional[Profile] = None) -> "DeviceParams":
        p = DEFAULT_PROFILE if profile is None else profile
        return cls(p['r_low'], p['r_high'], p['v_set'], p['v_reset'], p['v_precharge'],
                   p['v_read_done'], p['v_reference'], p['r_on'])

    @property
    def non_destructive(self) -> bool:
        """Whether the pre-charge level stays below both write thresholds."""
        return self.v_precharge < min(abs(self.v_set), abs(self.v_reset))

    def resistance(self, bits: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        """Device resistance for stored bit(s): 1 is `r_low`, 0 is `r_high`."""
        return np.where(np.asarray(bits) != 0, self.r_low, self.r_high)


@dataclass(frozen=True, eq=False)
class Column():
    """One bit-line column of `len(cells)` 1T1R cells."""

    cells: np.ndarray
    params: DeviceParams = field(default_factory=DeviceParams)
    pulses: Optional[np.ndarray] = None
    """Programming pulses received per cell."""
    endurance_budget: int = 1_000_000

    def __post_init__(self) -> None:
        cells = np.array(self.cells, dtype=np.uint8).reshape(-1)
        if cells.size == 0:
            raise ValueError("A column needs at least one cell")
        if np.any(cells > 1):
            raise ValueError("Cells hold 0 or 1")
        pulses = (np.zeros(cells.size, dtype=np.int64) if self.pulses is None
                  else np.array(self.pulses, dtype=np.int64).reshape(-1))
        if pulses.shape != cells.shape:
            raise ValueError("pulses must match the number of cells")
        cells.setflags(write=False)
        pulses.setflags(write=False)
        object.__setattr__(self, 'cells', cells)
        object.__setattr__(self, 'pulses', pulses)

    @classmethod
    def blank(cls, length: int, params: Optional[DeviceParams] = None,
              endurance_budget: int = 1_000_000) -> "Column":
        """All cells in the high-resistance (logic 0) state, no pulses recorded."""
        return cls(np.zeros(length, dtype=np.uint8), params or DeviceParams(),
                   None, endurance_budget)

    def __len__(self) -> int:
        return self.cells.shape[0]

    def resistances(self) -> np.ndarray:
        return np.asarray(self.params.resistance(self.cells), dtype=float)


def program_column(column: Column, row: int, bit: int) -> Column:
    """
    Program one cell of a column.

    The word line selects `row` and one write pulse sets (1) or resets (0) the device.
    The pulse is counted even when the cell already holds `bit`.

    Raises
    ------
    IndexError
        If `row` is outside the column.
    ValueError
        If `bit` is not 0 or 1.

    Warns
    -----
    EnduranceWarning
        When the cell's pulse count exceeds the column's endurance budget.
    """
    if not 0 <= row < len(column):
        raise IndexError(f"row {row} outside column of {len(column)} cells")
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    cells = column.cells.copy()
    pulses = column.pulses.copy()  # type: ignore[union-attr]
    cells[row] = bit
    pulses[row] += 1
    if pulses[row] > column.endurance_budget:
        warnings.warn(EnduranceWarning(f"cell {row} programmed {pulses[row]} times, over its "
                                       f"budget of {column.endurance_budget}"), stacklevel=2)
    return Column(cells, column.params, pulses, column.endurance_budget)


def program_bits(column: Column, bits: Sequence[int]) -> Column:
    """Program every cell of `column` from `bits`, one pulse per cell."""
    if len(bits) != len(column):
        raise ValueError(f"{len(bits)} bits for a column of {len(column)} cells")
    for row, bit in enumerate(bits):
        column = program_column(column, row, int(bit))
    return column


def _row_mask(column: Column, active_rows: Union[BitVector, Sequence[int]]) -> np.ndarray:
    bits = active_rows.to_bits() if isinstance(active_rows, BitVector) \
        else np.asarray(active_rows, dtype=np.uint8)
    if bits.shape[0] != len(column):
        raise ValueError(f"{bits.shape[0]} row selects for a column of {len(column)} cells")
    return bits.astype(bool)


def evaluate_column(column: Column, active_rows: Union[BitVector, Sequence[int]]) -> int:
    """
    Logical output of a pre-charge/discharge evaluation.

    Returns 1 iff at least one selected cell stores a 1, i.e. the OR-of-ANDs dot
    product of the row-select vector with the column. Reading does not change the cells.

    Raises
    ------
    ValueError
        If `active_rows` does not have one entry per cell.
    """
    mask = _row_mask(column, active_rows)
    return int(np.any(column.cells[mask]))


def path_resistance(column: Column, active_rows: Union[BitVector, Sequence[int]]) -> float:
    """
    Equivalent resistance from the bit line to ground through the selected cells.

    Every selected cell contributes its device resistance in series with one access
    transistor, and the selected branches are in parallel. Returns `inf` when no row is
    selected.
    """
    mask = _row_mask(column, active_rows)
    if not mask.any():
        return math.inf
    branch = column.resistances()[mask] + column.params.r_on
    return float(1.0/np.sum(1.0/branch))


def discharge_time(params: DeviceParams, path_resistance: float,
                   bitline_capacitance: float) -> float:
    """
    Time for the bit line to fall from `v_precharge` to `v_read_done`.

    Single-pole RC model: `t = R*C*ln(v_precharge/v_read_done)`.

    Raises
    ------
    ValueError
        If the resistance or capacitance is not positive.

    Examples
    --------
    >>> discharge_time(DeviceParams(), 1e3, 1e-15)/1e-12
    1.3862943611198906
    """
    if not path_resistance > 0:
        raise ValueError(f"path resistance must be positive, got {path_resistance}")
    if not bitline_capacitance > 0:
        raise ValueError(f"bit-line capacitance must be positive, got {bitline_capacitance}")
    return path_resistance*bitline_capacitance*math.log(params.v_precharge/params.v_read_done)


def bitline_voltage(params: DeviceParams, path_resistance: float,
                    bitline_capacitance: float, t: Union[float, np.ndarray]
                    ) -> Union[float, np.ndarray]:
    """Bit-line voltage `t` seconds after the word lines are driven."""
    if math.isinf(path_resistance):
        return np.full_like(np.asarray(t, dtype=float), params.v_precharge)[()]
    tau = path_resistance*bitline_capacitance
    return params.v_precharge*np.exp(-np.asarray(t, dtype=float)/tau)


def sense_time(params: DeviceParams, bitline_capacitance: float) -> float:
    """Sense instant: a single low-resistance branch reaches `v_read_done`."""
    return discharge_time(params, params.r_low + params.r_on, bitline_capacitance)


def sense_column(column: Column, active_rows: Union[BitVector, Sequence[int]],
                 bitline_capacitance: float, t_sense: Optional[float] = None) -> int:
    """
    Analog evaluation: the sense amplifier output at `t_sense`.

    The output is 1 when the bit line has dropped below `v_reference`. With the default
    device this agrees with :func:`evaluate_column` while the parallel high-resistance
    branches of a column stay far above a single low branch (see :func:`max_sense_rows`).
    """
    params = column.params
    if t_sense is None:
        t_sense = sense_time(params, bitline_capacitance)
    r = path_resistance(column, active_rows)
    return int(bitline_voltage(params, r, bitline_capacitance, t_sense) < params.v_reference)


def max_sense_rows(params: DeviceParams, bitline_capacitance: float,
                   t_sense: Optional[float] = None) -> int:
    """
    Largest number of selected logic-0 cells that still read as 0 at `t_sense`.

    Beyond this count the combined leakage of high-resistance branches pulls the bit
    line below the reference on its own.
    """
    if t_sense is None:
        t_sense = sense_time(params, bitline_capacitance)
    # line stays above v_reference iff R_eq >= t/(C ln(v_pre/v_ref))
    r_min = t_sense/(bitline_capacitance*math.log(params.v_precharge/params.v_reference))
    return int(math.floor((params.r_high + params.r_on)/r_min))


@dataclass(frozen=True)
class ColumnCost():
    """Per-evaluation cost of one STE column."""

    discharge_time: float
    energy_per_eval: float
    backend: Backend

    def __post_init__(self) -> None:
        if not (self.discharge_time > 0 and self.energy_per_eval > 0):
            raise ValueError("discharge time and energy must be positive")


def column_cost(backend: Union[str, Backend], profile: Optional[Profile] = None) -> ColumnCost:
    """
    Calibrated per-evaluation latency and energy for a backend.

    Values come from the profile's cost table (`<backend>_discharge_time`,
    `<backend>_energy`); the defaults are the circuit-level measurements.

    Raises
    ------
    ValueError
        For an unknown backend.

    Examples
    --------
    >>> column_cost('rram')
    ColumnCost(discharge_time=1.04e-10, energy_per_eval=2.09e-15, backend=<Backend.RRAM: 'rram'>)
    """
    b = Backend.parse(backend)
    p = DEFAULT_PROFILE if profile is None else profile
    return ColumnCost(p[f'{b.value}_discharge_time'],  # type: ignore[literal-required]
                      p[f'{b.value}_energy'], b)  # type: ignore[literal-required]


@dataclass(frozen=True)
class Calibration():
    """Bit-line capacitances fitted so modeled discharge times hit the cost table."""

    rram_capacitance: float
    sram_capacitance: float
    rram_path_resistance: float
    sram_path_resistance: float
    column_length: int

    def to_profile(self, profile: Optional[Profile] = None) -> Profile:
        """Copy of `profile` with the fitted capacitances filled in."""
        out = dict(DEFAULT_PROFILE if profile is None else profile)
        out['rram_bitline_capacitance'] = self.rram_capacitance
        out['sram_bitline_capacitance'] = self.sram_capacitance
        out['column_length'] = self.column_length
        return out  # type: ignore[return-value]


def rram_path_resistance(params: DeviceParams, column_length: int = 256) -> float:
    """Discharge path of a fully selected column whose only logic 1 is the first cell."""
    cells = np.zeros(column_length, dtype=np.uint8)
    cells[0] = 1
    return path_resistance(Column(cells, params), np.ones(column_length, dtype=np.uint8))


def sram_path_resistance(params: DeviceParams) -> float:
    """Discharge path of the SRAM-based switch: two access transistors in series."""
    return 2*params.r_on


def fit_capacitance(params: DeviceParams, target_time: float, path_resistance: float) -> float:
    """Capacitance for which :func:`discharge_time` equals `target_time`."""
    if not target_time > 0:
        raise ValueError("target time must be positive")
    return target_time/(path_resistance*math.log(params.v_precharge/params.v_read_done))


def calibrate(params: Optional[DeviceParams] = None, profile: Optional[Profile] = None,
              column_length: Optional[int] = None) -> Calibration:
    """
    Fit per-backend bit-line capacitances to the profile's target discharge times.

    The RRAM path is a `column_length`-cell column with every row selected and only the
    first cell at logic 1; the SRAM path is two series access transistors.

    Parameters
    ----------
    params : DeviceParams, optional
        Device to calibrate; built from `profile` when `None`.
    profile : Profile, optional
        Source of the target times; defaults to :data:`~.config.DEFAULT_PROFILE`.
    column_length : int, optional
        Cells per column; defaults to the profile's `column_length`.
    """
    p = DEFAULT_PROFILE if profile is None else profile
    params = DeviceParams.from_profile(p) if params is None else params
    length = p['column_length'] if column_length is None else column_length
    r_rram = rram_path_resistance(params, length)
    r_sram = sram_path_resistance(params)
    return Calibration(fit_capacitance(params, p['rram_discharge_time'], r_rram),
                       fit_capacitance(params, p['sram_discharge_time'], r_sram),
                       r_rram, r_sram, length)


def columns_from_program(program: "ApProgram", params: Optional[DeviceParams] = None
                         ) -> list:
    """One programmed :class:`Column` per STE column of `program`, rows indexed by symbol."""
    params = params or DeviceParams()
    ste = program.ste_bits()
    return [Column(ste[:, n], params, (ste[:, n] != 0).astype(np.int64))
            for n in range(program.num_states)]


@dataclass(frozen=True)
class ProgramCost():
    """Configuration-phase cost of loading a program image into the array."""

    backend: Backend
    pulses: int
    """Cell writes issued."""
    latency: float
    energy: float
    non_volatile: bool
    """Whether the configuration survives a power cycle without reprogramming."""


def program_cost(program: "ApProgram", backend: Union[str, Backend],
                 profile: Optional[Profile] = None) -> ProgramCost:
    """
    Cost of configuring the STE and routing arrays of `program`.

    RRAM cells start in the high-resistance state and need one SET pulse per logic 1,
    issued one cell at a time. SRAM cells are written a row at a time, every cell of
    the row being driven.
    """
    b = Backend.parse(backend)
    p = DEFAULT_PROFILE if profile is None else profile
    ones = int(program.ste_bits().sum()) + int(program.routing_bits().sum())
    rows = (1 << program.symbol_bits) + program.num_states
    if b is Backend.RRAM:
        return ProgramCost(b, ones, ones*p['rram_write_time'], ones*p['rram_write_energy'], True)
    cells = rows*program.num_states
    return ProgramCost(b, cells, rows*p['sram_write_time'], cells*p['sram_write_energy'], False)
