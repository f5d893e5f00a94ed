"""
Plain-text `key = value` profiles shared by the crossbar, scouting and performance models.

Resistances are in ohms, voltages in volts, capacitances in farads, times in seconds,
energies in joules, powers in watts and areas in mm^2 unless a key says otherwise.
"""

from pathlib import Path

import numpy as np

from typing import Dict, Mapping, Optional, TypedDict, Union

PathLike = Union[str, Path]


class Profile(TypedDict, total=False):
    # two-state device and read circuit
    r_low: float
    r_high: float
    v_set: float
    v_reset: float
    v_precharge: float
    v_read_done: float
    v_reference: float
    r_on: float
    column_length: int
    endurance_budget: int
    # calibrated per-evaluation costs and fitted bit-line capacitances
    rram_discharge_time: float
    rram_energy: float
    sram_discharge_time: float
    sram_energy: float
    rram_bitline_capacitance: float
    sram_bitline_capacitance: float
    # configuration phase and array footprint
    rram_write_time: float
    rram_write_energy: float
    sram_write_time: float
    sram_write_energy: float
    feature_size: float
    rram_cell_area_f2: float
    sram_cell_area_f2: float
    rram_cell_leakage: float
    sram_cell_leakage: float
    # scouting logic
    read_voltage: float
    allow_wide_and: bool
    # conventional host and CIM accelerator
    cores: int
    alu_latency: float
    alu_energy: float
    l1_latency: float
    l1_energy: float
    l2_latency: float
    l2_energy: float
    dram_latency: float
    dram_energy: float
    xbar_latency: float
    xbar_energy: float
    xbar_lanes: int
    static_fraction: float
    core_area: float
    l1_area: float
    l2_area: float
    dram_area: float
    xbar_area: float
    l1_size_kb: float
    l2_size_kb: float
    dram_size_gb: float
    xbar_size_gb: float


DEFAULT_PROFILE: Profile = {
    'r_low': 1e3,
    'r_high': 1e8,
    'v_set': 1.3,
    'v_reset': 0.5,
    'v_precharge': 0.4,
    'v_read_done': 0.1,
    'v_reference': 0.25,
    'r_on': 2e3,
    'column_length': 256,
    'endurance_budget': 1_000_000,
    'rram_discharge_time': 104e-12,
    'rram_energy': 2.09e-15,
    'sram_discharge_time': 161e-12,
    'sram_energy': 5.16e-15,
    # fitted by crossbar.calibrate on the default device at column_length=256
    'rram_bitline_capacitance': 2.520e-14,
    'sram_bitline_capacitance': 2.903e-14,
    'rram_write_time': 10e-9,
    'rram_write_energy': 1e-12,
    'sram_write_time': 0.2e-9,
    'sram_write_energy': 5e-15,
    'feature_size': 45e-9,
    'rram_cell_area_f2': 12.0,
    'sram_cell_area_f2': 200.0,
    'rram_cell_leakage': 0.0,
    'sram_cell_leakage': 5e-10,
    'read_voltage': 0.4,
    'allow_wide_and': False,
    'cores': 4,
    'alu_latency': 0.5e-9,
    'alu_energy': 1e-12,
    'l1_latency': 1e-9,
    'l1_energy': 50e-12,
    'l2_latency': 5e-9,
    'l2_energy': 200e-12,
    'dram_latency': 50e-9,
    'dram_energy': 6400e-12,
    'xbar_latency': 10e-9,
    'xbar_energy': 0.2e-12,
    'xbar_lanes': 1024,
    'static_fraction': 0.3,
    'core_area': 2.0,
    'l1_area': 0.15,
    'l2_area': 1.0,
    'dram_area': 60.0,
    'xbar_area': 20.0,
    'l1_size_kb': 32,
    'l2_size_kb': 256,
    'dram_size_gb': 4,
    'xbar_size_gb': 2,
}
"""Default profile.

The device values and the rram/sram per-evaluation costs are measured values.
Bit-line capacitances are calibration outputs. Host latencies, energies and areas are
model assumptions apart from the SRAM and DRAM load energies, which are 50x and 6400x
the ALU operation energy."""

SWEEP_KEYS = ('m1', 'm2', 'acc', 'memory_fraction', 'instruction_count')

DEFAULT_SWEEP: Dict[str, np.ndarray] = {
    'm1': np.linspace(0.0, 0.6, 7),
    'm2': np.linspace(0.0, 0.6, 7),
    'acc': np.array([0.7]),
    'memory_fraction': np.array([0.3]),
    'instruction_count': np.array([1e9]),
}

_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


def _parse_value(key: str, raw: str, source: str, lineno: int):
    kind = type(DEFAULT_PROFILE[key])  # type: ignore[literal-required]
    text = raw.strip()
    try:
        if kind is bool:
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError(text)
        if kind is int:
            value = float(text)
            if not value.is_integer():
                raise ValueError(text)
            return int(value)
        return float(text)
    except ValueError:
        raise ValueError(f"{source}:{lineno}: cannot parse '{text}' as "
                         f"{kind.__name__} for '{key}'") from None


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        yield lineno, key.strip(), sep, value


def parse_profile(text: str, source: str = "<profile>",
                  base: Optional[Mapping] = None) -> Profile:
    """
    Parse profile text on top of `base` (default :data:`DEFAULT_PROFILE`).

    Raises
    ------
    KeyError
        For keys that are not profile keys.
    ValueError
        For lines without `=` or values of the wrong type.
    """
    profile = dict(DEFAULT_PROFILE if base is None else base)
    for lineno, key, sep, value in _lines(text):
        if not sep:
            raise ValueError(f"{source}:{lineno}: expected 'key = value'")
        if key not in DEFAULT_PROFILE:
            raise KeyError(f"{source}:{lineno}: unknown profile key '{key}'")
        profile[key] = _parse_value(key, value, source, lineno)
    return profile  # type: ignore[return-value]


def load_profile(path: Optional[PathLike] = None, **overrides) -> Profile:
    """
    Load a profile file merged over the defaults.

    Parameters
    ----------
    path : str or Path, optional
        Profile file. If `None`, only the defaults are used.
    **overrides
        Keys applied last, validated like file entries.
    """
    profile: Profile
    if path is None:
        profile = dict(DEFAULT_PROFILE)  # type: ignore[assignment]
    else:
        profile = parse_profile(Path(path).read_text(), str(path))
    for key, value in overrides.items():
        if key not in DEFAULT_PROFILE:
            raise KeyError(f"unknown profile key '{key}'")
        profile[key] = value  # type: ignore[literal-required]
    return profile


def dump_profile(profile: Mapping, path: Optional[PathLike] = None) -> str:
    """Render a profile as text, writing it to `path` when given."""
    lines = []
    for key in DEFAULT_PROFILE:
        if key in profile:
            value = profile[key]
            if isinstance(value, bool):
                lines.append(f"{key} = {'true' if value else 'false'}")
            else:
                lines.append(f"{key} = {value!r}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def parse_sweep(text: str, source: str = "<sweep>") -> Dict[str, np.ndarray]:
    """
    Parse a sweep specification.

    Each line is `key = value` or `key = start, stop, num`; ranges expand with
    `numpy.linspace`. Keys not given keep the values of :data:`DEFAULT_SWEEP`.

    Examples
    --------
    >>> parse_sweep("m1 = 0, 0.6, 4\\nacc = 0.5")['m1']
    array([0. , 0.2, 0.4, 0.6])
    """
    sweep = {k: v.copy() for k, v in DEFAULT_SWEEP.items()}
    for lineno, key, sep, value in _lines(text):
        if not sep:
            raise ValueError(f"{source}:{lineno}: expected 'key = value'")
        if key not in SWEEP_KEYS:
            raise KeyError(f"{source}:{lineno}: unknown sweep key '{key}'")
        parts = [p.strip() for p in value.split(',')]
        try:
            if len(parts) == 1:
                sweep[key] = np.array([float(parts[0])])
            elif len(parts) == 3:
                sweep[key] = np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"{source}:{lineno}: '{key}' needs a value or "
                             "'start, stop, num'") from None
    return sweep


def load_sweep(path: Optional[PathLike] = None) -> Dict[str, np.ndarray]:
    """Load a sweep specification file; `None` gives the default sweep."""
    if path is None:
        return {k: v.copy() for k, v in DEFAULT_SWEEP.items()}
    return parse_sweep(Path(path).read_text(), str(path))
