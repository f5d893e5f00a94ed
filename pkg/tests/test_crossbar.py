import math

import numpy as np
import pytest

from cimap.bitvector import BitVector
from cimap.config import DEFAULT_PROFILE
from cimap.crossbar import (Backend, Column, DeviceParams, EnduranceWarning, bitline_voltage,
                            calibrate, column_cost, columns_from_program, discharge_time,
                            evaluate_column, max_sense_rows, path_resistance, program_bits,
                            program_column, program_cost, rram_path_resistance, sense_column,
                            sense_time, sram_path_resistance)
from cimap.engine import compile


@pytest.mark.crossbar
def test_default_device():
    p = DeviceParams()
    assert (p.r_low, p.r_high) == (1e3, 1e8)
    assert p.non_destructive
    assert p.resistance(1) == 1e3
    assert p.resistance(0) == 1e8
    assert DeviceParams.from_profile() == p


@pytest.mark.crossbar
def test_evaluate_column_is_or():
    """Output is 1 iff a selected cell holds a 1"""
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 64))
        cells = (rng.random(n) < 0.2).astype(np.uint8)
        rows = (rng.random(n) < 0.3).astype(np.uint8)
        col = Column(cells)
        assert evaluate_column(col, rows) == int(np.any(cells & rows))
        assert evaluate_column(col, BitVector.from_bits(rows)) == int(np.any(cells & rows))
        # reading leaves the column untouched
        np.testing.assert_array_equal(col.cells, cells)


@pytest.mark.crossbar
def test_column_examples():
    col = Column([0, 1, 0])
    assert evaluate_column(col, [1, 0, 0]) == 0
    assert evaluate_column(col, [1, 1, 1]) == 1
    assert evaluate_column(col, [0, 0, 0]) == 0


@pytest.mark.crossbar
def test_path_resistance():
    """Selected branches (device plus access transistor) in parallel"""
    p = DeviceParams()
    col = Column([1, 0, 0])
    expected = 1/(1/(p.r_low + p.r_on) + 2/(p.r_high + p.r_on))
    assert path_resistance(col, [1, 1, 1]) == pytest.approx(expected)
    assert path_resistance(col, [0, 1, 0]) == pytest.approx(p.r_high + p.r_on)
    assert math.isinf(path_resistance(col, [0, 0, 0]))


@pytest.mark.crossbar
def test_calibration_reproduces_discharge_times():
    """Fitted capacitances give 104 ps and 161 ps within 5%"""
    p = DeviceParams()
    cal = calibrate()
    t_rram = discharge_time(p, rram_path_resistance(p, 256), cal.rram_capacitance)
    t_sram = discharge_time(p, sram_path_resistance(p), cal.sram_capacitance)
    assert t_rram == pytest.approx(104e-12, rel=0.05)
    assert t_sram == pytest.approx(161e-12, rel=0.05)

    # the capacitances stored in the default profile are the rounded fit
    assert cal.rram_capacitance == pytest.approx(DEFAULT_PROFILE['rram_bitline_capacitance'],
                                                 rel=1e-3)
    assert cal.sram_capacitance == pytest.approx(DEFAULT_PROFILE['sram_bitline_capacitance'],
                                                 rel=1e-3)
    t = discharge_time(p, rram_path_resistance(p), DEFAULT_PROFILE['rram_bitline_capacitance'])
    assert t == pytest.approx(104e-12, rel=0.01)

    profile = cal.to_profile()
    assert profile['rram_bitline_capacitance'] == cal.rram_capacitance


@pytest.mark.crossbar
def test_discharge_scales_with_rc():
    p = DeviceParams()
    base = discharge_time(p, 1e3, 1e-14)
    assert discharge_time(p, 2e3, 1e-14) == pytest.approx(2*base)
    assert discharge_time(p, 1e3, 3e-14) == pytest.approx(3*base)
    assert base == pytest.approx(1e3*1e-14*math.log(4))


@pytest.mark.crossbar
def test_bitline_voltage():
    p = DeviceParams()
    assert bitline_voltage(p, 1e3, 1e-14, 0.0) == pytest.approx(0.4)
    t_done = discharge_time(p, 1e3, 1e-14)
    assert bitline_voltage(p, 1e3, 1e-14, t_done) == pytest.approx(p.v_read_done)
    assert bitline_voltage(p, math.inf, 1e-14, 1.0) == pytest.approx(p.v_precharge)
    v = bitline_voltage(p, 1e3, 1e-14, np.array([0.0, t_done]))
    np.testing.assert_allclose(v, [0.4, 0.1])


@pytest.mark.crossbar
def test_sense_agrees_with_functional():
    """Analog sensing of a 256-cell column matches the logical OR"""
    p = DeviceParams()
    c = DEFAULT_PROFILE['rram_bitline_capacitance']
    rng = np.random.default_rng(17)
    for _ in range(200):
        cells = (rng.random(256) < rng.uniform(0, 0.05)).astype(np.uint8)
        rows = (rng.random(256) < rng.uniform(0, 1)).astype(np.uint8)
        col = Column(cells, p)
        assert sense_column(col, rows, c) == evaluate_column(col, rows)

    # worst cases: every row selected, zero or one logic 1
    assert sense_column(Column(np.zeros(256)), np.ones(256), c) == 0
    one = np.zeros(256)
    one[255] = 1
    assert sense_column(Column(one), np.ones(256), c) == 1
    assert max_sense_rows(p, c) >= 256
    assert sense_time(p, c) > 0


@pytest.mark.crossbar
def test_programming_counts_pulses():
    col = Column.blank(4)
    col = program_column(col, 2, 1)
    col = program_column(col, 2, 1)
    assert col.cells.tolist() == [0, 0, 1, 0]
    assert col.pulses.tolist() == [0, 0, 2, 0]
    col = program_bits(col, [1, 0, 0, 1])
    assert col.cells.tolist() == [1, 0, 0, 1]
    assert col.pulses.tolist() == [1, 1, 3, 1]


@pytest.mark.crossbar
def test_endurance_warning():
    col = Column.blank(2, endurance_budget=2)
    col = program_column(col, 0, 1)
    col = program_column(col, 0, 0)
    with pytest.warns(EnduranceWarning, match='budget'):
        program_column(col, 0, 1)


@pytest.mark.crossbar
def test_columns_from_program_evaluate_symbol_vector(worked_homogeneous):
    """Driving the row of symbol x reads out row x of V"""
    program = compile(worked_homogeneous)
    cols = columns_from_program(program)
    V = program.ste_bits()
    for x in range(4):
        one_hot = np.eye(4, dtype=np.uint8)[x]
        assert [evaluate_column(c, one_hot) for c in cols] == V[x].tolist()


@pytest.mark.crossbar
def test_cost_table():
    rram, sram = column_cost('rram'), column_cost(Backend.SRAM)
    assert (rram.discharge_time, rram.energy_per_eval) == (104e-12, 2.09e-15)
    assert (sram.discharge_time, sram.energy_per_eval) == (161e-12, 5.16e-15)
    assert 1 - rram.discharge_time/sram.discharge_time == pytest.approx(0.354, abs=0.01)
    assert 1 - rram.energy_per_eval/sram.energy_per_eval == pytest.approx(0.595, abs=0.01)


@pytest.mark.crossbar
def test_program_cost(worked_homogeneous):
    """RRAM configuration is slower and costlier but survives power cycles"""
    program = compile(worked_homogeneous)
    rram = program_cost(program, 'rram')
    sram = program_cost(program, 'sram')
    assert rram.pulses == 8  # five STE ones and three routing ones
    assert rram.latency == pytest.approx(8*10e-9)
    assert sram.pulses == 7*3
    assert rram.latency > sram.latency
    assert rram.energy > sram.energy
    assert rram.non_volatile and not sram.non_volatile


@pytest.mark.crossbar
@pytest.mark.exception
def test_crossbar_errors():
    with pytest.raises(ValueError, match='r_low < r_high'):
        DeviceParams(r_low=1e8, r_high=1e3)
    with pytest.raises(ValueError, match='v_read_done'):
        DeviceParams(v_reference=0.5)
    with pytest.raises(ValueError, match='at least one cell'):
        Column([])
    with pytest.raises(ValueError, match='0 or 1'):
        Column([2])
    with pytest.raises(IndexError):
        program_column(Column.blank(2), 2, 1)
    with pytest.raises(ValueError, match='bit must be'):
        program_column(Column.blank(2), 0, 3)
    with pytest.raises(ValueError, match='row selects'):
        evaluate_column(Column.blank(2), [1, 1, 1])
    with pytest.raises(ValueError, match='positive'):
        discharge_time(DeviceParams(), 0.0, 1e-14)
    with pytest.raises(ValueError, match='Unknown backend|backend'):
        column_cost('dram')
