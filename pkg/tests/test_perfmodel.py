import numpy as np
import pytest

from cimap.config import DEFAULT_SWEEP
from cimap.crossbar import column_cost
from cimap.engine import RunStatistics, compile, run
from cimap.perfmodel import (ArchParams, Workload, ap_footprint, ap_run_cost, evaluate,
                             improvement, multicore_metrics, mvp_metrics, sweep)


@pytest.mark.perfmodel
def test_default_ratio():
    """No cache misses: roughly 9x better energy per operation"""
    report = evaluate(ArchParams(), Workload())
    assert report.multicore.eta_e == pytest.approx(20.2)
    assert report.mvp.eta_e == pytest.approx(2.168)
    ratios = improvement(report)
    assert ratios['eta_e'] == pytest.approx(9.317, rel=1e-3)
    # both are per-operation energy, only inverted and rescaled
    assert ratios['eta_pe'] == pytest.approx(ratios['eta_e'])


@pytest.mark.perfmodel
def test_hand_computed_point():
    """m1 = m2 = 0.3 checked against a hand calculation"""
    report = evaluate(ArchParams(), Workload(miss_rate_l1=0.3, miss_rate_l2=0.3))
    mc, mvp = report.multicore, report.mvp
    assert mc.time_per_op == pytest.approx(2.45e-9)
    assert mc.eta_e == pytest.approx(268.24, rel=1e-4)
    assert mc.eta_pa == pytest.approx(23.4577, rel=1e-4)
    assert mvp.time_per_op == pytest.approx(0.3323359e-9, rel=1e-6)
    assert mvp.eta_e == pytest.approx(24.4916, rel=1e-4)
    assert mvp.eta_pa == pytest.approx(134.330, rel=1e-4)
    assert mvp.area == pytest.approx(89.6)
    assert mc.total_energy == pytest.approx(1e9*268.24e-12, rel=1e-4)
    assert report.eta_e == mvp.eta_e


@pytest.mark.perfmodel
def test_pure_compute_limit():
    """Without memory traffic the gain is ALU energy against crossbar energy"""
    w = Workload(memory_fraction=0.0)
    mc = multicore_metrics(ArchParams(), w)
    assert mc.static_energy == 0
    assert mc.eta_e == pytest.approx(1.0)
    ratios = improvement(evaluate(ArchParams(), w))
    assert ratios['eta_e'] == pytest.approx(1/(0.3 + 0.7*0.2))


@pytest.mark.perfmodel
def test_nothing_accelerated_is_multicore():
    w = Workload(fraction_accelerated=0.0, miss_rate_l1=0.4, miss_rate_l2=0.2)
    report = evaluate(ArchParams(), w)
    for metric in ('eta_pe', 'eta_e', 'eta_pa'):
        assert getattr(report.mvp, metric) == getattr(report.multicore, metric)


@pytest.mark.perfmodel
def test_everything_accelerated():
    arch = ArchParams()
    mvp = mvp_metrics(arch, Workload(fraction_accelerated=1.0, miss_rate_l1=0.5))
    assert mvp.static_energy == 0
    assert mvp.dynamic_energy == pytest.approx(arch.xbar_energy)
    assert mvp.time_per_op == pytest.approx(arch.xbar_latency/arch.xbar_lanes)


@pytest.mark.perfmodel
def test_monotone_in_miss_rates():
    """The advantage never shrinks as either miss rate grows"""
    m = np.linspace(0, 0.6, 13)
    m1, m2 = np.meshgrid(m, m, indexing='ij')
    ratio = improvement(evaluate(ArchParams(), Workload(miss_rate_l1=m1, miss_rate_l2=m2)))
    assert np.all(np.diff(ratio['eta_e'], axis=0) >= -1e-12)
    assert np.all(np.diff(ratio['eta_e'], axis=1) >= -1e-12)
    assert ratio['eta_e'][-1, -1] == pytest.approx(11.07, rel=1e-3)
    assert np.all((ratio['eta_e'] >= 5) & (ratio['eta_e'] <= 20))


@pytest.mark.perfmodel
def test_monotone_in_acceleration():
    acc = np.linspace(0, 1, 21)
    ratio = improvement(evaluate(ArchParams(), Workload(fraction_accelerated=acc,
                                                        miss_rate_l1=0.2)))
    assert ratio['eta_e'][0] == pytest.approx(1.0)
    assert np.all(np.diff(ratio['eta_e']) > 0)


@pytest.mark.perfmodel
def test_pe_times_e_is_constant():
    """MOPs/mW times pJ/op is 1000 for any workload"""
    m = np.linspace(0, 0.6, 7)
    report = evaluate(ArchParams(), Workload(miss_rate_l1=m, miss_rate_l2=0.5))
    for entry in (report.multicore, report.mvp):
        np.testing.assert_allclose(entry.eta_pe*entry.eta_e, 1000.0)


@pytest.mark.perfmodel
def test_costlier_dram_hurts_energy():
    w = Workload(miss_rate_l1=0.3, miss_rate_l2=0.3)
    base = evaluate(ArchParams(), w)
    worse = evaluate(ArchParams(dram_energy=2*6400e-12), w)
    assert worse.multicore.eta_e > base.multicore.eta_e
    assert worse.mvp.eta_e > base.mvp.eta_e


@pytest.mark.perfmodel
def test_arch_from_profile():
    arch = ArchParams.from_profile()
    assert arch == ArchParams()
    assert arch.multicore_area == pytest.approx(69.6)


@pytest.mark.perfmodel
def test_sweep_frame():
    df = sweep(ArchParams(), DEFAULT_SWEEP)
    assert df.shape[0] == 7*7
    for name in ('m1', 'm2', 'acc', 'multicore_eta_e', 'mvp_eta_pa', 'ratio_eta_pe'):
        assert name in df.columns
    assert df.ratio_eta_e.min() == pytest.approx(9.317, rel=1e-3)
    assert df.ratio_eta_e.max() == pytest.approx(11.07, rel=1e-3)
    assert (df.acc == 0.7).all()

    single = sweep(ArchParams(), {'acc': np.array([0.0, 0.5])})
    assert single.shape[0] == 2
    assert single.ratio_eta_e.iloc[0] == pytest.approx(1.0)


@pytest.mark.perfmodel
def test_run_cost_of_worked_example(worked_homogeneous):
    """One step over three columns: 3 x 2.09 fJ in one 104 ps discharge"""
    res = run(compile(worked_homogeneous), [1])
    rram = ap_run_cost(res, column_cost('rram'), 3)
    assert rram.steps == 1
    assert rram.column_evaluations == 3
    assert rram.latency == pytest.approx(104e-12)
    assert rram.energy == pytest.approx(6.27e-15)

    sram = ap_run_cost(res.statistics, column_cost('sram'))
    assert sram.energy/rram.energy == pytest.approx(5.16/2.09)
    assert sram.latency > rram.latency


@pytest.mark.perfmodel
def test_run_cost_scales_with_stream():
    rng = np.random.default_rng(2)
    rram, sram = column_cost('rram'), column_cost('sram')
    for _ in range(20):
        steps = int(rng.integers(0, 10_000))
        n = int(rng.integers(1, 2048))
        stats = RunStatistics(steps, n, steps*n)
        r, s = ap_run_cost(stats, rram), ap_run_cost(stats, sram)
        assert r.latency == pytest.approx(steps*104e-12)
        assert r.latency <= s.latency
        assert r.energy <= s.energy

    empty = ap_run_cost(RunStatistics(0, 5, 0), rram)
    assert (empty.latency, empty.energy) == (0.0, 0.0)


@pytest.mark.perfmodel
def test_footprint():
    rram = ap_footprint(3, 2, 'rram')
    sram = ap_footprint(3, 2, 'sram')
    assert rram.cells == sram.cells == (4 + 3)*3
    assert rram.area == pytest.approx(21*12*(45e-9)**2*1e6)
    assert sram.area > rram.area
    assert rram.leakage_power == 0
    assert sram.leakage_power == pytest.approx(21*5e-10)


@pytest.mark.perfmodel
@pytest.mark.exception
def test_perfmodel_errors():
    with pytest.raises(ValueError, match='must lie in'):
        Workload(fraction_accelerated=1.5)
    with pytest.raises(ValueError, match='must lie in'):
        Workload(miss_rate_l1=np.array([0.1, -0.1]))
    with pytest.raises(ValueError, match='cores must be positive'):
        ArchParams(cores=0)
    with pytest.raises(ValueError, match='DRAM'):
        ArchParams(dram_energy=1e-12)
    with pytest.raises(KeyError, match='unknown sweep keys'):
        sweep(ArchParams(), {'m3': np.array([0.1])})
    with pytest.raises(ValueError, match='statistics are missing'):
        ap_run_cost(None, column_cost('rram'))
    with pytest.raises(ValueError, match='not 4'):
        ap_run_cost(RunStatistics(1, 3, 3), column_cost('rram'), 4)
    with pytest.raises(ValueError, match='num_states'):
        ap_footprint(0, 2, 'rram')
