import io

import pandas as pd
import pytest

from cimap.cli import EXIT_ACCEPT, EXIT_ERROR, EXIT_REJECT, build_program, main, read_input
from cimap.engine import read_image

from conftest import WORKED_ALPHABET


def _csv(text):
    return pd.read_csv(io.StringIO(text))


@pytest.fixture
def worked_image(tmp_path, worked_nfa, write_text):
    """Compiles the worked-example automaton and returns the image path"""
    src = write_text('worked.nfa', worked_nfa.to_text())
    image = tmp_path / 'worked.img'
    assert main(['compile', str(src), '-o', str(image)]) == 0
    return image


@pytest.mark.cli
def test_compile_regex(tmp_path, capsys):
    image = tmp_path / 'abcb.img'
    assert main(['compile', 'ab|cb', '--alphabet', WORKED_ALPHABET, '-o', str(image)]) == 0
    out, err = capsys.readouterr()
    assert out.startswith('N=4 W=2 density=')
    assert 'wrote' in err
    program = read_image(image)
    assert (program.num_states, program.symbol_bits) == (4, 2)


@pytest.mark.cli
def test_no_trim_keeps_duplicate_states(tmp_path, capsys):
    image = tmp_path / 'abcb.img'
    assert main(['compile', 'ab|cb', '--alphabet', WORKED_ALPHABET, '--no-trim',
                 '-o', str(image)]) == 0
    assert capsys.readouterr().out.startswith('N=5 ')


@pytest.mark.cli
def test_dump_and_recompile_is_fixpoint(tmp_path, worked_image, capsys):
    text_image = tmp_path / 'worked.ap'
    assert main(['dump', str(worked_image), '-o', str(text_image)]) == 0
    again = tmp_path / 'again.img'
    assert main(['compile', str(text_image), '-o', str(again)]) == 0
    assert again.read_bytes() == worked_image.read_bytes()

    capsys.readouterr()
    assert main(['dump', str(worked_image)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == 'ap W=2 N=3 all_input_start=0'


@pytest.mark.cli
def test_run_worked_example(worked_image, write_text, capsys):
    """Input b accepts in one step: 104 ps and 3 x 2.09 fJ on RRAM"""
    capsys.readouterr()
    data = write_text('b.txt', 'b\n')
    code = main(['run', str(worked_image), str(data), '--alphabet', WORKED_ALPHABET])
    assert code == EXIT_ACCEPT
    out, err = capsys.readouterr()
    assert err.startswith('accepted after 1 steps on 3 states (rram)')
    row = _csv(out).iloc[0]
    assert bool(row.accepted)
    assert row.steps == 1
    assert row.latency == pytest.approx(104e-12)
    assert row.energy == pytest.approx(6.27e-15)


@pytest.mark.cli
def test_run_rejects(worked_image, write_text, capsys):
    capsys.readouterr()
    data = write_text('d.txt', 'd')
    assert main(['run', str(worked_image), str(data), '--alphabet', WORKED_ALPHABET,
                 '--backend', 'sram']) == EXIT_REJECT
    row = _csv(capsys.readouterr().out).iloc[0]
    assert not bool(row.accepted)
    assert row.energy == pytest.approx(3*5.16e-15)


@pytest.mark.cli
def test_run_functional_with_trace(tmp_path, worked_image, write_text):
    data = write_text('cb.sym', '2 1\n')
    report = tmp_path / 'report.csv'
    code = main(['run', str(worked_image), str(data), '--symbols', '--backend', 'functional',
                 '--trace', '-o', str(report)])
    assert code == EXIT_ACCEPT
    row = pd.read_csv(report).iloc[0]
    assert row.backend == 'functional'
    assert pd.isna(row.latency) and pd.isna(row.energy)

    trace = pd.read_csv(tmp_path / 'report_trace.csv', index_col='step')
    assert trace.shape == (3, 3)
    assert trace.sum(axis=1).tolist() == [1, 1, 1]


@pytest.mark.cli
def test_run_trace_without_output(worked_image, write_text, capsys):
    """The report alone goes to stdout and the trace follows the summary on stderr"""
    capsys.readouterr()
    data = write_text('cb.sym', '2 1\n')
    assert main(['run', str(worked_image), str(data), '--symbols', '--trace']) == EXIT_ACCEPT
    out, err = capsys.readouterr()
    assert _csv(out).shape == (1, 7)
    summary, _, trace = err.partition('\n')
    assert summary.startswith('accepted after 2 steps')
    trace = pd.read_csv(io.StringIO(trace), index_col='step')
    assert trace.shape == (3, 3)


@pytest.mark.cli
def test_run_byte_stream(tmp_path, write_text, capsys):
    image = tmp_path / 'ab.img'
    assert main(['compile', 'ab', '--all-input-start', '-o', str(image)]) == 0
    capsys.readouterr()
    data = tmp_path / 'data.bin'
    data.write_bytes(b'xxaby')
    assert main(['run', str(image), str(data)]) == EXIT_REJECT
    row = _csv(capsys.readouterr().out).iloc[0]
    assert bool(row.accepted_ever)
    assert row.steps == 5


@pytest.mark.cli
def test_bench_costs(capsys):
    assert main(['bench', 'costs']) == 0
    df = _csv(capsys.readouterr().out)
    rram = df.set_index('backend').loc['rram']
    assert rram.delay_reduction == pytest.approx(0.354, abs=0.01)
    assert rram.energy_reduction == pytest.approx(0.595, abs=0.01)


@pytest.mark.cli
def test_bench_gates(tmp_path):
    out = tmp_path / 'gates.csv'
    assert main(['bench', 'gates', '-o', str(out)]) == 0
    df = pd.read_csv(out, dtype={'row_bits': str})
    assert len(df) == 12
    assert df[df.gate == 'and'].output.tolist() == [0, 0, 0, 1]


@pytest.mark.cli
def test_bench_sweep(write_text, capsys):
    spec = write_text('sweep.cfg', "m1 = 0, 0.6, 3\nm2 = 0.6\n")
    assert main(['bench', 'sweep', '--sweep', str(spec)]) == 0
    df = _csv(capsys.readouterr().out)
    assert df.m1.tolist() == pytest.approx([0, 0.3, 0.6])
    assert df.ratio_eta_e.is_monotonic_increasing


@pytest.mark.cli
def test_bench_uses_profile(write_text, capsys):
    cfg = write_text('fast.cfg', "rram_discharge_time = 52e-12\n")
    assert main(['bench', 'costs', '--config', str(cfg)]) == 0
    df = _csv(capsys.readouterr().out).set_index('backend')
    assert df.loc['rram'].discharge_time == pytest.approx(52e-12)


@pytest.mark.cli
def test_build_program_and_read_input(write_text):
    program = build_program('a*b', alphabet='ab')
    assert program.symbol_bits == 1
    path = write_text('in.txt', 'aab\n')
    assert read_input(str(path), 1, alphabet='ab').tolist() == [0, 0, 1]
    path = write_text('in.bin', 'AB')
    assert read_input(str(path), 8).tolist() == [65, 66]


@pytest.mark.cli
@pytest.mark.exception
def test_cli_errors(tmp_path, worked_image, write_text, capsys):
    capsys.readouterr()
    assert main(['compile', '(', '--regex', '-o', str(tmp_path / 'x.img')]) == EXIT_ERROR
    assert capsys.readouterr().err.startswith('error:')

    bad_cfg = write_text('bad.cfg', "r_lo = 1\n")
    data = write_text('b.txt', 'b')
    assert main(['run', str(worked_image), str(data), '--alphabet', WORKED_ALPHABET,
                 '--config', str(bad_cfg)]) == EXIT_ERROR
    assert 'unknown profile key' in capsys.readouterr().err

    assert main(['run', str(worked_image), str(data), '--alphabet', 'xyz']) == EXIT_ERROR
    assert main(['run', str(tmp_path / 'missing.img'), str(data)]) == EXIT_ERROR
    assert main(['compile', 'a', '--alphabet', 'aa', '-o', str(tmp_path / 'y.img')]) == EXIT_ERROR
    capsys.readouterr()

    big = write_text('big.sym', f"1 0 {2**70}\n")
    assert main(['run', str(worked_image), str(big), '--symbols']) == EXIT_ERROR
    assert 'position 2' in capsys.readouterr().err

    with pytest.raises(SystemExit) as exc:
        main(['bench', 'speed'])
    assert exc.value.code == 2
