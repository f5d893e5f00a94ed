import numpy as np
import pytest

from cimap.config import (DEFAULT_PROFILE, DEFAULT_SWEEP, SWEEP_KEYS, dump_profile,
                          load_profile, load_sweep, parse_profile, parse_sweep)
from cimap.crossbar import DeviceParams, column_cost


@pytest.mark.util
def test_default_profile_untouched():
    profile = load_profile()
    profile['r_low'] = 5.0
    assert DEFAULT_PROFILE['r_low'] == 1e3


@pytest.mark.util
def test_parse_profile_types():
    text = """
    # faster RRAM
    rram_discharge_time = 90e-12   # measured
    column_length = 128
    allow_wide_and = yes
    """
    p = parse_profile(text)
    assert p['rram_discharge_time'] == 90e-12
    assert p['column_length'] == 128 and isinstance(p['column_length'], int)
    assert p['allow_wide_and'] is True
    assert p['r_high'] == DEFAULT_PROFILE['r_high']
    assert column_cost('rram', p).discharge_time == 90e-12


@pytest.mark.util
def test_profile_file_round_trip(tmp_path):
    profile = load_profile(r_on=1e3, allow_wide_and=True)
    path = tmp_path / 'device.cfg'
    dump_profile(profile, path)
    again = load_profile(path)
    assert again == profile
    assert DeviceParams.from_profile(again).r_on == 1e3


@pytest.mark.util
def test_parse_sweep():
    sweep = parse_sweep("m1 = 0, 0.6, 4\nacc = 0.5\n")
    np.testing.assert_allclose(sweep['m1'], [0, 0.2, 0.4, 0.6])
    np.testing.assert_array_equal(sweep['acc'], [0.5])
    np.testing.assert_array_equal(sweep['m2'], DEFAULT_SWEEP['m2'])
    assert set(sweep) == set(SWEEP_KEYS)


@pytest.mark.util
def test_load_sweep_default_is_copy():
    sweep = load_sweep()
    sweep['m1'][0] = 0.5
    assert DEFAULT_SWEEP['m1'][0] == 0.0


@pytest.mark.util
@pytest.mark.exception
@pytest.mark.parametrize("text, exc, match", [
    ("r_lo = 1e3", KeyError, "<profile>:1: unknown profile key 'r_lo'"),
    ("\nr_low 1e3", ValueError, "<profile>:2: expected 'key = value'"),
    ("column_length = 12.5", ValueError, "cannot parse '12.5' as int"),
    ("allow_wide_and = maybe", ValueError, "as bool"),
    ("r_low = fast", ValueError, "as float"),
])
def test_profile_errors(text, exc, match):
    with pytest.raises(exc, match=match):
        parse_profile(text)


@pytest.mark.util
@pytest.mark.exception
def test_config_errors():
    with pytest.raises(KeyError, match='unknown profile key'):
        load_profile(r_lw=1.0)
    with pytest.raises(KeyError, match="unknown sweep key 'm3'"):
        parse_sweep("m3 = 0.1")
    with pytest.raises(ValueError, match="start, stop, num"):
        parse_sweep("m1 = 0, 0.5")
    with pytest.raises(ValueError, match="<sweep>:1"):
        parse_sweep("m1 = low")
