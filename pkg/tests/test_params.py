import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bouncesim as bs
from bouncesim.params import (
    ChipParams,
    ConfigError,
    TimeGrid,
    default_config,
    load_config,
    serialize_config,
    set_param,
    smoothed_square,
)

TWO_PI = 2.0 * math.pi


def test_default_config_loads(default_setup):
    p, grid, pulses = default_setup
    assert np.isclose(p.chip1.kappa_bar, TWO_PI * 3.01e6)
    assert np.isclose(p.chip2.kappa_bar, TWO_PI * 4.53e6)
    assert np.isclose(p.chip1.chi, -TWO_PI * 0.335e6)
    assert p.theta is None  # auto readout angle
    assert np.isclose(p.gamma1_q1, 1.0 / 9e-6)
    assert grid.duration >= 1.0e-6 - 1e-12
    assert pulses.edges_are_zero()


def test_mhz_sugar_equivalent_to_si():
    cfg = default_config()
    p1, _, _ = load_config(cfg)
    chip = cfg["system"]["chip1"]
    cfg["system"]["chip1"] = {
        k.removesuffix("_mhz"): v * TWO_PI * 1e6 for k, v in chip.items()
    }
    p2, _, _ = load_config(cfg)
    assert p1.chip1 == p2.chip1


def test_round_trip_bit_exact():
    p, grid, pulses = load_config(default_config())
    doc = serialize_config(p, grid, pulses)
    p2, grid2, pulses2 = load_config(doc)
    assert p2 == p
    assert grid2 == grid
    assert np.array_equal(pulses2.eps_s, pulses.eps_s)


def test_yaml_file_round_trip(tmp_path):
    import yaml

    p, grid, pulses = load_config(default_config())
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(serialize_config(p, grid, pulses)))
    p2, _, _ = load_config(str(path))
    assert p2 == p


@pytest.mark.parametrize(
    "mutate,match",
    [
        (lambda c: c["system"].pop("eta_l"), "eta_l"),
        (lambda c: c.pop("grid"), "grid"),
        (lambda c: c["system"]["chip1"].pop("kappa_s_mhz"), "kappa_s"),
        (lambda c: c["system"].__setitem__("eta_l", 1.5), "eta_l"),
        (lambda c: c["system"]["chip1"].__setitem__("kappa_s_mhz", -1.0),
         "kappa_s"),
        (lambda c: c["grid"].__setitem__("dt_ns", 50.0), "too coarse"),
    ],
)
def test_invalid_configs_rejected(mutate, match):
    cfg = default_config()
    mutate(cfg)
    with pytest.raises(ConfigError, match=match):
        load_config(cfg)


def test_chip_params_validation():
    with pytest.raises(ConfigError):
        ChipParams(kappa_s=0.0, kappa_w=0.0, kappa_i=0.0, chi=0.0, delta=0.0)
    with pytest.raises(ConfigError):
        ChipParams(kappa_s=1.0, kappa_w=-1.0, kappa_i=0.0, chi=0.0, delta=0.0)


def test_grid_validation():
    with pytest.raises(ConfigError):
        TimeGrid(dt=-1e-9, n_samples=100)
    with pytest.raises(ConfigError):
        TimeGrid(dt=1e-9, n_samples=1)
    assert np.allclose(TimeGrid(dt=1e-9, n_samples=3).times, [0, 1e-9, 2e-9])


def test_smoothed_square_rectangle_limit():
    grid = TimeGrid(dt=1e-9, n_samples=101)
    env = smoothed_square(2.0, 50e-9, 0.0, grid)
    inside = (grid.times >= 0) & (grid.times < 50e-9)
    assert np.allclose(env[inside], 2.0)
    assert np.allclose(env[~inside], 0.0)


def test_smoothed_square_plateau_and_edges():
    grid = TimeGrid(dt=1e-9, n_samples=401)
    env = smoothed_square(1.0, 260e-9, 20e-9, grid, delay=10e-9).real
    t = grid.times
    assert np.allclose(env[(t >= 30e-9) & (t < 270e-9)], 1.0)
    assert np.allclose(env[t < 10e-9], 0.0)
    assert np.allclose(env[t >= 310e-9], 0.0)
    # half-cosine edge hits half amplitude at mid-rise
    k = np.searchsorted(t, 20e-9)
    assert np.isclose(env[k], 0.5, atol=1e-9)


def test_smoothed_square_too_long_rejected():
    grid = TimeGrid(dt=1e-9, n_samples=51)
    with pytest.raises(ConfigError):
        smoothed_square(1.0, 100e-9, 0.0, grid)


@settings(max_examples=40, deadline=None)
@given(
    rise_n=st.integers(min_value=2, max_value=80),
    plateau_n=st.integers(min_value=20, max_value=400),
)
def test_smoothed_square_rise_monotone_and_symmetric(rise_n, plateau_n):
    dt = 0.5e-9
    grid = TimeGrid(dt=dt, n_samples=801)
    rise, plateau = rise_n * dt, plateau_n * dt
    env = smoothed_square(1.0, plateau, rise, grid).real
    t = grid.times
    up = env[(t >= 0) & (t <= rise)]
    assert np.all(np.diff(up) >= -1e-12)
    assert env.min() >= 0.0 and env.max() <= 1.0 + 1e-12
    # time-reversal symmetry about the pulse center (grid-aligned samples;
    # the final sample of the fall edge is the open end of the support)
    n_support = plateau_n + 2 * rise_n
    k = np.arange(1, n_support)
    assert np.allclose(env[k], env[n_support - k], atol=1e-12)


def test_set_param_dotted_access():
    p, _, _ = load_config(default_config())
    p2 = set_param(p, "chip2.kappa_w", 1.0)
    assert p2.chip2.kappa_w == 1.0
    assert p.chip2.kappa_w != 1.0
    assert bs.params.get_param(p2, "chip2.kappa_w") == 1.0
    with pytest.raises(ValueError):
        set_param(p, "chip3.kappa_w", 1.0)
