import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridloop.ingest import HourlySeries
from gridloop.loadgen import (
    BootstrapConfig,
    read_microgrid,
    synthesize_microgrid,
    write_microgrid,
)


def _template(home_id, days, base=1.0):
    kwh = base + np.arange(days * 24, dtype=float) % 24 / 10.0
    return HourlySeries(home_id, np.arange(days * 24), kwh)


def _day_blocks(kwh):
    blocks = len(kwh) // 24
    return kwh[: blocks * 24].reshape(blocks, 24)


def test_single_day_template_tiles():
    # one complete day available -> every simulated day is that day
    tpl = HourlySeries("t", np.arange(24), np.arange(24, dtype=float) + 1)
    grid = synthesize_microgrid([tpl], BootstrapConfig(n_homes=2, num_days=3))
    assert grid.kwh.shape == (72, 2)
    expected = np.tile(tpl.kwh, 3)
    assert np.array_equal(grid.kwh[:, 0], expected)
    assert np.array_equal(grid.kwh[:, 1], expected)


def test_output_days_are_verbatim_template_days():
    tpl = _template("t", days=4)
    grid = synthesize_microgrid([tpl], BootstrapConfig(n_homes=3, num_days=6, seed=9))
    source = _day_blocks(tpl.kwh)
    for i in range(3):
        for day in _day_blocks(grid.kwh[:, i]):
            assert any(np.array_equal(day, s) for s in source)


def test_round_robin_assignment():
    tpls = [_template("a", 2, base=1.0), _template("b", 2, base=5.0)]
    grid = synthesize_microgrid(tpls, BootstrapConfig(n_homes=5, num_days=2, seed=1))
    assert grid.template_ids == ("a", "b", "a", "b", "a")
    # homes on template b sit at the higher base level
    assert grid.kwh[:, 1].mean() > grid.kwh[:, 0].mean() + 3


def test_same_seed_identical():
    tpl = _template("t", 5)
    cfg = BootstrapConfig(n_homes=4, num_days=7, seed=42)
    a = synthesize_microgrid([tpl], cfg)
    b = synthesize_microgrid([tpl], cfg)
    assert a.kwh.tobytes() == b.kwh.tobytes()


def test_homes_stable_under_population_growth():
    tpl = _template("t", 5)
    small = synthesize_microgrid([tpl], BootstrapConfig(3, 4, seed=2))
    big = synthesize_microgrid([tpl], BootstrapConfig(6, 4, seed=2))
    assert np.array_equal(small.kwh, big.kwh[:, :3])


def test_partial_trailing_day_ignored():
    # 2 complete days + 5 stray hours: only the full blocks are drawn from
    kwh = np.concatenate([np.full(24, 1.0), np.full(24, 2.0), np.full(5, 99.0)])
    tpl = HourlySeries("t", np.arange(len(kwh)), kwh)
    grid = synthesize_microgrid([tpl], BootstrapConfig(1, 20, seed=0))
    assert set(np.unique(grid.kwh)) <= {1.0, 2.0}


def test_no_complete_day_rejected():
    tpl = HourlySeries("short", np.arange(23), np.ones(23))
    with pytest.raises(ValueError, match="no complete day block"):
        synthesize_microgrid([tpl], BootstrapConfig(1, 1))


def test_no_templates_rejected():
    with pytest.raises(ValueError, match="at least one template"):
        synthesize_microgrid([], BootstrapConfig(1, 1))


def test_config_validation():
    with pytest.raises(ValueError):
        BootstrapConfig(n_homes=0, num_days=1)
    with pytest.raises(ValueError):
        BootstrapConfig(n_homes=1, num_days=0)


def test_csv_round_trip(tmp_path):
    tpl = _template("t", 3)
    grid = synthesize_microgrid([tpl], BootstrapConfig(3, 2, seed=7))
    path = tmp_path / "grid.csv"
    write_microgrid(grid, str(path))
    back = read_microgrid(str(path))
    assert np.array_equal(back.kwh, grid.kwh)
    assert back.kwh.shape == grid.kwh.shape


@settings(max_examples=25)
@given(
    st.integers(1, 4),   # templates
    st.integers(1, 5),   # complete days per template
    st.integers(1, 6),   # homes
    st.integers(1, 8),   # simulated days
    st.integers(0, 2**31),
)
def test_bootstrap_membership_property(k, days, homes, num_days, seed):
    tpls = [_template(f"t{j}", days, base=float(j)) for j in range(k)]
    grid = synthesize_microgrid(tpls, BootstrapConfig(homes, num_days, seed=seed))
    assert grid.kwh.shape == (num_days * 24, homes)
    for i in range(homes):
        source = _day_blocks(tpls[i % k].kwh)
        for day in _day_blocks(grid.kwh[:, i]):
            assert any(np.array_equal(day, s) for s in source)
