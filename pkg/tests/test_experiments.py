import json
import math

import numpy as np
import pytest

from wpcn.errors import DomainError
from wpcn.experiments import CSV_COLUMNS, PRESET_NAMES, mean_and_se, preset, run_sweep


def test_preset_distances():
    assert preset("fig5").distances_for(10) == (5.0, 10.0, 15.0) + (15.0,) * 7
    assert preset("fig6").distances_for(10) == (5.0, 10.0, 15.0) + (10.0,) * 7
    assert preset("fig5").distances_for(3) == preset("fig6").distances_for(3)


def test_preset_parameters():
    spec = preset("fig4")
    cfg = spec.base_config
    assert cfg.eta == 0.5
    assert cfg.p_a == pytest.approx(0.1, rel=1e-14)
    assert cfg.n0 == pytest.approx(1e-19, rel=1e-12)
    assert spec.K == (5,)
    assert spec.alpha == (0.3, 0.5, 1.0)
    assert min(spec.ppr) == 1.0 and max(spec.ppr) == 8.0
    assert spec.config_for(5, 2.5, 0.5).p_p == pytest.approx(0.25, rel=1e-14)


def test_unknown_preset_lists_known_ones():
    with pytest.raises(DomainError) as err:
        preset("fig9")
    for name in PRESET_NAMES:
        assert name in str(err.value)


@pytest.mark.parametrize("changes", [{"trials": 0}, {"alpha": (0.0,)}, {"ppr": (0.5,)}, {"K": (0,)}])
def test_spec_validation(changes):
    with pytest.raises(DomainError):
        preset("fig5").with_(**changes)


def test_grid_order():
    spec = preset("fig4").with_(ppr=(1.0, 2.0), alpha=(0.3, 1.0))
    assert spec.grid() == [(5, 1.0, 0.3), (5, 1.0, 1.0), (5, 2.0, 0.3), (5, 2.0, 1.0)]


def test_mean_and_se():
    m, se = mean_and_se([1.0, 2.0, 3.0, 4.0])
    assert m == 2.5
    assert se == pytest.approx(math.sqrt(np.var([1, 2, 3, 4], ddof=1) / 4), rel=1e-15)
    m, se = mean_and_se([7.0])
    assert m == 7.0 and math.isnan(se)


@pytest.fixture(scope="module")
def small_sweep():
    return run_sweep(preset("fig5", trials=3, base_seed=2))


def test_sweep_shape_and_dominance(small_sweep):
    assert [r.K for r in small_sweep.rows] == [3, 5, 10]
    for r in small_sweep.rows:
        assert r.trials == 3 and r.proposed.size == 3
        assert np.all(r.proposed >= r.era - 1e-6)
        assert r.mean_proposed >= r.mean_era


def test_sweep_is_reproducible(small_sweep):
    again = run_sweep(preset("fig5", trials=3, base_seed=2))
    assert again.to_csv() == small_sweep.to_csv()


def test_fig5_and_fig6_agree_where_topologies_match(small_sweep):
    other = run_sweep(preset("fig6", trials=3, base_seed=2).with_(K=(3,)))
    a, b = small_sweep.row(3, 4.0, 0.3), other.row(3, 4.0, 0.3)
    assert a.csv_fields()[1:] == b.csv_fields()[1:]


def test_csv_and_json_output(small_sweep, tmp_path):
    lines = small_sweep.to_csv().splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 4
    doc = json.loads(small_sweep.to_json())
    assert doc["columns"] == list(CSV_COLUMNS)
    assert doc["metadata"]["distances_m"]["10"][-1] == 15.0
    small_sweep.write(tmp_path / "out.json")
    assert json.loads((tmp_path / "out.json").read_text()) == doc


def test_single_trial_reports_nan_se_as_null():
    res = run_sweep(preset("fig5", trials=1).with_(K=(3,)))
    assert math.isnan(res.rows[0].se_proposed)
    assert json.loads(res.to_json())["rows"][0]["se_proposed"] is None


def test_worker_count_does_not_change_results(small_sweep):
    assert run_sweep(preset("fig5", trials=3, base_seed=2), workers=2).to_csv() == small_sweep.to_csv()
