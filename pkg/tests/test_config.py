import pytest

from wincast.config import RunConfig, config_from_dict, load_config
from wincast.tuning import SearchGrid


def test_defaults():
    cfg = RunConfig().validate()
    assert len(cfg.countries) == 12 and cfg.days == 31 and cfg.trials == 100
    assert cfg.methods == ["elm-tv"]


def test_hash_ignores_output_location_only():
    a, b = RunConfig(), RunConfig(output_dir="elsewhere", jobs=4)
    assert a.config_hash() == b.config_hash()
    assert RunConfig(base_seed=1).config_hash() != a.config_hash()
    assert RunConfig(grid=SearchGrid(h_values=(5,))).config_hash() != a.config_hash()
    assert a.header_line().startswith("# wincast config_hash=")


def test_yaml(tmp_path):
    p = tmp_path / "run.yaml"
    p.write_text("countries: [Sweden]\ntaus: [1, 7]\ngrid:\n  h_values: [5, 10]\n  mc_draws: 2\n")
    cfg = load_config(p)
    assert cfg.countries == ["Sweden"] and cfg.taus == [1, 7]
    assert cfg.grid.h_values == (5, 10) and cfg.grid.mc_draws == 2


@pytest.mark.parametrize("d", [{"nope": 1}, {"grid": {"nope": 1}}])
def test_unknown_keys(d):
    with pytest.raises(ValueError):
        config_from_dict(d)


@pytest.mark.parametrize("kw", [{"taus": []}, {"taus": [0]}, {"methods": ["svm"]}, {"trials": 0}])
def test_validation(kw):
    with pytest.raises(ValueError):
        RunConfig(**kw).validate()
