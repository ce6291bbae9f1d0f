import json
import math

import pytest

from zfepr.config import ConfigError, load_config, parse_config


def test_defaults_with_preset():
    cfg = parse_config({"system": {"preset": "tempo_n15"}})
    assert cfg.system.nuclear_spin_twice == 1
    assert cfg.system.a_par == 120.0
    assert cfg.seed == 0
    assert cfg.workers == 1
    assert cfg.gamma2_total_mhz == pytest.approx(3.0)
    assert len(cfg.sweep.frequencies()) == cfg.sweep.n_points


def test_explicit_system():
    cfg = parse_config({"system": {"nuclear_spin_twice": 2,
                                   "a_perp_mhz": 19, "a_par_mhz": 91}})
    assert cfg.system.nuclear_spin_twice == 2
    assert cfg.system.a_perp == 19.0


def test_missing_system_keys():
    with pytest.raises(ConfigError, match="system.a_par_mhz"):
        parse_config({"system": {"nuclear_spin_twice": 2,
                                 "a_perp_mhz": 19}})


def test_unknown_key_rejected_with_path():
    with pytest.raises(ConfigError, match="sensor.depth"):
        parse_config({"system": {"preset": "tempo_n15"},
                      "sensor": {"depth": 8.0}})
    with pytest.raises(ConfigError, match="bogus"):
        parse_config({"system": {"preset": "tempo_n15"}, "bogus": 1})


def test_type_errors():
    with pytest.raises(ConfigError, match="sweep.n_points"):
        parse_config({"system": {"preset": "tempo_n15"},
                      "sweep": {"n_points": 10.5}})
    with pytest.raises(ConfigError, match="seed"):
        parse_config({"system": {"preset": "tempo_n15"}, "seed": "abc"})
    with pytest.raises(ConfigError, match="seed"):
        parse_config({"system": {"preset": "tempo_n15"}, "seed": True})


def test_value_checks():
    base = {"system": {"preset": "tempo_n15"}}
    with pytest.raises(ConfigError, match="noise.sigma"):
        parse_config({**base, "noise": {"sigma": -1}})
    with pytest.raises(ConfigError, match="workers"):
        parse_config({**base, "workers": 0})
    with pytest.raises(ConfigError, match="baseline.kind"):
        parse_config({**base, "baseline": {"kind": "wavy"}})
    with pytest.raises(ConfigError, match="surface_alpha"):
        parse_config({**base, "sensor": {"surface_alpha_rad": math.pi}})
    with pytest.raises(ConfigError, match="n_samples"):
        parse_config({**base, "mc": {"n_samples": 10}})
    with pytest.raises(ConfigError, match="stop_mhz"):
        parse_config({**base, "sweep": {"start_mhz": 50, "stop_mhz": 40}})


def test_unknown_preset():
    with pytest.raises(ConfigError, match="preset"):
        parse_config({"system": {"preset": "tempo_xx"}})


def test_load_config_diagnostics(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text('{"system": {')
    with pytest.raises(ConfigError, match=str(p)):
        load_config(p)
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "missing.json")
    p.write_text(json.dumps({"system": {"preset": "tempo_n14"}, "seed": 9}))
    cfg = load_config(p)
    assert cfg.seed == 9
    assert cfg.system.nuclear_spin_twice == 2
