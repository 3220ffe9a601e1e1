from pathlib import Path

import numpy as np
import pytest

from ncindex.config import load_config, parse_config, parse_directions
from ncindex.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

BASE = """
[model]
d = 2
q = 1
hoppings = [{ r = [1, 0], amplitude = [[1.0]] }, { r = [0, 1], amplitude = [[1.0]] }]
"""


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_configs_load(path):
    cfg = load_config(path)
    assert cfg.spec.d >= 1
    assert len(cfg.digest) == 64


def test_hofstadter_config():
    cfg = load_config(CONFIGS / "hofstadter.toml")
    assert cfg.run["dirs"] == (0, 1)
    assert cfg.cylinder.open_dim == 1
    assert cfg.twist.matrix()[0][1] == pytest.approx(1 / 3)


def test_directions_are_one_based():
    assert parse_directions([1, 3], 3) == (0, 2)
    assert parse_directions("2,1", 2) == (1, 0)
    with pytest.raises(ConfigError):
        parse_directions([0], 2)
    with pytest.raises(ConfigError):
        parse_directions([3], 2)


def test_float_flux_rejected():
    text = BASE + '[flux]\nmatrix = [[0, 0.3333], [-0.3333, 0]]\n'
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.path == "flux.matrix[0][1]"


def test_flux_must_be_antisymmetric():
    with pytest.raises(ConfigError, match="antisymmetric"):
        parse_config(BASE + '[flux]\nmatrix = [["0", "1/3"], ["1/3", "0"]]\n')


@pytest.mark.parametrize("extra, path", [
    ('[geometry]\nL = [2, 6]\n', "geometry.L[0]"),
    ('[geometry]\nL = [6]\n', "geometry.L"),
    ('[run]\nmu = "low"\n', "run.mu"),
    ('[run]\nfoo = 1\n', "run.foo"),
    ('[disorder]\nstrength = -1.0\n', "disorder.strength"),
    ('[disorder]\nseed = -3\n', "disorder.seed"),
    ('[cylinder]\nL = [6, 6]\nopen_dim = 3\n', "cylinder.open_dim"),
])
def test_errors_name_the_key(extra, path):
    with pytest.raises(ConfigError) as err:
        parse_config(BASE + extra)
    assert err.value.path == path
    assert path in str(err.value)


def test_bad_amplitude_path():
    text = '[model]\nd = 1\nq = 2\nhoppings = [{ r = [1], amplitude = [[1, 0]] }]\n'
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.path == "model.hoppings[0].amplitude"


def test_missing_model_and_bad_toml():
    with pytest.raises(ConfigError) as err:
        parse_config("[geometry]\nL = [4]\n")
    assert err.value.path == "model"
    with pytest.raises(ConfigError):
        parse_config("[model\n")


def test_complex_strings():
    text = '[model]\nd = 1\nq = 1\nhoppings = [{ r = [1], amplitude = [["0.5-1j"]] }]\n'
    cfg = parse_config(text)
    assert np.allclose(cfg.spec.hoppings[0][1], [[0.5 - 1j]])


def test_digest_tracks_content():
    a = parse_config(BASE)
    b = parse_config(BASE + "\n")
    assert a.digest != b.digest
    assert parse_config(BASE).digest == a.digest
