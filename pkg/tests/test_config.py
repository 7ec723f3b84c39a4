import pytest

from fewshape.config import (
    Settings,
    env_name,
    load_settings_file,
    resolve_setting,
)
from fewshape.exceptions import ConfigurationError


def test_env_name():
    assert env_name("--batch-size") == "FEWSHAPE_BATCH_SIZE"
    assert env_name("seed") == "FEWSHAPE_SEED"


def test_precedence_flag_env_file_default():
    file_values = {"seed": 3}
    environ = {"FEWSHAPE_SEED": "2"}
    assert resolve_setting("seed", 1, file_values, 0, int, environ) == 1
    assert resolve_setting("seed", None, file_values, 0, int, environ) == 2
    assert resolve_setting("seed", None, file_values, 0, int, {}) == 3
    assert resolve_setting("seed", None, {}, 0, int, {}) == 0


def test_process_environment_is_used_by_default(mocker):
    mocker.patch.dict("os.environ", {"FEWSHAPE_EPOCHS": "7"})
    assert resolve_setting("epochs", None, {}, 25, int) == 7


def test_bad_value_is_configuration_error():
    with pytest.raises(ConfigurationError) as exc_info:
        resolve_setting("seed", None, {}, 0, int, {"FEWSHAPE_SEED": "x"})
    assert str(exc_info.value).startswith("Invalid value for seed")


def test_load_toml_and_yaml(tmp_path):
    toml_path = tmp_path / "run.toml"
    toml_path.write_text('batch-size = 8\nvariant = "cgce"\n')
    assert load_settings_file(toml_path) == {
        "batch_size": 8,
        "variant": "cgce",
    }
    yaml_path = tmp_path / "run.yaml"
    yaml_path.write_text("width-scale: 0.25\n")
    assert load_settings_file(yaml_path) == {"width_scale": 0.25}


def test_load_settings_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_settings_file(tmp_path / "missing.toml")
    ini = tmp_path / "run.ini"
    ini.write_text("[x]\n")
    with pytest.raises(ConfigurationError):
        load_settings_file(ini)
    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigurationError):
        load_settings_file(listing)


def test_settings_from_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("lr: 0.5\nepochs: 3\n")
    settings = Settings.from_file(path, {"FEWSHAPE_EPOCHS": "4"})
    assert settings.get("lr", None, 1.0, float) == 0.5
    assert settings.get("epochs", None, 25, int) == 4
    assert settings.get("epochs", 9, 25, int) == 9
    assert Settings.from_file(None, {}).get("lr", None, 1.0) == 1.0
