import pytest

from errors import ConfigurationError
from settings import (
    CONFIG_PATH_ENV,
    ENUM_LIMIT_ENV,
    Settings,
    get_settings,
    load_settings,
    use_settings,
)


def write_config(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_defaults_without_config_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    settings = load_settings()
    assert settings == Settings()
    assert settings.enumeration_limit == 26
    assert settings.tolerance == 1e-12


def test_explicit_config_file(tmp_path):
    path = write_config(tmp_path / "custom.toml", """
[enumeration]
limit = 14
chunk_bits = 8
workers = 3

[verify]
tolerance = 1e-10
workers = 2

[logging]
level = "debug"
""")
    settings = load_settings(path)
    assert settings.enumeration_limit == 14
    assert settings.chunk_bits == 8
    assert settings.workers == 3
    assert settings.tolerance == 1e-10
    assert settings.verify_workers == 2
    assert settings.log_level == "DEBUG"


def test_config_path_from_environment(tmp_path, monkeypatch):
    path = write_config(tmp_path / "env.toml", "[enumeration]\nlimit = 9\n")
    monkeypatch.setenv(CONFIG_PATH_ENV, path)
    assert load_settings().enumeration_limit == 9


def test_missing_explicit_file_is_an_error(tmp_path):
    with pytest.raises(ConfigurationError):
        load_settings(str(tmp_path / "nope.toml"))


def test_malformed_file_is_an_error(tmp_path):
    path = write_config(tmp_path / "bad.toml", "[enumeration\nlimit = ")
    with pytest.raises(ConfigurationError):
        load_settings(path)


@pytest.mark.parametrize("text", [
    "[enumeration]\nlimit = 0\n",
    "[enumeration]\nlimit = \"many\"\n",
    "[enumeration]\nchunk_bits = 2.5\n",
    "[verify]\ntolerance = -1.0\n",
])
def test_invalid_values_are_rejected(tmp_path, text):
    path = write_config(tmp_path / "invalid.toml", text)
    with pytest.raises(ConfigurationError):
        load_settings(path)


def test_enum_limit_environment_override(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv(ENUM_LIMIT_ENV, "12")
    assert load_settings().enumeration_limit == 12


def test_bad_enum_limit_override(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv(ENUM_LIMIT_ENV, "twelve")
    with pytest.raises(ConfigurationError):
        load_settings()


def test_overrides_skip_none():
    settings = Settings().with_overrides(enumeration_limit=10, enumeration_workers=None)
    assert settings.enumeration_limit == 10
    assert settings.enumeration_workers == 0


def test_zero_workers_means_every_cpu():
    assert Settings(enumeration_workers=0).workers >= 1


def test_use_settings_replaces_process_settings():
    custom = Settings(enumeration_limit=5)
    use_settings(custom)
    assert get_settings() is custom
