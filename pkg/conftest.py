import pytest

import settings


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test starts from config.toml defaults with no environment overrides"""
    monkeypatch.delenv(settings.ENUM_LIMIT_ENV, raising=False)
    monkeypatch.delenv(settings.CONFIG_PATH_ENV, raising=False)
    settings.use_settings(None)
    yield
    settings.use_settings(None)
