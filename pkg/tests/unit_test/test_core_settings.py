from pathlib import Path

import pytest

from core_experiments.config.settings import HarnessSettings, get_settings

PROJECT_ROOT = Path(__file__).resolve().parents[2]


@pytest.fixture(autouse=True)
def _fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.mark.unit
def test_harness_settings_resolve_default_repository_paths() -> None:
    settings = get_settings()

    assert settings.harness_package_path == PROJECT_ROOT / "src" / "core_experiments"
    assert settings.src_directory_path == PROJECT_ROOT / "src"
    assert settings.project_root_path == PROJECT_ROOT
    assert settings.config_logging_file_path == settings.config_directory_path / "config_logging.yml"
    assert settings.default_log_file_path == PROJECT_ROOT / "logs" / "experiments.log"
    assert settings.artifacts_directory_path == PROJECT_ROOT / "artifacts"


@pytest.mark.unit
def test_harness_settings_allow_prefixed_environment_overrides(monkeypatch) -> None:
    override_path = Path("/tmp/qpaths-logging.yml")
    monkeypatch.setenv("QPATHS_CONFIG_LOGGING_FILE_PATH", str(override_path))
    monkeypatch.setenv("QPATHS_DEFAULT_THREADS", "4")

    settings = get_settings()

    assert settings.config_logging_file_path == override_path
    assert settings.default_threads == 4


@pytest.mark.unit
@pytest.mark.parametrize("variable", ["LOG_LEVEL", "QPATHS_LOG_LEVEL"])
def test_log_level_accepts_both_environment_names(monkeypatch, variable: str) -> None:
    monkeypatch.delenv("LOG_LEVEL", raising=False)
    monkeypatch.delenv("QPATHS_LOG_LEVEL", raising=False)
    monkeypatch.setenv(variable, "DEBUG")

    assert get_settings().log_level == "DEBUG"


@pytest.mark.unit
def test_artifacts_directory_follows_an_overridden_project_root(tmp_path: Path) -> None:
    settings = HarnessSettings(project_root_path=tmp_path)

    assert settings.artifacts_directory_path == tmp_path / "artifacts"
    assert settings.logs_directory_path == tmp_path / "logs"


@pytest.mark.unit
def test_get_settings_is_cached() -> None:
    assert get_settings() is get_settings()
