import logging
from dataclasses import dataclass, field
from pathlib import Path

import pytest

import core_experiments.utils.common as common_module
import core_experiments.utils.config_loader as config_loader_module
import core_experiments.utils.logger as logger_module
from core_experiments.config.settings import HarnessSettings


@dataclass
class _FakeSettings:
    """Minimal settings stub for logging tests; avoids pydantic-settings env resolution."""
    log_level: str | None = None
    log_to_file: bool = False
    default_log_file_path: Path | None = None
    config_logging_file_path: Path | None = field(
        default_factory=lambda: Path(__file__).resolve().parents[2]
        / "src" / "core_experiments" / "config" / "config_logging.yml"
    )


def _reset_root_logger(monkeypatch, fake_settings: _FakeSettings) -> None:
    monkeypatch.setattr(logger_module, "get_settings", lambda: fake_settings)
    monkeypatch.setattr(logger_module, "_configured_level", None)
    root_logger = logging.getLogger()
    for h in root_logger.handlers[:]:
        h.close()
        root_logger.removeHandler(h)


@pytest.mark.unit
def test_resolve_configured_path_uses_base_dir_for_relative_paths(tmp_path: Path) -> None:
    base_dir = tmp_path / "workspace"
    base_dir.mkdir()

    assert common_module.resolve_configured_path("logs", base_dir) == base_dir / "logs"


@pytest.mark.unit
def test_resolve_configured_path_preserves_absolute_paths(tmp_path: Path) -> None:
    base_dir = tmp_path / "workspace"
    base_dir.mkdir()
    absolute_path = tmp_path / "shared" / "logs"

    assert common_module.resolve_configured_path(absolute_path, base_dir) == absolute_path


@pytest.mark.unit
def test_resolve_output_path_defaults_to_the_artifacts_directory(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.setattr(common_module, "get_default_artifacts_directory", lambda: tmp_path / "artifacts")

    target = common_module.resolve_output_path(None, "table1")

    assert target == tmp_path / "artifacts" / "table1.csv"
    assert target.parent.is_dir()


@pytest.mark.unit
def test_resolve_output_path_resolves_relative_paths_against_the_cwd(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.chdir(tmp_path)

    target = common_module.resolve_output_path(Path("runs/out.csv"), "ignored")

    assert target == tmp_path.resolve() / "runs" / "out.csv"
    assert target.parent.is_dir()


@pytest.mark.unit
def test_default_artifacts_directory_follows_the_settings(tmp_path: Path, monkeypatch) -> None:
    monkeypatch.setattr(common_module, "get_settings", lambda: HarnessSettings(project_root_path=tmp_path))

    assert common_module.get_default_artifacts_directory() == tmp_path.resolve() / "artifacts"
    assert common_module.resolve_output_path(None, "bdmc_curve") == tmp_path.resolve() / "artifacts" / "bdmc_curve.csv"


@pytest.mark.unit
@pytest.mark.parametrize("name", ["table1", "bdmc_curve", "density_grid", "student_t_grid", "partition_mc"])
def test_builtin_experiments_are_packaged(name: str) -> None:
    resource = common_module.builtin_experiment(name)

    assert resource.is_file()
    assert config_loader_module.read_yaml(resource)["name"]


@pytest.mark.unit
def test_unknown_builtin_experiment_raises() -> None:
    with pytest.raises(FileNotFoundError, match="no-such-run"):
        common_module.builtin_experiment("no-such-run")


@pytest.mark.unit
def test_configure_logging_does_not_create_a_log_file_by_default(tmp_path: Path, monkeypatch) -> None:
    log_path = tmp_path / "logs" / "experiments.log"
    _reset_root_logger(monkeypatch, _FakeSettings(log_level="INFO", log_to_file=False, default_log_file_path=log_path))

    logger_module.configure_logging()
    logging.getLogger("qpaths-tests").info("console only")
    logging.shutdown()

    assert not log_path.exists()


@pytest.mark.unit
def test_configure_logging_creates_a_log_file_when_enabled(tmp_path: Path, monkeypatch) -> None:
    log_path = tmp_path / "logs" / "experiments.log"
    _reset_root_logger(monkeypatch, _FakeSettings(log_level="INFO", log_to_file=True, default_log_file_path=log_path))

    logger_module.configure_logging()
    logging.getLogger("qpaths-tests").info("configured log path")
    logging.shutdown()

    assert log_path.exists()
    assert "configured log path" in log_path.read_text(encoding="utf-8")


@pytest.mark.unit
def test_configure_logging_quiet_raises_the_root_level(tmp_path: Path, monkeypatch) -> None:
    _reset_root_logger(monkeypatch, _FakeSettings(log_level="DEBUG", default_log_file_path=tmp_path / "x.log"))

    logger_module.configure_logging(quiet=True)

    assert logging.getLogger().level == logging.WARNING


@pytest.mark.unit
def test_configure_logging_falls_back_when_the_yaml_is_missing(tmp_path: Path, monkeypatch) -> None:
    fake_settings = _FakeSettings(
        log_level="INFO",
        default_log_file_path=tmp_path / "x.log",
        config_logging_file_path=tmp_path / "missing.yml",
    )
    _reset_root_logger(monkeypatch, fake_settings)

    logger_module.configure_logging()

    assert logging.getLogger().level == logging.INFO
    assert logger_module._configured_level == "INFO"


@pytest.mark.unit
def test_unknown_log_level_falls_back_to_the_default(tmp_path: Path, monkeypatch) -> None:
    _reset_root_logger(monkeypatch, _FakeSettings(log_level="chatty", default_log_file_path=tmp_path / "x.log"))

    logger_module.configure_logging(default_level="INFO")

    assert logging.getLogger().level == logging.INFO
    assert logger_module.resolve_log_level(_FakeSettings(log_level="debug")) == "DEBUG"
    assert logger_module.resolve_log_level(_FakeSettings(log_level="DEBUG"), quiet=True) == "WARNING"


@pytest.mark.unit
def test_repeated_configuration_moves_the_level_without_stacking_handlers(tmp_path: Path, monkeypatch) -> None:
    _reset_root_logger(monkeypatch, _FakeSettings(log_level="INFO", default_log_file_path=tmp_path / "x.log"))

    logger_module.configure_logging()
    handlers = list(logging.getLogger().handlers)
    logger_module.configure_logging(quiet=True)

    assert logging.getLogger().handlers == handlers
    assert logging.getLogger().level == logging.WARNING
    assert logger_module._configured_level == "WARNING"


@pytest.mark.unit
def test_harness_logging_config_attaches_the_file_handler_only_on_request(tmp_path: Path) -> None:
    log_path = tmp_path / "logs" / "experiments.log"

    console_only = logger_module.harness_logging_config(_FakeSettings(default_log_file_path=log_path), "INFO")
    with_file = logger_module.harness_logging_config(
        _FakeSettings(log_to_file=True, default_log_file_path=log_path), "DEBUG"
    )

    assert console_only["root"] == {"level": "INFO", "handlers": ["console"]}
    assert "file" not in console_only["handlers"]
    assert with_file["root"]["handlers"] == ["console", "file"]
    assert with_file["handlers"]["file"]["filename"] == str(log_path)
    assert with_file["handlers"]["file"]["formatter"] == "standard"
    assert log_path.parent.is_dir()


@pytest.mark.unit
def test_read_yaml_raises_for_empty_yaml(tmp_path: Path) -> None:
    yaml_path = tmp_path / "empty.yml"
    yaml_path.write_text("", encoding="utf-8")

    with pytest.raises(ValueError, match="is empty"):
        config_loader_module.read_yaml(yaml_path)


@pytest.mark.unit
def test_read_yaml_raises_for_non_mapping_root(tmp_path: Path) -> None:
    yaml_path = tmp_path / "list-root.yml"
    yaml_path.write_text("- item\n- another\n", encoding="utf-8")

    with pytest.raises(ValueError, match="must contain a YAML mapping at the root"):
        config_loader_module.read_yaml(yaml_path)


@pytest.mark.unit
def test_read_yaml_raises_for_empty_mapping(tmp_path: Path) -> None:
    yaml_path = tmp_path / "empty-mapping.yml"
    yaml_path.write_text("{}\n", encoding="utf-8")

    with pytest.raises(ValueError, match="must not be an empty mapping"):
        config_loader_module.read_yaml(yaml_path)


@pytest.mark.unit
def test_read_yaml_resolves_references_keeping_their_type(tmp_path: Path) -> None:
    yaml_path = tmp_path / "refs.yml"
    yaml_path.write_text(
        "base:\n  dof: 3.0\ntarget:\n  dof: $(base.dof)\nlabel: dof-$(base.dof)\n",
        encoding="utf-8",
    )

    data = config_loader_module.read_yaml(yaml_path)

    assert data["target"]["dof"] == 3.0
    assert data["label"] == "dof-3.0"


@pytest.mark.unit
def test_read_yaml_reports_unknown_references(tmp_path: Path) -> None:
    yaml_path = tmp_path / "bad-ref.yml"
    yaml_path.write_text("a: $(missing.key)\n", encoding="utf-8")

    with pytest.raises(KeyError, match="missing.key"):
        config_loader_module.read_yaml(yaml_path)


@pytest.mark.unit
def test_read_experiment_yaml_wraps_failures_in_config_errors(tmp_path: Path) -> None:
    with pytest.raises(config_loader_module.ConfigError, match="does not exist"):
        config_loader_module.read_experiment_yaml(tmp_path / "absent.yml")


@pytest.mark.unit
def test_config_error_prefixes_the_field() -> None:
    error = config_loader_module.ConfigError("must be positive", field="schedule.T.0")

    assert str(error) == "schedule.T.0: must be positive"
    assert error.field == "schedule.T.0"
