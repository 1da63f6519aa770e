from functools import lru_cache
from pathlib import Path

from pydantic import AliasChoices, Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


def _default_harness_package_path() -> Path:
    return Path(__file__).resolve().parent.parent


class HarnessSettings(BaseSettings):
    """Repository settings for the `core_experiments` harness.

    Paths are derived from the package location unless overridden through
    `QPATHS_*` environment variables or a `.env` file.
    """

    model_config = SettingsConfigDict(
        env_prefix="QPATHS_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    harness_package_path: Path = Field(default_factory=_default_harness_package_path)
    log_level: str | None = Field(
        default=None,
        validation_alias=AliasChoices("LOG_LEVEL", "QPATHS_LOG_LEVEL"),
    )
    log_to_file: bool = Field(
        default=False,
        validation_alias=AliasChoices("LOG_TO_FILE", "QPATHS_LOG_TO_FILE"),
    )
    default_threads: int = 0
    src_directory_path: Path | None = None
    project_root_path: Path | None = None
    logs_directory_path: Path | None = None
    default_log_file_path: Path | None = None
    artifacts_directory_path: Path | None = None
    config_directory_path: Path | None = None
    config_logging_file_path: Path | None = None

    @model_validator(mode="after")
    def _populate_derived_paths(self) -> "HarnessSettings":
        if self.src_directory_path is None:
            self.src_directory_path = self.harness_package_path.parent

        if self.project_root_path is None:
            self.project_root_path = self.src_directory_path.parent

        if self.logs_directory_path is None:
            self.logs_directory_path = self.project_root_path / "logs"

        if self.default_log_file_path is None:
            self.default_log_file_path = self.logs_directory_path / "experiments.log"

        if self.artifacts_directory_path is None:
            self.artifacts_directory_path = self.project_root_path / "artifacts"

        if self.config_directory_path is None:
            self.config_directory_path = self.harness_package_path / "config"

        if self.config_logging_file_path is None:
            self.config_logging_file_path = self.config_directory_path / "config_logging.yml"

        return self


@lru_cache(maxsize=1)
def get_settings() -> HarnessSettings:
    """Return cached repository settings for the harness."""

    return HarnessSettings()
