from importlib import resources
try:
    from importlib.resources.abc import Traversable
except ImportError:  # Python < 3.11
    from importlib.abc import Traversable
from pathlib import Path

from core_experiments.config.settings import get_settings

BUILTIN_EXPERIMENTS_PACKAGE = "core_experiments.config"


def resolve_package_resource(package: str, *relative_parts: str) -> Traversable:
    """Resolve a package resource without relying on filesystem-relative module paths."""

    resource = resources.files(package)
    for part in relative_parts:
        resource = resource.joinpath(part)
    return resource


def builtin_experiment(name: str) -> Traversable:
    """Return the packaged experiment file `experiments/<name>.yml`."""

    resource = resolve_package_resource(BUILTIN_EXPERIMENTS_PACKAGE, "experiments", f"{name}.yml")
    if not resource.is_file():
        raise FileNotFoundError(f"No built-in experiment named '{name}'.")
    return resource


def get_default_artifacts_directory() -> Path:
    """Return the default artifacts directory from settings."""

    return get_settings().artifacts_directory_path.expanduser().resolve()


def resolve_configured_path(path_value: str | Path, base_dir: str | Path) -> Path:
    """Resolve an absolute or base-dir-relative path from configuration."""

    path = Path(path_value).expanduser()
    if path.is_absolute():
        return path

    return Path(base_dir).expanduser().resolve() / path


def resolve_output_path(out: str | Path | None, experiment_name: str) -> Path:
    """Where a run writes its CSV: `out` if given, else `<artifacts>/<name>.csv`.

    Relative paths resolve against the current working directory.
    """

    if out is None:
        target = get_default_artifacts_directory() / f"{experiment_name}.csv"
    else:
        target = resolve_configured_path(out, Path.cwd())
    target.parent.mkdir(parents=True, exist_ok=True)
    return target
