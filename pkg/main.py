"""Repository entrypoint for running experiments without installing the package.

Typical usage:
1. Pick a built-in experiment (`table1`, `bdmc-curve`, `density-grid`) or
   write a YAML file shaped like those under
   `src/core_experiments/config/experiments`.
2. Run `python main.py run my_experiment.yml --out artifacts/my_experiment.csv`.
3. Plot the CSV with `scripts/plot_results.py` or any external tool.

The installed console script `qpaths` calls the same `core_experiments.cli.main`.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent / "src"))

from core_experiments.cli import main  # noqa: E402

if __name__ == "__main__":
    raise SystemExit(main())
