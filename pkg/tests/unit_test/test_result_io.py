import json
from pathlib import Path

import pytest

from core_experiments.models.result_row import GridRow, PartitionRow, ResultRow, SummaryRow
from core_experiments.utils.result_io import companion_path, read_rows, write_jsonl, write_rows, write_summary


def _result_row(q: float, T: int, seed: int, **overrides) -> ResultRow:  # noqa: N803
    values = {
        "mode": "ais",
        "q": q,
        "T": T,
        "seed": seed,
        "log_lower": -0.1 * seed,
        "z_estimate": 1.0 / 3.0,
        "ess": 12.5,
    }
    return ResultRow(**(values | overrides))


@pytest.mark.unit
def test_rows_are_written_in_canonical_order_with_a_fixed_header(tmp_path: Path) -> None:
    rows = [_result_row(1.0, 10, 1), _result_row(0.5, 10, 0), _result_row(1.0, 5, 0)]

    path = write_rows(tmp_path / "out.csv", rows)

    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(ResultRow.csv_header)
    assert [line.split(",")[1:4] for line in lines[1:]] == [["0.5", "10", "0"], ["1.0", "5", "0"], ["1.0", "10", "1"]]


@pytest.mark.unit
def test_written_rows_parse_back_unchanged(tmp_path: Path) -> None:
    rows = [
        _result_row(0.9, 100, 0, mode="bdmc", log_upper=0.0123456789012345),
        _result_row(0.9, 100, 1, mode="bdmc", log_upper=None),
    ]

    parsed = read_rows(write_rows(tmp_path / "bdmc.csv", rows), ResultRow)

    assert parsed == rows
    assert parsed[1].log_upper is None


@pytest.mark.unit
def test_none_is_written_as_an_empty_cell(tmp_path: Path) -> None:
    path = write_rows(tmp_path / "ais.csv", [_result_row(1.0, 5, 0)])

    data_line = path.read_text(encoding="utf-8").splitlines()[1]
    assert data_line.split(",")[5] == ""


@pytest.mark.unit
def test_identical_rows_give_identical_bytes(tmp_path: Path) -> None:
    rows = [GridRow(family="gaussian", q=q, beta=0.5, z=z, log_density=-z * z) for q in (1.0, 0.5) for z in (1.0, -1.0)]

    first = write_rows(tmp_path / "a.csv", rows).read_bytes()
    second = write_rows(tmp_path / "b.csv", list(reversed(rows))).read_bytes()

    assert first == second


@pytest.mark.unit
def test_reading_with_the_wrong_row_type_raises(tmp_path: Path) -> None:
    path = write_rows(tmp_path / "grid.csv", [GridRow(family="gaussian", q=1.0, beta=0.0, z=0.0, log_density=-1.0)])

    with pytest.raises(ValueError, match="PartitionRow header"):
        read_rows(path, PartitionRow)


@pytest.mark.unit
def test_empty_row_sets_need_an_explicit_type(tmp_path: Path) -> None:
    with pytest.raises(ValueError, match="row_type"):
        write_rows(tmp_path / "empty.csv", [])

    path = write_summary(tmp_path / "summary.csv", [])

    assert path.read_text(encoding="utf-8") == ",".join(SummaryRow.csv_header) + "\n"


@pytest.mark.unit
def test_jsonl_mirror_keeps_canonical_order(tmp_path: Path) -> None:
    rows = [_result_row(1.0, 5, 1), _result_row(1.0, 5, 0)]

    path = write_jsonl(tmp_path / "out.jsonl", rows)

    records = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]
    assert [record["seed"] for record in records] == [0, 1]
    assert records[0]["log_upper"] is None


@pytest.mark.unit
def test_jsonl_accepts_plain_mappings(tmp_path: Path) -> None:
    path = write_jsonl(tmp_path / "timings.jsonl", [{"q": 1.0, "wall_ms": 3.5}])

    assert json.loads(path.read_text(encoding="utf-8")) == {"q": 1.0, "wall_ms": 3.5}


@pytest.mark.unit
@pytest.mark.parametrize(
    ("suffix", "expected"),
    [(".jsonl", "results.jsonl"), (".timings.jsonl", "results.timings.jsonl"), (".summary.csv", "results.summary.csv")],
)
def test_companion_paths_sit_next_to_the_csv(tmp_path: Path, suffix: str, expected: str) -> None:
    assert companion_path(tmp_path / "results.csv", suffix) == tmp_path / expected


@pytest.mark.unit
def test_rows_are_frozen_and_strict() -> None:
    row = _result_row(1.0, 5, 0)

    with pytest.raises(ValueError):
        row.q = 2.0
    with pytest.raises(ValueError):
        ResultRow(**(row.model_dump() | {"extra": 1}))
