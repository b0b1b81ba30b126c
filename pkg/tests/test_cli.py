import json

import pytest

from src.cli import create_parser, main
from src.utils import INVALID_CONFIG, IO_ERROR, SUCCESS
from tests.conftest import assert_table_matches, read_table


def last_result(capsys):
    lines = capsys.readouterr().out.strip().splitlines()
    return json.loads(lines[-1])


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        create_parser().parse_args([])


def test_descriptor_is_optional_only_for_sweeps():
    args = create_parser().parse_args(["critical-pitch", "--kind", "ribbon"])
    assert args.descriptor is None and args.kind == "ribbon"
    with pytest.raises(SystemExit):
        create_parser().parse_args(["frenet"])


def test_frenet_matches_golden(fixtures_dir, tmp_path, capsys):
    code = main(["frenet", str(fixtures_dir / "frenet.json"), "--output-dir", str(tmp_path)])

    assert code == SUCCESS
    assert last_result(capsys) == {"code": 0, "message": "Sampled 11 points"}
    assert_table_matches(tmp_path / "frenet.csv", fixtures_dir / "frenet_golden.csv", atol=1e-9)


def test_manifest_round_trip_reproduces_tables(fixtures_dir, tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["frenet", str(fixtures_dir / "frenet.json"), "--output-dir", str(first)]) == SUCCESS

    manifest = json.loads((first / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["descriptor"]["command"] == "frenet"
    assert manifest["outputs"] == [str(first / "frenet.csv")]
    assert manifest["diagnostics"]["kappa0"] == pytest.approx(0.5)
    replay = tmp_path / "replay.json"
    replay.write_text(json.dumps(manifest["descriptor"]), encoding="utf-8")

    assert main(["frenet", str(replay), "--output-dir", str(second)]) == SUCCESS
    assert (first / "frenet.csv").read_bytes() == (second / "frenet.csv").read_bytes()


def test_json_output_format(fixtures_dir, tmp_path):
    descriptor = json.loads((fixtures_dir / "frenet.json").read_text(encoding="utf-8"))
    descriptor["output"] = {"format": "json"}
    path = tmp_path / "frenet_json.json"
    path.write_text(json.dumps(descriptor), encoding="utf-8")

    assert main(["frenet", str(path), "--output-dir", str(tmp_path / "out")]) == SUCCESS
    document = json.loads((tmp_path / "out" / "frenet.json").read_text(encoding="utf-8"))
    assert document["columns"] == ["t", "s", "x", "y", "z", "kappa", "tau", "alpha"]
    assert len(document["rows"]) == 11
    assert document["rows"][5][5] == pytest.approx(0.5)


def test_cross_spectrum_matches_golden(fixtures_dir, tmp_path, capsys):
    code = main(["cross-spectrum", str(fixtures_dir / "cross_spectrum.json"), "--output-dir", str(tmp_path)])

    assert code == SUCCESS
    assert_table_matches(tmp_path / "cross_spectrum.csv", fixtures_dir / "cross_spectrum_golden.csv",
                         rtol={"energy": 2e-2, "energy_extrapolated": 1e-2}, atol=0.0)
    diagnostics = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))["diagnostics"]
    assert diagnostics["energy_slope"] == pytest.approx(diagnostics["bessel_slope"], rel=1e-2)


def test_tube_bind_finds_nothing_for_a_bare_helix(fixtures_dir, tmp_path, capsys):
    code = main(["tube-bind", str(fixtures_dir / "tube_bind.json"), "--output-dir", str(tmp_path)])

    assert code == SUCCESS
    assert last_result(capsys)["message"] == "no bound states"
    assert_table_matches(tmp_path / "tube_bind.csv", fixtures_dir / "tube_bind_golden.csv")


def test_effective_reports_binding(fixtures_dir, tmp_path, capsys):
    code = main(["effective", str(fixtures_dir / "effective_squeeze.json"), "--output-dir", str(tmp_path)])

    assert code == SUCCESS
    assert last_result(capsys)["message"] == "attractive in the mean"
    columns, rows = read_table(tmp_path / "effective_circular.csv")
    assert columns == ["s", "V_exact", "V_expansion"]
    assert len(rows) == 401
    diagnostics = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))["diagnostics"]
    assert diagnostics["mean_integral"] == pytest.approx(-6.280412184575e-03, rel=5e-2)


@pytest.mark.parametrize("kind, expected", [("circular", 1.0), ("ribbon", 5.0**0.5)])
def test_critical_pitch_without_descriptor(tmp_path, capsys, kind, expected):
    code = main(["critical-pitch", "--kind", kind, "--output-dir", str(tmp_path)])

    assert code == SUCCESS
    assert float(last_result(capsys)["message"]) == pytest.approx(expected, abs=1e-3)
    columns, rows = read_table(tmp_path / f"critical_pitch_{kind}.csv")
    assert columns == ["kind", "pitch", "exact_pitch", "exact_lo", "exact_hi"]
    assert rows[0][0] == kind
    assert float(rows[0][2]) == pytest.approx(expected, abs=1e-2)


def test_phase_diagram_matches_golden(fixtures_dir, tmp_path):
    code = main(["phase-diagram", str(fixtures_dir / "phase_diagram.json"), "--output-dir", str(tmp_path)])

    assert code == SUCCESS
    assert_table_matches(tmp_path / "phase_diagram_circular.csv", fixtures_dir / "phase_diagram_golden.csv",
                         rtol={"mean_integral": 5e-2, "leading_integral": 1e-9}, atol=0.0,
                         exact=("profile", "binds", "expected"))


def test_invalid_descriptor_exits_with_config_status(fixtures_dir, tmp_path, capsys):
    code = main(["frenet", str(fixtures_dir / "invalid.json"), "--output-dir", str(tmp_path)])

    assert code == INVALID_CONFIG
    assert "R0" in last_result(capsys)["message"]
    assert not (tmp_path / "manifest.json").exists()


def test_missing_descriptor_exits_with_io_status(tmp_path):
    assert main(["frenet", str(tmp_path / "missing.json")]) == IO_ERROR


def test_unwritable_output_exits_with_io_status(fixtures_dir, tmp_path):
    blocker = tmp_path / "occupied"
    blocker.write_text("", encoding="utf-8")
    assert main(["frenet", str(fixtures_dir / "frenet.json"), "--output-dir", str(blocker)]) == IO_ERROR


@pytest.mark.parametrize("override", [
    {"tolerances": {"eig": "abc"}},
    {"output": "csv"},
    {"workers": "many"},
    {"workers": True},
    {"grid": {"s_box": 5.0, "samples": "eleven"}},
])
def test_mistyped_descriptor_fields_exit_with_config_status(fixtures_dir, tmp_path, capsys, override):
    descriptor = json.loads((fixtures_dir / "frenet.json").read_text(encoding="utf-8"))
    descriptor.update(override)
    path = tmp_path / "mistyped.json"
    path.write_text(json.dumps(descriptor), encoding="utf-8")

    code = main(["frenet", str(path), "--output-dir", str(tmp_path / "out")])

    assert code == INVALID_CONFIG
    assert last_result(capsys)["code"] == INVALID_CONFIG
    assert not (tmp_path / "out" / "manifest.json").exists()


def test_workers_flag_is_recorded_and_validated(fixtures_dir, tmp_path):
    descriptor = str(fixtures_dir / "frenet.json")
    assert main(["frenet", descriptor, "--workers", "0", "--output-dir", str(tmp_path / "zero")]) == INVALID_CONFIG

    assert main(["frenet", descriptor, "--workers", "1", "--output-dir", str(tmp_path / "one")]) == SUCCESS
    manifest = json.loads((tmp_path / "one" / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["descriptor"]["workers"] == 1


def defined_columns(path):
    comments = [line[2:] for line in path.read_text(encoding="utf-8").splitlines() if line.startswith("# ")]
    return {name.strip() for comment in comments if ":" in comment
            for name in comment.split(":")[0].replace(";", ",").split(",")}


@pytest.mark.parametrize("argv, table", [
    (["frenet", "frenet.json"], "frenet.csv"),
    (["tube-bind", "tube_bind.json"], "tube_bind.csv"),
    (["effective", "effective_squeeze.json"], "effective_circular.csv"),
    (["cross-spectrum", "cross_spectrum.json"], "cross_spectrum.csv"),
    (["phase-diagram", "phase_diagram.json"], "phase_diagram_circular.csv"),
])
def test_every_column_is_defined_in_a_comment(fixtures_dir, tmp_path, argv, table):
    command, descriptor = argv
    assert main([command, str(fixtures_dir / descriptor), "--output-dir", str(tmp_path)]) == SUCCESS

    columns, _ = read_table(tmp_path / table)
    assert set(columns) <= defined_columns(tmp_path / table)


def test_critical_pitch_columns_are_defined(tmp_path):
    assert main(["critical-pitch", "--kind", "circular", "--output-dir", str(tmp_path)]) == SUCCESS

    table = tmp_path / "critical_pitch_circular.csv"
    columns, rows = read_table(table)
    assert set(columns) - {"kind"} <= defined_columns(table)
    lo, exact, hi = float(rows[0][3]), float(rows[0][2]), float(rows[0][4])
    assert lo <= exact <= hi
    assert hi - lo <= 1e-3
