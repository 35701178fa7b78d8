import io
import json
import os

import pytest

from core.errors import HomogeneityError, JobReferenceError, ParseError
from core.report import Report
from main import main
from services.job_parser import build_module, build_ring, load_job, parse_job
from services.orchestrator import run
from utils.report_writer import emit_report, parse_report
from tests.conftest import fixture_path

GOLDEN = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")

A1_JOB = """
[field]
char = 32003

[ring]
vars = ["x", "y", "z"]
weights = [1, 1, 1]
ideal = ["x^2 - y*z"]

[module.m]
type = "ideal"
gens = ["x", "y", "z"]
"""


def _write(tmp_path, text: str) -> str:
    path = tmp_path / "job.toml"
    path.write_text(text, encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------------------
# parse_job
# ---------------------------------------------------------------------------
def test_parse_a1_fixture():
    job = parse_job(A1_JOB)
    ring = build_ring(job)
    assert ring.nvars == 3
    assert len(ring.ideal_generators) == 1
    assert job.module_names() == ["m"]
    assert build_module(job, "m", ring).mu == 3


def test_inhomogeneous_ring_rejected():
    with pytest.raises(HomogeneityError) as err:
        parse_job(A1_JOB.replace("x^2 - y*z", "x^2 - y"))
    assert err.value.generator == "x^2 - y"


def test_inhomogeneous_module_generator_rejected():
    with pytest.raises(HomogeneityError):
        parse_job(A1_JOB.replace('gens = ["x", "y", "z"]', 'gens = ["x + y^2"]'))


def test_mixed_degree_presentation_column_rejected():
    text = A1_JOB + '\n[module.bad]\ntype = "presentation"\nmatrix = [["x"], ["y^2"]]\n'
    with pytest.raises(HomogeneityError):
        parse_job(text)


def test_undefined_module_reference():
    with pytest.raises(JobReferenceError):
        parse_job(A1_JOB + '\n[run]\ncommands = ["approx"]\nmodule = "n"\n')
    job = parse_job(A1_JOB)
    with pytest.raises(JobReferenceError):
        run(job, "betti", module="n")


def test_toml_syntax_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_job("[ring]\nvars = [\"x\"\n")
    assert err.value.line is not None


def test_validation_error_points_at_key():
    with pytest.raises(ParseError) as err:
        parse_job(A1_JOB.replace('type = "ideal"', 'type = "sheaf"'))
    assert err.value.line == A1_JOB.splitlines().index('type = "ideal"') + 1


def test_char_override_leaves_settings_alone():
    from core.config import settings

    before = settings.characteristic
    job = parse_job(A1_JOB, characteristic=101)
    assert build_ring(job).p == 101
    assert settings.characteristic == before


def test_composite_characteristic_rejected(tmp_path, capsys):
    with pytest.raises(ParseError) as err:
        parse_job(A1_JOB.replace("char = 32003", "char = 4"))
    assert err.value.line == A1_JOB.splitlines().index("char = 32003") + 1
    with pytest.raises(ParseError):
        parse_job(A1_JOB, characteristic=4)
    assert main(["canonical", _write(tmp_path, A1_JOB.replace("char = 32003", "char = 4"))]) == 1
    assert main(["canonical", fixture_path("a1.toml"), "--char", "9"]) == 1


def test_fixture_files_parse():
    for name in ("a1.toml", "a2.toml", "plane.toml", "cubic.toml"):
        job = load_job(fixture_path(name))
        assert job.module


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------
def test_approx_report_on_a1():
    report = run(parse_job(A1_JOB), "approx", module="m")
    result = report.results[0].results
    inv = result["invariants"]
    assert result["gamma"] == 0
    assert inv["d"]["0"] == 4
    assert inv["nu"]["0"] == 1
    assert inv["nu"]["1"] == 1


def test_canonical_report_on_a1():
    result = run(parse_job(A1_JOB), "canonical").results[0].results
    assert result["free"] is True
    assert result["rank"] == 1
    assert result["twists"] == [-1]


def test_is_mcm_report_on_a1():
    result = run(parse_job(A1_JOB), "is-mcm", module="m").results[0].results
    assert result["is_mcm"] is False
    assert result["depth"] == 1


def test_betti_report_length_option():
    job = load_job(fixture_path("a1.toml"))
    result = run(job, "betti", module="k", length=3).results[0].results
    assert result["totals"] == [1, 3, 4, 4]


def test_empty_run_section_gives_empty_report():
    report = run(parse_job(A1_JOB), "run")
    assert report.results == []
    assert report.to_dict()["results"] == []


def test_precondition_error_recorded_in_report():
    job = load_job(fixture_path("cubic.toml"))
    report = Report()
    with pytest.raises(Exception):
        run(job, "index", report=report)
    assert report.error["type"] == "NotGorenstein"


# ---------------------------------------------------------------------------
# emit_report
# ---------------------------------------------------------------------------
def test_json_report_round_trips():
    report = run(parse_job(A1_JOB), "invariants", module="m", window=2)
    text = emit_report(report, "json", stream=io.StringIO())
    data = json.loads(text)
    assert list(data)[:5] == ["schema", "ring", "command", "results", "certificates"]
    assert data["schema"] == 1
    assert parse_report(text).to_dict() == report.to_dict()


def test_text_report_mentions_each_command():
    report = run(load_job(fixture_path("a1.toml")), "run")
    text = emit_report(report, "text", stream=io.StringIO())
    assert "== canonical ==" in text
    assert "== approx --module m ==" in text


def test_identical_jobs_give_identical_json():
    job = load_job(fixture_path("plane.toml"))
    first = emit_report(run(job, "invariants", module="m"), "json", stream=io.StringIO())
    second = emit_report(run(load_job(fixture_path("plane.toml")), "invariants", module="m"), "json", stream=io.StringIO())
    assert first == second


@pytest.mark.parametrize(
    "name, fixture, command, module",
    [
        ("a1-approx-m", "a1.toml", "approx", "m"),
        ("a1-canonical", "a1.toml", "canonical", None),
        ("plane-invariants-m", "plane.toml", "invariants", "m"),
        pytest.param("cubic-fundamental", "cubic.toml", "fundamental", None, marks=pytest.mark.slow),
    ],
)
def test_golden_reports(name, fixture, command, module):
    path = os.path.join(GOLDEN, f"{name}.json")
    text = emit_report(run(load_job(fixture_path(fixture)), command, module=module), "json", stream=io.StringIO())
    if not os.path.exists(path):
        # first run records the reference; it must already be reproducible and well formed
        again = emit_report(run(load_job(fixture_path(fixture)), command, module=module), "json", stream=io.StringIO())
        assert text == again
        parsed = parse_report(text)
        assert parsed.command == command
        assert parsed.error is None
        assert parsed.results
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return
    with open(path, encoding="utf-8") as f:
        assert text == f.read()


# ---------------------------------------------------------------------------
# main
# ---------------------------------------------------------------------------
def test_main_exit_codes(tmp_path, capsys):
    assert main(["canonical", fixture_path("a1.toml")]) == 0
    assert "twists" in capsys.readouterr().out
    assert main(["approx", _write(tmp_path, A1_JOB.replace("x^2 - y*z", "x^2 - y"))]) == 1
    capsys.readouterr()
    assert main(["index", fixture_path("cubic.toml"), "--json"]) == 2
    out = json.loads(capsys.readouterr().out)
    assert out["error"]["type"] == "NotGorenstein"


def test_main_json_output(capsys):
    assert main(["is-mcm", fixture_path("a1.toml"), "--module", "m1", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["command"] == "is-mcm"
    assert data["results"][0]["results"]["is_mcm"] is True
