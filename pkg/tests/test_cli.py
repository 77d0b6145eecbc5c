import orjson
import pytest

from app.core.schemas import StepVerdict, VerificationVerdict
from app.main import app

SQUARE_SERIES = """{
  "name": "square",
  "trunc_order": "3",
  "terms": [
    {"exp": [1, 0]}, {"exp": [-1, 0]}, {"exp": [0, 1]}, {"exp": [0, -1]}
  ]
}
"""


def read_json(path):
    return orjson.loads(path.read_bytes())


# =========================
# Tropical geometry
# =========================
def test_tropicalize_writes_json_and_svg(runner, fixtures_dir, tmp_path):
    out, svg = tmp_path / "curve.json", tmp_path / "curve.svg"
    result = runner.invoke(
        app, ["tropicalize", str(fixtures_dir / "p2.toml"), "--json", str(out), "--svg", str(svg)]
    )
    assert result.exit_code == 0, result.output
    report = read_json(out)
    assert report["balanced"] is True
    assert report["total_weight"] == 3
    assert [c["geometric"] for c in report["vertex_classes"]] == [True]
    assert "<svg" in svg.read_text()


def test_subdivide_reports_local_convenience(runner, fixtures_dir, tmp_path):
    out = tmp_path / "sub.json"
    result = runner.invoke(app, ["subdivide", str(fixtures_dir / "fk.toml"), "--json", str(out)])
    assert result.exit_code == 0, result.output
    report = read_json(out)
    assert report["local_convenience"]["ok"] is False


def test_hori_vafa(runner, fixtures_dir, tmp_path):
    out = tmp_path / "hv.json"
    result = runner.invoke(app, ["hori-vafa", str(fixtures_dir / "p2.toml"), "--json", str(out)])
    assert result.exit_code == 0, result.output
    report = read_json(out)
    assert report["rank"] == 3
    assert len(report["hori_vafa"]["terms"]) == 3


# =========================
# Blowups
# =========================
def test_blowup_apply_extends_the_log(runner, fixtures_dir, tmp_path):
    out = tmp_path / "p2b.json"
    result = runner.invoke(
        app,
        ["blowup", "apply", str(fixtures_dir / "p2.toml"), "--out", str(out), "--corner", "0", "--size", "1/6"],
    )
    assert result.exit_code == 0, result.output
    spec = read_json(out)
    assert spec["blowups"] == [{"kind": "toric", "corner": 0, "size": "1/6", "force": False}]

    again = tmp_path / "p2bb.json"
    result = runner.invoke(
        app, ["blowup", "apply", str(out), "--out", str(again), "--ray", "0,1", "--sizes", "1/20,1/40"]
    )
    assert result.exit_code == 0, result.output
    assert read_json(again)["blowups"][-1] == {"kind": "nontoric", "ray": [0, 1], "sizes": ["1/20", "1/40"]}


def test_blowup_over_the_bound_is_rejected(runner, fixtures_dir, tmp_path):
    out = tmp_path / "too_big.json"
    result = runner.invoke(
        app,
        ["blowup", "apply", str(fixtures_dir / "p2.toml"), "--out", str(out), "--corner", "0", "--size", "1/2"],
    )
    assert result.exit_code == 4
    assert not out.exists()


def test_blowup_needs_exactly_one_kind(runner, fixtures_dir, tmp_path):
    result = runner.invoke(
        app,
        [
            "blowup", "apply", str(fixtures_dir / "p2.toml"), "--out", str(tmp_path / "x.json"),
            "--corner", "0", "--size", "1/6", "--ray", "0,1", "--sizes", "1/10",
        ],
    )
    assert result.exit_code == 4


# =========================
# Solving
# =========================
def test_solve_p2(runner, fixtures_dir, tmp_path):
    out = tmp_path / "p2.json"
    result = runner.invoke(app, ["solve", str(fixtures_dir / "p2.toml"), "--json", str(out)])
    assert result.exit_code == 0, result.output
    report = read_json(out)
    assert report["summary"]["count_law"] == {
        "found": 3, "expected": 3, "toric": 3, "nontoric": 0, "passed": True,
    }
    assert "logs" not in report
    assert {tuple(p["valuation"]) for p in report["points"]} == {("1/3", "1/3")}


def test_solve_output_is_reproducible(runner, fixtures_dir, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for out in (first, second):
        result = runner.invoke(app, ["solve", str(fixtures_dir / "series_trinomial.json"), "--json", str(out)])
        assert result.exit_code == 0, result.output
    assert first.read_bytes() == second.read_bytes()
    assert read_json(first)["summary"]["geometric"] == 4


def test_solve_parallel_with_logs(runner, fixtures_dir, tmp_path):
    out = tmp_path / "p2.json"
    result = runner.invoke(
        app, ["solve", str(fixtures_dir / "p2.toml"), "--parallel", "--with-logs", "--json", str(out)]
    )
    assert result.exit_code == 0, result.output
    assert read_json(out)["logs"]


def test_strict_solve_fails_on_coincident_values(runner, tmp_path):
    path = tmp_path / "square.json"
    path.write_text(SQUARE_SERIES)
    assert runner.invoke(app, ["solve", str(path)]).exit_code == 0
    assert runner.invoke(app, ["solve", str(path), "--strict"]).exit_code == 3


def test_scan_continuum(runner, tmp_path):
    out = tmp_path / "scan.json"
    result = runner.invoke(
        app, ["scan-continuum", "--k", "1", "--a", "3", "--b", "1", "--eps", "1/10,1/4", "--json", str(out)]
    )
    assert result.exit_code == 0, result.output
    report = read_json(out)
    assert [f["eps"] for f in report["frames"]] == ["1/10", "1/4"]
    assert report["matches_prediction"] is True
    assert report["linear"] is True


def test_scan_continuum_runs_under_given_tolerance(runner, monkeypatch):
    from app.core.critsolve.continuum import continuum_scan
    from app.core.novikov import zero_tolerance

    seen = []

    def recording(*args, **kwargs):
        seen.append(zero_tolerance())
        return continuum_scan(*args, **kwargs)

    monkeypatch.setattr("app.cli.commands.solve.continuum_scan", recording)
    result = runner.invoke(
        app, ["scan-continuum", "--k", "1", "--a", "3", "--b", "1", "--eps", "1/4", "--tol", "1e-6"]
    )
    assert result.exit_code == 0, result.output
    assert seen == [1e-6]


def test_scan_continuum_out_of_range(runner, fixtures_dir):
    result = runner.invoke(app, ["scan-continuum", str(fixtures_dir / "fk_continuum.toml"), "--eps", "1"])
    assert result.exit_code == 4


# =========================
# Verification
# =========================
def test_verify_fixture(runner, fixtures_dir, tmp_path):
    out = tmp_path / "verdict.json"
    result = runner.invoke(app, ["verify", str(fixtures_dir / "p2_blowups.toml"), "--json", str(out)])
    assert result.exit_code == 0, result.output
    report = read_json(out)
    assert [v["passed"] for v in report["verdicts"]] == [True]
    assert report["seed"] == 0


def test_verify_failure_exit_code(runner, fixtures_dir, monkeypatch):
    def failing(spec, trunc_order=None):
        return VerificationVerdict(
            model=spec.name,
            digest="0" * 64,
            toric=3,
            nontoric=0,
            expected_rank=4,
            steps=[StepVerdict(step=0, description="base", found=3, expected=4)],
        )

    monkeypatch.setattr("app.cli.commands.verify.verify_model", failing)
    result = runner.invoke(app, ["verify", str(fixtures_dir / "p2.toml")])
    assert result.exit_code == 2


# =========================
# Bad input
# =========================
@pytest.mark.parametrize("command", ["tropicalize", "subdivide", "hori-vafa", "solve"])
def test_unparsable_file_exits_4(runner, tmp_path, command):
    path = tmp_path / "broken.toml"
    path.write_text('name = "broken"\nfan = [\n')
    assert runner.invoke(app, [command, str(path)]).exit_code == 4


def test_bad_tolerance_exits_4(runner, fixtures_dir):
    result = runner.invoke(app, ["solve", str(fixtures_dir / "p2.toml"), "--tol", "0.5"])
    assert result.exit_code == 4


def test_verify_without_input_exits_4(runner):
    assert runner.invoke(app, ["verify"]).exit_code == 4
