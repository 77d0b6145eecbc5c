import random
from fractions import Fraction

import pytest

from app.core.report.modelio import digest, load_document, model_spec
from app.core.report.verify import (
    equal_size_comparison,
    nontoric_chart_valuations,
    random_model_spec,
    safe_size_bound,
    sweep,
    verify_model,
)
from app.core.schemas import (
    CheckResult,
    FanSpec,
    ModelFile,
    StepVerdict,
    ToricBlowupSpec,
    VerificationVerdict,
)
from app.core.toricmodel import blowup_size_bound, toric_blowup

from tests.conftest import fk_model


def test_nontoric_chart_valuations():
    assert nontoric_chart_valuations([3, 2, 1]) == [(3, 3), (3, 2), (4, 1)]
    assert nontoric_chart_valuations(["1/10"]) == [(Fraction(1, 10), Fraction(1, 10))]
    # order of the input does not matter
    assert nontoric_chart_valuations([1, 3, 2]) == nontoric_chart_valuations([3, 2, 1])


def test_p2_blowups_verify(fixtures_dir):
    spec = model_spec(load_document(fixtures_dir / "p2_blowups.toml"))
    verdict = verify_model(spec)
    assert verdict.passed, verdict.first_failure
    assert [s.found for s in verdict.steps] == [3, 4, 5]
    assert [s.expected for s in verdict.steps] == [3, 4, 5]
    assert [c.name for c in verdict.checks] == ["count-equals-rank", "perturbation-stable"]
    assert verdict.digest == digest(spec)
    report = verdict.to_report()
    assert report["passed"] is True
    assert report["first_failure"] is None
    assert all(s["passed"] for s in report["steps"])


def test_equal_size_blowups_meet(p2):
    result = equal_size_comparison(p2, 0, Fraction(1, 6))
    assert result.name == "equal-size"
    assert result.passed, result.message


def test_first_failure_names_the_check():
    verdict = VerificationVerdict(
        model="m",
        digest="0",
        toric=3,
        nontoric=0,
        expected_rank=4,
        steps=[
            StepVerdict(step=0, description="base", found=3, expected=3),
            StepVerdict(
                step=1,
                description="toric",
                found=3,
                expected=4,
                checks=[CheckResult(name="new-points-located", passed=False, message="none")],
            ),
        ],
    )
    assert not verdict.passed
    assert verdict.first_failure == "step 1: new-points-located: none"


def test_count_mismatch_without_failed_check():
    verdict = VerificationVerdict(
        model="m",
        digest="0",
        toric=2,
        nontoric=0,
        expected_rank=3,
        steps=[StepVerdict(step=0, description="base", found=2, expected=3)],
    )
    assert verdict.first_failure == "step 0: found 2 points, expected 3"


def test_random_specs_are_reproducible():
    first = [random_model_spec(random.Random(11), f"r{n}") for n in range(5)]
    again = [random_model_spec(random.Random(11), f"r{n}") for n in range(5)]
    assert [digest(s) for s in first] == [digest(s) for s in again]
    for spec in first:
        assert len(spec.fan.rays) in (3, 4)
        toric = [b for b in spec.blowups if b.kind == "toric"]
        # toric blowups always come first in the log
        assert spec.blowups[: len(toric)] == toric


def test_sweep_names_every_model():
    verdicts = sweep(2, seed=4)
    assert [v.model for v in verdicts] == ["random-4-0", "random-4-1"]
    assert all(v.digest for v in verdicts)


def test_safe_bound_on_f1_is_set_by_the_edge_apex():
    m = fk_model(1, 3, 1)
    assert [safe_size_bound(m, c) for c in range(4)] == [Fraction(1, 2)] * 4
    # the chart maximum alone would allow more
    assert blowup_size_bound(m, 0) == Fraction(5, 4)


@pytest.mark.parametrize("corners", [[1], [2], [3], [0, 0], [0, 1], [1, 2], [0, 2, 3]])
def test_fk_toric_blowups_at_any_corner_verify(corners):
    m = fk_model(1, 3, 1)
    blowups = []
    for corner in corners:
        eta = safe_size_bound(m, corner) / 2
        m = toric_blowup(m, corner, eta)
        blowups.append(ToricBlowupSpec(corner=corner, size=str(eta)))
    spec = ModelFile(
        name="f1-" + "-".join(map(str, corners)),
        fan=FanSpec(rays=[[1, 0], [0, 1], [-1, -1], [0, -1]], lambdas=["0", "0", "3", "1"]),
        blowups=blowups,
    )
    verdict = verify_model(spec)
    assert verdict.passed, verdict.first_failure
    assert [s.found for s in verdict.steps] == list(range(4, 5 + len(corners)))


def test_random_fk_specs_reach_past_corner_zero():
    specs = [random_model_spec(random.Random(seed)) for seed in range(40)]
    corners = {
        b.corner for s in specs if len(s.fan.rays) == 4 for b in s.blowups if b.kind == "toric"
    }
    assert corners - {0}
    assert any(s.fan.rays[2] == [-1, -3] for s in specs)
