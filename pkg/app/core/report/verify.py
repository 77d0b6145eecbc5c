from __future__ import annotations

import logging
import random
from collections import Counter
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from app.core.critsolve.pipeline import SolveResult, find_all_geometric
from app.core.errors import LGMirrorError
from app.core.laurent import Base
from app.core.novikov import INF, RationalLike, Valuation, as_fraction, format_fraction
from app.core.report.modelio import digest, perturbation_series, replay
from app.core.schemas import (
    CheckResult,
    FanSpec,
    ModelFile,
    NonToricBlowupSpec,
    StepVerdict,
    ToricBlowupSpec,
    VerificationVerdict,
)
from app.core.toricmodel import (
    BlowupKind,
    ToricSurfaceModel,
    cohomology_rank,
    corner_chart,
    nontoric_blowup,
    toric_blowup,
    w_min,
)

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# VERIFY MODULE
# Purpose: replay a blowup log and check after every step that the new
#          exceptional divisor brings exactly its own Morse critical points,
#          located where the local model puts them, while all earlier points
#          keep their valuations.
# Why: counting only the final model would hide a lost point compensated by a
#      spurious one; step deltas pin each point to the blowup that created it.
# -----------------------------------------------------------------------------


def nontoric_chart_valuations(sizes: Sequence[RationalLike]) -> List[Base]:
    """
    Chart valuations of the critical points created by blowup points of the
    given sizes on one divisor.

    With e_1 > ... > e_l and S_k = e_1 + ... + e_k, the k-th point sits at
    (S_(k-1) - (k - 2) e_k, e_k).

    Example:
        nontoric_chart_valuations([3, 2, 1]) -> [(3, 3), (3, 2), (4, 1)]
    """
    eps = sorted((as_fraction(e) for e in sizes), reverse=True)
    out: List[Base] = []
    partial = Fraction(0)
    for k, e in enumerate(eps, start=1):
        out.append((partial - (k - 2) * e, e))
        partial += e
    return out


def _valuations(result: SolveResult) -> Counter:
    return Counter(p.valuation for p in result.geometric)


def _pt(x: Base) -> str:
    return f"({format_fraction(x[0])}, {format_fraction(x[1])})"


def _counter_text(c: Counter) -> str:
    return ", ".join(f"{_pt(v)}x{n}" if n > 1 else _pt(v) for v, n in sorted(c.items())) or "none"


def _quality_checks(result: SolveResult) -> List[CheckResult]:
    non_morse = [f"{p.origin}#{p.index}" for p in result.geometric if not p.morse]
    coincident = [d["message"] for d in result.diagnostics if d["kind"] == "coincident-values"]
    failed = [d["message"] for d in result.diagnostics if d["kind"] in ("task-failed", "degenerate")]
    return [
        CheckResult(name="morse", passed=not non_morse, message=", ".join(non_morse)),
        CheckResult(name="distinct-values", passed=not coincident, message="; ".join(coincident)),
        CheckResult(name="solver", passed=not failed, message="; ".join(failed)),
    ]


def _expected_new_points(
    before: ToricSurfaceModel, after: ToricSurfaceModel
) -> Tuple[Counter, Counter]:
    """
    (expected valuations of the points the last blowup creates, valuations of
    earlier points it relocates).
    """
    record = after.history[-1]
    if record.kind == BlowupKind.TORIC:
        chart = corner_chart(before, record.corner)
        return Counter([chart.from_chart((record.size, record.size))]), Counter()
    i = after.ray_index(record.ray)
    chart = corner_chart(after, (i - 1) % after.N)
    existing = before.nontoric_sizes(record.ray)
    combined = after.nontoric_sizes(record.ray)
    relocated = Counter(chart.from_chart(v) for v in nontoric_chart_valuations(existing))
    expected = Counter(chart.from_chart(v) for v in nontoric_chart_valuations(combined))
    return expected, relocated


def _step_verdict(
    step: int,
    before: ToricSurfaceModel,
    after: ToricSurfaceModel,
    prior: SolveResult,
    current: SolveResult,
) -> StepVerdict:
    record = after.history[-1]
    added = 1 if record.kind == BlowupKind.TORIC else len(record.sizes)
    expected_new, relocated = _expected_new_points(before, after)
    kept = _valuations(prior) - relocated
    now = _valuations(current)
    missing = kept - now
    appeared = now - kept
    checks = [
        CheckResult(
            name="valuations-preserved",
            passed=not missing,
            message="" if not missing else f"lost {_counter_text(missing)}",
        ),
        CheckResult(
            name="new-points-located",
            passed=appeared == expected_new,
            message=""
            if appeared == expected_new
            else f"new points {_counter_text(appeared)}, expected {_counter_text(expected_new)}",
        ),
    ]
    checks.extend(_quality_checks(current))
    return StepVerdict(
        step=step,
        description=record.describe(),
        found=len(current.geometric),
        expected=len(prior.geometric) + added,
        checks=checks,
    )


def _perturbation_check(final: ToricSurfaceModel, spec: ModelFile, baseline: SolveResult) -> CheckResult:
    perturbation = perturbation_series(spec, final.effective_trunc_order())
    try:
        result = find_all_geometric(final, perturbation)
    except LGMirrorError as e:
        return CheckResult(name="perturbation-stable", passed=False, message=e.message)
    same = _valuations(result) == _valuations(baseline)
    morse = sorted(p.morse for p in result.geometric) == sorted(p.morse for p in baseline.geometric)
    return CheckResult(
        name="perturbation-stable",
        passed=same and morse,
        message="" if same and morse else f"perturbed points {_counter_text(_valuations(result))}",
    )


def verify_model(spec: ModelFile, trunc_order: Optional[RationalLike] = None) -> VerificationVerdict:
    """
    Replay the blowup log of `spec` and check every step.

    Step 0 checks the bare fan against its rank; step i checks the i-th blowup
    as a delta against step i - 1.

    Returns:
        VerificationVerdict; `passed` is False with `first_failure` naming the
        first violated check.

    Example:
        verify_model(p2_with_two_toric_blowups).steps -> counts 3, 4, 5
    """
    states = replay(spec, trunc_order)
    results = [find_all_geometric(states[0])]
    steps = [
        StepVerdict(
            step=0,
            description=f"base fan with {states[0].N} rays",
            found=len(results[0].geometric),
            expected=cohomology_rank(states[0]),
            checks=_quality_checks(results[0]),
        )
    ]
    for t in range(1, len(states)):
        results.append(find_all_geometric(states[t]))
        steps.append(_step_verdict(t, states[t - 1], states[t], results[t - 1], results[t]))
        logger.info("%s step %d: %d points", spec.name, t, steps[-1].found)

    final, last = states[-1], results[-1]
    rank = cohomology_rank(final)
    checks = [
        CheckResult(
            name="count-equals-rank",
            passed=len(last.geometric) == rank,
            message=f"{len(last.geometric)} geometric points, rank {rank}",
        )
    ]
    if spec.perturbation:
        checks.append(_perturbation_check(final, spec, last))

    verdict = VerificationVerdict(
        model=spec.name,
        digest=digest(spec),
        toric=last.count_law.toric,
        nontoric=last.count_law.nontoric,
        expected_rank=rank,
        steps=steps,
        checks=checks,
        diagnostics=last.diagnostics,
    )
    if not verdict.passed:
        logger.warning("%s failed verification: %s", spec.name, verdict.first_failure)
    return verdict


def equal_size_comparison(m: ToricSurfaceModel, corner: int, size: RationalLike) -> CheckResult:
    """
    A toric blowup of size eta at `corner` and one non-toric point of the same
    size on the following ray create their new critical point at the same
    chart valuation (eta, eta).
    """
    size = as_fraction(size)
    chart = corner_chart(m, corner)
    before = _valuations(find_all_geometric(m))
    toric = _valuations(find_all_geometric(toric_blowup(m, corner, size))) - before
    nontoric = _valuations(
        find_all_geometric(nontoric_blowup(m, (corner + 1) % m.N, [size]))
    ) - before
    target = Counter([(size, size)])
    toric_chart = Counter(chart.to_chart(v) for v in toric.elements())
    nontoric_chart = Counter(chart.to_chart(v) for v in nontoric.elements())
    passed = toric_chart == target and nontoric_chart == target
    return CheckResult(
        name="equal-size",
        passed=passed,
        message=f"toric {_counter_text(toric_chart)}, non-toric {_counter_text(nontoric_chart)}",
    )


# =========================
# Random sweeps
# =========================
def _fraction(rng: random.Random, low: int = 1, high: int = 9, den: int = 10) -> Fraction:
    return Fraction(rng.randint(low, high), den)


def safe_size_bound(m: ToricSurfaceModel, corner: int) -> Valuation:
    """
    Largest blowup size at `corner` that leaves every current point in place.

    A vertex point allows anything below max(x', y') in the corner chart, as
    in `blowup_size_bound`. A point on a tropical edge is lost sooner: the new
    term T^-eta z1' z2' has level x' + y' - eta there and must stay above the
    apex of the edge, the second lowest level of W_min at the point.
    """
    chart = corner_chart(m, corner)
    W = w_min(m)
    values = []
    for p in find_all_geometric(m).geometric:
        xp, yp = chart.to_chart(p.valuation)
        if not p.origin.startswith("e"):
            values.append(max(xp, yp))
            continue
        levels = sorted({W.level(v, p.valuation) for v in W.support})
        values.append(xp + yp - levels[min(1, len(levels) - 1)])
    return min(values, default=INF)


def random_model_spec(rng: random.Random, name: str = "random") -> ModelFile:
    """
    A small model built by size-respecting blowups: P2 or F_k (k <= 3) with up
    to three toric blowups at any corner, then up to four non-toric points
    spread over the rays. Sizes stay below `safe_size_bound`.
    """
    if rng.random() < 0.5:
        a = Fraction(rng.randint(2, 6), 2)
        base = ToricSurfaceModel(((1, 0), (0, 1), (-1, -1)), (0, 0, a), name=name)
    else:
        k = rng.randint(0, 3)
        b = Fraction(rng.randint(2, 4), 2)
        a = k * b + b + _fraction(rng, den=4) * b
        base = ToricSurfaceModel(((1, 0), (0, 1), (-1, -k), (0, -1)), (0, 0, a, b), name=name)

    m = base
    blowups: List = []
    for _ in range(rng.randint(0, 3)):
        corner = rng.randrange(m.N)
        bound = safe_size_bound(m, corner)
        if bound == INF or bound <= 0:
            continue
        eta = bound * _fraction(rng, 2, 8)
        m = toric_blowup(m, corner, eta)
        blowups.append(ToricBlowupSpec(corner=corner, size=str(eta)))

    numerators = rng.sample(range(1, 10), rng.randint(0, 4))
    per_ray: dict = {}
    for num in numerators:
        per_ray.setdefault(rng.randrange(m.N), []).append(num)
    for i in sorted(per_ray):
        bound = safe_size_bound(m, (i - 1) % m.N)
        if bound == INF or bound <= 0:
            continue
        sizes = [bound * Fraction(num, 10) for num in per_ray[i]]
        m = nontoric_blowup(m, i, sizes)
        blowups.append(NonToricBlowupSpec(ray=list(m.rays[i]), sizes=[str(s) for s in sizes]))

    return ModelFile(
        name=name,
        fan=FanSpec(rays=[list(r) for r in base.rays], lambdas=[str(x) for x in base.lambdas]),
        blowups=blowups,
    )


def sweep(count: int, seed: int = 0) -> List[VerificationVerdict]:
    """Verify `count` random models; the same seed gives the same models."""
    rng = random.Random(seed)
    verdicts = []
    for n in range(count):
        spec = random_model_spec(rng, name=f"random-{seed}-{n}")
        try:
            verdicts.append(verify_model(spec))
        except LGMirrorError as e:
            logger.warning("%s could not be verified: %s", spec.name, e.message)
            verdicts.append(
                VerificationVerdict(
                    model=spec.name,
                    digest=digest(spec),
                    toric=0,
                    nontoric=0,
                    expected_rank=0,
                    checks=[CheckResult(name="build", passed=False, message=e.message)],
                )
            )
    return verdicts
