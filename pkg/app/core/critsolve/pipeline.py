from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Union

from app.core.config import settings
from app.core.critsolve.leading import LeadingSystem, solve_leading
from app.core.critsolve.lifting import critical_value, hessian_leading, lift
from app.core.critsolve.nonconvenient import edge_shape, solve_nonconvenient
from app.core.critsolve.points import CriticalPoint, origin_edge, origin_vertex, sort_key
from app.core.errors import (
    DegenerateConfiguration,
    GenericityViolation,
    InadmissiblePerturbation,
    LGMirrorError,
)
from app.core.laurent import LaurentSeries, min_level, pairing
from app.core.novikov import format_complex, format_fraction
from app.core.toricmodel import (
    MomentPolytope,
    ToricSurfaceModel,
    classify_vertex,
    cohomology_rank,
    moment_polytope,
    w_min,
)
from app.core.tropgeo.convenience import is_convenient, kushnirenko_count, offending_interior_cells1
from app.core.tropgeo.subdivision import Cell, Cell1, NewtonSubdivision, newton_subdivision


# -----------------------------------------------------------------------------
# PIPELINE MODULE - Orchestration
# Purpose: find every geometric critical point of W_min (plus an admissible
#          perturbation): subdivide, solve each tropical vertex and the
#          non-convenient edge, classify, evaluate, and check the count law.
# Why: one entry point for the CLI, the verifier and the blowup size bound.
# -----------------------------------------------------------------------------


class SolveStatus(Enum):
    """Status of a solve task or a whole run."""

    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class SolveStep(Enum):
    """Individual solver steps."""

    SUBDIVIDE = "subdivide"
    VERTEX = "vertex"
    EDGE = "edge"
    CLASSIFY = "classify"
    VALUES = "values"
    COUNT = "count"


logger = logging.getLogger(__name__)


class SolverLogger:
    """Collects per-step messages of one solver run."""

    def __init__(self, name: str):
        """
        Args:
            name: model or series label shown in every console line.

        Example:
            solver_logger = SolverLogger("p2")
        """
        self.name = name
        self.start_time = datetime.now()
        self.logs: List[Dict[str, Any]] = []

    def log(self, step: SolveStep | str, message: str, level: str = "info"):
        step = step.value if isinstance(step, SolveStep) else step
        entry = {
            "timestamp": datetime.now().isoformat(),
            "step": step,
            "message": message,
            "level": level,
            "elapsed_seconds": (datetime.now() - self.start_time).total_seconds(),
        }
        self.logs.append(entry)

        if level == "error":
            logger.error(f"[{self.name}] {step}: {message}")
        elif level == "warning":
            logger.warning(f"[{self.name}] {step}: {message}")
        else:
            logger.info(f"[{self.name}] {step}: {message}")

    def get_logs(self) -> List[Dict[str, Any]]:
        return self.logs

    def get_summary(self) -> Dict[str, Any]:
        """
        Get run summary.
        Why: attached to JSON reports next to the critical points.
        """
        end_time = datetime.now()
        return {
            "name": self.name,
            "start_time": self.start_time.isoformat(),
            "end_time": end_time.isoformat(),
            "duration_seconds": (end_time - self.start_time).total_seconds(),
            "total_logs": len(self.logs),
            "errors": sum(1 for e in self.logs if e["level"] == "error"),
        }


# =========================
# Result types
# =========================
@dataclass(frozen=True)
class ExcludedVertex:
    origin: str
    coords: tuple
    minimizers: tuple
    kind: str
    in_polytope: bool
    filter_ok: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "origin": self.origin,
            "coords": [format_fraction(x) for x in self.coords],
            "minimizers": [list(v) for v in self.minimizers],
            "kind": self.kind,
            "in_polytope": self.in_polytope,
            "filter_ok": self.filter_ok,
        }


@dataclass(frozen=True)
class CountLaw:
    found: int
    expected: Optional[int]
    toric: int
    nontoric: int

    @property
    def passed(self) -> Optional[bool]:
        return None if self.expected is None else self.found == self.expected

    def to_dict(self) -> Dict[str, Any]:
        return {
            "found": self.found,
            "expected": self.expected,
            "toric": self.toric,
            "nontoric": self.nontoric,
            "passed": self.passed,
        }


# diagnostics that make a configuration non-generic
GENERICITY_KINDS = ("multiple-root", "coincident-values", "degenerate")


@dataclass
class SolveResult:
    name: str
    status: SolveStatus
    points: List[CriticalPoint]
    excluded: List[ExcludedVertex]
    diagnostics: List[Dict[str, Any]]
    count_law: CountLaw
    logs: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def geometric(self) -> List[CriticalPoint]:
        return [p for p in self.points if p.geometric]

    @property
    def genericity_issues(self) -> List[Dict[str, Any]]:
        return [d for d in self.diagnostics if d["kind"] in GENERICITY_KINDS]

    def summary(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status.value,
            "points": len(self.points),
            "geometric": len(self.geometric),
            "excluded_vertices": len(self.excluded),
            "diagnostics": len(self.diagnostics),
            "count_law": self.count_law.to_dict(),
        }

    def to_dict(self, coords_terms: Optional[int] = None) -> Dict[str, Any]:
        return {
            "summary": self.summary(),
            "points": [p.to_dict(coords_terms) for p in self.points],
            "excluded": [e.to_dict() for e in self.excluded],
            "diagnostics": self.diagnostics,
            "logs": self.logs,
        }


# =========================
# Task planning
# =========================
@dataclass(frozen=True)
class SolveTask:
    origin: str
    target: Union[Cell, Cell1]
    kind: str = "toric"

    @property
    def is_edge(self) -> bool:
        return isinstance(self.target, Cell1)


@dataclass
class SolveContext:
    name: str
    W: LaurentSeries
    leading: LaurentSeries
    subdivision: NewtonSubdivision
    model: Optional[ToricSurfaceModel] = None
    polytope: Optional[MomentPolytope] = None
    tasks: List[SolveTask] = field(default_factory=list)
    excluded: List[ExcludedVertex] = field(default_factory=list)
    diagnostics: List[Dict[str, Any]] = field(default_factory=list)


def _diagnostic(kind: str, origin: Optional[str], message: str, **extra: Any) -> Dict[str, Any]:
    entry = {"kind": kind, "origin": origin, "message": message}
    entry.update(extra)
    return entry


def check_admissible(
    leading: LaurentSeries, perturbation: LaurentSeries, S: NewtonSubdivision
) -> None:
    """
    Every perturbation term must lie strictly above W_min at each tropical
    vertex of W_min and over each non-convenient edge.

    Raises:
        InadmissiblePerturbation: naming the first offending term and point.
    """
    bases = [cell.vertex for cell in S.cells]
    for edge in offending_interior_cells1(S):
        try:
            bases.append(edge_shape(leading, S, edge).base)
        except LGMirrorError:
            continue
    for base in bases:
        floor = min_level(leading, base)
        for v, c in perturbation.coeffs:
            level = c.valuation + pairing(base, v)
            if level <= floor:
                raise InadmissiblePerturbation(
                    f"perturbation term at {v} has level {level} <= {floor} at "
                    f"({format_fraction(base[0])}, {format_fraction(base[1])})",
                    exponent=v,
                )


def _plan(ctx: SolveContext, solver_logger: SolverLogger) -> None:
    S = ctx.subdivision
    edges = list(offending_interior_cells1(S))
    skip = {cid for e in edges for cid in e.cells}
    ray_set = set(ctx.model.rays) if ctx.model else set()

    for cell in S.cells:
        origin = origin_vertex(cell.id)
        if cell.id in skip:
            solver_logger.log(SolveStep.CLASSIFY, f"{origin} borders a non-convenient edge")
            continue
        if ctx.model is None:
            ctx.tasks.append(SolveTask(origin, cell))
            continue
        cls = classify_vertex(ctx.model, cell.vertex, cell.points)
        if not cls.geometric:
            ctx.excluded.append(
                ExcludedVertex(origin, cls.coords, cls.minimizers, cls.kind, cls.in_polytope, cls.filter_ok)
            )
            solver_logger.log(
                SolveStep.CLASSIFY,
                f"{origin} excluded (in polytope: {cls.in_polytope}, filter: {cls.filter_ok})",
            )
            continue
        ctx.tasks.append(SolveTask(origin, cell, cls.kind))

    for edge in edges:
        kind = "toric"
        if ctx.model is not None and any(v not in ray_set for v in edge.endpoints):
            kind = "nontoric"
        ctx.tasks.append(SolveTask(origin_edge(edge.id), edge, kind))
    solver_logger.log(
        SolveStep.SUBDIVIDE,
        f"{len(S.cells)} vertices, {len(edges)} non-convenient edges, {len(ctx.tasks)} tasks",
    )


# =========================
# Task execution
# =========================
def _solve_vertex(ctx: SolveContext, task: SolveTask) -> Dict[str, Any]:
    cell = task.target
    base = cell.vertex
    system = LeadingSystem.from_series(ctx.leading, base)
    points: List[CriticalPoint] = []
    diagnostics: List[Dict[str, Any]] = []
    for index, root in enumerate(solve_leading(system)):
        if root.multiplicity > 1:
            diagnostics.append(
                _diagnostic(
                    "multiple-root",
                    task.origin,
                    f"leading root {format_complex(root.units[0])}, {format_complex(root.units[1])} "
                    f"has multiplicity {root.multiplicity}",
                )
            )
            continue
        lifted = lift(root.units, ctx.W, base, system)
        points.append(
            CriticalPoint(
                coords=lifted.coords(),
                units=lifted.units,
                valuation=lifted.base,
                kind=task.kind,
                geometric=True,
                origin=task.origin,
                index=index,
                critical_value=critical_value(ctx.W, base, lifted.units),
                hessian=hessian_leading(ctx.W, base, lifted.units),
                residual_valuation=lifted.residual_valuation,
            )
        )
    return {"points": points, "diagnostics": diagnostics}


def _solve_edge(ctx: SolveContext, task: SolveTask) -> Dict[str, Any]:
    found = solve_nonconvenient(ctx.W, task.target, ctx.subdivision)
    points = []
    for p in found:
        geometric = ctx.polytope.strictly_contains(p.valuation) if ctx.polytope else True
        points.append(replace(p, kind=task.kind, geometric=geometric))
    return {"points": points, "diagnostics": []}


def run_task(ctx: SolveContext, task: SolveTask, solver_logger: SolverLogger) -> Dict[str, Any]:
    """
    Solve one vertex or edge; failures become diagnostics instead of aborting the run.

    Returns:
        {"status", "points", "diagnostics"} for the task.
    """
    step = SolveStep.EDGE if task.is_edge else SolveStep.VERTEX
    try:
        result = _solve_edge(ctx, task) if task.is_edge else _solve_vertex(ctx, task)
        solver_logger.log(step, f"{task.origin}: {len(result['points'])} critical points")
        return {"status": SolveStatus.COMPLETED, **result}
    except DegenerateConfiguration as e:
        solver_logger.log(step, f"{task.origin}: {e.message}", "warning")
        return {
            "status": SolveStatus.FAILED,
            "points": [],
            "diagnostics": [_diagnostic("degenerate", task.origin, e.message)],
        }
    except Exception as e:
        solver_logger.log(step, f"{task.origin} failed: {str(e)}", "error")
        error = e.to_dict() if isinstance(e, LGMirrorError) else {"error": type(e).__name__}
        return {
            "status": SolveStatus.FAILED,
            "points": [],
            "diagnostics": [_diagnostic("task-failed", task.origin, str(e), error=error)],
        }


# =========================
# Assembly
# =========================
def _coincident_values(points: Sequence[CriticalPoint]) -> List[Dict[str, Any]]:
    """Pairs whose critical values agree term by term below the truncation order."""
    tol = settings.ROOT_MERGE_TOL
    out = []
    for a_idx, a in enumerate(points):
        for b in points[a_idx + 1 :]:
            if a.critical_value.approx_eq(b.critical_value, tol):
                v, ca = a.value_key
                out.append(
                    _diagnostic(
                        "coincident-values",
                        a.origin,
                        f"{a.origin}#{a.index} and {b.origin}#{b.index} share critical value "
                        f"{format_complex(ca)} T^{v} + ...",
                    )
                )
    return out


def _assemble(
    ctx: SolveContext,
    outcomes: Sequence[Dict[str, Any]],
    expected: Optional[int],
    strict: bool,
    solver_logger: SolverLogger,
) -> SolveResult:
    points = sorted((p for o in outcomes for p in o["points"]), key=sort_key)
    diagnostics = list(ctx.diagnostics)
    for o in outcomes:
        diagnostics.extend(o["diagnostics"])
    for p in points:
        if not p.morse:
            diagnostics.append(
                _diagnostic("non-morse", p.origin, f"{p.origin}#{p.index} is degenerate")
            )
    geometric = [p for p in points if p.geometric]
    diagnostics.extend(_coincident_values(geometric))

    law = CountLaw(
        found=len(geometric),
        expected=expected,
        toric=sum(1 for p in geometric if p.kind == "toric"),
        nontoric=sum(1 for p in geometric if p.kind == "nontoric"),
    )
    solver_logger.log(
        SolveStep.COUNT,
        f"{law.found} geometric critical points, expected {law.expected}",
        "info" if law.passed is not False else "warning",
    )
    failed = any(o["status"] == SolveStatus.FAILED for o in outcomes)
    result = SolveResult(
        name=ctx.name,
        status=SolveStatus.FAILED if failed else SolveStatus.COMPLETED,
        points=points,
        excluded=list(ctx.excluded),
        diagnostics=diagnostics,
        count_law=law,
        logs=solver_logger.get_logs(),
    )
    if strict and result.genericity_issues:
        raise GenericityViolation(
            f"{len(result.genericity_issues)} genericity violations in {ctx.name}",
            issues=[d["message"] for d in result.genericity_issues],
        )
    return result


def _model_context(
    m: ToricSurfaceModel, perturbation: Optional[LaurentSeries], solver_logger: SolverLogger
) -> SolveContext:
    leading = w_min(m)
    S = newton_subdivision(leading)
    W = leading
    if perturbation is not None and not perturbation.is_zero():
        perturbation = perturbation.with_trunc(leading.trunc_order)
        check_admissible(leading, perturbation, S)
        W = leading + perturbation
        solver_logger.log(SolveStep.SUBDIVIDE, f"perturbation with {len(perturbation)} terms admitted")
    ctx = SolveContext(m.name, W, leading, S, model=m, polytope=moment_polytope(m))
    _plan(ctx, solver_logger)
    return ctx


def _series_context(W: LaurentSeries, name: str, solver_logger: SolverLogger) -> SolveContext:
    ctx = SolveContext(name, W, W, newton_subdivision(W))
    _plan(ctx, solver_logger)
    return ctx


# =========================
# Entry points
# =========================
def find_all_geometric(
    m: ToricSurfaceModel,
    perturbation: Optional[LaurentSeries] = None,
    strict: bool = False,
) -> SolveResult:
    """
    Every geometric critical point of W_min + perturbation, solved vertex by vertex.

    Args:
        m: the toric model.
        perturbation: higher-order terms, e.g. bulk deformations.
        strict: raise instead of reporting genericity violations.

    Returns:
        SolveResult with points sorted by (origin, index) and the count-law
        verdict against cohomology_rank(m).

    Raises:
        InadmissiblePerturbation: if a perturbation term is not of higher order.
        GenericityViolation: in strict mode only.

    Example:
        find_all_geometric(p2_model).count_law.found -> 3
    """
    solver_logger = SolverLogger(m.name)
    ctx = _model_context(m, perturbation, solver_logger)
    outcomes = [run_task(ctx, task, solver_logger) for task in ctx.tasks]
    return _assemble(ctx, outcomes, cohomology_rank(m), strict, solver_logger)


async def _gather(ctx: SolveContext, solver_logger: SolverLogger) -> List[Dict[str, Any]]:
    semaphore = asyncio.Semaphore(settings.MAX_WORKERS)

    async def one(task: SolveTask) -> Dict[str, Any]:
        async with semaphore:
            return await asyncio.to_thread(run_task, ctx, task, solver_logger)

    return list(await asyncio.gather(*(one(t) for t in ctx.tasks)))


async def find_all_geometric_async(
    m: ToricSurfaceModel,
    perturbation: Optional[LaurentSeries] = None,
    strict: bool = False,
) -> SolveResult:
    """Same as find_all_geometric with the vertex and edge solves run concurrently."""
    solver_logger = SolverLogger(m.name)
    ctx = _model_context(m, perturbation, solver_logger)
    outcomes = await _gather(ctx, solver_logger)
    return _assemble(ctx, outcomes, cohomology_rank(m), strict, solver_logger)


def solve_series(W: LaurentSeries, name: str = "series", strict: bool = False) -> SolveResult:
    """
    Critical points of a raw series; every tropical vertex is a candidate.

    The expected count is the Kushnirenko number when W is convenient.
    """
    solver_logger = SolverLogger(name)
    ctx = _series_context(W, name, solver_logger)
    outcomes = [run_task(ctx, task, solver_logger) for task in ctx.tasks]
    expected = kushnirenko_count(W) if is_convenient(W) else None
    return _assemble(ctx, outcomes, expected, strict, solver_logger)
