from __future__ import annotations

import hashlib
import logging
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import orjson
import yaml
from pydantic import ValidationError

from app.core.errors import ParseError
from app.core.laurent import LaurentSeries
from app.core.novikov import RationalLike, as_fraction
from app.core.schemas import ModelFile, NonToricBlowupSpec, SeriesFile, TermSpec, ToricBlowupSpec
from app.core.toricmodel import ToricSurfaceModel, nontoric_blowup, toric_blowup

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# MODEL I/O MODULE
# Purpose: read model and series files (TOML, JSON or YAML), validate them with
#          the pydantic schemas, and replay the blowup log into models.
# Why: every CLI command starts from a file; parse errors must carry a line
#      and column so the user can fix the file.
# -----------------------------------------------------------------------------


_TOML_POSITION = re.compile(r"line (\d+), column (\d+)")


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from e


def parse_document(text: str, fmt: str) -> Dict[str, Any]:
    """
    Parse `text` as "toml", "json" or "yaml" into a plain dict.

    Raises:
        ParseError: with the line and column reported by the parser.
    """
    try:
        if fmt == "toml":
            data = tomllib.loads(text)
        elif fmt == "json":
            data = orjson.loads(text)
        elif fmt == "yaml":
            data = yaml.safe_load(text)
        else:
            raise ParseError(f"unknown format {fmt!r}; use toml, json or yaml")
    except tomllib.TOMLDecodeError as e:
        m = _TOML_POSITION.search(str(e))
        line, column = (int(m[1]), int(m[2])) if m else (None, None)
        raise ParseError(f"invalid TOML: {str(e).split(' (at')[0]}", line, column) from e
    except orjson.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", e.lineno, e.colno) from e
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        column = mark.column + 1 if mark is not None else None
        raise ParseError(f"invalid YAML: {getattr(e, 'problem', e)}", line, column) from e
    if not isinstance(data, dict):
        raise ParseError("top level of the file must be a table / object", 1, 1)
    return data


def _format_of(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".toml":
        return "toml"
    if suffix == ".json":
        return "json"
    if suffix in (".yaml", ".yml"):
        return "yaml"
    raise ParseError(f"unsupported file extension {suffix!r} for {path}")


def load_document(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    return parse_document(_read_text(path), _format_of(path))


def is_series_document(doc: Dict[str, Any]) -> bool:
    return "terms" in doc and "fan" not in doc


def _validation_error(e: ValidationError, what: str) -> ParseError:
    first = e.errors()[0]
    where = ".".join(str(x) for x in first["loc"])
    return ParseError(f"invalid {what}: {where}: {first['msg']}")


def model_spec(doc: Dict[str, Any]) -> ModelFile:
    try:
        return ModelFile.model_validate(doc)
    except ValidationError as e:
        raise _validation_error(e, "model file") from e


def series_spec(doc: Dict[str, Any]) -> SeriesFile:
    try:
        return SeriesFile.model_validate(doc)
    except ValidationError as e:
        raise _validation_error(e, "series file") from e


# =========================
# Building models
# =========================
def base_model(spec: ModelFile, trunc_order: Optional[RationalLike] = None) -> ToricSurfaceModel:
    """The fan of `spec` before any blowup."""
    trunc = trunc_order if trunc_order is not None else spec.trunc_order
    return ToricSurfaceModel(
        rays=tuple(tuple(r) for r in spec.fan.rays),
        lambdas=tuple(as_fraction(x) for x in spec.fan.lambdas),
        trunc_order=None if trunc is None else as_fraction(trunc),
        name=spec.name,
    )


def apply_blowup(
    m: ToricSurfaceModel, step: Union[ToricBlowupSpec, NonToricBlowupSpec]
) -> ToricSurfaceModel:
    if isinstance(step, ToricBlowupSpec):
        return toric_blowup(m, step.corner, step.size, force=step.force)
    return nontoric_blowup(m, m.ray_index(tuple(step.ray)), [as_fraction(e) for e in step.sizes])


def replay(spec: ModelFile, trunc_order: Optional[RationalLike] = None) -> List[ToricSurfaceModel]:
    """
    Models after each step of the blowup log, starting with the bare fan.

    Example:
        [m.N for m in replay(p2_with_two_toric_blowups)] -> [3, 4, 5]
    """
    states = [base_model(spec, trunc_order)]
    for step in spec.blowups:
        states.append(apply_blowup(states[-1], step))
    return states


def perturbation_series(spec: ModelFile, trunc_order: RationalLike) -> Optional[LaurentSeries]:
    if not spec.perturbation:
        return None
    return terms_series(spec.perturbation, trunc_order)


def terms_series(terms: List[TermSpec], trunc_order: RationalLike) -> LaurentSeries:
    return LaurentSeries.from_json_obj([t.model_dump() for t in terms], trunc_order)


def load_model(
    path: Union[str, Path], trunc_order: Optional[RationalLike] = None
) -> Tuple[ToricSurfaceModel, Optional[LaurentSeries]]:
    """
    Read a model file and replay its blowup log.

    Returns:
        (final model, perturbation series or None)
    """
    spec = model_spec(load_document(path))
    m = replay(spec, trunc_order)[-1]
    logger.info("loaded %s: %d rays, %d blowups", m.name, m.N, len(spec.blowups))
    return m, perturbation_series(spec, m.effective_trunc_order())


def load_series(
    path: Union[str, Path], trunc_order: Optional[RationalLike] = None
) -> Tuple[str, LaurentSeries]:
    spec = series_spec(load_document(path))
    trunc = trunc_order if trunc_order is not None else spec.trunc_order
    return spec.name, terms_series(spec.terms, as_fraction(trunc))


# =========================
# Writing
# =========================
def dump_document(data: Dict[str, Any], fmt: str = "json") -> bytes:
    if fmt == "json":
        return orjson.dumps(data, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)
    if fmt == "yaml":
        return yaml.safe_dump(data, sort_keys=True).encode("utf-8")
    raise ParseError(f"cannot write format {fmt!r}; use json or yaml")


def write_spec(spec: ModelFile, path: Union[str, Path]) -> None:
    path = Path(path)
    fmt = _format_of(path)
    path.write_bytes(dump_document(spec.model_dump(mode="json", exclude_none=True), fmt))


def digest(spec_or_doc: Union[ModelFile, SeriesFile, Dict[str, Any]]) -> str:
    """sha256 of the canonical JSON form."""
    data = spec_or_doc if isinstance(spec_or_doc, dict) else spec_or_doc.model_dump(mode="json")
    return hashlib.sha256(orjson.dumps(data, option=orjson.OPT_SORT_KEYS)).hexdigest()


def series_document(name: str, W: LaurentSeries) -> Dict[str, Any]:
    return {
        "schema_version": 1,
        "name": name,
        "trunc_order": str(W.trunc_order),
        "terms": W.to_json_obj(),
    }
