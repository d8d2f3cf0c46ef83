"""Run configuration: JSON parsing and validation."""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from typing import Any

from ..convergence import SPATIAL_REFERENCE_LEVELS, TEMPORAL_REFERENCE_FACTOR
from ..exceptions import ConfigError, ValidationError
from ..matfunc import KrylovParams
from ..problems import ProblemSpec, get_problem, problem_names
from ..types import MassMode, NemytskiiMode, Scheme, StudyKind

logger = logging.getLogger(__name__)

DEFAULT_LEVELS = 5
DEFAULT_OUTPUT_PATH = "results"
DEFAULT_SPATIAL_BASE_H = 1.0 / 8.0
DEFAULT_TEMPORAL_DIVISIONS = 8
DEFAULT_SPATIAL_DIVISIONS = 1024
DEFAULT_SINGLE_RUN_DIVISIONS = 64
MIN_STUDY_LEVELS = 3

_TOP_LEVEL_KEYS = frozenset(
    {
        "problem",
        "study",
        "levels",
        "base_h",
        "base_dt",
        "krylov",
        "mass_mode",
        "nemytskii_mode",
        "scheme",
        "output_path",
        "sample_times",
        "reference_factor",
        "reference_levels",
        "jobs",
    }
)
_KRYLOV_KEYS = frozenset({"m_max", "tol", "max_substeps"})


@dataclass(frozen=True)
class RunConfig:
    """A validated run description; ``None`` sizes are filled from the problem."""

    problem: str
    study: StudyKind = StudyKind.SINGLE_RUN
    levels: int = DEFAULT_LEVELS
    base_h: float | None = None
    base_dt: float | None = None
    krylov: KrylovParams = field(default_factory=KrylovParams)
    mass_mode: MassMode = MassMode.LUMPED
    nemytskii_mode: NemytskiiMode = NemytskiiMode.NODAL
    scheme: Scheme = Scheme.EREM
    output_path: str = DEFAULT_OUTPUT_PATH
    sample_times: tuple[float, ...] = ()
    reference_factor: int = TEMPORAL_REFERENCE_FACTOR
    reference_levels: int = SPATIAL_REFERENCE_LEVELS
    jobs: int | None = None

    def __post_init__(self) -> None:
        for name, enum in (
            ("study", StudyKind),
            ("mass_mode", MassMode),
            ("nemytskii_mode", NemytskiiMode),
            ("scheme", Scheme),
        ):
            object.__setattr__(self, name, _expect_enum(getattr(self, name), name, enum))
        spec = _lookup_problem(self.problem)
        if self.study is not StudyKind.SINGLE_RUN and self.levels < MIN_STUDY_LEVELS:
            raise ConfigError(
                f"constraint-violation: levels >= {MIN_STUDY_LEVELS} required for studies",
                field="levels",
                value=self.levels,
            )
        if self.levels < 1:
            raise ConfigError(
                "constraint-violation: levels must be positive", field="levels", value=self.levels
            )
        if self.base_h is not None and not self.base_h > 0:
            raise ConfigError(
                "constraint-violation: base_h must be positive", field="base_h", value=self.base_h
            )
        if self.base_dt is not None:
            _check_divides(spec, self.base_dt)
        if self.jobs is not None and self.jobs < 1:
            raise ConfigError(
                "constraint-violation: jobs must be positive", field="jobs", value=self.jobs
            )
        if self.reference_factor < 1 or self.reference_levels < 1:
            raise ConfigError(
                "constraint-violation: reference_factor and reference_levels must be positive",
                field="reference_factor",
                value=(self.reference_factor, self.reference_levels),
            )
        for t in self.sample_times:
            if not 0 < t <= spec.final_time:
                raise ConfigError(
                    "constraint-violation: sample_times must lie in (0, T]",
                    field="sample_times",
                    value=t,
                )

    @property
    def spec(self) -> ProblemSpec:
        return get_problem(self.problem)

    def resolved_h(self) -> float:
        spec = self.spec
        if self.base_h is not None:
            return self.base_h
        if self.study is StudyKind.SPATIAL:
            return DEFAULT_SPATIAL_BASE_H
        return (spec.upper[0] - spec.lower[0]) / spec.default_cells

    def resolved_dt(self) -> float:
        if self.base_dt is not None:
            return self.base_dt
        divisions = {
            StudyKind.TEMPORAL: DEFAULT_TEMPORAL_DIVISIONS,
            StudyKind.SPATIAL: DEFAULT_SPATIAL_DIVISIONS,
            StudyKind.SINGLE_RUN: DEFAULT_SINGLE_RUN_DIVISIONS,
        }[self.study]
        return self.spec.final_time / divisions

    def with_overrides(self, **overrides: Any) -> RunConfig:
        cleaned = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **cleaned)


def _lookup_problem(name: str) -> ProblemSpec:
    try:
        return get_problem(name)
    except ValidationError as exc:
        raise ConfigError(
            f"constraint-violation: unknown problem '{name}'",
            field="problem",
            value=name,
            details={"available": problem_names()},
        ) from exc


def _check_divides(spec: ProblemSpec, dt: float) -> None:
    ratio = spec.final_time / dt if dt > 0 else 0.0
    if dt <= 0 or round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
        raise ConfigError(
            "constraint-violation: base_dt must divide the final time of the problem",
            field="base_dt",
            value=dt,
            details={"final_time": spec.final_time},
        )


def _expect_str(value: Any, name: str) -> str:
    if not isinstance(value, str) or not value:
        raise ConfigError(
            f"constraint-violation: '{name}' must be a non-empty string", field=name, value=value
        )
    return value


def _expect_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(
            f"constraint-violation: '{name}' must be an integer", field=name, value=value
        )
    return value


def _expect_float(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ConfigError(
            f"constraint-violation: '{name}' must be a number", field=name, value=value
        )
    return float(value)


def _expect_enum(value: Any, name: str, enum: type) -> Any:
    try:
        return enum(value)
    except ValueError:
        allowed = [member.value for member in enum]
        raise ConfigError(
            f"constraint-violation: '{name}' must be one of {allowed}",
            field=name,
            value=value,
            details={"allowed": allowed},
        ) from None


def _parse_krylov(raw: Any) -> KrylovParams:
    if not isinstance(raw, Mapping):
        raise ConfigError(
            "constraint-violation: 'krylov' must be an object", field="krylov", value=raw
        )
    unknown = sorted(set(raw) - _KRYLOV_KEYS)
    if unknown:
        raise ConfigError(f"unknown-key: 'krylov.{unknown[0]}'", field=f"krylov.{unknown[0]}")
    kwargs: dict[str, Any] = {}
    if "m_max" in raw:
        kwargs["m_max"] = _expect_int(raw["m_max"], "krylov.m_max")
    if "tol" in raw:
        kwargs["tol"] = _expect_float(raw["tol"], "krylov.tol")
    if "max_substeps" in raw:
        kwargs["max_substeps"] = _expect_int(raw["max_substeps"], "krylov.max_substeps")
    try:
        return KrylovParams(**kwargs)
    except ValidationError as exc:
        raise ConfigError(
            f"constraint-violation: {exc.message}", field=f"krylov.{exc.field}", value=exc.value
        ) from exc


def config_from_mapping(payload: Mapping[str, Any]) -> RunConfig:
    unknown = sorted(set(payload) - _TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(
            f"unknown-key: '{unknown[0]}'",
            field=unknown[0],
            details={"allowed": sorted(_TOP_LEVEL_KEYS)},
        )
    if "problem" not in payload:
        raise ConfigError("constraint-violation: 'problem' is required", field="problem")

    kwargs: dict[str, Any] = {"problem": _expect_str(payload["problem"], "problem")}
    if "study" in payload:
        kwargs["study"] = _expect_enum(payload["study"], "study", StudyKind)
    for key in ("levels", "reference_factor", "reference_levels", "jobs"):
        if key in payload:
            kwargs[key] = _expect_int(payload[key], key)
    for key in ("base_h", "base_dt"):
        if key in payload:
            kwargs[key] = _expect_float(payload[key], key)
    if "krylov" in payload:
        kwargs["krylov"] = _parse_krylov(payload["krylov"])
    if "mass_mode" in payload:
        kwargs["mass_mode"] = _expect_enum(payload["mass_mode"], "mass_mode", MassMode)
    if "nemytskii_mode" in payload:
        kwargs["nemytskii_mode"] = _expect_enum(
            payload["nemytskii_mode"], "nemytskii_mode", NemytskiiMode
        )
    if "scheme" in payload:
        kwargs["scheme"] = _expect_enum(payload["scheme"], "scheme", Scheme)
    if "output_path" in payload:
        kwargs["output_path"] = _expect_str(payload["output_path"], "output_path")
    if "sample_times" in payload:
        raw_times = payload["sample_times"]
        if not isinstance(raw_times, list):
            raise ConfigError(
                "constraint-violation: 'sample_times' must be a list",
                field="sample_times",
                value=raw_times,
            )
        kwargs["sample_times"] = tuple(_expect_float(t, "sample_times") for t in raw_times)
    return RunConfig(**kwargs)


def parse_config(text: str) -> RunConfig:
    """Parse the JSON run configuration; defaults are filled for missing keys."""

    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"parse-error: {exc.msg} at line {exc.lineno}, column {exc.colno}",
            line=exc.lineno,
            column=exc.colno,
        ) from exc
    if not isinstance(payload, Mapping):
        raise ConfigError(
            "parse-error: top level must be a JSON object", value=type(payload).__name__
        )
    config = config_from_mapping(payload)
    logger.debug("Parsed run config for problem %s (%s)", config.problem, config.study.value)
    return config
