"""JSON experiment configs: schema, time parsing, and cross-field validation."""
from __future__ import annotations

import json
import math
import re
from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .hamiltonian import REGION_TAGS, min_wire_length, parse_label, transfer_time

_TAU = re.compile(r"^\s*([0-9]*\.?[0-9]*(?:[eE][-+]?[0-9]+)?)\s*\*?\s*tau\s*$")

TimeValue = Union[float, str]


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ChainConfig(_Strict):
    N: int = Field(5, ge=1)
    delta: float = Field(1.0, gt=0)
    sigma: float = Field(1.5, ge=0)


class WireConfig(_Strict):
    L: int | None = Field(None, ge=2)
    kappa: float = Field(2.0, gt=0)
    g: float = Field(2.0, gt=0)


class ProtocolConfig(_Strict):
    initial_site: int | None = None
    t_0: TimeValue | None = None
    t_f: TimeValue | list[TimeValue] | None = None
    samples: int = Field(401, ge=0)
    sites: list[str | int] | None = None

    @field_validator("sites")
    @classmethod
    def _labels(cls, v):
        if v is None:
            return v
        out = []
        for s in v:
            if isinstance(s, int):
                s = f"S{s}"
            parse_label(s)
            out.append(s)
        return out


class DisorderConfig(_Strict):
    delta: float | list[float] = 0.0
    count: int = Field(1, ge=1)
    base_seed: int = Field(0, ge=0)
    scope_a: list[str] | None = None
    scope_b: list[str] | None = None
    bins: int = Field(40, ge=1)

    @field_validator("delta")
    @classmethod
    def _range(cls, v):
        for d in v if isinstance(v, list) else [v]:
            if not 0 <= d < 1:
                raise ValueError(f"disorder strength {d} outside [0, 1); hopping factors could turn nonpositive")
        if isinstance(v, list) and not v:
            raise ValueError("empty disorder grid")
        return v

    @field_validator("scope_a", "scope_b")
    @classmethod
    def _tags(cls, v):
        if v is not None:
            bad = set(v) - REGION_TAGS
            if bad:
                raise ValueError(f"unknown region tags {sorted(bad)}")
            return sorted(set(v))
        return v


class OutputConfig(_Strict):
    directory: str | None = None
    trajectory: bool = True
    result: bool = True
    ensemble: bool = True
    graph: bool = False


class ExperimentConfig(_Strict):
    scheme: Literal["A", "B", "both"] = "B"
    chain: ChainConfig = ChainConfig()
    wire: WireConfig = WireConfig()
    protocol: ProtocolConfig = ProtocolConfig()
    disorder: DisorderConfig = DisorderConfig()
    outputs: OutputConfig = OutputConfig()

    @property
    def schemes(self) -> list[str]:
        return ["A", "B"] if self.scheme == "both" else [self.scheme]

    @property
    def t_fs(self) -> list[float]:
        return list(self.protocol.t_f)

    @property
    def deltas(self) -> list[float]:
        d = self.disorder.delta
        return list(d) if isinstance(d, list) else [d]

    @property
    def is_ensemble(self) -> bool:
        return (self.disorder.count > 1 or isinstance(self.disorder.delta, list)
                or any(d > 0 for d in self.deltas) or len(self.t_fs) > 1)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)


def resolve_time(value: TimeValue, delta: float, where: str) -> float:
    """Numbers are times in units of 1/delta; ``"tau"``, ``"31tau"``, ``"31*tau"`` are multiples of pi/(2 delta)."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        t = float(value)
    else:
        m = _TAU.match(str(value))
        if not m:
            try:
                return resolve_time(float(value), delta, where)
            except ValueError:
                pass
            raise ConfigError(f"{where}: cannot read time {value!r} (use a number or e.g. '31tau')")
        t = (float(m.group(1)) if m.group(1) else 1.0) * transfer_time(delta)
    if not (t > 0 and math.isfinite(t)):
        raise ConfigError(f"{where}: time must be positive")
    return t


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "; ".join(lines)


def parse_config(text: str | dict) -> ExperimentConfig:
    """Validate a JSON config and resolve every default (times, wire length)."""
    if isinstance(text, str):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"<root>: invalid JSON: {exc}") from None
    else:
        doc = text
    if not isinstance(doc, dict):
        raise ConfigError("<root>: config must be a JSON object")
    try:
        cfg = ExperimentConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None
    return _resolve(cfg)


def _resolve(cfg: ExperimentConfig) -> ExperimentConfig:
    p = cfg.protocol
    delta = cfg.chain.delta
    t0 = resolve_time(p.t_0, delta, "protocol.t_0") if p.t_0 is not None else None
    if p.t_f is None:
        if t0 is None:
            raise ConfigError("protocol: give t_0 or t_f")
        t_fs = [2 * t0]
    else:
        raw = p.t_f if isinstance(p.t_f, list) else [p.t_f]
        if not raw:
            raise ConfigError("protocol.t_f: empty time grid")
        t_fs = [resolve_time(v, delta, f"protocol.t_f[{i}]") for i, v in enumerate(raw)]
        if t0 is not None and (len(t_fs) != 1 or not math.isclose(t_fs[0], 2 * t0, rel_tol=1e-12)):
            raise ConfigError("protocol: t_f must equal 2 * t_0 when both are given")
    t0 = t_fs[0] / 2 if len(t_fs) == 1 else None

    N = cfg.chain.N
    site = -N if p.initial_site is None else p.initial_site
    if not -N <= site <= N:
        raise ConfigError(f"protocol.initial_site: {site} outside [-{N}, {N}]")
    sites = p.sites if p.sites is not None else [f"S{site}", f"S{-site}"] if site else ["S0"]
    for s in sites:
        lab = parse_label(s)
        if lab[0] == "S" and not -N <= lab[1] <= N:
            raise ConfigError(f"protocol.sites: chain site {s} outside the chain")

    L = cfg.wire.L
    if "B" in cfg.schemes:
        need = min_wire_length(cfg.wire.kappa, max(t_fs))
        if L is None:
            L = need
        elif L < need:
            raise ConfigError(f"wire.L: {L} is below the truncation bound {need} for t_f={max(t_fs):g}")
        for s in sites:
            lab = parse_label(s)
            if lab[0] == "C" and not 1 <= lab[1] <= L:
                raise ConfigError(f"protocol.sites: wire site {s} outside 1..{L}")
    elif any(parse_label(s)[0] == "C" for s in sites):
        raise ConfigError("protocol.sites: wire sites requested but scheme A has no wire")

    return cfg.model_copy(update={
        "wire": cfg.wire.model_copy(update={"L": L}),
        "protocol": p.model_copy(update={
            "initial_site": site, "t_0": t0, "t_f": t_fs, "sites": sites,
        }),
    })
