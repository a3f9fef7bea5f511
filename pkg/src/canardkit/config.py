"""Run configuration: an INI file with one section per concern, plus flag overrides."""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field, fields
from typing import Optional

from canardkit.errors import ValidationError
from canardkit.model import Params


@dataclass
class ModelSection:
    delta: Optional[float] = None
    theta: Optional[float] = None
    eta: Optional[float] = None
    epsilon: Optional[float] = None


@dataclass
class SimulateSection:
    u0: Optional[float] = None
    v0: Optional[float] = None
    t_end: float = 5000.0
    rtol: float = 1e-9
    atol: float = 1e-12
    method: str = "LSODA"
    detect_cycle: bool = True


@dataclass
class SweepSection:
    delta_min: float = 0.2
    delta_max: float = 0.7
    step: float = 0.01
    refine_levels: int = 10
    reverse_near_hopf: bool = False
    locate_snl: bool = False


@dataclass
class AnalyzeSection:
    transversality_step: float = 1e-4
    dulac_samples: int = 10_000


@dataclass
class SingularOrbitSection:
    points_per_segment: int = 200


@dataclass
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    analyze: AnalyzeSection = field(default_factory=AnalyzeSection)
    simulate: SimulateSection = field(default_factory=SimulateSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    singular_orbit: SingularOrbitSection = field(default_factory=SingularOrbitSection)

    SECTIONS = ("model", "analyze", "simulate", "sweep", "singular_orbit")

    def params(self, need_delta: bool = True) -> Params:
        m = self.model
        for name in ("theta", "eta", "epsilon") + (("delta",) if need_delta else ()):
            if getattr(m, name) is None:
                raise ValidationError(f"missing required parameter '{name}' in [model]", field=name)
        return Params(delta=m.delta if m.delta is not None else 0.5, theta=m.theta, eta=m.eta, epsilon=m.epsilon)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        for sec in self.SECTIONS:
            obj = getattr(self, sec)
            cp[sec.replace("_", "-")] = {
                f.name: _dump(getattr(obj, f.name)) for f in fields(obj) if getattr(obj, f.name) is not None
            }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def hash(self) -> str:
        return hashlib.sha256(self.to_ini().encode()).hexdigest()[:16]

    def set(self, section: str, name: str, raw) -> None:
        obj = getattr(self, section)
        types = {f.name: f.type for f in fields(obj)}
        if name not in types:
            raise ValidationError(f"unknown option '{name}' in [{section}]", field=name)
        setattr(obj, name, _coerce(raw, types[name], name))


def _dump(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(raw, typ: str, name: str):
    if raw is None:
        return None
    if not isinstance(raw, str):
        return raw
    t = typ.replace("Optional[", "").rstrip("]")
    try:
        if t == "float":
            return float(raw)
        if t == "int":
            return int(raw)
        if t == "bool":
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ValidationError(f"option '{name}' has invalid value {raw!r} (expected {t})", field=name) from None


def load_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"config file is malformed: {exc}") from exc
    cfg = RunConfig()
    for raw_sec in cp.sections():
        sec = raw_sec.replace("-", "_")
        if sec not in RunConfig.SECTIONS:
            raise ValidationError(f"unknown config section [{raw_sec}]", field=raw_sec)
        for name, value in cp[raw_sec].items():
            cfg.set(sec, name.replace("-", "_"), value)
    return cfg
