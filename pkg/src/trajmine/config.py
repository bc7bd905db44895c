"""Pipeline configuration: every parameter set, grouped into JSON sections."""
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .geo import GeoConfig
from .mining.optics import OpticsParams
from .planner import PlanParams
from .staypoint import StayPointParams
from .trajectory import DEFAULT_MAX_SPEED_KMH


@dataclass(frozen=True)
class InputParams:
    dir: str = ""
    # day that HH:MM:SS rows fall on when the file has no Date column
    base_date: str = "1970-01-01"


@dataclass(frozen=True)
class CleanParams:
    max_speed_kmh: float = DEFAULT_MAX_SPEED_KMH

    def __post_init__(self):
        if not self.max_speed_kmh > 0:
            raise ValueError("max_speed_kmh must be positive")


@dataclass(frozen=True)
class TbhgParams:
    # coarse to fine; the last level is the one POIs are read from
    level_eps_m: tuple = (500.0, 250.0)


@dataclass(frozen=True)
class HitsParams:
    binary: bool = False
    tol: float = 1e-9
    max_iter: int = 100


@dataclass(frozen=True)
class SequenceParams:
    max_len: int = 3
    k: int = 10


@dataclass(frozen=True)
class CatalogParams:
    """How ranked clusters become a planning catalog."""
    top_pois: int = 8
    visit_duration_s: float = 3600.0
    preferred: tuple = ()


SECTIONS = {
    "input": InputParams,
    "geo": GeoConfig,
    "clean": CleanParams,
    "staypoint": StayPointParams,
    "optics": OpticsParams,
    "tbhg": TbhgParams,
    "hits": HitsParams,
    "sequences": SequenceParams,
    "catalog": CatalogParams,
    "plan": PlanParams,
}


def _coerce(cls, values):
    out = {}
    known = {f.name: f for f in fields(cls)}
    for name, v in values.items():
        if name not in known:
            raise ValueError(f"unknown setting {name!r} for {cls.__name__}")
        if isinstance(known[name].default, tuple) and isinstance(v, (list, tuple)):
            v = tuple(v)
        out[name] = v
    return cls(**out)


@dataclass(frozen=True)
class PipelineConfig:
    input: InputParams = field(default_factory=InputParams)
    geo: GeoConfig = field(default_factory=GeoConfig)
    clean: CleanParams = field(default_factory=CleanParams)
    staypoint: StayPointParams = field(default_factory=StayPointParams)
    optics: OpticsParams = field(default_factory=OpticsParams)
    tbhg: TbhgParams = field(default_factory=TbhgParams)
    hits: HitsParams = field(default_factory=HitsParams)
    sequences: SequenceParams = field(default_factory=SequenceParams)
    catalog: CatalogParams = field(default_factory=CatalogParams)
    plan: PlanParams = field(default_factory=PlanParams)

    def to_dict(self):
        return {name: asdict(getattr(self, name)) for name in SECTIONS}

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(SECTIONS)
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        return cls(**{name: _coerce(SECTIONS[name], d.get(name, {})) for name in SECTIONS})

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path):
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path):
        Path(path).write_text(self.to_json(), encoding="utf-8")

    def with_overrides(self, overrides):
        """Apply ``{"section.field": value}`` overrides, re-validating each section."""
        d = self.to_dict()
        for key, value in overrides.items():
            section, _, name = key.partition(".")
            if section not in SECTIONS or not name:
                raise ValueError(f"bad setting {key!r}; expected section.field")
            d[section][name] = value
        return PipelineConfig.from_dict(d)


def parse_value(raw, default):
    """Read a command-line value using the type of the field's default."""
    if isinstance(default, tuple):
        raw = raw.strip()
        if raw.startswith("["):
            return tuple(json.loads(raw))
        parts = [x.strip() for x in raw.split(",") if x.strip()]
        if default and isinstance(default[0], (int, float)):
            return tuple(float(x) for x in parts)
        return tuple(parts)
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float) or default is None:
        if default is None and raw.lower() in ("", "none", "null"):
            return None
        return float(raw)
    return raw

