"""Scenario configuration: schema, presets and validation."""

from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

import yaml

from ..energy import PowerParams
from ..orbital import (ConstellationSpec, GroundStationSet, Shell, load_ground_stations,
                       orbital_period)


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _data_path(name: str) -> Path:
    return Path(str(resources.files("sunedge") / "data" / name))


def load_presets() -> dict:
    return yaml.safe_load(_data_path("presets.yaml").read_text())


PRESETS = load_presets()
DEFAULT_STATIONS = _data_path("ground_stations.csv")


@dataclass(frozen=True)
class WorkloadSpec:
    task_type: str = "ship_detection"
    regions: tuple[tuple[float, float, float, float], ...] | None = None
    imaging_interval_s: float | None = None
    image_pixels: float = 1e8  # 10K x 10K
    bits_per_pixel: float = 8.0
    compression: float = 1.0
    deadline_s: float = 300.0

    @property
    def image_bits(self) -> float:
        return self.image_pixels * self.bits_per_pixel / self.compression

    def preset(self) -> dict:
        return PRESETS["tasks"][self.task_type]

    def boxes(self):
        if self.regions is not None:
            return self.regions
        return (tuple(PRESETS["regions"][self.preset()["region"]]),)

    def interval_s(self) -> float:
        return self.imaging_interval_s or float(self.preset()["imaging_interval_s"])

    def processing_s(self, power_level: int) -> float:
        return float(self.preset()["processing_s"][int(power_level)])


@dataclass(frozen=True)
class ScenarioConfig:
    constellation: ConstellationSpec
    stations: GroundStationSet
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)
    power: PowerParams = field(default_factory=PowerParams)
    power_level: int = 60
    dt: float = 1.0
    horizon_slots: int | None = None
    horizon_orbits: float = 2.0
    strategy: str = "SunlightAware"
    seed: int = 0
    isl_capacity: float = 1e9
    gsl_capacity: float = 100e6
    gsl_mode: str = "connectivity"
    fairness: str = "equal"
    lifetime_ref_dod: float = 0.4
    lifetime_ref_cycles: float = 20000.0

    @property
    def period_s(self) -> float:
        return max(orbital_period(sh.altitude_km) for sh in self.constellation.shells)

    @property
    def num_slots(self) -> int:
        if self.horizon_slots is not None:
            return int(self.horizon_slots)
        return int(math.ceil(self.horizon_orbits * self.period_s / self.dt))

    @property
    def deadline_slots(self) -> int:
        return int(math.ceil(self.workload.deadline_s / self.dt))

    @property
    def processing_slots(self) -> int:
        return int(math.ceil(self.workload.processing_s(self.power_level) / self.dt))

    def with_overrides(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        c = self.constellation
        return {
            "constellation": {
                "shells": [asdict(s) for s in c.shells],
                "epoch_day_of_year": c.epoch_day_of_year,
                "start_utc_hours": c.start_utc_hours,
            },
            "ground_stations": {
                "stations": [[g.id, g.latitude_deg, g.longitude_deg] for g in self.stations.stations],
                "min_elevation_deg": self.stations.min_elevation_deg,
            },
            "workload": {k: (list(map(list, v)) if k == "regions" and v is not None else v)
                         for k, v in asdict(self.workload).items()},
            "power": asdict(self.power),
            **{k: getattr(self, k) for k in (
                "power_level", "dt", "horizon_slots", "horizon_orbits", "strategy", "seed",
                "isl_capacity", "gsl_capacity", "gsl_mode", "fairness",
                "lifetime_ref_dod", "lifetime_ref_cycles")},
        }


_TOP_KEYS = {"constellation", "ground_stations", "workload", "power", "power_level", "dt",
             "horizon_slots", "horizon_orbits", "strategy", "seed", "isl_capacity",
             "gsl_capacity", "gsl_mode", "fairness", "lifetime_ref_dod", "lifetime_ref_cycles"}


def _positive(d, key, path):
    if key in d and d[key] is not None and not d[key] > 0:
        raise ConfigError(f"{path}.{key}" if path else key, f"must be positive, got {d[key]!r}")


def _build_constellation(raw, path="constellation") -> ConstellationSpec:
    if isinstance(raw, str):
        if raw not in PRESETS["constellations"]:
            raise ConfigError(path, f"unknown preset {raw!r}")
        raw = PRESETS["constellations"][raw]
    raw = dict(raw)
    if "preset" in raw:
        name = raw.pop("preset")
        if name not in PRESETS["constellations"]:
            raise ConfigError(f"{path}.preset", f"unknown preset {name!r}")
        raw = {**PRESETS["constellations"][name], **raw}
    shells = raw.get("shells")
    if not shells:
        raise ConfigError(f"{path}.shells", "at least one shell required")
    built = []
    for n, sh in enumerate(shells):
        try:
            built.append(Shell(**sh))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}.shells[{n}]", str(exc)) from None
    try:
        return ConstellationSpec(tuple(built), int(raw.get("epoch_day_of_year", 80)),
                                 float(raw.get("start_utc_hours", 0.0)))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _build_stations(raw, base_dir: Path | None, path="ground_stations") -> GroundStationSet:
    raw = {} if raw is None else ({"file": raw} if isinstance(raw, str) else dict(raw))
    min_el = float(raw.get("min_elevation_deg", 25.0))
    try:
        if "stations" in raw:
            from ..orbital import GroundStation
            return GroundStationSet(tuple(GroundStation(str(s[0]), float(s[1]), float(s[2]))
                                          for s in raw["stations"]), min_el)
        file = raw.get("file")
        if file is None or file == "default":
            csv_path = DEFAULT_STATIONS
        else:
            csv_path = Path(file)
            if not csv_path.is_absolute() and base_dir is not None:
                csv_path = base_dir / csv_path
        if not csv_path.exists():
            raise ConfigError(f"{path}.file", f"no such file {csv_path}")
        stations = load_ground_stations(csv_path, min_el)
        limit = raw.get("limit")
        if limit is not None:
            stations = GroundStationSet(stations.stations[:int(limit)], min_el)
        return stations
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path, str(exc)) from None


def config_from_dict(raw: dict, base_dir: Path | None = None) -> ScenarioConfig:
    raw = copy.deepcopy(raw or {})
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    constellation = _build_constellation(raw.get("constellation", "desk_walker"))
    stations = _build_stations(raw.get("ground_stations"), base_dir)

    wl = dict(raw.get("workload") or {})
    for key in ("image_pixels", "bits_per_pixel", "compression", "deadline_s", "imaging_interval_s"):
        _positive(wl, key, "workload")
    if "regions" in wl and wl["regions"] is not None:
        regions = []
        for n, box in enumerate(wl["regions"]):
            if isinstance(box, str):
                if box not in PRESETS["regions"]:
                    raise ConfigError(f"workload.regions[{n}]", f"unknown region {box!r}")
                box = PRESETS["regions"][box]
            if len(box) != 4:
                raise ConfigError(f"workload.regions[{n}]", "expected [lat_min, lat_max, lon_min, lon_max]")
            la0, la1, lo0, lo1 = map(float, box)
            if not (-90 <= la0 < la1 <= 90 and -180 <= lo0 < lo1 <= 180):
                raise ConfigError(f"workload.regions[{n}]", f"invalid box {box}")
            regions.append((la0, la1, lo0, lo1))
        wl["regions"] = tuple(regions)
    try:
        workload = WorkloadSpec(**wl)
    except TypeError as exc:
        raise ConfigError("workload", str(exc)) from None
    if workload.task_type not in PRESETS["tasks"]:
        raise ConfigError("workload.task_type", f"unknown task type {workload.task_type!r}")

    try:
        power = PowerParams(**(raw.get("power") or {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError("power", str(exc)) from None

    kw = {k: raw[k] for k in _TOP_KEYS - {"constellation", "ground_stations", "workload", "power"}
          if k in raw}
    for key in ("dt", "horizon_slots", "horizon_orbits", "isl_capacity", "gsl_capacity"):
        _positive(kw, key, "")
    level = int(kw.get("power_level", 60))
    if level not in {int(x) for x in workload.preset()["processing_s"]}:
        raise ConfigError("power_level", f"no processing time for {level} W")
    if "p_cp" not in (raw.get("power") or {}):
        power = replace(power, p_cp=float(level))
    if kw.get("gsl_mode", "connectivity") not in ("connectivity", "transmit"):
        raise ConfigError("gsl_mode", f"unknown mode {kw['gsl_mode']!r}")
    if kw.get("fairness", "equal") not in ("equal", "maxmin"):
        raise ConfigError("fairness", f"unknown mode {kw['fairness']!r}")
    from ..baselines import StrategyKind
    if kw.get("strategy", "SunlightAware") not in {k.value for k in StrategyKind}:
        raise ConfigError("strategy", f"unknown strategy {kw['strategy']!r}")

    cfg = ScenarioConfig(constellation, stations, workload, power, **kw)
    if cfg.deadline_slots >= cfg.num_slots:
        raise ConfigError("horizon_slots", "horizon must exceed the task deadline")
    if cfg.processing_slots > cfg.deadline_slots:
        raise ConfigError("workload.deadline_s", "deadline shorter than processing time")
    return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(str(path), exc.strerror or str(exc)) from None
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"parse error: {exc}") from None
    if raw is not None and not isinstance(raw, dict):
        raise ConfigError(str(path), "top level must be a mapping")
    return config_from_dict(raw or {}, path.parent)


def desk_scenario(**overrides) -> ScenarioConfig:
    """6 x 8 Walker at 550 km / 53 deg, ten stations, ship detection at 60 W."""
    cfg = config_from_dict({})
    return cfg.with_overrides(**overrides) if overrides else cfg
