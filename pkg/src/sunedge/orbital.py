"""Circular-orbit geometry: propagation, sun direction, eclipses and visibility.

Positions are Earth-centred inertial (ECI) in km.  The inertial x axis points
at the March equinox; ground stations rotate with the Earth at the solar rate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

R_EARTH = 6371.0  # km
MU_EARTH = 398600.4418  # km^3/s^2
OBLIQUITY_DEG = 23.44
SECONDS_PER_DAY = 86400.0
DAYS_PER_YEAR = 365.2422
# day-of-year on which the ecliptic longitude of the sun is taken to be zero
EQUINOX_DAY = 80.0


@dataclass(frozen=True)
class Shell:
    """One Walker shell of evenly spaced circular orbits.

    ``phase_offset`` is the Walker phasing factor F: satellite ``j`` of plane
    ``p`` starts at argument of latitude ``360 * (j / S + p * F / (P * S))``.
    ``raan_spread_deg`` is 360 for delta patterns and 180 for star patterns.
    """

    altitude_km: float
    inclination_deg: float
    num_planes: int
    sats_per_plane: int
    phase_offset: float = 0.0
    raan_offset_deg: float = 0.0
    raan_spread_deg: float = 360.0

    def __post_init__(self):
        if self.altitude_km <= 0:
            raise ValueError(f"altitude_km must be positive, got {self.altitude_km}")
        if not 0 <= self.inclination_deg <= 180:
            raise ValueError(f"inclination_deg out of [0, 180]: {self.inclination_deg}")
        if self.num_planes < 1 or self.sats_per_plane < 1:
            raise ValueError("num_planes and sats_per_plane must be >= 1")

    @property
    def radius_km(self) -> float:
        return R_EARTH + self.altitude_km

    @property
    def period_s(self) -> float:
        return orbital_period(self.altitude_km)


@dataclass(frozen=True)
class ConstellationSpec:
    shells: tuple[Shell, ...]
    epoch_day_of_year: int = int(EQUINOX_DAY)
    start_utc_hours: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "shells", tuple(self.shells))
        if not self.shells:
            raise ValueError("constellation needs at least one shell")
        if not 1 <= self.epoch_day_of_year <= 366:
            raise ValueError(f"epoch_day_of_year out of [1, 366]: {self.epoch_day_of_year}")

    @classmethod
    def walker(cls, altitude_km, inclination_deg, num_planes, sats_per_plane,
               phase_offset=1.0, epoch_day_of_year=int(EQUINOX_DAY), **kw):
        shell_kw = {k: kw.pop(k) for k in ("raan_offset_deg", "raan_spread_deg") if k in kw}
        shell = Shell(altitude_km, inclination_deg, num_planes, sats_per_plane,
                      phase_offset, **shell_kw)
        return cls((shell,), epoch_day_of_year, **kw)

    @property
    def num_sats(self) -> int:
        return sum(s.num_planes * s.sats_per_plane for s in self.shells)

    @property
    def num_orbits(self) -> int:
        return sum(s.num_planes for s in self.shells)

    def elements(self) -> "OrbitElements":
        return OrbitElements.from_spec(self)


@dataclass(frozen=True)
class OrbitElements:
    """Flat per-satellite arrays derived from a :class:`ConstellationSpec`."""

    radius: np.ndarray  # km
    inclination: np.ndarray  # rad
    raan: np.ndarray  # rad
    u0: np.ndarray  # initial argument of latitude, rad
    mean_motion: np.ndarray  # rad/s
    orbit: np.ndarray  # global plane index of each satellite
    slot: np.ndarray  # in-plane index
    shell: np.ndarray

    @classmethod
    def from_spec(cls, spec: ConstellationSpec) -> "OrbitElements":
        cols = {k: [] for k in ("radius", "inclination", "raan", "u0", "orbit", "slot", "shell")}
        plane_base = 0
        for shell_idx, sh in enumerate(spec.shells):
            n_p, n_s = sh.num_planes, sh.sats_per_plane
            for p in range(n_p):
                raan = np.radians(sh.raan_offset_deg + sh.raan_spread_deg * p / n_p)
                for j in range(n_s):
                    u0 = 2 * np.pi * (j / n_s + p * sh.phase_offset / (n_p * n_s))
                    cols["radius"].append(sh.radius_km)
                    cols["inclination"].append(np.radians(sh.inclination_deg))
                    cols["raan"].append(raan)
                    cols["u0"].append(u0)
                    cols["orbit"].append(plane_base + p)
                    cols["slot"].append(j)
                    cols["shell"].append(shell_idx)
            plane_base += n_p
        arrays = {k: np.asarray(v) for k, v in cols.items()}
        arrays["mean_motion"] = np.sqrt(MU_EARTH / arrays["radius"] ** 3)
        return cls(**arrays)

    def plane_normals(self) -> np.ndarray:
        """Unit orbit normals, shape (S, 3)."""
        si = np.sin(self.inclination)
        return np.stack([np.sin(self.raan) * si, -np.cos(self.raan) * si,
                         np.cos(self.inclination)], axis=-1)


def orbital_period(altitude_km: float) -> float:
    """Circular orbit period in seconds."""
    return 2 * np.pi * np.sqrt((R_EARTH + altitude_km) ** 3 / MU_EARTH)


def propagate(spec: ConstellationSpec | OrbitElements, t, dt: float) -> np.ndarray:
    """ECI positions at slot(s) ``t``.

    Scalar ``t`` gives shape (S, 3); an array of slots gives (T, S, 3).
    """
    el = spec.elements() if isinstance(spec, ConstellationSpec) else spec
    times = np.asarray(t, dtype=float) * dt
    u = el.u0 + el.mean_motion * times[..., None]
    cu, su = np.cos(u), np.sin(u)
    co, so = np.cos(el.raan), np.sin(el.raan)
    ci, si = np.cos(el.inclination), np.sin(el.inclination)
    pos = np.stack([cu * co - su * ci * so, cu * so + su * ci * co, su * si], axis=-1)
    return pos * el.radius[:, None]


def _ecliptic_longitude(epoch_day, seconds):
    days = epoch_day - EQUINOX_DAY + np.asarray(seconds, dtype=float) / SECONDS_PER_DAY
    return 2 * np.pi * days / DAYS_PER_YEAR


def sun_direction(epoch_day: int, t, dt: float, start_utc_hours: float = 0.0) -> np.ndarray:
    """Unit vector from Earth's centre to the Sun (circular ecliptic model)."""
    if not 1 <= epoch_day <= 366:
        raise ValueError(f"epoch_day out of [1, 366]: {epoch_day}")
    lam = _ecliptic_longitude(epoch_day, start_utc_hours * 3600.0 + np.asarray(t, dtype=float) * dt)
    eps = np.radians(OBLIQUITY_DEG)
    vec = np.stack([np.cos(lam), np.cos(eps) * np.sin(lam), np.sin(eps) * np.sin(lam)], axis=-1)
    return vec / np.linalg.norm(vec, axis=-1, keepdims=True)


def solar_declination_deg(sun_dir) -> np.ndarray:
    return np.degrees(np.arcsin(np.clip(np.asarray(sun_dir)[..., 2], -1.0, 1.0)))


def earth_rotation_angle(epoch_day: int, t, dt: float, start_utc_hours: float = 0.0) -> np.ndarray:
    """Angle from the inertial x axis to the Greenwich meridian (rad).

    The Greenwich meridian faces the sun at 12:00 UTC; the rotation rate is the
    solar rate, so local solar time is exact and sidereal drift is ignored.
    """
    seconds = start_utc_hours * 3600.0 + np.asarray(t, dtype=float) * dt
    sun = sun_direction(epoch_day, t, dt, start_utc_hours)
    ra = np.arctan2(sun[..., 1], sun[..., 0])
    return ra + np.pi + 2 * np.pi * (seconds / SECONDS_PER_DAY)


def is_sunlit(sat_position, sun_dir) -> np.ndarray | bool:
    """Cylindrical umbra test; broadcasts over leading axes."""
    pos = np.asarray(sat_position, dtype=float)
    sun = np.asarray(sun_dir, dtype=float)
    along = np.sum(pos * sun, axis=-1)
    perp = pos - along[..., None] * sun
    lit = (along >= 0) | (np.linalg.norm(perp, axis=-1) > R_EARTH)
    return bool(lit) if lit.ndim == 0 else lit


def full_orbit_sunlit(h: float, theta: float) -> bool:
    """True when an orbit at altitude ``h`` km whose plane makes angle
    ``theta`` degrees with the sunlight never crosses the shadow cylinder."""
    return bool((R_EARTH + h) * np.sin(np.radians(theta)) > R_EARTH)


def beta_angle_deg(elements: OrbitElements, sun_dir) -> np.ndarray:
    """Angle between the sun vector and each satellite's orbit plane."""
    n = elements.plane_normals()
    return np.degrees(np.arcsin(np.clip(n @ np.asarray(sun_dir), -1.0, 1.0)))


def eclipse_fraction(h: float, theta: float = 0.0) -> float:
    """Fraction of a circular orbit spent in the cylindrical shadow."""
    r = R_EARTH + h
    b = np.radians(theta)
    if r * abs(np.sin(b)) >= R_EARTH:
        return 0.0
    # half-angle of the shadowed arc, measured from the anti-sun point
    half = np.arccos(np.sqrt(r**2 - R_EARTH**2) / (r * np.cos(b)))
    return float(half / np.pi)


def sunlit_ratio(sunlit: np.ndarray, sat: int, window) -> float:
    """Fraction of slots in ``window`` (a range or slice) with the satellite lit."""
    col = np.asarray(sunlit)[:, sat]
    sel = col[window] if isinstance(window, slice) else col[np.asarray(list(window))]
    if sel.size == 0:
        raise ValueError("empty window")
    return float(np.count_nonzero(sel) / sel.size)


@dataclass(frozen=True)
class GroundStation:
    id: str
    latitude_deg: float
    longitude_deg: float

    def __post_init__(self):
        if abs(self.latitude_deg) > 90:
            raise ValueError(f"latitude out of range for {self.id}: {self.latitude_deg}")
        if not -180 <= self.longitude_deg < 180:
            raise ValueError(f"longitude out of [-180, 180) for {self.id}: {self.longitude_deg}")


@dataclass(frozen=True)
class GroundStationSet:
    stations: tuple[GroundStation, ...] = ()
    min_elevation_deg: float = 25.0

    def __post_init__(self):
        object.__setattr__(self, "stations", tuple(self.stations))
        if not 0 < self.min_elevation_deg < 90:
            raise ValueError(f"min_elevation_deg must be in (0, 90): {self.min_elevation_deg}")

    def __len__(self):
        return len(self.stations)

    @property
    def latlon(self) -> np.ndarray:
        return np.array([[g.latitude_deg, g.longitude_deg] for g in self.stations]).reshape(-1, 2)

    def ecef(self) -> np.ndarray:
        lat, lon = np.radians(self.latlon).T
        return R_EARTH * np.stack([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon),
                                   np.sin(lat)], axis=-1)

    def eci(self, rotation) -> np.ndarray:
        """Station positions for Earth rotation angle(s); shape (..., G, 3)."""
        return rotate_z(self.ecef(), np.asarray(rotation)[..., None])


def load_ground_stations(path, min_elevation_deg: float = 25.0) -> GroundStationSet:
    """Read a CSV with columns ``id,lat,lon``."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"id", "lat", "lon"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        stations = [GroundStation(row["id"], float(row["lat"]), float(row["lon"])) for row in reader]
    return GroundStationSet(tuple(stations), min_elevation_deg)


def rotate_z(vec, angle) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    v = np.asarray(vec, dtype=float)
    x = c * v[..., 0] - s * v[..., 1]
    y = s * v[..., 0] + c * v[..., 1]
    return np.stack(np.broadcast_arrays(x, y, v[..., 2]), axis=-1)


def elevation_deg(sat_pos, station_pos) -> np.ndarray:
    """Elevation of ``sat_pos`` above the local horizon of ``station_pos``."""
    sat = np.asarray(sat_pos, dtype=float)
    gs = np.asarray(station_pos, dtype=float)
    los = sat - gs
    up = gs / np.linalg.norm(gs, axis=-1, keepdims=True)
    sin_el = np.sum(los * up, axis=-1) / np.linalg.norm(los, axis=-1)
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def subsatellite_points(positions, rotation) -> np.ndarray:
    """Geodetic (spherical) latitude/longitude in degrees, shape (..., 2)."""
    ecef = rotate_z(positions, -np.asarray(rotation)[..., None])
    lat = np.degrees(np.arcsin(ecef[..., 2] / np.linalg.norm(ecef, axis=-1)))
    lon = np.degrees(np.arctan2(ecef[..., 1], ecef[..., 0]))
    return np.stack([lat, lon], axis=-1)


def great_circle_deg(a_latlon, b_latlon) -> np.ndarray:
    a = np.radians(np.asarray(a_latlon, dtype=float))
    b = np.radians(np.asarray(b_latlon, dtype=float))
    cosang = (np.sin(a[..., 0]) * np.sin(b[..., 0])
              + np.cos(a[..., 0]) * np.cos(b[..., 0]) * np.cos(a[..., 1] - b[..., 1]))
    return np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))


def grid_neighbors(spec: ConstellationSpec) -> np.ndarray:
    """+Grid ISL partners per satellite: (fore, aft, left, right), shape (S, 4).

    Plane indices wrap around within a shell, so every satellite keeps four
    links.  With fewer than three planes or satellites per plane some of the
    four entries coincide.
    """
    out = []
    base = 0
    for sh in spec.shells:
        n_p, n_s = sh.num_planes, sh.sats_per_plane
        for p in range(n_p):
            for j in range(n_s):
                out.append([
                    base + p * n_s + (j + 1) % n_s,
                    base + p * n_s + (j - 1) % n_s,
                    base + ((p - 1) % n_p) * n_s + j,
                    base + ((p + 1) % n_p) * n_s + j,
                ])
        base += n_p * n_s
    return np.asarray(out, dtype=int).reshape(-1, 4)


def isl_edges(spec: ConstellationSpec) -> list[tuple[int, int]]:
    """Undirected +Grid edges (i < j), without self loops or duplicates."""
    edges = set()
    for i, row in enumerate(grid_neighbors(spec)):
        for j in row:
            if i != j:
                edges.add((min(i, int(j)), max(i, int(j))))
    return sorted(edges)


@dataclass(frozen=True)
class SkyState:
    time_slot: int
    sat_positions: np.ndarray
    sun_unit_vector: np.ndarray
    sunlit: np.ndarray


@dataclass
class Sky:
    """Precomputed geometry for every slot of a run.

    Node ids follow the network convention: satellites are ``0..S-1`` and
    ground station ``g`` is node ``S + g``.
    """

    spec: ConstellationSpec
    stations: GroundStationSet
    dt: float
    positions: np.ndarray  # (T, S, 3)
    sun: np.ndarray  # (T, 3)
    sunlit: np.ndarray  # (T, S) bool
    rotation: np.ndarray  # (T,)
    gs_visible: np.ndarray  # (T, S, G) bool
    neighbors: np.ndarray = field(repr=False)  # (S, 4)

    @classmethod
    def compute(cls, spec: ConstellationSpec, stations: GroundStationSet | None,
                n_slots: int, dt: float) -> "Sky":
        stations = stations if stations is not None else GroundStationSet()
        slots = np.arange(n_slots)
        el = spec.elements()
        pos = propagate(el, slots, dt)
        sun = sun_direction(spec.epoch_day_of_year, slots, dt, spec.start_utc_hours)
        rot = earth_rotation_angle(spec.epoch_day_of_year, slots, dt, spec.start_utc_hours)
        sunlit = is_sunlit(pos, sun[:, None, :])
        if len(stations):
            gs = stations.eci(rot)  # (T, G, 3)
            elev = elevation_deg(pos[:, :, None, :], gs[:, None, :, :])
            vis = elev >= stations.min_elevation_deg
        else:
            vis = np.zeros((n_slots, spec.num_sats, 0), dtype=bool)
        return cls(spec, stations, dt, pos, sun, np.asarray(sunlit), rot, vis, grid_neighbors(spec))

    @property
    def num_slots(self) -> int:
        return self.positions.shape[0]

    @property
    def num_sats(self) -> int:
        return self.positions.shape[1]

    def state(self, t: int) -> SkyState:
        return SkyState(t, self.positions[t], self.sun[t], self.sunlit[t])

    def subsatellite(self) -> np.ndarray:
        return subsatellite_points(self.positions, self.rotation)

    def visibility(self, i: int, j: int, t: int) -> bool:
        if i == j:
            raise ValueError("visibility is defined for distinct nodes")
        n = self.num_sats
        if i < n and j < n:
            return bool(j in self.neighbors[i])
        if i >= n and j >= n:
            return False
        sat, gs = (i, j - n) if i < n else (j, i - n)
        return bool(self.gs_visible[t, sat, gs])
