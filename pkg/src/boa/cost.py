"""Distance metrics, planar regions and the lat/lon -> km projection."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

# Spherical-Earth constants, km per degree.
KM_PER_DEG_LON_EQUATOR = 111.320
KM_PER_DEG_LAT = 110.574


class OutOfRegionError(ValueError):
    """A coordinate lies outside the bounding box it is projected against."""


class CostMetric(str, enum.Enum):
    MANHATTAN = "manhattan"
    EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class Location:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite location ({self.x}, {self.y})")


def manhattan(a: Location, b: Location) -> float:
    return abs(a.x - b.x) + abs(a.y - b.y)


def euclidean(a: Location, b: Location) -> float:
    # sqrt(dx*dx + dy*dy) rather than hypot so the scalar path agrees
    # bit-for-bit with the vectorised one in pairwise_costs.
    dx = a.x - b.x
    dy = a.y - b.y
    return math.sqrt(dx * dx + dy * dy)


def distance(a: Location, b: Location, metric: CostMetric) -> float:
    if metric is CostMetric.MANHATTAN:
        return manhattan(a, b)
    if metric is CostMetric.EUCLIDEAN:
        return euclidean(a, b)
    raise ValueError(f"unknown metric {metric!r}")


def distances_from(x: float, y: float, xs: np.ndarray, ys: np.ndarray,
                   metric: CostMetric) -> np.ndarray:
    """Distances from one point to many, same float semantics as `distance`."""
    dx = x - xs
    dy = y - ys
    if metric is CostMetric.MANHATTAN:
        return np.abs(dx) + np.abs(dy)
    if metric is CostMetric.EUCLIDEAN:
        return np.sqrt(dx * dx + dy * dy)
    raise ValueError(f"unknown metric {metric!r}")


def pairwise_costs(wx: np.ndarray, wy: np.ndarray, tx: np.ndarray, ty: np.ndarray,
                   metric: CostMetric) -> np.ndarray:
    """|W| x |T| cost matrix."""
    dx = wx[:, None] - tx[None, :]
    dy = wy[:, None] - ty[None, :]
    if metric is CostMetric.MANHATTAN:
        return np.abs(dx) + np.abs(dy)
    if metric is CostMetric.EUCLIDEAN:
        return np.sqrt(dx * dx + dy * dy)
    raise ValueError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned planar region [0, width] x [0, height]."""

    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("degenerate region")

    @classmethod
    def square(cls, side: float) -> Rect:
        return cls(side, side)


@dataclass(frozen=True)
class GeoBoundingBox:
    lat_min: float
    lon_min: float
    lat_max: float
    lon_max: float

    def __post_init__(self):
        if not (-90 <= self.lat_min < self.lat_max <= 90):
            raise ValueError(f"bad latitude range [{self.lat_min}, {self.lat_max}]")
        if not (-180 <= self.lon_min < self.lon_max <= 180):
            raise ValueError(f"bad longitude range [{self.lon_min}, {self.lon_max}]")

    @property
    def lat_mid_rad(self) -> float:
        return math.radians((self.lat_min + self.lat_max) / 2)

    @property
    def km_per_deg_lon(self) -> float:
        return KM_PER_DEG_LON_EQUATOR * math.cos(self.lat_mid_rad)

    def contains(self, lat: float, lon: float) -> bool:
        return self.lat_min <= lat <= self.lat_max and self.lon_min <= lon <= self.lon_max

    def extent_km(self) -> Rect:
        return Rect((self.lon_max - self.lon_min) * self.km_per_deg_lon,
                    (self.lat_max - self.lat_min) * KM_PER_DEG_LAT)

    @classmethod
    def parse(cls, text: str) -> GeoBoundingBox:
        """Parse ``lat0,lon0,lat1,lon1`` (corner order is irrelevant)."""
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected lat0,lon0,lat1,lon1, got {text!r}")
        lat0, lon0, lat1, lon1 = parts
        return cls(min(lat0, lat1), min(lon0, lon1), max(lat0, lat1), max(lon0, lon1))


# Region studied on the pickup data: (40.5998, -74.0701) to (40.8998, -73.7701).
NYC_BBOX = GeoBoundingBox(40.5998, -74.0701, 40.8998, -73.7701)


def project_geo(lat: float, lon: float, bbox: GeoBoundingBox) -> Location:
    """Equirectangular projection to km, origin at (lat_min, lon_min)."""
    if not bbox.contains(lat, lon):
        raise OutOfRegionError(f"({lat}, {lon}) outside {bbox}")
    return Location((lon - bbox.lon_min) * bbox.km_per_deg_lon,
                    (lat - bbox.lat_min) * KM_PER_DEG_LAT)


def unproject_geo(loc: Location, bbox: GeoBoundingBox) -> tuple[float, float]:
    """Inverse of `project_geo`; returns (lat, lon)."""
    return (bbox.lat_min + loc.y / KM_PER_DEG_LAT,
            bbox.lon_min + loc.x / bbox.km_per_deg_lon)


def region_c_max(region: Rect | GeoBoundingBox, metric: CostMetric) -> float:
    """Metric diameter of a rectangular region."""
    if isinstance(region, GeoBoundingBox):
        region = region.extent_km()
    if metric is CostMetric.MANHATTAN:
        return region.width + region.height
    if metric is CostMetric.EUCLIDEAN:
        return math.sqrt(region.width ** 2 + region.height ** 2)
    raise ValueError(f"unknown metric {metric!r}")
