"""Workload generation: synthetic grids, arrival orderings, pickup-trace ingestion."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, time, timedelta
from pathlib import Path

import numpy as np

from .cost import CostMetric, GeoBoundingBox, Location, Rect, project_geo, region_c_max, unproject_geo
from .model import Instance, Task, TaskBatch, Worker
from .online import ArrivalStream

log = logging.getLogger(__name__)

# 40 km/h expressed in km per minute; real-data times are minutes.
REAL_VELOCITY = 40.0 / 60.0
UBER_TIME_FORMAT = "%m/%d/%Y %H:%M:%S"
INSTANCE_FORMAT = "boa-instance/1"


@dataclass(frozen=True)
class SyntheticConfig:
    n_workers: int = 6000
    n_tasks: int = 6000
    budget: float = 3000.0
    deadline_window: float = 60.0
    square_side: float = 500.0
    time_horizon: float = 100.0
    velocity: float = 1.0
    metric: CostMetric = CostMetric.MANHATTAN
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "metric", CostMetric(self.metric))
        if self.n_workers <= 0 or self.n_tasks <= 0:
            raise ValueError("worker and task counts must be positive")
        if not (self.square_side > 0 and self.deadline_window > 0 and self.time_horizon > 0):
            raise ValueError("square_side, deadline_window and time_horizon must be positive")
        if not (self.budget >= 0 and self.velocity > 0):
            raise ValueError("need budget >= 0 and velocity > 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["metric"] = self.metric.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SyntheticConfig:
        return cls(**d)


def _uniform_times(rng: np.random.Generator, n: int, horizon: float) -> np.ndarray:
    # Times scatter over [0, horizon - 1], e.g. 0..99 for the default horizon.
    return rng.uniform(0.0, max(horizon - 1.0, 0.0), size=n)


def gen_synthetic(cfg: SyntheticConfig) -> Instance:
    rng = np.random.default_rng(cfg.seed)
    side = cfg.square_side
    wxy = rng.uniform(0.0, side, size=(cfg.n_workers, 2))
    arrivals = _uniform_times(rng, cfg.n_workers, cfg.time_horizon)
    txy = rng.uniform(0.0, side, size=(cfg.n_tasks, 2))
    releases = _uniform_times(rng, cfg.n_tasks, cfg.time_horizon)
    workers = [Worker(i, Location(float(x), float(y)), float(a), cfg.velocity)
               for i, ((x, y), a) in enumerate(zip(wxy, arrivals))]
    tasks = [Task(j, Location(float(x), float(y)), float(r), float(r) + cfg.deadline_window)
             for j, ((x, y), r) in enumerate(zip(txy, releases))]
    return Instance(workers, TaskBatch(tasks, cfg.budget), cfg.metric,
                    region_c_max(Rect.square(side), cfg.metric))


def gen_small(rng: np.random.Generator, max_size: int = 6) -> Instance:
    """Desk-scale instance for oracle checks: 10x10 square, horizon 10."""
    cfg = SyntheticConfig(
        n_workers=int(rng.integers(1, max_size + 1)),
        n_tasks=int(rng.integers(1, max_size + 1)),
        budget=float(rng.uniform(0.0, 30.0)),
        deadline_window=float(rng.uniform(2.0, 10.0)),
        square_side=10.0,
        time_horizon=10.0,
        seed=int(rng.integers(2 ** 31)),
    )
    return gen_synthetic(cfg)


def order_random(inst: Instance, seed: int | None = None, redraw: bool = False) -> ArrivalStream:
    """Workers by arrival time (ties by id).

    With ``redraw`` the arrival times are first re-sampled uniformly over the
    instance's observed arrival span using ``seed``.
    """
    workers = list(inst.workers)
    if redraw and workers:
        lo = min(w.arrival for w in workers)
        hi = max(w.arrival for w in workers)
        times = np.random.default_rng(seed).uniform(lo, hi, size=len(workers))
        workers = [Worker(w.id, w.loc, float(a), w.velocity) for w, a in zip(workers, times)]
    return ArrivalStream.from_workers(workers)


def nearest_feasible_costs(inst: Instance) -> np.ndarray:
    """Per worker, cheapest deadline-feasible task cost (inf if none)."""
    if not inst.tasks:
        return np.full(len(inst.workers), np.inf)
    costs = inst.cost_matrix()
    feasible = inst.feasibility_matrix(costs)
    return np.where(feasible, costs, np.inf).min(axis=1)


def order_adversary(inst: Instance) -> ArrivalStream:
    """Expensive workers first.

    Workers are ranked by their cheapest feasible task cost, descending
    (no feasible task ranks first); ties by id. Arrival times are then
    reassigned evenly across the original arrival span so the stream stays
    time-consistent; feasibility follows the new times.
    """
    workers = list(inst.workers)
    if not workers:
        return ArrivalStream(())
    score = nearest_feasible_costs(inst)
    order = sorted(range(len(workers)), key=lambda i: (-score[i], workers[i].id))
    lo = min(w.arrival for w in workers)
    hi = max(w.arrival for w in workers)
    times = np.linspace(lo, hi, len(workers)) if len(workers) > 1 else np.array([lo])
    return ArrivalStream(tuple(
        Worker(workers[i].id, workers[i].loc, float(t), workers[i].velocity)
        for i, t in zip(order, times)
    ))


# --- pickup traces ---------------------------------------------------------

class PickupParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class PickupRecord:
    timestamp: datetime
    lat: float
    lon: float

    def __post_init__(self):
        if not (-90 <= self.lat <= 90) or not (-180 <= self.lon <= 180):
            raise ValueError(f"coordinates out of range: ({self.lat}, {self.lon})")


def parse_timestamp(text: str) -> datetime:
    text = text.strip()
    try:
        return datetime.strptime(text, UBER_TIME_FORMAT)
    except ValueError:
        return datetime.fromisoformat(text)


@dataclass
class ParseResult:
    records: list[PickupRecord] = field(default_factory=list)
    skipped: list[tuple[int, str]] = field(default_factory=list)  # (line, reason)


def parse_pickups(path: str | Path, lenient: bool = False) -> ParseResult:
    """Read a ``Date/Time,Lat,Lon[,...]`` CSV.

    Strict mode raises PickupParseError on the first bad row; lenient mode
    records (line, reason) and carries on.
    """
    out = ParseResult()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise PickupParseError(1, "missing header")
        cols = {name.strip(): k for k, name in enumerate(header)}
        missing = {"Date/Time", "Lat", "Lon"} - cols.keys()
        if missing:
            raise PickupParseError(1, f"header lacks {sorted(missing)}")
        i_ts, i_lat, i_lon = cols["Date/Time"], cols["Lat"], cols["Lon"]
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            try:
                lat, lon = float(row[i_lat]), float(row[i_lon])
                if not (math.isfinite(lat) and math.isfinite(lon)):
                    raise ValueError("non-finite coordinate")
                out.records.append(PickupRecord(parse_timestamp(row[i_ts]), lat, lon))
            except (ValueError, IndexError) as exc:
                if not lenient:
                    raise PickupParseError(line, str(exc)) from exc
                out.skipped.append((line, str(exc)))
    return out


def _minutes_into_window(ts: datetime, start_hour: float) -> float:
    midnight = datetime.combine(ts.date(), time())
    return (ts - midnight).total_seconds() / 60.0 - start_hour * 60.0


def ingest_pickups_csv(path: str | Path, bbox: GeoBoundingBox,
                       time_window: tuple[float, float] = (0.0, 12.0),
                       velocity: float = REAL_VELOCITY, lenient: bool = False) -> list[Worker]:
    """Pickups inside ``bbox`` with time-of-day in [h0, h1) become workers.

    Arrival is minutes since h0 on the pickup's day; ids follow file order.
    """
    h0, h1 = time_window
    if not h0 < h1:
        raise ValueError(f"empty time window {time_window}")
    parsed = parse_pickups(path, lenient=lenient)
    if parsed.skipped:
        log.warning("%s: skipped %d malformed rows", path, len(parsed.skipped))
    workers = []
    for rec in parsed.records:
        minutes = _minutes_into_window(rec.timestamp, h0)
        if not (0.0 <= minutes < (h1 - h0) * 60.0) or not bbox.contains(rec.lat, rec.lon):
            continue
        workers.append(Worker(len(workers), project_geo(rec.lat, rec.lon, bbox), minutes, velocity))
    if not workers:
        log.warning("%s: no pickups survived the bbox/time filter", path)
    return workers


def write_pickups_csv(workers, path: str | Path, bbox: GeoBoundingBox,
                      day: datetime, start_hour: float = 0.0) -> None:
    """Inverse of ingestion, for round-trips and fixtures."""
    origin = datetime.combine(day.date(), time()) + timedelta(hours=start_hour)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["Date/Time", "Lat", "Lon"])
        for w in workers:
            lat, lon = unproject_geo(w.loc, bbox)
            ts = origin + timedelta(minutes=w.arrival)
            out.writerow([f"{ts.month}/{ts.day}/{ts.year} {ts.hour}:{ts.minute:02d}:{ts.second:02d}",
                          repr(lat), repr(lon)])


def gen_real_tasks(bbox: GeoBoundingBox, n_tasks: int, release_window: tuple[float, float],
                   lifetime: float, seed: int, budget: float = 0.0) -> TaskBatch:
    """Uniform tasks over the projected bbox; times in minutes."""
    if n_tasks <= 0:
        raise ValueError("n_tasks must be positive")
    rng = np.random.default_rng(seed)
    ext = bbox.extent_km()
    xs = rng.uniform(0.0, ext.width, size=n_tasks)
    ys = rng.uniform(0.0, ext.height, size=n_tasks)
    rel = rng.uniform(release_window[0], release_window[1], size=n_tasks)
    return TaskBatch([Task(j, Location(float(x), float(y)), float(r), float(r) + lifetime)
                      for j, (x, y, r) in enumerate(zip(xs, ys, rel))], budget)


# --- instance serialisation ------------------------------------------------

def instance_to_dict(inst: Instance, provenance: dict | None = None) -> dict:
    return {
        "format": INSTANCE_FORMAT,
        "metric": inst.metric.value,
        "c_max": inst.c_max,
        "budget": inst.budget,
        "workers": [{"id": w.id, "x": w.loc.x, "y": w.loc.y, "arrival": w.arrival,
                     "velocity": w.velocity} for w in inst.workers],
        "tasks": [{"id": t.id, "x": t.loc.x, "y": t.loc.y, "release": t.release,
                   "deadline": t.deadline} for t in inst.tasks],
        "provenance": provenance or {},
    }


def instance_from_dict(d: dict) -> Instance:
    if d.get("format") != INSTANCE_FORMAT:
        raise ValueError(f"not a {INSTANCE_FORMAT} document")
    workers = [Worker(w["id"], Location(w["x"], w["y"]), w["arrival"], w["velocity"])
               for w in d["workers"]]
    tasks = [Task(t["id"], Location(t["x"], t["y"]), t["release"], t["deadline"])
             for t in d["tasks"]]
    return Instance(workers, TaskBatch(tasks, d["budget"]), CostMetric(d["metric"]), d["c_max"])


def dump_json(obj, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def save_instance(inst: Instance, path: str | Path, provenance: dict | None = None) -> None:
    dump_json(instance_to_dict(inst, provenance), path)


def load_instance(path: str | Path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))
