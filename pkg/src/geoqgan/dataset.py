"""Training-corpus construction from airport coordinates.

Ingests the public 14-column airport table (latitude in column 7,
longitude in column 8, optional type in column 13), rejection-samples
unique unordered 4-subsets, computes the six haversine geodesics per
quadruple, drops quadruples containing an edge shorter than the minimum,
and normalizes each sextuple to unit sum. A bundled synthetic generator
(clustered points on the sphere) stands in for the real table when no
snapshot is available.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError

log = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0
MIN_EDGE_KM = 185.2  # ~100 nautical miles

# vertex pairs per edge slot, order AB, AC, AD, BC, BD, CD
EDGE_VERTEX_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class Airport:
    ident: str
    lat: float
    lon: float


@dataclass(frozen=True)
class QuadrupleRecord:
    ids: tuple[str, str, str, str]
    raw_km: tuple[float, ...]
    weights: tuple[float, ...]


def _check_coords(lat: float, lon: float) -> bool:
    return (math.isfinite(lat) and math.isfinite(lon)
            and -90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0)


def haversine_km(p: Airport, q: Airport) -> float:
    """Great-circle distance on the mean-radius sphere."""
    for a in (p, q):
        if not _check_coords(a.lat, a.lon):
            raise InputError(f"coordinates out of range for {a.ident}: ({a.lat}, {a.lon})")
    phi1, phi2 = math.radians(p.lat), math.radians(q.lat)
    dphi = phi2 - phi1
    dlam = math.radians(q.lon - p.lon)
    h = math.sin(0.5 * dphi) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(0.5 * dlam) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def ingest_airports(path) -> list[Airport]:
    """Parse the airport table, skipping malformed rows with a logged warning."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8", errors="replace")
    except OSError as exc:
        raise InputError(f"cannot read airport table {path}: {exc}") from exc
    airports: list[Airport] = []
    seen: set[str] = set()
    skipped = 0
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                ident = row[0].strip()
                lat = float(row[6])
                lon = float(row[7])
            except (IndexError, ValueError):
                skipped += 1
                log.warning("skipping malformed airport row %d", lineno)
                continue
            if not ident or not _check_coords(lat, lon):
                skipped += 1
                log.warning("skipping airport row %d (bad identifier/coordinates)", lineno)
                continue
            if len(row) >= 13 and row[12].strip() and row[12].strip() != "airport":
                continue  # heliports, stations, ... in the extended layout
            if ident in seen:
                continue
            seen.add(ident)
            airports.append(Airport(ident, lat, lon))
    if skipped:
        log.warning("ingest: skipped %d malformed rows, kept %d airports", skipped, len(airports))
    return airports


# rough landmass centers (lat, lon, relative weight); airports cluster on
# continents, which shapes the four-point statistics of sampled quadruples
_SYNTH_CENTERS = (
    (48.0, 10.0, 3.0),     # Europe
    (35.0, 115.0, 2.5),    # East Asia
    (22.0, 78.0, 1.5),     # South Asia
    (40.0, -88.0, 3.0),    # North America (east)
    (42.0, -115.0, 1.5),   # North America (west)
    (-12.0, -55.0, 1.5),   # South America
    (8.0, 5.0, 1.0),       # West Africa
    (-22.0, 26.0, 1.0),    # Southern Africa
    (-26.0, 140.0, 1.0),   # Australia
    (27.0, 47.0, 1.0),     # Middle East
    (5.0, 105.0, 1.5),     # Southeast Asia
    (58.0, 60.0, 1.0),     # Russia
)


def synthetic_airports(n: int, seed: int = 0, cluster_deg: float = 10.0) -> list[Airport]:
    """Sphere points scattered around fixed landmass-like centers, mimicking
    how real airports concentrate on continents."""
    rng = np.random.default_rng([seed, 0x5EED])
    weights = np.array([c[2] for c in _SYNTH_CENTERS])
    weights = weights / weights.sum()
    airports = []
    spread = math.radians(cluster_deg)
    for i in range(n):
        clat, clon, _ = _SYNTH_CENTERS[rng.choice(len(_SYNTH_CENTERS), p=weights)]
        # tangent-plane Gaussian scatter around the center
        dlat = math.degrees(spread * rng.standard_normal())
        dlon = math.degrees(spread * rng.standard_normal()) / max(0.2, math.cos(math.radians(clat)))
        lat = min(89.9, max(-89.9, clat + dlat))
        lon = (clon + dlon + 180.0) % 360.0 - 180.0
        airports.append(Airport(f"SYN{i:06d}", lat, lon))
    return airports


def quadruple_distances(airports: list[Airport]) -> np.ndarray:
    """Six pairwise distances in edge order for four airports labeled A..D."""
    return np.array([haversine_km(airports[u], airports[v]) for u, v in EDGE_VERTEX_PAIRS])


def build_dataset(airports: list[Airport], n_quadruples: int = 10000,
                  min_edge_km: float = MIN_EDGE_KM, seed: int = 0) -> list[QuadrupleRecord]:
    """Rejection-sample unique valid quadruples; deterministic given seed."""
    if len(airports) < 4:
        raise InputError(f"need at least 4 airports, got {len(airports)}")
    rng = np.random.default_rng([seed, 0xDA7A])
    seen: set[tuple[str, ...]] = set()
    records: list[QuadrupleRecord] = []
    failures = 0
    while len(records) < n_quadruples:
        if failures > 20000:  # consecutive-failure cap; resets on every acceptance
            raise InputError(
                f"insufficient distinct valid quadruples: got {len(records)} of {n_quadruples}")
        picks = rng.choice(len(airports), size=4, replace=False)
        quad = sorted((airports[i] for i in picks), key=lambda a: a.ident)
        key = tuple(a.ident for a in quad)
        if key in seen:
            failures += 1
            continue
        dists = quadruple_distances(quad)
        if dists.min() < min_edge_km:
            failures += 1
            continue
        seen.add(key)
        weights = dists / dists.sum()
        records.append(QuadrupleRecord(key, tuple(dists.tolist()), tuple(weights.tolist())))
        failures = 0
    return records


def dataset_weights(records: list[QuadrupleRecord]) -> np.ndarray:
    return np.array([r.weights for r in records])


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

_CSV_HEADER = (["id_a", "id_b", "id_c", "id_d"]
               + [f"km_{e.lower()}" for e in ("AB", "AC", "AD", "BC", "BD", "CD")]
               + [f"w_{e.lower()}" for e in ("AB", "AC", "AD", "BC", "BD", "CD")])


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def save_dataset(records: list[QuadrupleRecord], csv_path, provenance: dict) -> Path:
    """Write the dataset CSV plus a JSON sidecar; returns the sidecar path."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for r in records:
            writer.writerow(list(r.ids)
                            + [repr(float(x)) for x in r.raw_km]
                            + [repr(float(x)) for x in r.weights])
    sidecar = csv_path.with_suffix(".json")
    meta = {"format": "geoqgan-dataset", "version": 1, "count": len(records)}
    meta.update(provenance)
    with open(sidecar, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar


def load_dataset(csv_path) -> np.ndarray:
    """Load the normalized weight matrix (N, 6) from a dataset CSV."""
    csv_path = Path(csv_path)
    try:
        fh = open(csv_path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read dataset {csv_path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _CSV_HEADER:
            raise InputError(f"{csv_path} is not a geoqgan dataset CSV")
        weights = [[float(x) for x in row[10:16]] for row in reader]
    if not weights:
        raise InputError(f"dataset {csv_path} is empty")
    return np.array(weights)
