"""Path OSNR evaluation, modulation selection, and required-FS computation.

OSNR is handled as linear reciprocals internally (per-link contributions add
along a path); decibel values appear only at I/O boundaries. The OSNR source
is pluggable: either a per-(link, fiber) reciprocal table summed over the
route, or a direct per-(route, fiber-choice) lookup used for scenario
replays.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    EmptyRouteError,
    InvalidBandwidthError,
    InvalidParamsError,
    MissingEntryError,
)
from .netmodel import FiberKind, Link, LinkKey, Topology, link_key

PLANCK_J_S = 6.62607015e-34


@dataclass(frozen=True)
class ModulationFormat:
    name: str
    fs_capacity_gbps: float
    osnr_threshold_db: float

    @property
    def threshold_reciprocal(self) -> float:
        """Linear reciprocal of the OSNR threshold."""
        return 10.0 ** (-self.osnr_threshold_db / 10.0)


class ModulationTable:
    """Ordered modulation catalogue, descending spectral efficiency."""

    def __init__(self, formats: tuple[ModulationFormat, ...]):
        if not formats:
            raise ValueError("modulation table must not be empty")
        caps = [f.fs_capacity_gbps for f in formats]
        thrs = [f.osnr_threshold_db for f in formats]
        if sorted(caps, reverse=True) != caps or len(set(caps)) != len(caps):
            raise ValueError("capacities must be strictly decreasing")
        if sorted(thrs, reverse=True) != thrs or len(set(thrs)) != len(thrs):
            raise ValueError("thresholds must be strictly decreasing")
        self.formats = formats
        self._by_name = {f.name: f for f in formats}

    def __iter__(self):
        return iter(self.formats)

    def __len__(self):
        return len(self.formats)

    def by_name(self, name: str) -> ModulationFormat:
        return self._by_name[name]

    def best_format(self, osnr_db: float) -> ModulationFormat | None:
        """Highest-capacity format whose threshold the OSNR meets (>=)."""
        for fmt in self.formats:
            if osnr_db >= fmt.osnr_threshold_db:
                return fmt
        return None


#: Capacities follow the 25 Gb/s-per-level ladder; thresholds per the
#: transmission catalogue in README.md.
DEFAULT_MODULATIONS = ModulationTable(
    (
        ModulationFormat("64-QAM", 150.0, 24.6),
        ModulationFormat("32-QAM", 125.0, 21.6),
        ModulationFormat("16-QAM", 100.0, 18.6),
        ModulationFormat("8-QAM", 75.0, 16.0),
        ModulationFormat("QPSK", 50.0, 12.0),
        ModulationFormat("BPSK", 25.0, 9.0),
    )
)


def required_fs(bandwidth_gbps: float, fmt: ModulationFormat) -> int:
    """Number of frequency slots to carry the bandwidth at the given format."""
    if bandwidth_gbps <= 0:
        raise InvalidBandwidthError(f"bandwidth must be positive, got {bandwidth_gbps}")
    return math.ceil(bandwidth_gbps / fmt.fs_capacity_gbps)


@dataclass(frozen=True)
class PhyParams:
    """Amplified-span noise model parameters (ASE only).

    Spans are equally spaced and no longer than ``max_span_km``. Defaults
    put multi-hop path OSNRs in the 15-30 dB band where format choice is
    sensitive to the fiber type; they are artifact defaults, overridable
    from config.
    """

    noise_figure_db: float = 7.0
    launch_power_dbm: float = -16.0
    center_frequency_hz: float = 193.4e12
    ref_bandwidth_hz: float = 12.5e9
    max_span_km: float = 80.0


def span_count(distance_km: float, max_span_km: float = 80.0) -> int:
    if distance_km <= 0 or max_span_km <= 0:
        raise InvalidParamsError("distances must be positive")
    return math.ceil(distance_km / max_span_km)


def link_reciprocal_osnr(
    distance_km: float, attenuation_db_per_km: float, params: PhyParams = PhyParams()
) -> float:
    """Reciprocal linear OSNR contributed by one amplified fiber of a link.

    Each of the equally spaced spans contributes ASE noise
    h*nu*F*(G-1)*B_ref against the launch power, with the amplifier gain G
    exactly compensating the span loss.
    """
    if distance_km <= 0 or attenuation_db_per_km <= 0:
        raise InvalidParamsError("distance and attenuation must be positive")
    if params.launch_power_dbm is None or params.ref_bandwidth_hz <= 0:
        raise InvalidParamsError("bad physical parameters")
    spans = span_count(distance_km, params.max_span_km)
    span_len = distance_km / spans
    gain_linear = 10.0 ** (attenuation_db_per_km * span_len / 10.0)
    nf_linear = 10.0 ** (params.noise_figure_db / 10.0)
    launch_w = 1e-3 * 10.0 ** (params.launch_power_dbm / 10.0)
    ase_w = (
        PLANCK_J_S
        * params.center_frequency_hz
        * nf_linear
        * (gain_linear - 1.0)
        * params.ref_bandwidth_hz
    )
    return spans * ase_w / launch_w


def default_link_osnr(link: Link, kind: FiberKind, params: PhyParams = PhyParams()) -> float:
    """Reciprocal OSNR of one fiber of a topology link under the ASE model."""
    return link_reciprocal_osnr(
        link.distance_km, link.fiber(kind).attenuation_db_per_km, params
    )


class LinkOsnrTable:
    """Per-(link, fiber) reciprocal OSNR contributions.

    Invariant: on every link the ULL reciprocal never exceeds the SSMF one
    (ULL is never the worse fiber).
    """

    def __init__(self, entries: dict[tuple[LinkKey, FiberKind], float]):
        self._r = dict(entries)
        for (key, kind), r in self._r.items():
            if r < 0:
                raise ValueError(f"negative reciprocal OSNR for {key} {kind.value}")
        for key in {k for k, _ in self._r}:
            r_s = self._r.get((key, FiberKind.SSMF))
            r_u = self._r.get((key, FiberKind.ULL))
            if r_s is not None and r_u is not None and r_u > r_s:
                raise ValueError(f"link {key}: ULL reciprocal exceeds SSMF reciprocal")

    def get(self, link: Link | LinkKey, kind: FiberKind) -> float:
        key = link.key if isinstance(link, Link) else link_key(*link)
        try:
            return self._r[(key, kind)]
        except KeyError:
            raise MissingEntryError(f"no OSNR entry for link {key} {kind.value}") from None

    def ratio(self, link: Link | LinkKey) -> float:
        """Linear per-link OSNR ratio ULL/SSMF, i.e. r_SSMF / r_ULL."""
        r_u = self.get(link, FiberKind.ULL)
        r_s = self.get(link, FiberKind.SSMF)
        if r_u == 0:
            return math.inf
        return r_s / r_u

    @classmethod
    def from_physics(cls, topology: Topology, params: PhyParams = PhyParams()) -> "LinkOsnrTable":
        entries = {
            (link.key, kind): default_link_osnr(link, kind, params)
            for link in topology.links
            for kind in (FiberKind.SSMF, FiberKind.ULL)
        }
        return cls(entries)

    @classmethod
    def from_rows(cls, rows: list[dict]) -> "LinkOsnrTable":
        entries = {}
        for row in rows:
            a, b = row["link"]
            entries[(link_key(a, b), FiberKind(row["fiber"]))] = float(row["reciprocal_osnr"])
        return cls(entries)

    @classmethod
    def from_json(cls, path: str | Path) -> "LinkOsnrTable":
        with open(path) as f:
            return cls.from_rows(json.load(f))

    def to_rows(self) -> list[dict]:
        return [
            {"link": list(key), "fiber": kind.value, "reciprocal_osnr": r}
            for (key, kind), r in sorted(self._r.items(), key=lambda kv: (kv[0][0], kv[0][1].value))
        ]


def reciprocal_to_db(reciprocal: float) -> float:
    if reciprocal <= 0:
        return math.inf
    return -10.0 * math.log10(reciprocal)


def db_to_reciprocal(osnr_db: float) -> float:
    return 10.0 ** (-osnr_db / 10.0)


class ReciprocalSumOsnr:
    """OSNR provider that sums per-link reciprocals along the route.

    Results depend only on the static table, so evaluations are memoized
    per (route, fiber choice).
    """

    def __init__(self, topology: Topology, table: LinkOsnrTable):
        self.topology = topology
        self.table = table
        self._cache: dict[tuple, float] = {}

    def path_reciprocal(self, route: tuple[str, ...], kinds: tuple[FiberKind, ...]) -> float:
        if len(route) < 2:
            raise EmptyRouteError("route must contain at least one link")
        if len(kinds) != len(route) - 1:
            raise ValueError("fiber choice must cover every route link")
        key = (route, kinds)
        hit = self._cache.get(key)
        if hit is None:
            hit = sum(
                self.table.get(self.topology.link(u, v), kind)
                for (u, v), kind in zip(zip(route, route[1:]), kinds)
            )
            self._cache[key] = hit
        return hit

    def path_osnr_db(self, route: tuple[str, ...], kinds: tuple[FiberKind, ...]) -> float:
        return reciprocal_to_db(self.path_reciprocal(tuple(route), tuple(kinds)))


class PathLookupOsnr:
    """OSNR provider backed by explicit (route, fiber-choice) -> dB entries.

    Entries are stored for both orientations of the route. Queries for
    unknown combinations raise MissingEntryError.
    """

    def __init__(self, entries: dict[tuple[tuple[str, ...], tuple[FiberKind, ...]], float]):
        self._entries: dict[tuple, float] = {}
        for (route, kinds), db in entries.items():
            self.add(route, kinds, db)

    def add(self, route: tuple[str, ...], kinds: tuple[FiberKind, ...], osnr_db: float) -> None:
        if osnr_db <= 0:
            raise ValueError("lookup OSNR values must be positive dB")
        route = tuple(route)
        kinds = tuple(kinds)
        self._entries[(route, kinds)] = osnr_db
        self._entries[(route[::-1], kinds[::-1])] = osnr_db

    def path_osnr_db(self, route: tuple[str, ...], kinds: tuple[FiberKind, ...]) -> float:
        if len(route) < 2:
            raise EmptyRouteError("route must contain at least one link")
        try:
            return self._entries[(tuple(route), tuple(kinds))]
        except KeyError:
            names = "/".join(k.value for k in kinds)
            raise MissingEntryError(f"no OSNR entry for route {route} via {names}") from None

    @classmethod
    def from_rows(cls, rows: list[dict]) -> "PathLookupOsnr":
        provider = cls({})
        for row in rows:
            provider.add(
                tuple(row["route"]),
                tuple(FiberKind(k) for k in row["fibers"]),
                float(row["osnr_db"]),
            )
        return provider

    @classmethod
    def from_json(cls, path: str | Path) -> "PathLookupOsnr":
        with open(path) as f:
            return cls.from_rows(json.load(f))


#: Either provider satisfies this informal protocol: path_osnr_db(route, kinds).
OsnrProvider = ReciprocalSumOsnr | PathLookupOsnr


def path_osnr(
    route: tuple[str, ...], kinds: tuple[FiberKind, ...], provider: OsnrProvider
) -> float:
    """Path OSNR in dB for a concrete route and per-link fiber choice."""
    return provider.path_osnr_db(tuple(route), tuple(kinds))


def best_format(osnr_db: float, table: ModulationTable = DEFAULT_MODULATIONS) -> ModulationFormat | None:
    return table.best_format(osnr_db)
