"""Network topology, dual-fiber links, and spectrum occupancy state.

Every link carries exactly two fibers (one SSMF, one ULL), each with its
own frequency-slot occupancy map. Slots are 0-based internally; reported
"FS used" figures are 1-based counts (highest occupied index + 1).

Spectrum mutation goes through :class:`Network.reserve` / ``release`` on a
single logical writer; occupancy stores owner codes rather than booleans so
that release and auditing can recover which lightpath holds which slots.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import OverlapError, UnknownDemandError, WindowRangeError

DEFAULT_TOTAL_SLOTS = 320
DEFAULT_ATTENUATION = {"SSMF": 0.20, "ULL": 0.166}  # dB/km


class FiberKind(str, Enum):
    SSMF = "SSMF"
    ULL = "ULL"


#: Fixed fiber axis order used by array-shaped spectrum queries.
FIBER_ORDER = (FiberKind.SSMF, FiberKind.ULL)

LinkKey = tuple[str, str]


def link_key(a: str, b: str) -> LinkKey:
    """Canonical undirected key for a node pair."""
    return (a, b) if a <= b else (b, a)


class SpectrumMap:
    """Per-fiber slot occupancy: 0 = free, positive code = owning lightpath."""

    FREE = 0

    def __init__(self, total_slots: int = DEFAULT_TOTAL_SLOTS):
        if total_slots <= 0:
            raise ValueError(f"total_slots must be positive, got {total_slots}")
        self.total_slots = int(total_slots)
        self.owners = np.zeros(self.total_slots, dtype=np.int64)

    def window_free(self, start: int, count: int) -> bool:
        """True iff all slots in [start, start+count) are free.

        Windows that fall outside the slot range report False rather than
        raising; count must be >= 1 and start >= 0.
        """
        if start < 0 or count < 1:
            raise ValueError("start must be >= 0 and count >= 1")
        if start + count > self.total_slots:
            return False
        return bool((self.owners[start : start + count] == self.FREE).all())

    def occupy(self, start: int, count: int, code: int) -> None:
        if start < 0 or count < 1 or start + count > self.total_slots:
            raise WindowRangeError(
                f"window [{start}, {start + count}) outside 0..{self.total_slots}"
            )
        window = self.owners[start : start + count]
        busy = np.flatnonzero(window != self.FREE)
        if busy.size:
            raise OverlapError(
                f"slots {sorted((start + busy).tolist())} already occupied"
            )
        window[:] = code

    def clear_code(self, code: int) -> int:
        """Free every slot owned by ``code``; returns the number cleared."""
        mask = self.owners == code
        cleared = int(mask.sum())
        self.owners[mask] = self.FREE
        return cleared

    @property
    def free_mask(self) -> np.ndarray:
        return self.owners == self.FREE

    def occupied_count(self) -> int:
        return int(np.count_nonzero(self.owners))

    def highest_used(self) -> int:
        """1-based count of the highest occupied slot; 0 when empty."""
        used = np.flatnonzero(self.owners != self.FREE)
        return int(used[-1]) + 1 if used.size else 0

    def windowed_free(self, count: int) -> np.ndarray:
        """Boolean vector over start slots: window [s, s+count) entirely free."""
        free = self.free_mask.astype(np.int32)
        if count > self.total_slots:
            return np.zeros(0, dtype=bool)
        csum = np.concatenate(([0], np.cumsum(free)))
        return (csum[count:] - csum[:-count]) == count


@dataclass
class Fiber:
    kind: FiberKind
    attenuation_db_per_km: float
    spectrum: SpectrumMap

    def __post_init__(self):
        if self.attenuation_db_per_km <= 0:
            raise ValueError("attenuation must be positive")


@dataclass
class Link:
    a: str
    b: str
    distance_km: float
    fibers: dict[FiberKind, Fiber]

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"link endpoints must differ, got {self.a!r} twice")
        if self.distance_km <= 0:
            raise ValueError(f"link {self.a}-{self.b}: distance must be positive")
        if set(self.fibers) != {FiberKind.SSMF, FiberKind.ULL}:
            raise ValueError(f"link {self.a}-{self.b}: exactly one fiber of each kind required")

    @property
    def key(self) -> LinkKey:
        return link_key(self.a, self.b)

    def fiber(self, kind: FiberKind) -> Fiber:
        return self.fibers[kind]

    def other_end(self, node: str) -> str:
        return self.b if node == self.a else self.a


@dataclass(frozen=True)
class Demand:
    """A traffic request between a node pair."""

    demand_id: str
    src: str
    dst: str
    bandwidth_gbps: float


@dataclass(frozen=True)
class LightpathAssignment:
    """An established lightpath: route, per-link fiber, format, and window."""

    demand_id: str
    route: tuple[str, ...]
    fiber_choice: tuple[FiberKind, ...]
    format_name: str
    start_slot: int
    fs_count: int

    def __post_init__(self):
        if len(self.route) < 2:
            raise ValueError("route needs at least two nodes")
        if len(self.fiber_choice) != len(self.route) - 1:
            raise ValueError("fiber_choice must cover every route link")
        if self.start_slot < 0 or self.fs_count < 1:
            raise ValueError("start_slot must be >= 0 and fs_count >= 1")

    def route_links(self) -> list[tuple[str, str]]:
        return [link_key(u, v) for u, v in zip(self.route, self.route[1:])]

    @property
    def end_slot(self) -> int:
        """1-based end index (start + count)."""
        return self.start_slot + self.fs_count


class Topology:
    """Undirected graph of dual-fiber links with live spectrum state.

    Invariants enforced at construction: links reference two distinct known
    nodes, at most one link per node pair, positive distances, exactly one
    SSMF and one ULL fiber per link.
    """

    def __init__(
        self,
        nodes: list[str],
        link_specs: list[dict],
        total_slots: int = DEFAULT_TOTAL_SLOTS,
        name: str = "",
    ):
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node names")
        self.name = name
        self.total_slots = int(total_slots)
        self.nodes: list[str] = sorted(nodes)
        self._node_set = set(self.nodes)
        self.links: list[Link] = []
        self._by_key: dict[LinkKey, Link] = {}
        self.adjacency: dict[str, list[Link]] = {n: [] for n in self.nodes}
        self._spec = {"nodes": list(nodes), "links": link_specs, "total_slots": total_slots, "name": name}
        for spec in link_specs:
            self._add_link(spec)

    def _add_link(self, spec: dict) -> None:
        a, b = spec["a"], spec["b"]
        if a not in self._node_set or b not in self._node_set:
            raise ValueError(f"link {a}-{b} references unknown node")
        key = link_key(a, b)
        if key in self._by_key:
            raise ValueError(f"duplicate link {a}-{b}")
        atten = dict(DEFAULT_ATTENUATION)
        atten.update(spec.get("attenuation_db_per_km", {}))
        fibers = {
            kind: Fiber(kind, float(atten[kind.value]), SpectrumMap(self.total_slots))
            for kind in FIBER_ORDER
        }
        link = Link(a, b, float(spec["distance_km"]), fibers)
        self.links.append(link)
        self._by_key[key] = link
        self.adjacency[a].append(link)
        self.adjacency[b].append(link)

    def link(self, a: str, b: str) -> Link:
        try:
            return self._by_key[link_key(a, b)]
        except KeyError:
            raise KeyError(f"no link between {a} and {b}") from None

    def has_link(self, a: str, b: str) -> bool:
        return link_key(a, b) in self._by_key

    def link_keys(self) -> list[LinkKey]:
        return [l.key for l in self.links]

    def total_distance_km(self) -> float:
        return sum(l.distance_km for l in self.links)

    def copy_empty(self) -> "Topology":
        """A structurally identical topology with all spectrum free."""
        return Topology.from_dict(self._spec)

    def to_dict(self) -> dict:
        return json.loads(json.dumps(self._spec))

    @classmethod
    def from_dict(cls, data: dict) -> "Topology":
        return cls(
            nodes=data["nodes"],
            link_specs=data["links"],
            total_slots=data.get("total_slots", DEFAULT_TOTAL_SLOTS),
            name=data.get("name", ""),
        )


def load_topology(path: str | Path) -> Topology:
    with open(path) as f:
        return Topology.from_dict(json.load(f))


def builtin_topology(name: str) -> Topology:
    """Load one of the shipped test networks (``n6s9`` or ``usnet``)."""
    from importlib import resources

    ref = resources.files("hus_eon.data").joinpath(f"{name}.json")
    return Topology.from_dict(json.loads(ref.read_text()))


class Network:
    """A topology plus the registry of live lightpath assignments.

    All spectrum mutation happens here, on one logical writer. Reads
    (window queries, plane construction) are side-effect free.
    """

    def __init__(self, topology: Topology):
        self.topology = topology
        self.assignments: dict[str, LightpathAssignment] = {}
        self._codes: dict[str, int] = {}
        self._next_code = 1

    @property
    def total_slots(self) -> int:
        return self.topology.total_slots

    def window_free(self, link: Link | LinkKey, kind: FiberKind, start: int, count: int) -> bool:
        if not isinstance(link, Link):
            link = self.topology.link(*link)
        return link.fiber(kind).spectrum.window_free(start, count)

    def reserve(self, assignment: LightpathAssignment) -> None:
        """Occupy the assignment's window on the chosen fiber of every route link.

        Atomic: on OverlapError / WindowRangeError no fiber is modified.
        """
        if assignment.demand_id in self.assignments:
            raise ValueError(f"demand {assignment.demand_id!r} already holds spectrum")
        if assignment.end_slot > self.total_slots:
            raise WindowRangeError(
                f"window [{assignment.start_slot}, {assignment.end_slot}) exceeds "
                f"{self.total_slots} slots"
            )
        maps = []
        for (u, v), kind in zip(
            zip(assignment.route, assignment.route[1:]), assignment.fiber_choice
        ):
            smap = self.topology.link(u, v).fiber(kind).spectrum
            if not smap.window_free(assignment.start_slot, assignment.fs_count):
                raise OverlapError(
                    f"{u}-{v} {kind.value}: window [{assignment.start_slot}, "
                    f"{assignment.end_slot}) not free"
                )
            maps.append(smap)
        code = self._next_code
        self._next_code += 1
        for smap in maps:
            smap.occupy(assignment.start_slot, assignment.fs_count, code)
        self._codes[assignment.demand_id] = code
        self.assignments[assignment.demand_id] = assignment

    def release(self, demand_id: str) -> LightpathAssignment:
        """Free every slot held by the demand; inverse of :meth:`reserve`."""
        if demand_id not in self.assignments:
            raise UnknownDemandError(f"no assignment for demand {demand_id!r}")
        assignment = self.assignments.pop(demand_id)
        code = self._codes.pop(demand_id)
        for (u, v), kind in zip(
            zip(assignment.route, assignment.route[1:]), assignment.fiber_choice
        ):
            cleared = self.topology.link(u, v).fiber(kind).spectrum.clear_code(code)
            assert cleared == assignment.fs_count, "occupancy drifted from registry"
        return assignment

    def code_of(self, demand_id: str) -> int:
        return self._codes[demand_id]

    def windowed_free(self, fs_count: int) -> np.ndarray:
        """Window availability per (link, fiber, start).

        Returns a bool array of shape (n_links, 2, n_starts) with fibers in
        :data:`FIBER_ORDER` and links in ``topology.links`` order.
        """
        n_starts = max(self.total_slots - fs_count + 1, 0)
        out = np.zeros((len(self.topology.links), 2, n_starts), dtype=bool)
        for li, link in enumerate(self.topology.links):
            for fi, kind in enumerate(FIBER_ORDER):
                out[li, fi, :] = link.fiber(kind).spectrum.windowed_free(fs_count)[:n_starts]
        return out

    def max_fs_used(self) -> int:
        """Largest 1-based slot index in use on any fiber of any link."""
        best = 0
        for link in self.topology.links:
            for kind in FIBER_ORDER:
                best = max(best, link.fiber(kind).spectrum.highest_used())
        return best

    def occupied_total(self) -> int:
        return sum(
            link.fiber(kind).spectrum.occupied_count()
            for link in self.topology.links
            for kind in FIBER_ORDER
        )

    def fiber_utilization(self) -> dict[str, float]:
        return {
            f"{link.a}-{link.b}:{kind.value}": link.fiber(kind).spectrum.occupied_count()
            / self.total_slots
            for link in self.topology.links
            for kind in FIBER_ORDER
        }
