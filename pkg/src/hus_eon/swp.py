"""Spectrum window planes and shortest-path search over them.

A plane is the topology filtered to links where a given contiguous slot
window [start, start+fs_count) is free on at least one strategy-selected
fiber. Routing on a plane guarantees spectrum continuity and contiguity by
construction. Planes for a demand are visited in ascending start order and
the search stops at the first feasible one (first fit).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

from .netmodel import FiberKind, LinkKey, Network, Topology

#: Maps a link and the set of fibers with the window free to the fiber set
#: recorded on the plane; an empty result means the virtual link is absent.
PlaneView = Callable[["object", frozenset[FiberKind]], frozenset[FiberKind]]


@dataclass(frozen=True)
class SpectrumWindowPlane:
    start_slot: int
    fs_count: int
    virtual_links: Mapping[LinkKey, frozenset[FiberKind]]

    def present(self, key: LinkKey) -> bool:
        return bool(self.virtual_links.get(key))


def iter_planes(net: Network, fs_count: int, view: PlaneView) -> Iterator[SpectrumWindowPlane]:
    """Yield planes lazily for every start slot, ascending."""
    windowed = net.windowed_free(fs_count)
    links = net.topology.links
    n_starts = windowed.shape[2]
    for start in range(n_starts):
        virtual: dict[LinkKey, frozenset[FiberKind]] = {}
        for li, link in enumerate(links):
            free = frozenset(
                kind
                for fi, kind in enumerate((FiberKind.SSMF, FiberKind.ULL))
                if windowed[li, fi, start]
            )
            mapped = view(link, free)
            if mapped:
                virtual[link.key] = mapped
        yield SpectrumWindowPlane(start, fs_count, virtual)


def create_swp_list(net: Network, fs_count: int, view: PlaneView) -> list[SpectrumWindowPlane]:
    """Materialize the full plane list (beta - fs_count + 1 planes)."""
    if not 1 <= fs_count <= net.total_slots:
        raise ValueError(f"fs_count must be in 1..{net.total_slots}")
    return list(iter_planes(net, fs_count, view))


def dijkstra_route(
    topology: Topology,
    src: str,
    dst: str,
    allowed: set[LinkKey] | None = None,
) -> tuple[str, ...] | None:
    """Minimum-distance route over the allowed links.

    Ties on total distance break toward the lexicographically smallest node
    sequence, which makes route choice deterministic.
    """
    if src == dst:
        raise ValueError("src and dst must differ")
    if src not in topology.adjacency or dst not in topology.adjacency:
        raise KeyError("src/dst not in topology")
    # Heap entries order by (distance, node sequence); the tuple ordering is
    # preserved under path extension, so the first pop per node is optimal.
    heap: list[tuple[float, tuple[str, ...]]] = [(0.0, (src,))]
    done: set[str] = set()
    while heap:
        dist, path = heapq.heappop(heap)
        node = path[-1]
        if node in done:
            continue
        done.add(node)
        if node == dst:
            return path
        for link in topology.adjacency[node]:
            if allowed is not None and link.key not in allowed:
                continue
            nxt = link.other_end(node)
            if nxt in done:
                continue
            heapq.heappush(heap, (dist + link.distance_km, path + (nxt,)))
    return None


def shortest_route(
    topology: Topology, plane: SpectrumWindowPlane, src: str, dst: str
) -> tuple[str, ...] | None:
    """Shortest route across one plane's present virtual links."""
    allowed = {key for key, fibers in plane.virtual_links.items() if fibers}
    return dijkstra_route(topology, src, dst, allowed)
