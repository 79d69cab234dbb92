"""Top-level lightpath provisioning: SWP-based search and the SP baseline.

Formats are tried in descending spectral efficiency; when two consecutive
formats need the same number of slots the higher one is skipped (applied
transitively, so runs of equal-FS formats collapse to the lowest). Within a
format, window planes are scanned in ascending start order and the first
plane whose route passes fiber selection and OSNR validation wins.

A lookup-mode OSNR provider that has no entry for a candidate (route,
fiber-choice) fails that candidate rather than aborting the search: absence
of an entry means the path cannot be certified against the threshold.
"""

from __future__ import annotations

import numpy as np

from .errors import MissingEntryError
from .netmodel import (
    FIBER_ORDER,
    Demand,
    FiberKind,
    LightpathAssignment,
    Network,
)
from .phy import (
    ModulationFormat,
    ModulationTable,
    OsnrProvider,
    ReciprocalSumOsnr,
    required_fs,
)
from .strategies import (
    OaStrategy,
    RandomStrategy,
    SingleFiberStrategy,
    Strategy,
    SuStrategy,
    UffStrategy,
    strategy_view_oa,
    strategy_view_random,
    su_enumerate_and_pick,
)
from .swp import dijkstra_route


def iter_format_steps(table: ModulationTable, bandwidth_gbps: float):
    """Yield (format, fs_count) pairs in trial order with the equal-FS skip."""
    formats = table.formats
    i = 0
    while i < len(formats):
        fs = required_fs(bandwidth_gbps, formats[i])
        while i + 1 < len(formats) and required_fs(bandwidth_gbps, formats[i + 1]) == fs:
            i += 1
        yield formats[i], fs
        i += 1


def _presence(windowed: np.ndarray, strategy: Strategy, phase) -> np.ndarray:
    """Per-(link, start) plane membership for the strategy/phase."""
    if isinstance(strategy, (UffStrategy, SingleFiberStrategy)):
        fi = FIBER_ORDER.index(phase)
        return windowed[:, fi, :]
    return windowed[:, 0, :] | windowed[:, 1, :]


def _free_set(windowed: np.ndarray, li: int, start: int) -> frozenset[FiberKind]:
    return frozenset(
        kind for fi, kind in enumerate(FIBER_ORDER) if windowed[li, fi, start]
    )


def _try_window(
    net: Network,
    demand: Demand,
    route: tuple[str, ...],
    route_links,
    start: int,
    fs: int,
    fmt: ModulationFormat,
    strategy: Strategy,
    phase,
    table: ModulationTable,
    provider: OsnrProvider,
    rng: np.random.Generator | None,
    windowed: np.ndarray,
    link_index: dict,
    fiber_stats: dict | None = None,
) -> tuple[FiberKind, ...] | None:
    """Fix the per-link fibers for a candidate (route, window) and validate."""
    free_sets = [
        _free_set(windowed, link_index[link.key], start) for link in route_links
    ]

    if isinstance(strategy, SuStrategy):
        picked = su_enumerate_and_pick(
            net, route, free_sets, fs, fmt, demand.bandwidth_gbps, provider,
            table, strategy, fiber_stats,
        )
        return picked[0] if picked else None

    kinds: list[FiberKind] = []
    for link, free in zip(route_links, free_sets):
        if isinstance(strategy, (UffStrategy, SingleFiberStrategy)):
            choice = phase if phase in free else None
        elif isinstance(strategy, RandomStrategy):
            choice = strategy_view_random(free, rng)
        elif isinstance(strategy, OaStrategy):
            choice = strategy_view_oa(link, free, strategy.osnr_table, strategy.alpha)
        else:
            raise TypeError(f"unknown strategy {strategy!r}")
        if choice is None:
            return None
        kinds.append(choice)
    try:
        osnr_db = provider.path_osnr_db(route, tuple(kinds))
    except MissingEntryError:
        return None
    if osnr_db < fmt.osnr_threshold_db:
        return None
    return tuple(kinds)


def _segments(windowed: np.ndarray) -> list[tuple[int, int]]:
    """Runs of start slots over which every fiber's availability is constant.

    Planes inside one segment are identical, so route search and
    deterministic fiber selection need to run only once per segment.
    """
    n_starts = windowed.shape[2]
    cols = windowed.reshape(-1, n_starts)
    change = np.any(cols[:, 1:] != cols[:, :-1], axis=0)
    bounds = [0, *(np.flatnonzero(change) + 1), n_starts]
    return list(zip(bounds, bounds[1:]))


def _cached_route(
    net: Network, src: str, dst: str, mask: np.ndarray, link_keys
) -> tuple[str, ...] | None:
    """Route lookup memoized on the allowed-link mask.

    The mask fully determines the filtered graph (the topology is static),
    so entries stay valid across spectrum mutations for the network's life.
    """
    cache = getattr(net, "_route_cache", None)
    if cache is None:
        cache = net._route_cache = {}
    key = (src, dst, mask.tobytes())
    if key in cache:
        return cache[key]
    allowed = {link_keys[i] for i in np.flatnonzero(mask)}
    route = dijkstra_route(net.topology, src, dst, allowed)
    cache[key] = route
    return route


def _route_can_meet(
    route: tuple[str, ...], fmt: ModulationFormat, provider: OsnrProvider, phase
) -> bool:
    """Upper-bound prune: can any reachable fiber scheme meet the format?

    Single-fiber phases (UFF, forced) check their exact scheme; otherwise
    all-ULL bounds every scheme from above (the table guarantees
    r_ULL <= r_SSMF per link). Only reciprocal-sum providers can be bounded;
    lookup providers conservatively answer yes.
    """
    if not isinstance(provider, ReciprocalSumOsnr):
        return True
    kinds = (phase if phase is not None else FiberKind.ULL,) * (len(route) - 1)
    return provider.path_osnr_db(route, kinds) >= fmt.osnr_threshold_db


def _scan_planes(
    net: Network,
    demand: Demand,
    fmt: ModulationFormat,
    fs: int,
    strategy: Strategy,
    phase,
    table: ModulationTable,
    provider: OsnrProvider,
    rng: np.random.Generator | None,
) -> LightpathAssignment | None:
    windowed = net.windowed_free(fs)
    if windowed.shape[2] == 0:
        return None
    presence = _presence(windowed, strategy, phase)
    link_keys = net.topology.link_keys()
    link_index = {key: i for i, key in enumerate(link_keys)}
    route_links_cache: dict[tuple, list] = {}
    route_alive: dict[tuple, bool] = {}
    fiber_stats: dict = {}
    randomized = isinstance(strategy, RandomStrategy)
    for seg_start, seg_end in _segments(windowed):
        route = _cached_route(net, demand.src, demand.dst, presence[:, seg_start], link_keys)
        if route is None:
            continue
        alive = route_alive.get(route)
        if alive is None:
            alive = route_alive[route] = _route_can_meet(route, fmt, provider, phase)
        if not alive:
            continue
        route_links = route_links_cache.get(route)
        if route_links is None:
            route_links = [net.topology.link(u, v) for u, v in zip(route, route[1:])]
            route_links_cache[route] = route_links
        # The random strategy redraws its per-link choice on every plane of
        # the segment; deterministic strategies resolve once.
        starts = range(seg_start, seg_end) if randomized else (seg_start,)
        for start in starts:
            kinds = _try_window(
                net, demand, route, route_links, start, fs, fmt, strategy, phase,
                table, provider, rng, windowed, link_index, fiber_stats,
            )
            if kinds is not None:
                return LightpathAssignment(
                    demand.demand_id, route, kinds, fmt.name, start, fs
                )
    return None


def provision_swp(
    demand: Demand,
    net: Network,
    strategy: Strategy,
    table: ModulationTable,
    provider: OsnrProvider,
    rng: np.random.Generator | None = None,
) -> LightpathAssignment | None:
    """Provision one demand with the SWP-based search; None means blocked.

    On success the assignment is reserved on the network before returning.
    """
    if demand.bandwidth_gbps <= 0:
        raise ValueError("demand bandwidth must be positive")
    for phase in strategy.phases:
        for fmt, fs in iter_format_steps(table, demand.bandwidth_gbps):
            if fs > net.total_slots:
                continue
            assignment = _scan_planes(
                net, demand, fmt, fs, strategy, phase, table, provider, rng
            )
            if assignment is not None:
                net.reserve(assignment)
                return assignment
    return None


def provision_sp(
    demand: Demand,
    net: Network,
    strategy: Strategy,
    table: ModulationTable,
    provider: OsnrProvider,
    rng: np.random.Generator | None = None,
) -> LightpathAssignment | None:
    """Baseline: fix the route to the full-topology shortest path, then scan
    formats and start slots first-fit on that route only."""
    if demand.bandwidth_gbps <= 0:
        raise ValueError("demand bandwidth must be positive")
    route = dijkstra_route(net.topology, demand.src, demand.dst)
    if route is None:
        return None
    link_index = {key: i for i, key in enumerate(net.topology.link_keys())}
    route_links = [net.topology.link(u, v) for u, v in zip(route, route[1:])]
    route_rows = [link_index[link.key] for link in route_links]
    randomized = isinstance(strategy, RandomStrategy)
    for phase in strategy.phases:
        for fmt, fs in iter_format_steps(table, demand.bandwidth_gbps):
            if fs > net.total_slots:
                continue
            if not _route_can_meet(route, fmt, provider, phase):
                continue
            windowed = net.windowed_free(fs)
            if windowed.shape[2] == 0:
                continue
            fiber_stats: dict = {}
            for seg_start, seg_end in _segments(windowed[route_rows]):
                starts = range(seg_start, seg_end) if randomized else (seg_start,)
                for start in starts:
                    kinds = _try_window(
                        net, demand, route, route_links, start, fs, fmt, strategy,
                        phase, table, provider, rng, windowed, link_index, fiber_stats,
                    )
                    if kinds is not None:
                        assignment = LightpathAssignment(
                            demand.demand_id, route, kinds, fmt.name, start, fs
                        )
                        net.reserve(assignment)
                        return assignment
    return None
