"""Fiber-selection strategies: Random, UFF, OA, SU, and forced single-fiber.

Random and UFF apply to both traffic modes, OA to static only, SU to
dynamic only. Each strategy decides which fiber(s) of a link map onto a
spectrum window plane; a link with neither fiber free is absent from the
plane regardless of strategy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .netmodel import FIBER_ORDER, FiberKind, Link, Network
from .phy import (
    LinkOsnrTable,
    ModulationFormat,
    ModulationTable,
    OsnrProvider,
    required_fs,
)
from .errors import MissingEntryError

_NO_PHASE = (None,)


@dataclass(frozen=True)
class RandomStrategy:
    """Pick uniformly between the fibers that have the window free."""

    name: str = "random"
    static_ok: bool = True
    dynamic_ok: bool = True
    phases: tuple = _NO_PHASE


@dataclass(frozen=True)
class UffStrategy:
    """ULL-first: try every format on ULL-only planes, then redo on SSMF."""

    name: str = "uff"
    static_ok: bool = True
    dynamic_ok: bool = True
    phases: tuple = (FiberKind.ULL, FiberKind.SSMF)


@dataclass(frozen=True)
class OaStrategy:
    """OSNR-aware: prefer ULL when its per-link OSNR gain exceeds alpha.

    The comparison uses the linear per-link OSNR ratio ULL/SSMF, which
    equals r_SSMF / r_ULL on the reciprocal table. Static mode only.
    """

    alpha: float
    osnr_table: LinkOsnrTable | None = None
    name: str = "oa"
    static_ok: bool = True
    dynamic_ok: bool = False
    phases: tuple = _NO_PHASE

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


@dataclass(frozen=True)
class SuStrategy:
    """Spectrum-usage based scheme scoring over all 2^n fiber choices.

    Dynamic mode only; weights parameterize the cost formula's omega factor.
    """

    omega_ull_gain: float = 1.2
    omega_ull_no_gain: float = 0.8
    omega_ssmf: float = 1.0
    name: str = "su"
    static_ok: bool = False
    dynamic_ok: bool = True
    phases: tuple = _NO_PHASE

    def __post_init__(self):
        if min(self.omega_ull_gain, self.omega_ull_no_gain, self.omega_ssmf) <= 0:
            raise ValueError("omega weights must be positive")


@dataclass(frozen=True)
class SingleFiberStrategy:
    """Restrict provisioning to one fiber kind (diagnostics and baselines)."""

    kind: FiberKind
    static_ok: bool = True
    dynamic_ok: bool = True

    @property
    def name(self) -> str:
        return f"only-{self.kind.value.lower()}"

    @property
    def phases(self) -> tuple:
        return (self.kind,)


Strategy = RandomStrategy | UffStrategy | OaStrategy | SuStrategy | SingleFiberStrategy


def strategy_view_random(free: frozenset[FiberKind], rng: np.random.Generator) -> FiberKind | None:
    """Both fibers free: uniform pick; one free: that one; none: absent."""
    if not free:
        return None
    if len(free) == 1:
        return next(iter(free))
    return FIBER_ORDER[int(rng.integers(0, 2))]


def strategy_view_uff(phase: FiberKind, free: frozenset[FiberKind]) -> FiberKind | None:
    """Map only the phase fiber; the other fiber is invisible this pass."""
    return phase if phase in free else None


def strategy_view_oa(
    link: Link, free: frozenset[FiberKind], table: LinkOsnrTable, alpha: float
) -> FiberKind | None:
    """ULL iff both fibers are free and the per-link OSNR ratio exceeds alpha."""
    if not free:
        return None
    if len(free) == 1:
        return next(iter(free))
    return FiberKind.ULL if table.ratio(link) > alpha else FiberKind.SSMF


def make_plane_view(strategy: Strategy, phase, rng: np.random.Generator | None):
    """Bind a strategy (and UFF phase) into a PlaneView callable."""
    if isinstance(strategy, RandomStrategy):
        if rng is None:
            raise ValueError("random strategy needs a seeded rng")

        def view(link, free):
            choice = strategy_view_random(free, rng)
            return frozenset((choice,)) if choice else frozenset()

    elif isinstance(strategy, (UffStrategy, SingleFiberStrategy)):

        def view(link, free):
            choice = strategy_view_uff(phase, free)
            return frozenset((choice,)) if choice else frozenset()

    elif isinstance(strategy, OaStrategy):
        if strategy.osnr_table is None:
            raise ValueError("OA strategy needs a per-link OSNR table")

        def view(link, free):
            choice = strategy_view_oa(link, free, strategy.osnr_table, strategy.alpha)
            return frozenset((choice,)) if choice else frozenset()

    elif isinstance(strategy, SuStrategy):
        # SU maps the union of free fibers; the scheme choice happens after
        # a route is found.
        def view(link, free):
            return free

    else:
        raise TypeError(f"unknown strategy {strategy!r}")

    return view


@dataclass(frozen=True)
class FiberSchemeCost:
    """Cost record for one per-link fiber selection scheme."""

    scheme: tuple[FiberKind, ...]
    n_blocks: int
    state_changes: int
    max_changes: int
    omega: float

    @property
    def cost(self) -> float:
        return self.n_blocks * (self.state_changes / self.max_changes) * self.omega


def count_free_blocks(free_mask: np.ndarray, min_len: int) -> int:
    """Maximal runs of free slots with length >= min_len."""
    if not free_mask.size:
        return 0
    padded = np.concatenate(([False], free_mask, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    starts, ends = edges[::2], edges[1::2]
    return int(np.count_nonzero((ends - starts) >= min_len))


def count_state_changes(free_mask: np.ndarray) -> int:
    """Adjacent free/busy transitions within one fiber's slot vector."""
    if free_mask.size < 2:
        return 0
    return int(np.count_nonzero(free_mask[1:] != free_mask[:-1]))


def _scheme_tiebreak(scheme: tuple[FiberKind, ...]) -> tuple[int, ...]:
    return tuple(0 if k is FiberKind.SSMF else 1 for k in scheme)


def su_enumerate_and_pick(
    net: Network,
    route: tuple[str, ...],
    free_sets: list[frozenset[FiberKind]],
    fs_count: int,
    fmt: ModulationFormat,
    bandwidth_gbps: float,
    provider: OsnrProvider,
    table: ModulationTable,
    config: SuStrategy = SuStrategy(),
    fiber_stats: dict | None = None,
) -> tuple[tuple[FiberKind, ...], FiberSchemeCost] | None:
    """Score every fiber scheme over the route's free fibers; keep the best.

    Schemes whose path OSNR misses the format threshold are dropped. Cost is
    n_blocks * (state_changes / (beta - 1)) * omega, where blocks and
    transitions are counted on the full occupancy of each selected fiber and
    summed over route links. Ties break toward the lexicographically first
    scheme with SSMF ordered before ULL.

    ``fiber_stats`` may carry a per-(link, kind) memo of (blocks, changes)
    valid while the spectrum state is frozen (one provisioning scan).
    """
    route_links = [net.topology.link(u, v) for u, v in zip(route, route[1:])]
    if any(not fs for fs in free_sets):
        return None
    if fiber_stats is None:
        fiber_stats = {}

    def osnr_db(scheme: tuple[FiberKind, ...]) -> float | None:
        try:
            return provider.path_osnr_db(route, scheme)
        except MissingEntryError:
            return None

    def stats(link, kind) -> tuple[int, int]:
        key = (link.key, kind)
        hit = fiber_stats.get(key)
        if hit is None:
            mask = link.fiber(kind).spectrum.free_mask
            hit = (count_free_blocks(mask, fs_count), count_state_changes(mask))
            fiber_stats[key] = hit
        return hit

    all_ssmf = tuple(FiberKind.SSMF for _ in route_links)
    ssmf_db = osnr_db(all_ssmf)
    ssmf_fmt = table.best_format(ssmf_db) if ssmf_db is not None else None
    ssmf_fs = required_fs(bandwidth_gbps, ssmf_fmt) if ssmf_fmt else math.inf

    m = net.total_slots - 1
    best: tuple[tuple[FiberKind, ...], FiberSchemeCost] | None = None
    for scheme in itertools.product(*[sorted(fs, key=lambda k: k is FiberKind.ULL) for fs in free_sets]):
        db = osnr_db(scheme)
        if db is None or db < fmt.osnr_threshold_db:
            continue
        n_blocks = 0
        changes = 0
        for link, kind in zip(route_links, scheme):
            blocks_k, changes_k = stats(link, kind)
            n_blocks += blocks_k
            changes += changes_k
        if FiberKind.ULL not in scheme:
            omega = config.omega_ssmf
        else:
            scheme_fmt = table.best_format(db)
            scheme_fs = required_fs(bandwidth_gbps, scheme_fmt) if scheme_fmt else math.inf
            omega = config.omega_ull_gain if scheme_fs < ssmf_fs else config.omega_ull_no_gain
        record = FiberSchemeCost(scheme, n_blocks, changes, m, omega)
        if (
            best is None
            or record.cost > best[1].cost
            or (record.cost == best[1].cost and _scheme_tiebreak(scheme) < _scheme_tiebreak(best[0]))
        ):
            best = (scheme, record)
    return best
