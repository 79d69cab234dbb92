"""Traffic generation, batch and discrete-event simulation, and fiber costs.

Static runs place one demand per node pair (bandwidth uniform on
[10, x_max]) in ascending pair order and report the largest 1-based slot
index used anywhere. Dynamic runs drive a Poisson arrival / exponential
holding event loop per node pair and report post-warmup blocking.

All randomness flows from one explicit seed through numpy's default
generator (PCG64); runs are bit-reproducible for a given (seed, config).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import StrategyModeError
from .netmodel import Demand, FiberKind, LightpathAssignment, Network, Topology
from .phy import (
    DEFAULT_MODULATIONS,
    LinkOsnrTable,
    ModulationTable,
    OsnrProvider,
    PhyParams,
    ReciprocalSumOsnr,
)
from .provisioner import provision_sp, provision_swp
from .strategies import OaStrategy, Strategy


@dataclass(frozen=True)
class StaticTraffic:
    x_max_gbps: float
    seed: int = 0

    def __post_init__(self):
        if self.x_max_gbps < 10:
            raise ValueError("x_max must be at least 10 Gb/s")


@dataclass(frozen=True)
class DynamicTraffic:
    """Per-node-pair offered load in Erlang; horizon counted in arrivals."""

    load_erlang: float
    x_max_gbps: float
    mean_holding: float = 1.0
    horizon_events: int = 10_000
    warmup_events: int | None = None  # defaults to 10% of the horizon
    seed: int = 0

    def __post_init__(self):
        if self.load_erlang <= 0:
            raise ValueError("load must be positive")
        if self.x_max_gbps < 10:
            raise ValueError("x_max must be at least 10 Gb/s")

    @property
    def warmup(self) -> int:
        if self.warmup_events is not None:
            return self.warmup_events
        return self.horizon_events // 10


@dataclass
class RunMetrics:
    max_fs_used: int
    blocked: int
    offered: int
    fiber_utilization: dict[str, float] = field(default_factory=dict)

    @property
    def blocking_probability(self) -> float:
        return self.blocked / self.offered if self.offered else 0.0


@dataclass
class StaticRunResult:
    metrics: RunMetrics
    demands: list[Demand]
    assignments: list[LightpathAssignment]
    blocked_ids: list[str]


def node_pairs(topology: Topology) -> list[tuple[str, str]]:
    """All unordered node pairs in ascending (src, dst) order."""
    nodes = topology.nodes
    return [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1 :]]


def default_osnr(
    topology: Topology, phy_params: PhyParams | None = None
) -> tuple[LinkOsnrTable, ReciprocalSumOsnr]:
    table = LinkOsnrTable.from_physics(topology, phy_params or PhyParams())
    return table, ReciprocalSumOsnr(topology, table)


def _resolve_strategy(strategy: Strategy, osnr_table: LinkOsnrTable) -> Strategy:
    if isinstance(strategy, OaStrategy) and strategy.osnr_table is None:
        return replace(strategy, osnr_table=osnr_table)
    return strategy


def generate_static_demands(
    topology: Topology, x_max_gbps: float, rng: np.random.Generator
) -> list[Demand]:
    demands = []
    for i, (a, b) in enumerate(node_pairs(topology)):
        bw = float(rng.uniform(10.0, x_max_gbps))
        demands.append(Demand(f"d{i}", a, b, bw))
    return demands


def provision_all(
    net: Network,
    demands: list[Demand],
    strategy: Strategy,
    table: ModulationTable,
    provider: OsnrProvider,
    rng: np.random.Generator | None = None,
    provisioner: Callable = provision_swp,
) -> tuple[list[LightpathAssignment], list[str]]:
    assignments, blocked = [], []
    for demand in demands:
        asg = provisioner(demand, net, strategy, table, provider, rng)
        if asg is None:
            blocked.append(demand.demand_id)
        else:
            assignments.append(asg)
    return assignments, blocked


def run_static(
    topology: Topology,
    cfg: StaticTraffic,
    strategy: Strategy,
    table: ModulationTable = DEFAULT_MODULATIONS,
    osnr_table: LinkOsnrTable | None = None,
    phy_params: PhyParams | None = None,
    provisioner: Callable = provision_swp,
) -> StaticRunResult:
    """Provision one demand per node pair on a fresh copy of the topology."""
    if not strategy.static_ok:
        raise StrategyModeError(f"{strategy.name} is not applicable to static traffic")
    topo = topology.copy_empty()
    net = Network(topo)
    if osnr_table is None:
        osnr_table, provider = default_osnr(topo, phy_params)
    else:
        provider = ReciprocalSumOsnr(topo, osnr_table)
    strategy = _resolve_strategy(strategy, osnr_table)
    rng = np.random.default_rng(cfg.seed)
    demands = generate_static_demands(topo, cfg.x_max_gbps, rng)
    assignments, blocked = provision_all(
        net, demands, strategy, table, provider, rng, provisioner
    )
    metrics = RunMetrics(
        max_fs_used=net.max_fs_used(),
        blocked=len(blocked),
        offered=len(demands),
        fiber_utilization=net.fiber_utilization(),
    )
    return StaticRunResult(metrics, demands, assignments, blocked)


_ARRIVAL, _DEPARTURE = 0, 1


def run_dynamic(
    topology: Topology,
    cfg: DynamicTraffic,
    strategy: Strategy,
    table: ModulationTable = DEFAULT_MODULATIONS,
    osnr_table: LinkOsnrTable | None = None,
    phy_params: PhyParams | None = None,
    provisioner: Callable = provision_swp,
    observer: Callable[[Network, str], None] | None = None,
) -> RunMetrics:
    """Poisson arrival / exponential holding loop until the arrival horizon.

    ``observer(net, event_kind)`` runs after every processed event; it exists
    for invariant auditing in tests and must not mutate the network.
    """
    if not strategy.dynamic_ok:
        raise StrategyModeError(f"{strategy.name} is not applicable to dynamic traffic")
    topo = topology.copy_empty()
    net = Network(topo)
    if osnr_table is None:
        osnr_table, provider = default_osnr(topo, phy_params)
    else:
        provider = ReciprocalSumOsnr(topo, osnr_table)
    strategy = _resolve_strategy(strategy, osnr_table)
    rng = np.random.default_rng(cfg.seed)

    pairs = node_pairs(topo)
    rate = cfg.load_erlang / cfg.mean_holding
    events: list[tuple[float, int, int, object]] = []
    seq = 0
    for pair in pairs:
        seq += 1
        heapq.heappush(events, (float(rng.exponential(1.0 / rate)), seq, _ARRIVAL, pair))

    arrivals = 0
    offered = blocked = 0
    peak_fs = 0
    while events and arrivals < cfg.horizon_events:
        t, _, kind, payload = heapq.heappop(events)
        if kind == _DEPARTURE:
            net.release(payload)
            if observer:
                observer(net, "departure")
            continue
        src, dst = payload
        arrivals += 1
        counted = arrivals > cfg.warmup
        if counted:
            offered += 1
        demand = Demand(f"d{arrivals}", src, dst, float(rng.uniform(10.0, cfg.x_max_gbps)))
        asg = provisioner(demand, net, strategy, table, provider, rng)
        if asg is None:
            if counted:
                blocked += 1
        else:
            peak_fs = max(peak_fs, net.max_fs_used())
            seq += 1
            heapq.heappush(
                events,
                (t + float(rng.exponential(cfg.mean_holding)), seq, _DEPARTURE, demand.demand_id),
            )
        seq += 1
        heapq.heappush(
            events, (t + float(rng.exponential(1.0 / rate)), seq, _ARRIVAL, payload)
        )
        if observer:
            observer(net, "arrival")

    return RunMetrics(
        max_fs_used=peak_fs,
        blocked=blocked,
        offered=offered,
        fiber_utilization=net.fiber_utilization(),
    )


def sweep_alpha(
    topology: Topology,
    x_values: list[float],
    alphas: list[float],
    seed: int = 0,
    table: ModulationTable = DEFAULT_MODULATIONS,
    osnr_table: LinkOsnrTable | None = None,
    phy_params: PhyParams | None = None,
) -> list[dict]:
    """Static OA runs over an (alpha, x_max) grid; one row per grid point."""
    if osnr_table is None:
        osnr_table, _ = default_osnr(topology, phy_params)
    rows = []
    for x in x_values:
        for alpha in alphas:
            result = run_static(
                topology,
                StaticTraffic(x_max_gbps=x, seed=seed),
                OaStrategy(alpha=alpha, osnr_table=osnr_table),
                table=table,
                osnr_table=osnr_table,
            )
            rows.append(
                {
                    "alpha": alpha,
                    "x_max": x,
                    "seed": seed,
                    "max_fs_used": result.metrics.max_fs_used,
                    "blocked": result.metrics.blocked,
                }
            )
    return rows


@dataclass(frozen=True)
class CostModel:
    """Per-kilometer deployment cost of newly installed fibers."""

    cost_per_km_ssmf: float = 1.0
    cost_per_km_ull: float = 10.0


#: Newly deployed (SSMF, ULL) fiber counts per link for each build scenario.
SCENARIO_DEPLOYMENTS: dict[str, tuple[int, int]] = {
    "S": (0, 0),
    "SS": (1, 0),
    "US": (0, 1),
    "UU": (0, 2),
}


def deployment_cost(
    topology: Topology, scenario: str, cost_model: CostModel = CostModel()
) -> float:
    """Total cost of the newly deployed fibers for a build scenario."""
    try:
        n_ssmf, n_ull = SCENARIO_DEPLOYMENTS[scenario]
    except KeyError:
        raise ValueError(
            f"unknown scenario {scenario!r}, expected one of {sorted(SCENARIO_DEPLOYMENTS)}"
        ) from None
    return sum(
        link.distance_km
        * (n_ssmf * cost_model.cost_per_km_ssmf + n_ull * cost_model.cost_per_km_ull)
        for link in topology.links
    )
