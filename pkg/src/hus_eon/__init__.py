"""Lightpath provisioning for elastic optical networks whose links carry one
standard single-mode fiber and one ultra-low-loss fiber.

Public surface: network/spectrum model, physical-layer helpers, the
SWP-based provisioner with its fiber-selection strategies, static and
dynamic simulators, and the MILP export / exact-oracle pair.
"""

from .errors import (
    EmptyRouteError,
    HusEonError,
    InstanceTooLargeError,
    InvalidBandwidthError,
    InvalidParamsError,
    MissingEntryError,
    OverlapError,
    StrategyModeError,
    UnknownDemandError,
    WindowRangeError,
)
from .netmodel import (
    Demand,
    Fiber,
    FiberKind,
    LightpathAssignment,
    Link,
    Network,
    SpectrumMap,
    Topology,
    builtin_topology,
    load_topology,
)
from .phy import (
    DEFAULT_MODULATIONS,
    LinkOsnrTable,
    ModulationFormat,
    ModulationTable,
    PathLookupOsnr,
    PhyParams,
    ReciprocalSumOsnr,
    best_format,
    default_link_osnr,
    path_osnr,
    required_fs,
)
from .swp import SpectrumWindowPlane, create_swp_list, shortest_route
from .strategies import (
    FiberSchemeCost,
    OaStrategy,
    RandomStrategy,
    SingleFiberStrategy,
    SuStrategy,
    UffStrategy,
    su_enumerate_and_pick,
)
from .provisioner import provision_sp, provision_swp
from .check import Violation, check_assignment_dump, check_network
from .simulator import (
    CostModel,
    DynamicTraffic,
    RunMetrics,
    StaticTraffic,
    deployment_cost,
    run_dynamic,
    run_static,
    sweep_alpha,
)
from .milp import MilpInstance, OracleResult, brute_force_opt, export_lp

__version__ = "0.1.0"
