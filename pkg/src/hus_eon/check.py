"""Independent post-hoc validation of spectrum and OSNR constraints.

This module re-derives everything from the live assignment registry and the
raw occupancy arrays; it shares no decision logic with the provisioner so
that a provisioning bug cannot validate itself.

Checks performed per network state:
  * non-overlap: every window slot carries exactly its owner's code
  * continuity/contiguity: the identical contiguous window on every route link
  * range: windows fit within the slot count
  * accounting: total occupied slots equal the sum over live assignments
    of fs_count x route length (no stray or leaked occupancy)
  * OSNR: each assignment's path OSNR meets its format threshold
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MissingEntryError
from .netmodel import FIBER_ORDER, LightpathAssignment, Network, Topology
from .phy import ModulationTable, OsnrProvider


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.message}"


def check_network(
    net: Network,
    table: ModulationTable | None = None,
    provider: OsnrProvider | None = None,
) -> list[Violation]:
    """All constraint violations in the current network state."""
    violations: list[Violation] = []
    expected_occupied = 0

    for demand_id, asg in net.assignments.items():
        code = net.code_of(demand_id)
        if asg.start_slot < 0 or asg.end_slot > net.total_slots:
            violations.append(
                Violation("range", f"{demand_id}: window [{asg.start_slot}, {asg.end_slot}) "
                                   f"outside 0..{net.total_slots}")
            )
            continue
        route_ok = True
        for u, v in zip(asg.route, asg.route[1:]):
            if not net.topology.has_link(u, v):
                violations.append(Violation("route", f"{demand_id}: no link {u}-{v}"))
                route_ok = False
        if len(set(asg.route)) != len(asg.route):
            violations.append(Violation("route", f"{demand_id}: route revisits a node"))
            route_ok = False
        if not route_ok:
            continue
        expected_occupied += asg.fs_count * (len(asg.route) - 1)
        for (u, v), kind in zip(zip(asg.route, asg.route[1:]), asg.fiber_choice):
            owners = net.topology.link(u, v).fiber(kind).spectrum.owners
            window = owners[asg.start_slot : asg.end_slot]
            if not (window == code).all():
                holders = sorted(set(window.tolist()) - {code})
                violations.append(
                    Violation(
                        "overlap",
                        f"{demand_id}: slots [{asg.start_slot}, {asg.end_slot}) on "
                        f"{u}-{v} {kind.value} not exclusively held "
                        f"(other codes: {holders})",
                    )
                )

    actual_occupied = net.occupied_total()
    if actual_occupied != expected_occupied:
        violations.append(
            Violation(
                "accounting",
                f"occupied slots {actual_occupied} != expected {expected_occupied} "
                f"from {len(net.assignments)} live assignments",
            )
        )

    if table is not None and provider is not None:
        violations.extend(check_osnr(net.assignments.values(), table, provider))
    return violations


def check_osnr(
    assignments, table: ModulationTable, provider: OsnrProvider
) -> list[Violation]:
    violations: list[Violation] = []
    for asg in assignments:
        fmt = table.by_name(asg.format_name)
        try:
            osnr_db = provider.path_osnr_db(asg.route, asg.fiber_choice)
        except MissingEntryError:
            violations.append(
                Violation("osnr", f"{asg.demand_id}: no OSNR entry for its route/fibers")
            )
            continue
        if osnr_db < fmt.osnr_threshold_db:
            violations.append(
                Violation(
                    "osnr",
                    f"{asg.demand_id}: path OSNR {osnr_db:.2f} dB below "
                    f"{asg.format_name} threshold {fmt.osnr_threshold_db} dB",
                )
            )
    return violations


def check_assignment_dump(
    topology: Topology,
    assignments: list[LightpathAssignment],
    table: ModulationTable | None = None,
    provider: OsnrProvider | None = None,
) -> list[Violation]:
    """Validate a dumped assignment set by replaying it onto empty spectrum.

    Overlaps between dumped assignments surface as reserve failures and are
    reported with the offending slots.
    """
    from .errors import OverlapError, WindowRangeError

    net = Network(topology.copy_empty())
    violations: list[Violation] = []
    for asg in assignments:
        try:
            net.reserve(asg)
        except (OverlapError, WindowRangeError, KeyError, ValueError) as exc:
            violations.append(Violation("replay", f"{asg.demand_id}: {exc}"))
    violations.extend(check_network(net, table, provider))
    return violations
