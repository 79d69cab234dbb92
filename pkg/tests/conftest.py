"""Shared fixtures: small topologies and the four-node ring replay data."""

from __future__ import annotations

import pytest

from hus_eon.netmodel import Demand, FiberKind, Network, Topology, builtin_topology
from hus_eon.phy import LinkOsnrTable, PathLookupOsnr

S, U = FiberKind.SSMF, FiberKind.ULL


def make_topology(nodes, links, total_slots=320, name="test"):
    return Topology(
        nodes=list(nodes),
        link_specs=[{"a": a, "b": b, "distance_km": d} for a, b, d in links],
        total_slots=total_slots,
        name=name,
    )


@pytest.fixture
def ring4():
    """Four-node, four-link ring; B-C-D is the shortest B-to-D route."""
    return make_topology(
        "ABCD",
        [("A", "B", 80), ("B", "C", 80), ("C", "D", 80), ("D", "A", 200)],
        name="ring4",
    )


@pytest.fixture
def ring4_demands():
    return [
        Demand("d1", "A", "B", 160.0),
        Demand("d2", "B", "D", 170.0),
        Demand("d3", "C", "D", 180.0),
    ]


@pytest.fixture
def ring4_reciprocals():
    """Per-link reciprocal OSNRs consistent with the ring replay formats.

    Chosen so that: A-B carries QPSK on SSMF and 16-QAM on ULL; B-C-D
    carries BPSK on SSMF-only, 8-QAM on ULL-only, and QPSK on the mixed
    SSMF/ULL scheme; C-D carries QPSK on SSMF and 8-QAM on ULL; detours
    through D-A never beat BPSK.
    """
    rows = [
        ("A", "B", 0.04, 0.012),
        ("B", "C", 0.04, 0.005),
        ("C", "D", 0.05, 0.02),
        ("A", "D", 0.08, 0.06),
    ]
    return LinkOsnrTable(
        {
            key: value
            for a, b, r_s, r_u in rows
            for key, value in ((((a, b) if a <= b else (b, a), S), r_s),
                               (((a, b) if a <= b else (b, a), U), r_u))
        }
    )


def lookup_provider(entries):
    provider = PathLookupOsnr({})
    for route, kinds, db in entries:
        provider.add(tuple(route), tuple(kinds), db)
    return provider


@pytest.fixture
def ring4_lookup_ssmf():
    return lookup_provider(
        [
            (("A", "B"), (S,), 14.0),
            (("B", "C", "D"), (S, S), 10.0),
            (("C", "D"), (S,), 13.0),
        ]
    )


@pytest.fixture
def ring4_lookup_ull():
    return lookup_provider(
        [
            (("A", "B"), (U,), 19.0),
            (("B", "C", "D"), (U, U), 16.0),
            (("C", "D"), (U,), 17.0),
        ]
    )


@pytest.fixture
def ring4_lookup_adaptive():
    return lookup_provider(
        [
            (("A", "B"), (S,), 14.0),
            (("B", "C", "D"), (S, U), 14.0),
            (("C", "D"), (S,), 13.0),
        ]
    )


@pytest.fixture
def ring4_oa_tuning():
    """Ratio table steering OA to SSMF everywhere except link C-D."""
    rows = [
        ("A", "B", 0.05, 0.048),
        ("B", "C", 0.05, 0.048),
        ("C", "D", 0.05, 0.04),
        ("A", "D", 0.05, 0.048),
    ]
    return LinkOsnrTable(
        {
            key: value
            for a, b, r_s, r_u in rows
            for key, value in ((((a, b) if a <= b else (b, a), S), r_s),
                               (((a, b) if a <= b else (b, a), U), r_u))
        }
    )


@pytest.fixture
def triangle():
    return make_topology("XYZ", [("X", "Y", 80), ("Y", "Z", 80), ("X", "Z", 100)],
                         total_slots=16, name="triangle")


@pytest.fixture
def n6s9():
    return builtin_topology("n6s9")


@pytest.fixture
def usnet():
    return builtin_topology("usnet")


@pytest.fixture
def fresh_net(ring4):
    return Network(ring4)
