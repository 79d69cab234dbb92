"""Node-arc MILP export and an exact brute-force optimizer for tiny instances.

The model minimizes C, the largest 1-based slot index used on any fiber,
over joint route / fiber / modulation-format / spectrum decisions for a
static demand set. It is emitted as CPLEX-LP text plus a JSON sidecar that
maps mangled variable names back to their semantics; no solver is embedded.

``brute_force_opt`` provides ground truth on guarded instance sizes. It
enumerates per-demand (simple route, per-link fiber scheme, minimal-slot
format) candidates and finds the optimal joint spectrum placement; window
positions are explored through first-fit placements under every demand
permutation, which is exhaustive for the min-max-end objective (any feasible
placement normalizes, demand by demand in start order, to a first-fit
placement that is nowhere higher).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InstanceTooLargeError
from .netmodel import Demand, FiberKind, LightpathAssignment, LinkKey, Network, Topology
from .phy import (
    DEFAULT_MODULATIONS,
    LinkOsnrTable,
    ModulationTable,
    required_fs,
)

EXPORT_ROW_GUARD = 1_000_000
ORACLE_MAX_NODES = 5
ORACLE_MAX_DEMANDS = 3
ORACLE_MAX_SLOTS = 16


@dataclass(frozen=True)
class MilpInstance:
    topology: Topology
    demands: tuple[Demand, ...]
    link_osnr: LinkOsnrTable
    table: ModulationTable = DEFAULT_MODULATIONS

    @property
    def beta(self) -> int:
        return self.topology.total_slots

    def fs_counts(self) -> dict[str, dict[str, int]]:
        """Required slots per demand and format (the f parameter matrix)."""
        return {
            d.demand_id: {
                fmt.name: required_fs(d.bandwidth_gbps, fmt) for fmt in self.table
            }
            for d in self.demands
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MilpInstance":
        topology = Topology.from_dict(data["topology"])
        demands = tuple(
            Demand(str(row.get("id", f"d{i}")), row["src"], row["dst"], float(row["bandwidth_gbps"]))
            for i, row in enumerate(data["demands"])
        )
        link_osnr = LinkOsnrTable.from_rows(data["link_osnr"])
        return cls(topology, demands, link_osnr)

    @classmethod
    def from_json(cls, path: str | Path) -> "MilpInstance":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def bigm_spectrum(instance: MilpInstance) -> int:
    """Dominates every start/slot expression: beta plus the largest slot need."""
    max_f = max(
        required_fs(d.bandwidth_gbps, instance.table.formats[-1]) for d in instance.demands
    )
    return instance.beta + max_f


def bigm_osnr(instance: MilpInstance) -> float:
    """Dominates every reciprocal-OSNR sum with a factor-two safety margin."""
    total = sum(
        max(
            instance.link_osnr.get(link, FiberKind.SSMF),
            instance.link_osnr.get(link, FiberKind.ULL),
        )
        for link in instance.topology.links
    )
    return 2.0 * total


# ---------------------------------------------------------------------------
# Model construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: dict[str, float]
    sense: str  # "<=", ">=", "="
    rhs: float

    def family(self) -> str:
        return self.name.split("_", 1)[0]


@dataclass
class MilpModel:
    objective: str
    binaries: list[str] = field(default_factory=list)
    generals: list[str] = field(default_factory=list)
    continuous: list[str] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    sidecar: dict = field(default_factory=dict)

    def family_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for c in self.constraints:
            counts[c.family()] = counts.get(c.family(), 0) + 1
        return counts


def family_counts_closed_form(instance: MilpInstance) -> dict[str, int]:
    """Expected constraint counts per family, from the index-set sizes."""
    r = len(instance.demands)
    l = len(instance.topology.links)
    n = len(instance.topology.nodes)
    m = len(instance.table)
    pairs = r * (r - 1)
    counts = {
        "c03": r,
        "c04": r,
        "c05": r * (n - 2),
        "c06": r * l,
        "c07": r * l,
        "c08": r * l,
        "c09": r * l,
        "c10": r,
        "c11": r * l,
        "c12": r * l,
        "c13": r * l,
        "c14": r,
        "c15": r * m,
        "c16": r,
        "c17": pairs * l,
        "c18": pairs * l,
        "c19": pairs,
        "c20": pairs,
        "c25": r * l,
        "c30": r * l,
        "c31": l,
        "c32": l,
        "c33": l,
        "c34": r,
    }
    for fam in ("c21", "c22", "c23", "c24", "c26", "c27", "c28", "c29"):
        counts[fam] = r * l
    return counts


def build_model(instance: MilpInstance) -> MilpModel:
    topo = instance.topology
    demands = instance.demands
    links = topo.links
    formats = instance.table.formats
    beta = instance.beta
    nab_s = bigm_spectrum(instance)
    nab_o = bigm_osnr(instance)
    fs = instance.fs_counts()

    d_idx = {d.demand_id: i for i, d in enumerate(demands)}
    l_idx = {link.key: i for i, link in enumerate(links)}
    m_idx = {fmt.name: i for i, fmt in enumerate(formats)}

    def gam(d, l):
        return f"gam_d{d_idx[d]}_l{l_idx[l]}"

    def zul(d, l):
        return f"Z_d{d_idx[d]}_l{l_idx[l]}"

    def esm(d, l):
        return f"E_d{d_idx[d]}_l{l_idx[l]}"

    model = MilpModel(objective="C")
    add = model.constraints.append

    node_ids = {node: i for i, node in enumerate(topo.nodes)}
    for d in demands:
        i = d_idx[d.demand_id]
        for link in links:
            model.binaries += [gam(d.demand_id, link.key), zul(d.demand_id, link.key), esm(d.demand_id, link.key)]
        for node in topo.nodes:
            if node not in (d.src, d.dst):
                model.binaries.append(f"rho_d{i}_n{node_ids[node]}")
        for fmt in formats:
            model.binaries.append(f"del_d{i}_m{m_idx[fmt.name]}")
        model.generals += [f"S_d{i}", f"F_d{i}"]
        model.continuous += [f"osnr_d{i}", *(f"O_d{i}_l{l_idx[link.key]}" for link in links)]
        for link in links:
            e = l_idx[link.key]
            model.generals += [f"xiu_d{i}_l{e}", f"sgu_d{i}_l{e}", f"xis_d{i}_l{e}", f"sgs_d{i}_l{e}"]
    for d1 in demands:
        for d2 in demands:
            if d1.demand_id != d2.demand_id:
                model.binaries.append(f"X_d{d_idx[d1.demand_id]}_d{d_idx[d2.demand_id]}")
                model.binaries.append(f"th_d{d_idx[d1.demand_id]}_d{d_idx[d2.demand_id]}")
    for link in links:
        e = l_idx[link.key]
        model.generals += [f"eta_l{e}", f"phu_l{e}", f"phs_l{e}"]
    model.generals.append("C")

    # Route allocation: unit degree at the endpoints, even degree inside.
    for d in demands:
        i = d_idx[d.demand_id]
        src_terms = {gam(d.demand_id, link.key): 1.0 for link in topo.adjacency[d.src]}
        dst_terms = {gam(d.demand_id, link.key): 1.0 for link in topo.adjacency[d.dst]}
        add(Constraint(f"c03_d{i}", src_terms, "=", 1.0))
        add(Constraint(f"c04_d{i}", dst_terms, "=", 1.0))
        for node in topo.nodes:
            if node in (d.src, d.dst):
                continue
            terms = {gam(d.demand_id, link.key): 1.0 for link in topo.adjacency[node]}
            terms[f"rho_d{i}_n{node_ids[node]}"] = -2.0
            add(Constraint(f"c05_d{i}_n{node_ids[node]}", terms, "=", 0.0))

    # Fiber allocation: exactly one of (ULL, SSMF) on each traversed link.
    for d in demands:
        i = d_idx[d.demand_id]
        for link in links:
            e = l_idx[link.key]
            g, z, s = gam(d.demand_id, link.key), zul(d.demand_id, link.key), esm(d.demand_id, link.key)
            add(Constraint(f"c06_d{i}_l{e}", {z: 1.0, g: -1.0}, "<=", 0.0))
            add(Constraint(f"c07_d{i}_l{e}", {s: 1.0, g: -1.0}, "<=", 0.0))
            add(Constraint(f"c08_d{i}_l{e}", {s: 1.0, z: 1.0}, "<=", 1.0))
            add(Constraint(f"c09_d{i}_l{e}", {s: 1.0, g: -1.0, z: 1.0}, ">=", 0.0))

    # Modulation format allocation and the path OSNR balance.
    for d in demands:
        i = d_idx[d.demand_id]
        add(
            Constraint(
                f"c10_d{i}",
                {f"del_d{i}_m{m_idx[fmt.name]}": 1.0 for fmt in formats},
                "=",
                1.0,
            )
        )
        for link in links:
            e = l_idx[link.key]
            o = f"O_d{i}_l{e}"
            r_u = instance.link_osnr.get(link, FiberKind.ULL)
            r_s = instance.link_osnr.get(link, FiberKind.SSMF)
            g, z, sm = gam(d.demand_id, link.key), zul(d.demand_id, link.key), esm(d.demand_id, link.key)
            add(Constraint(f"c11_d{i}_l{e}", {o: 1.0, g: -nab_o}, "<=", 0.0))
            add(Constraint(f"c12_d{i}_l{e}", {o: 1.0, z: -r_u, sm: -r_s}, "<=", 0.0))
            add(
                Constraint(
                    f"c13_d{i}_l{e}",
                    {o: 1.0, z: -r_u, sm: -r_s, g: -nab_o},
                    ">=",
                    -nab_o,
                )
            )
        terms = {f"osnr_d{i}": 1.0}
        terms.update({f"O_d{i}_l{l_idx[link.key]}": -1.0 for link in links})
        add(Constraint(f"c14_d{i}", terms, "=", 0.0))
        for fmt in formats:
            k = m_idx[fmt.name]
            add(
                Constraint(
                    f"c15_d{i}_m{k}",
                    {f"osnr_d{i}": 1.0, f"del_d{i}_m{k}": nab_o},
                    "<=",
                    fmt.threshold_reciprocal + nab_o,
                )
            )

    # Spectrum allocation: slot need per chosen format, then pairwise
    # non-overlap on shared fibers through the (X, theta) disjunction.
    for d in demands:
        i = d_idx[d.demand_id]
        terms = {f"F_d{i}": 1.0}
        for fmt in formats:
            terms[f"del_d{i}_m{m_idx[fmt.name]}"] = -float(fs[d.demand_id][fmt.name])
        add(Constraint(f"c16_d{i}", terms, "=", 0.0))
        add(Constraint(f"c34_d{i}", {f"S_d{i}": 1.0, f"F_d{i}": 1.0}, "<=", float(beta)))
    for d1, d2 in itertools.permutations(demands, 2):
        i, j = d_idx[d1.demand_id], d_idx[d2.demand_id]
        th = f"th_d{i}_d{j}"
        x = f"X_d{i}_d{j}"
        for link in links:
            e = l_idx[link.key]
            add(
                Constraint(
                    f"c17_d{i}_d{j}_l{e}",
                    {th: 1.0, zul(d1.demand_id, link.key): -1.0, zul(d2.demand_id, link.key): -1.0},
                    ">=",
                    -1.0,
                )
            )
            add(
                Constraint(
                    f"c18_d{i}_d{j}_l{e}",
                    {th: 1.0, esm(d1.demand_id, link.key): -1.0, esm(d2.demand_id, link.key): -1.0},
                    ">=",
                    -1.0,
                )
            )
        add(
            Constraint(
                f"c19_d{i}_d{j}",
                {f"S_d{j}": 1.0, f"S_d{i}": -1.0, x: nab_s, th: nab_s},
                "<=",
                2.0 * nab_s - 1.0,
            )
        )
        add(
            Constraint(
                f"c20_d{i}_d{j}",
                {f"S_d{i}": 1.0, f"F_d{i}": 1.0, f"S_d{j}": -1.0, x: -nab_s, th: nab_s},
                "<=",
                nab_s,
            )
        )

    # Maximum-FS bookkeeping per fiber kind, link, and network.
    for d in demands:
        i = d_idx[d.demand_id]
        for link in links:
            e = l_idx[link.key]
            g = gam(d.demand_id, link.key)
            for fam_lo, fam_seq, end_var, sig_var, choice in (
                (("c21", "c22", "c23", "c24"), "u", f"xiu_d{i}_l{e}", f"sgu_d{i}_l{e}", zul(d.demand_id, link.key)),
                (("c26", "c27", "c28", "c29"), "s", f"xis_d{i}_l{e}", f"sgs_d{i}_l{e}", esm(d.demand_id, link.key)),
            ):
                c_end, c_cap, c_le, c_ge = fam_lo
                add(
                    Constraint(
                        f"{c_end}_d{i}_l{e}",
                        {end_var: 1.0, f"S_d{i}": -1.0, f"F_d{i}": -1.0, choice: -float(beta)},
                        ">=",
                        -float(beta),
                    )
                )
                add(Constraint(f"{c_cap}_d{i}_l{e}", {sig_var: 1.0, g: -nab_s}, "<=", 0.0))
                add(Constraint(f"{c_le}_d{i}_l{e}", {sig_var: 1.0, end_var: -1.0}, "<=", 0.0))
                add(
                    Constraint(
                        f"{c_ge}_d{i}_l{e}",
                        {sig_var: 1.0, end_var: -1.0, g: -nab_s},
                        ">=",
                        -nab_s,
                    )
                )
    for link in links:
        e = l_idx[link.key]
        for d in demands:
            i = d_idx[d.demand_id]
            add(Constraint(f"c25_l{e}_d{i}", {f"phu_l{e}": 1.0, f"sgu_d{i}_l{e}": -1.0}, ">=", 0.0))
            add(Constraint(f"c30_l{e}_d{i}", {f"phs_l{e}": 1.0, f"sgs_d{i}_l{e}": -1.0}, ">=", 0.0))
        add(Constraint(f"c31_l{e}", {f"eta_l{e}": 1.0, f"phu_l{e}": -1.0}, ">=", 0.0))
        add(Constraint(f"c32_l{e}", {f"eta_l{e}": 1.0, f"phs_l{e}": -1.0}, ">=", 0.0))
        add(Constraint(f"c33_l{e}", {"C": 1.0, f"eta_l{e}": -1.0}, ">=", 0.0))

    model.sidecar = {
        "objective": "C = maximum 1-based slot index used on any fiber",
        "big_m": {"spectrum": nab_s, "osnr": nab_o},
        "demands": {f"d{d_idx[d.demand_id]}": {"id": d.demand_id, "src": d.src, "dst": d.dst,
                                               "bandwidth_gbps": d.bandwidth_gbps} for d in demands},
        "links": {f"l{l_idx[link.key]}": list(link.key) for link in links},
        "nodes": {f"n{node_ids[node]}": node for node in topo.nodes},
        "formats": {f"m{m_idx[fmt.name]}": fmt.name for fmt in formats},
        "variables": {
            "gam_dI_lE": "route uses link",
            "rho_dI_nJ": "route traverses interior node",
            "Z_dI_lE": "lightpath uses the ULL fiber of the link",
            "E_dI_lE": "lightpath uses the SSMF of the link",
            "S_dI": "0-based starting slot index",
            "F_dI": "allocated slot count",
            "X_dI_dJ": "1 iff start(I) > start(J)",
            "th_dI_dJ": "1 iff the two lightpaths share a fiber link",
            "osnr_dI": "reciprocal path OSNR (linear)",
            "O_dI_lE": "per-link reciprocal OSNR contribution",
            "del_dI_mK": "modulation format K chosen",
            "xiu/xis": "window end index if the ULL/SSMF fiber is used, else free",
            "sgu/sgs": "same, masked to links on the route",
            "phu_lE/phs_lE": "max used index on the link's ULL/SSMF fiber",
            "eta_lE": "max used index on the link",
            "C": "network-wide maximum used index (objective)",
        },
        "notes": [
            "c18 follows the shared-SSMF reading with distinct demand indices "
            "(the source formulation prints the same index twice).",
            "c10 is emitted per demand (del_dI_mK); the printed per-node index "
            "has no matching variable.",
            "c34 (S + F <= beta) is an added strengthening that pins windows "
            "inside the slot range; it is implied by the problem statement "
            "but absent from the numbered families.",
        ],
    }
    return model


def render_lp(model: MilpModel, width: int = 96) -> str:
    """Render the model as CPLEX-LP text."""

    def fmt_coef(c: float) -> str:
        return f"{int(c)}" if float(c).is_integer() else repr(c)

    def row(terms: dict[str, float]) -> list[str]:
        parts = []
        for i, (var, coef) in enumerate(terms.items()):
            sign = "-" if coef < 0 else "+"
            mag = abs(coef)
            piece = var if mag == 1.0 else f"{fmt_coef(mag)} {var}"
            if i == 0 and sign == "+":
                parts.append(piece)
            else:
                parts.append(f"{sign} {piece}")
        return parts

    def wrap(prefix: str, parts: list[str], tail: str) -> list[str]:
        lines, cur = [], f" {prefix}"
        for part in parts:
            if len(cur) + len(part) + 1 > width:
                lines.append(cur)
                cur = "   " + part
            else:
                cur += " " + part
        lines.append(cur + " " + tail)
        return lines

    sense_map = {"<=": "<=", ">=": ">=", "=": "="}
    out = ["\\ RFMSA node-arc model (dual-fiber elastic optical network)", "Minimize", f" obj: {model.objective}", "Subject To"]
    for c in model.constraints:
        rhs = fmt_coef(c.rhs)
        out.extend(wrap(f"{c.name}:", row(c.terms), f"{sense_map[c.sense]} {rhs}"))
    out.append("Generals")
    out.extend(wrap("", model.generals, ""))
    out.append("Binaries")
    out.extend(wrap("", model.binaries, ""))
    out.append("End")
    return "\n".join(out) + "\n"


def export_lp(instance: MilpInstance, base_path: str | Path) -> tuple[Path, Path]:
    """Write ``<base>.lp`` and ``<base>.names.json``; returns both paths."""
    expected_rows = sum(family_counts_closed_form(instance).values())
    if expected_rows > EXPORT_ROW_GUARD:
        raise InstanceTooLargeError(
            f"{expected_rows} constraint rows exceed the export guard of {EXPORT_ROW_GUARD}"
        )
    model = build_model(instance)
    base = Path(base_path)
    lp_path = base.with_suffix(".lp")
    names_path = base.with_suffix(".names.json")
    lp_path.write_text(render_lp(model))
    names_path.write_text(json.dumps(model.sidecar, indent=2))
    return lp_path, names_path


def evaluate_constraints(
    model: MilpModel, values: dict[str, float], tol: float = 1e-9
) -> list[str]:
    """Names of constraints the assignment violates (missing vars read 0)."""
    bad = []
    for c in model.constraints:
        lhs = sum(coef * values.get(var, 0.0) for var, coef in c.terms.items())
        ok = (
            lhs <= c.rhs + tol
            if c.sense == "<="
            else lhs >= c.rhs - tol
            if c.sense == ">="
            else abs(lhs - c.rhs) <= tol
        )
        if not ok:
            bad.append(c.name)
    return bad


def solution_values(instance: MilpInstance, witness: list[LightpathAssignment]) -> dict[str, float]:
    """Expand a concrete assignment set into a full MILP variable valuation."""
    topo = instance.topology
    d_idx = {d.demand_id: i for i, d in enumerate(instance.demands)}
    l_idx = {link.key: i for i, link in enumerate(topo.links)}
    node_ids = {node: i for i, node in enumerate(topo.nodes)}
    m_idx = {fmt.name: i for i, fmt in enumerate(instance.table.formats)}
    by_id = {w.demand_id: w for w in witness}
    if set(by_id) != {d.demand_id for d in instance.demands}:
        raise ValueError("witness must cover every demand exactly once")

    vals: dict[str, float] = {}
    fiber_users: dict[tuple[LinkKey, FiberKind], set[str]] = {}
    for d in instance.demands:
        i = d_idx[d.demand_id]
        w = by_id[d.demand_id]
        used = dict(zip(w.route_links(), w.fiber_choice))
        interior = set(w.route[1:-1])
        vals[f"S_d{i}"] = float(w.start_slot)
        vals[f"F_d{i}"] = float(w.fs_count)
        vals[f"del_d{i}_m{m_idx[w.format_name]}"] = 1.0
        recip = 0.0
        for link in topo.links:
            e = l_idx[link.key]
            kind = used.get(link.key)
            vals[f"gam_d{i}_l{e}"] = 1.0 if kind else 0.0
            vals[f"Z_d{i}_l{e}"] = 1.0 if kind is FiberKind.ULL else 0.0
            vals[f"E_d{i}_l{e}"] = 1.0 if kind is FiberKind.SSMF else 0.0
            if kind:
                r = instance.link_osnr.get(link, kind)
                vals[f"O_d{i}_l{e}"] = r
                recip += r
                fiber_users.setdefault((link.key, kind), set()).add(d.demand_id)
                end = float(w.end_slot)
            else:
                end = 0.0
            vals[f"xiu_d{i}_l{e}"] = end if kind is FiberKind.ULL else 0.0
            vals[f"sgu_d{i}_l{e}"] = end if kind is FiberKind.ULL else 0.0
            vals[f"xis_d{i}_l{e}"] = end if kind is FiberKind.SSMF else 0.0
            vals[f"sgs_d{i}_l{e}"] = end if kind is FiberKind.SSMF else 0.0
        vals[f"osnr_d{i}"] = recip
        for node in interior:
            vals[f"rho_d{i}_n{node_ids[node]}"] = 1.0
    for d1, d2 in itertools.permutations(instance.demands, 2):
        i, j = d_idx[d1.demand_id], d_idx[d2.demand_id]
        shares = any(
            {d1.demand_id, d2.demand_id} <= users for users in fiber_users.values()
        )
        vals[f"th_d{i}_d{j}"] = 1.0 if shares else 0.0
        vals[f"X_d{i}_d{j}"] = 1.0 if vals[f"S_d{i}"] > vals[f"S_d{j}"] else 0.0
    for link in topo.links:
        e = l_idx[link.key]
        phu = max(
            (vals[f"sgu_d{d_idx[d.demand_id]}_l{e}"] for d in instance.demands), default=0.0
        )
        phs = max(
            (vals[f"sgs_d{d_idx[d.demand_id]}_l{e}"] for d in instance.demands), default=0.0
        )
        vals[f"phu_l{e}"] = phu
        vals[f"phs_l{e}"] = phs
        vals[f"eta_l{e}"] = max(phu, phs)
    vals["C"] = max((vals[f"eta_l{l_idx[link.key]}"] for link in topo.links), default=0.0)
    return vals


# ---------------------------------------------------------------------------
# Exact oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Candidate:
    route: tuple[str, ...]
    scheme: tuple[FiberKind, ...]
    fs: int
    format_name: str

    def resources(self) -> list[tuple[LinkKey, FiberKind]]:
        from .netmodel import link_key

        return [
            (link_key(u, v), kind)
            for (u, v), kind in zip(zip(self.route, self.route[1:]), self.scheme)
        ]


@dataclass
class OracleResult:
    optimum: int | None
    witness: list[LightpathAssignment]

    @property
    def feasible(self) -> bool:
        return self.optimum is not None


def simple_routes(topology: Topology, src: str, dst: str) -> list[tuple[str, ...]]:
    """Every simple path between the endpoints, in DFS order."""
    out: list[tuple[str, ...]] = []

    def walk(node: str, path: tuple[str, ...]):
        if node == dst:
            out.append(path)
            return
        for link in topology.adjacency[node]:
            nxt = link.other_end(node)
            if nxt not in path:
                walk(nxt, path + (nxt,))

    walk(src, (src,))
    return out


def _demand_candidates(
    instance: MilpInstance, demand: Demand, forced_kind: FiberKind | None
) -> list[_Candidate]:
    kinds = (forced_kind,) if forced_kind else (FiberKind.SSMF, FiberKind.ULL)
    cands = []
    for route in simple_routes(instance.topology, demand.src, demand.dst):
        n_links = len(route) - 1
        for scheme in itertools.product(kinds, repeat=n_links):
            recip = sum(
                instance.link_osnr.get(instance.topology.link(u, v), kind)
                for (u, v), kind in zip(zip(route, route[1:]), scheme)
            )
            feasible = [f for f in instance.table if recip <= f.threshold_reciprocal]
            if not feasible:
                continue
            best = min(feasible, key=lambda f: required_fs(demand.bandwidth_gbps, f))
            cands.append(
                _Candidate(route, scheme, required_fs(demand.bandwidth_gbps, best), best.name)
            )
    cands.sort(key=lambda c: (c.fs, len(c.route), c.route, c.scheme))
    return cands


def _first_fit(
    order: tuple[int, ...], cands: list[_Candidate], beta: int
) -> tuple[int, list[int]] | None:
    """Place candidates in the given order, each at its lowest feasible start."""
    placed: list[tuple[int, int] | None] = [None] * len(cands)
    for idx in order:
        cand = cands[idx]
        resources = set(cand.resources())
        conflicts = sorted(
            placed[j]
            for j in order
            if placed[j] is not None and resources & set(cands[j].resources())
        )
        start = 0
        for c_start, c_end in conflicts:
            if start + cand.fs <= c_start:
                break
            start = max(start, c_end)
        if start + cand.fs > beta:
            return None
        placed[idx] = (start, start + cand.fs)
    ends = [p[1] for p in placed if p is not None]
    return max(ends), [p[0] for p in placed]  # type: ignore[index]


def brute_force_opt(
    instance: MilpInstance, forced_kind: FiberKind | None = None
) -> OracleResult:
    """Exact minimum of the max used slot index over all joint solutions.

    Guarded to tiny instances; ``forced_kind`` restricts every lightpath to
    one fiber type (for single-fiber comparison scenarios).
    """
    if len(instance.topology.nodes) > ORACLE_MAX_NODES:
        raise InstanceTooLargeError(f"oracle handles at most {ORACLE_MAX_NODES} nodes")
    if len(instance.demands) > ORACLE_MAX_DEMANDS:
        raise InstanceTooLargeError(f"oracle handles at most {ORACLE_MAX_DEMANDS} demands")
    if instance.beta > ORACLE_MAX_SLOTS:
        raise InstanceTooLargeError(f"oracle handles at most {ORACLE_MAX_SLOTS} slots")

    per_demand = [
        _demand_candidates(instance, d, forced_kind) for d in instance.demands
    ]
    if any(not c for c in per_demand):
        return OracleResult(None, [])

    best: int | None = None
    best_combo: tuple[_Candidate, ...] | None = None
    best_starts: list[int] | None = None

    def search(level: int, chosen: list[_Candidate], bound: int):
        nonlocal best, best_combo, best_starts
        if best is not None and bound >= best:
            return
        if level == len(per_demand):
            for order in itertools.permutations(range(len(chosen))):
                placed = _first_fit(order, chosen, instance.beta)
                if placed is None:
                    continue
                val, starts = placed
                if best is None or val < best:
                    best, best_combo, best_starts = val, tuple(chosen), starts
            return
        for cand in per_demand[level]:
            new_bound = max(bound, cand.fs)
            if best is not None and new_bound >= best:
                break  # candidates are sorted by slot need
            chosen.append(cand)
            search(level + 1, chosen, new_bound)
            chosen.pop()

    search(0, [], 0)
    if best is None:
        return OracleResult(None, [])
    witness = [
        LightpathAssignment(d.demand_id, c.route, c.scheme, c.format_name, start, c.fs)
        for d, c, start in zip(instance.demands, best_combo, best_starts)  # type: ignore[arg-type]
    ]
    return OracleResult(best, witness)


def verify_witness(instance: MilpInstance, witness: list[LightpathAssignment]) -> list[str]:
    """Independent constraint check of an oracle witness; empty means valid."""
    from .check import check_network, check_osnr
    from .phy import ReciprocalSumOsnr

    net = Network(instance.topology.copy_empty())
    problems = []
    for asg in witness:
        try:
            net.reserve(asg)
        except Exception as exc:  # noqa: BLE001 - report, not crash
            problems.append(f"{asg.demand_id}: {exc}")
    provider = ReciprocalSumOsnr(net.topology, instance.link_osnr)
    problems.extend(str(v) for v in check_network(net, instance.table, provider))
    return problems
