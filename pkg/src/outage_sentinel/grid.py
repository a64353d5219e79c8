"""Lossless DC network model: power flow, PTDF/LODF factors, outage screening.

Conventions
-----------
* Branch flow is reported in MW, positive from ``from_bus`` to ``to_bus``.
* Bus injections are in MW, positive for generation.
* Reactances are per-unit on ``mva_base``; angles are radians.
* The slack bus absorbs any residual injection within a small tolerance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .exceptions import (
    DisconnectedGraphError,
    DuplicateIdError,
    InvalidCoordinateError,
    IslandingOutageError,
    NonpositiveReactanceError,
    SingularSystemError,
    UnbalancedInjectionsError,
    UnknownBranchError,
    UnknownBusError,
    UnknownSlackError,
)

# Residual injection larger than this cannot be silently moved to the slack.
INJECTION_BALANCE_TOL_MW = 1e-6
# A self-transfer factor this close to 1 means the outage islands the grid.
ISLANDING_TOL = 1e-9


@dataclass(frozen=True)
class Bus:
    """Network node with a geographic location and a fixed MW injection."""

    id: int
    lat: float
    lon: float
    injection_mw: float = 0.0


@dataclass(frozen=True)
class Branch:
    """Transmission line between two buses.

    ``monitored`` marks branches that carry a PMU in simulated scenarios;
    ``in_service`` is cleared by :func:`apply_outage`.
    """

    id: int
    from_bus: int
    to_bus: int
    reactance_pu: float
    monitored: bool = True
    in_service: bool = True


@dataclass(frozen=True)
class DistributionFactors:
    """Sensitivity factors of one transfer or one outage.

    ``kind`` is ``"ptdf"`` (reference is a ``(from_bus, to_bus)`` transaction)
    or ``"lodf"`` (reference is the outaged branch id). ``values`` maps each
    in-service branch id to its dimensionless factor; for LODF the outaged
    branch itself is excluded.
    """

    kind: str
    reference: tuple[int, int] | int
    values: dict[int, float]


@dataclass(frozen=True)
class NetworkModel:
    """Immutable DC network. Build instances through :func:`build_network`."""

    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    slack_bus: int
    mva_base: float = 100.0

    @cached_property
    def bus_index(self) -> dict[int, int]:
        return {bus.id: i for i, bus in enumerate(self.buses)}

    @cached_property
    def branch_map(self) -> dict[int, Branch]:
        return {br.id: br for br in self.branches}

    def bus(self, bus_id: int) -> Bus:
        try:
            return self.buses[self.bus_index[bus_id]]
        except KeyError:
            raise UnknownBusError(f"bus {bus_id} is not in the network") from None

    def branch(self, branch_id: int) -> Branch:
        try:
            return self.branch_map[branch_id]
        except KeyError:
            raise UnknownBranchError(f"branch {branch_id} is not in the network") from None

    def in_service_branches(self) -> tuple[Branch, ...]:
        return tuple(br for br in self.branches if br.in_service)

    def monitored_branches(self) -> tuple[Branch, ...]:
        return tuple(br for br in self.in_service_branches() if br.monitored)

    def branch_terminals(self, branch_id: int) -> tuple[tuple[float, float], tuple[float, float]]:
        """Return ((lat, lon), (lat, lon)) for the two ends of a branch."""
        br = self.branch(branch_id)
        f, t = self.bus(br.from_bus), self.bus(br.to_bus)
        return ((f.lat, f.lon), (t.lat, t.lon))


def _check_connected(buses: Sequence[Bus], branches: Iterable[Branch]) -> None:
    """Union-find connectivity over in-service branches; handles parallel edges."""
    parent = {bus.id: bus.id for bus in buses}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for br in branches:
        if not br.in_service:
            continue
        ra, rb = find(br.from_bus), find(br.to_bus)
        if ra != rb:
            parent[ra] = rb
    roots = {find(bus.id) for bus in buses}
    if len(roots) > 1:
        raise DisconnectedGraphError(
            f"network splits into {len(roots)} components over in-service branches"
        )


def build_network(
    buses: Sequence[Bus],
    branches: Sequence[Branch],
    slack_bus: int,
    mva_base: float = 100.0,
) -> NetworkModel:
    """Validate inputs and return an immutable :class:`NetworkModel`.

    Checks performed: unique bus/branch ids, coordinates in range, strictly
    positive reactances, both branch endpoints present, slack bus present,
    in-service graph connected. Injections must sum to zero; a residual of at
    most ``INJECTION_BALANCE_TOL_MW`` is moved onto the slack bus, anything
    larger raises :class:`UnbalancedInjectionsError`.
    """
    bus_ids = [b.id for b in buses]
    if len(set(bus_ids)) != len(bus_ids):
        dupes = sorted({i for i in bus_ids if bus_ids.count(i) > 1})
        raise DuplicateIdError(f"duplicate bus ids: {dupes}")
    branch_ids = [br.id for br in branches]
    if len(set(branch_ids)) != len(branch_ids):
        dupes = sorted({i for i in branch_ids if branch_ids.count(i) > 1})
        raise DuplicateIdError(f"duplicate branch ids: {dupes}")

    for b in buses:
        if not (-90.0 <= b.lat <= 90.0) or not (-180.0 <= b.lon <= 180.0):
            raise InvalidCoordinateError(f"bus {b.id} has coordinates ({b.lat}, {b.lon})")

    known = set(bus_ids)
    for br in branches:
        if not (br.reactance_pu > 0.0):
            raise NonpositiveReactanceError(
                f"branch {br.id} has reactance {br.reactance_pu} pu"
            )
        for end in (br.from_bus, br.to_bus):
            if end not in known:
                raise UnknownBusError(f"branch {br.id} references missing bus {end}")

    if slack_bus not in known:
        raise UnknownSlackError(f"slack bus {slack_bus} is not in the network")
    if mva_base <= 0.0:
        raise ValueError(f"mva_base must be positive, got {mva_base}")

    _check_connected(buses, branches)

    others = math.fsum(b.injection_mw for b in buses if b.id != slack_bus)
    total = math.fsum(b.injection_mw for b in buses)
    if abs(total) > INJECTION_BALANCE_TOL_MW:
        raise UnbalancedInjectionsError(
            f"injections sum to {total:.9g} MW, above the {INJECTION_BALANCE_TOL_MW} MW tolerance"
        )
    # Pinning the slack to exactly -sum(others) makes rebalancing idempotent,
    # so a model survives save/load round trips bit for bit.
    if any(b.id == slack_bus and b.injection_mw != -others for b in buses):
        balanced = tuple(
            replace(b, injection_mw=-others) if b.id == slack_bus else b for b in buses
        )
    else:
        balanced = tuple(buses)

    return NetworkModel(balanced, tuple(branches), slack_bus, float(mva_base))


def apply_outage(net: NetworkModel, branch_id: int) -> NetworkModel:
    """Return a copy of ``net`` with one branch switched out of service.

    Raises :class:`UnknownBranchError` if the branch is absent or already out,
    and :class:`DisconnectedGraphError` if removing it splits the network.
    """
    br = net.branch(branch_id)
    if not br.in_service:
        raise UnknownBranchError(f"branch {branch_id} is already out of service")
    branches = tuple(
        replace(b, in_service=False) if b.id == branch_id else b for b in net.branches
    )
    _check_connected(net.buses, branches)
    return replace(net, branches=branches)


class _ReducedSystem:
    """Slack-reduced susceptance system assembled once per operation."""

    def __init__(self, net: NetworkModel):
        self.net = net
        self.in_service = list(net.in_service_branches())
        self.reduced_index = {
            bus.id: k
            for k, bus in enumerate(b for b in net.buses if b.id != net.slack_bus)
        }
        self.b_vals = np.array([1.0 / br.reactance_pu for br in self.in_service])

        rows, cols, data = [], [], []
        for l, br in enumerate(self.in_service):
            if br.from_bus != net.slack_bus:
                rows.append(l)
                cols.append(self.reduced_index[br.from_bus])
                data.append(1.0)
            if br.to_bus != net.slack_bus:
                rows.append(l)
                cols.append(self.reduced_index[br.to_bus])
                data.append(-1.0)
        a_red = sp.csr_matrix(
            (data, (rows, cols)), shape=(len(self.in_service), len(self.reduced_index))
        )
        self.b_red = (a_red.T @ sp.diags(self.b_vals) @ a_red).tocsc()

    def solve(self, rhs_pu: np.ndarray) -> np.ndarray:
        try:
            lu = splu(self.b_red)
        except RuntimeError as exc:
            raise SingularSystemError(f"reduced susceptance matrix: {exc}") from exc
        theta = lu.solve(rhs_pu)
        if not np.all(np.isfinite(theta)):
            raise SingularSystemError("reduced susceptance matrix produced non-finite angles")
        return theta

    def branch_flows_pu(self, theta_red: np.ndarray) -> dict[int, float]:
        slack = self.net.slack_bus
        index = self.reduced_index

        def angle(bus_id: int) -> float:
            return 0.0 if bus_id == slack else theta_red[index[bus_id]]

        return {
            br.id: float(self.b_vals[l] * (angle(br.from_bus) - angle(br.to_bus)))
            for l, br in enumerate(self.in_service)
        }


def dc_power_flow(net: NetworkModel) -> dict[int, float]:
    """Solve the DC power flow and return MW flow per in-service branch id."""
    system = _ReducedSystem(net)
    reduced_buses = [b for b in net.buses if b.id != net.slack_bus]
    rhs = np.array([b.injection_mw for b in reduced_buses]) / net.mva_base
    theta = system.solve(rhs)
    return {bid: f * net.mva_base for bid, f in system.branch_flows_pu(theta).items()}


def ptdf(net: NetworkModel, from_bus: int, to_bus: int, amount_mw: float = 1.0) -> DistributionFactors:
    """Power transfer distribution factors of a bus-to-bus transaction.

    The factor of branch ``l`` is the fraction of an incremental transfer
    from ``from_bus`` to ``to_bus`` that flows over ``l``. The DC model is
    linear, so the result does not depend on the transfer amount; the amount
    is validated to be nonzero only to reject degenerate requests.
    """
    if amount_mw == 0.0:
        raise ValueError("transaction amount must be nonzero")
    net.bus(from_bus)
    net.bus(to_bus)
    system = _ReducedSystem(net)
    rhs = np.zeros(len(system.reduced_index))
    if from_bus != net.slack_bus:
        rhs[system.reduced_index[from_bus]] += 1.0
    if to_bus != net.slack_bus:
        rhs[system.reduced_index[to_bus]] -= 1.0
    theta = system.solve(rhs)
    return DistributionFactors(
        kind="ptdf",
        reference=(from_bus, to_bus),
        values=system.branch_flows_pu(theta),
    )


def lodf(net: NetworkModel, branch_id: int) -> DistributionFactors:
    """Line outage distribution factors for the loss of one branch.

    The factor of a remaining branch ``k`` is ``phi_k / (1 - phi_m)`` where
    ``phi`` are the PTDFs of a transaction across the outaged branch's own
    terminals. A self-transfer factor of 1 (within ``ISLANDING_TOL``) means
    the branch is a bridge and raises :class:`IslandingOutageError`.
    """
    br = net.branch(branch_id)
    if not br.in_service:
        raise UnknownBranchError(f"branch {branch_id} is out of service")
    phi = ptdf(net, br.from_bus, br.to_bus).values
    denom = 1.0 - phi[branch_id]
    if abs(denom) <= ISLANDING_TOL:
        raise IslandingOutageError(
            f"branch {branch_id} is a bridge; its outage would island the network"
        )
    return DistributionFactors(
        kind="lodf",
        reference=branch_id,
        values={k: v / denom for k, v in phi.items() if k != branch_id},
    )


def predicted_flow_change(
    net: NetworkModel,
    branch_id: int,
    base_flows: Mapping[int, float] | None = None,
) -> dict[int, float]:
    """MW flow change on every in-service branch after one branch outage.

    Remaining branches change by ``lodf * base_flow``; the outaged branch
    itself loses its entire pre-outage flow. ``base_flows`` may be passed to
    reuse an existing :func:`dc_power_flow` result.
    """
    if base_flows is None:
        base_flows = dc_power_flow(net)
    factors = lodf(net, branch_id)
    pre = base_flows[branch_id]
    change = {k: z * pre for k, z in factors.values.items()}
    change[branch_id] = -pre
    return change


def kcl_residual(net: NetworkModel, flows: Mapping[int, float], bus_id: int) -> float:
    """Absolute MW mismatch between a bus injection and its incident flows.

    The flow map must cover every in-service branch; flow on a branch counts
    as leaving its from bus and entering its to bus.
    """
    net.bus(bus_id)
    net_outflow = 0.0
    for br in net.in_service_branches():
        if br.from_bus == bus_id:
            net_outflow += flows[br.id]
        if br.to_bus == bus_id:
            net_outflow -= flows[br.id]
    return abs(net.bus(bus_id).injection_mw - net_outflow)


# ---------------------------------------------------------------------------
# Network file format


def network_to_dict(net: NetworkModel) -> dict:
    return {
        "buses": [
            {"id": b.id, "lat": b.lat, "lon": b.lon, "injection_mw": b.injection_mw}
            for b in net.buses
        ],
        "branches": [
            {
                "id": br.id,
                "from": br.from_bus,
                "to": br.to_bus,
                "reactance_pu": br.reactance_pu,
                "monitored": br.monitored,
            }
            for br in net.branches
            if br.in_service
        ],
        "slack_bus": net.slack_bus,
        "mva_base": net.mva_base,
    }


def network_from_dict(doc: Mapping) -> NetworkModel:
    try:
        buses = [
            Bus(int(b["id"]), float(b["lat"]), float(b["lon"]), float(b.get("injection_mw", 0.0)))
            for b in doc["buses"]
        ]
        branches = [
            Branch(
                int(br["id"]),
                int(br["from"]),
                int(br["to"]),
                float(br["reactance_pu"]),
                monitored=bool(br.get("monitored", True)),
            )
            for br in doc["branches"]
        ]
        slack = int(doc["slack_bus"])
        mva = float(doc.get("mva_base", 100.0))
    except (KeyError, TypeError) as exc:
        from .exceptions import DatasetSchemaError

        raise DatasetSchemaError(f"network document is missing field {exc}") from exc
    return build_network(buses, branches, slack, mva)


def save_network(net: NetworkModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net), indent=2, sort_keys=True) + "\n")


def load_network(path: str | Path) -> NetworkModel:
    return network_from_dict(json.loads(Path(path).read_text()))
