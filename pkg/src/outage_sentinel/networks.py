"""Shipped example networks and a seeded random-network generator.

Branch ids in the small fixtures encode their endpoints (12 joins buses 1
and 2) so test output reads naturally. Coordinates are synthetic but placed
in a plausible region so distance numbers look like real mileage.
"""

from __future__ import annotations

import numpy as np

from .grid import Branch, Bus, NetworkModel, build_network


def parallel_pair() -> NetworkModel:
    """Two buses joined by two identical lines; the textbook LODF = 1 case."""
    buses = [
        Bus(1, 41.80, -72.60, injection_mw=100.0),
        Bus(2, 42.00, -71.50, injection_mw=-100.0),
    ]
    branches = [
        Branch(1, 1, 2, reactance_pu=0.02),
        Branch(2, 1, 2, reactance_pu=0.02),
    ]
    return build_network(buses, branches, slack_bus=2)


def triangle() -> NetworkModel:
    """Three buses, three equal lines; flows split 2/3 vs 1/3."""
    buses = [
        Bus(1, 41.51, -72.56, injection_mw=100.0),
        Bus(2, 41.29, -72.90, injection_mw=-100.0),
        Bus(3, 41.95, -72.10, injection_mw=0.0),
    ]
    branches = [
        Branch(12, 1, 2, reactance_pu=0.03),
        Branch(13, 1, 3, reactance_pu=0.03),
        Branch(32, 3, 2, reactance_pu=0.03),
    ]
    return build_network(buses, branches, slack_bus=2)


def k4() -> NetworkModel:
    """Complete graph on four buses with equal reactances."""
    buses = [
        Bus(1, 41.51, -72.56, injection_mw=100.0),
        Bus(2, 41.29, -72.90, injection_mw=-100.0),
        Bus(3, 41.95, -72.10, injection_mw=0.0),
        Bus(4, 42.30, -71.80, injection_mw=0.0),
    ]
    branches = [
        Branch(12, 1, 2, reactance_pu=0.03),
        Branch(13, 1, 3, reactance_pu=0.03),
        Branch(14, 1, 4, reactance_pu=0.03),
        Branch(23, 2, 3, reactance_pu=0.03),
        Branch(24, 2, 4, reactance_pu=0.03),
        Branch(34, 3, 4, reactance_pu=0.03),
    ]
    return build_network(buses, branches, slack_bus=2)


def ring8() -> NetworkModel:
    """Eight buses on a cycle; every single outage leaves a pure path, so
    the remaining-line factors sit exactly on the |LODF| = 1 boundary."""
    center_lat, center_lon = 42.50, -71.80
    buses = []
    for i in range(8):
        ang = 2.0 * np.pi * i / 8.0
        inj = 100.0 if i == 0 else (-100.0 if i == 4 else 0.0)
        buses.append(
            Bus(i + 1, center_lat + 0.5 * np.cos(ang), center_lon + 0.6 * np.sin(ang), inj)
        )
    branches = [
        Branch(i + 1, i + 1, (i + 1) % 8 + 1, reactance_pu=0.04) for i in range(8)
    ]
    return build_network(buses, branches, slack_bus=5)


_NE39_SEED = 6


def new_england39() -> NetworkModel:
    """39-bus synthetic system: meshed double-ring core plus spur taps.

    Buses 1-7 form the outer ring and 8-14 the inner ring, tied rung by
    rung, so the core stays connected after any single core outage and no
    two core lines form a cut pair. Buses 15-29 are load taps and 30-39
    generator buses, each hung off a core bus by one spur line; tripping a
    spur islands its leaf. Core branch ids are 1-21, spurs 22-46.
    Reactances, dispatch, load spread, and coordinates are drawn once from
    a fixed seed, so the fixture is identical in every process.
    """
    rng = np.random.default_rng(_NE39_SEED)
    core_pairs = (
        [(i, i % 7 + 1) for i in range(1, 8)]
        + [(i, (i - 7) % 7 + 8) for i in range(8, 15)]
        + [(i, i + 7) for i in range(1, 8)]
    )
    leaf_buses = list(range(15, 40))
    slots = rng.permutation(np.repeat(np.arange(1, 15), 2))[: len(leaf_buses)]
    spur_pairs = [(int(core), leaf) for core, leaf in zip(slots, leaf_buses)]
    pairs = core_pairs + spur_pairs

    gen_buses = set(range(30, 40))
    gen_mw = rng.uniform(300.0, 900.0, len(gen_buses))
    load_buses = list(range(1, 30))
    weights = rng.uniform(0.2, 1.0, len(load_buses))
    load_mw = gen_mw.sum() * weights / weights.sum()
    injections = dict.fromkeys(range(1, 40), 0.0)
    for bus, mw in zip(sorted(gen_buses), gen_mw):
        injections[bus] = float(mw)
    for bus, mw in zip(load_buses, load_mw):
        injections[bus] = -float(mw)
    # The draw above leaves the system off balance by float rounding only.
    injections[31] -= sum(injections.values())

    center_lat, center_lon = 42.9, -71.8
    ring_positions = {}
    for i in range(7):
        ang = 2.0 * np.pi * i / 7.0
        ring_positions[i + 1] = (1.4 * np.cos(ang), 1.4 * np.sin(ang))
        ring_positions[i + 8] = (0.8 * np.cos(ang + np.pi / 7.0), 0.8 * np.sin(ang + np.pi / 7.0))
    coords = {}
    for bus, (dy, dx) in ring_positions.items():
        coords[bus] = (center_lat + dy, center_lon + dx)
    for core, leaf in spur_pairs:
        offset = rng.uniform(0.15, 0.4, 2) * rng.choice([-1.0, 1.0], 2)
        coords[leaf] = (coords[core][0] + offset[0], coords[core][1] + offset[1])

    buses = [Bus(b, coords[b][0], coords[b][1], injections[b]) for b in range(1, 40)]
    branches = [
        Branch(i + 1, f, t, reactance_pu=float(x))
        for i, ((f, t), x) in enumerate(zip(pairs, rng.uniform(0.01, 0.1, len(pairs))))
    ]
    return build_network(buses, branches, slack_bus=31)


def random_network(
    n_buses: int,
    n_extra_branches: int,
    seed: int,
    monitored: bool = True,
) -> NetworkModel:
    """Random connected network: a spanning tree plus extra chords.

    Reactances are uniform in [0.01, 0.1] pu; injections are a balanced
    random spread. Intended for solver cross-checks and property sweeps.
    """
    if n_buses < 2:
        raise ValueError("need at least two buses")
    rng = np.random.default_rng(seed)

    pairs: list[tuple[int, int]] = []
    for b in range(2, n_buses + 1):
        pairs.append((int(rng.integers(1, b)), b))
    attempts = 0
    while len(pairs) < n_buses - 1 + n_extra_branches and attempts < 50 * n_extra_branches:
        attempts += 1
        a, b = rng.integers(1, n_buses + 1, 2)
        if a == b:
            continue
        pairs.append((int(min(a, b)), int(max(a, b))))

    inj = rng.uniform(-100.0, 100.0, n_buses)
    inj -= inj.mean()
    lats = rng.uniform(35.0, 45.0, n_buses)
    lons = rng.uniform(-90.0, -70.0, n_buses)
    buses = [
        Bus(b, float(lats[b - 1]), float(lons[b - 1]), float(inj[b - 1]))
        for b in range(1, n_buses + 1)
    ]
    residual = float(sum(b.injection_mw for b in buses))
    buses = [
        Bus(b.id, b.lat, b.lon, b.injection_mw - residual) if b.id == 1 else b
        for b in buses
    ]
    branches = [
        Branch(i + 1, f, t, reactance_pu=float(x), monitored=monitored)
        for i, ((f, t), x) in enumerate(zip(pairs, rng.uniform(0.01, 0.1, len(pairs))))
    ]
    return build_network(buses, branches, slack_bus=1)


FIXTURES = {
    "parallel-pair": parallel_pair,
    "triangle": triangle,
    "k4": k4,
    "ring8": ring8,
    "ne39": new_england39,
}
