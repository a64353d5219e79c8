import numpy as np
import pytest

from outage_sentinel import NoiseConfig, networks


@pytest.fixture
def parallel_pair():
    return networks.parallel_pair()


@pytest.fixture
def triangle():
    return networks.triangle()


@pytest.fixture
def k4():
    return networks.k4()


@pytest.fixture
def ring8():
    return networks.ring8()


@pytest.fixture(scope="session")
def ne39():
    return networks.new_england39()


@pytest.fixture
def quiet():
    """Noise config that leaves every clean sample untouched."""
    return NoiseConfig(gaussian_sigma_hz=0.0, gaussian_sigma_mw=0.0, spike_probability=0.0)


@pytest.fixture
def dense_flows():
    """Independent DC solution: dense susceptance assembly, numpy solve.

    Deliberately built with plain loops and a dense matrix so it shares no
    code path with the package solver.
    """

    def solve(net):
        ids = [b.id for b in net.buses]
        pos = {bid: i for i, bid in enumerate(ids)}
        n = len(ids)
        B = np.zeros((n, n))
        for br in net.branches:
            if not br.in_service:
                continue
            b = 1.0 / br.reactance_pu
            i, j = pos[br.from_bus], pos[br.to_bus]
            B[i, i] += b
            B[j, j] += b
            B[i, j] -= b
            B[j, i] -= b
        s = pos[net.slack_bus]
        keep = [i for i in range(n) if i != s]
        p = np.array([bus.injection_mw for bus in net.buses]) / net.mva_base
        theta = np.zeros(n)
        theta[keep] = np.linalg.solve(B[np.ix_(keep, keep)], p[keep])
        return {
            br.id: (theta[pos[br.from_bus]] - theta[pos[br.to_bus]])
            / br.reactance_pu
            * net.mva_base
            for br in net.branches
            if br.in_service
        }

    return solve
