import numpy as np
import pytest

from squeezed_reservoir.fock import InitialStateSpec, density_from_spec, leakage

ACCEPTANCE_LINES = []


def random_density(dim, rng, rank=None):
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def resolved_block(S, tol=1e-8):
    """Number of leading columns k for which S|k> and S_dag|k> both pass the leakage gate.

    Identities involving the truncated squeeze operator only hold on this block.
    """
    dim = S.shape[0]
    for k in range(dim):
        for col in (S[:, k], S.conj().T[:, k]):
            if leakage(np.outer(col, col.conj())) >= tol:
                return k
    return dim


def match_spectrum(ev, max_order):
    """Greedy match of the (s+1)-fold eigenvalues -s/2, s <= max_order."""
    pool = list(ev)
    worst = 0.0
    for s in range(max_order + 1):
        target = -s / 2
        for _ in range(s + 1):
            i = int(np.argmin([abs(z - target) for z in pool]))
            z = pool.pop(i)
            err = abs(z) if s == 0 else abs(z - target) / abs(target)
            worst = max(worst, err)
    return worst


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def vacuum():
    return density_from_spec(InitialStateSpec.fock(0), 40)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
