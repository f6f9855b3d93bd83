import numpy as np
import pytest

from sgslasso.problems import GeneratorSpec, generate, lambda_settings
from sgslasso.prox import GroupPartition, PenaltyParams


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_VERDICTS = []


def record_verdict(line):
    """Collected by the acceptance tests; echoed after the run so the
    one-line-per-criterion report survives output capturing."""
    ACCEPTANCE_VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)


def random_groups(rng, n, max_groups=None):
    """Random disjoint partition of {0..n-1} into 1..max_groups groups."""
    max_groups = max_groups or max(1, n // 2)
    num = int(rng.integers(1, max_groups + 1))
    perm = rng.permutation(n)
    cuts = np.sort(rng.choice(np.arange(1, n), size=num - 1, replace=False)) if num > 1 else []
    return GroupPartition([np.sort(part) for part in np.split(perm, cuts)])


def random_penalty(rng, scale=1.0):
    return PenaltyParams(
        lam1=float(scale * rng.uniform(0.05, 1.5)),
        lam2=float(scale * rng.uniform(0.05, 1.5)),
    )


def small_problem(seed=0, family=1, m=30, n=120, mE=4, mI=4, J=20, gamma=1e-2,
                  setting="S1"):
    """Seeded, fully regularized small instance for solver tests."""
    spec = GeneratorSpec(family=family, m=m, n=n, mE=mE, mI=mI, J=J, seed=seed)
    prob = generate(spec)
    return prob.with_params(lambda_settings(prob.A, prob.b, gamma, setting))
