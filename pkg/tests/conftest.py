import numpy as np
import pytest

import proxalt as pa


@pytest.fixture(scope="session")
def lasso130():
    """Seeded 130x80 lasso with the support-matched l1 weight."""
    problem, x_true = pa.gen_lasso(pa.LassoSpec(m=130, n=80, seed=0))
    return problem, x_true


@pytest.fixture(scope="session")
def lasso130_ref(lasso130):
    problem, _ = lasso130
    return problem.reference_optimum()


@pytest.fixture(scope="session")
def logistic_l1():
    """The 351x34 synthetic stand-in for the l1-logistic benchmark."""
    record = pa.gen_logistic_dataset(seed=0)
    return pa.logistic_problem(record, pa.L1(0.1))


@pytest.fixture(scope="session")
def logistic_l1_ref(logistic_l1):
    return logistic_l1.reference_optimum()


@pytest.fixture(scope="session")
def quadratic40():
    """Well-conditioned random least-squares problem with no regularizer."""
    rng = pa.rng_from_seed(3)
    A = rng.standard_normal((40, 25))
    b = rng.standard_normal(40)
    return pa.CompositeProblem(pa.LeastSquares(A, b), pa.ZeroReg())


@pytest.fixture(scope="session")
def quadratic40_ref(quadratic40):
    return quadratic40.reference_optimum()


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(12345))
