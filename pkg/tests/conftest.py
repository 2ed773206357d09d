from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from apps.utils.expr import parse  # noqa: E402
from apps.utils.operators import FractionalOrders, GridSpec, clear_kernel_cache  # noqa: E402
from apps.utils.variational import VariationalProblem  # noqa: E402

PROBLEMS_DIR = REPO_ROOT / "configs" / "problems"

CUBIC_ROWS = [
    # y(1/4), y(1/2), y(3/4), J(y), Legendre verified
    (-0.5511786, 0.0515282, 0.5133134, 2.7928945458, False),
    (0.2669091, 0.4878808, 0.7151924, 0.9943443785, True),
    (-2.6745703, 0.5599360, -2.6730125, 78.8272693823, False),
    (0.5789976, 1.0701515, 0.1840377, 4.3027798361, False),
    (1.0306820, 1.8920322, 2.7429222, 14.5675512245, True),
    (0.5087946, -0.1861431, 0.4489196, 3.1012158577, False),
    (4.0583690, -1.0299054, -5.0030989, 192.9159027296, False),
    (-1.7436106, -3.1898449, -0.8850511, 33.0066661220, False),
]

CUBIC_SHORT_ROWS = [
    # y(0.1), y(0.2), y(0.3), y(0.4), J(y), Legendre verified
    (-0.305570704, -0.428093486, 0.223708338, 0.480549114, 0.6013513498, False),
    (-0.427934654, -0.599520948, 0.313290997, -0.661831134, 1.1793963189, False),
    (0.284152257, -0.227595659, 0.318847274, 0.531827387, 0.5200044770, False),
    (-0.277642565, 0.222381632, 0.386666793, 0.555841555, 0.4964516520, False),
    (0.387074742, -0.310032839, 0.434336603, -0.482903047, 0.9649271374, False),
    (0.259846344, 0.364035314, 0.463222456, 0.597907505, 0.4348486085, True),
    (-0.375094681, 0.300437245, 0.522386246, -0.419053781, 0.9061219870, False),
    (0.343327771, 0.480989769, 0.61204299, -0.280908953, 0.7591414841, False),
    (0.297792192, 0.417196073, -0.218013689, 0.460556635, 0.5711254009, False),
    (0.41283304, 0.578364133, -0.302235104, -0.649232892, 1.0976243919, False),
    (-0.321401682, 0.257431098, -0.360644857, 0.400971272, 0.6652749193, False),
    (0.330157414, -0.264444122, -0.459803086, 0.368850105, 0.7020159319, False),
    (-0.459640837, 0.368155651, -0.515763025, -0.860276767, 1.3606363374, False),
    (-0.359429958, -0.50354835, -0.640748011, 0.294083676, 0.8320193058, False),
    (0.477760586, -0.382668914, -0.66536683, -0.956478654, 1.4700275991, False),
    (-0.541587541, -0.758744525, -0.965476394, -1.246195157, 1.8890444563, False),
]


def make_problem(lagrangian: str, a: float, h: float, k: int, alpha: float, beta: float = 1.0,
                 left_bc=0.0, right_bc=1.0) -> VariationalProblem:
    return VariationalProblem(
        grid=GridSpec(a, h, k),
        orders=FractionalOrders(alpha, beta),
        lagrangian=parse(lagrangian),
        left_bc=left_bc,
        right_bc=right_bc,
        source=lagrangian,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def cubic_problem():
    return make_problem("v^3 + 1*w^2", 0.0, 0.25, 4, 0.8, 0.5, 0.0, 1.0)


@pytest.fixture
def cubic_short_problem():
    return make_problem("v^3 + 0*w^2", 0.0, 0.1, 5, 0.3, 1.0, 0.0, 1.0)


@pytest.fixture
def fresh_kernels():
    clear_kernel_cache()
    yield
    clear_kernel_cache()
