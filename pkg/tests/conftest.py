import math

import pytest

from zermelo_kit import (Affine, Ellipse, Mat2, PointStart, Scenario,
                         Target, Vec2, affine_elliptic_example)


UPSTREAM_FIELD = Affine(Mat2(-0.5, 0.0, 0.0, 0.0), Vec2(0.0, 0.0))
DOWNSTREAM_FIELD = Affine(Mat2(0.5, 0.0, 0.0, 0.0), Vec2(0.0, 0.0))


@pytest.fixture(scope="session")
def upstream_example():
    return affine_elliptic_example(0.5, 2.0, "upstream", Vec2(1.0, 1.0))


@pytest.fixture(scope="session")
def downstream_example():
    return affine_elliptic_example(0.5, 2.0, "downstream", Vec2(1.0, 1.0))


@pytest.fixture(scope="session")
def upstream_scenario():
    return Scenario(PointStart(Vec2(0.0, 0.0)), Target(Vec2(1.0, 1.0), 1e-6),
                    Ellipse(1.0, 0.5), UPSTREAM_FIELD, 4.0)


@pytest.fixture(scope="session")
def downstream_scenario():
    return Scenario(PointStart(Vec2(0.0, 0.0)), Target(Vec2(1.0, 1.0), 1e-6),
                    Ellipse(1.0, 0.5), DOWNSTREAM_FIELD, 4.0)


def optimal_costate_angle(example) -> float:
    """Initial costate direction consistent with the optimal exponential
    heading family: p(0) proportional to (1, a*C)."""
    return math.atan2(example.a * example.C_opt, 1.0)
