import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from graspmotion.demo import write_demo_robot
from graspmotion.kinematics import load_urdf, parse_urdf
from graspmotion.robot_model import gripper_points_from_chain, sample_surface_points

from helpers import PLANAR_2R_URDF


@pytest.fixture(scope="session")
def planar2r():
    return parse_urdf(PLANAR_2R_URDF, "base", "tool")


@pytest.fixture(scope="session")
def demo_robot_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("demo_robot")
    info = write_demo_robot(directory)
    return info


@pytest.fixture(scope="session")
def demo_chain(demo_robot_dir):
    return load_urdf(
        demo_robot_dir["urdf"], demo_robot_dir["base_link"], demo_robot_dir["tool_link"]
    )


@pytest.fixture(scope="session")
def demo_points(demo_chain):
    return sample_surface_points(demo_chain, points_per_link=100, seed=0)


@pytest.fixture(scope="session")
def demo_gripper(demo_chain):
    return gripper_points_from_chain(demo_chain, points_per_link=100, seed=0)


@pytest.fixture(scope="session")
def demo_q0(demo_robot_dir):
    return np.array(demo_robot_dir["q0"], dtype=float)
