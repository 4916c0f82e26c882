import pytest

from screennav.compositor import BranchingSpec, build_environment

ENV_BASE_BRANCHING = "5,3,2,2,1,1,0"
ENV_BASE_SEED = 42

# Frozen reference values, checked independently in the tests that cite them.
TABLE6 = {1: 137, 2: 147, 3: 222, 4: 324, 5: 492, 6: 456, 7: 384}
TEST_TASK_COUNT = 2162
PATH_INSTANCES = 12439
EDGE_INSTANCES = 274


@pytest.fixture(scope="session")
def env_base():
    return build_environment(BranchingSpec.parse(ENV_BASE_BRANCHING), ENV_BASE_SEED)


@pytest.fixture(scope="session")
def env_small():
    # 3 depth-1 subtrees of 3 nodes each: 10 nodes, max distance 4.
    return build_environment(BranchingSpec.parse("3,2,0"), 7)


@pytest.fixture(scope="session")
def env_tiny():
    return build_environment(BranchingSpec.parse("2,0"), 3)
