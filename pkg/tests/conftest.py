import pytest

from dose.config import default_config
from dose.isa import build_instruction_set

FIXED = "2021-03-04T05:06:07+00:00"


@pytest.fixture(scope="session")
def full_table():
    return build_instruction_set(1)


@pytest.fixture(scope="session")
def nbf_table():
    return build_instruction_set(0.1)


@pytest.fixture
def small_config():
    """Two populations of 10 on a 3x3x3 world for 12 generations."""
    return default_config(
        initial_chromosome=list("0" * 30), population_size=10, world_x=3, world_y=3, world_z=3,
        population_locations=[(0, 0, 0), (2, 2, 2)], maximum_generations=12,
        fossilized_frequency=4, fossilized_ratio=0.5, print_frequency=3,
        eco_buried_frequency=6, background_mutation_rate=0.1, cytoplasm_size=5,
    )
