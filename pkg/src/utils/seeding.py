"""Named random streams derived from one global seed.

Each subsystem asks for a generator by name. The stream for ``name`` is
``SeedSequence(seed, spawn_key=(crc32(name),))``, so it depends only on the
global seed and the name; adding or reordering subsystems never shifts
another subsystem's draws.
"""

import zlib
import numpy as np

# Stream names used by the trainers
MAIN_INIT = "main_init"
SCREENER_INIT = "screener_init"
SHUFFLE = "shuffle"
SAMPLING = "sampling"
ENV = "env"
EXPLORATION = "exploration"
EVALUATION = "evaluation"
DATA = "data"
DATA_TEST = "data_test"
TRACKING = "tracking"


class SeedStreams:
    """Factory for independent, reproducible generators."""

    def __init__(self, seed: int):
        self.seed = int(seed)

    def sequence(self, name: str) -> np.random.SeedSequence:
        key = zlib.crc32(name.encode("utf-8"))
        return np.random.SeedSequence(self.seed, spawn_key=(key,))

    def generator(self, name: str) -> np.random.Generator:
        return np.random.default_rng(self.sequence(name))

    def integer_seed(self, name: str) -> int:
        """A plain int seed for APIs that take one."""
        return int(self.sequence(name).generate_state(1)[0])
