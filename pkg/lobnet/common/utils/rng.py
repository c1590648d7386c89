"""
Seed derivation for reproducible, parallel-safe randomness.

Every randomized stage draws from a numpy Generator derived from
(master seed, stream, index...), so a replica or a day gets the same stream
whether it runs serially or in a worker process.
"""
import numpy as np

# Stream identifiers keep the stages' random streams disjoint
STREAM_SYNTH = 1
STREAM_BOOTSTRAP = 2
STREAM_FITNESS = 3
STREAM_TEST = 99


def derive_seed_sequence(master_seed: int, *path: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream addressed by `path` under `master_seed`."""
    return np.random.default_rng(derive_seed_sequence(master_seed, *path))


def derive_int_seed(master_seed: int, *path: int) -> int:
    """A plain 32-bit seed for configs that store an integer (e.g. GenConfig.rng_seed)."""
    return int(derive_seed_sequence(master_seed, *path).generate_state(1)[0])
