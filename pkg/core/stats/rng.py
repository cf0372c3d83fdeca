"""
Seeded random number generation

All randomness flows through numpy Generators built on PCG64 from an explicit
seed; OS entropy is never consulted. Independent streams for parallel chains
are derived by SeedSequence spawning from the master seed.
"""
from typing import List, Optional, Union

import numpy as np

# A generator with explicit, single-owner state
RngState = np.random.Generator

MAX_SEED = 2 ** 64 - 1


def make_rng(seed: Union[int, np.random.SeedSequence]) -> RngState:
    """Deterministic generator for `seed`"""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    if seed is None:
        raise ValueError("An explicit seed is required")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"Seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_rngs(seed: int, n: int, offset: int = 0) -> List[RngState]:
    """
    n independent streams split from the master seed

    Stream k is the same whatever n is, so adding chains never changes the
    draws of existing ones.
    """
    children = np.random.SeedSequence(int(seed)).spawn(offset + n)[offset:]
    return [make_rng(child) for child in children]


def keyed_rngs(seed: int, key: int, n: int) -> List[RngState]:
    """
    n streams in the `key` namespace of the master seed, disjoint from
    spawn_rngs; stream k depends on (seed, key, k) only
    """
    return [make_rng(np.random.SeedSequence(int(seed), spawn_key=(int(key), k))) for k in range(n)]


def derive_seed(seed: int, *keys: int) -> int:
    """A child seed for (seed, *keys), stable across runs and platforms"""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def seed_of(rng: Optional[RngState]) -> Optional[int]:
    """Entropy of the seed sequence behind a generator, if known"""
    if rng is None:
        return None
    seq = getattr(rng.bit_generator, "seed_seq", None)
    return getattr(seq, "entropy", None)
